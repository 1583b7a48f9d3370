//! Scenario files: which generator, which `Γ`, which constants and which grid.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vckdv_core::reduction::{CoefficientFamily, Gen1Constants, Gen2Constants, GeneratorId};
use vckdv_core::residual::{GridSpec, DEFAULT_EXCLUSION};
use vckdv_core::solutions::{default_params, SolutionId, SolutionParams};
use vckdv_core::tanh::{check_constants_gen1, check_constants_gen2, check_constants_gen2_rational, Branch, Gen1Claim, Gen2Claim};
use vckdv_core::GammaFamily;

/// A scenario error, located by a dotted path into the document.
#[derive(Clone, PartialEq, Debug)]
pub struct ScenarioError {
    pub pointer: String,
    pub message: String,
}

impl ScenarioError {
    pub fn at(pointer: impl Into<String>, message: impl fmt::Display) -> Self {
        ScenarioError {
            pointer: pointer.into(),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pointer.is_empty() || self.pointer == "." {
            write!(f, "scenario: {}", self.message)
        } else {
            write!(f, "scenario key `{}`: {}", self.pointer, self.message)
        }
    }
}

impl std::error::Error for ScenarioError {}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Deserialize, Serialize)]
pub enum Generator {
    I,
    II,
}

impl Generator {
    pub fn id(self) -> GeneratorId {
        match self {
            Generator::I => GeneratorId::I,
            Generator::II => GeneratorId::II,
        }
    }
}

#[derive(Clone, PartialEq, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaSpec {
    pub kind: String,
    pub params: Vec<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchName {
    Minus,
    Plus,
    Rational,
}

/// Constants of a generator family. Which keys are needed depends on the
/// generator and the subcommand; unused keys are ignored.
#[derive(Clone, PartialEq, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constants {
    pub n2: Option<f64>,
    pub n5: Option<f64>,
    pub n6: Option<f64>,
    /// Full `n1 … n6`, overriding the derived values.
    pub n: Option<[f64; 6]>,
    pub k1: Option<f64>,
    pub x0: Option<f64>,
    /// `m1 … m5`, or `m1 … m6` for an explicit family.
    pub m: Option<Vec<f64>>,
    pub k2: Option<f64>,
    pub k3: Option<f64>,
    pub k4: Option<f64>,
    pub branch: Option<BranchName>,
}

#[derive(Clone, Copy, PartialEq, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFile {
    pub t: (f64, f64, usize),
    pub x: (f64, f64, usize),
    #[serde(default = "default_exclusion")]
    pub exclusion: f64,
}

fn default_exclusion() -> f64 {
    DEFAULT_EXCLUSION
}

#[derive(Clone, PartialEq, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Deserialize, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SignsName {
    AsPrinted,
    Consistent,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Deserialize, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ReadingName {
    ChainRule,
    AsPrinted,
    Both,
}

#[derive(Clone, PartialEq, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    pub id: Option<String>,
    pub signs: Option<SignsName>,
    pub reading: Option<ReadingName>,
    pub n_samples: Option<usize>,
    pub n_profiles: Option<usize>,
    pub n_starts: Option<usize>,
    pub spot_checks: Option<usize>,
    pub zeta0: Option<f64>,
    pub length: Option<f64>,
}

#[derive(Clone, PartialEq, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub seed: u64,
    pub generator: Generator,
    pub gamma: GammaSpec,
    #[serde(default)]
    pub constants: Constants,
    pub grid: Option<GridFile>,
    #[serde(default)]
    pub output: Output,
    #[serde(default)]
    pub options: Options,
}

pub const DEFAULT_GRID: GridFile = GridFile {
    t: (0.5, 1.5, 50),
    x: (-2.0, 2.0, 50),
    exclusion: DEFAULT_EXCLUSION,
};

impl Scenario {
    pub fn from_json(text: &str) -> Result<Scenario, ScenarioError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let s: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let pointer = e.path().to_string();
            ScenarioError::at(pointer, e.into_inner())
        })?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Scenario, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::at("", format!("cannot read {}: {e}", path.display())))?;
        Scenario::from_json(&text)
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        let gamma = self.gamma_family()?;
        let grid = self.grid_spec()?;
        gamma
            .validate(grid.t.0, grid.t.1)
            .map_err(|e| ScenarioError::at("gamma", e))?;
        if let Some(m) = &self.constants.m {
            if m.len() != 5 && m.len() != 6 {
                return Err(ScenarioError::at("constants.m", format!("expected 5 or 6 entries, got {}", m.len())));
            }
        }
        if let Some(id) = &self.options.id {
            id.parse::<SolutionId>().map_err(|e| ScenarioError::at("options.id", e))?;
        }
        Ok(())
    }

    pub fn gamma_family(&self) -> Result<GammaFamily, ScenarioError> {
        GammaFamily::from_kind(&self.gamma.kind, &self.gamma.params).map_err(|e| ScenarioError::at("gamma", e))
    }

    pub fn grid_spec(&self) -> Result<GridSpec, ScenarioError> {
        let g = self.grid.unwrap_or(DEFAULT_GRID);
        let spec = GridSpec::new(g.t, g.x).with_exclusion(g.exclusion);
        spec.validate().map_err(|e| ScenarioError::at("grid", e))?;
        Ok(spec)
    }

    fn need(&self, key: &str, v: Option<f64>) -> Result<f64, ScenarioError> {
        v.ok_or_else(|| ScenarioError::at(format!("constants.{key}"), "missing"))
    }

    pub fn gen1_claim(&self) -> Result<Gen1Claim, ScenarioError> {
        let c = &self.constants;
        let n2 = self.need("n2", c.n2.or(c.n.map(|n| n[1])))?;
        let n5 = self.need("n5", c.n5.or(c.n.map(|n| n[4])))?;
        let n6 = self.need("n6", c.n6.or(c.n.map(|n| n[5])))?;
        check_constants_gen1(n2, n5, n6).map_err(|e| ScenarioError::at("constants", e))
    }

    fn m5(&self) -> Result<[f64; 5], ScenarioError> {
        let m = self.constants.m.as_ref().ok_or_else(|| ScenarioError::at("constants.m", "missing"))?;
        Ok([m[0], m[1], m[2], m[3], m[4]])
    }

    pub fn branch(&self) -> BranchName {
        self.constants.branch.unwrap_or(BranchName::Minus)
    }

    /// The constant set claimed for the second generator on the scenario's
    /// branch. An `m1 = 0` input fails here with the precondition named.
    pub fn gen2_claim(&self) -> Result<Gen2Claim, ScenarioError> {
        let m = self.m5()?;
        let located = |e| ScenarioError::at("constants.m[0]", e);
        match self.branch() {
            BranchName::Minus => check_constants_gen2(m, Branch::Minus).map_err(located),
            BranchName::Plus => check_constants_gen2(m, Branch::Plus).map_err(located),
            BranchName::Rational => {
                let claim = check_constants_gen2_rational(m[0], m[1], m[3], m[4]).map_err(located)?;
                check_derived_m3(m[2], claim.m[2])?;
                Ok(claim)
            }
        }
    }

    /// The coefficient family: explicit constants when given in full,
    /// otherwise the claimed constant set.
    pub fn family(&self) -> Result<CoefficientFamily, ScenarioError> {
        let gamma = self.gamma_family()?;
        let c = &self.constants;
        match self.generator {
            Generator::I => {
                let consts = match (c.n, c.k1) {
                    (Some(n), Some(k1)) => Gen1Constants::new(n, k1),
                    (Some(_), None) => return Err(ScenarioError::at("constants.k1", "missing (required with `n`)")),
                    _ => {
                        let claim = self.gen1_claim()?;
                        Gen1Constants::new(claim.n, claim.k1)
                    }
                };
                let consts = match c.x0 {
                    Some(x0) => consts.with_x0(x0),
                    None => consts,
                };
                Ok(CoefficientFamily::generator_one(gamma, consts))
            }
            Generator::II => {
                let m = c.m.as_ref().ok_or_else(|| ScenarioError::at("constants.m", "missing"))?;
                let consts = if m.len() == 6 {
                    let k2 = self.need("k2", c.k2)?;
                    let k3 = self.need("k3", c.k3)?;
                    Gen2Constants::new([m[0], m[1], m[2], m[3], m[4], m[5]], k2, k3)
                } else {
                    let claim = self.gen2_claim()?;
                    Gen2Constants::new(claim.m, claim.k2, claim.k3)
                };
                Ok(CoefficientFamily::generator_two(gamma, consts))
            }
        }
    }

    /// `k4` of the printed second reduced ODE; defaults to `k3`.
    pub fn k4(&self, k3: f64) -> f64 {
        self.constants.k4.unwrap_or(k3)
    }

    /// Solution parameters for `id`, from the constants or the defaults when
    /// the scenario gives none.
    pub fn solution_params(&self, id: SolutionId) -> Result<SolutionParams, ScenarioError> {
        let wanted = if id == SolutionId::U1 { Generator::I } else { Generator::II };
        if self.generator != wanted {
            return Err(ScenarioError::at("generator", format!("{id} belongs to generator {wanted:?}")));
        }
        let c = &self.constants;
        match id {
            SolutionId::U1 => {
                if c.n2.is_none() && c.n5.is_none() && c.n6.is_none() {
                    return Ok(default_params(id));
                }
                Ok(SolutionParams::Gen1 {
                    n2: self.need("n2", c.n2)?,
                    n5: self.need("n5", c.n5)?,
                    n6: self.need("n6", c.n6)?,
                })
            }
            _ if c.m.is_none() => Ok(default_params(id)),
            SolutionId::U6 => {
                let m = self.m5()?;
                if m[0] != 0.0 {
                    check_derived_m3(m[2], m[1] * m[1] / (3.0 * m[0]))?;
                }
                Ok(SolutionParams::Gen2Rational {
                    m1: m[0],
                    m2: m[1],
                    m4: m[3],
                    m5: m[4],
                })
            }
            _ => Ok(SolutionParams::Gen2 { m: self.m5()? }),
        }
    }

    pub fn solution_id(&self, flag: Option<SolutionId>) -> Result<SolutionId, ScenarioError> {
        if let Some(id) = flag {
            return Ok(id);
        }
        match &self.options.id {
            Some(s) => s.parse().map_err(|e| ScenarioError::at("options.id", e)),
            None => Ok(match self.generator {
                Generator::I => SolutionId::U1,
                Generator::II => match self.branch() {
                    BranchName::Minus => SolutionId::U2,
                    BranchName::Plus => SolutionId::U4,
                    BranchName::Rational => SolutionId::U6,
                },
            }),
        }
    }
}

fn check_derived_m3(given: f64, derived: f64) -> Result<(), ScenarioError> {
    if (given - derived).abs() > 1e-12 * derived.abs().max(1.0) {
        return Err(ScenarioError::at(
            "constants.m[2]",
            format!("the rational branch fixes m3 = m2^2/(3 m1) = {derived}, got {given}"),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"{
        "generator": "II",
        "gamma": {"kind": "linear", "params": [1, 0]},
        "constants": {"m": [1, 1, 0, 0, 0]},
        "grid": {"t": [0.5, 1.5, 10], "x": [-2, 2, 10]}
    }"#;

    #[test]
    fn parses_with_defaults() {
        let s = Scenario::from_json(GOOD).unwrap();
        assert_eq!(s.seed, 0);
        assert_eq!(s.grid.unwrap().exclusion, DEFAULT_EXCLUSION);
        assert_eq!(s.branch(), BranchName::Minus);
        assert_eq!(s.solution_id(None).unwrap(), SolutionId::U2);
        let claim = s.gen2_claim().unwrap();
        assert_eq!(claim.k3, 0.0);
    }

    #[test]
    fn unknown_keys_are_located() {
        let bad = GOOD.replace("\"m\":", "\"mm\":");
        let e = Scenario::from_json(&bad).unwrap_err();
        assert_eq!(e.pointer, "constants.mm");
        assert!(e.message.contains("unknown field"), "{e}");
    }

    #[test]
    fn zero_m1_names_the_precondition() {
        let bad = GOOD.replace("[1, 1, 0, 0, 0]", "[0, 1, 0, 0, 0]");
        let s = Scenario::from_json(&bad).unwrap();
        let e = s.gen2_claim().unwrap_err();
        assert_eq!(e.pointer, "constants.m[0]");
        assert!(e.to_string().contains("m1 != 0"), "{e}");
    }

    #[test]
    fn bad_gamma_and_grid() {
        let e = Scenario::from_json(&GOOD.replace("\"linear\"", "\"cubic\"")).unwrap_err();
        assert_eq!(e.pointer, "gamma");
        let e = Scenario::from_json(&GOOD.replace("[0.5, 1.5, 10]", "[0.5, 1.5, 0]")).unwrap_err();
        assert_eq!(e.pointer, "grid");
        let e = Scenario::from_json(&GOOD.replace("[0.5, 1.5, 10]", "[-1.5, 1.5, 10]")).unwrap_err();
        assert_eq!(e.pointer, "gamma");
    }

    #[test]
    fn rational_branch_checks_m3() {
        let s = GOOD.replace("\"m\": [1, 1, 0, 0, 0]", "\"m\": [1, 1, 0.25, 0, 0], \"branch\": \"rational\"");
        let e = Scenario::from_json(&s).unwrap().gen2_claim().unwrap_err();
        assert_eq!(e.pointer, "constants.m[2]");
    }

    #[test]
    fn generator_must_match_solution() {
        let s = Scenario::from_json(GOOD).unwrap();
        assert_eq!(s.solution_params(SolutionId::U1).unwrap_err().pointer, "generator");
    }
}
