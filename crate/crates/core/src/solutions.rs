//! The six closed-form solutions, encoded exactly as printed, together with
//! the constants they are built from and their singular loci.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::expr::{EvalError, Expr};
use crate::gamma::GammaFamily;
use crate::jet::{jet_eval, Jet, JetVars};
use crate::phi::RiccatiSolution;
use crate::rational::Rational;
use crate::reduction::{
    CoefficientFamily, ExprProfile, Gen1Constants, Gen2Constants, Gen2Reading, Profile, ReducedOde, ReductionSpec,
    SingularSet,
};
use crate::residual::{Field, DEFAULT_EXCLUSION};
use crate::tanh::{check_constants_gen1, check_constants_gen2, check_constants_gen2_rational, Branch, Gen1Claim, Gen2Claim, TanhError};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum SolutionId {
    U1,
    U2,
    U3,
    U4,
    U5,
    U6,
}

impl SolutionId {
    pub const ALL: [SolutionId; 6] = [
        SolutionId::U1,
        SolutionId::U2,
        SolutionId::U3,
        SolutionId::U4,
        SolutionId::U5,
        SolutionId::U6,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolutionId::U1 => "u1",
            SolutionId::U2 => "u2",
            SolutionId::U3 => "u3",
            SolutionId::U4 => "u4",
            SolutionId::U5 => "u5",
            SolutionId::U6 => "u6",
        }
    }

    fn riccati(self) -> Option<RiccatiSolution> {
        match self {
            SolutionId::U1 => None,
            SolutionId::U2 => Some(RiccatiSolution::Tanh),
            SolutionId::U3 => Some(RiccatiSolution::Coth),
            SolutionId::U4 => Some(RiccatiSolution::Tan),
            SolutionId::U5 => Some(RiccatiSolution::Cot),
            SolutionId::U6 => Some(RiccatiSolution::Rational),
        }
    }
}

impl fmt::Display for SolutionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolutionId {
    type Err = SolutionError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SolutionId::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| SolutionError::UnknownId(s.into()))
    }
}

/// Free parameters of a solution; everything else is derived.
#[derive(Clone, Copy, PartialEq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum SolutionParams {
    /// For `u1`.
    Gen1 { n2: f64, n5: f64, n6: f64 },
    /// `m1 … m5` for `u2` to `u5`.
    Gen2 { m: [f64; 5] },
    /// For `u6`; `m3` is derived.
    Gen2Rational { m1: f64, m2: f64, m4: f64, m5: f64 },
}

#[derive(Clone, PartialEq, Debug)]
pub enum SolutionError {
    UnknownId(String),
    ParamsMismatch { id: SolutionId },
    Constants(TanhError),
    OutOfDomain { x: f64, t: f64 },
    Eval(EvalError),
}

impl fmt::Display for SolutionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolutionError::UnknownId(s) => write!(f, "unknown solution id `{s}` (expected u1 to u6)"),
            SolutionError::ParamsMismatch { id } => write!(f, "parameters do not match solution {id}"),
            SolutionError::Constants(e) => write!(f, "{e}"),
            SolutionError::OutOfDomain { x, t } => write!(f, "({x}, {t}) is within the exclusion radius of a singular locus"),
            SolutionError::Eval(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for SolutionError {}

impl From<TanhError> for SolutionError {
    fn from(e: TanhError) -> Self {
        SolutionError::Constants(e)
    }
}

#[derive(Clone, Copy, PartialEq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(untagged))]
pub enum SolutionConstants {
    Gen1(Gen1Claim),
    Gen2(Gen2Claim),
}

#[derive(Clone, PartialEq, Debug)]
pub struct SolutionRecord {
    pub id: SolutionId,
    pub params: SolutionParams,
    pub gamma: GammaFamily,
    pub constants: SolutionConstants,
    pub family: CoefficientFamily,
    pub spec: ReductionSpec,
    /// The reduced ODE `F` should satisfy. For the second generator this is
    /// the chain-rule reading.
    pub ode: ReducedOde,
    /// `u(x, t)` as printed.
    pub closed_form: Expr,
    /// The `ζ`-part of the printed form, in the variable `zeta`.
    pub printed_profile: ExprProfile,
    /// `F` composed from the ansatz and the Riccati solution, in `zeta`.
    pub ansatz_profile: ExprProfile,
    pub singular: SingularSet,
}

fn c(v: f64) -> Expr {
    Expr::c(v)
}

fn printed_u1(claim: &Gen1Claim, zeta: Expr) -> Expr {
    c(1.5 * claim.n[5]) + c(claim.a1) * zeta.powr(Rational::frac(-2, 3))
}

/// The bracketed `ζ`-part of the second-generator solutions as printed.
fn printed_gen2(id: SolutionId, claim: &Gen2Claim, zeta: Expr) -> Expr {
    let [m1, m2, m3, ..] = claim.m;
    let r = claim.ansatz.r;
    let two_thirds = Rational::frac(2, 3);
    let k = 2.0 * libm::cbrt(5.0 / (9.0 * m1));
    let a0 = m2 / (3.0 * m1);
    let b = libm::pow(15.0 / m1, 2.0 / 3.0) * (3.0 * m3 * m1 - m2 * m2) / (63.0 * m1);
    let cr = libm::cbrt(r);
    let sq = libm::sqrt(libm::fabs(r));
    let arg = c(sq) * zeta.clone();
    let trig = |e: Expr| e.powr(two_thirds);
    match id {
        SolutionId::U2 | SolutionId::U3 => {
            let f = if id == SolutionId::U2 { arg.tanh() } else { arg.coth() };
            let s = if id == SolutionId::U2 { -1.0 } else { 1.0 };
            c(-a0) + c(k * cr) * trig(f.clone()) + c(s * b) / (c(cr) * trig(f))
        }
        SolutionId::U4 | SolutionId::U5 => {
            let f = if id == SolutionId::U4 { arg.tan() } else { arg.cot() };
            -(c(a0) + c(k * cr) * trig(f.clone()) - c(b) / (c(cr) * trig(f)))
        }
        SolutionId::U6 => -(c(a0) + c(k) * zeta.powr(Rational::frac(-2, 3))),
        SolutionId::U1 => unreachable!("u1 belongs to the first generator"),
    }
}

impl SolutionRecord {
    pub fn build(id: SolutionId, params: SolutionParams, gamma: GammaFamily) -> Result<Self, SolutionError> {
        let zeta_var = Expr::var("zeta");
        match (id, params) {
            (SolutionId::U1, SolutionParams::Gen1 { n2, n5, n6 }) => {
                let claim = check_constants_gen1(n2, n5, n6)?;
                let consts = Gen1Constants::new(claim.n, claim.k1);
                let family = CoefficientFamily::generator_one(gamma, consts);
                let spec = ReductionSpec::generator_one(gamma, claim.k1, consts.x0);
                let closed_form = spec.amp.clone() * printed_u1(&claim, spec.zeta.clone());
                let singular = SingularSet::Points(alloc::vec![0.0]);
                let profile = ExprProfile::new(printed_u1(&claim, zeta_var), "zeta").with_singularities(singular.clone());
                Ok(SolutionRecord {
                    id,
                    params,
                    gamma,
                    constants: SolutionConstants::Gen1(claim),
                    family,
                    ode: claim.ode(),
                    spec,
                    closed_form,
                    printed_profile: profile.clone(),
                    ansatz_profile: profile,
                    singular,
                })
            }
            (SolutionId::U2 | SolutionId::U3 | SolutionId::U4 | SolutionId::U5, SolutionParams::Gen2 { m }) => {
                let branch = if matches!(id, SolutionId::U2 | SolutionId::U3) {
                    Branch::Minus
                } else {
                    Branch::Plus
                };
                let claim = check_constants_gen2(m, branch)?;
                Self::gen2(id, params, gamma, claim)
            }
            (SolutionId::U6, SolutionParams::Gen2Rational { m1, m2, m4, m5 }) => {
                let claim = check_constants_gen2_rational(m1, m2, m4, m5)?;
                Self::gen2(id, params, gamma, claim)
            }
            _ => Err(SolutionError::ParamsMismatch { id }),
        }
    }

    fn gen2(id: SolutionId, params: SolutionParams, gamma: GammaFamily, claim: Gen2Claim) -> Result<Self, SolutionError> {
        let riccati = id.riccati().expect("second-generator solutions use a Riccati form");
        let family = CoefficientFamily::generator_two(gamma, Gen2Constants::new(claim.m, claim.k2, claim.k3));
        let spec = ReductionSpec::generator_two(gamma, claim.k2, claim.k3);
        let zeta_var = Expr::var("zeta");
        let closed_form = spec.amp.clone() * printed_gen2(id, &claim, spec.zeta.clone());
        let singular = riccati.singular_set(claim.ansatz.r);
        let phi = riccati
            .expr(claim.ansatz.r, &zeta_var)
            .map_err(|_| SolutionError::Constants(TanhError::Precondition("the Riccati parameter has the wrong sign for this solution")))?;
        let ansatz_profile = ExprProfile::new(claim.ansatz.poly().to_expr(&phi), "zeta").with_singularities(singular.clone());
        Ok(SolutionRecord {
            id,
            params,
            gamma,
            constants: SolutionConstants::Gen2(claim),
            family,
            ode: claim.ode(Gen2Reading::ChainRule),
            spec,
            closed_form,
            printed_profile: ExprProfile::new(printed_gen2(id, &claim, zeta_var), "zeta").with_singularities(singular.clone()),
            ansatz_profile,
            singular,
        })
    }

    pub fn zeta_at(&self, x: f64, t: f64) -> Result<f64, EvalError> {
        self.spec.zeta_at(x, t)
    }

    pub fn in_domain(&self, x: f64, t: f64, radius: f64) -> bool {
        match self.zeta_at(x, t) {
            Ok(z) => self.singular.distance(z) >= radius,
            Err(_) => false,
        }
    }

    pub fn evaluate(&self, x: f64, t: f64) -> Result<f64, SolutionError> {
        if !self.in_domain(x, t, DEFAULT_EXCLUSION) {
            return Err(SolutionError::OutOfDomain { x, t });
        }
        self.closed_form.eval(&[("x", x), ("t", t)]).map_err(SolutionError::Eval)
    }

    /// Reduced-ODE residual of the printed `ζ`-part at each sample.
    pub fn ode_residuals(&self, zetas: &[f64]) -> Vec<(f64, Result<f64, EvalError>)> {
        zetas
            .iter()
            .map(|&z| (z, self.printed_profile.derivatives(z).map(|d| self.ode.residual(z, d))))
            .collect()
    }
}

impl Field for SolutionRecord {
    fn jet(&self, x: f64, t: f64) -> Result<Jet, EvalError> {
        jet_eval(&self.closed_form, &[("x", x), ("t", t)], JetVars::xt("x", "t"))
    }

    fn value(&self, x: f64, t: f64) -> Result<f64, EvalError> {
        self.closed_form.eval(&[("x", x), ("t", t)])
    }

    fn excluded(&self, x: f64, t: f64, radius: f64) -> bool {
        !self.in_domain(x, t, radius)
    }
}

/// Default parameters and grids used by the audits.
pub fn default_params(id: SolutionId) -> SolutionParams {
    match id {
        SolutionId::U1 => SolutionParams::Gen1 { n2: 60.0, n5: 0.0, n6: 1.0 },
        SolutionId::U6 => SolutionParams::Gen2Rational {
            m1: 1.0,
            m2: 1.0,
            m4: 0.0,
            m5: 0.0,
        },
        _ => SolutionParams::Gen2 {
            m: [1.0, 1.0, 0.0, 0.0, 0.0],
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn u1_reference_example() {
        let rec = SolutionRecord::build(SolutionId::U1, default_params(SolutionId::U1), GammaFamily::IDENTITY).unwrap();
        for (x, t) in [(1.0, 1.0), (2.5, 1.7), (4.0, 1.2)] {
            let z: f64 = (x + 2.0 / 3.0) * libm::pow(t, -1.0 / 3.0);
            let expect = libm::pow(t, -2.0 / 9.0) * (1.5 + libm::pow(libm::cbrt(z), -2.0));
            assert_relative_eq!(rec.evaluate(x, t).unwrap(), expect, max_relative = 1e-13);
        }
        // far field
        let far = rec.evaluate(1e9, 2.0).unwrap();
        assert_relative_eq!(far, 1.5 * libm::pow(2.0, -2.0 / 9.0), max_relative = 1e-5);
    }

    #[test]
    fn u6_trivial_example() {
        let p = SolutionParams::Gen2Rational {
            m1: 5.0 / 9.0,
            m2: 0.0,
            m4: 0.0,
            m5: 0.0,
        };
        let rec = SolutionRecord::build(SolutionId::U6, p, GammaFamily::IDENTITY).unwrap();
        let SolutionConstants::Gen2(c) = rec.constants else { panic!() };
        assert_eq!(c.k2, 0.0);
        let (x, t) = (-1.3, 0.8);
        assert_relative_eq!(rec.evaluate(x, t).unwrap(), -2.0 * libm::pow(libm::cbrt(-x), -2.0), max_relative = 1e-13);
        assert!(matches!(rec.evaluate(0.0, 1.0), Err(SolutionError::OutOfDomain { .. })));
    }

    #[test]
    fn u2_constants() {
        let rec = SolutionRecord::build(SolutionId::U2, default_params(SolutionId::U2), GammaFamily::EXP).unwrap();
        let SolutionConstants::Gen2(c) = rec.constants else { panic!() };
        assert_relative_eq!(c.ansatz.r, -libm::sqrt(5.0 / 14.0) / 42.0, max_relative = 1e-14);
    }

    #[test]
    fn u2_matches_ansatz_composition() {
        let rec = SolutionRecord::build(SolutionId::U2, default_params(SolutionId::U2), GammaFamily::EXP).unwrap();
        let mut n = 0;
        for i in 0..10 {
            for j in 0..5 {
                let (x, t) = (-4.0 + 0.8 * i as f64, 0.3 + 0.3 * j as f64);
                let z = rec.zeta_at(x, t).unwrap();
                if !rec.in_domain(x, t, 0.05) {
                    continue;
                }
                let amp = rec.spec.amp.eval(&[("t", t)]).unwrap();
                let f = rec.ansatz_profile.derivatives(z).unwrap()[0];
                assert_relative_eq!(rec.evaluate(x, t).unwrap(), amp * f, max_relative = 1e-12);
                n += 1;
            }
        }
        assert!(n > 40);
    }

    #[test]
    fn params_must_match() {
        assert!(matches!(
            SolutionRecord::build(SolutionId::U1, default_params(SolutionId::U2), GammaFamily::IDENTITY),
            Err(SolutionError::ParamsMismatch { .. })
        ));
        assert!("u7".parse::<SolutionId>().is_err());
        assert_eq!("U3".parse::<SolutionId>().unwrap(), SolutionId::U3);
    }
}
