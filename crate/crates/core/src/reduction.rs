//! Coefficient families, similarity maps and reduced ODEs for the two
//! non-trivial optimal-system generators `V1 + k1 V4` and `V2 + k2 V3 + k3 V4`.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::expr::{EvalError, Expr};
use crate::gamma::GammaFamily;
use crate::jet::{jet_eval, Jet, JetVars};
use crate::lie::{InfinitesimalGenerator, Point, SampleDomain};
use crate::residual::{pde_residual, residual_terms, Field, GridSpec, ResidualError, ResidualReport};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum GeneratorId {
    I,
    II,
}

impl fmt::Display for GeneratorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GeneratorId::I => "I",
            GeneratorId::II => "II",
        })
    }
}

/// Constants of the first family: `n1 … n6`, `k1` and the translation `x0`.
#[derive(Clone, Copy, PartialEq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Gen1Constants {
    pub n: [f64; 6],
    pub k1: f64,
    pub x0: f64,
}

impl Gen1Constants {
    /// Translation defaults to `x0 = k1`.
    pub fn new(n: [f64; 6], k1: f64) -> Self {
        Gen1Constants { n, k1, x0: k1 }
    }

    pub fn with_x0(mut self, x0: f64) -> Self {
        self.x0 = x0;
        self
    }
}

/// Constants of the second family: `m1 … m6`, `k2`, `k3`.
#[derive(Clone, Copy, PartialEq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Gen2Constants {
    pub m: [f64; 6],
    pub k2: f64,
    pub k3: f64,
}

impl Gen2Constants {
    pub fn new(m: [f64; 6], k2: f64, k3: f64) -> Self {
        Gen2Constants { m, k2, k3 }
    }
}

#[derive(Clone, Copy, PartialEq, Debug)]
pub enum FamilyKind {
    I(Gen1Constants),
    II(Gen2Constants),
    Custom,
}

/// The seven coefficients `g1 … g7` as expressions in `t`.
#[derive(Clone, PartialEq, Debug)]
pub struct CoefficientFamily {
    pub kind: FamilyKind,
    pub gamma: Option<GammaFamily>,
    pub g: [Expr; 7],
}

/// `Γ^a` for real `a`, written through `exp(a ln Γ)`.
fn gamma_pow(gamma: &GammaFamily, a: f64) -> Expr {
    if a == 0.0 {
        return Expr::one();
    }
    (Expr::c(a) * gamma.gamma().ln()).exp()
}

impl CoefficientFamily {
    pub fn generator_one(gamma: GammaFamily, c: Gen1Constants) -> Self {
        let [n1, n2, n3, n4, n5, n6] = c.n;
        let k1 = c.k1;
        let g1 = gamma.g1();
        let term = |n: f64, a: f64| Expr::c(n / 3.0) * g1.clone() * gamma_pow(&gamma, a);
        CoefficientFamily {
            kind: FamilyKind::I(c),
            gamma: Some(gamma),
            g: [
                g1.clone(),
                term(n1, -2.0 / 3.0 + k1),
                term(n2, 2.0 / 3.0 * (k1 - 1.0)),
                term(n3, (k1 - 2.0) / 3.0),
                term(n4, -2.0 / 3.0),
                term(n5, -1.0),
                term(n6, -(1.0 + k1 / 3.0)),
            ],
        }
    }

    pub fn generator_two(gamma: GammaFamily, c: Gen2Constants) -> Self {
        let [m1, m2, m3, m4, m5, m6] = c.m;
        let g1 = gamma.g1();
        let term = |m: f64, s: f64| {
            let e = if s == 0.0 {
                Expr::one()
            } else {
                (Expr::c(s * c.k3) * gamma.gamma()).exp()
            };
            Expr::c(m) * g1.clone() * e
        };
        CoefficientFamily {
            kind: FamilyKind::II(c),
            gamma: Some(gamma),
            g: [
                g1.clone(),
                term(m1, 3.0),
                term(m2, 2.0),
                term(m3, 1.0),
                term(m4, 0.0),
                term(m5, 0.0),
                term(m6, -1.0),
            ],
        }
    }

    /// Arbitrary coefficients, e.g. for manufactured solutions.
    pub fn custom(g: [Expr; 7]) -> Self {
        CoefficientFamily {
            kind: FamilyKind::Custom,
            gamma: None,
            g,
        }
    }

    /// The same family with `delta` added to `g_index` (1-based). The result
    /// is no longer tied to a generator.
    pub fn perturbed(&self, g_index: usize, delta: Expr) -> Self {
        assert!((1..=7).contains(&g_index), "coefficient index must be in 1..=7");
        let mut out = self.clone();
        out.g[g_index - 1] = out.g[g_index - 1].clone() + delta;
        out.kind = FamilyKind::Custom;
        out
    }

    pub fn generator_id(&self) -> Option<GeneratorId> {
        match self.kind {
            FamilyKind::I(_) => Some(GeneratorId::I),
            FamilyKind::II(_) => Some(GeneratorId::II),
            FamilyKind::Custom => None,
        }
    }

    /// Symmetry generator of the family: `c = (1, 0, x0, k1, 0)` for the
    /// first family and `c = (0, 1, k2, k3, 0)` for the second.
    pub fn generator(&self) -> Option<InfinitesimalGenerator> {
        let gamma = self.gamma?;
        match self.kind {
            FamilyKind::I(c) => Some(InfinitesimalGenerator::new([1.0, 0.0, c.x0, c.k1, 0.0], gamma)),
            FamilyKind::II(c) => Some(InfinitesimalGenerator::new([0.0, 1.0, c.k2, c.k3, 0.0], gamma)),
            FamilyKind::Custom => None,
        }
    }

    pub fn eval_at(&self, t: f64) -> Result<[f64; 7], EvalError> {
        let env = [("t", t)];
        let mut out = [0.0; 7];
        for (o, g) in out.iter_mut().zip(&self.g) {
            *o = g.eval(&env)?;
        }
        Ok(out)
    }
}

/// A single equation given as a list of terms whose sum must vanish.
#[derive(Clone, Debug)]
struct TermEquation {
    name: &'static str,
    terms: Vec<Expr>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum EquationGroup {
    /// Conditions on `A`, `B`, `C` from the symmetry condition.
    Determining,
    /// First-order ODEs linking `g2 … g7` to the generator constants.
    Constraint,
}

/// Which sign to use for the `c5` terms of the `g5` and `g7` constraints.
///
/// `AsPrinted` has `+c5 g4` and `+c5 g6`. `Consistent` has `−c5 g4` and
/// `−c5 g6`, which is what the determining equations imply. The two agree
/// whenever `c5 = 0`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum ConstraintSigns {
    #[default]
    AsPrinted,
    Consistent,
}

fn determining_equations(gen: &InfinitesimalGenerator, fam: &CoefficientFamily, signs: ConstraintSigns) -> Vec<TermEquation> {
    let a = gen.a();
    let b = gen.b();
    let c = gen.c_component();
    let g = &fam.g;
    let u = Expr::var("u");
    let ag_t = |i: usize| (a.clone() * g[i - 1].clone()).diff("t");
    let gi = |i: usize| g[i - 1].clone();
    let bx = b.diff("x");
    let cx = c.diff("x");
    let cu = c.diff("u");
    let [c1, _, _, c4, c5] = gen.c;
    let k = Expr::c;
    let s5 = match signs {
        ConstraintSigns::AsPrinted => 1.0,
        ConstraintSigns::Consistent => -1.0,
    };
    vec![
        TermEquation { name: "A_x", terms: vec![a.diff("x")] },
        TermEquation { name: "A_u", terms: vec![a.diff("u")] },
        TermEquation { name: "B_u", terms: vec![b.diff("u")] },
        TermEquation { name: "C_uu", terms: vec![cu.diff("u")] },
        TermEquation { name: "C_xu", terms: vec![cx.diff("u")] },
        TermEquation {
            name: "dispersion scaling",
            terms: vec![k(3.0) * gi(1) * bx.clone(), -ag_t(1)],
        },
        TermEquation {
            name: "zeroth order",
            terms: vec![
                c.diff("t"),
                -ag_t(7),
                -(ag_t(6) * u.clone()),
                gi(1) * cx.diff("x").diff("x"),
                gi(2) * cx.clone() * u.clone().powi(3),
                gi(3) * cx.clone() * u.clone().powi(2),
                gi(4) * cx.clone() * u.clone(),
                gi(5) * cx.clone(),
                -(gi(6) * cu.clone() * u.clone()),
                -(gi(7) * cu.clone()),
                gi(6) * c.clone(),
            ],
        },
        TermEquation {
            name: "first order",
            terms: vec![
                gi(2) * bx.clone() * u.clone().powi(3),
                gi(5) * bx.clone(),
                -ag_t(5),
                -(ag_t(2) * u.clone().powi(3)),
                -(ag_t(3) * u.clone().powi(2)),
                k(2.0) * gi(3) * u.clone() * c.clone(),
                b.diff("t"),
                gi(4) * c.clone(),
                k(3.0) * gi(2) * u.clone().powi(2) * c.clone(),
                -(ag_t(4) * u.clone()),
                gi(4) * bx.clone() * u.clone(),
                gi(3) * bx.clone() * u.clone().powi(2),
            ],
        },
        TermEquation {
            name: "g2",
            terms: vec![ag_t(2), k(-(c1 + 3.0 * c4)) * gi(2)],
        },
        TermEquation {
            name: "g3",
            terms: vec![ag_t(3), k(-(c1 + 2.0 * c4)) * gi(3), k(-3.0 * c5) * gi(2)],
        },
        TermEquation {
            name: "g4",
            terms: vec![ag_t(4), k(-(c1 + c4)) * gi(4), k(-2.0 * c5) * gi(3)],
        },
        TermEquation {
            name: "g5",
            terms: vec![ag_t(5), k(-c1) * gi(5), k(s5 * c5) * gi(4)],
        },
        TermEquation { name: "g6", terms: vec![ag_t(6)] },
        TermEquation {
            name: "g7",
            terms: vec![ag_t(7), k(c4) * gi(7), k(s5 * c5) * gi(6)],
        },
    ]
}

const N_DETERMINING: usize = 8;

#[derive(Clone, PartialEq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EquationCheck {
    pub group: EquationGroup,
    pub name: String,
    /// Largest `|Σ terms| / max(1, Σ |terms|)` over the samples.
    pub max_residual: f64,
    pub worst: Point,
    pub pass: bool,
}

#[derive(Clone, PartialEq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DeterminingReport {
    pub c: [f64; 5],
    pub n_samples: usize,
    pub tolerance: f64,
    pub equations: Vec<EquationCheck>,
    pub pass: bool,
}

impl DeterminingReport {
    pub fn violations(&self) -> impl Iterator<Item = &EquationCheck> {
        self.equations.iter().filter(|e| !e.pass)
    }

    pub fn max_residual(&self) -> f64 {
        self.equations.iter().map(|e| e.max_residual).fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, PartialEq, Debug)]
pub struct DeterminingOptions {
    pub n_samples: usize,
    pub tolerance: f64,
    pub domain: SampleDomain,
    pub signs: ConstraintSigns,
}

impl Default for DeterminingOptions {
    fn default() -> Self {
        DeterminingOptions {
            n_samples: 100,
            tolerance: 1e-8,
            domain: SampleDomain::default(),
            signs: ConstraintSigns::AsPrinted,
        }
    }
}

/// Evaluate every determining equation and every constraint ODE at random
/// `(t, x, u)` samples. Points where some term cannot be evaluated count as
/// violations with an infinite residual.
pub fn verify_determining_system<R: Rng + ?Sized>(
    gen: &InfinitesimalGenerator,
    fam: &CoefficientFamily,
    opts: &DeterminingOptions,
    rng: &mut R,
) -> DeterminingReport {
    let eqs = determining_equations(gen, fam, opts.signs);
    let samples = opts.domain.sample(rng, opts.n_samples);
    let mut checks = Vec::with_capacity(eqs.len());
    for (i, eq) in eqs.iter().enumerate() {
        let mut max_residual: f64 = 0.0;
        let mut worst = samples.first().copied().unwrap_or(Point::new(0.0, 0.0, 0.0));
        for p in &samples {
            let env = p.bindings();
            let mut sum = 0.0;
            let mut scale = 0.0;
            let mut ok = true;
            for term in &eq.terms {
                match term.eval(&env) {
                    Ok(v) => {
                        sum += v;
                        scale += libm::fabs(v);
                    }
                    Err(_) => ok = false,
                }
            }
            let r = if ok && sum.is_finite() {
                libm::fabs(sum) / scale.max(1.0)
            } else {
                f64::INFINITY
            };
            if r > max_residual {
                max_residual = r;
                worst = *p;
            }
        }
        checks.push(EquationCheck {
            group: if i < N_DETERMINING {
                EquationGroup::Determining
            } else {
                EquationGroup::Constraint
            },
            name: eq.name.to_string(),
            max_residual,
            worst,
            pass: max_residual < opts.tolerance,
        });
    }
    let pass = checks.iter().all(|c| c.pass);
    DeterminingReport {
        c: gen.c,
        n_samples: samples.len(),
        tolerance: opts.tolerance,
        equations: checks,
        pass,
    }
}

/// Similarity map `u(x, t) = amp(t) F(ζ(x, t))`.
#[derive(Clone, PartialEq, Debug)]
pub struct ReductionSpec {
    pub generator: GeneratorId,
    pub gamma: GammaFamily,
    pub zeta: Expr,
    pub amp: Expr,
    /// Predicted ratio between the PDE residual of `amp F(ζ)` and the
    /// reduced-ODE residual of `F`.
    pub factor: Expr,
    pub x0: Option<f64>,
}

impl ReductionSpec {
    /// `ζ = (x + x0) Γ^(−1/3)`, `amp = Γ^(−k1/3)`.
    pub fn generator_one(gamma: GammaFamily, k1: f64, x0: f64) -> Self {
        let third = crate::Rational::frac(-1, 3);
        let zeta = (Expr::var("x") + Expr::c(x0)) * gamma.gamma().powr(third);
        let amp = gamma_pow(&gamma, -k1 / 3.0);
        let factor = amp.clone() * gamma.g1() / (Expr::c(3.0) * gamma.gamma());
        ReductionSpec {
            generator: GeneratorId::I,
            gamma,
            zeta,
            amp,
            factor,
            x0: Some(x0),
        }
    }

    /// `ζ = k2 Γ − x`, `amp = exp(−k3 Γ)`.
    pub fn generator_two(gamma: GammaFamily, k2: f64, k3: f64) -> Self {
        let zeta = Expr::c(k2) * gamma.gamma() - Expr::var("x");
        let amp = (Expr::c(-k3) * gamma.gamma()).exp();
        let factor = -(gamma.g1() * amp.clone());
        ReductionSpec {
            generator: GeneratorId::II,
            gamma,
            zeta,
            amp,
            factor,
            x0: None,
        }
    }

    pub fn for_family(fam: &CoefficientFamily) -> Option<Self> {
        let gamma = fam.gamma?;
        match fam.kind {
            FamilyKind::I(c) => Some(Self::generator_one(gamma, c.k1, c.x0)),
            FamilyKind::II(c) => Some(Self::generator_two(gamma, c.k2, c.k3)),
            FamilyKind::Custom => None,
        }
    }

    pub fn zeta_at(&self, x: f64, t: f64) -> Result<f64, EvalError> {
        self.zeta.eval(&[("x", x), ("t", t)])
    }

    pub fn factor_at(&self, x: f64, t: f64) -> Result<f64, EvalError> {
        self.factor.eval(&[("x", x), ("t", t)])
    }
}

/// Largest residuals of `A I_t + B I_x − C I_u = 0` over the samples for the
/// two invariants `ζ` and `u / amp`. The sign on `C` is that of the
/// characteristic system `dt/A = dx/B = −du/C`.
pub fn characteristic_residuals(spec: &ReductionSpec, gen: &InfinitesimalGenerator, samples: &[Point]) -> Result<[f64; 2], EvalError> {
    let vf = gen.vector_field();
    let invariants = [spec.zeta.clone(), Expr::var("u") / spec.amp.clone()];
    let mut out = [0.0f64; 2];
    for (o, inv) in out.iter_mut().zip(&invariants) {
        let lhs = vf.a.clone() * inv.diff("t") + vf.b.clone() * inv.diff("x") - vf.c.clone() * inv.diff("u");
        for p in samples {
            *o = o.max(libm::fabs(lhs.eval(&p.bindings())?));
        }
    }
    Ok(out)
}

/// How to read the second reduced ODE.
#[derive(Clone, Copy, PartialEq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(tag = "reading", rename_all = "snake_case"))]
pub enum Gen2Reading {
    /// `F''' + m1F³F' + m2F²F' + m3FF' + (m4 − k3)F' + (k4 − m5)F + m6`,
    /// with `k4` a free parameter.
    AsPrinted { k4: f64 },
    /// `F''' + m1F³F' + m2F²F' + m3FF' + (m4 − k2)F' + (k3 − m5)F − m6`,
    /// which is what substituting the similarity form gives.
    ChainRule,
}

/// `lead F''' + (a3 F³ + a2 F² + a1 F + drift + zeta_drift ζ) F' + damping F + source`.
#[derive(Clone, Copy, PartialEq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ReducedOde {
    pub lead: f64,
    pub a3: f64,
    pub a2: f64,
    pub a1: f64,
    pub drift: f64,
    pub zeta_drift: f64,
    pub damping: f64,
    pub source: f64,
}

impl ReducedOde {
    /// `3F''' + n1F³F' + n2F²F' + n3FF' + (n4 − ζ)F' + (n5 − k1)F + n6`.
    pub fn generator_one(n: [f64; 6], k1: f64) -> Self {
        ReducedOde {
            lead: 3.0,
            a3: n[0],
            a2: n[1],
            a1: n[2],
            drift: n[3],
            zeta_drift: -1.0,
            damping: n[4] - k1,
            source: n[5],
        }
    }

    pub fn generator_two(m: [f64; 6], k2: f64, k3: f64, reading: Gen2Reading) -> Self {
        let (drift, damping, source) = match reading {
            Gen2Reading::AsPrinted { k4 } => (m[3] - k3, k4 - m[4], m[5]),
            Gen2Reading::ChainRule => (m[3] - k2, k3 - m[4], -m[5]),
        };
        ReducedOde {
            lead: 1.0,
            a3: m[0],
            a2: m[1],
            a1: m[2],
            drift,
            zeta_drift: 0.0,
            damping,
            source,
        }
    }

    /// Reduced ODE matching a generator family. The second family needs a
    /// reading.
    pub fn for_family(fam: &CoefficientFamily, reading: Gen2Reading) -> Option<Self> {
        match fam.kind {
            FamilyKind::I(c) => Some(Self::generator_one(c.n, c.k1)),
            FamilyKind::II(c) => Some(Self::generator_two(c.m, c.k2, c.k3, reading)),
            FamilyKind::Custom => None,
        }
    }

    /// Individual terms `[lead F''', a3F³F', a2F²F', a1FF', drift F', ζ-drift, damping F, source]`.
    pub fn terms(&self, zeta: f64, d: [f64; 4]) -> [f64; 8] {
        let [f, f1, _, f3] = d;
        [
            self.lead * f3,
            self.a3 * f * f * f * f1,
            self.a2 * f * f * f1,
            self.a1 * f * f1,
            self.drift * f1,
            self.zeta_drift * zeta * f1,
            self.damping * f,
            self.source,
        ]
    }

    pub fn residual(&self, zeta: f64, d: [f64; 4]) -> f64 {
        self.terms(zeta, d).iter().sum()
    }

    /// `F'''` from `F, F', F''` with the residual set to zero.
    pub fn third_derivative(&self, zeta: f64, f: f64, f1: f64, f2: f64) -> f64 {
        let rest = self.residual(zeta, [f, f1, f2, 0.0]);
        -rest / self.lead
    }

    /// `(degree in F, derivative order)` of each nonzero term.
    pub fn term_shapes(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for (coef, shape) in [
            (self.lead, (1, 3)),
            (self.a3, (4, 1)),
            (self.a2, (3, 1)),
            (self.a1, (2, 1)),
            (self.drift, (1, 1)),
            (self.damping, (1, 0)),
            (self.source, (0, 0)),
        ] {
            if coef != 0.0 && !out.contains(&shape) {
                out.push(shape);
            }
        }
        if self.zeta_drift != 0.0 && !out.contains(&(1, 1)) {
            out.push((1, 1));
        }
        out
    }
}

/// A scalar profile `F(ζ)` with three derivatives.
pub trait Profile {
    /// `[F, F', F'', F''']` at `zeta`.
    fn derivatives(&self, zeta: f64) -> Result<[f64; 4], EvalError>;

    fn near_singularity(&self, _zeta: f64, _radius: f64) -> bool {
        false
    }
}

impl<P: Profile + ?Sized> Profile for &P {
    fn derivatives(&self, zeta: f64) -> Result<[f64; 4], EvalError> {
        (**self).derivatives(zeta)
    }
    fn near_singularity(&self, zeta: f64, radius: f64) -> bool {
        (**self).near_singularity(zeta, radius)
    }
}

/// Known singular points of a profile.
#[derive(Clone, PartialEq, Debug, Default)]
pub enum SingularSet {
    #[default]
    None,
    Points(Vec<f64>),
    /// `offset + j * period` for every integer `j`.
    Lattice { offset: f64, period: f64 },
    Union(Vec<SingularSet>),
}

impl SingularSet {
    pub fn distance(&self, z: f64) -> f64 {
        match self {
            SingularSet::None => f64::INFINITY,
            SingularSet::Points(ps) => ps.iter().map(|p| libm::fabs(z - p)).fold(f64::INFINITY, f64::min),
            SingularSet::Lattice { offset, period } => {
                let p = libm::fabs(*period);
                let r = libm::fmod(z - offset, p);
                let r = if r < 0.0 { r + p } else { r };
                r.min(p - r)
            }
            SingularSet::Union(sets) => sets.iter().map(|s| s.distance(z)).fold(f64::INFINITY, f64::min),
        }
    }
}

/// A closed-form profile in one variable.
#[derive(Clone, PartialEq, Debug)]
pub struct ExprProfile {
    pub expr: Expr,
    pub var: String,
    pub singular: SingularSet,
}

impl ExprProfile {
    pub fn new(expr: Expr, var: &str) -> Self {
        ExprProfile {
            expr,
            var: var.to_string(),
            singular: SingularSet::None,
        }
    }

    pub fn with_singularities(mut self, s: SingularSet) -> Self {
        self.singular = s;
        self
    }
}

impl Profile for ExprProfile {
    fn derivatives(&self, zeta: f64) -> Result<[f64; 4], EvalError> {
        let j = jet_eval(&self.expr, &[(self.var.as_str(), zeta)], JetVars::only(&self.var))?;
        Ok([j.value(), j.dx(), j.dxx(), j.dxxx()])
    }

    fn near_singularity(&self, zeta: f64, radius: f64) -> bool {
        self.singular.distance(zeta) < radius
    }
}

pub fn reduced_ode_residual<P: Profile + ?Sized>(ode: &ReducedOde, f: &P, zeta: f64) -> Result<f64, EvalError> {
    Ok(ode.residual(zeta, f.derivatives(zeta)?))
}

/// The field `amp(t) F(ζ(x, t))`.
#[derive(Clone, Debug)]
pub struct SimilarityField<P> {
    pub spec: ReductionSpec,
    pub profile: P,
}

impl<P: Profile> SimilarityField<P> {
    pub fn new(spec: ReductionSpec, profile: P) -> Self {
        SimilarityField { spec, profile }
    }
}

impl<P: Profile> Field for SimilarityField<P> {
    fn jet(&self, x: f64, t: f64) -> Result<Jet, EvalError> {
        let env = [("x", x), ("t", t)];
        let vars = JetVars::xt("x", "t");
        let z = jet_eval(&self.spec.zeta, &env, vars)?;
        let amp = jet_eval(&self.spec.amp, &env, vars)?;
        let f = z.compose(self.profile.derivatives(z.value())?);
        Ok(amp * f)
    }

    fn excluded(&self, x: f64, t: f64, radius: f64) -> bool {
        match self.spec.zeta_at(x, t) {
            Ok(z) => self.profile.near_singularity(z, radius),
            Err(_) => true,
        }
    }
}

/// PDE residual of `amp F(ζ)` on the grid.
pub fn reduction_consistency<P: Profile>(
    fam: &CoefficientFamily,
    spec: &ReductionSpec,
    f: P,
    grid: &GridSpec,
) -> Result<ResidualReport, ResidualError> {
    let field = SimilarityField::new(spec.clone(), f);
    pde_residual(&field, fam, grid, None)
}

#[derive(Clone, Copy, PartialEq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct IdentityPoint {
    pub x: f64,
    pub t: f64,
    pub zeta: f64,
    /// Ratio fitted by least squares over all profiles at this point.
    pub fitted_factor: f64,
    pub predicted_factor: f64,
    /// Largest `|R_pde − λ R_ode| / max(|R_pde|, |λ R_ode|)` over the
    /// profiles, with `λ` the predicted factor.
    pub mismatch: f64,
}

#[derive(Clone, PartialEq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct IdentityReport {
    pub points: Vec<IdentityPoint>,
    pub n_profiles: usize,
    pub n_excluded: usize,
    pub max_mismatch: f64,
    /// Largest relative deviation of the fitted factor from the prediction.
    pub max_factor_deviation: f64,
}

impl IdentityReport {
    pub fn passes(&self, tol: f64) -> bool {
        !self.points.is_empty() && self.max_mismatch < tol
    }
}

/// Compare the PDE residual of `amp F(ζ)` with the reduced-ODE residual of
/// `F` point by point, for each profile. The ratio between them is fitted per
/// point and compared with the spec's predicted factor.
pub fn reduction_identity(
    fam: &CoefficientFamily,
    spec: &ReductionSpec,
    ode: &ReducedOde,
    profiles: &[&dyn Profile],
    grid: &GridSpec,
) -> Result<IdentityReport, ResidualError> {
    grid.validate()?;
    let mut points = Vec::new();
    let mut excluded = 0;
    let mut pde = vec![0.0; profiles.len()];
    let mut odes = vec![0.0; profiles.len()];
    for t in grid.t_values() {
        let g = fam.eval_at(t).map_err(ResidualError::Coefficients)?;
        'x: for x in grid.x_values() {
            let (Ok(zeta), Ok(lambda)) = (spec.zeta_at(x, t), spec.factor_at(x, t)) else {
                excluded += 1;
                continue;
            };
            for (i, p) in profiles.iter().enumerate() {
                let field = SimilarityField::new(spec.clone(), *p);
                if field.excluded(x, t, grid.exclusion) {
                    excluded += 1;
                    continue 'x;
                }
                let (Ok(jet), Ok(d)) = (field.jet(x, t), p.derivatives(zeta)) else {
                    excluded += 1;
                    continue 'x;
                };
                pde[i] = residual_terms(jet.value(), jet.dt(), jet.dx(), jet.dxxx(), &g, 0.0).total();
                odes[i] = ode.residual(zeta, d);
            }
            let num: f64 = pde.iter().zip(&odes).map(|(a, b)| a * b).sum();
            let den: f64 = odes.iter().map(|b| b * b).sum();
            let fitted = if den > 0.0 { num / den } else { f64::NAN };
            let mismatch = pde
                .iter()
                .zip(&odes)
                .map(|(&a, &b)| {
                    let s = libm::fabs(a).max(libm::fabs(lambda * b));
                    if s == 0.0 {
                        0.0
                    } else {
                        libm::fabs(a - lambda * b) / s
                    }
                })
                .fold(0.0, f64::max);
            points.push(IdentityPoint {
                x,
                t,
                zeta,
                fitted_factor: fitted,
                predicted_factor: lambda,
                mismatch,
            });
        }
    }
    let max_mismatch = points.iter().map(|p| p.mismatch).fold(0.0, f64::max);
    let max_factor_deviation = points
        .iter()
        .map(|p| libm::fabs(p.fitted_factor - p.predicted_factor) / libm::fabs(p.predicted_factor).max(1e-300))
        .fold(0.0, f64::max);
    Ok(IdentityReport {
        points,
        n_profiles: profiles.len(),
        n_excluded: excluded,
        max_mismatch,
        max_factor_deviation,
    })
}

/// A random smooth test profile: a degree-4 polynomial plus a bounded
/// `tanh` bump, with coefficients in `[-1, 1]`.
pub fn random_test_profile<R: Rng + ?Sized>(rng: &mut R) -> ExprProfile {
    let z = Expr::var("zeta");
    let mut terms = Vec::new();
    for k in 0..=4 {
        let c = rng.gen_range(-1.0..=1.0);
        terms.push(Expr::c(c) * z.clone().powi(k));
    }
    let a = rng.gen_range(-1.0..=1.0);
    let b = rng.gen_range(0.2..=1.0);
    let s = rng.gen_range(-1.0..=1.0);
    terms.push(Expr::c(a) * (Expr::c(b) * z + Expr::c(s)).tanh());
    ExprProfile::new(Expr::sum(terms), "zeta")
}
