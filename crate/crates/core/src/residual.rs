//! Grid evaluation of the residual of
//! `u_t + g1 u_xxx + (g2 u^3 + g3 u^2 + g4 u + g5) u_x + g6 u + g7 (+ G)`.
//!
//! Derivatives of the field come from jets, so they are exact to rounding. A
//! Richardson-extrapolated finite-difference residual is kept as an
//! independent cross-check.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::expr::{EvalError, Expr};
use crate::jet::{jet_eval, Jet, JetVars};
use crate::reduction::CoefficientFamily;

/// Scalar field `u(x, t)` that can produce jets.
pub trait Field {
    fn jet(&self, x: f64, t: f64) -> Result<Jet, EvalError>;

    fn value(&self, x: f64, t: f64) -> Result<f64, EvalError> {
        Ok(self.jet(x, t)?.value())
    }

    /// Whether `(x, t)` lies within `radius` of a singular locus.
    fn excluded(&self, _x: f64, _t: f64, _radius: f64) -> bool {
        false
    }
}

impl<F: Field + ?Sized> Field for &F {
    fn jet(&self, x: f64, t: f64) -> Result<Jet, EvalError> {
        (**self).jet(x, t)
    }
    fn value(&self, x: f64, t: f64) -> Result<f64, EvalError> {
        (**self).value(x, t)
    }
    fn excluded(&self, x: f64, t: f64, radius: f64) -> bool {
        (**self).excluded(x, t, radius)
    }
}

/// A closed form in the variables `x` and `t`.
#[derive(Clone, Debug)]
pub struct ExprField {
    pub expr: Expr,
}

impl ExprField {
    pub fn new(expr: Expr) -> Self {
        ExprField { expr }
    }
}

impl Field for ExprField {
    fn jet(&self, x: f64, t: f64) -> Result<Jet, EvalError> {
        jet_eval(&self.expr, &[("x", x), ("t", t)], JetVars::xt("x", "t"))
    }

    fn value(&self, x: f64, t: f64) -> Result<f64, EvalError> {
        self.expr.eval(&[("x", x), ("t", t)])
    }
}

/// Rectangular `(t, x)` grid; `t` is the outer index.
#[derive(Clone, Copy, PartialEq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GridSpec {
    pub t: (f64, f64, usize),
    pub x: (f64, f64, usize),
    pub exclusion: f64,
}

pub const DEFAULT_EXCLUSION: f64 = 0.05;

fn linspace(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| if n == 1 { a } else { a + (b - a) * i as f64 / (n - 1) as f64 })
}

impl GridSpec {
    pub fn new(t: (f64, f64, usize), x: (f64, f64, usize)) -> Self {
        GridSpec {
            t,
            x,
            exclusion: DEFAULT_EXCLUSION,
        }
    }

    pub fn with_exclusion(mut self, r: f64) -> Self {
        self.exclusion = r;
        self
    }

    pub fn validate(&self) -> Result<(), ResidualError> {
        if self.t.2 < 2 || self.x.2 < 2 {
            return Err(ResidualError::BadGrid("grid counts must be at least 2".into()));
        }
        if !(self.t.0 < self.t.1) || !(self.x.0 < self.x.1) {
            return Err(ResidualError::BadGrid("grid ranges must be increasing".into()));
        }
        if !(self.exclusion >= 0.0) {
            return Err(ResidualError::BadGrid("exclusion radius must be non-negative".into()));
        }
        Ok(())
    }

    pub fn t_values(&self) -> impl Iterator<Item = f64> {
        linspace(self.t.0, self.t.1, self.t.2)
    }

    pub fn x_values(&self) -> impl Iterator<Item = f64> {
        linspace(self.x.0, self.x.1, self.x.2)
    }

    pub fn len(&self) -> usize {
        self.t.2 * self.x.2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, PartialEq, Debug)]
pub enum ResidualError {
    EmptyGrid { excluded: usize },
    BadGrid(String),
    Coefficients(EvalError),
}

impl fmt::Display for ResidualError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResidualError::EmptyGrid { excluded } => {
                write!(f, "all {excluded} grid points were excluded")
            }
            ResidualError::BadGrid(m) => write!(f, "invalid grid: {m}"),
            ResidualError::Coefficients(e) => write!(f, "coefficient evaluation failed: {e}"),
        }
    }
}

impl core::error::Error for ResidualError {}

/// The residual split by term. Their sum, in field order, is the residual.
#[derive(Clone, Copy, PartialEq, Debug, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TermBreakdown {
    pub u_t: f64,
    pub dispersion: f64,
    pub advection: f64,
    pub linear: f64,
    pub source: f64,
    pub forcing: f64,
}

impl TermBreakdown {
    pub fn total(&self) -> f64 {
        self.u_t + self.dispersion + self.advection + self.linear + self.source + self.forcing
    }

    /// Sum of absolute term values, the natural scale of the residual.
    pub fn scale(&self) -> f64 {
        self.as_array().iter().map(|v| libm::fabs(*v)).sum()
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.u_t, self.dispersion, self.advection, self.linear, self.source, self.forcing]
    }

    pub const NAMES: [&'static str; 6] = ["u_t", "g1*u_xxx", "advection", "g6*u", "g7", "forcing"];

    fn max_abs(self, other: &TermBreakdown) -> TermBreakdown {
        let m = |a: f64, b: f64| a.max(libm::fabs(b));
        TermBreakdown {
            u_t: m(self.u_t, other.u_t),
            dispersion: m(self.dispersion, other.dispersion),
            advection: m(self.advection, other.advection),
            linear: m(self.linear, other.linear),
            source: m(self.source, other.source),
            forcing: m(self.forcing, other.forcing),
        }
    }
}

/// Assemble the terms from derivative values and coefficient values `g1..g7`.
pub fn residual_terms(u: f64, u_t: f64, u_x: f64, u_xxx: f64, g: &[f64; 7], forcing: f64) -> TermBreakdown {
    TermBreakdown {
        u_t,
        dispersion: g[0] * u_xxx,
        advection: (((g[1] * u + g[2]) * u + g[3]) * u + g[4]) * u_x,
        linear: g[5] * u,
        source: g[6],
        forcing,
    }
}

#[derive(Clone, Copy, PartialEq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PointResidual {
    pub x: f64,
    pub t: f64,
    pub u: f64,
    pub residual: f64,
    pub terms: TermBreakdown,
}

#[derive(Clone, PartialEq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ResidualReport {
    pub grid: GridSpec,
    pub points: Vec<PointResidual>,
    pub max_abs: f64,
    /// Root mean square of the pointwise residuals.
    pub l2: f64,
    /// Largest `|residual| / max(1, Σ|terms|)`.
    pub max_relative: f64,
    pub n_points: usize,
    pub n_excluded: usize,
    /// Largest magnitude reached by each term over the grid.
    pub term_max: TermBreakdown,
    pub worst: PointResidual,
}

impl ResidualReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_abs < tol
    }
}

/// Per-point hook applied to the field's jet before assembly. Only used to
/// demonstrate that the residual is sensitive to every jet coefficient.
pub type JetHook<'a> = &'a dyn Fn(&mut Jet);

/// Evaluate the residual on every non-excluded grid point.
pub fn pde_residual<F: Field + ?Sized>(
    field: &F,
    family: &CoefficientFamily,
    grid: &GridSpec,
    forcing: Option<&Expr>,
) -> Result<ResidualReport, ResidualError> {
    pde_residual_with_hook(field, family, grid, forcing, None)
}

pub fn pde_residual_with_hook<F: Field + ?Sized>(
    field: &F,
    family: &CoefficientFamily,
    grid: &GridSpec,
    forcing: Option<&Expr>,
    hook: Option<JetHook<'_>>,
) -> Result<ResidualReport, ResidualError> {
    grid.validate()?;
    let mut points = Vec::with_capacity(grid.len());
    let mut excluded = 0;
    for t in grid.t_values() {
        let g = family.eval_at(t).map_err(ResidualError::Coefficients)?;
        for x in grid.x_values() {
            if field.excluded(x, t, grid.exclusion) {
                excluded += 1;
                continue;
            }
            let mut jet = match field.jet(x, t) {
                Ok(j) => j,
                Err(_) => {
                    excluded += 1;
                    continue;
                }
            };
            if let Some(h) = hook {
                h(&mut jet);
            }
            let f = match forcing {
                Some(e) => match e.eval(&[("x", x), ("t", t)]) {
                    Ok(v) => v,
                    Err(_) => {
                        excluded += 1;
                        continue;
                    }
                },
                None => 0.0,
            };
            let terms = residual_terms(jet.value(), jet.dt(), jet.dx(), jet.dxxx(), &g, f);
            points.push(PointResidual {
                x,
                t,
                u: jet.value(),
                residual: terms.total(),
                terms,
            });
        }
    }
    summarize(*grid, points, excluded)
}

fn summarize(grid: GridSpec, points: Vec<PointResidual>, excluded: usize) -> Result<ResidualReport, ResidualError> {
    let Some(first) = points.first().copied() else {
        return Err(ResidualError::EmptyGrid { excluded });
    };
    let mut worst = first;
    let mut max_abs: f64 = 0.0;
    let mut max_relative: f64 = 0.0;
    let mut sum_sq = 0.0;
    let mut term_max = TermBreakdown::default();
    for p in &points {
        let a = libm::fabs(p.residual);
        if a > max_abs {
            max_abs = a;
            worst = *p;
        }
        max_relative = max_relative.max(a / p.terms.scale().max(1.0));
        sum_sq += p.residual * p.residual;
        term_max = term_max.max_abs(&p.terms);
    }
    let n = points.len();
    Ok(ResidualReport {
        grid,
        l2: libm::sqrt(sum_sq / n as f64),
        points,
        max_abs,
        max_relative,
        n_points: n,
        n_excluded: excluded,
        term_max,
        worst,
    })
}

/// Steps for the finite-difference oracle.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct FdSteps {
    pub hx: f64,
    pub ht: f64,
}

impl Default for FdSteps {
    fn default() -> Self {
        FdSteps { hx: 1e-2, ht: 1e-2 }
    }
}

/// Residual at one point from field values only: central differences with
/// one Richardson extrapolation (`O(h^4)`).
pub fn richardson_residual<F: Field + ?Sized>(
    field: &F,
    family: &CoefficientFamily,
    x: f64,
    t: f64,
    steps: FdSteps,
    forcing: Option<&Expr>,
) -> Result<TermBreakdown, EvalError> {
    let u = |x: f64, t: f64| field.value(x, t);
    let d1 = |h: f64, along_x: bool| -> Result<f64, EvalError> {
        let (p, m) = if along_x {
            (u(x + h, t)?, u(x - h, t)?)
        } else {
            (u(x, t + h)?, u(x, t - h)?)
        };
        Ok((p - m) / (2.0 * h))
    };
    let d3 = |h: f64| -> Result<f64, EvalError> {
        Ok((u(x + 2.0 * h, t)? - 2.0 * u(x + h, t)? + 2.0 * u(x - h, t)? - u(x - 2.0 * h, t)?) / (2.0 * h * h * h))
    };
    let rich = |coarse: f64, fine: f64| (4.0 * fine - coarse) / 3.0;
    let u_t = rich(d1(steps.ht, false)?, d1(steps.ht / 2.0, false)?);
    let u_x = rich(d1(steps.hx, true)?, d1(steps.hx / 2.0, true)?);
    let u_xxx = rich(d3(steps.hx)?, d3(steps.hx / 2.0)?);
    let g = family.eval_at(t)?;
    let f = match forcing {
        Some(e) => e.eval(&[("x", x), ("t", t)])?,
        None => 0.0,
    };
    Ok(residual_terms(u(x, t)?, u_t, u_x, u_xxx, &g, f))
}

/// Jet residual against the finite-difference oracle at one point.
#[derive(Clone, Copy, PartialEq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SpotCheck {
    pub x: f64,
    pub t: f64,
    pub jet: f64,
    pub finite_difference: f64,
    pub scale: f64,
    /// `|jet − fd| / max(scale, 1e-300)` with `scale = Σ|terms|`.
    pub relative_difference: f64,
}

pub fn spot_check<F: Field + ?Sized>(
    field: &F,
    family: &CoefficientFamily,
    point: &PointResidual,
    steps: FdSteps,
    forcing: Option<&Expr>,
) -> Result<SpotCheck, EvalError> {
    let fd = richardson_residual(field, family, point.x, point.t, steps, forcing)?;
    let scale = point.terms.scale();
    let diff = libm::fabs(point.residual - fd.total());
    Ok(SpotCheck {
        x: point.x,
        t: point.t,
        jet: point.residual,
        finite_difference: fd.total(),
        scale,
        relative_difference: diff / scale.max(1e-300),
    })
}

/// Spot-check `n` grid points of `report`, drawn at random among those at
/// least `margin` away from the field's singular loci.
pub fn spot_checks<F: Field + ?Sized, R: Rng + ?Sized>(
    field: &F,
    family: &CoefficientFamily,
    report: &ResidualReport,
    n: usize,
    margin: f64,
    steps: FdSteps,
    forcing: Option<&Expr>,
    rng: &mut R,
) -> Vec<SpotCheck> {
    let mut pool: Vec<&PointResidual> = report.points.iter().filter(|p| !field.excluded(p.x, p.t, margin)).collect();
    if pool.len() < n {
        pool = report.points.iter().collect();
    }
    let mut out = Vec::with_capacity(n);
    while out.len() < n && !pool.is_empty() {
        let p = pool.swap_remove(rng.gen_range(0..pool.len()));
        if let Ok(s) = spot_check(field, family, p, steps, forcing) {
            out.push(s);
        }
    }
    out
}

/// Forcing `G = −L(u)` that makes `u` an exact solution of `L(u) + G = 0`.
pub fn manufactured_forcing(u: &Expr, family: &CoefficientFamily) -> Expr {
    let g = &family.g;
    let ux = u.diff("x");
    let advect = Expr::sum([
        g[1].clone() * u.clone().powi(3),
        g[2].clone() * u.clone().powi(2),
        g[3].clone() * u.clone(),
        g[4].clone(),
    ]);
    -Expr::sum([
        u.diff("t"),
        g[0].clone() * ux.diff("x").diff("x"),
        advect * ux,
        g[5].clone() * u.clone(),
        g[6].clone(),
    ])
}

#[derive(Clone, PartialEq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ManufacturedOutcome {
    pub field: String,
    pub max_abs: f64,
    pub n_points: usize,
    pub pass: bool,
}

#[derive(Clone, PartialEq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ManufacturedReport {
    pub tolerance: f64,
    /// Jet coefficient that was perturbed by `1e-6`, if any.
    pub corrupted: Option<usize>,
    pub cases: Vec<ManufacturedOutcome>,
    pub pass: bool,
}

pub const MANUFACTURED_TOLERANCE: f64 = 1e-10;

fn random_poly<R: Rng + ?Sized>(rng: &mut R, vars: &[&str], degree: u32) -> Expr {
    let mut terms = Vec::new();
    let mut push = |mono: Expr, rng: &mut R| terms.push(Expr::c(rng.gen_range(-1.0..=1.0)) * mono);
    match vars {
        [v] => {
            for i in 0..=degree {
                push(Expr::var(v).powi(i as i64), rng);
            }
        }
        [a, b] => {
            for i in 0..=degree {
                for j in 0..=degree - i {
                    push(Expr::var(a).powi(i as i64) * Expr::var(b).powi(j as i64), rng);
                }
            }
        }
        _ => unreachable!("one or two variables"),
    }
    Expr::sum(terms)
}

/// Random polynomial fields of degree at most 4 in `(x, t)` under random
/// families with coefficients quadratic in `t`. Each field's forcing is
/// computed symbolically and the augmented residual must stay below
/// [`MANUFACTURED_TOLERANCE`]. With `corrupt = Some(k)`, jet coefficient `k`
/// (`0` value, `1` for `u_x`, `3` for `u_xxx / 6`, `4` for `u_t`) is shifted
/// by `1e-6` at every point, which must make every case fail.
pub fn manufactured_validation<R: Rng + ?Sized>(n_cases: usize, corrupt: Option<usize>, rng: &mut R) -> ManufacturedReport {
    let grid = GridSpec::new((0.5, 1.5, 6), (-1.0, 1.0, 7));
    let mut cases = Vec::with_capacity(n_cases);
    for _ in 0..n_cases {
        let degree = rng.gen_range(1..=4);
        let u = random_poly(rng, &["x", "t"], degree);
        let g: [Expr; 7] = core::array::from_fn(|_| random_poly(rng, &["t"], 2));
        let family = CoefficientFamily::custom(g);
        let forcing = manufactured_forcing(&u, &family);
        let hook = move |j: &mut Jet| {
            if let Some(k) = corrupt {
                j.coefficients_mut()[k] += 1e-6;
            }
        };
        let report = pde_residual_with_hook(&ExprField::new(u.clone()), &family, &grid, Some(&forcing), Some(&hook));
        let (max_abs, n_points) = match &report {
            Ok(r) => (r.max_abs, r.n_points),
            Err(_) => (f64::INFINITY, 0),
        };
        cases.push(ManufacturedOutcome {
            field: alloc::format!("{u}"),
            max_abs,
            n_points,
            pass: max_abs < MANUFACTURED_TOLERANCE,
        });
    }
    let pass = cases.iter().all(|c| c.pass);
    ManufacturedReport {
        tolerance: MANUFACTURED_TOLERANCE,
        corrupted: corrupt,
        cases,
        pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gamma::GammaFamily;

    fn zero_family() -> CoefficientFamily {
        CoefficientFamily::custom(core::array::from_fn(|_| Expr::zero()))
    }

    #[test]
    fn zero_field_zero_source() {
        let fam = CoefficientFamily::custom([
            Expr::one(),
            Expr::var("t"),
            Expr::c(2.0),
            Expr::zero(),
            Expr::c(-1.0),
            Expr::var("t").exp(),
            Expr::zero(),
        ]);
        let grid = GridSpec::new((0.5, 1.0, 4), (-1.0, 1.0, 5));
        let r = pde_residual(&ExprField::new(Expr::zero()), &fam, &grid, None).unwrap();
        assert_eq!(r.max_abs, 0.0);
        assert_eq!(r.n_points, 20);
    }

    #[test]
    fn constant_field_without_linear_terms() {
        let mut g: [Expr; 7] = core::array::from_fn(|_| Expr::var("t"));
        g[5] = Expr::zero();
        g[6] = Expr::zero();
        let fam = CoefficientFamily::custom(g);
        let grid = GridSpec::new((0.5, 1.0, 3), (-1.0, 1.0, 3));
        let r = pde_residual(&ExprField::new(Expr::c(1.7)), &fam, &grid, None).unwrap();
        assert_eq!(r.max_abs, 0.0);
    }

    #[test]
    fn breakdown_sums_to_residual() {
        let fam = CoefficientFamily::generator_two(
            GammaFamily::EXP,
            crate::reduction::Gen2Constants::new([0.3, -0.2, 0.5, 0.1, 0.2, 0.4], 0.3, 0.1),
        );
        let u = crate::parse("tanh(x - t)^2 + 0.1*x*t").unwrap();
        let grid = GridSpec::new((0.1, 0.6, 7), (-1.0, 1.0, 9));
        let r = pde_residual(&ExprField::new(u), &fam, &grid, None).unwrap();
        for p in &r.points {
            assert_eq!(p.residual, p.terms.total());
        }
        assert!(r.max_abs > 0.0);
    }

    #[test]
    fn empty_grid_is_an_error() {
        struct Nowhere;
        impl Field for Nowhere {
            fn jet(&self, _: f64, _: f64) -> Result<Jet, EvalError> {
                Err(EvalError::DivisionByZero)
            }
        }
        let grid = GridSpec::new((0.0, 1.0, 2), (0.0, 1.0, 2));
        assert_eq!(
            pde_residual(&Nowhere, &zero_family(), &grid, None),
            Err(ResidualError::EmptyGrid { excluded: 4 })
        );
        let bad = GridSpec::new((0.0, 1.0, 1), (0.0, 1.0, 2));
        assert!(matches!(pde_residual(&Nowhere, &zero_family(), &bad, None), Err(ResidualError::BadGrid(_))));
    }

    #[test]
    fn manufactured_simple_field() {
        let mut g: [Expr; 7] = core::array::from_fn(|_| Expr::zero());
        g[0] = Expr::one();
        let fam = CoefficientFamily::custom(g);
        let u = crate::parse("x^2*t").unwrap();
        let forcing = manufactured_forcing(&u, &fam);
        assert_eq!(forcing.eval(&[("x", 3.0), ("t", 2.0)]).unwrap(), -9.0);
        let grid = GridSpec::new((0.5, 1.0, 3), (-1.0, 1.0, 3));
        let r = pde_residual(&ExprField::new(u), &fam, &grid, Some(&forcing)).unwrap();
        assert!(r.max_abs < 1e-12);
    }

    #[test]
    fn manufactured_suite_and_corruption() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let ok = manufactured_validation(20, None, &mut rng);
        assert!(ok.pass, "{ok:?}");
        for k in [0, 1, 3, 4] {
            let bad = manufactured_validation(5, Some(k), &mut rng);
            assert!(bad.cases.iter().all(|c| !c.pass), "coefficient {k}: {bad:?}");
        }
    }
}
