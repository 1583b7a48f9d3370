//! Vector fields on `(t, x, u)`-space, commutators, structure constants and the
//! adjoint action of the five-dimensional symmetry algebra.
//!
//! Commutator identities are checked numerically at sample points: `Γ` is an
//! arbitrary function, so the components of `[Vᵢ, Vⱼ]` are only equal to their
//! table entries after simplifications the expression layer does not attempt.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::expr::{EvalError, Expr};
use crate::gamma::GammaFamily;
use crate::linalg::{expm, lstsq, Matrix};

/// Number of basis generators.
pub const DIM: usize = 5;

/// Coordinates with respect to `V₁ … V₅`.
pub type Coords = [f64; DIM];

/// Structure constants: `[Vᵢ, Vⱼ] = Σₖ s[i][j][k] Vₖ`.
pub type StructureConstants = [[[f64; DIM]; DIM]; DIM];

/// A point of `(t, x, u)`-space.
#[derive(Clone, Copy, PartialEq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Point {
    pub t: f64,
    pub x: f64,
    pub u: f64,
}

impl Point {
    pub fn new(t: f64, x: f64, u: f64) -> Self {
        Point { t, x, u }
    }

    pub fn bindings(&self) -> [(&'static str, f64); 3] {
        [("t", self.t), ("x", self.x), ("u", self.u)]
    }
}

/// Box from which random sample points are drawn.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct SampleDomain {
    pub t: (f64, f64),
    pub x: (f64, f64),
    pub u: (f64, f64),
}

impl Default for SampleDomain {
    fn default() -> Self {
        SampleDomain {
            t: (0.5, 2.0),
            x: (-2.0, 2.0),
            u: (-2.0, 2.0),
        }
    }
}

impl SampleDomain {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<Point> {
        (0..n)
            .map(|_| Point {
                t: rng.gen_range(self.t.0..=self.t.1),
                x: rng.gen_range(self.x.0..=self.x.1),
                u: rng.gen_range(self.u.0..=self.u.1),
            })
            .collect()
    }
}

/// `A ∂/∂t + B ∂/∂x + C ∂/∂u` with components in `(t, x, u)`.
#[derive(Clone, PartialEq, Debug)]
pub struct VectorField {
    pub a: Expr,
    pub b: Expr,
    pub c: Expr,
}

impl VectorField {
    pub fn new(a: Expr, b: Expr, c: Expr) -> Self {
        VectorField { a, b, c }
    }

    pub fn zero() -> Self {
        VectorField::new(Expr::zero(), Expr::zero(), Expr::zero())
    }

    /// The derivation `X(f) = A f_t + B f_x + C f_u`.
    pub fn apply(&self, f: &Expr) -> Expr {
        Expr::sum([
            self.a.clone() * f.diff("t"),
            self.b.clone() * f.diff("x"),
            self.c.clone() * f.diff("u"),
        ])
    }

    pub fn components(&self) -> [&Expr; 3] {
        [&self.a, &self.b, &self.c]
    }

    pub fn eval(&self, p: &Point) -> Result<[f64; 3], EvalError> {
        let env = p.bindings();
        Ok([self.a.eval(&env)?, self.b.eval(&env)?, self.c.eval(&env)?])
    }

    pub fn scaled(&self, k: f64) -> VectorField {
        VectorField::new(
            Expr::c(k) * self.a.clone(),
            Expr::c(k) * self.b.clone(),
            Expr::c(k) * self.c.clone(),
        )
    }

    pub fn plus(&self, other: &VectorField) -> VectorField {
        VectorField::new(
            self.a.clone() + other.a.clone(),
            self.b.clone() + other.b.clone(),
            self.c.clone() + other.c.clone(),
        )
    }
}

/// `[X, Y]ᵏ = X(Yᵏ) − Y(Xᵏ)`.
pub fn commutator(x: &VectorField, y: &VectorField) -> VectorField {
    let comp = |xk: &Expr, yk: &Expr| x.apply(yk) - y.apply(xk);
    VectorField::new(comp(&x.a, &y.a), comp(&x.b, &y.b), comp(&x.c, &y.c))
}

/// Symmetry generator with constants `c₁ … c₅`:
/// `A = (3c₁Γ + c₂)/Γ'`, `B = c₁x + c₃`, `C = c₄u + c₅`.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct InfinitesimalGenerator {
    pub c: [f64; 5],
    pub gamma: GammaFamily,
}

impl InfinitesimalGenerator {
    pub fn new(c: [f64; 5], gamma: GammaFamily) -> Self {
        InfinitesimalGenerator { c, gamma }
    }

    pub fn a(&self) -> Expr {
        let [c1, c2, ..] = self.c;
        (Expr::c(3.0 * c1) * self.gamma.gamma() + Expr::c(c2)) / self.gamma.g1()
    }

    pub fn b(&self) -> Expr {
        Expr::c(self.c[0]) * Expr::var("x") + Expr::c(self.c[2])
    }

    pub fn c_component(&self) -> Expr {
        Expr::c(self.c[3]) * Expr::var("u") + Expr::c(self.c[4])
    }

    pub fn vector_field(&self) -> VectorField {
        VectorField::new(self.a(), self.b(), self.c_component())
    }
}

/// The five generators named by their position in the basis.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Basis {
    V1,
    V2,
    V3,
    V4,
    V5,
}

impl Basis {
    pub const ALL: [Basis; DIM] = [Basis::V1, Basis::V2, Basis::V3, Basis::V4, Basis::V5];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn unit(self) -> Coords {
        let mut c = [0.0; DIM];
        c[self.index()] = 1.0;
        c
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "V{}", self.index() + 1)
    }
}

/// The published commutator table as structure constants.
pub fn tabulated_structure_constants() -> StructureConstants {
    let mut s = [[[0.0; DIM]; DIM]; DIM];
    // [V1,V2] = -3 V2, [V1,V3] = -V3, [V4,V5] = -V5
    s[0][1][1] = -3.0;
    s[1][0][1] = 3.0;
    s[0][2][2] = -1.0;
    s[2][0][2] = 1.0;
    s[3][4][4] = -1.0;
    s[4][3][4] = 1.0;
    s
}

/// The published adjoint table entry `Ad(exp(ε Vᵢ)) Vⱼ`.
pub fn tabulated_adjoint_entry(i: Basis, j: Basis, eps: f64) -> Coords {
    use Basis::*;
    let mut out = j.unit();
    match (i, j) {
        (V1, V2) => out[1] = libm::exp(3.0 * eps),
        (V1, V3) => out[2] = libm::exp(eps),
        (V2, V1) => out[1] = -3.0 * eps,
        (V3, V1) => out[2] = -eps,
        (V4, V5) => out[4] = libm::exp(eps),
        (V5, V4) => out[4] = -eps,
        _ => {}
    }
    out
}

/// `V₁ … V₅` for a given `Γ`, with the structure constants they are claimed
/// to satisfy.
#[derive(Clone, Debug)]
pub struct LieAlgebraBasis {
    pub gamma: GammaFamily,
    pub fields: [VectorField; DIM],
    pub structure: StructureConstants,
}

impl LieAlgebraBasis {
    /// `V₁ = 3Γ/Γ' ∂t + x ∂x`, `V₂ = 1/Γ' ∂t`, `V₃ = ∂x`, `V₄ = u ∂u`, `V₅ = ∂u`.
    pub fn new(gamma: GammaFamily) -> Self {
        let g = gamma.gamma();
        let g1 = gamma.g1();
        let z = Expr::zero;
        let fields = [
            VectorField::new(Expr::c(3.0) * g / g1.clone(), Expr::var("x"), z()),
            VectorField::new(g1.powi(-1), z(), z()),
            VectorField::new(z(), Expr::one(), z()),
            VectorField::new(z(), z(), Expr::var("u")),
            VectorField::new(z(), z(), Expr::one()),
        ];
        LieAlgebraBasis {
            gamma,
            fields,
            structure: tabulated_structure_constants(),
        }
    }

    pub fn field(&self, b: Basis) -> &VectorField {
        &self.fields[b.index()]
    }

    /// `Σ aᵢ Vᵢ`.
    pub fn combination(&self, coords: &Coords) -> VectorField {
        let mut acc = VectorField::zero();
        for (f, &k) in self.fields.iter().zip(coords) {
            if k != 0.0 {
                acc = acc.plus(&f.scaled(k));
            }
        }
        acc
    }

    /// Replace the structure constants by ones measured from commutators.
    pub fn with_structure(mut self, s: StructureConstants) -> Self {
        self.structure = s;
        self
    }
}

#[derive(Clone, PartialEq, Debug)]
pub enum DecomposeError {
    TooFewSamples(usize),
    NotInSpan { residual: f64 },
    Eval(EvalError),
    RankDeficient,
}

impl fmt::Display for DecomposeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecomposeError::TooFewSamples(n) => write!(f, "need at least 10 sample points, got {n}"),
            DecomposeError::NotInSpan { residual } => {
                write!(f, "not in span: max pointwise residual {residual:e}")
            }
            DecomposeError::Eval(e) => write!(f, "{e}"),
            DecomposeError::RankDeficient => f.write_str("basis is rank deficient on the samples"),
        }
    }
}

impl core::error::Error for DecomposeError {}

impl From<EvalError> for DecomposeError {
    fn from(e: EvalError) -> Self {
        DecomposeError::Eval(e)
    }
}

#[derive(Clone, Copy, PartialEq, Debug)]
pub struct Decomposition {
    pub coords: Coords,
    /// Largest pointwise component residual.
    pub residual: f64,
}

/// Tolerance on the pointwise residual for membership in the span.
pub const SPAN_TOLERANCE: f64 = 1e-8;

/// Least-squares coordinates of `w` in the span of the basis, fitted over the
/// sample points.
pub fn decompose(
    w: &VectorField,
    basis: &LieAlgebraBasis,
    samples: &[Point],
) -> Result<Decomposition, DecomposeError> {
    if samples.len() < 10 {
        return Err(DecomposeError::TooFewSamples(samples.len()));
    }
    let mut rows = Vec::with_capacity(3 * samples.len());
    let mut rhs = Vec::with_capacity(3 * samples.len());
    for p in samples {
        let cols: Vec<[f64; 3]> = basis
            .fields
            .iter()
            .map(|f| f.eval(p))
            .collect::<Result<_, _>>()?;
        let target = w.eval(p)?;
        for k in 0..3 {
            rows.push(cols.iter().map(|c| c[k]).collect::<Vec<_>>());
            rhs.push(target[k]);
        }
    }
    let a = Matrix::from_rows(&rows);
    let x = lstsq(&a, &rhs).ok_or(DecomposeError::RankDeficient)?;
    let fitted = a.mul_vec(&x);
    let residual = fitted
        .iter()
        .zip(&rhs)
        .map(|(f, r)| libm::fabs(f - r))
        .fold(0.0, f64::max);
    let mut coords = [0.0; DIM];
    coords.copy_from_slice(&x);
    if residual < SPAN_TOLERANCE {
        Ok(Decomposition { coords, residual })
    } else {
        Err(DecomposeError::NotInSpan { residual })
    }
}

/// Matrix of `ad(Vᵢ)`: column `j` holds the coordinates of `[Vᵢ, Vⱼ]`.
pub fn ad_matrix(s: &StructureConstants, i: Basis) -> Matrix {
    let mut m = Matrix::zeros(DIM, DIM);
    for j in 0..DIM {
        for k in 0..DIM {
            m[(k, j)] = s[i.index()][j][k];
        }
    }
    m
}

/// `Ad(exp(ε Vᵢ)) W = exp(−ε ad Vᵢ) W` on basis coordinates.
pub fn adjoint(s: &StructureConstants, i: Basis, eps: f64, w: &Coords) -> Coords {
    let e = expm(&ad_matrix(s, i).scaled(-eps));
    let v = e.mul_vec(w);
    let mut out = [0.0; DIM];
    out.copy_from_slice(&v);
    out
}

/// Largest violation of antisymmetry.
pub fn antisymmetry_defect(s: &StructureConstants) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..DIM {
        for j in 0..DIM {
            for k in 0..DIM {
                worst = worst.max(libm::fabs(s[i][j][k] + s[j][i][k]));
            }
        }
    }
    worst
}

/// Largest violation of the Jacobi identity over all basis triples.
pub fn jacobi_defect(s: &StructureConstants) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..DIM {
        for j in 0..DIM {
            for k in 0..DIM {
                for n in 0..DIM {
                    let mut acc = 0.0;
                    for m in 0..DIM {
                        acc += s[i][j][m] * s[m][k][n] + s[j][k][m] * s[m][i][n] + s[k][i][m] * s[m][j][n];
                    }
                    worst = worst.max(libm::fabs(acc));
                }
            }
        }
    }
    worst
}

/// Check that every commutator `[Vᵢ, Vⱼ]` lies in the span and measure its
/// coordinates.
pub fn measure_structure_constants(
    basis: &LieAlgebraBasis,
    samples: &[Point],
) -> Result<StructureConstants, DecomposeError> {
    let mut s = [[[0.0; DIM]; DIM]; DIM];
    for i in 0..DIM {
        for j in 0..DIM {
            let w = commutator(&basis.fields[i], &basis.fields[j]);
            s[i][j] = decompose(&w, basis, samples)?.coords;
        }
    }
    Ok(s)
}

/// One row of a table comparison.
#[derive(Clone, PartialEq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TableEntry {
    pub row: usize,
    pub col: usize,
    pub eps: Option<f64>,
    pub expected: Coords,
    pub computed: Option<Coords>,
    pub error: f64,
    pub pass: bool,
}

#[derive(Clone, PartialEq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GammaTableReport {
    pub gamma: GammaFamily,
    pub commutators: Vec<TableEntry>,
    pub adjoints: Vec<TableEntry>,
    pub measured_structure: Vec<Vec<Coords>>,
    pub antisymmetry_defect: f64,
    pub jacobi_defect: f64,
}

impl GammaTableReport {
    pub fn mismatches(&self) -> usize {
        self.commutators.iter().chain(&self.adjoints).filter(|e| !e.pass).count()
    }
}

#[derive(Clone, PartialEq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TablesReport {
    pub n_points: usize,
    pub commutator_tolerance: f64,
    pub adjoint_tolerance: f64,
    pub gammas: Vec<GammaTableReport>,
    pub pass: bool,
}

#[derive(Clone, PartialEq, Debug)]
pub struct TableOptions {
    pub n_points: usize,
    pub commutator_tolerance: f64,
    pub adjoint_tolerance: f64,
    pub epsilons: Vec<f64>,
    pub domain: SampleDomain,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions {
            n_points: 10,
            commutator_tolerance: 1e-8,
            adjoint_tolerance: 1e-8,
            epsilons: vec![0.1, 0.5],
            domain: SampleDomain::default(),
        }
    }
}

fn max_diff(a: &Coords, b: &Coords) -> f64 {
    a.iter().zip(b).map(|(x, y)| libm::fabs(x - y)).fold(0.0, f64::max)
}

/// Reproduce the commutator and adjoint tables for each `Γ`.
///
/// Commutators are computed symbolically, evaluated at random points and
/// decomposed in the basis; the adjoint table is recomputed from the measured
/// structure constants by matrix exponentiation.
pub fn verify_tables<R: Rng + ?Sized>(gammas: &[GammaFamily], opts: &TableOptions, rng: &mut R) -> TablesReport {
    let expected = tabulated_structure_constants();
    let mut reports = Vec::new();
    for &gamma in gammas {
        let basis = LieAlgebraBasis::new(gamma);
        let samples = opts.domain.sample(rng, opts.n_points.max(10));
        let mut measured = [[[f64::NAN; DIM]; DIM]; DIM];
        let mut commutators = Vec::new();
        for i in 0..DIM {
            for j in 0..DIM {
                let w = commutator(&basis.fields[i], &basis.fields[j]);
                let computed = decompose(&w, &basis, &samples).ok().map(|d| d.coords);
                let error = computed.map_or(f64::INFINITY, |c| max_diff(&c, &expected[i][j]));
                if let Some(c) = computed {
                    measured[i][j] = c;
                }
                commutators.push(TableEntry {
                    row: i + 1,
                    col: j + 1,
                    eps: None,
                    expected: expected[i][j],
                    computed,
                    error,
                    pass: error < opts.commutator_tolerance,
                });
            }
        }
        let mut adjoints = Vec::new();
        for &eps in &opts.epsilons {
            for i in Basis::ALL {
                for j in Basis::ALL {
                    let want = tabulated_adjoint_entry(i, j, eps);
                    let got = adjoint(&measured, i, eps, &j.unit());
                    let error = max_diff(&want, &got);
                    adjoints.push(TableEntry {
                        row: i.index() + 1,
                        col: j.index() + 1,
                        eps: Some(eps),
                        expected: want,
                        computed: Some(got),
                        error,
                        pass: error < opts.adjoint_tolerance,
                    });
                }
            }
        }
        reports.push(GammaTableReport {
            gamma,
            commutators,
            adjoints,
            measured_structure: measured.iter().map(|r| r.to_vec()).collect(),
            antisymmetry_defect: antisymmetry_defect(&measured),
            jacobi_defect: jacobi_defect(&measured),
        });
    }
    let pass = reports.iter().all(|r| r.mismatches() == 0);
    TablesReport {
        n_points: opts.n_points.max(10),
        commutator_tolerance: opts.commutator_tolerance,
        adjoint_tolerance: opts.adjoint_tolerance,
        gammas: reports,
        pass,
    }
}

/// Representatives of the one-dimensional optimal system.
#[derive(Clone, Copy, PartialEq, Debug)]
pub enum OptimalRepresentative {
    /// `V₁ + k₁V₄`
    I { k1: f64 },
    /// `V₂ + k₂V₃ + k₃V₄`
    II { k2: f64, k3: f64 },
    /// `V₃ + k₄V₅`
    III { k4: f64 },
    /// `V₄`
    IV,
    /// `V₅`
    V,
}

impl OptimalRepresentative {
    pub fn coords(&self) -> Coords {
        match *self {
            OptimalRepresentative::I { k1 } => [1.0, 0.0, 0.0, k1, 0.0],
            OptimalRepresentative::II { k2, k3 } => [0.0, 1.0, k2, k3, 0.0],
            OptimalRepresentative::III { k4 } => [0.0, 0.0, 1.0, 0.0, k4],
            OptimalRepresentative::IV => Basis::V4.unit(),
            OptimalRepresentative::V => Basis::V5.unit(),
        }
    }
}

/// One adjoint map applied during simplification.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct AdjointStep {
    pub by: Basis,
    pub eps: f64,
    /// The coordinate driven to zero.
    pub target: Basis,
}

#[derive(Clone, PartialEq, Debug)]
pub struct Simplification {
    pub steps: Vec<AdjointStep>,
    pub coords: Coords,
    pub representative: Option<OptimalRepresentative>,
}

/// Find `ε` with `adjoint(by, ε, w)[target] = 0` by Newton iteration with a
/// central-difference slope.
pub fn solve_adjoint_parameter(s: &StructureConstants, by: Basis, target: Basis, w: &Coords) -> Option<f64> {
    let f = |e: f64| adjoint(s, by, e, w)[target.index()];
    let scale = w.iter().map(|v| libm::fabs(*v)).fold(1.0, f64::max);
    let mut eps = 0.0;
    for _ in 0..60 {
        let v = f(eps);
        if libm::fabs(v) < 1e-14 * scale {
            return Some(eps);
        }
        let h = 1e-6 * (1.0 + libm::fabs(eps));
        let slope = (f(eps + h) - f(eps - h)) / (2.0 * h);
        if slope == 0.0 || !slope.is_finite() {
            return None;
        }
        eps -= v / slope;
    }
    None
}

/// Bring `Σ aᵢVᵢ` with `a₁ ≠ 0` towards representative (i): the `V₂` and `V₃`
/// coordinates are removed by `Ad(exp(εV₂))` and `Ad(exp(εV₃))`, then `V₅` by
/// `Ad(exp(εV₅))` when the `V₄` coordinate is non-zero.
pub fn simplify_with_v1(s: &StructureConstants, w: &Coords) -> Option<Simplification> {
    if w[0] == 0.0 {
        return None;
    }
    let mut coords = *w;
    let mut steps = Vec::new();
    for (by, target) in [(Basis::V2, Basis::V2), (Basis::V3, Basis::V3), (Basis::V5, Basis::V5)] {
        if coords[target.index()] == 0.0 {
            continue;
        }
        if by == Basis::V5 && coords[3] == 0.0 {
            continue;
        }
        let eps = solve_adjoint_parameter(s, by, target, &coords)?;
        coords = adjoint(s, by, eps, &coords);
        steps.push(AdjointStep { by, eps, target });
    }
    let scaled = coords.map(|c| c / coords[0]);
    let representative = (libm::fabs(scaled[1]) < 1e-10 && libm::fabs(scaled[2]) < 1e-10 && libm::fabs(scaled[4]) < 1e-10)
        .then_some(OptimalRepresentative::I { k1: scaled[3] });
    Some(Simplification {
        steps,
        coords,
        representative,
    })
}
