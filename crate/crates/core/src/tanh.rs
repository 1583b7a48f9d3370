//! The extended tanh-function method for the reduced ODEs: balancing, ansatz
//! substitution in the φ-ring, and audits of closed-form constant sets.

use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::linalg::{solve, Matrix};
use crate::newton::{multistart, starts, MultistartReport, NewtonOptions};
use crate::phi::{Derivation, PhiPoly, RiccatiSolution};
use crate::rational::Rational;
use crate::reduction::{Gen2Reading, ReducedOde};

#[derive(Clone, PartialEq, Debug)]
pub enum TanhError {
    Unbalanceable,
    /// `ζ F'` has no representation in the φ-ring.
    ExplicitZeta,
    Precondition(&'static str),
}

impl fmt::Display for TanhError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TanhError::Unbalanceable => f.write_str("unbalanceable: no positive balance exponent"),
            TanhError::ExplicitZeta => f.write_str("the ODE depends explicitly on zeta"),
            TanhError::Precondition(m) => write!(f, "precondition violated: {m}"),
        }
    }
}

impl core::error::Error for TanhError {}

/// Balance exponent `N` for terms given as `(degree in F, derivative order)`:
/// the highest-order linear term against the highest-degree nonlinear term,
/// `N + k_lin = d N + k_nl`.
pub fn balance(terms: &[(u32, u32)]) -> Result<Rational, TanhError> {
    let k_lin = terms
        .iter()
        .filter(|(d, _)| *d == 1)
        .map(|(_, k)| *k)
        .max()
        .ok_or(TanhError::Unbalanceable)?;
    let (d, k_nl) = terms
        .iter()
        .filter(|(d, _)| *d >= 2)
        .copied()
        .max()
        .ok_or(TanhError::Unbalanceable)?;
    let n = Rational::new(k_lin as i64 - k_nl as i64, d as i64 - 1).map_err(|_| TanhError::Unbalanceable)?;
    if n <= Rational::integer(0) {
        return Err(TanhError::Unbalanceable);
    }
    Ok(n)
}

/// `F = a0 + a1 φ^n + b1 φ^(−n)` with `φ' = r + φ²`.
#[derive(Clone, Copy, PartialEq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Ansatz {
    pub a0: f64,
    pub a1: f64,
    pub b1: f64,
    pub n: Rational,
    pub r: f64,
}

impl Ansatz {
    pub fn two_thirds(a0: f64, a1: f64, b1: f64, r: f64) -> Self {
        Ansatz {
            a0,
            a1,
            b1,
            n: Rational::frac(2, 3),
            r,
        }
    }

    pub fn poly(&self) -> PhiPoly {
        PhiPoly::from_terms([
            (Rational::integer(0), self.a0),
            (self.n, self.a1),
            (-self.n, self.b1),
        ])
    }
}

#[derive(Clone, Copy, PartialEq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SystemEntry {
    pub exponent: Rational,
    pub value: f64,
}

/// Collected coefficients of the substituted ODE, one per exponent.
#[derive(Clone, PartialEq, Debug, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct AlgebraicSystem {
    pub entries: Vec<SystemEntry>,
}

impl AlgebraicSystem {
    pub fn value_at(&self, q: Rational) -> f64 {
        self.entries.iter().find(|e| e.exponent == q).map_or(0.0, |e| e.value)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|e| libm::fabs(e.value)).fold(0.0, f64::max)
    }

    pub fn violations(&self, tol: f64) -> Vec<SystemEntry> {
        self.entries.iter().filter(|e| !(libm::fabs(e.value) < tol)).copied().collect()
    }

    pub fn exponents(&self) -> Vec<Rational> {
        self.entries.iter().map(|e| e.exponent).collect()
    }

    /// Values on the lattice `lo, lo + 1/den, …, hi`, zero where absent.
    pub fn on_lattice(&self, lo: Rational, hi: Rational, den: i64) -> Vec<f64> {
        let step = Rational::frac(1, den);
        let mut out = Vec::new();
        let mut q = lo;
        while q <= hi {
            out.push(self.value_at(q));
            q = q + step;
        }
        out
    }
}

/// Substitute `f` into the ODE and collect coefficients. The support is the
/// union of the supports of the individual nonzero terms, so exponents whose
/// contributions cancel are still listed (with value zero).
pub fn collect(ode: &ReducedOde, f: &PhiPoly, d: Derivation) -> Result<AlgebraicSystem, TanhError> {
    let f1 = f.derivative(d);
    let f2 = f1.derivative(d);
    let f3 = f2.derivative(d);
    let mut parts: Vec<PhiPoly> = Vec::new();
    parts.push(f3.scale(ode.lead));
    let ff = f * f;
    parts.push(&(&ff * f) * &f1.scale(ode.a3));
    parts.push(&ff * &f1.scale(ode.a2));
    parts.push(f * &f1.scale(ode.a1));
    parts.push(f1.scale(ode.drift));
    if ode.zeta_drift != 0.0 {
        match d {
            Derivation::Monomial => {
                parts.push(&PhiPoly::monomial(Rational::integer(1), ode.zeta_drift) * &f1);
            }
            Derivation::Riccati { .. } => return Err(TanhError::ExplicitZeta),
        }
    }
    parts.push(f.scale(ode.damping));
    parts.push(PhiPoly::constant(ode.source));

    let mut support: Vec<Rational> = parts.iter().flat_map(|p| p.support()).collect();
    support.sort();
    support.dedup();
    let total = parts.iter().fold(PhiPoly::zero(), |acc, p| &acc + p);
    Ok(AlgebraicSystem {
        entries: support
            .into_iter()
            .map(|q| SystemEntry {
                exponent: q,
                value: total.coefficient(q),
            })
            .collect(),
    })
}

/// Substitute the ansatz into a φ-ring ODE.
pub fn derive_system(ode: &ReducedOde, ansatz: &Ansatz) -> Result<AlgebraicSystem, TanhError> {
    collect(ode, &ansatz.poly(), Derivation::Riccati { r: ansatz.r })
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Branch {
    /// `r > 0`; the tan and cot solutions.
    Plus,
    /// `r < 0`; the tanh and coth solutions.
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// Constants claimed for the first power ansatz `F = a0 + a1 ζ^(−2/3)`.
#[derive(Clone, Copy, PartialEq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Gen1Claim {
    pub n: [f64; 6],
    pub k1: f64,
    pub a0: f64,
    pub a1: f64,
}

/// `a0 = 3n6/2`, `a1 = (60 n6/n2)^(1/3)`, `n1 = −2n2/(9n6)`, `n3 = −3n2n6/2`,
/// `n4 = 3n2n6²/4`, `k1 = 2/3 + n5`.
pub fn check_constants_gen1(n2: f64, n5: f64, n6: f64) -> Result<Gen1Claim, TanhError> {
    if n2 == 0.0 {
        return Err(TanhError::Precondition("n2 must be nonzero"));
    }
    if n6 == 0.0 {
        return Err(TanhError::Precondition("n6 must be nonzero"));
    }
    Ok(Gen1Claim {
        n: [
            -2.0 * n2 / (9.0 * n6),
            n2,
            -1.5 * n2 * n6,
            0.75 * n2 * n6 * n6,
            n5,
            n6,
        ],
        k1: 2.0 / 3.0 + n5,
        a0: 1.5 * n6,
        a1: libm::cbrt(60.0 * n6 / n2),
    })
}

impl Gen1Claim {
    pub fn ode(&self) -> ReducedOde {
        ReducedOde::generator_one(self.n, self.k1)
    }

    pub fn profile_poly(&self) -> PhiPoly {
        PhiPoly::from_terms([(Rational::integer(0), self.a0), (Rational::frac(-2, 3), self.a1)])
    }
}

/// Constants claimed for the second family's ansatz.
#[derive(Clone, Copy, PartialEq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Gen2Claim {
    /// `m1 … m6` with `m6` as required by the claim.
    pub m: [f64; 6],
    pub k2: f64,
    pub k3: f64,
    pub ansatz: Ansatz,
    pub branch: Option<Branch>,
}

impl Gen2Claim {
    pub fn ode(&self, reading: Gen2Reading) -> ReducedOde {
        ReducedOde::generator_two(self.m, self.k2, self.k3, reading)
    }
}

fn a1_gen2(m1: f64) -> f64 {
    -2.0 * libm::cbrt(5.0 / (9.0 * m1))
}

/// The sign-branched constant set with `r ≠ 0` in general.
pub fn check_constants_gen2(m: [f64; 5], branch: Branch) -> Result<Gen2Claim, TanhError> {
    let [m1, m2, m3, m4, m5] = m;
    if m1 == 0.0 {
        return Err(TanhError::Precondition("m1 != 0 is required"));
    }
    if !(m1 > 0.0) {
        return Err(TanhError::Precondition("m1 > 0 is required for a real Riccati parameter"));
    }
    let disc = m2 * m2 - 3.0 * m1 * m3;
    if disc < 0.0 {
        return Err(TanhError::Precondition("m2^2 - 3 m1 m3 must be non-negative"));
    }
    let s = branch.sign();
    let d32 = disc * libm::sqrt(disc);
    let r = s / 42.0 * libm::sqrt(5.0 / (14.0 * m1)) * (disc / m1) * libm::sqrt(disc / m1);
    let k2 = m4 + (98.0 * m2 * m2 * m2 - 441.0 * m1 * m2 * m3 + s * 2.0 * libm::sqrt(70.0) * d32) / (1323.0 * m1 * m1);
    let b1 = libm::pow(15.0 / m1, 2.0 / 3.0) * (3.0 * m3 * m1 - m2 * m2) / (63.0 * m1);
    Ok(Gen2Claim {
        m: [m1, m2, m3, m4, m5, 0.0],
        k2,
        k3: m5,
        ansatz: Ansatz::two_thirds(-m2 / (3.0 * m1), a1_gen2(m1), b1, r),
        branch: Some(branch),
    })
}

/// The `r = 0` constant set: `m3 = m2²/(3m1)`, `k2 = m4 − m2³/(27 m1²)`.
pub fn check_constants_gen2_rational(m1: f64, m2: f64, m4: f64, m5: f64) -> Result<Gen2Claim, TanhError> {
    if m1 == 0.0 || !m1.is_finite() {
        return Err(TanhError::Precondition("m1 != 0 is required"));
    }
    Ok(Gen2Claim {
        m: [m1, m2, m2 * m2 / (3.0 * m1), m4, m5, 0.0],
        k2: m4 - m2 * m2 * m2 / (27.0 * m1 * m1),
        k3: m5,
        ansatz: Ansatz::two_thirds(-m2 / (3.0 * m1), a1_gen2(m1), 0.0, 0.0),
        branch: None,
    })
}

pub const AUDIT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, PartialEq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct AuditReport {
    pub pass: bool,
    pub tolerance: f64,
    pub max_abs: f64,
    pub system: AlgebraicSystem,
    pub violations: Vec<SystemEntry>,
}

impl AuditReport {
    fn from_system(system: AlgebraicSystem, tolerance: f64) -> Self {
        let violations = system.violations(tolerance);
        AuditReport {
            pass: violations.is_empty(),
            tolerance,
            max_abs: system.max_abs(),
            system,
            violations,
        }
    }
}

/// Collect the first reduced ODE in powers of `ζ` under the claimed constants.
pub fn audit_gen1(claim: &Gen1Claim) -> AuditReport {
    let sys = collect(&claim.ode(), &claim.profile_poly(), Derivation::Monomial)
        .expect("the monomial derivation accepts explicit zeta");
    AuditReport::from_system(sys, AUDIT_TOLERANCE)
}

pub fn audit_gen2(claim: &Gen2Claim, reading: Gen2Reading) -> AuditReport {
    let sys = derive_system(&claim.ode(reading), &claim.ansatz).expect("second ODE has no explicit zeta");
    AuditReport::from_system(sys, AUDIT_TOLERANCE)
}

/// A random ODE of the second shape whose collected coefficients vanish at
/// four chosen exponents by construction.
#[derive(Clone, PartialEq, Debug)]
pub struct ManufacturedCase {
    pub ode: ReducedOde,
    pub ansatz: Ansatz,
    pub targets: [Rational; 4],
}

pub fn manufactured_case<R: Rng + ?Sized>(rng: &mut R) -> ManufacturedCase {
    let targets = [
        Rational::frac(11, 3),
        Rational::integer(3),
        Rational::frac(7, 3),
        Rational::integer(0),
    ];
    loop {
        let u = |rng: &mut R| rng.gen_range(-1.5..=1.5);
        let mut r = u(rng);
        if r == 0.0 {
            r = 0.5;
        }
        let ansatz = Ansatz::two_thirds(u(rng), u(rng), u(rng), r);
        let f = ansatz.poly();
        let d = Derivation::Riccati { r };
        let f1 = f.derivative(d);
        let f3 = f1.derivative(d).derivative(d);
        let drift = u(rng);
        let damping = u(rng);
        let ff = &f * &f;
        // unknown columns: a3, a2, a1, source
        let cols = [&(&ff * &f) * &f1, &ff * &f1, &f * &f1, PhiPoly::constant(1.0)];
        let fixed = &(&f3 + &f1.scale(drift)) + &f.scale(damping);
        let mut a = Matrix::zeros(4, 4);
        let mut b = [0.0; 4];
        for (i, q) in targets.iter().enumerate() {
            for (j, c) in cols.iter().enumerate() {
                a[(i, j)] = c.coefficient(*q);
            }
            b[i] = -fixed.coefficient(*q);
        }
        let Some(x) = solve(&a, &b) else { continue };
        if x.iter().any(|v| !v.is_finite() || v.abs() > 1e3) {
            continue;
        }
        return ManufacturedCase {
            ode: ReducedOde {
                lead: 1.0,
                a3: x[0],
                a2: x[1],
                a1: x[2],
                drift,
                zeta_drift: 0.0,
                damping,
                source: x[3],
            },
            ansatz,
            targets,
        };
    }
}

/// The exponent lattice of a `2/3` ansatz substituted into a third-order
/// ODE with a quartic nonlinearity.
pub fn two_thirds_lattice() -> (Rational, Rational) {
    (Rational::frac(-11, 3), Rational::frac(11, 3))
}

/// Unknowns `[a0, a1, n1, n3, n4, k1]` of the first power ansatz for fixed
/// `n2, n5, n6`; returns the collected ζ-coefficients on the full lattice.
pub fn gen1_residual(n2: f64, n5: f64, n6: f64) -> impl Fn(&[f64]) -> Vec<f64> {
    move |x: &[f64]| {
        let ode = ReducedOde::generator_one([x[2], n2, x[3], x[4], n5, n6], x[5]);
        let f = PhiPoly::from_terms([(Rational::integer(0), x[0]), (Rational::frac(-2, 3), x[1])]);
        let sys = collect(&ode, &f, Derivation::Monomial).expect("monomial derivation");
        sys.on_lattice(Rational::frac(-11, 3), Rational::integer(0), 3)
    }
}

/// Unknowns of the second ansatz. With the chain-rule reading they are
/// `[a0, a1, b1, r, k2, k3]`; with the printed reading `[a0, a1, b1, r, k3]`.
pub fn gen2_residual(m: [f64; 6], k4: f64, reading: Gen2Reading) -> impl Fn(&[f64]) -> Vec<f64> {
    move |x: &[f64]| {
        let (k2, k3, reading) = match reading {
            Gen2Reading::ChainRule => (x[4], x[5], Gen2Reading::ChainRule),
            Gen2Reading::AsPrinted { .. } => (0.0, x[4], Gen2Reading::AsPrinted { k4 }),
        };
        let ode = ReducedOde::generator_two(m, k2, k3, reading);
        let ansatz = Ansatz::two_thirds(x[0], x[1], x[2], x[3]);
        let sys = derive_system(&ode, &ansatz).expect("no explicit zeta");
        let (lo, hi) = two_thirds_lattice();
        sys.on_lattice(lo, hi, 3)
    }
}

pub fn solve_gen1<R: Rng + ?Sized>(claim: &Gen1Claim, n_starts: usize, rng: &mut R, opts: &NewtonOptions) -> MultistartReport {
    let f = gen1_residual(claim.n[1], claim.n[4], claim.n[5]);
    let center = [claim.a0, claim.a1, claim.n[0], claim.n[2], claim.n[3], claim.k1];
    multistart(&f, &starts(&center, n_starts, rng), opts)
}

pub fn solve_gen2<R: Rng + ?Sized>(
    claim: &Gen2Claim,
    reading: Gen2Reading,
    n_starts: usize,
    rng: &mut R,
    opts: &NewtonOptions,
) -> MultistartReport {
    let a = claim.ansatz;
    let (k4, center): (f64, Vec<f64>) = match reading {
        Gen2Reading::ChainRule => (0.0, alloc::vec![a.a0, a.a1, a.b1, a.r, claim.k2, claim.k3]),
        Gen2Reading::AsPrinted { k4 } => (k4, alloc::vec![a.a0, a.a1, a.b1, a.r, claim.k3]),
    };
    let f = gen2_residual(claim.m, k4, reading);
    multistart(&f, &starts(&center, n_starts, rng), opts)
}

/// The Riccati solution matching a branch, with the second member of the
/// pair selected by `singular`.
pub fn riccati_for(branch: Option<Branch>, singular: bool) -> RiccatiSolution {
    match (branch, singular) {
        (Some(Branch::Minus), false) => RiccatiSolution::Tanh,
        (Some(Branch::Minus), true) => RiccatiSolution::Coth,
        (Some(Branch::Plus), false) => RiccatiSolution::Tan,
        (Some(Branch::Plus), true) => RiccatiSolution::Cot,
        (None, _) => RiccatiSolution::Rational,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64, d: i64) -> Rational {
        Rational::frac(n, d)
    }

    #[test]
    fn balance_examples() {
        let ode = [(1, 3), (4, 1), (3, 1), (2, 1), (1, 1), (1, 0), (0, 0)];
        assert_eq!(balance(&ode), Ok(q(2, 3)));
        assert_eq!(balance(&[(1, 3), (2, 1)]), Ok(Rational::integer(2)));
        assert_eq!(balance(&[(1, 1), (1, 0)]), Err(TanhError::Unbalanceable));
        assert_eq!(balance(&[(1, 1), (2, 1)]), Err(TanhError::Unbalanceable));
    }

    #[test]
    fn zero_ansatz_leaves_the_source() {
        let m = [1.0, 2.0, 3.0, 4.0, 5.0, 0.75];
        let ode = ReducedOde::generator_two(m, 0.0, 0.2, Gen2Reading::AsPrinted { k4: 0.3 });
        let sys = derive_system(&ode, &Ansatz::two_thirds(0.0, 0.0, 0.0, -1.0)).unwrap();
        assert_eq!(sys.entries, alloc::vec![SystemEntry { exponent: q(0, 1), value: 0.75 }]);
    }

    #[test]
    fn gen1_reference_example() {
        let c = check_constants_gen1(60.0, 0.0, 1.0).unwrap();
        assert_relative_eq!(c.a0, 1.5);
        assert_relative_eq!(c.a1, 1.0, epsilon = 1e-15);
        assert_relative_eq!(c.n[0], -40.0 / 3.0);
        assert_relative_eq!(c.n[2], -90.0);
        assert_relative_eq!(c.n[3], 45.0);
        assert_relative_eq!(c.k1, 2.0 / 3.0);
        assert!(check_constants_gen1(0.0, 0.0, 1.0).is_err());
        assert!(check_constants_gen1(1.0, 0.0, 0.0).is_err());
        for n6 in [0.3, -2.0, 7.0] {
            assert_relative_eq!(check_constants_gen1(60.0 * n6, 0.1, n6).unwrap().a1, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn gen1_audit_support_and_pass() {
        for (n2, n5, n6) in [(60.0, 0.0, 1.0), (-3.0, 0.4, 0.7), (2.5, -1.0, -1.2)] {
            let rep = audit_gen1(&check_constants_gen1(n2, n5, n6).unwrap());
            assert_eq!(rep.system.exponents(), alloc::vec![q(-11, 3), q(-3, 1), q(-7, 3), q(-5, 3), q(-2, 3), q(0, 1)]);
            assert!(rep.pass, "{rep:?}");
        }
    }

    #[test]
    fn gen2_trivial_example() {
        let c = check_constants_gen2([5.0 / 9.0, 0.0, 0.0, 0.0, 0.0], Branch::Plus).unwrap();
        assert_relative_eq!(c.ansatz.a1, -2.0, epsilon = 1e-15);
        assert_eq!(c.ansatz.a0, 0.0);
        assert_eq!(c.ansatz.b1, 0.0);
        assert_eq!(c.ansatz.r, 0.0);
        assert!(check_constants_gen2([0.0, 1.0, 0.0, 0.0, 0.0], Branch::Plus).is_err());
        assert!(check_constants_gen2([1.0, 0.0, 1.0, 0.0, 0.0], Branch::Plus).is_err());
    }

    #[test]
    fn gen2_chain_rule_reading_passes_both_branches() {
        for m in [[1.0, 1.0, 0.0, 0.0, 0.0], [1.4, 2.0, -1.0 / 3.0, 0.5, 0.3], [0.7, -0.4, -0.8, 1.2, -0.6]] {
            for b in [Branch::Plus, Branch::Minus] {
                let c = check_constants_gen2(m, b).unwrap();
                let rep = audit_gen2(&c, Gen2Reading::ChainRule);
                assert!(rep.pass, "{m:?} {b:?}: {rep:?}");
                let printed = audit_gen2(&c, Gen2Reading::AsPrinted { k4: c.k3 });
                assert!(!printed.pass);
            }
        }
    }

    #[test]
    fn rational_branch_k2_matches_general_limit() {
        let (m1, m2, m4) = (1.3, -0.7, 0.2);
        let m3 = m2 * m2 / (3.0 * m1);
        let a = check_constants_gen2_rational(m1, m2, m4, 0.0).unwrap();
        let b = check_constants_gen2([m1, m2, m3, m4, 0.0], Branch::Plus).unwrap();
        assert_relative_eq!(a.k2, b.k2, epsilon = 1e-14);
        assert!(audit_gen2(&a, Gen2Reading::ChainRule).pass);
    }

    #[test]
    fn manufactured_targets_vanish() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let case = manufactured_case(&mut rng);
            let sys = derive_system(&case.ode, &case.ansatz).unwrap();
            for q in case.targets {
                assert!(sys.value_at(q).abs() < 1e-12, "{q}: {}", sys.value_at(q));
            }
        }
    }

    #[test]
    fn collection_matches_symbolic_substitution() {
        let c = check_constants_gen2([1.0, 1.0, 0.0, 0.3, 0.2], Branch::Minus).unwrap();
        let ode = c.ode(Gen2Reading::AsPrinted { k4: 0.9 });
        let sys = derive_system(&ode, &c.ansatz).unwrap();
        let z = Expr::var("zeta");
        let phi = RiccatiSolution::Tanh.expr(c.ansatz.r, &z).unwrap();
        let f = c.ansatz.poly().to_expr(&phi);
        let collected = PhiPoly::from_terms(sys.entries.iter().map(|e| (e.exponent, e.value))).to_expr(&phi);
        let profile = crate::reduction::ExprProfile::new(f, "zeta");
        for i in 0..10 {
            let zeta = 0.3 + 0.2 * i as f64;
            let direct = crate::reduction::reduced_ode_residual(&ode, &profile, zeta).unwrap();
            let via = collected.eval(&[("zeta", zeta)]).unwrap();
            assert_relative_eq!(direct, via, max_relative = 1e-9, epsilon = 1e-12);
        }
    }

    #[test]
    fn newton_from_claims() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let opts = NewtonOptions::default();
        let c1 = check_constants_gen1(60.0, 0.0, 1.0).unwrap();
        let rep = solve_gen1(&c1, 4, &mut rng, &opts);
        assert!(rep.roots.iter().any(|r| r.start == 0 && r.iterations <= 3));
        let c2 = check_constants_gen2([1.0, 1.0, 0.0, 0.0, 0.0], Branch::Minus).unwrap();
        let rep = solve_gen2(&c2, Gen2Reading::ChainRule, 4, &mut rng, &opts);
        assert!(rep.roots.iter().any(|r| r.start == 0 && r.iterations <= 3), "{rep:?}");
        assert!(rep.roots.iter().all(|r| r.residual_norm < 1e-10));
    }
}
