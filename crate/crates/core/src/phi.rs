//! Sparse Puiseux polynomials `Σ c_q φ^q` with rational exponents, and the two
//! derivations used for coefficient collection.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use crate::expr::{real_pow, EvalError, Expr};
use crate::rational::Rational;

/// Coefficients below this magnitude are dropped.
pub const PRUNE: f64 = 1e-14;

#[derive(Clone, PartialEq, Debug, Default)]
pub struct PhiPoly {
    terms: BTreeMap<Rational, f64>,
}

/// `d/dζ` on the ring.
#[derive(Clone, Copy, PartialEq, Debug)]
pub enum Derivation {
    /// `φ' = r + φ²`, so `(φ^q)' = q r φ^(q−1) + q φ^(q+1)`.
    Riccati { r: f64 },
    /// The variable is `ζ` itself: `(ζ^q)' = q ζ^(q−1)`.
    Monomial,
}

impl PhiPoly {
    pub fn zero() -> Self {
        PhiPoly::default()
    }

    pub fn constant(c: f64) -> Self {
        PhiPoly::monomial(Rational::integer(0), c)
    }

    pub fn monomial(q: Rational, c: f64) -> Self {
        let mut p = PhiPoly::zero();
        p.add_term(q, c);
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Rational, f64)>) -> Self {
        let mut p = PhiPoly::zero();
        for (q, c) in terms {
            p.add_term(q, c);
        }
        p
    }

    fn add_term(&mut self, q: Rational, c: f64) {
        let v = self.terms.entry(q).or_insert(0.0);
        *v += c;
        if libm::fabs(*v) < PRUNE {
            self.terms.remove(&q);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, q: Rational) -> f64 {
        self.terms.get(&q).copied().unwrap_or(0.0)
    }

    /// Terms in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (Rational, f64)> + '_ {
        self.terms.iter().map(|(q, c)| (*q, *c))
    }

    pub fn support(&self) -> Vec<Rational> {
        self.terms.keys().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| libm::fabs(*c)).fold(0.0, f64::max)
    }

    pub fn scale(&self, k: f64) -> Self {
        PhiPoly::from_terms(self.terms().map(|(q, c)| (q, c * k)))
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut acc = PhiPoly::constant(1.0);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    pub fn derivative(&self, d: Derivation) -> Self {
        let mut out = PhiPoly::zero();
        let one = Rational::integer(1);
        for (q, c) in self.terms() {
            if q.is_zero() {
                continue;
            }
            let qc = q.to_f64() * c;
            match d {
                Derivation::Riccati { r } => {
                    out.add_term(q - one, qc * r);
                    out.add_term(q + one, qc);
                }
                Derivation::Monomial => out.add_term(q - one, qc),
            }
        }
        out
    }

    /// Evaluate at `φ = v` under the real fractional-power convention.
    pub fn eval(&self, v: f64) -> Result<f64, EvalError> {
        let mut s = 0.0;
        for (q, c) in self.terms() {
            s += c * real_pow(v, q)?;
        }
        Ok(s)
    }

    /// Substitute an expression for the variable.
    pub fn to_expr(&self, var: &Expr) -> Expr {
        Expr::sum(self.terms().map(|(q, c)| Expr::c(c) * var.clone().powr(q)))
    }
}

pub fn phi_diff(p: &PhiPoly, r: f64) -> PhiPoly {
    p.derivative(Derivation::Riccati { r })
}

impl Add for &PhiPoly {
    type Output = PhiPoly;
    fn add(self, rhs: &PhiPoly) -> PhiPoly {
        let mut out = self.clone();
        for (q, c) in rhs.terms() {
            out.add_term(q, c);
        }
        out
    }
}

impl Sub for &PhiPoly {
    type Output = PhiPoly;
    fn sub(self, rhs: &PhiPoly) -> PhiPoly {
        let mut out = self.clone();
        for (q, c) in rhs.terms() {
            out.add_term(q, -c);
        }
        out
    }
}

impl Neg for &PhiPoly {
    type Output = PhiPoly;
    fn neg(self) -> PhiPoly {
        self.scale(-1.0)
    }
}

impl Mul for &PhiPoly {
    type Output = PhiPoly;
    fn mul(self, rhs: &PhiPoly) -> PhiPoly {
        let mut out = PhiPoly::zero();
        for (p, a) in self.terms() {
            for (q, b) in rhs.terms() {
                out.add_term(p + q, a * b);
            }
        }
        out
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for PhiPoly {
            type Output = PhiPoly;
            fn $m(self, rhs: PhiPoly) -> PhiPoly {
                (&self).$m(&rhs)
            }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl fmt::Display for PhiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (q, c)) in self.terms().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{c:?}*phi^({q})")?;
        }
        Ok(())
    }
}

/// The exact solutions of `φ' = r + φ²`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum RiccatiSolution {
    /// `−√(−r) tanh(√(−r) ζ)`, `r < 0`
    Tanh,
    /// `−√(−r) coth(√(−r) ζ)`, `r < 0`
    Coth,
    /// `√r tan(√r ζ)`, `r > 0`
    Tan,
    /// `−√r cot(√r ζ)`, `r > 0`
    Cot,
    /// `−1/ζ`, `r = 0`
    Rational,
}

#[derive(Clone, Copy, PartialEq, Debug)]
pub struct WrongSign {
    pub solution: RiccatiSolution,
    pub r: f64,
}

impl fmt::Display for WrongSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "the {:?} solution does not apply for r = {}", self.solution, self.r)
    }
}

impl RiccatiSolution {
    pub const ALL: [RiccatiSolution; 5] = [
        RiccatiSolution::Tanh,
        RiccatiSolution::Coth,
        RiccatiSolution::Tan,
        RiccatiSolution::Cot,
        RiccatiSolution::Rational,
    ];

    pub fn admits(self, r: f64) -> bool {
        match self {
            RiccatiSolution::Tanh | RiccatiSolution::Coth => r < 0.0,
            RiccatiSolution::Tan | RiccatiSolution::Cot => r > 0.0,
            RiccatiSolution::Rational => r == 0.0,
        }
    }

    /// `φ(ζ)` as an expression in `var`.
    pub fn expr(self, r: f64, var: &Expr) -> Result<Expr, WrongSign> {
        if !self.admits(r) {
            return Err(WrongSign { solution: self, r });
        }
        let z = var.clone();
        let s = libm::sqrt(libm::fabs(r));
        let arg = Expr::c(s) * z.clone();
        Ok(match self {
            RiccatiSolution::Tanh => Expr::c(-s) * arg.tanh(),
            RiccatiSolution::Coth => Expr::c(-s) * arg.coth(),
            RiccatiSolution::Tan => Expr::c(s) * arg.tan(),
            RiccatiSolution::Cot => Expr::c(-s) * arg.cot(),
            RiccatiSolution::Rational => -(z.powi(-1)),
        })
    }

    /// Zeros and poles of `φ` in `ζ`, where fractional powers of `φ` fail
    /// to be smooth.
    pub fn singular_set(self, r: f64) -> crate::reduction::SingularSet {
        use crate::reduction::SingularSet;
        let s = libm::sqrt(libm::fabs(r));
        match self {
            RiccatiSolution::Tanh | RiccatiSolution::Coth | RiccatiSolution::Rational => SingularSet::Points(alloc::vec![0.0]),
            RiccatiSolution::Tan | RiccatiSolution::Cot => SingularSet::Lattice {
                offset: 0.0,
                period: core::f64::consts::FRAC_PI_2 / s,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn q(n: i64, d: i64) -> Rational {
        Rational::frac(n, d)
    }

    #[test]
    fn riccati_rule_on_two_thirds() {
        let r = -0.7;
        let d = phi_diff(&PhiPoly::monomial(q(2, 3), 1.0), r);
        assert_eq!(d.support(), alloc::vec![q(-1, 3), q(5, 3)]);
        assert_relative_eq!(d.coefficient(q(-1, 3)), 2.0 / 3.0 * r);
        assert_relative_eq!(d.coefficient(q(5, 3)), 2.0 / 3.0);
        assert!(phi_diff(&PhiPoly::constant(3.0), r).is_zero());
    }

    #[test]
    fn pruning() {
        let p = PhiPoly::monomial(q(1, 3), 1.0);
        let z = &p - &PhiPoly::monomial(q(1, 3), 1.0 - 1e-15);
        assert!(z.is_zero());
    }

    #[test]
    fn triple_derivative_matches_symbolic() {
        let r = -0.4;
        let p = PhiPoly::monomial(q(2, 3), 1.0);
        let d3 = phi_diff(&phi_diff(&phi_diff(&p, r), r), r);
        assert!(d3.support().iter().all(|e| e.denom() == 3));
        let z = Expr::var("zeta");
        let phi = RiccatiSolution::Tanh.expr(r, &z).unwrap();
        let sym = p.to_expr(&phi).diff("zeta").diff("zeta").diff("zeta");
        let inst = d3.to_expr(&phi);
        for i in 0..20 {
            let zeta = 0.2 + 0.15 * i as f64;
            let a = sym.eval(&[("zeta", zeta)]).unwrap();
            let b = inst.eval(&[("zeta", zeta)]).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-10);
        }
    }

    #[test]
    fn riccati_solutions_satisfy_the_equation() {
        let z = Expr::var("zeta");
        for (sol, r) in [
            (RiccatiSolution::Tanh, -0.8),
            (RiccatiSolution::Coth, -0.8),
            (RiccatiSolution::Tan, 0.6),
            (RiccatiSolution::Cot, 0.6),
            (RiccatiSolution::Rational, 0.0),
        ] {
            let phi = sol.expr(r, &z).unwrap();
            let lhs = phi.diff("zeta") - (Expr::c(r) + phi.clone().powi(2));
            for i in 0..20 {
                let zeta = 0.1 + 0.07 * i as f64;
                assert!(lhs.eval(&[("zeta", zeta)]).unwrap().abs() < 1e-10, "{sol:?}");
            }
        }
        assert!(RiccatiSolution::Tanh.expr(0.5, &z).is_err());
    }
}
