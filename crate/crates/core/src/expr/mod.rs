//! Symbolic expression trees over named variables.
//!
//! Coefficients are `f64`; exponents are exact [`Rational`]s. Construction goes
//! through smart constructors that flatten nested sums and products, fold
//! numeric constants, merge like terms, combine powers of an identical base and
//! drop zero terms. There is no canonical form beyond that.
//!
//! Fractional powers follow the real convention: for `p/q` in lowest terms with
//! `q` odd, `b^(p/q) = (real q-th root of b)^p`; with `q` even, `b` must be
//! non-negative.

mod parse;

pub use parse::{parse, ParseError};

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};

use crate::rational::Rational;

/// Elementary functions supported by the grammar.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Func {
    Tanh,
    Coth,
    Tan,
    Cot,
    Exp,
    Ln,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 7] = [
        Func::Tanh,
        Func::Coth,
        Func::Tan,
        Func::Cot,
        Func::Exp,
        Func::Ln,
        Func::Sqrt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Tanh => "tanh",
            Func::Coth => "coth",
            Func::Tan => "tan",
            Func::Cot => "cot",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    pub fn apply(self, a: f64) -> Result<f64, EvalError> {
        let v = match self {
            Func::Tanh => libm::tanh(a),
            Func::Coth => {
                if a == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                1.0 / libm::tanh(a)
            }
            Func::Tan => libm::tan(a),
            Func::Cot => {
                let t = libm::tan(a);
                if t == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                1.0 / t
            }
            Func::Exp => libm::exp(a),
            Func::Ln => {
                if a <= 0.0 {
                    return Err(EvalError::LogOfNonPositive);
                }
                libm::log(a)
            }
            Func::Sqrt => {
                if a < 0.0 {
                    return Err(EvalError::EvenRootOfNegative);
                }
                libm::sqrt(a)
            }
        };
        finite(v)
    }

    /// Value and first three derivatives at `a`.
    pub fn derivatives(self, a: f64) -> Result<[f64; 4], EvalError> {
        let f0 = self.apply(a)?;
        Ok(match self {
            // f' = s0 + s2 f^2 for the Riccati-type functions
            Func::Tanh | Func::Coth | Func::Tan | Func::Cot => {
                let (s0, s2) = match self {
                    Func::Tanh | Func::Coth => (1.0, -1.0),
                    Func::Tan => (1.0, 1.0),
                    _ => (-1.0, -1.0),
                };
                let f1 = s0 + s2 * f0 * f0;
                let f2 = 2.0 * s2 * f0 * f1;
                let f3 = 2.0 * s2 * (f1 * f1 + f0 * f2);
                [f0, f1, f2, f3]
            }
            Func::Exp => [f0, f0, f0, f0],
            Func::Ln => [f0, 1.0 / a, -1.0 / (a * a), 2.0 / (a * a * a)],
            Func::Sqrt => {
                if a == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                [f0, 0.5 * f0 / a, -0.25 * f0 / (a * a), 0.375 * f0 / (a * a * a)]
            }
        })
    }
}

/// Evaluation failure.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum EvalError {
    DivisionByZero,
    EvenRootOfNegative,
    LogOfNonPositive,
    NotFinite,
    Unbound(String),
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::DivisionByZero => f.write_str("domain error: division by zero"),
            EvalError::EvenRootOfNegative => f.write_str("domain error: even root of a negative number"),
            EvalError::LogOfNonPositive => f.write_str("domain error: logarithm of a non-positive number"),
            EvalError::NotFinite => f.write_str("domain error: non-finite value"),
            EvalError::Unbound(v) => write!(f, "unbound variable `{v}`"),
        }
    }
}

impl core::error::Error for EvalError {}

impl EvalError {
    pub fn is_domain(&self) -> bool {
        !matches!(self, EvalError::Unbound(_))
    }
}

fn finite(v: f64) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NotFinite)
    }
}

/// `base^exp` under the real fractional-power convention.
pub fn real_pow(base: f64, exp: Rational) -> Result<f64, EvalError> {
    if exp.is_zero() {
        return Ok(1.0);
    }
    if base == 0.0 {
        return if exp > Rational::ZERO {
            Ok(0.0)
        } else {
            Err(EvalError::DivisionByZero)
        };
    }
    let (p, q) = (exp.numer(), exp.denom());
    let root = match q {
        1 => base,
        2 => {
            if base < 0.0 {
                return Err(EvalError::EvenRootOfNegative);
            }
            libm::sqrt(base)
        }
        3 => libm::cbrt(base),
        _ if q % 2 == 0 => {
            if base < 0.0 {
                return Err(EvalError::EvenRootOfNegative);
            }
            libm::pow(base, 1.0 / q as f64)
        }
        _ => {
            let r = libm::pow(libm::fabs(base), 1.0 / q as f64);
            if base < 0.0 {
                -r
            } else {
                r
            }
        }
    };
    let v = if let Ok(pi) = i32::try_from(p) {
        powi(root, pi)
    } else {
        libm::pow(root, p as f64)
    };
    finite(v)
}

fn powi(mut b: f64, e: i32) -> f64 {
    let neg = e < 0;
    let mut n = e.unsigned_abs();
    let mut acc = 1.0;
    while n > 0 {
        if n & 1 == 1 {
            acc *= b;
        }
        b *= b;
        n >>= 1;
    }
    if neg {
        1.0 / acc
    } else {
        acc
    }
}

/// Variable values for evaluation.
pub trait Bindings {
    fn lookup(&self, name: &str) -> Option<f64>;
}

impl Bindings for BTreeMap<String, f64> {
    fn lookup(&self, name: &str) -> Option<f64> {
        self.get(name).copied()
    }
}

impl Bindings for [(&str, f64)] {
    fn lookup(&self, name: &str) -> Option<f64> {
        self.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
    }
}

impl<const N: usize> Bindings for [(&str, f64); N] {
    fn lookup(&self, name: &str) -> Option<f64> {
        self.as_slice().lookup(name)
    }
}

/// Known derivatives of otherwise opaque variables, e.g. `d(Gamma)/dt = g1`.
#[derive(Clone, Debug, Default)]
pub struct DerivativeRules {
    rules: BTreeMap<(String, String), Expr>,
}

impl DerivativeRules {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declare `d(name)/d(wrt) = derivative`.
    pub fn with(mut self, name: &str, wrt: &str, derivative: Expr) -> Self {
        self.rules.insert((name.to_string(), wrt.to_string()), derivative);
        self
    }

    fn get(&self, name: &str, wrt: &str) -> Option<&Expr> {
        self.rules.get(&(name.to_string(), wrt.to_string()))
    }
}

/// A symbolic expression.
#[derive(Clone, PartialEq, Debug)]
pub enum Expr {
    Const(f64),
    Var(String),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Pow(Box<Expr>, Rational),
    Apply(Func, Box<Expr>),
}

impl Expr {
    pub fn c(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn zero() -> Expr {
        Expr::Const(0.0)
    }

    pub fn one() -> Expr {
        Expr::Const(1.0)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn sum(terms: impl IntoIterator<Item = Expr>) -> Expr {
        let mut flat = Vec::new();
        for t in terms {
            match t {
                Expr::Sum(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        let mut constant = 0.0;
        // like terms: (coefficient, rest)
        let mut merged: Vec<(f64, Expr)> = Vec::new();
        for t in flat {
            if let Expr::Const(v) = t {
                constant += v;
                continue;
            }
            let (k, rest) = t.split_coefficient();
            if let Some(slot) = merged.iter_mut().find(|(_, r)| *r == rest) {
                slot.0 += k;
            } else {
                merged.push((k, rest));
            }
        }
        let mut out: Vec<Expr> = merged
            .into_iter()
            .filter(|(k, _)| *k != 0.0)
            .map(|(k, rest)| Expr::scaled(k, rest))
            .collect();
        if constant != 0.0 {
            out.insert(0, Expr::Const(constant));
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::Sum(out),
        }
    }

    pub fn product(factors: impl IntoIterator<Item = Expr>) -> Expr {
        let mut flat = Vec::new();
        for f in factors {
            match f {
                Expr::Product(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        let mut constant = 1.0;
        let mut powers: Vec<(Expr, Rational)> = Vec::new();
        for f in flat {
            let (base, e) = match f {
                Expr::Const(v) => {
                    constant *= v;
                    continue;
                }
                Expr::Pow(b, e) => (*b, e),
                other => (other, Rational::ONE),
            };
            if let Some(slot) = powers.iter_mut().find(|(b, _)| *b == base) {
                slot.1 = slot.1 + e;
            } else {
                powers.push((base, e));
            }
        }
        if constant == 0.0 {
            return Expr::zero();
        }
        let mut out = Vec::new();
        for (b, e) in powers {
            match Expr::pow_of(b, e) {
                Expr::Const(v) => constant *= v,
                other => out.push(other),
            }
        }
        if constant != 1.0 || out.is_empty() {
            out.insert(0, Expr::Const(constant));
        }
        match out.len() {
            1 => out.pop().unwrap(),
            _ => Expr::Product(out),
        }
    }

    fn scaled(k: f64, rest: Expr) -> Expr {
        if k == 1.0 {
            rest
        } else {
            Expr::product([Expr::Const(k), rest])
        }
    }

    /// Split a term into its numeric coefficient and the remaining factor.
    fn split_coefficient(self) -> (f64, Expr) {
        match self {
            Expr::Const(v) => (v, Expr::one()),
            Expr::Product(mut fs) => {
                if let Some(Expr::Const(k)) = fs.first() {
                    let k = *k;
                    fs.remove(0);
                    let rest = if fs.len() == 1 {
                        fs.pop().unwrap()
                    } else {
                        Expr::Product(fs)
                    };
                    (k, rest)
                } else {
                    (1.0, Expr::Product(fs))
                }
            }
            other => (1.0, other),
        }
    }

    fn pow_of(base: Expr, e: Rational) -> Expr {
        if e.is_zero() {
            return Expr::one();
        }
        if e == Rational::ONE {
            return base;
        }
        match base {
            Expr::Const(v) => match real_pow(v, e) {
                Ok(r) => Expr::Const(r),
                Err(_) => Expr::Pow(Box::new(Expr::Const(v)), e),
            },
            // (b^a)^n = b^(a n) is exact under the real convention for integer n
            Expr::Pow(b, a) if e.is_integer() => Expr::pow_of(*b, a * e),
            Expr::Product(fs) if e.is_integer() => {
                Expr::product(fs.into_iter().map(|f| Expr::pow_of(f, e)))
            }
            other => Expr::Pow(Box::new(other), e),
        }
    }

    pub fn powr(self, e: Rational) -> Expr {
        Expr::pow_of(self, e)
    }

    pub fn powi(self, n: i64) -> Expr {
        Expr::pow_of(self, Rational::integer(n))
    }

    pub fn apply(f: Func, arg: Expr) -> Expr {
        if let Expr::Const(a) = arg {
            if let Ok(v) = f.apply(a) {
                return Expr::Const(v);
            }
        }
        Expr::Apply(f, Box::new(arg))
    }

    pub fn tanh(self) -> Expr {
        Expr::apply(Func::Tanh, self)
    }
    pub fn coth(self) -> Expr {
        Expr::apply(Func::Coth, self)
    }
    pub fn tan(self) -> Expr {
        Expr::apply(Func::Tan, self)
    }
    pub fn cot(self) -> Expr {
        Expr::apply(Func::Cot, self)
    }
    pub fn exp(self) -> Expr {
        Expr::apply(Func::Exp, self)
    }
    pub fn ln(self) -> Expr {
        Expr::apply(Func::Ln, self)
    }
    pub fn sqrt(self) -> Expr {
        Expr::apply(Func::Sqrt, self)
    }

    pub fn eval<B: Bindings + ?Sized>(&self, env: &B) -> Result<f64, EvalError> {
        match self {
            Expr::Const(v) => Ok(*v),
            Expr::Var(name) => env
                .lookup(name)
                .ok_or_else(|| EvalError::Unbound(name.clone())),
            Expr::Sum(ts) => {
                let mut acc = 0.0;
                for t in ts {
                    acc += t.eval(env)?;
                }
                finite(acc)
            }
            Expr::Product(fs) => {
                let mut acc = 1.0;
                for f in fs {
                    acc *= f.eval(env)?;
                }
                finite(acc)
            }
            Expr::Pow(b, e) => real_pow(b.eval(env)?, *e),
            Expr::Apply(f, a) => f.apply(a.eval(env)?),
        }
    }

    pub fn diff(&self, v: &str) -> Expr {
        self.diff_with(v, &DerivativeRules::default())
    }

    /// Differentiate, resolving opaque variables through `rules`.
    pub fn diff_with(&self, v: &str, rules: &DerivativeRules) -> Expr {
        match self {
            Expr::Const(_) => Expr::zero(),
            Expr::Var(name) => {
                if name == v {
                    Expr::one()
                } else if let Some(d) = rules.get(name, v) {
                    d.clone()
                } else {
                    Expr::zero()
                }
            }
            Expr::Sum(ts) => Expr::sum(ts.iter().map(|t| t.diff_with(v, rules))),
            Expr::Product(fs) => Expr::sum((0..fs.len()).map(|i| {
                let di = fs[i].diff_with(v, rules);
                if di.is_zero() {
                    return Expr::zero();
                }
                Expr::product(
                    fs.iter()
                        .enumerate()
                        .map(|(j, f)| if i == j { di.clone() } else { f.clone() }),
                )
            })),
            Expr::Pow(b, e) => {
                let db = b.diff_with(v, rules);
                if db.is_zero() {
                    return Expr::zero();
                }
                Expr::product([
                    Expr::Const(e.to_f64()),
                    Expr::pow_of((**b).clone(), *e - Rational::ONE),
                    db,
                ])
            }
            Expr::Apply(f, a) => {
                let da = a.diff_with(v, rules);
                if da.is_zero() {
                    return Expr::zero();
                }
                let same = Expr::Apply(*f, a.clone());
                let outer = match f {
                    Func::Tanh | Func::Coth => Expr::c(1.0) - same.powi(2),
                    Func::Tan => Expr::c(1.0) + same.powi(2),
                    Func::Cot => -(Expr::c(1.0) + same.powi(2)),
                    Func::Exp => same,
                    Func::Ln => (**a).clone().powi(-1),
                    Func::Sqrt => Expr::c(0.5) * (**a).clone().powr(Rational::frac(-1, 2)),
                };
                outer * da
            }
        }
    }

    /// Replace every occurrence of variable `name` by `with`.
    pub fn subst(&self, name: &str, with: &Expr) -> Expr {
        match self {
            Expr::Const(_) => self.clone(),
            Expr::Var(n) => {
                if n == name {
                    with.clone()
                } else {
                    self.clone()
                }
            }
            Expr::Sum(ts) => Expr::sum(ts.iter().map(|t| t.subst(name, with))),
            Expr::Product(fs) => Expr::product(fs.iter().map(|f| f.subst(name, with))),
            Expr::Pow(b, e) => Expr::pow_of(b.subst(name, with), *e),
            Expr::Apply(f, a) => Expr::apply(*f, a.subst(name, with)),
        }
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(n) => {
                out.insert(n.clone());
            }
            Expr::Sum(xs) | Expr::Product(xs) => xs.iter().for_each(|x| x.collect_vars(out)),
            Expr::Pow(b, _) => b.collect_vars(out),
            Expr::Apply(_, a) => a.collect_vars(out),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Sum(xs) | Expr::Product(xs) => 1 + xs.iter().map(Expr::size).sum::<usize>(),
            Expr::Pow(b, _) => 1 + b.size(),
            Expr::Apply(_, a) => 1 + a.size(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Sum(_) => 1,
            Expr::Product(_) => 2,
            Expr::Const(v) if *v < 0.0 => 2,
            Expr::Pow(..) => 3,
            _ => 4,
        }
    }
}

impl From<f64> for Expr {
    fn from(v: f64) -> Self {
        Expr::Const(v)
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::sum([self, rhs])
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sum([self, -rhs])
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::product([self, rhs])
    }
}

impl Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::product([self, rhs.powi(-1)])
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::product([Expr::Const(-1.0), self])
    }
}

struct Wrapped<'a>(&'a Expr, u8);

impl fmt::Display for Wrapped<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.precedence() < self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(v) => write!(f, "{v:?}"),
            Expr::Var(n) => f.write_str(n),
            Expr::Sum(ts) => {
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    write!(f, "{}", Wrapped(t, 2))?;
                }
                Ok(())
            }
            Expr::Product(fs) => {
                for (i, x) in fs.iter().enumerate() {
                    if i > 0 {
                        f.write_str("*")?;
                    }
                    write!(f, "{}", Wrapped(x, 3))?;
                }
                Ok(())
            }
            Expr::Pow(b, e) => {
                write!(f, "{}^", Wrapped(b, 4))?;
                if e.is_integer() && e.numer() >= 0 {
                    write!(f, "{e}")
                } else {
                    write!(f, "({e})")
                }
            }
            Expr::Apply(func, a) => write!(f, "{}({})", func.name(), a),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn x() -> Expr {
        Expr::var("x")
    }

    #[test]
    fn real_power_convention() {
        assert_relative_eq!(real_pow(-8.0, Rational::frac(2, 3)).unwrap(), 4.0, epsilon = 1e-14);
        assert_relative_eq!(real_pow(-8.0, Rational::frac(1, 3)).unwrap(), -2.0, epsilon = 1e-14);
        assert_relative_eq!(real_pow(-32.0, Rational::frac(3, 5)).unwrap(), -8.0, epsilon = 1e-12);
        assert_eq!(
            real_pow(-1.0, Rational::frac(1, 2)),
            Err(EvalError::EvenRootOfNegative)
        );
        assert_eq!(real_pow(0.0, Rational::frac(-2, 3)), Err(EvalError::DivisionByZero));
        assert_eq!(real_pow(0.0, Rational::frac(2, 3)), Ok(0.0));
    }

    #[test]
    fn eval_examples() {
        let e = Expr::Pow(Box::new(Expr::c(-8.0)), Rational::frac(2, 3));
        assert_relative_eq!(e.eval(&[]).unwrap(), 4.0, epsilon = 1e-14);
        assert_eq!(Expr::c(0.0).tanh().eval(&[]).unwrap(), 0.0);
        let sq = x().powr(Rational::frac(1, 2));
        assert_eq!(sq.eval(&[("x", -1.0)]), Err(EvalError::EvenRootOfNegative));
        assert_eq!(x().eval(&[("y", 1.0)]), Err(EvalError::Unbound("x".into())));
        assert_eq!(x().ln().eval(&[("x", 0.0)]), Err(EvalError::LogOfNonPositive));
        assert_eq!(x().coth().eval(&[("x", 0.0)]), Err(EvalError::DivisionByZero));
    }

    #[test]
    fn diff_power_rule_rational() {
        let z = Expr::var("zeta");
        let d = z.clone().powr(Rational::frac(-2, 3)).diff("zeta");
        let expect = Expr::c(-2.0 / 3.0) * z.powr(Rational::frac(-5, 3));
        assert_eq!(d, expect);
    }

    #[test]
    fn diff_tanh_chain() {
        let k = 1.7;
        let z = Expr::var("zeta");
        let d = (Expr::c(k) * z.clone()).tanh().diff("zeta");
        for zv in [-1.0, 0.0, 0.3, 2.0] {
            let th = libm::tanh(k * zv);
            assert_relative_eq!(
                d.eval(&[("zeta", zv)]).unwrap(),
                k * (1.0 - th * th),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn diff_opaque_gamma() {
        let rules = DerivativeRules::new().with("Gamma", "t", Expr::var("g1"));
        let e = Expr::var("Gamma").powr(Rational::frac(-1, 3));
        let d = e.diff_with("t", &rules);
        let expect =
            Expr::c(-1.0 / 3.0) * Expr::var("g1") * Expr::var("Gamma").powr(Rational::frac(-4, 3));
        for (g, g1) in [(0.5, 2.0), (3.0, -1.0)] {
            let env = [("Gamma", g), ("g1", g1)];
            assert_eq!(d.eval(&env).unwrap(), expect.eval(&env).unwrap());
        }
    }

    #[test]
    fn simplification_rules() {
        assert_eq!(x() - x(), Expr::zero());
        assert_eq!(x() * x(), x().powi(2));
        assert_eq!(x().powr(Rational::frac(1, 3)) * x().powr(Rational::frac(-1, 3)), Expr::one());
        assert_eq!(Expr::c(2.0) + x() + Expr::c(3.0), Expr::c(5.0) + x());
        assert_eq!(Expr::c(0.0) * x().tanh(), Expr::zero());
        assert_eq!(Expr::sum([x(), Expr::sum([x(), Expr::var("y")])]).size(), 5);
    }

    #[test]
    fn subst_and_vars() {
        let e = x().powi(2) + Expr::var("y").exp();
        let s = e.subst("x", &(Expr::var("t") + Expr::c(1.0)));
        let vars: Vec<_> = s.variables().into_iter().collect();
        assert_eq!(vars, ["t", "y"]);
        assert_relative_eq!(s.eval(&[("t", 1.0), ("y", 0.0)]).unwrap(), 5.0);
    }

    #[test]
    fn func_derivative_tables() {
        for f in Func::ALL {
            let a = 0.37;
            let ders = f.derivatives(a).unwrap();
            let mut e = Expr::apply(f, x());
            for d in ders {
                assert_relative_eq!(e.eval(&[("x", a)]).unwrap(), d, max_relative = 1e-12);
                e = e.diff("x");
            }
        }
    }
}
