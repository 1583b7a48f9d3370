//! Truncated Taylor jets in two directions, `x` (to third order) and `t` (first
//! order), with mixed terms discarded.
//!
//! The jet algebra is `R[dx, dt] / (dx^4, dx*dt, dt^2)`. That ideal is closed
//! under multiplication and under composition with smooth scalar functions, and
//! it is exactly what is needed for `u`, `u_x`, `u_xx`, `u_xxx` and `u_t`. Since
//! every nilpotent element `h` satisfies `h^4 = 0`, composing with a function
//! only needs its value and first three derivatives.

use core::ops::{Add, Mul, Neg, Sub};

use crate::expr::{real_pow, Bindings, EvalError, Expr, Func};

/// Taylor coefficients `[f, f_x, f_xx/2, f_xxx/6, f_t]`.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct Jet {
    c: [f64; 5],
}

impl Jet {
    pub const fn constant(v: f64) -> Jet {
        Jet {
            c: [v, 0.0, 0.0, 0.0, 0.0],
        }
    }

    /// The independent `x` variable at `v`.
    pub const fn var_x(v: f64) -> Jet {
        Jet {
            c: [v, 1.0, 0.0, 0.0, 0.0],
        }
    }

    /// The independent `t` variable at `v`.
    pub const fn var_t(v: f64) -> Jet {
        Jet {
            c: [v, 0.0, 0.0, 0.0, 1.0],
        }
    }

    /// Build from derivative values `f, f_x, f_xx, f_xxx, f_t`.
    pub fn from_derivatives(f: f64, fx: f64, fxx: f64, fxxx: f64, ft: f64) -> Jet {
        Jet {
            c: [f, fx, fxx / 2.0, fxxx / 6.0, ft],
        }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn dx(&self) -> f64 {
        self.c[1]
    }

    pub fn dxx(&self) -> f64 {
        2.0 * self.c[2]
    }

    pub fn dxxx(&self) -> f64 {
        6.0 * self.c[3]
    }

    pub fn dt(&self) -> f64 {
        self.c[4]
    }

    /// `∂ₓᵏ∂ₜʲ` for `k ≤ 3, j ≤ 1`; mixed orders are outside the algebra.
    pub fn derivative(&self, k: usize, j: usize) -> Option<f64> {
        match (k, j) {
            (0, 0) => Some(self.value()),
            (1, 0) => Some(self.dx()),
            (2, 0) => Some(self.dxx()),
            (3, 0) => Some(self.dxxx()),
            (0, 1) => Some(self.dt()),
            _ => None,
        }
    }

    pub fn coefficients(&self) -> [f64; 5] {
        self.c
    }

    pub fn coefficients_mut(&mut self) -> &mut [f64; 5] {
        &mut self.c
    }

    pub fn scale(self, k: f64) -> Jet {
        Jet {
            c: self.c.map(|v| v * k),
        }
    }

    /// `f(self)` given `[f, f', f'', f''']` at `self.value()`.
    pub fn compose(self, d: [f64; 4]) -> Jet {
        let mut h = self;
        h.c[0] = 0.0;
        let h2 = h * h;
        let h3 = h2 * h;
        let mut out = h.scale(d[1]) + h2.scale(d[2] / 2.0) + h3.scale(d[3] / 6.0);
        out.c[0] = d[0];
        out
    }

    pub fn apply(self, f: Func) -> Result<Jet, EvalError> {
        Ok(self.compose(f.derivatives(self.value())?))
    }

    /// Power under the real fractional-power convention.
    pub fn powr(self, e: crate::Rational) -> Result<Jet, EvalError> {
        if e.is_zero() {
            return Ok(Jet::constant(1.0));
        }
        let b = self.value();
        if b == 0.0 {
            // only smooth at 0 for non-negative integer exponents
            if e.is_integer() && e.numer() > 0 {
                let mut acc = Jet::constant(1.0);
                for _ in 0..e.numer() {
                    acc = acc * self;
                }
                return Ok(acc);
            }
            return Err(EvalError::DivisionByZero);
        }
        let f0 = real_pow(b, e)?;
        let p = e.to_f64();
        // d^n/db^n b^p = p (p-1) ... (p-n+1) b^p / b^n holds for both signs of b
        let f1 = p * f0 / b;
        let f2 = (p - 1.0) * f1 / b;
        let f3 = (p - 2.0) * f2 / b;
        Ok(self.compose([f0, f1, f2, f3]))
    }

    pub fn recip(self) -> Result<Jet, EvalError> {
        self.powr(crate::Rational::integer(-1))
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|v| v.is_finite())
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(rhs.c) {
            *a += b;
        }
        Jet { c }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self + (-rhs)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let [a0, a1, a2, a3, at] = self.c;
        let [b0, b1, b2, b3, bt] = rhs.c;
        Jet {
            c: [
                a0 * b0,
                a0 * b1 + a1 * b0,
                a0 * b2 + a1 * b1 + a2 * b0,
                a0 * b3 + a1 * b2 + a2 * b1 + a3 * b0,
                a0 * bt + at * b0,
            ],
        }
    }
}

/// Which variables of an expression are the jet directions.
#[derive(Clone, Copy, Debug)]
pub struct JetVars<'a> {
    pub x: &'a str,
    pub t: Option<&'a str>,
}

impl<'a> JetVars<'a> {
    pub const fn xt(x: &'a str, t: &'a str) -> Self {
        JetVars { x, t: Some(t) }
    }

    /// Univariate jets (third order) in `x` only.
    pub const fn only(x: &'a str) -> Self {
        JetVars { x, t: None }
    }
}

/// Propagate a jet through `e`. Variables named in `vars` are seeded as jet
/// directions at their bound value; the rest are constants from `env`.
pub fn jet_eval<B: Bindings + ?Sized>(e: &Expr, env: &B, vars: JetVars<'_>) -> Result<Jet, EvalError> {
    let out = match e {
        Expr::Const(v) => Jet::constant(*v),
        Expr::Var(name) => {
            let v = env
                .lookup(name)
                .ok_or_else(|| EvalError::Unbound(name.clone()))?;
            if name == vars.x {
                Jet::var_x(v)
            } else if Some(name.as_str()) == vars.t {
                Jet::var_t(v)
            } else {
                Jet::constant(v)
            }
        }
        Expr::Sum(ts) => {
            let mut acc = Jet::constant(0.0);
            for t in ts {
                acc = acc + jet_eval(t, env, vars)?;
            }
            acc
        }
        Expr::Product(fs) => {
            let mut acc = Jet::constant(1.0);
            for f in fs {
                acc = acc * jet_eval(f, env, vars)?;
            }
            acc
        }
        Expr::Pow(b, p) => jet_eval(b, env, vars)?.powr(*p)?,
        Expr::Apply(f, a) => jet_eval(a, env, vars)?.apply(*f)?,
    };
    if out.is_finite() {
        Ok(out)
    } else {
        Err(EvalError::NotFinite)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use approx::assert_relative_eq;

    #[test]
    fn cube_at_two() {
        let e = Expr::var("x").powi(3);
        let j = jet_eval(&e, &[("x", 2.0)], JetVars::only("x")).unwrap();
        assert_eq!((j.value(), j.dx(), j.dxx(), j.dxxx()), (8.0, 12.0, 12.0, 6.0));
    }

    #[test]
    fn tanh_at_zero() {
        let j = Jet::var_x(0.0).apply(Func::Tanh).unwrap();
        assert_eq!(j.value(), 0.0);
        assert_relative_eq!(j.dx(), 1.0);
        assert_relative_eq!(j.dxx(), 0.0);
        assert_relative_eq!(j.dxxx(), -2.0);
    }

    #[test]
    fn product_rule_in_t() {
        // x^2 t^3 at (x,t) = (1.5, 2): d/dt = 3 x^2 t^2
        let e = Expr::var("x").powi(2) * Expr::var("t").powi(3);
        let j = jet_eval(&e, &[("x", 1.5), ("t", 2.0)], JetVars::xt("x", "t")).unwrap();
        assert_relative_eq!(j.dt(), 3.0 * 2.25 * 4.0);
        assert_relative_eq!(j.dxxx(), 0.0);
        assert_relative_eq!(j.dxx(), 2.0 * 8.0);
    }

    #[test]
    fn negative_base_cube_root_power() {
        // (x)^(2/3) at x = -2: derivatives of |x|^(2/3)
        let j = Jet::var_x(-2.0).powr(Rational::frac(2, 3)).unwrap();
        let f0 = libm::cbrt(4.0);
        assert_relative_eq!(j.value(), f0, epsilon = 1e-14);
        assert_relative_eq!(j.dx(), (2.0 / 3.0) * f0 / -2.0, epsilon = 1e-14);
        assert!(Jet::var_x(0.0).powr(Rational::frac(2, 3)).is_err());
        assert!(Jet::var_x(-1.0).powr(Rational::frac(1, 2)).is_err());
    }

    #[test]
    fn accessors_and_mixed_orders() {
        let j = Jet::from_derivatives(1.0, 2.0, 3.0, 4.0, 5.0);
        assert_eq!(j.derivative(2, 0), Some(3.0));
        assert_eq!(j.derivative(3, 0), Some(4.0));
        assert_eq!(j.derivative(0, 1), Some(5.0));
        assert_eq!(j.derivative(1, 1), None);
    }
}
