//! The time reparametrization `Γ(t)` with `Γ'(t) = g₁(t)`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::expr::Expr;

/// Closed-form families for `Γ`.
#[derive(Clone, Copy, PartialEq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "lowercase"))]
pub enum GammaFamily {
    /// `Γ = alpha t + beta`
    Linear { alpha: f64, beta: f64 },
    /// `Γ = alpha exp(lambda t)`
    Exponential { alpha: f64, lambda: f64 },
    /// `Γ = alpha t^p`, written `alpha exp(p ln t)` so `p` may be any real.
    Power { alpha: f64, p: f64 },
}

#[derive(Clone, PartialEq, Debug)]
pub enum GammaError {
    Descriptor(String),
    NotPositive { t: f64, value: f64 },
    DegenerateDerivative { t: f64 },
}

impl fmt::Display for GammaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GammaError::Descriptor(m) => write!(f, "bad gamma descriptor: {m}"),
            GammaError::NotPositive { t, value } => {
                write!(f, "Gamma({t}) = {value} is not positive")
            }
            GammaError::DegenerateDerivative { t } => write!(f, "Gamma'({t}) vanishes"),
        }
    }
}

impl core::error::Error for GammaError {}

impl GammaFamily {
    pub const IDENTITY: GammaFamily = GammaFamily::Linear { alpha: 1.0, beta: 0.0 };
    pub const EXP: GammaFamily = GammaFamily::Exponential { alpha: 1.0, lambda: 1.0 };

    pub fn from_kind(kind: &str, params: &[f64]) -> Result<GammaFamily, GammaError> {
        let need = |n: usize| {
            if params.len() == n {
                Ok(())
            } else {
                Err(GammaError::Descriptor(format!(
                    "`{kind}` takes {n} parameters, got {}",
                    params.len()
                )))
            }
        };
        match kind {
            "linear" => need(2).map(|_| GammaFamily::Linear { alpha: params[0], beta: params[1] }),
            "exponential" | "exp" => need(2).map(|_| GammaFamily::Exponential {
                alpha: params[0],
                lambda: params[1],
            }),
            "power" => need(2).map(|_| GammaFamily::Power { alpha: params[0], p: params[1] }),
            other => Err(GammaError::Descriptor(format!("unknown kind `{other}`"))),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            GammaFamily::Linear { .. } => "linear",
            GammaFamily::Exponential { .. } => "exponential",
            GammaFamily::Power { .. } => "power",
        }
    }

    pub fn params(&self) -> [f64; 2] {
        match *self {
            GammaFamily::Linear { alpha, beta } => [alpha, beta],
            GammaFamily::Exponential { alpha, lambda } => [alpha, lambda],
            GammaFamily::Power { alpha, p } => [alpha, p],
        }
    }

    /// `Γ` as an expression in `t`.
    pub fn gamma(&self) -> Expr {
        let t = Expr::var("t");
        match *self {
            GammaFamily::Linear { alpha, beta } => Expr::c(alpha) * t + Expr::c(beta),
            GammaFamily::Exponential { alpha, lambda } => Expr::c(alpha) * (Expr::c(lambda) * t).exp(),
            GammaFamily::Power { alpha, p } => Expr::c(alpha) * (Expr::c(p) * t.ln()).exp(),
        }
    }

    /// `g₁ = Γ'`, the symbolic derivative of [`Self::gamma`].
    pub fn g1(&self) -> Expr {
        self.gamma().diff("t")
    }

    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            GammaFamily::Linear { alpha, beta } => alpha * t + beta,
            GammaFamily::Exponential { alpha, lambda } => alpha * libm::exp(lambda * t),
            GammaFamily::Power { alpha, p } => alpha * libm::pow(t, p),
        }
    }

    pub fn eval_derivative(&self, t: f64) -> f64 {
        match *self {
            GammaFamily::Linear { alpha, .. } => alpha,
            GammaFamily::Exponential { alpha, lambda } => alpha * lambda * libm::exp(lambda * t),
            GammaFamily::Power { alpha, p } => alpha * p * libm::pow(t, p - 1.0),
        }
    }

    /// Check `Γ > 0` and `Γ' ≠ 0` at 65 evenly spaced points of `[t0, t1]`.
    pub fn validate(&self, t0: f64, t1: f64) -> Result<(), GammaError> {
        for i in 0..=64 {
            let t = t0 + (t1 - t0) * i as f64 / 64.0;
            if matches!(self, GammaFamily::Power { .. }) && t <= 0.0 {
                return Err(GammaError::NotPositive { t, value: f64::NAN });
            }
            let g = self.eval(t);
            if !(g > 0.0) {
                return Err(GammaError::NotPositive { t, value: g });
            }
            if self.eval_derivative(t) == 0.0 {
                return Err(GammaError::DegenerateDerivative { t });
            }
        }
        Ok(())
    }
}

impl fmt::Display for GammaFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b] = self.params();
        write!(f, "{}:{a},{b}", self.kind())
    }
}

/// Parses `kind:p1,p2`, e.g. `linear:1,0` or `exponential:1,1`.
impl FromStr for GammaFamily {
    type Err = GammaError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| GammaError::Descriptor(format!("expected `kind:params`, got `{s}`")))?;
        let params = rest
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| GammaError::Descriptor(format!("bad number `{p}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        GammaFamily::from_kind(kind.trim(), &params)
    }
}
