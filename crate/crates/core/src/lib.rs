//! Symbolic-numeric toolkit for the symmetry reductions and exact solutions of
//! the generalized variable-coefficient KdV equation
//!
//! ```text
//! u_t + g1 u_xxx + (g2 u^3 + g3 u^2 + g4 u + g5) u_x + g6 u + g7 = 0
//! ```
//!
//! with coefficients `g1 … g7` depending on `t` only.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod expr;
pub mod gamma;
pub mod jet;
pub mod lie;
pub mod linalg;
pub mod newton;
pub mod ode;
pub mod phi;
pub mod rational;
pub mod reduction;
pub mod residual;
pub mod solutions;
pub mod tanh;

pub use expr::{parse, EvalError, Expr, Func};
pub use gamma::GammaFamily;
pub use jet::{jet_eval, Jet, JetVars};
pub use rational::Rational;
