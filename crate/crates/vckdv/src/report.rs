//! Serialized report shapes and the CSV grid dump.

use std::io::Write;

use serde::Serialize;
use vckdv_core::residual::{ResidualReport, TermBreakdown};
use vckdv_core::tanh::{AuditReport, SystemEntry};

/// Per-term values keyed by the term names of the equation.
#[derive(Clone, Copy, PartialEq, Debug, Serialize)]
pub struct Terms {
    pub u_t: f64,
    #[serde(rename = "g1*u_xxx")]
    pub dispersion: f64,
    #[serde(rename = "(g2 u^3 + g3 u^2 + g4 u + g5) u_x")]
    pub advection: f64,
    #[serde(rename = "g6*u")]
    pub linear: f64,
    #[serde(rename = "g7")]
    pub source: f64,
}

impl From<&TermBreakdown> for Terms {
    fn from(t: &TermBreakdown) -> Self {
        Terms {
            u_t: t.u_t,
            dispersion: t.dispersion,
            advection: t.advection,
            linear: t.linear,
            source: t.source,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Debug, Serialize)]
pub struct WorstPoint {
    pub x: f64,
    pub t: f64,
    pub u: f64,
    pub residual: f64,
    pub terms: Terms,
}

/// The published residual report: `max_abs`, `l2`, `n_points`,
/// `n_excluded`, `terms` (largest magnitude of each term) and `worst_point`.
#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct ResidualSummary {
    pub max_abs: f64,
    pub l2: f64,
    pub max_relative: f64,
    pub n_points: usize,
    pub n_excluded: usize,
    pub terms: Terms,
    pub worst_point: WorstPoint,
}

impl From<&ResidualReport> for ResidualSummary {
    fn from(r: &ResidualReport) -> Self {
        ResidualSummary {
            max_abs: r.max_abs,
            l2: r.l2,
            max_relative: r.max_relative,
            n_points: r.n_points,
            n_excluded: r.n_excluded,
            terms: Terms::from(&r.term_max),
            worst_point: WorstPoint {
                x: r.worst.x,
                t: r.worst.t,
                u: r.worst.u,
                residual: r.worst.residual,
                terms: Terms::from(&r.worst.terms),
            },
        }
    }
}

/// One row per evaluated grid point: `x,t,u,residual`.
pub fn write_csv<W: Write>(report: &ResidualReport, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "t", "u", "residual"])?;
    for p in &report.points {
        w.serialize((p.x, p.t, p.u, p.residual))?;
    }
    w.flush()?;
    Ok(())
}

/// The audit verdict without the full system, which is reported once.
#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct ClaimCheck {
    pub pass: bool,
    pub tolerance: f64,
    pub max_abs: f64,
    /// Every collected coefficient above the tolerance.
    pub violations: Vec<SystemEntry>,
}

impl From<&AuditReport> for ClaimCheck {
    fn from(a: &AuditReport) -> Self {
        ClaimCheck {
            pass: a.pass,
            tolerance: a.tolerance,
            max_abs: a.max_abs,
            violations: a.violations.clone(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Discrepancy,
    Failure,
}

impl Status {
    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Status::Pass
        } else {
            Status::Discrepancy
        }
    }

    pub fn exit_code(self) -> u8 {
        match self {
            Status::Pass => 0,
            Status::Discrepancy => 2,
            Status::Failure => 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use vckdv_core::residual::{pde_residual, ExprField, GridSpec};
    use vckdv_core::reduction::CoefficientFamily;
    use vckdv_core::Expr;

    fn report() -> ResidualReport {
        let g = [Expr::one(), Expr::zero(), Expr::zero(), Expr::zero(), Expr::one(), Expr::zero(), Expr::zero()];
        let fam = CoefficientFamily::custom(g);
        let u = ExprField::new(Expr::var("x") * Expr::var("t"));
        pde_residual(&u, &fam, &GridSpec::new((1.0, 2.0, 2), (0.0, 1.0, 3)), None).unwrap()
    }

    #[test]
    fn summary_has_the_published_keys() {
        let v = serde_json::to_value(ResidualSummary::from(&report())).unwrap();
        for key in ["max_abs", "l2", "n_points", "n_excluded", "terms", "worst_point"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert!(v["worst_point"].get("x").is_some() && v["worst_point"].get("t").is_some());
        assert_eq!(v["n_points"], 6);
    }

    #[test]
    fn csv_columns() {
        let mut buf = Vec::new();
        write_csv(&report(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,t,u,residual"));
        assert_eq!(lines.count(), 6);
    }
}
