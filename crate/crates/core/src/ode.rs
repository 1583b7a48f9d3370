//! Dormand–Prince 5(4) integration of the reduced ODEs as first-order systems
//! `(F, F', F'')`, with the fourth-order continuous extension for dense output.

use alloc::vec::Vec;
use core::fmt;

use crate::expr::EvalError;
use crate::reduction::{Profile, ReducedOde};

type State = [f64; 3];

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

#[derive(Clone, Copy, PartialEq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Take uniform steps of this size with no error control.
    pub fixed_step: Option<f64>,
    /// States larger than this in magnitude are treated as a blow-up.
    pub blowup: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-10,
            max_steps: 200_000,
            fixed_step: None,
            blowup: 1e12,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Debug)]
pub enum OdeError {
    /// Step size underflow or blow-up near `zeta`.
    Singularity { zeta: f64 },
    TooManySteps { zeta: f64 },
    OutOfRange { zeta: f64 },
    EmptyInterval,
}

impl fmt::Display for OdeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OdeError::Singularity { zeta } => write!(f, "singularity encountered at zeta* = {zeta}"),
            OdeError::TooManySteps { zeta } => write!(f, "step budget exhausted at zeta = {zeta}"),
            OdeError::OutOfRange { zeta } => write!(f, "zeta = {zeta} is outside the integrated interval"),
            OdeError::EmptyInterval => f.write_str("empty integration interval"),
        }
    }
}

impl core::error::Error for OdeError {}

#[derive(Clone, Copy, PartialEq, Debug)]
struct Segment {
    z0: f64,
    h: f64,
    rc: [State; 5],
}

impl Segment {
    fn eval(&self, z: f64) -> State {
        let th = (z - self.z0) / self.h;
        let th1 = 1.0 - th;
        let mut out = [0.0; 3];
        for (i, o) in out.iter_mut().enumerate() {
            let r = |k: usize| self.rc[k][i];
            *o = r(0) + th * (r(1) + th1 * (r(2) + th * (r(3) + th1 * r(4))));
        }
        out
    }
}

/// Dense numeric solution on `[start, end]` (either orientation).
#[derive(Clone, PartialEq, Debug)]
pub struct OdeSolution {
    pub ode: ReducedOde,
    pub start: f64,
    pub end: f64,
    pub accepted: usize,
    pub rejected: usize,
    segments: Vec<Segment>,
}

impl OdeSolution {
    fn contains(&self, z: f64) -> bool {
        let (lo, hi) = if self.start <= self.end {
            (self.start, self.end)
        } else {
            (self.end, self.start)
        };
        z >= lo && z <= hi
    }

    /// `(F, F', F'')` at `z`.
    pub fn state(&self, z: f64) -> Result<[f64; 3], OdeError> {
        if !self.contains(z) {
            return Err(OdeError::OutOfRange { zeta: z });
        }
        let forward = self.end >= self.start;
        // segments are ordered along the direction of integration
        let idx = self.segments.partition_point(|s| {
            let seg_end = s.z0 + s.h;
            if forward {
                seg_end < z
            } else {
                seg_end > z
            }
        });
        let seg = self.segments[idx.min(self.segments.len() - 1)];
        Ok(seg.eval(z))
    }

    /// Grid points where accepted steps ended.
    pub fn mesh(&self) -> impl Iterator<Item = f64> + '_ {
        self.segments.iter().map(|s| s.z0 + s.h)
    }
}

impl Profile for OdeSolution {
    fn derivatives(&self, zeta: f64) -> Result<[f64; 4], EvalError> {
        let [f, f1, f2] = self.state(zeta).map_err(|_| EvalError::NotFinite)?;
        Ok([f, f1, f2, self.ode.third_derivative(zeta, f, f1, f2)])
    }
}

fn rhs(ode: &ReducedOde, z: f64, y: &State) -> State {
    [y[1], y[2], ode.third_derivative(z, y[0], y[1], y[2])]
}

fn finite(y: &State) -> bool {
    y.iter().all(|v| v.is_finite())
}

struct Step {
    y1: State,
    k: [State; 7],
    err: f64,
}

fn try_step(ode: &ReducedOde, z: f64, y: &State, h: f64, k1: State, opts: &OdeOptions) -> Step {
    let mut k = [[0.0; 3]; 7];
    k[0] = k1;
    for s in 1..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s][j];
            if a != 0.0 {
                for i in 0..3 {
                    ys[i] += h * a * kj[i];
                }
            }
        }
        k[s] = rhs(ode, z + C[s] * h, &ys);
    }
    let mut y1 = *y;
    for i in 0..3 {
        y1[i] += h * (0..6).map(|j| A[6][j] * k[j][i]).sum::<f64>();
    }
    let mut acc = 0.0;
    for i in 0..3 {
        let e = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
        let sc = opts.atol + opts.rtol * libm::fabs(y[i]).max(libm::fabs(y1[i]));
        acc += (e / sc) * (e / sc);
    }
    Step {
        y1,
        k,
        err: libm::sqrt(acc / 3.0),
    }
}

fn segment(z: f64, h: f64, y0: &State, st: &Step) -> Segment {
    let mut rc = [[0.0; 3]; 5];
    for i in 0..3 {
        let ydiff = st.y1[i] - y0[i];
        let bspl = h * st.k[0][i] - ydiff;
        rc[0][i] = y0[i];
        rc[1][i] = ydiff;
        rc[2][i] = bspl;
        rc[3][i] = ydiff - h * st.k[6][i] - bspl;
        rc[4][i] = h * (0..7).map(|j| D[j] * st.k[j][i]).sum::<f64>();
    }
    Segment { z0: z, h, rc }
}

/// Integrate from `(F, F', F'')(z0) = init` to `z1`.
pub fn ode_integrate(ode: &ReducedOde, init: [f64; 3], z0: f64, z1: f64, opts: &OdeOptions) -> Result<OdeSolution, OdeError> {
    let span = z1 - z0;
    if span == 0.0 || !span.is_finite() {
        return Err(OdeError::EmptyInterval);
    }
    let dir = span.signum();
    let mut z = z0;
    let mut y = init;
    let mut k1 = rhs(ode, z, &y);
    let mut h = match opts.fixed_step {
        Some(s) => dir * libm::fabs(s),
        None => dir * libm::fabs(span).min(1e-2),
    };
    let mut segments = Vec::new();
    let mut rejected = 0;
    let mut accepted = 0;
    while dir * (z1 - z) > 0.0 {
        if accepted + rejected >= opts.max_steps {
            return Err(OdeError::TooManySteps { zeta: z });
        }
        let last = dir * (z + h - z1) >= 0.0;
        if last {
            h = z1 - z;
        }
        if libm::fabs(h) < 1e-13 * libm::fabs(z).max(1.0) && !last {
            return Err(OdeError::Singularity { zeta: z });
        }
        let st = try_step(ode, z, &y, h, k1, opts);
        let ok_values = finite(&st.y1) && st.k.iter().all(finite);
        if opts.fixed_step.is_some() {
            if !ok_values {
                return Err(OdeError::Singularity { zeta: z });
            }
        } else if !ok_values || !(st.err <= 1.0) {
            rejected += 1;
            let fac = if ok_values && st.err.is_finite() {
                (0.9 * libm::pow(st.err, -0.2)).clamp(0.2, 1.0)
            } else {
                0.25
            };
            h *= fac;
            continue;
        }
        segments.push(segment(z, h, &y, &st));
        accepted += 1;
        let znew = if last { z1 } else { z + h };
        y = st.y1;
        k1 = st.k[6];
        z = znew;
        if y.iter().any(|v| libm::fabs(*v) > opts.blowup) {
            return Err(OdeError::Singularity { zeta: z });
        }
        if opts.fixed_step.is_none() {
            let fac = if st.err == 0.0 {
                5.0
            } else {
                (0.9 * libm::pow(st.err, -0.2)).clamp(0.2, 5.0)
            };
            h *= fac;
        }
    }
    Ok(OdeSolution {
        ode: *ode,
        start: z0,
        end: z1,
        accepted,
        rejected,
        segments,
    })
}
