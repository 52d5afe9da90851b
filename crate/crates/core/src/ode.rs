//! Dormand–Prince 5(4) integrator for small fixed-size systems.
//!
//! Integrates one smooth segment at a time; callers with discontinuous
//! right-hand sides split the horizon at the discontinuities. Requested
//! sample times are hit exactly by shortening the step that would cross
//! them. Accepted steps are kept for cubic Hermite dense output.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        OdeOptions {
            rtol: tol,
            atol: tol,
            ..Default::default()
        }
    }
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-10,
            max_steps: 1_000_000,
        }
    }
}

/// Accepted steps `(t, y, y')`, in increasing `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution<const N: usize> {
    pub t: Vec<f64>,
    pub y: Vec<[f64; N]>,
    pub dy: Vec<[f64; N]>,
    pub rejected: usize,
}

impl<const N: usize> Solution<N> {
    fn new() -> Self {
        Solution {
            t: Vec::new(),
            y: Vec::new(),
            dy: Vec::new(),
            rejected: 0,
        }
    }

    fn push(&mut self, t: f64, y: [f64; N], dy: [f64; N]) {
        self.t.push(t);
        self.y.push(y);
        self.dy.push(dy);
    }

    pub fn last(&self) -> Option<(f64, [f64; N])> {
        Some((*self.t.last()?, *self.y.last()?))
    }

    /// Appends another segment that starts where this one ends.
    pub fn extend(&mut self, other: Solution<N>) {
        let skip = usize::from(!self.t.is_empty() && other.t.first() == self.t.last());
        self.t.extend_from_slice(&other.t[skip..]);
        self.y.extend_from_slice(&other.y[skip..]);
        self.dy.extend_from_slice(&other.dy[skip..]);
        self.rejected += other.rejected;
    }

    /// Cubic Hermite interpolant through the accepted steps. Returns `None`
    /// outside the integrated range.
    pub fn dense(&self, t: f64) -> Option<[f64; N]> {
        let first = *self.t.first()?;
        let last = *self.t.last()?;
        if t < first || t > last {
            return None;
        }
        let i = match self.t.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(i) => return Some(self.y[i]),
            Err(i) => i - 1,
        };
        let (t0, t1) = (self.t[i], self.t[i + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        let mut out = [0.0; N];
        for (j, o) in out.iter_mut().enumerate() {
            *o = h00 * self.y[i][j]
                + h * h10 * self.dy[i][j]
                + h01 * self.y[i + 1][j]
                + h * h11 * self.dy[i + 1][j];
        }
        Some(out)
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth- minus fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combine<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (w, k) in terms {
        for j in 0..N {
            out[j] += h * w * k[j];
        }
    }
    out
}

/// Integrates `y' = f(t, y)` from `(t0, y0)` to `t1`, landing exactly on
/// every time in `stops` that lies in `(t0, t1)`.
pub fn integrate<const N: usize, F>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    stops: &[f64],
    opts: &OdeOptions,
) -> Result<Solution<N>>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let mut sol = Solution::new();
    let mut k1 = f(t0, &y0)?;
    sol.push(t0, y0, k1);
    if t1 <= t0 {
        return Ok(sol);
    }
    let mut targets: Vec<f64> = stops
        .iter()
        .copied()
        .filter(|&s| s > t0 && s < t1)
        .collect();
    targets.sort_by(f64::total_cmp);
    targets.dedup();
    targets.push(t1);
    let mut next_target = 0;

    let norm = |v: &[f64; N], scale: &[f64; N]| -> f64 {
        (v.iter()
            .zip(scale)
            .map(|(x, s)| (x / s).powi(2))
            .sum::<f64>()
            / N as f64)
            .sqrt()
    };
    let (mut t, mut y) = (t0, y0);
    let mut h = {
        let scale = y.map(|v| opts.atol + opts.rtol * v.abs());
        let d0 = norm(&y, &scale);
        let d1 = norm(&k1, &scale);
        let guess = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        guess.min(t1 - t0)
    };

    for _ in 0..opts.max_steps {
        let target = targets[next_target];
        let h_min = 1e-14 * t.abs().max(1e-3);
        if h < h_min {
            return Err(Error::StepUnderflow { t, h });
        }
        let landing = t + h >= target - 1e-15 * target.abs().max(1.0);
        let step = if landing { target - t } else { h };

        let k2 = f(t + C2 * step, &combine(&y, step, &[(A21, &k1)]))?;
        let k3 = f(t + C3 * step, &combine(&y, step, &[(A31, &k1), (A32, &k2)]))?;
        let k4 = f(
            t + C4 * step,
            &combine(&y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        )?;
        let k5 = f(
            t + C5 * step,
            &combine(&y, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        )?;
        let k6 = f(
            t + step,
            &combine(
                &y,
                step,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        )?;
        let y_new = combine(
            &y,
            step,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
        );
        let t_new = if landing { target } else { t + step };
        let k7 = f(t_new, &y_new)?;
        let err_vec = combine(
            &[0.0; N],
            step,
            &[
                (E1, &k1),
                (E3, &k3),
                (E4, &k4),
                (E5, &k5),
                (E6, &k6),
                (E7, &k7),
            ],
        );
        let mut scale = [0.0; N];
        for j in 0..N {
            scale[j] = opts.atol + opts.rtol * y[j].abs().max(y_new[j].abs());
        }
        let err = norm(&err_vec, &scale);
        if !err.is_finite() {
            sol.rejected += 1;
            h = step * 0.2;
            continue;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        if err <= 1.0 {
            t = t_new;
            y = y_new;
            k1 = k7;
            sol.push(t, y, k1);
            if landing {
                if next_target + 1 == targets.len() {
                    return Ok(sol);
                }
                next_target += 1;
                // keep the pre-landing step size; landing steps are often short
                h = h.max(step * factor);
            } else {
                h = step * factor;
            }
        } else {
            sol.rejected += 1;
            h = step * factor.min(1.0);
        }
    }
    Err(Error::MaxIterations {
        iterations: opts.max_steps,
        last_x: t,
    })
}
