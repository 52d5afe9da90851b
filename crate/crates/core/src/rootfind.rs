//! Bracketed scalar root finding, golden-section maximization, and the
//! optimal constant displacements of the improved Kennedy and simplified
//! Dolinar receivers.
//!
//! The displacement solvers maximize the correct-decision probability
//! directly (grid scan followed by golden section) and then polish the
//! maximizer with a bracketed root of the stationarity condition. The
//! stationarity residual is returned as a certificate; it is never used to
//! pick between stationary points.

use crate::error::{Error, Result};
use crate::statemath::{improved_kennedy_pc, simplified_dolinar_pc, Priors};

/// Interval with known endpoint values. In root mode `f_lo · f_hi <= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

impl Bracket {
    /// Evaluates `f` at both ends and checks for a sign change.
    pub fn new<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::InvalidArgument(format!(
                "bracket [{lo}, {hi}] is empty"
            )));
        }
        let b = Bracket {
            lo,
            hi,
            f_lo: f(lo),
            f_hi: f(hi),
        };
        if !b.has_sign_change() {
            return Err(Error::NoSignChange {
                lo,
                hi,
                f_lo: b.f_lo,
                f_hi: b.f_hi,
            });
        }
        Ok(b)
    }

    pub fn has_sign_change(&self) -> bool {
        self.f_lo.signum() * self.f_hi.signum() <= 0.0 && !self.f_lo.is_nan() && !self.f_hi.is_nan()
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Stopping rule for [`solve_bracketed`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootTolerance {
    pub x: f64,
    pub f: f64,
    pub max_iter: usize,
}

impl Default for RootTolerance {
    fn default() -> Self {
        RootTolerance {
            x: 1e-15,
            f: 0.0,
            max_iter: 200,
        }
    }
}

/// Brent's method: inverse quadratic / secant steps guarded by bisection.
///
/// Stops when `|f(x)| <= tol.f` or the bracket is narrower than `tol.x`
/// (plus a few ulps of `x`). The returned point always lies in
/// `[bracket.lo, bracket.hi]`.
pub fn solve_bracketed<F: Fn(f64) -> f64>(
    f: F,
    bracket: Bracket,
    tol: RootTolerance,
) -> Result<f64> {
    if !bracket.has_sign_change() {
        return Err(Error::NoSignChange {
            lo: bracket.lo,
            hi: bracket.hi,
            f_lo: bracket.f_lo,
            f_hi: bracket.f_hi,
        });
    }
    let (mut a, mut b) = (bracket.lo, bracket.hi);
    let (mut fa, mut fb) = (bracket.f_lo, bracket.f_hi);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;

    for _ in 0..tol.max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol.x;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb.abs() <= tol.f || fb == 0.0 {
            return Ok(b.clamp(bracket.lo, bracket.hi));
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    Err(Error::MaxIterations {
        iterations: tol.max_iter,
        last_x: b,
    })
}

/// Golden-section search for a maximum of a unimodal `f` on `[lo, hi]`.
pub fn maximize_golden<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol_x: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > tol_x {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Optimal displacement of a constant-displacement receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Displacement {
    pub beta: f64,
    /// Correct-decision probability at `beta`.
    pub pc: f64,
    /// Stationarity residual at `beta`.
    pub residual: f64,
}

impl Displacement {
    pub fn intensity(&self) -> f64 {
        self.beta * self.beta
    }
}

const SCAN_POINTS: usize = 512;
const MAX_DOUBLINGS: usize = 64;

/// Stationarity condition of the improved Kennedy receiver,
/// `q0/q1 = (β+γ)/(β−γ) · e^{−4βγ}`, multiplied through by `q1 (β−γ)`:
/// `q0 (β−γ) − q1 (β+γ) e^{−4βγ}`. Negative where the success probability
/// increases with `β`.
pub fn ik_residual(priors: Priors, gamma: f64, beta: f64) -> f64 {
    priors.q0() * (beta - gamma) - priors.q1() * (beta + gamma) * (-4.0 * beta * gamma).exp()
}

/// Stationarity condition of the simplified Dolinar receiver, as
/// `lhs − rhs` of
/// `βT(ψ²+β²)[(2q0−1)(ψ²+β²) − 2ψβ] e^{−(ψ²+β²)T} = ψ(ψ²−β²) sinh((ψ²+β²)T)`.
/// Negative where the success probability increases with `β`.
pub fn sd_residual(priors: Priors, psi: f64, beta: f64, duration: f64) -> f64 {
    let s = psi * psi + beta * beta;
    let st = s * duration;
    beta * duration * s * ((2.0 * priors.q0() - 1.0) * s - 2.0 * psi * beta) * (-st).exp()
        - psi * (psi * psi - beta * beta) * st.sinh()
}

/// `sd_residual · e^{−(ψ²+β²)T}`: same sign, bounded for large `β`.
fn sd_residual_scaled(priors: Priors, psi: f64, beta: f64, duration: f64) -> f64 {
    let s = psi * psi + beta * beta;
    let st = s * duration;
    beta * duration * s * ((2.0 * priors.q0() - 1.0) * s - 2.0 * psi * beta) * (-2.0 * st).exp()
        + 0.5 * psi * (psi * psi - beta * beta) * (-2.0 * st).exp_m1()
}

/// Grows `hi` (doubling its distance from `anchor`) until `g(hi) > 0`.
fn expand_upper<G: Fn(f64) -> f64>(g: G, anchor: f64, first: f64, cap: f64) -> Result<f64> {
    let mut step = first;
    for _ in 0..MAX_DOUBLINGS {
        let hi = (anchor + step).min(cap);
        if g(hi) > 0.0 {
            return Ok(hi);
        }
        if hi >= cap {
            break;
        }
        step *= 2.0;
    }
    Err(Error::BracketNotFound {
        lo: anchor,
        hi: cap,
    })
}

/// Maximizes `objective` on `[lo, hi]` and polishes with a root of the
/// stationarity function `g` (negative while `objective` increases).
fn maximize_then_polish<P, G>(objective: P, g: G, lo: f64, hi: f64) -> Result<f64>
where
    P: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let step = (hi - lo) / SCAN_POINTS as f64;
    let grid = |i: usize| lo + step * i as f64;
    let best = (0..=SCAN_POINTS)
        .map(|i| (i, objective(grid(i))))
        .fold(
            (0, f64::NEG_INFINITY),
            |acc, x| if x.1 > acc.1 { x } else { acc },
        )
        .0;
    let a = grid(best.saturating_sub(1));
    let b = grid((best + 1).min(SCAN_POINTS));
    let (golden, golden_val) = maximize_golden(&objective, a, b, 1e-12 * (1.0 + b.abs()));

    let polished =
        Bracket::new(&g, a, b).and_then(|br| solve_bracketed(&g, br, RootTolerance::default()));
    Ok(match polished {
        Ok(root) if objective(root) >= golden_val - 1e-15 => root,
        _ => golden,
    })
}

/// Displacement `β₀ > γ` maximizing the improved Kennedy success probability.
pub fn optimal_beta_ik(priors: Priors, gamma: f64) -> Result<Displacement> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::domain("gamma", gamma, "(0, inf)"));
    }
    if !priors.is_canonical() {
        return Err(Error::domain("q0", priors.q0(), "[1/2, 1] (q0 >= q1)"));
    }
    let pc = |b: f64| improved_kennedy_pc(priors, gamma, b);
    let g = |b: f64| ik_residual(priors, gamma, b);
    if priors.q1() == 0.0 {
        return Ok(Displacement {
            beta: gamma,
            pc: pc(gamma),
            residual: g(gamma),
        });
    }
    let lo = gamma * (1.0 + 1e-9);
    let hi = expand_upper(g, gamma, 1.0, gamma + 1e3)?;
    let beta = maximize_then_polish(pc, g, lo, hi)?;
    Ok(Displacement {
        beta,
        pc: pc(beta),
        residual: g(beta),
    })
}

/// Constant feedback amplitude `β > 0` maximizing the simplified Dolinar
/// success probability over a pulse of length `duration`.
pub fn optimal_beta_sd(priors: Priors, psi: f64, duration: f64) -> Result<Displacement> {
    if !(psi > 0.0 && psi.is_finite()) {
        return Err(Error::domain("psi", psi, "(0, inf)"));
    }
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::domain("duration", duration, "(0, inf)"));
    }
    if !priors.is_canonical() {
        return Err(Error::domain("q0", priors.q0(), "[1/2, 1] (q0 >= q1)"));
    }
    let pc = |b: f64| simplified_dolinar_pc(priors, psi, b, duration);
    let g = |b: f64| sd_residual_scaled(priors, psi, b, duration);
    let lo = psi * 1e-9;
    // weak pulses keep an O(1/√T) optimum, so the cap cannot scale with ψ alone
    let cap = 1e3 * psi.max(duration.sqrt().recip());
    let first_positive = expand_upper(g, 0.0, psi, cap)?;
    // scan past the first sign change in case a later stationary point wins
    let hi = (2.0 * first_positive).min(cap);
    let mut beta = maximize_then_polish(pc, g, lo, hi)?;
    // β = ψ reproduces the Kennedy receiver
    if pc(psi) > pc(beta) {
        beta = psi;
    }
    Ok(Displacement {
        beta,
        pc: pc(beta),
        residual: sd_residual(priors, psi, beta, duration),
    })
}
