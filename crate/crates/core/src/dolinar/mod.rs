//! Continuous-time feedback receiver for `|±γ>` coherent states.
//!
//! The receiver subtracts a local field `u_z(t)` from the incoming envelope
//! `±ψ` and counts photons; every click toggles the provisional decision `z`.
//! Feedback is symmetric, `u_1(t) = −u_0(t)`, except in
//! [`evolve_pc_asymmetric`]. Conditioned on the symbol, `z(t)` is a telegraph
//! process whose two toggle rates are
//!
//! ```text
//! λ(t) = |ψ − u_0(t)|²   (leaving the correct decision)
//! μ(t) = |ψ + u_0(t)|²   (returning to it)
//! ```
//!
//! and the probability of a correct provisional decision obeys
//! `P' = μ − (λ + μ) P`.

mod evolve;
mod segmented;
mod telegraph;

pub use evolve::{evolve_pc, evolve_pc_asymmetric, Evolution, EvolveOptions};
pub use segmented::{segmented_pc, segmented_pc_with, SlotSample};
pub use telegraph::{
    simulate_telegraph, simulate_trial, TelegraphOptions, TelegraphResult, TelegraphTrajectory,
    DEFAULT_MAX_RATE,
};

use crate::error::{Error, Result};
use crate::statemath::{helstrom_bound, Priors};

/// Default time floor for the optimal law, as a fraction of the pulse length.
pub const DEFAULT_FLOOR_FRACTION: f64 = 1e-9;

/// Envelope `u_0(t)` of the local field while the provisional decision is 0.
#[derive(Debug, Clone, PartialEq)]
pub enum ControlLaw {
    /// `ψ / R(t)` evaluated at `max(t, t_floor)`.
    DolinarOptimal {
        t_floor: f64,
    },
    Constant {
        beta: f64,
    },
    /// `min(ψ / R(t), u_max)`.
    CappedDolinar {
        u_max: f64,
    },
    /// `values[k]` on `[k·w, (k+1)·w)`; the last value extends past the end.
    PiecewiseConstant {
        slot_width: f64,
        values: Vec<f64>,
    },
}

impl ControlLaw {
    /// Optimal law with the default floor `duration · 1e-9`.
    pub fn dolinar_optimal(duration: f64) -> Self {
        ControlLaw::DolinarOptimal {
            t_floor: duration * DEFAULT_FLOOR_FRACTION,
        }
    }

    /// Optimal law with no floor; singular at `t = 0` for equal priors.
    pub fn exact_dolinar() -> Self {
        ControlLaw::DolinarOptimal { t_floor: 0.0 }
    }

    pub fn constant(beta: f64) -> Self {
        ControlLaw::Constant { beta }
    }

    pub fn zero() -> Self {
        ControlLaw::Constant { beta: 0.0 }
    }

    pub fn capped(u_max: f64) -> Self {
        ControlLaw::CappedDolinar { u_max }
    }

    /// The optimal law held constant over `n` equal slots, sampled at the
    /// slot start (or midpoint). Where the law is singular (equal priors at
    /// `t = 0`) it is sampled at `duration · 1e-9` instead.
    pub fn segmented_dolinar(
        priors: Priors,
        psi: f64,
        duration: f64,
        n: usize,
        sample: SlotSample,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("need at least one slot".into()));
        }
        if !(duration > 0.0) {
            return Err(Error::domain("duration", duration, "(0, inf)"));
        }
        let width = duration / n as f64;
        let floor = duration * DEFAULT_FLOOR_FRACTION;
        let values = (0..n)
            .map(|k| {
                let offset = match sample {
                    SlotSample::Start => 0.0,
                    SlotSample::Midpoint => 0.5,
                };
                let t = (k as f64 + offset) * width;
                match feedback_amplitude(priors, psi, t) {
                    Err(Error::Singular { .. }) => feedback_amplitude(priors, psi, floor),
                    other => other,
                }
            })
            .collect::<Result<_>>()?;
        Ok(ControlLaw::PiecewiseConstant {
            slot_width: width,
            values,
        })
    }

    pub fn is_optimal_uncapped(&self) -> bool {
        matches!(self, ControlLaw::DolinarOptimal { .. })
    }

    /// `u_0(t)`.
    pub fn amplitude(&self, priors: Priors, psi: f64, t: f64) -> Result<f64> {
        match self {
            ControlLaw::DolinarOptimal { t_floor } => {
                feedback_amplitude(priors, psi, t.max(*t_floor))
            }
            ControlLaw::Constant { beta } => Ok(*beta),
            ControlLaw::CappedDolinar { u_max } => match feedback_amplitude(priors, psi, t) {
                Ok(u) => Ok(u.min(*u_max)),
                Err(Error::Singular { .. }) => Ok(*u_max),
                Err(e) => Err(e),
            },
            ControlLaw::PiecewiseConstant { slot_width, values } => {
                let k = ((t / slot_width).floor().max(0.0) as usize).min(values.len() - 1);
                Ok(values[k])
            }
        }
    }

    /// `u_0(t)` on the smooth piece `[seg_lo, seg_hi]` of the law, with the
    /// piece's own value used at its endpoints.
    pub(crate) fn amplitude_on(
        &self,
        priors: Priors,
        psi: f64,
        t: f64,
        seg_lo: f64,
        seg_hi: f64,
    ) -> Result<f64> {
        match self {
            ControlLaw::PiecewiseConstant { .. } => {
                self.amplitude(priors, psi, 0.5 * (seg_lo + seg_hi))
            }
            _ => self.amplitude(priors, psi, t),
        }
    }

    /// Times in `(0, horizon)` where the law is not smooth.
    pub fn breakpoints(&self, priors: Priors, psi: f64, horizon: f64) -> Vec<f64> {
        let mut out = match self {
            ControlLaw::DolinarOptimal { t_floor } => vec![*t_floor],
            ControlLaw::Constant { .. } => vec![],
            ControlLaw::CappedDolinar { u_max } => {
                cap_release_time(priors, psi, *u_max).into_iter().collect()
            }
            ControlLaw::PiecewiseConstant { slot_width, values } => {
                (1..values.len()).map(|k| k as f64 * slot_width).collect()
            }
        };
        out.retain(|&t| t > 0.0 && t < horizon);
        out
    }
}

/// Time after which the optimal law drops below `u_max`, if it ever binds.
fn cap_release_time(priors: Priors, psi: f64, u_max: f64) -> Option<f64> {
    if !(psi > 0.0 && u_max > psi) {
        return None;
    }
    let qq = 4.0 * priors.product();
    let d2 = (priors.q0() - priors.q1()).powi(2);
    let r2 = (psi / u_max).powi(2);
    if r2 <= d2 || qq == 0.0 {
        return None;
    }
    // (q0−q1)² + 4q0q1(1 − e^{−4ψ²t}) = r²
    let x = -(-(r2 - d2) / qq).ln_1p();
    Some(x / (4.0 * psi * psi))
}

/// Toggle rates under one hypothesis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePair {
    /// Rate while the provisional decision is correct.
    pub lambda: f64,
    /// Rate while it is wrong.
    pub mu: f64,
}

impl RatePair {
    pub fn total(&self) -> f64 {
        self.lambda + self.mu
    }
}

/// Rates for symmetric feedback `u_1 = −u_0 = −u`: `(|ψ−u|², |ψ+u|²)`.
/// Both hypotheses share them.
pub fn rates(psi: f64, u: f64) -> RatePair {
    RatePair {
        lambda: (psi - u).powi(2),
        mu: (psi + u).powi(2),
    }
}

/// Rates for arbitrary `u_0, u_1`: `[(λ, μ) given a=0, (λ̃, μ̃) given a=1]`.
pub fn rates_asymmetric(psi: f64, u0: f64, u1: f64) -> [RatePair; 2] {
    [
        RatePair {
            lambda: (psi - u0).powi(2),
            mu: (psi - u1).powi(2),
        },
        RatePair {
            lambda: (-psi - u1).powi(2),
            mu: (-psi - u0).powi(2),
        },
    ]
}

/// `R(t)² = 1 − 4 q0 q1 e^{−4ψ²t}`, written to keep precision near `R = 0`.
fn r_squared(priors: Priors, psi: f64, t: f64) -> f64 {
    let d = priors.q0() - priors.q1();
    d * d + 4.0 * priors.product() * -(-4.0 * psi * psi * t).exp_m1()
}

/// Optimal feedback envelope `u(t) = ψ / √(1 − 4 q0 q1 e^{−4ψ²t})`.
///
/// Diverges at `t = 0` for equal priors; that case is reported as
/// [`Error::Singular`]. `ψ = 0` gives 0.
pub fn feedback_amplitude(priors: Priors, psi: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain("t", t, "[0, inf)"));
    }
    if psi == 0.0 {
        return Ok(0.0);
    }
    let r2 = r_squared(priors, psi, t);
    if r2 <= 0.0 {
        return Err(Error::Singular { t });
    }
    Ok(psi / r2.sqrt())
}

/// Helstrom bound for the portion of the pulse received by time `t`.
pub fn helstrom_trajectory(priors: Priors, psi: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain("t", t, "[0, inf)"));
    }
    helstrom_bound(priors, (-2.0 * psi * psi * t).exp())
}

/// Largest `|lhs − rhs|` over `t_grid` of the identity obtained by
/// substituting the running Helstrom bound and the optimal law into
/// `P' = μ − (λ+μ) P`: `ψ²(1−R²)/R` against `μ − (λ+μ)(1+R)/2`.
pub fn verify_control_identity(priors: Priors, psi: f64, t_grid: &[f64]) -> Result<f64> {
    let mut worst = 0.0f64;
    for &t in t_grid {
        if !(t > 0.0) {
            return Err(Error::domain("t", t, "(0, inf)"));
        }
        let r2 = r_squared(priors, psi, t);
        let lhs = if psi == 0.0 {
            0.0
        } else {
            if r2 <= 0.0 {
                return Err(Error::Singular { t });
            }
            psi * psi * (1.0 - r2) / r2.sqrt()
        };
        let u = feedback_amplitude(priors, psi, t)?;
        let RatePair { lambda, mu } = rates(psi, u);
        let pc = helstrom_trajectory(priors, psi, t)?;
        worst = worst.max((lhs - (mu - (lambda + mu) * pc)).abs());
    }
    Ok(worst)
}

/// Conditional probabilities of a correct provisional decision at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcState {
    pub t: f64,
    /// `P[z(t) = 0 | a = 0]`
    pub p0: f64,
    /// `P[z(t) = 1 | a = 1]`
    pub p1: f64,
}

impl PcState {
    /// State before any light arrives, given the start rule.
    pub fn initial(priors: Priors) -> Self {
        let (p0, p1) = if priors.start_bit() == 0 {
            (1.0, 0.0)
        } else {
            (0.0, 1.0)
        };
        PcState { t: 0.0, p0, p1 }
    }

    pub fn pc(&self, priors: Priors) -> f64 {
        priors.q0() * self.p0 + priors.q1() * self.p1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn amplitude_examples() {
        let p = Priors::new(0.7).unwrap();
        assert!((feedback_amplitude(p, 1.0, 0.0).unwrap() - 2.5).abs() < 1e-14);
        let u = feedback_amplitude(Priors::equal(), 1.0, 40.0).unwrap();
        assert!((u - 1.0).abs() < 1e-15);
        assert!(matches!(
            feedback_amplitude(Priors::equal(), 1.0, 0.0),
            Err(Error::Singular { .. })
        ));
        assert_eq!(feedback_amplitude(Priors::equal(), 0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn amplitude_decreases() {
        let p = Priors::new(0.6).unwrap();
        let mut last = f64::INFINITY;
        for i in 0..200 {
            let u = feedback_amplitude(p, 0.8, 0.01 * i as f64).unwrap();
            assert!(u < last);
            last = u;
        }
    }

    #[test]
    fn rate_examples() {
        assert_eq!(
            rates(1.0, 1.0),
            RatePair {
                lambda: 0.0,
                mu: 4.0
            }
        );
        assert_eq!(
            rates(1.0, 0.0),
            RatePair {
                lambda: 1.0,
                mu: 1.0
            }
        );
        let [a0, a1] = rates_asymmetric(0.8, 0.3, -0.3);
        assert_eq!(a0, a1);
        assert_eq!(a0, rates(0.8, 0.3));
    }

    #[test]
    fn helstrom_trajectory_examples() {
        let p = Priors::new(0.7).unwrap();
        assert!((helstrom_trajectory(p, 1.0, 0.0).unwrap() - 0.7).abs() < 1e-15);
        assert!(
            (helstrom_trajectory(p, 1.0, 1.0).unwrap() - 0.996138807022153652191359857915).abs()
                < 1e-15
        );
        let h = helstrom_trajectory(Priors::equal(), 0.5, 0.8).unwrap();
        assert!((h - 0.871036061550214552918804231137).abs() < 1e-15);
    }

    #[test]
    fn identity_examples() {
        let grid: Vec<f64> = (0..100).map(|i| 0.01 + i as f64 * (1.99 / 99.0)).collect();
        for q0 in [0.5, 0.7] {
            let r = verify_control_identity(Priors::new(q0).unwrap(), 1.0, &grid).unwrap();
            assert!(r < 1e-10, "q0={q0}: {r}");
        }
        assert_eq!(
            verify_control_identity(Priors::equal(), 0.0, &grid).unwrap(),
            0.0
        );
    }

    #[test]
    fn capped_law_release() {
        let p = Priors::equal();
        let law = ControlLaw::capped(20.0);
        let bp = law.breakpoints(p, 1.0, 1.0);
        assert_eq!(bp.len(), 1);
        let u = feedback_amplitude(p, 1.0, bp[0]).unwrap();
        assert!((u - 20.0).abs() < 1e-9);
        assert_eq!(law.amplitude(p, 1.0, 0.0).unwrap(), 20.0);
        assert_eq!(law.amplitude(p, 1.0, bp[0] * 0.5).unwrap(), 20.0);
        assert!(law.amplitude(p, 1.0, bp[0] * 2.0).unwrap() < 20.0);
        // the cap never binds when R(0) is already large enough
        assert!(ControlLaw::capped(5.0)
            .breakpoints(Priors::new(0.9).unwrap(), 1.0, 1.0)
            .is_empty());
    }

    #[test]
    fn piecewise_law_slots() {
        let p = Priors::new(0.7).unwrap();
        let law = ControlLaw::segmented_dolinar(p, 1.0, 1.0, 4, SlotSample::Start).unwrap();
        assert_eq!(law.breakpoints(p, 1.0, 1.0), vec![0.25, 0.5, 0.75]);
        let u0 = feedback_amplitude(p, 1.0, 0.5).unwrap();
        assert_eq!(law.amplitude(p, 1.0, 0.5).unwrap(), u0);
        assert_eq!(law.amplitude(p, 1.0, 0.6).unwrap(), u0);
        assert_eq!(law.amplitude_on(p, 1.0, 0.75, 0.5, 0.75).unwrap(), u0);
        assert_eq!(
            law.amplitude(p, 1.0, 3.0).unwrap(),
            law.amplitude(p, 1.0, 0.9).unwrap()
        );
    }
}
