//! Closed-form bounds and receiver probabilities for binary pure-state
//! discrimination.
//!
//! Everything here is a pure function of its arguments. The other modules
//! (adaptive multi-copy measurement, displacement optimization, the
//! continuous-time feedback receiver) are validated against these formulas.

use std::f64::consts::FRAC_PI_4;

use crate::error::{Error, Result};

/// Slack allowed on overlap arguments before they are treated as a caller bug.
const OVERLAP_SLACK: f64 = 1e-12;

/// Prior probabilities of the two hypotheses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Priors {
    q0: f64,
    q1: f64,
}

impl Priors {
    /// Priors `(q0, 1 - q0)`.
    pub fn new(q0: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q0) {
            return Err(Error::domain("q0", q0, "[0, 1]"));
        }
        Ok(Priors { q0, q1: 1.0 - q0 })
    }

    /// Priors from two non-negative weights, normalized to sum to one.
    pub fn from_weights(w0: f64, w1: f64) -> Result<Self> {
        if !(w0 >= 0.0 && w1 >= 0.0 && w0 + w1 > 0.0 && (w0 + w1).is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "prior weights ({w0}, {w1}) must be non-negative with a positive finite sum"
            )));
        }
        Priors::new(w0 / (w0 + w1))
    }

    pub fn equal() -> Self {
        Priors { q0: 0.5, q1: 0.5 }
    }

    pub fn q0(&self) -> f64 {
        self.q0
    }

    pub fn q1(&self) -> f64 {
        self.q1
    }

    pub fn product(&self) -> f64 {
        self.q0 * self.q1
    }

    pub fn max(&self) -> f64 {
        self.q0.max(self.q1)
    }

    pub fn is_equal(&self) -> bool {
        self.q0 == self.q1
    }

    /// True when `q0 >= q1`.
    pub fn is_canonical(&self) -> bool {
        self.q0 >= self.q1
    }

    /// The priors relabelled so that `q0 >= q1`, and whether a swap happened.
    pub fn canonical(self) -> (Self, bool) {
        if self.is_canonical() {
            (self, false)
        } else {
            (self.swapped(), true)
        }
    }

    pub fn swapped(self) -> Self {
        Priors {
            q0: self.q1,
            q1: self.q0,
        }
    }

    /// Provisional decision before any measurement: guess the likelier symbol,
    /// with ties going to 0.
    pub fn start_bit(&self) -> u8 {
        if self.q0 >= 0.5 {
            0
        } else {
            1
        }
    }

    pub fn of(&self, symbol: u8) -> f64 {
        if symbol == 0 {
            self.q0
        } else {
            self.q1
        }
    }
}

/// Two real single-copy states `cos θ |x> ± sin θ |y>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitPair {
    theta: f64,
}

impl QubitPair {
    pub fn new(theta: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_4).contains(&theta) {
            return Err(Error::domain("theta", theta, "[0, pi/4]"));
        }
        Ok(QubitPair { theta })
    }

    /// The pair whose overlap is `chi`.
    pub fn from_overlap(chi: f64) -> Result<Self> {
        check_unit("chi", chi)?;
        QubitPair::new(0.5 * chi.clamp(0.0, 1.0).acos())
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `chi = cos 2θ`.
    pub fn overlap(&self) -> f64 {
        (2.0 * self.theta).cos()
    }

    /// Components of the state for `symbol` in the `|x>, |y>` basis.
    pub fn state(&self, symbol: u8) -> [f64; 2] {
        let (s, c) = self.theta.sin_cos();
        if symbol == 0 {
            [c, s]
        } else {
            [c, -s]
        }
    }
}

/// BPSK coherent-state pair `|±γ>` carried by a constant envelope `ψ` over a
/// pulse of length `duration`. The optical carrier is irrelevant to every
/// quantity here and is not stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentBinary {
    psi: f64,
    duration: f64,
}

impl CoherentBinary {
    pub fn new(psi: f64, duration: f64) -> Result<Self> {
        if !(psi >= 0.0 && psi.is_finite()) {
            return Err(Error::domain("psi", psi, "[0, inf)"));
        }
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::domain("duration", duration, "(0, inf)"));
        }
        Ok(CoherentBinary { psi, duration })
    }

    /// The pair with mean photon number `gamma_sq` spread over `duration`.
    pub fn from_photons(gamma_sq: f64, duration: f64) -> Result<Self> {
        if !(gamma_sq >= 0.0) {
            return Err(Error::domain("gamma_sq", gamma_sq, "[0, inf)"));
        }
        if !(duration > 0.0) {
            return Err(Error::domain("duration", duration, "(0, inf)"));
        }
        CoherentBinary::new((gamma_sq / duration).sqrt(), duration)
    }

    pub fn psi(&self) -> f64 {
        self.psi
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// Mean photon number `ψ² T`.
    pub fn gamma_sq(&self) -> f64 {
        self.psi * self.psi * self.duration
    }

    pub fn gamma(&self) -> f64 {
        self.gamma_sq().sqrt()
    }

    pub fn overlap(&self) -> f64 {
        coherent_overlap(self.gamma_sq())
    }
}

/// Measurement angles of the adaptive local scheme, one per copy.
///
/// `phi(k)` is used while the last provisional decision is 0, `flipped(k)`
/// (`π/2 - φ_k`) while it is 1. Indices are zero-based.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleSchedule {
    phis: Vec<f64>,
}

impl AngleSchedule {
    pub fn len(&self) -> usize {
        self.phis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phis.is_empty()
    }

    pub fn phis(&self) -> &[f64] {
        &self.phis
    }

    pub fn phi(&self, k: usize) -> f64 {
        self.phis[k]
    }

    pub fn flipped(&self, k: usize) -> f64 {
        std::f64::consts::FRAC_PI_2 - self.phis[k]
    }

    /// Angle for copy `k` given the previous provisional decision.
    pub fn angle(&self, k: usize, last_bit: u8) -> f64 {
        if last_bit == 0 {
            self.phi(k)
        } else {
            self.flipped(k)
        }
    }
}

fn check_unit(name: &'static str, x: f64) -> Result<f64> {
    if !(-OVERLAP_SLACK..=1.0 + OVERLAP_SLACK).contains(&x) {
        return Err(Error::domain(name, x, "[0, 1]"));
    }
    Ok(x.clamp(0.0, 1.0))
}

/// Helstrom bound `½[1 + √(1 − 4 q0 q1 X²)]` for pure states with overlap `X`.
pub fn helstrom_bound(priors: Priors, overlap: f64) -> Result<f64> {
    let x = check_unit("overlap", overlap)?;
    let radicand = (1.0 - 4.0 * priors.product() * x * x).max(0.0);
    Ok(0.5 * (1.0 + radicand.sqrt()))
}

/// Overlap `e^{−2γ²}` of the coherent states `|γ>` and `|−γ>`.
pub fn coherent_overlap(gamma_sq: f64) -> f64 {
    (-2.0 * gamma_sq).exp()
}

/// Helstrom bound for `k` copies of a pair with single-copy overlap `chi`.
pub fn multicopy_bound(priors: Priors, chi: f64, k: u32) -> Result<f64> {
    let chi = check_unit("chi", chi)?;
    helstrom_bound(priors, chi.powi(k as i32))
}

/// Optimal local measurement angles `φ_1 … φ_n` for the pair at half-angle
/// `theta`.
///
/// `φ_k = ½ arctan[tan 2θ / √(1 − 4 q0 q1 χ^{2(k−1)})]`, evaluated as an
/// `atan2` so that a vanishing radicand (equal priors at `k = 1`) or
/// orthogonal states give the limit `π/4`.
pub fn angle_schedule(priors: Priors, theta: f64, n: usize) -> Result<AngleSchedule> {
    if !(theta > 0.0 && theta <= FRAC_PI_4) {
        return Err(Error::domain("theta", theta, "(0, pi/4]"));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("angle schedule needs n >= 1".into()));
    }
    let (s2, c2) = (2.0 * theta).sin_cos();
    let chi = c2.max(0.0);
    let qq = 4.0 * priors.product();
    let mut chi_pow = 1.0; // χ^{2(k−1)}
    let phis = (0..n)
        .map(|_| {
            let r = (1.0 - qq * chi_pow).max(0.0).sqrt();
            chi_pow *= chi * chi;
            0.5 * s2.atan2(c2 * r)
        })
        .collect();
    Ok(AngleSchedule { phis })
}

/// Kennedy receiver: displace by the signal amplitude, decide 1 on a click.
pub fn kennedy_pc(priors: Priors, gamma_sq: f64) -> f64 {
    priors.q0 + priors.q1 * -(-4.0 * gamma_sq).exp_m1()
}

/// Kennedy receiver with displacement `beta` in place of `gamma`.
pub fn improved_kennedy_pc(priors: Priors, gamma: f64, beta: f64) -> f64 {
    let miss = gamma - beta;
    let hit = gamma + beta;
    priors.q0 * (-miss * miss).exp() + priors.q1 * -(-hit * hit).exp_m1()
}

/// Feedback receiver with constant-magnitude displacement `beta` that flips
/// sign at every click, started in state 0.
///
/// `½ + ψβ/(ψ²+β²) + [q0 − ½ − ψβ/(ψ²+β²)] e^{−2(ψ²+β²)T}`; the ratio is
/// taken as 0 at `ψ = β = 0`.
pub fn simplified_dolinar_pc(priors: Priors, psi: f64, beta: f64, duration: f64) -> f64 {
    constant_control_pc(priors.q0, psi, beta, duration)
}

/// Solution of `P' = μ − (λ+μ) P` with constant rates, from `P(0) = initial`.
pub(crate) fn constant_control_pc(initial: f64, psi: f64, beta: f64, duration: f64) -> f64 {
    let total = psi * psi + beta * beta;
    if total == 0.0 {
        return initial;
    }
    let steady = 0.5 + psi * beta / total;
    steady + (initial - steady) * (-2.0 * total * duration).exp()
}
