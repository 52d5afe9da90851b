//! Adaptive local measurement of `n` identical copies of a real qubit pair.
//!
//! Copy `k` is measured in the basis `{(cos α, sin α), (sin α, −cos α)}`,
//! where `α = φ_k` if the previous provisional decision was 0 and
//! `α = π/2 − φ_k` if it was 1. The decision before the first copy is the
//! likelier symbol (ties go to 0). The last decision is the output.
//!
//! | previous decision | angle used for copy k |
//! |-------------------|-----------------------|
//! | 0                 | `φ_k`                 |
//! | 1                 | `π/2 − φ_k`           |
//!
//! Equivalently: stay on the first sequence of angles while the results are 0
//! and switch sequence every time the result changes.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use rand::Rng;

use crate::error::{Error, Result};
use crate::par::{self, Estimate, MonteCarlo};
use crate::statemath::{angle_schedule, helstrom_bound, AngleSchedule, Priors, QubitPair};

/// Largest `n` for exhaustive enumeration of outcome probabilities.
pub const MAX_ENUMERATED_COPIES: usize = 20;
/// Largest `n` for materializing the `2^n` product measurement vectors.
pub const MAX_VECTOR_COPIES: usize = 10;

const ANGLE_SLACK: f64 = 1e-12;

/// Provisional decisions `z_1 … z_n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OutcomeSequence {
    bits: Vec<u8>,
}

impl OutcomeSequence {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() || bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidArgument(
                "outcome sequence must be a non-empty list of bits".into(),
            ));
        }
        Ok(OutcomeSequence { bits })
    }

    /// Sequence whose `k`-th decision is bit `k` of `mask`.
    pub fn from_mask(mask: u64, n: usize) -> Self {
        OutcomeSequence {
            bits: (0..n).map(|k| ((mask >> k) & 1) as u8).collect(),
        }
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// The global decision.
    pub fn decision(&self) -> u8 {
        *self.bits.last().expect("non-empty")
    }
}

/// `|μ_1> ⊗ … ⊗ |μ_n>`, each factor the unit vector `(cos α_k, sin α_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductVector {
    pub outcomes: OutcomeSequence,
    angles: Vec<f64>,
}

impl ProductVector {
    pub fn factor_angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn factor(&self, k: usize) -> [f64; 2] {
        let (s, c) = self.angles[k].sin_cos();
        [c, s]
    }

    /// Inner product, computed factor by factor.
    pub fn inner(&self, other: &ProductVector) -> f64 {
        self.angles
            .iter()
            .zip(&other.angles)
            .map(|(a, b)| (a - b).cos())
            .product()
    }

    /// Components in the `2^n`-dimensional product basis; copy 1 is the most
    /// significant tensor factor.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![1.0];
        for k in 0..self.angles.len() {
            let [x, y] = self.factor(k);
            out = out.iter().flat_map(|&v| [v * x, v * y]).collect();
        }
        out
    }
}

/// `(P[z=0 | a], P[z=1 | a])` for one copy of symbol `symbol` measured at
/// angle `phi`.
pub fn local_outcome_probs(symbol: u8, theta: f64, phi: f64) -> Result<(f64, f64)> {
    if !(-ANGLE_SLACK..=FRAC_PI_4 + ANGLE_SLACK).contains(&theta) {
        return Err(Error::domain("theta", theta, "[0, pi/4]"));
    }
    if !(-ANGLE_SLACK..=FRAC_PI_2 + ANGLE_SLACK).contains(&phi) {
        return Err(Error::domain("phi", phi, "[0, pi/2]"));
    }
    if symbol > 1 {
        return Err(Error::InvalidArgument(format!(
            "symbol {symbol} is not a bit"
        )));
    }
    Ok(outcome_probs(symbol, theta, phi))
}

fn outcome_probs(symbol: u8, theta: f64, phi: f64) -> (f64, f64) {
    // a=0: <μ0|γ0> = cos(θ−φ); a=1: <μ0|γ1> = cos(θ+φ)
    let x = if symbol == 0 {
        theta - phi
    } else {
        theta + phi
    };
    let (s, c) = x.sin_cos();
    (c * c, s * s)
}

/// Per-copy table `probs[k][last][a] = P[z_k = 0 | a, z_{k−1} = last]`.
struct LocalTable {
    start: u8,
    p_zero: Vec<[[f64; 2]; 2]>,
}

impl LocalTable {
    fn new(priors: Priors, theta: f64, schedule: &AngleSchedule) -> Self {
        let p_zero = (0..schedule.len())
            .map(|k| {
                let row = |last: u8| {
                    let phi = schedule.angle(k, last);
                    [
                        outcome_probs(0, theta, phi).0,
                        outcome_probs(1, theta, phi).0,
                    ]
                };
                [row(0), row(1)]
            })
            .collect();
        LocalTable {
            start: priors.start_bit(),
            p_zero,
        }
    }

    fn prob(&self, k: usize, last: u8, symbol: u8, z: u8) -> f64 {
        let p0 = self.p_zero[k][last as usize][symbol as usize];
        if z == 0 {
            p0
        } else {
            1.0 - p0
        }
    }

    /// `P[z_1 … z_n | a]` for the sequence encoded in `mask`.
    fn sequence_prob(&self, mask: u64, symbol: u8) -> f64 {
        let mut last = self.start;
        let mut p = 1.0;
        for k in 0..self.p_zero.len() {
            let z = ((mask >> k) & 1) as u8;
            p *= self.prob(k, last, symbol, z);
            last = z;
        }
        p
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta <= FRAC_PI_4) {
        return Err(Error::domain("theta", theta, "(0, pi/4]"));
    }
    Ok(())
}

/// Exact probability that the adaptive scheme's last decision is correct,
/// summed over all `2^n` outcome sequences.
pub fn exact_adaptive_pc(priors: Priors, theta: f64, n: usize) -> Result<f64> {
    exact_adaptive_pc_with(priors, theta, n, par::Execution::default())
}

pub fn exact_adaptive_pc_with(
    priors: Priors,
    theta: f64,
    n: usize,
    exec: par::Execution,
) -> Result<f64> {
    check_theta(theta)?;
    if n > MAX_ENUMERATED_COPIES {
        return Err(Error::TooLarge {
            what: "exact_adaptive_pc",
            n,
            max: MAX_ENUMERATED_COPIES,
        });
    }
    let schedule = angle_schedule(priors, theta, n)?;
    let table = LocalTable::new(priors, theta, &schedule);
    let last_bit = 1u64 << (n - 1);
    Ok(par::sum_blocks(exec, 1u64 << n, |mask| {
        let decision = u8::from(mask & last_bit != 0);
        priors.of(decision) * table.sequence_prob(mask, decision)
    }))
}

/// Exact posterior `P[a = z_k | z_1 … z_k]` after the given outcomes.
pub fn posterior_given_history(
    priors: Priors,
    theta: f64,
    outcomes: &OutcomeSequence,
) -> Result<f64> {
    check_theta(theta)?;
    let n = outcomes.len();
    let schedule = angle_schedule(priors, theta, n)?;
    let table = LocalTable::new(priors, theta, &schedule);
    let mut joint = [priors.q0(), priors.q1()];
    let mut last = table.start;
    for (k, &z) in outcomes.bits().iter().enumerate() {
        for a in 0..2u8 {
            joint[a as usize] *= table.prob(k, last, a, z);
        }
        last = z;
    }
    let total = joint[0] + joint[1];
    if total <= 0.0 {
        return Err(Error::InvalidArgument(
            "outcome sequence has zero probability".into(),
        ));
    }
    Ok(joint[outcomes.decision() as usize] / total)
}

/// Monte Carlo estimate of the adaptive scheme's correct-decision probability.
pub fn simulate_adaptive(
    priors: Priors,
    theta: f64,
    n: usize,
    mc: &MonteCarlo,
) -> Result<Estimate> {
    check_theta(theta)?;
    mc.validate()?;
    let schedule = angle_schedule(priors, theta, n)?;
    let table = LocalTable::new(priors, theta, &schedule);
    let hits = par::try_count(mc.execution, mc.trials, |trial| {
        let mut rng = par::trial_rng(mc.seed, trial);
        let symbol = u8::from(rng.random::<f64>() >= priors.q0());
        let mut last = table.start;
        for k in 0..n {
            let p0 = table.prob(k, last, symbol, 0);
            last = u8::from(rng.random::<f64>() >= p0);
        }
        Ok(last == symbol)
    })?;
    Ok(Estimate::from_counts(hits, mc.trials))
}

/// The `2^n` product vectors realized by the adaptive scheme, indexed by the
/// outcome mask (bit `k` is `z_{k+1}`).
pub fn measurement_vectors(priors: Priors, theta: f64, n: usize) -> Result<Vec<ProductVector>> {
    check_theta(theta)?;
    if n > MAX_VECTOR_COPIES {
        return Err(Error::TooLarge {
            what: "measurement_vectors",
            n,
            max: MAX_VECTOR_COPIES,
        });
    }
    let schedule = angle_schedule(priors, theta, n)?;
    let start = priors.start_bit();
    Ok((0..1u64 << n)
        .map(|mask| {
            let outcomes = OutcomeSequence::from_mask(mask, n);
            let mut last = start;
            let angles = outcomes
                .bits()
                .iter()
                .enumerate()
                .map(|(k, &z)| {
                    let alpha = schedule.angle(k, last);
                    last = z;
                    // (sin α, −cos α) is the unit vector at α − π/2
                    if z == 0 {
                        alpha
                    } else {
                        alpha - FRAC_PI_2
                    }
                })
                .collect();
            ProductVector { outcomes, angles }
        })
        .collect())
}

pub fn gram_matrix(vectors: &[ProductVector]) -> Vec<Vec<f64>> {
    vectors
        .iter()
        .map(|u| vectors.iter().map(|v| u.inner(v)).collect())
        .collect()
}

/// `max |G − I|` over all entries.
pub fn max_identity_deviation(gram: &[Vec<f64>]) -> f64 {
    gram.iter()
        .enumerate()
        .flat_map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(move |(j, &g)| (g - if i == j { 1.0 } else { 0.0 }).abs())
        })
        .fold(0.0, f64::max)
}

/// One step of the posterior recursion: the provisional correct-decision
/// probability after one more copy, given the current one.
pub fn posterior_update(pc_prev: f64, chi: f64) -> Result<f64> {
    if !(0.5..=1.0).contains(&pc_prev) {
        return Err(Error::domain("pc_prev", pc_prev, "[1/2, 1]"));
    }
    let prior = Priors::new(pc_prev)?;
    helstrom_bound(prior, chi)
}

/// `posterior_update` applied `n` times from `max(q0, q1)`.
pub fn posterior_chain(priors: Priors, chi: f64, n: usize) -> Result<f64> {
    (0..n).try_fold(priors.max(), |pc, _| posterior_update(pc, chi))
}

/// Angle pair for a qubit pair, for callers that start from an overlap.
pub fn theta_for_overlap(chi: f64) -> Result<f64> {
    Ok(QubitPair::from_overlap(chi)?.theta())
}
