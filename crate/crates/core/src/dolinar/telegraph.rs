//! Photon-counting simulation of the feedback receiver.
//!
//! Clicks of the inhomogeneous Poisson process are drawn by thinning. Time
//! is walked in windows that never straddle a breakpoint of the control law;
//! within a window each rate is monotone, so `1.01 · max(rate at both ends)`
//! dominates it. Windows are halved until the majorant carries at most a few
//! expected candidates, and halved again if a candidate ever exceeds it.

use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::par::{self, Estimate, MonteCarlo};
use crate::statemath::Priors;

use super::ControlLaw;

/// Default ceiling on the thinning majorant, in clicks per unit time.
pub const DEFAULT_MAX_RATE: f64 = 1e8;

const MAJORANT_MARGIN: f64 = 1.01;
const CANDIDATES_PER_WINDOW: f64 = 8.0;
const WINDOWS_PER_PULSE: f64 = 16.0;

/// One simulated pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct TelegraphTrajectory {
    pub trial: u64,
    pub symbol: u8,
    pub click_times: Vec<f64>,
    pub z_final: u8,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TelegraphOptions {
    pub mc: MonteCarlo,
    /// Number of leading trials whose trajectories are returned.
    pub record: usize,
    pub max_rate: f64,
}

impl TelegraphOptions {
    pub fn new(trials: u64, seed: u64) -> Self {
        TelegraphOptions {
            mc: MonteCarlo::new(trials, seed),
            record: 0,
            max_rate: DEFAULT_MAX_RATE,
        }
    }

    pub fn recording(mut self, record: usize) -> Self {
        self.record = record;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TelegraphResult {
    pub estimate: Estimate,
    pub trajectories: Vec<TelegraphTrajectory>,
}

struct Pulse<'a> {
    priors: Priors,
    psi: f64,
    control: &'a ControlLaw,
    duration: f64,
    /// `0, breakpoints…, duration`
    cuts: Vec<f64>,
    max_rate: f64,
}

impl Pulse<'_> {
    /// Click rate for `symbol` while the decision is `z`, on piece `seg`.
    fn rate(&self, symbol: u8, z: u8, t: f64, seg: (f64, f64)) -> Result<f64> {
        let u = self
            .control
            .amplitude_on(self.priors, self.psi, t, seg.0, seg.1)?;
        let field = if symbol == 0 { self.psi } else { -self.psi };
        let local = if z == 0 { u } else { -u };
        Ok((field - local).powi(2))
    }

    fn run<R: Rng>(&self, trial: u64, rng: &mut R) -> Result<TelegraphTrajectory> {
        let symbol = u8::from(rng.random::<f64>() >= self.priors.q0());
        let mut z = self.priors.start_bit();
        let mut clicks = Vec::new();
        let mut t = 0.0;
        let mut seg_idx = 0;
        let base_window = self.duration / WINDOWS_PER_PULSE;
        let mut window_cap = base_window;
        let min_window = self.duration * 1e-15;

        while t < self.duration {
            while self.cuts[seg_idx + 1] <= t {
                seg_idx += 1;
            }
            let seg = (self.cuts[seg_idx], self.cuts[seg_idx + 1]);
            let mut end = seg.1.min(t + window_cap);
            let mut majorant;
            loop {
                let hi = self
                    .rate(symbol, z, t, seg)?
                    .max(self.rate(symbol, z, end, seg)?);
                majorant = MAJORANT_MARGIN * hi;
                if majorant * (end - t) <= CANDIDATES_PER_WINDOW || end - t <= min_window {
                    break;
                }
                end = t + 0.5 * (end - t);
            }
            if majorant > self.max_rate {
                return Err(Error::MajorantOverflow {
                    t,
                    rate: majorant,
                    cap: self.max_rate,
                });
            }
            if majorant == 0.0 {
                t = end;
                continue;
            }
            let gap: f64 = rng.sample::<f64, _>(Exp1) / majorant;
            let candidate = t + gap;
            if candidate >= end {
                t = end;
                window_cap = base_window;
                continue;
            }
            let r = self.rate(symbol, z, candidate, seg)?;
            if r > majorant {
                window_cap = 0.25 * (end - t);
                continue;
            }
            window_cap = base_window;
            t = candidate;
            if rng.random::<f64>() * majorant < r {
                clicks.push(t);
                z ^= 1;
            }
        }
        Ok(TelegraphTrajectory {
            trial,
            symbol,
            click_times: clicks,
            z_final: z,
        })
    }
}

fn pulse<'a>(
    priors: Priors,
    psi: f64,
    control: &'a ControlLaw,
    duration: f64,
    max_rate: f64,
) -> Result<Pulse<'a>> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::domain("duration", duration, "(0, inf)"));
    }
    if !(psi >= 0.0 && psi.is_finite()) {
        return Err(Error::domain("psi", psi, "[0, inf)"));
    }
    if control.is_optimal_uncapped() && priors.is_equal() && psi > 0.0 {
        // the integrated click rate diverges at t = 0; a capped law is required
        return Err(Error::Singular { t: 0.0 });
    }
    let mut cuts = control.breakpoints(priors, psi, duration);
    cuts.insert(0, 0.0);
    cuts.push(duration);
    cuts.dedup();
    Ok(Pulse {
        priors,
        psi,
        control,
        duration,
        cuts,
        max_rate,
    })
}

/// Simulates trial number `trial` of the job seeded with `seed`.
pub fn simulate_trial(
    priors: Priors,
    psi: f64,
    control: &ControlLaw,
    duration: f64,
    trial: u64,
    seed: u64,
    max_rate: f64,
) -> Result<TelegraphTrajectory> {
    let pulse = pulse(priors, psi, control, duration, max_rate)?;
    pulse.run(trial, &mut par::trial_rng(seed, trial))
}

/// Monte Carlo estimate of `P[z(T) = a]`.
pub fn simulate_telegraph(
    priors: Priors,
    psi: f64,
    control: &ControlLaw,
    duration: f64,
    opts: &TelegraphOptions,
) -> Result<TelegraphResult> {
    opts.mc.validate()?;
    let pulse = pulse(priors, psi, control, duration, opts.max_rate)?;
    let seed = opts.mc.seed;
    let hits = par::try_count(opts.mc.execution, opts.mc.trials, |trial| {
        let tr = pulse.run(trial, &mut par::trial_rng(seed, trial))?;
        Ok(tr.z_final == tr.symbol)
    })?;
    let trajectories = (0..(opts.record as u64).min(opts.mc.trials))
        .map(|trial| pulse.run(trial, &mut par::trial_rng(seed, trial)))
        .collect::<Result<_>>()?;
    Ok(TelegraphResult {
        estimate: Estimate::from_counts(hits, opts.mc.trials),
        trajectories,
    })
}
