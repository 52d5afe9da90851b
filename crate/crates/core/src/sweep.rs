//! Error-probability and displacement sweeps over the mean photon number.

use std::fmt;
use std::str::FromStr;

use crate::dolinar::{evolve_pc, simulate_telegraph, ControlLaw, EvolveOptions, TelegraphOptions};
use crate::error::{Error, Result};
use crate::multicopy::exact_adaptive_pc;
use crate::par::{self, Execution, MonteCarlo};
use crate::rootfind::{optimal_beta_ik, optimal_beta_sd};
use crate::statemath::{
    coherent_overlap, helstrom_bound, improved_kennedy_pc, kennedy_pc, simplified_dolinar_pc,
    CoherentBinary, Priors, QubitPair,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Helstrom,
    Kennedy,
    ImprovedKennedy,
    SimplifiedDolinar,
    /// Optimal feedback law, probability from the ODE.
    DolinarOde,
    /// Optimal (or capped) feedback law, Monte Carlo estimate.
    DolinarMc,
    /// Exact adaptive measurement of the pulse cut into equal copies.
    Multicopy,
}

impl Scheme {
    pub const ALL: [Scheme; 7] = [
        Scheme::Helstrom,
        Scheme::Kennedy,
        Scheme::ImprovedKennedy,
        Scheme::SimplifiedDolinar,
        Scheme::DolinarOde,
        Scheme::DolinarMc,
        Scheme::Multicopy,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Helstrom => "helstrom",
            Scheme::Kennedy => "kennedy",
            Scheme::ImprovedKennedy => "improved_kennedy",
            Scheme::SimplifiedDolinar => "simplified_dolinar",
            Scheme::DolinarOde => "dolinar_ode",
            Scheme::DolinarMc => "dolinar_mc",
            Scheme::Multicopy => "multicopy",
        }
    }

    /// Schemes that use a fixed displacement and so have a `beta_sq` column.
    pub fn has_displacement(&self) -> bool {
        matches!(
            self,
            Scheme::Kennedy | Scheme::ImprovedKennedy | Scheme::SimplifiedDolinar
        )
    }

    pub fn is_monte_carlo(&self) -> bool {
        matches!(self, Scheme::DolinarMc)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown scheme '{s}'")))
    }
}

/// `points` values from `lo` to `hi` inclusive, linearly or log spaced.
pub fn axis(lo: f64, hi: f64, points: usize, log: bool) -> Result<Vec<f64>> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "axis needs lo < hi (got {lo}, {hi})"
        )));
    }
    if points < 2 {
        return Err(Error::InvalidArgument(
            "axis needs at least 2 points".into(),
        ));
    }
    if log && lo <= 0.0 {
        return Err(Error::InvalidArgument("log axis needs lo > 0".into()));
    }
    let last = (points - 1) as f64;
    Ok((0..points)
        .map(|i| {
            let s = i as f64 / last;
            if i == 0 {
                lo
            } else if i == points - 1 {
                hi
            } else if log {
                (lo.ln() + s * (hi.ln() - lo.ln())).exp()
            } else {
                lo + s * (hi - lo)
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub schemes: Vec<Scheme>,
    pub priors: Priors,
    pub duration: f64,
    /// Emit `beta_sq` next to `pe` for displacement schemes.
    pub with_beta: bool,
    pub mc: MonteCarlo,
    /// Cap for the Monte Carlo feedback law; needed for equal priors.
    pub u_max: Option<f64>,
    /// Copies for the `multicopy` scheme.
    pub copies: usize,
    /// Row-level execution strategy.
    pub execution: Execution,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            schemes: vec![
                Scheme::Helstrom,
                Scheme::Kennedy,
                Scheme::ImprovedKennedy,
                Scheme::SimplifiedDolinar,
            ],
            priors: Priors::equal(),
            duration: 1.0,
            with_beta: false,
            mc: MonteCarlo::new(10_000, 0),
            u_max: None,
            copies: 8,
            execution: Execution::default(),
        }
    }
}

/// One scheme's entry in a row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub scheme: Scheme,
    /// Error probability `1 − P_c`.
    pub pe: f64,
    /// Displacement intensity in photons, for displacement schemes.
    pub beta_sq: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub gamma_sq: f64,
    pub cells: Vec<Cell>,
}

impl SweepRow {
    pub fn get(&self, scheme: Scheme) -> Option<&Cell> {
        self.cells.iter().find(|c| c.scheme == scheme)
    }
}

/// Column names in output order: `gamma_sq`, then per scheme `<s>_pe` and,
/// when enabled, `<s>_beta_sq`.
pub fn columns(config: &SweepConfig) -> Vec<String> {
    let mut out = vec!["gamma_sq".to_string()];
    for s in &config.schemes {
        out.push(format!("{s}_pe"));
        if config.with_beta && s.has_displacement() {
            out.push(format!("{s}_beta_sq"));
        }
    }
    out
}

impl SweepRow {
    /// Values aligned with [`columns`].
    pub fn values(&self, with_beta: bool) -> Vec<f64> {
        let mut out = vec![self.gamma_sq];
        for c in &self.cells {
            out.push(c.pe);
            if with_beta && c.scheme.has_displacement() {
                out.push(c.beta_sq.unwrap_or(f64::NAN));
            }
        }
        out
    }
}

fn evaluate(scheme: Scheme, gamma_sq: f64, config: &SweepConfig) -> Result<Cell> {
    let priors = config.priors;
    let duration = config.duration;
    let pulse = CoherentBinary::from_photons(gamma_sq, duration)?;
    let psi = pulse.psi();
    let gamma = pulse.gamma();
    let (pc, beta_sq) = match scheme {
        Scheme::Helstrom => (helstrom_bound(priors, coherent_overlap(gamma_sq))?, None),
        Scheme::Kennedy => (kennedy_pc(priors, gamma_sq), Some(gamma_sq)),
        Scheme::ImprovedKennedy if gamma == 0.0 => {
            (improved_kennedy_pc(priors, 0.0, 0.0), Some(0.0))
        }
        Scheme::ImprovedKennedy => {
            let d = optimal_beta_ik(priors, gamma)?;
            (d.pc, Some(d.intensity()))
        }
        Scheme::SimplifiedDolinar if psi == 0.0 => {
            (simplified_dolinar_pc(priors, 0.0, 0.0, duration), Some(0.0))
        }
        Scheme::SimplifiedDolinar => {
            let d = optimal_beta_sd(priors, psi, duration)?;
            (d.pc, Some(d.intensity() * duration))
        }
        Scheme::DolinarOde => {
            let ev = evolve_pc(
                priors,
                psi,
                &ControlLaw::dolinar_optimal(duration),
                duration,
                &EvolveOptions::default(),
            )?;
            (ev.pc(), None)
        }
        Scheme::DolinarMc => {
            let law = match config.u_max {
                Some(cap) => ControlLaw::capped(cap),
                None => ControlLaw::dolinar_optimal(duration),
            };
            let mut opts = TelegraphOptions::new(config.mc.trials, config.mc.seed);
            opts.mc.execution = config.mc.execution;
            (
                simulate_telegraph(priors, psi, &law, duration, &opts)?
                    .estimate
                    .value,
                None,
            )
        }
        Scheme::Multicopy => {
            let chi = coherent_overlap(gamma_sq / config.copies.max(1) as f64);
            if chi >= 1.0 {
                (priors.max(), None)
            } else {
                let theta = QubitPair::from_overlap(chi)?.theta();
                (exact_adaptive_pc(priors, theta, config.copies)?, None)
            }
        }
    };
    Ok(Cell {
        scheme,
        pe: 1.0 - pc,
        beta_sq,
    })
}

pub fn evaluate_row(gamma_sq: f64, config: &SweepConfig) -> Result<SweepRow> {
    if !(gamma_sq >= 0.0 && gamma_sq.is_finite()) {
        return Err(Error::domain("gamma_sq", gamma_sq, "[0, inf)"));
    }
    let cells = config
        .schemes
        .iter()
        .map(|&s| evaluate(s, gamma_sq, config))
        .collect::<Result<_>>()?;
    Ok(SweepRow { gamma_sq, cells })
}

/// Rows in axis order regardless of execution strategy.
pub fn sweep(axis: &[f64], config: &SweepConfig) -> Result<Vec<SweepRow>> {
    if config.schemes.is_empty() {
        return Err(Error::InvalidArgument("no schemes selected".into()));
    }
    if config.schemes.iter().any(Scheme::is_monte_carlo) && config.mc.trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    par::try_map(config.execution, axis.len(), |i| {
        evaluate_row(axis[i], config)
    })
}
