//! Execution strategy for the data-parallel loops (Monte Carlo trials,
//! outcome enumeration, sweep rows).
//!
//! Results never depend on the strategy: work items are indexed, each
//! Monte Carlo trial draws from its own ChaCha stream keyed by
//! `(seed, trial index)`, and reductions are over integers or are
//! order-preserving collects.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How an internally parallelizable operation runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Rayon thread pool; falls back to `Sequential` when the crate is built
    /// without the `parallel` feature.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Monte Carlo job size, master seed and execution strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonteCarlo {
    pub trials: u64,
    pub seed: u64,
    pub execution: Execution,
}

impl MonteCarlo {
    pub fn new(trials: u64, seed: u64) -> Self {
        MonteCarlo {
            trials,
            seed,
            execution: Execution::default(),
        }
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be >= 1".into()));
        }
        Ok(())
    }
}

/// Random stream for one Monte Carlo trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// `f(0), …, f(n-1)` in index order.
pub(crate) fn try_map<T, F>(exec: Execution, n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => (0..n).into_par_iter().map(f).collect(),
        _ => (0..n).map(f).collect(),
    }
}

/// Number of indices in `0..n` for which `f` returns true.
pub(crate) fn try_count<F>(exec: Execution, n: u64, f: F) -> Result<u64>
where
    F: Fn(u64) -> Result<bool> + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => (0..n)
            .into_par_iter()
            .map(|i| f(i).map(u64::from))
            .try_reduce(|| 0, |a, b| Ok(a + b)),
        _ => {
            let mut hits = 0;
            for i in 0..n {
                hits += u64::from(f(i)?);
            }
            Ok(hits)
        }
    }
}

/// `Σ f(i)` over `0..n`, summed in fixed-size blocks so the floating-point
/// result is the same for both strategies.
pub(crate) fn sum_blocks<F>(exec: Execution, n: u64, f: F) -> f64
where
    F: Fn(u64) -> f64 + Sync + Send,
{
    const BLOCK: u64 = 1 << 10;
    let blocks = n.div_ceil(BLOCK);
    let block_sum = |b: u64| -> f64 { (b * BLOCK..((b + 1) * BLOCK).min(n)).map(&f).sum() };
    let partial: Vec<f64> = match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => (0..blocks).into_par_iter().map(block_sum).collect(),
        _ => (0..blocks).map(block_sum).collect(),
    };
    partial.iter().sum()
}

/// Estimate and standard error of a Bernoulli frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub hits: u64,
    pub trials: u64,
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn from_counts(hits: u64, trials: u64) -> Self {
        let value = hits as f64 / trials as f64;
        let stderr = (value * (1.0 - value) / trials as f64).sqrt();
        Estimate {
            hits,
            trials,
            value,
            stderr,
        }
    }

    /// `|estimate − reference| / stderr`; zero-variance estimates give 0 on an
    /// exact match and infinity otherwise.
    pub fn z_score(&self, reference: f64) -> f64 {
        let diff = (self.value - reference).abs();
        if self.stderr > 0.0 {
            diff / self.stderr
        } else if diff <= 1e-12 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_independent_of_order() {
        let a: Vec<u64> = (0..8).map(|i| trial_rng(7, i).random()).collect();
        let b: Vec<u64> = (0..8).rev().map(|i| trial_rng(7, i).random()).collect();
        let b: Vec<u64> = b.into_iter().rev().collect();
        assert_eq!(a, b);
        assert_ne!(a[0], a[1]);
    }

    #[test]
    fn strategies_agree() {
        let f = |i: u64| ((i as f64) * 0.37).sin();
        let s = sum_blocks(Execution::Sequential, 5000, f);
        let p = sum_blocks(Execution::Parallel, 5000, f);
        assert_eq!(s.to_bits(), p.to_bits());
        let c = |i: u64| Ok(i.is_multiple_of(3));
        assert_eq!(
            try_count(Execution::Sequential, 1000, c).unwrap(),
            try_count(Execution::Parallel, 1000, c).unwrap()
        );
        let v = try_map(Execution::Parallel, 50, |i| Ok(i * i)).unwrap();
        assert_eq!(v[7], 49);
    }

    #[test]
    fn z_score_degenerate() {
        let e = Estimate::from_counts(10, 10);
        assert_eq!(e.stderr, 0.0);
        assert_eq!(e.z_score(1.0), 0.0);
        assert!(e.z_score(0.9).is_infinite());
    }
}
