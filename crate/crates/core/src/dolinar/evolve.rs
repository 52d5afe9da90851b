use crate::error::{Error, Result};
use crate::ode::{integrate, OdeOptions, Solution};
use crate::statemath::Priors;

use super::{rates_asymmetric, ControlLaw, PcState};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvolveOptions {
    pub ode: OdeOptions,
    /// Times in `[0, T]` at which to report the state.
    pub sample_times: Vec<f64>,
}

impl EvolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        EvolveOptions {
            ode: OdeOptions::with_tol(tol),
            sample_times: Vec::new(),
        }
    }

    pub fn sampled(mut self, times: Vec<f64>) -> Self {
        self.sample_times = times;
        self
    }
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub priors: Priors,
    pub final_state: PcState,
    /// One state per requested sample time, in request order.
    pub samples: Vec<PcState>,
    pub solution: Solution<2>,
}

impl Evolution {
    /// `P_c(T) = q0 p0(T) + q1 p1(T)`.
    pub fn pc(&self) -> f64 {
        self.final_state.pc(self.priors)
    }

    /// `P_c(t)` from the dense output, for any `t` in `[0, T]`.
    pub fn pc_at(&self, t: f64) -> Option<f64> {
        let [p0, p1] = self.solution.dense(t)?;
        Some(self.priors.q0() * p0 + self.priors.q1() * p1)
    }
}

/// Integrates the conditional success probabilities under symmetric feedback
/// `u_1 = −u_0` from the start-rule state to `duration`.
pub fn evolve_pc(
    priors: Priors,
    psi: f64,
    control: &ControlLaw,
    duration: f64,
    opts: &EvolveOptions,
) -> Result<Evolution> {
    evolve(priors, psi, control, None, duration, opts)
}

/// As [`evolve_pc`] with independent envelopes: `u0` while the decision is 0
/// and `u1` (used as given, not negated) while it is 1.
pub fn evolve_pc_asymmetric(
    priors: Priors,
    psi: f64,
    u0: &ControlLaw,
    u1: &ControlLaw,
    duration: f64,
    opts: &EvolveOptions,
) -> Result<Evolution> {
    evolve(priors, psi, u0, Some(u1), duration, opts)
}

fn evolve(
    priors: Priors,
    psi: f64,
    u0: &ControlLaw,
    u1: Option<&ControlLaw>,
    duration: f64,
    opts: &EvolveOptions,
) -> Result<Evolution> {
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(Error::domain("duration", duration, "[0, inf)"));
    }
    if let Some(&bad) = opts
        .sample_times
        .iter()
        .find(|&&t| !(0.0..=duration).contains(&t))
    {
        return Err(Error::domain("sample time", bad, "[0, T]"));
    }

    let mut cuts = u0.breakpoints(priors, psi, duration);
    if let Some(u1) = u1 {
        cuts.extend(u1.breakpoints(priors, psi, duration));
    }
    cuts.push(0.0);
    cuts.push(duration);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let init = PcState::initial(priors);
    let mut y = [init.p0, init.p1];
    let mut solution: Option<Solution<2>> = None;
    for seg in cuts.windows(2) {
        let (lo, hi) = (seg[0], seg[1]);
        let rhs = |t: f64, p: &[f64; 2]| -> Result<[f64; 2]> {
            let a = u0.amplitude_on(priors, psi, t, lo, hi)?;
            let b = match u1 {
                Some(law) => law.amplitude_on(priors, psi, t, lo, hi)?,
                None => -a,
            };
            let [r0, r1] = rates_asymmetric(psi, a, b);
            Ok([r0.mu - r0.total() * p[0], r1.mu - r1.total() * p[1]])
        };
        let piece = integrate(rhs, lo, y, hi, &opts.sample_times, &opts.ode)?;
        y = piece.last().expect("segment has a start").1;
        match solution.as_mut() {
            Some(s) => s.extend(piece),
            None => solution = Some(piece),
        }
    }
    let solution = match solution {
        Some(s) => s,
        // zero-length horizon
        None => integrate(|_, _| Ok([0.0; 2]), 0.0, y, 0.0, &[], &opts.ode)?,
    };

    let state_at = |t: f64| -> PcState {
        let [p0, p1] = solution.dense(t).expect("sample inside the horizon");
        PcState { t, p0, p1 }
    };
    let samples = opts.sample_times.iter().map(|&t| state_at(t)).collect();
    Ok(Evolution {
        priors,
        final_state: PcState {
            t: duration,
            p0: y[0],
            p1: y[1],
        },
        samples,
        solution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dolinar::helstrom_trajectory;
    use crate::statemath::{kennedy_pc, simplified_dolinar_pc};

    #[test]
    fn constant_control_matches_closed_form() {
        let p = Priors::equal();
        let ev = evolve_pc(
            p,
            1.0,
            &ControlLaw::constant(0.6),
            1.0,
            &EvolveOptions::default(),
        )
        .unwrap();
        assert!((ev.pc() - simplified_dolinar_pc(p, 1.0, 0.6, 1.0)).abs() < 1e-8);
    }

    #[test]
    fn optimal_law_reaches_helstrom() {
        let p = Priors::new(0.7).unwrap();
        let ev = evolve_pc(
            p,
            1.0,
            &ControlLaw::exact_dolinar(),
            1.0,
            &EvolveOptions::default(),
        )
        .unwrap();
        assert!((ev.pc() - 0.996138807022153652191359857915).abs() < 1e-6);
        for i in 1..20 {
            let t = i as f64 / 20.0;
            let h = helstrom_trajectory(p, 1.0, t).unwrap();
            assert!((ev.pc_at(t).unwrap() - h).abs() < 1e-6);
        }
    }

    #[test]
    fn zero_control_is_a_coin_flip() {
        for t in [0.1, 1.0, 5.0] {
            let ev = evolve_pc(
                Priors::equal(),
                1.0,
                &ControlLaw::zero(),
                t,
                &EvolveOptions::default(),
            )
            .unwrap();
            assert!((ev.pc() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn kennedy_as_constant_control() {
        let p = Priors::equal();
        let psi = 0.2f64.sqrt();
        let ev = evolve_pc(
            p,
            psi,
            &ControlLaw::constant(psi),
            1.0,
            &EvolveOptions::default(),
        )
        .unwrap();
        assert!((ev.pc() - kennedy_pc(p, 0.2)).abs() < 1e-9);
    }

    #[test]
    fn asymmetric_reduces_to_symmetric() {
        let p = Priors::new(0.65).unwrap();
        let opts = EvolveOptions::with_tol(1e-12);
        let sym = evolve_pc(p, 0.9, &ControlLaw::constant(1.3), 1.5, &opts).unwrap();
        let asym = evolve_pc_asymmetric(
            p,
            0.9,
            &ControlLaw::constant(1.3),
            &ControlLaw::constant(-1.3),
            1.5,
            &opts,
        )
        .unwrap();
        assert!((sym.pc() - asym.pc()).abs() < 1e-13);
    }

    #[test]
    fn asymmetric_constant_pair_closed_form() {
        // each conditional probability relaxes to μ/(λ+μ) of its own rates
        let p = Priors::new(0.6).unwrap();
        let (psi, u0, u1, t) = (1.1, 0.7, -1.6, 0.8);
        let ev = evolve_pc_asymmetric(
            p,
            psi,
            &ControlLaw::constant(u0),
            &ControlLaw::constant(u1),
            t,
            &EvolveOptions::with_tol(1e-12),
        )
        .unwrap();
        let [r0, r1] = rates_asymmetric(psi, u0, u1);
        let relax = |init: f64, r: crate::dolinar::RatePair| {
            let ss = r.mu / r.total();
            ss + (init - ss) * (-r.total() * t).exp()
        };
        assert!((ev.final_state.p0 - relax(1.0, r0)).abs() < 1e-10);
        assert!((ev.final_state.p1 - relax(0.0, r1)).abs() < 1e-10);
    }

    #[test]
    fn samples_follow_request_order() {
        let p = Priors::new(0.7).unwrap();
        let opts = EvolveOptions::default().sampled(vec![0.9, 0.0, 0.3, 1.0]);
        let ev = evolve_pc(p, 1.0, &ControlLaw::exact_dolinar(), 1.0, &opts).unwrap();
        let ts: Vec<f64> = ev.samples.iter().map(|s| s.t).collect();
        assert_eq!(ts, vec![0.9, 0.0, 0.3, 1.0]);
        assert_eq!(ev.samples[1].pc(p), 0.7);
        assert_eq!(ev.samples[3], ev.final_state);
        assert!(evolve_pc(
            p,
            1.0,
            &ControlLaw::zero(),
            1.0,
            &EvolveOptions::default().sampled(vec![2.0])
        )
        .is_err());
    }

    #[test]
    fn singular_law_is_reported() {
        let r = evolve_pc(
            Priors::equal(),
            1.0,
            &ControlLaw::exact_dolinar(),
            1.0,
            &EvolveOptions::default(),
        );
        assert!(matches!(r, Err(Error::Singular { .. })));
    }

    #[test]
    fn zero_duration() {
        let p = Priors::new(0.8).unwrap();
        let ev = evolve_pc(
            p,
            1.0,
            &ControlLaw::constant(0.4),
            0.0,
            &EvolveOptions::default(),
        )
        .unwrap();
        assert_eq!(ev.pc(), 0.8);
    }
}
