//! The pulse cut into `n` equal slots, each measured with a constant
//! displacement. As `n` grows this approaches the continuous optimal law.

use crate::error::{Error, Result};
use crate::statemath::Priors;

use super::{rates, ControlLaw, PcState};

/// Where in each slot the optimal law is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SlotSample {
    /// Causal: the value at the slot start.
    #[default]
    Start,
    Midpoint,
}

/// Success probability of the slot-wise constant receiver, sampling the
/// optimal law at slot starts.
pub fn segmented_pc(priors: Priors, psi: f64, duration: f64, n: usize) -> Result<f64> {
    segmented_pc_with(priors, psi, duration, n, SlotSample::Start)
}

pub fn segmented_pc_with(
    priors: Priors,
    psi: f64,
    duration: f64,
    n: usize,
    sample: SlotSample,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one slot".into()));
    }
    let law = ControlLaw::segmented_dolinar(priors, psi, duration, n, sample)?;
    let ControlLaw::PiecewiseConstant { slot_width, values } = law else {
        unreachable!("segmented_dolinar builds a piecewise law");
    };
    let mut state = PcState::initial(priors);
    for u in values {
        let r = rates(psi, u);
        let total = r.total();
        if total > 0.0 {
            let steady = r.mu / total;
            let decay = (-total * slot_width).exp();
            state.p0 = steady + (state.p0 - steady) * decay;
            state.p1 = steady + (state.p1 - steady) * decay;
        }
        state.t += slot_width;
    }
    Ok(state.pc(priors))
}
