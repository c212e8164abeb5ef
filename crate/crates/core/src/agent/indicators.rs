//! Indicator arithmetic.
//!
//! PP is the domain's valProximity plus any influence received; PS and PA are
//! its first and second differences over unit steps. SI and CI are
//! exponential moving averages kept in [0, 1].

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::atn::AtnState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("non-finite indicator input")]
pub struct NonFiniteIndicator;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndicatorSet {
    /// pseudoPosition
    pub pp: f64,
    /// pseudoSpeed
    pub ps: f64,
    /// pseudoAcceleration
    pub pa: f64,
    /// satisfactory indicator
    pub si: f64,
    /// constancy indicator
    pub ci: f64,
}

impl Default for IndicatorSet {
    fn default() -> Self {
        Self { pp: 0.0, ps: 0.0, pa: 0.0, si: 0.5, ci: 0.5 }
    }
}

impl IndicatorSet {
    /// Moves PP to `val_proximity + influence` and derives PS, PA from it.
    /// SI and CI are left for [`IndicatorSet::settle`] once the new state is known.
    pub fn advance(&self, val_proximity: f64, influence: f64) -> Result<Self, NonFiniteIndicator> {
        let pp = val_proximity + influence;
        let ps = pp - self.pp;
        let pa = ps - self.ps;
        if !(pp.is_finite() && ps.is_finite() && pa.is_finite()) {
            return Err(NonFiniteIndicator);
        }
        Ok(Self { pp, ps, pa, ..*self })
    }

    pub fn settle(&self, old_state: AtnState, new_state: AtnState, alpha: f64) -> Self {
        Self {
            si: update_satisfaction(self.si, new_state, alpha),
            ci: update_constancy(self.ci, old_state, new_state, alpha),
            ..*self
        }
    }
}

/// `(1 - alpha) * si + alpha * r`, with `r = 1` once the agent is at least
/// in Deliberation.
pub fn update_satisfaction(si: f64, new_state: AtnState, alpha: f64) -> f64 {
    let reward = if new_state >= AtnState::Deliberation { 1.0 } else { 0.0 };
    ((1.0 - alpha) * si + alpha * reward).clamp(0.0, 1.0)
}

/// `(1 - alpha) * ci + alpha * s`, with `s = 1` when the state did not change.
pub fn update_constancy(ci: f64, old_state: AtnState, new_state: AtnState, alpha: f64) -> f64 {
    let stable = if old_state == new_state { 1.0 } else { 0.0 };
    ((1.0 - alpha) * ci + alpha * stable).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use AtnState::*;

    #[test]
    fn alaska_position() {
        let next = IndicatorSet::default().advance(1.0 - 3.0, 0.0).unwrap();
        assert_eq!(next.pp, -2.0);
        assert_eq!(next.ps, -2.0);
        assert_eq!(next.pa, -2.0);
    }

    #[test]
    fn unchanged_position_zeroes_speed() {
        let prev = IndicatorSet { pp: 4.0, ps: 1.5, ..Default::default() };
        let next = prev.advance(4.0, 0.0).unwrap();
        assert_eq!(next.ps, 0.0);
        assert_eq!(next.pa, -1.5);
    }

    #[test]
    fn pp_sequence_differences() {
        // PP 0, 2, 3 -> PS 2, 1 -> PA -1 at the third step
        let mut ind = IndicatorSet::default();
        let mut seen = Vec::new();
        for pp in [0.0, 2.0, 3.0] {
            ind = ind.advance(pp, 0.0).unwrap();
            seen.push((ind.ps, ind.pa));
        }
        assert_eq!(seen[1].0, 2.0);
        assert_eq!(seen[2], (1.0, -1.0));
    }

    #[test]
    fn influence_adds_to_position() {
        let next = IndicatorSet::default().advance(1.0, 0.5).unwrap();
        assert_eq!(next.pp, 1.5);
    }

    #[test]
    fn non_finite_inputs_fault() {
        assert!(IndicatorSet::default().advance(f64::NAN, 0.0).is_err());
        assert!(IndicatorSet::default().advance(f64::INFINITY, 0.0).is_err());
    }

    #[test]
    fn satisfaction_recurrence() {
        assert_eq!(update_satisfaction(0.0, Initialisation, 0.25), 0.0);
        for alpha in [0.1, 0.25, 0.9] {
            assert_eq!(update_satisfaction(1.0, Action, alpha), 1.0);
        }
        // 0.75 * 0.5 + 0.25
        assert_eq!(update_satisfaction(0.5, Deliberation, 0.25), 0.625);
    }

    #[test]
    fn constancy_recurrence() {
        let mut ci = 1.0;
        for _ in 0..10 {
            ci = update_constancy(ci, Decision, Decision, 0.25);
        }
        assert_eq!(ci, 1.0);
        // 0.75 * 0.8
        assert!((update_constancy(0.8, Decision, Action, 0.25) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn constancy_alternating_states() {
        // iterated by hand from CI = 0, alpha = 0.5
        let states = [Deliberation, Decision, Decision, Deliberation, Deliberation, Decision];
        let mut ci = 0.0;
        let mut prev = Deliberation;
        let mut trace = Vec::new();
        for s in states {
            ci = update_constancy(ci, prev, s, 0.5);
            trace.push(ci);
            prev = s;
        }
        assert_eq!(trace, vec![0.5, 0.25, 0.625, 0.3125, 0.65625, 0.328125]);
        let flip = [Decision, Deliberation, Decision, Deliberation];
        let mut ci = 0.0;
        let mut prev = Deliberation;
        for s in flip {
            ci = update_constancy(ci, prev, s, 0.5);
            assert_eq!(ci, 0.0);
            prev = s;
        }
    }

    fn arb_state() -> impl Strategy<Value = AtnState> {
        prop::sample::select(AtnState::ALL.to_vec())
    }

    proptest! {
        #[test]
        fn ema_stays_in_unit_interval(
            start in 0.0f64..=1.0,
            alpha in 0.001f64..0.999,
            states in prop::collection::vec(arb_state(), 1..50),
        ) {
            let (mut si, mut ci, mut prev) = (start, start, AtnState::Initialisation);
            for s in states {
                si = update_satisfaction(si, s, alpha);
                ci = update_constancy(ci, prev, s, alpha);
                prop_assert!((0.0..=1.0).contains(&si));
                prop_assert!((0.0..=1.0).contains(&ci));
                prev = s;
            }
        }
    }
}
