use rand::Rng;

use super::{
    BehaviorKind, ConditionKind, FsmDescriptor, FsmState, Transition, ATT_RANGE, BETA_RANGE, ETA_RANGE, MAX_STATES,
    MAX_TRANSITIONS, REP_RANGE, RWM_RANGE, XI_RANGE,
};

pub fn sample_behavior<R: Rng + ?Sized>(rng: &mut R) -> BehaviorKind {
    match rng.random_range(0..6) {
        0 => BehaviorKind::Exploration {
            rwm: rng.random_range(RWM_RANGE.0..=RWM_RANGE.1),
        },
        1 => BehaviorKind::Stop,
        2 => BehaviorKind::Phototaxis,
        3 => BehaviorKind::AntiPhototaxis,
        4 => BehaviorKind::Attraction {
            att: rng.random_range(ATT_RANGE.0..=ATT_RANGE.1),
        },
        _ => BehaviorKind::Repulsion {
            rep: rng.random_range(REP_RANGE.0..=REP_RANGE.1),
        },
    }
}

pub fn sample_condition<R: Rng + ?Sized>(rng: &mut R) -> ConditionKind {
    let beta = |rng: &mut R| rng.random_range(BETA_RANGE.0..=BETA_RANGE.1);
    match rng.random_range(0..6) {
        0 => ConditionKind::BlackFloor { beta: beta(rng) },
        1 => ConditionKind::GrayFloor { beta: beta(rng) },
        2 => ConditionKind::WhiteFloor { beta: beta(rng) },
        k @ (3 | 4) => {
            let eta = rng.random_range(ETA_RANGE.0..=ETA_RANGE.1);
            let xi = rng.random_range(XI_RANGE.0..=XI_RANGE.1);
            if k == 3 {
                ConditionKind::NeighborCount { eta, xi }
            } else {
                ConditionKind::InvertedNeighborCount { eta, xi }
            }
        }
        _ => ConditionKind::FixedProbability { beta: beta(rng) },
    }
}

/// A transition out of `source` in a machine with `nstates > 1` states.
pub fn sample_transition<R: Rng + ?Sized>(rng: &mut R, source: usize, nstates: usize) -> Transition {
    assert!(nstates > 1 && source < nstates, "no valid target");
    let mut target = rng.random_range(0..nstates - 1);
    if target >= source {
        target += 1;
    }
    Transition {
        condition: sample_condition(rng),
        target,
    }
}

/// Uniform over state count, behaviors, out-degree, targets and parameters.
/// Single-state machines have no transitions since self-loops are invalid.
pub fn sample_fsm<R: Rng + ?Sized>(rng: &mut R) -> FsmDescriptor {
    let n = rng.random_range(1..=MAX_STATES);
    let states = (0..n)
        .map(|i| {
            let behavior = sample_behavior(rng);
            let degree = if n == 1 { 0 } else { rng.random_range(0..=MAX_TRANSITIONS) };
            let transitions = (0..degree).map(|_| sample_transition(rng, i, n)).collect();
            FsmState { behavior, transitions }
        })
        .collect();
    FsmDescriptor { states }
}

/// Derive a new candidate from a survivor. With probability `resample_prob`
/// one state's behavior is redrawn, otherwise one transition is redrawn,
/// added or removed. Falls back to the behavior move when the machine has
/// a single state.
pub fn perturb_fsm<R: Rng + ?Sized>(desc: &FsmDescriptor, rng: &mut R, resample_prob: f64) -> FsmDescriptor {
    let mut out = desc.clone();
    let n = out.states.len();
    if n == 1 || rng.random_bool(resample_prob.clamp(0.0, 1.0)) {
        let i = rng.random_range(0..n);
        out.states[i].behavior = sample_behavior(rng);
        return out;
    }
    let i = rng.random_range(0..n);
    let transitions = &mut out.states[i].transitions;
    let len = transitions.len();
    // 0 = redraw existing, 1 = add, 2 = remove
    let mut moves = Vec::with_capacity(3);
    if len > 0 {
        moves.extend([0, 2]);
    }
    if len < MAX_TRANSITIONS {
        moves.push(1);
    }
    match moves[rng.random_range(0..moves.len())] {
        0 => {
            let j = rng.random_range(0..len);
            transitions[j] = sample_transition(rng, i, n);
        }
        1 => {
            let t = sample_transition(rng, i, n);
            transitions.push(t);
        }
        _ => {
            let j = rng.random_range(0..len);
            transitions.remove(j);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use proptest::prelude::*;

    #[test]
    fn same_seed_same_descriptor() {
        let a = sample_fsm(&mut stream(99, &[1]));
        let b = sample_fsm(&mut stream(99, &[1]));
        assert_eq!(a, b);
    }

    #[test]
    fn coverage_over_ten_thousand_samples() {
        let mut rng = stream(5, &[]);
        let mut behaviors = [0usize; 6];
        let mut conditions = std::collections::HashSet::new();
        let mut sizes = [0usize; MAX_STATES + 1];
        for _ in 0..10_000 {
            let d = sample_fsm(&mut rng);
            sizes[d.states.len()] += 1;
            for s in &d.states {
                behaviors[s.behavior.index()] += 1;
                for t in &s.transitions {
                    conditions.insert(t.condition.name());
                }
            }
        }
        assert!(behaviors.iter().all(|&c| c > 0), "{behaviors:?}");
        assert_eq!(conditions.len(), 6);
        assert_eq!(sizes[0], 0);
        assert!(sizes[1..].iter().all(|&c| c > 2000), "{sizes:?}");
    }

    proptest! {
        #[test]
        fn samples_are_valid(seed in any::<u64>()) {
            prop_assert!(sample_fsm(&mut stream(seed, &[])).validate().is_ok());
        }

        #[test]
        fn perturbations_are_valid(seed in any::<u64>(), p in 0.0f64..=1.0) {
            let mut rng = stream(seed, &[]);
            let mut d = sample_fsm(&mut rng);
            for _ in 0..20 {
                d = perturb_fsm(&d, &mut rng, p);
                prop_assert!(d.validate().is_ok());
            }
        }
    }
}
