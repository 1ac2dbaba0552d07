//! Small games with known structure, shared by tests, benchmarks and the
//! command-line tool.

use super::{ClimateParams, GameError, TabularGame};
use crate::geometry::{Point, TargetSet};
use crate::learner::{ActionIndicatorFeatures, StepSchedule};

/// Player-1 rewards by state and action before the adversary's shift.
/// States 0 and 1 each have one clearly better action; state 2 trades one
/// objective against the other.
const BASE: [[[f64; 2]; 2]; 3] = [
    [[1.0, 0.4], [0.2, 0.2]],
    [[0.2, 0.2], [0.4, 1.0]],
    [[1.1, 0.5], [0.5, 1.1]],
];
/// Adversary's second action moves the reward by this, per Player-1 action.
const SHIFT: [[f64; 2]; 2] = [[-0.2, 0.1], [0.1, -0.2]];
/// Next-state distributions for `u1 = 0` (advance) and `u1 = 1` (linger),
/// written relative to the current state.
const ADVANCE: [f64; 3] = [0.1, 0.8, 0.1];
const LINGER: [f64; 3] = [0.6, 0.2, 0.2];

fn rotate(rel: &[f64; 3], x: usize) -> Vec<f64> {
    (0..3).map(|y| rel[(y + 3 - x) % 3]).collect()
}

fn verification_parts() -> (Vec<Point>, Vec<f64>) {
    let mut rewards = Vec::new();
    let mut transitions = Vec::new();
    for x in 0..3 {
        for u1 in 0..2 {
            for u2 in 0..2 {
                let b = BASE[x][u1];
                let s = if u2 == 1 { SHIFT[u1] } else { [0.0, 0.0] };
                rewards.push(Point::from([b[0] + s[0], b[1] + s[1]]));
                let rel = if u1 == 0 { &ADVANCE } else { &LINGER };
                let mut row = rotate(rel, x);
                if u2 == 1 {
                    // the adversary's second action blends in a uniform jump
                    for p in &mut row {
                        *p = 0.75 * *p + 0.25 / 3.0;
                    }
                }
                transitions.extend(row);
            }
        }
    }
    (rewards, transitions)
}

/// Three states, two actions per player, two objectives. Every transition
/// probability is at least 0.05, so all stationary joint policies are
/// ergodic.
pub fn verification_game() -> TabularGame {
    let (rewards, transitions) = verification_parts();
    TabularGame::new(3, 2, 2, rewards, transitions).expect("verification game is valid")
}

/// Target box paired with [`verification_game`]. The uniform Player-1
/// policy cannot keep the average inside it against the adversary.
pub fn verification_target() -> TargetSet {
    TargetSet::boxed([0.58, 0.6].into(), [1.5, 1.5].into()).expect("valid box")
}

/// A box no policy pair can reach.
pub fn unapproachable_target() -> TargetSet {
    TargetSet::boxed([1.5, 1.5].into(), [2.0, 2.0].into()).expect("valid box")
}

/// Like [`verification_game`] except state 2 is absorbing, so the chain
/// splits into two classes. Construction fails with an ergodicity error.
pub fn reducible_game() -> Result<TabularGame, GameError> {
    let game = reducible_game_unchecked();
    game.check_ergodic()?;
    Ok(game)
}

/// The tensors of [`reducible_game`] without the ergodicity check.
pub fn reducible_game_unchecked() -> TabularGame {
    let (rewards, mut transitions) = verification_parts();
    for block in 8..12 {
        transitions[block * 3..block * 3 + 3].copy_from_slice(&[0.0, 0.0, 1.0]);
    }
    TabularGame::unchecked(3, 2, 2, rewards, transitions).expect("shapes are valid")
}

/// Comfort region of the climate demo: 20-24 degrees C, 40-60 % humidity.
pub fn comfort_box() -> TargetSet {
    TargetSet::boxed([20.0, 40.0].into(), [24.0, 60.0].into()).expect("valid box")
}

/// Action indicators for the policy; the value is linear in the state
/// offset from the anchor, scaled to roughly unit range.
pub fn climate_features(params: &ClimateParams) -> ActionIndicatorFeatures {
    ActionIndicatorFeatures {
        num_actions: params.segments.len(),
        center: params.anchor_center.to_vec(),
        scale: vec![5.0, 10.0],
    }
}

/// Default schedule with the actor step scaled down by the reward
/// magnitude: scalarised climate rewards are about ten times larger than
/// those of [`verification_game`], and `theta` is dimensionless.
pub fn climate_schedule() -> StepSchedule {
    StepSchedule {
        alpha0: 0.005,
        ..StepSchedule::default()
    }
}
