//! Two-player multi-objective games seen from the controller's side.
//!
//! Player 1 picks from a finite action set; Player 2 is a worst-case
//! adversary that answers each Player-1 action with the response that
//! minimises progress toward the target along the current steering
//! direction. Two environments ship with the crate: a finite tabular game
//! used for exact verification, and a continuous temperature/humidity toy.

mod climate;
pub mod fixtures;
mod tabular;

pub use climate::{ClimateEnv, ClimateParams, ClimateState, Segment, SegmentOracle};
pub(crate) use tabular::sample_index;
pub use tabular::{StationaryPairOracle, TabularEnv, TabularGame};

use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::geometry::{Point, SteeringVector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("action {action} out of range ({available} available)")]
    InvalidAction { action: usize, available: usize },
    #[error("adversary has no candidate responses")]
    NoCandidates,
    #[error("invalid game: {0}")]
    Invalid(String),
    #[error("ergodicity violation: {0}")]
    Ergodicity(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("io: {0}")]
    Io(String),
}

/// One simulator transition.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition<S> {
    pub next: S,
    pub reward: Point,
}

/// Simulator interface the outer/inner loops drive.
pub trait Environment {
    type State: Clone + fmt::Debug;
    /// Player-2 action.
    type Adversary: Copy + fmt::Debug;

    fn reward_dim(&self) -> usize;

    /// Number of Player-1 actions.
    fn num_actions(&self) -> usize;

    /// Draws `x0` from the initial distribution.
    fn reset<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::State;

    fn step<R: Rng + ?Sized>(
        &self,
        x: &Self::State,
        u1: usize,
        u2: Self::Adversary,
        rng: &mut R,
    ) -> Result<Transition<Self::State>, GameError>;

    fn is_recurrent(&self, x: &Self::State) -> bool;

    /// Reward used to seed the running average before any step is taken.
    fn initial_reward(&self, x: &Self::State) -> Point;

    /// Flat numeric view of a state for traces.
    fn state_coords(&self, x: &Self::State) -> Vec<f64>;

    /// Numeric encoding of an adversary action for traces.
    fn adversary_code(&self, u2: Self::Adversary) -> f64;
}

/// Anchor used to cut the trajectory into recurrence cycles.
#[derive(Debug, Clone, PartialEq)]
pub enum RecurrenceSpec {
    /// Exact return to a state index.
    State(usize),
    /// Entry into the closed ball `|x - center| <= radius`.
    Ball { center: Point, radius: f64 },
}

impl RecurrenceSpec {
    pub fn ball(center: Point, radius: f64) -> Result<Self, GameError> {
        if !(radius > 0.0) || !center.is_finite() {
            return Err(GameError::Invalid(format!(
                "recurrence radius must be positive, got {radius}"
            )));
        }
        Ok(RecurrenceSpec::Ball { center, radius })
    }

    pub fn matches_state(&self, x: usize) -> bool {
        match self {
            RecurrenceSpec::State(anchor) => *anchor == x,
            RecurrenceSpec::Ball { .. } => false,
        }
    }

    pub fn matches_point(&self, x: &[f64]) -> bool {
        match self {
            RecurrenceSpec::State(_) => false,
            RecurrenceSpec::Ball { center, radius } => {
                let d2: f64 = center.iter().zip(x).map(|(c, v)| (c - v) * (c - v)).sum();
                d2.sqrt() <= *radius
            }
        }
    }
}

/// Model access Player 2 uses to evaluate `eta(u1, u2)` for its candidate
/// responses. Candidates are returned in tie-break order.
pub trait AdversaryOracle<E: Environment> {
    fn candidates(&self, env: &E, x: &E::State, u1: usize) -> Vec<(E::Adversary, Point)>;
}

const TIE_TOL: f64 = 1e-12;

/// Picks the candidate minimising `<eta - proj, lambda>`. Ties (within
/// 1e-12) go to the earliest candidate, so a zero `lambda` always yields
/// the first one.
pub fn adversary_best_response<A: Copy>(
    candidates: &[(A, Point)],
    proj: &Point,
    lambda: &SteeringVector,
) -> Result<A, GameError> {
    let mut best: Option<(A, f64)> = None;
    for (action, eta) in candidates {
        let value: f64 = eta
            .iter()
            .zip(proj.iter())
            .zip(lambda.iter())
            .map(|((e, p), l)| (e - p) * l)
            .sum();
        match best {
            Some((_, v)) if value >= v - TIE_TOL => {}
            _ => best = Some((*action, value)),
        }
    }
    best.map(|(a, _)| a).ok_or(GameError::NoCandidates)
}
