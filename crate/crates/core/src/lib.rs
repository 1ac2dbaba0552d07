//! Multi-objective control by approachability.
//!
//! A vector-valued reward is steered into a convex target set: the running
//! average is projected onto the target, the direction to the projection
//! scalarises the reward, and an average-reward actor-critic learns against
//! a worst-case adversary between visits to an anchor state. The [`oracle`]
//! module computes the corresponding exact quantities on small tabular games.

pub mod driver;
pub mod game;
pub mod geometry;
pub mod learner;
pub mod oracle;

pub use driver::{run, EpisodeRecord, RunConfig, RunTrace, RunningAverage, Scalarization};
pub use game::{
    AdversaryOracle, ClimateEnv, ClimateParams, Environment, GameError, RecurrenceSpec,
    SegmentOracle, StationaryPairOracle, TabularEnv, TabularGame,
};
pub use geometry::{HalfSpace, Point, SteeringVector, TargetSet};
pub use learner::{
    ActionIndicatorFeatures, ActorCritic, FeatureMaps, StepSchedule, TabularFeatures,
};
