//! The two-loop controller.
//!
//! The outer loop projects the running average reward onto the target,
//! derives a steering direction and freezes it for one recurrence cycle.
//! The inner loop plays that cycle: Player 1 samples from its softmax
//! policy, the adversary answers with its worst-case response along the
//! steering direction, and the actor-critic learns from the scalarised
//! reward. Cycles end when the anchor is re-entered.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::game::{adversary_best_response, AdversaryOracle, Environment, GameError};
use crate::geometry::{steer, GeometryError, Point, SteeringVector, TargetSet, DEFAULT_EPS_PROJ};
use crate::learner::{self, ActorCritic, FeatureMaps, LearnerError, StepSchedule};

pub const DEFAULT_EPISODE_STEP_CAP: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DriverError {
    #[error("invalid run configuration: {0}")]
    Config(String),
    #[error("recurrence time must be at least 1")]
    ZeroRecurrenceTime,
    #[error("non-finite learner parameters in episode {episode} at step {step}")]
    NonFinite { episode: usize, step: u64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
}

/// How the vector reward is reduced to the scalar the learner sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scalarization {
    /// `<r - proj, lambda>`: the plain scalarisation shifted by a constant
    /// per episode, so the gain estimate does not have to re-track the
    /// offset `<proj, lambda>` every time the direction changes.
    #[default]
    Centered,
    /// `<r, lambda>`.
    Raw,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub target: TargetSet,
    pub schedule: StepSchedule,
    pub eps_proj: f64,
    pub max_outer: usize,
    pub max_total_steps: u64,
    pub episode_step_cap: u64,
    pub seed: u64,
    pub scalarization: Scalarization,
    pub record_steps: bool,
    /// Record `(t, rbar, D)` every this many steps.
    pub checkpoint_every: Option<u64>,
}

impl RunConfig {
    pub fn new(target: TargetSet) -> Self {
        RunConfig {
            target,
            schedule: StepSchedule::default(),
            eps_proj: DEFAULT_EPS_PROJ,
            max_outer: usize::MAX,
            max_total_steps: 200_000,
            episode_step_cap: DEFAULT_EPISODE_STEP_CAP,
            seed: 0,
            scalarization: Scalarization::default(),
            record_steps: false,
            checkpoint_every: None,
        }
    }

    pub fn validate(&self) -> Result<(), DriverError> {
        if !(self.eps_proj > 0.0) || !self.eps_proj.is_finite() {
            return Err(DriverError::Config(format!(
                "eps_proj must be positive, got {}",
                self.eps_proj
            )));
        }
        if self.max_outer == 0 || self.max_total_steps == 0 || self.episode_step_cap == 0 {
            return Err(DriverError::Config(
                "step and episode caps must be positive".into(),
            ));
        }
        if self.checkpoint_every == Some(0) {
            return Err(DriverError::Config(
                "checkpoint interval must be positive".into(),
            ));
        }
        self.schedule.validate()?;
        Ok(())
    }
}

/// Incremental mean of reward vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct RunningAverage {
    mean: Point,
    count: u64,
}

impl RunningAverage {
    pub fn empty(dim: usize) -> Self {
        RunningAverage {
            mean: Point::zeros(dim),
            count: 0,
        }
    }

    /// A zero-count average whose mean is used for steering until the
    /// first sample replaces it.
    pub fn seeded(mean: Point) -> Self {
        RunningAverage { mean, count: 0 }
    }

    pub fn mean(&self) -> &Point {
        &self.mean
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// `mean += (r - mean) / (count + 1)`.
    pub fn update(&mut self, r: &[f64]) {
        self.count += 1;
        let n = self.count as f64;
        for (m, v) in self.mean.coords_mut().iter_mut().zip(r) {
            *m += (v - *m) / n;
        }
    }
}

/// `eta = G / tau`.
pub fn close_episode(g: &Point, tau: u64) -> Result<Point, DriverError> {
    if tau == 0 {
        return Err(DriverError::ZeroRecurrenceTime);
    }
    Ok(g.scale(1.0 / tau as f64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    /// 1-based outer iteration.
    pub n: usize,
    pub tau: u64,
    /// Global step count when the episode closed.
    pub t_end: u64,
    pub eta: Point,
    pub lambda: SteeringVector,
    /// Projection of the running average at the start of the episode.
    pub projection: Point,
    pub distance_at_start: f64,
    /// Running average at the end of the episode.
    pub rbar: Point,
    /// `D(rbar, T)` at the end of the episode.
    pub dist: f64,
    /// `<eta - proj, lambda>`; `None` for a leading segment that did not
    /// start at the anchor.
    pub blackwell_inner: Option<f64>,
    /// Closed by the step cap rather than by recurrence.
    pub capped: bool,
    /// Whether any learner parameter moved during the episode.
    pub params_changed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: u64,
    pub n: usize,
    pub state: Vec<f64>,
    pub u1: usize,
    pub u2: f64,
    pub reward: Point,
    pub delta: f64,
    pub g_hat: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub t: u64,
    pub rbar: Point,
    pub dist: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub episodes: Vec<EpisodeRecord>,
    pub steps: Vec<StepRecord>,
    pub checkpoints: Vec<Checkpoint>,
    pub total_steps: u64,
    pub final_average: Point,
    pub final_distance: f64,
    pub learner: ActorCritic,
}

impl RunTrace {
    pub fn capped_episodes(&self) -> impl Iterator<Item = &EpisodeRecord> {
        self.episodes.iter().filter(|e| e.capped)
    }
}

/// Runs the controller until `max_outer` episodes or `max_total_steps`
/// steps, whichever comes first. An episode cut short by the step budget
/// is not recorded.
pub fn run<E, O, F>(
    env: &E,
    oracle: &O,
    features: &F,
    config: &RunConfig,
) -> Result<RunTrace, DriverError>
where
    E: Environment,
    O: AdversaryOracle<E>,
    F: FeatureMaps<E::State> + ?Sized,
{
    config.validate()?;
    if config.target.dim() != env.reward_dim() {
        return Err(DriverError::Config(format!(
            "target has dimension {} but rewards have dimension {}",
            config.target.dim(),
            env.reward_dim()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let num_actions = env.num_actions();
    let mut learner =
        ActorCritic::new(features.policy_dim(), features.value_dim(), config.schedule);

    let mut x = env.reset(&mut rng);
    let mut average = RunningAverage::seeded(env.initial_reward(&x));
    let mut at_anchor = env.is_recurrent(&x);
    let mut t: u64 = 0;
    let mut episodes = Vec::new();
    let mut steps = Vec::new();
    let mut checkpoints = Vec::new();

    'outer: for n in 1..=config.max_outer {
        let st = steer(average.mean(), &config.target, config.eps_proj)?;
        let offset = match config.scalarization {
            Scalarization::Centered => st.projection.dot(&st.lambda),
            Scalarization::Raw => 0.0,
        };
        let frozen = st.lambda.is_zero();
        let started_at_anchor = at_anchor;
        let snapshot = (learner.actor.clone(), learner.critic.clone());
        let mut g = Point::zeros(env.reward_dim());
        let mut tau: u64 = 0;
        let capped = loop {
            if t >= config.max_total_steps {
                break 'outer;
            }
            let probs = learner::policy_probs(&learner.actor, &x, num_actions, features);
            let u1 = learner::sample_action(&probs, &mut rng);
            let u2 = adversary_best_response(
                &oracle.candidates(env, &x, u1),
                &st.projection,
                &st.lambda,
            )?;
            let tr = env.step(&x, u1, u2, &mut rng)?;
            t += 1;
            tau += 1;
            g.accumulate(&tr.reward);
            average.update(&tr.reward);
            let delta = if frozen {
                0.0
            } else {
                let r = st.lambda.scalarize(&tr.reward) - offset;
                learner.update(&x, u1, &probs, r, &tr.next, features)
            };
            learner.clock += 1;
            if !learner.is_finite() {
                return Err(DriverError::NonFinite {
                    episode: n,
                    step: t,
                });
            }
            if config.record_steps {
                steps.push(StepRecord {
                    t,
                    n,
                    state: env.state_coords(&x),
                    u1,
                    u2: env.adversary_code(u2),
                    reward: tr.reward.clone(),
                    delta,
                    g_hat: learner.critic.g_hat,
                });
            }
            if let Some(every) = config.checkpoint_every {
                if t.is_multiple_of(every) {
                    checkpoints.push(Checkpoint {
                        t,
                        rbar: average.mean().clone(),
                        dist: config.target.distance(average.mean())?,
                    });
                }
            }
            x = tr.next;
            at_anchor = env.is_recurrent(&x);
            if at_anchor {
                break false;
            }
            if tau >= config.episode_step_cap {
                log::warn!(
                    "episode {n} hit the step cap of {} without recurrence",
                    config.episode_step_cap
                );
                break true;
            }
        };
        let eta = close_episode(&g, tau)?;
        let blackwell_inner = started_at_anchor.then(|| (&eta - &st.projection).dot(&st.lambda));
        let params_changed = learner.actor != snapshot.0 || learner.critic != snapshot.1;
        let dist = config.target.distance(average.mean())?;
        episodes.push(EpisodeRecord {
            n,
            tau,
            t_end: t,
            eta,
            lambda: st.lambda,
            projection: st.projection,
            distance_at_start: st.distance,
            rbar: average.mean().clone(),
            dist,
            blackwell_inner,
            capped,
            params_changed,
        });
    }

    let final_distance = config.target.distance(average.mean())?;
    Ok(RunTrace {
        episodes,
        steps,
        checkpoints,
        total_steps: t,
        final_average: average.mean().clone(),
        final_distance,
        learner,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{StationaryPairOracle, TabularEnv, TabularGame};
    use crate::learner::TabularFeatures;

    #[test]
    fn running_average_examples() {
        let mut avg = RunningAverage::empty(2);
        avg.update(&[1.0, 0.0]);
        assert_eq!(avg.mean(), &Point::from([1.0, 0.0]));
        assert_eq!(avg.count(), 1);
        avg.update(&[0.0, 1.0]);
        assert_eq!(avg.mean(), &Point::from([0.5, 0.5]));
        let mut avg = RunningAverage::seeded(Point::from([9.0, 9.0]));
        for _ in 0..1000 {
            avg.update(&[2.0, 3.0]);
        }
        assert_eq!(avg.mean(), &Point::from([2.0, 3.0]));
    }

    #[test]
    fn close_episode_examples() {
        assert_eq!(
            close_episode(&Point::from([2.0, 4.0]), 2).unwrap(),
            Point::from([1.0, 2.0])
        );
        assert_eq!(close_episode(&Point::zeros(2), 7).unwrap(), Point::zeros(2));
        assert_eq!(
            close_episode(&Point::zeros(2), 0),
            Err(DriverError::ZeroRecurrenceTime)
        );
    }

    #[test]
    fn single_point_reward_space() {
        let rewards = vec![Point::from([1.0, 0.0]); 4];
        let game = TabularGame::new(1, 2, 2, rewards, vec![1.0; 4]).unwrap();
        let oracle = StationaryPairOracle::new(&game).unwrap();
        let env = TabularEnv::uniform_start(game, 0).unwrap();
        let target = TargetSet::boxed([1.0, 0.0].into(), [1.0, 0.0].into()).unwrap();
        let mut cfg = RunConfig::new(target);
        cfg.max_total_steps = 500;
        let trace = run(&env, &oracle, &TabularFeatures::new(1, 2), &cfg).unwrap();
        assert_eq!(trace.episodes.len(), 500);
        assert!(trace
            .episodes
            .iter()
            .all(|e| e.dist == 0.0 && e.lambda.is_zero() && !e.params_changed));
        assert_eq!(trace.final_average, Point::from([1.0, 0.0]));
    }

    #[test]
    fn invalid_config_rejected() {
        let target = TargetSet::boxed([0.0, 0.0].into(), [1.0, 1.0].into()).unwrap();
        let mut cfg = RunConfig::new(target);
        cfg.eps_proj = 0.0;
        assert!(matches!(cfg.validate(), Err(DriverError::Config(_))));
        cfg.eps_proj = 1e-3;
        cfg.max_total_steps = 0;
        assert!(cfg.validate().is_err());
    }
}
