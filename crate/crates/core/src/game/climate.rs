use rand::Rng;

use super::{AdversaryOracle, Environment, GameError, RecurrenceSpec, Transition};
use crate::geometry::Point;

/// (temperature in degrees C, relative humidity in %).
pub type ClimateState = [f64; 2];

/// Line segment in state space; parameter 0 is `start`, 1 is `end`.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start: ClimateState,
    pub end: ClimateState,
}

impl Segment {
    pub fn at(&self, s: f64) -> ClimateState {
        [
            self.start[0] + s * (self.end[0] - self.start[0]),
            self.start[1] + s * (self.end[1] - self.start[1]),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClimateParams {
    pub start: ClimateState,
    /// Weight of the adversary's point in the moving average, in (0, 1].
    pub mixing_rate: f64,
    /// Half-width of the uniform per-coordinate disturbance.
    pub noise_scale: f64,
    pub bounds_lower: ClimateState,
    pub bounds_upper: ClimateState,
    pub anchor_center: ClimateState,
    pub anchor_radius: f64,
    /// One segment per controller action.
    pub segments: Vec<Segment>,
}

impl Default for ClimateParams {
    fn default() -> Self {
        // anchor sits inside the comfort box [20, 24] x [40, 60], 0.5 from its warm face
        let center = [23.5, 50.0];
        ClimateParams {
            start: [30.0, 70.0],
            mixing_rate: 0.3,
            noise_scale: 0.5,
            bounds_lower: [10.0, 20.0],
            bounds_upper: [35.0, 80.0],
            anchor_center: center,
            anchor_radius: 0.5,
            segments: vec![
                Segment {
                    start: center,
                    end: [31.5, 54.0],
                },
                Segment {
                    start: center,
                    end: [15.5, 54.0],
                },
                Segment {
                    start: center,
                    end: [23.5, 30.0],
                },
            ],
        }
    }
}

/// Temperature/humidity toy: the state is a moving average pulled toward a
/// point the adversary picks on the segment of the controller's action,
///
/// `x' = clip((1 - g) x + g p + w)`, `w ~ U[-noise, noise]^2`,
///
/// and the reward vector is the new state itself.
#[derive(Debug, Clone)]
pub struct ClimateEnv {
    params: ClimateParams,
    recurrence: RecurrenceSpec,
}

impl ClimateEnv {
    pub fn new(params: ClimateParams) -> Result<Self, GameError> {
        if !(params.mixing_rate > 0.0 && params.mixing_rate <= 1.0) {
            return Err(GameError::Invalid(format!(
                "mixing_rate must lie in (0, 1], got {}",
                params.mixing_rate
            )));
        }
        if !(params.noise_scale >= 0.0) || !params.noise_scale.is_finite() {
            return Err(GameError::Invalid(format!(
                "noise_scale must be non-negative, got {}",
                params.noise_scale
            )));
        }
        if params.segments.is_empty() {
            return Err(GameError::Invalid(
                "at least one segment is required".into(),
            ));
        }
        for axis in 0..2 {
            if !(params.bounds_lower[axis] < params.bounds_upper[axis]) {
                return Err(GameError::Invalid(format!(
                    "empty bounding box on axis {axis}"
                )));
            }
        }
        let inside = |p: &ClimateState| {
            (0..2).all(|a| p[a] >= params.bounds_lower[a] && p[a] <= params.bounds_upper[a])
        };
        if !inside(&params.start) {
            return Err(GameError::Invalid(
                "start lies outside the bounding box".into(),
            ));
        }
        let recurrence = RecurrenceSpec::ball(params.anchor_center.into(), params.anchor_radius)?;
        Ok(ClimateEnv { params, recurrence })
    }

    pub fn params(&self) -> &ClimateParams {
        &self.params
    }

    pub fn recurrence(&self) -> &RecurrenceSpec {
        &self.recurrence
    }

    /// Deterministic part of the dynamics toward point `p`.
    pub fn drift(&self, x: &ClimateState, p: &ClimateState) -> ClimateState {
        let g = self.params.mixing_rate;
        [(1.0 - g) * x[0] + g * p[0], (1.0 - g) * x[1] + g * p[1]]
    }

    fn clip(&self, mut x: ClimateState) -> ClimateState {
        for (a, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.params.bounds_lower[a], self.params.bounds_upper[a]);
        }
        x
    }
}

impl Environment for ClimateEnv {
    type State = ClimateState;
    /// Position along the selected segment, in [0, 1].
    type Adversary = f64;

    fn reward_dim(&self) -> usize {
        2
    }

    fn num_actions(&self) -> usize {
        self.params.segments.len()
    }

    fn reset<R: Rng + ?Sized>(&self, _rng: &mut R) -> ClimateState {
        self.params.start
    }

    fn step<R: Rng + ?Sized>(
        &self,
        x: &ClimateState,
        u1: usize,
        u2: f64,
        rng: &mut R,
    ) -> Result<Transition<ClimateState>, GameError> {
        let segment = self
            .params
            .segments
            .get(u1)
            .ok_or(GameError::InvalidAction {
                action: u1,
                available: self.params.segments.len(),
            })?;
        if !(0.0..=1.0).contains(&u2) {
            return Err(GameError::Invalid(format!(
                "segment parameter {u2} outside [0, 1]"
            )));
        }
        let mut next = self.drift(x, &segment.at(u2));
        let w = self.params.noise_scale;
        for v in next.iter_mut() {
            let u: f64 = rng.random();
            *v += w * (2.0 * u - 1.0);
        }
        let next = self.clip(next);
        Ok(Transition {
            next,
            reward: next.into(),
        })
    }

    fn is_recurrent(&self, x: &ClimateState) -> bool {
        self.recurrence.matches_point(x)
    }

    fn initial_reward(&self, x: &ClimateState) -> Point {
        (*x).into()
    }

    fn state_coords(&self, x: &ClimateState) -> Vec<f64> {
        x.to_vec()
    }

    fn adversary_code(&self, u2: f64) -> f64 {
        u2
    }
}

/// The adversary evaluates points on the active segment directly. The
/// objective is linear along the segment, so only the endpoints matter;
/// `start` is listed first and wins ties.
#[derive(Debug, Clone, Copy, Default)]
pub struct SegmentOracle;

impl AdversaryOracle<ClimateEnv> for SegmentOracle {
    fn candidates(&self, env: &ClimateEnv, _x: &ClimateState, u1: usize) -> Vec<(f64, Point)> {
        match env.params.segments.get(u1) {
            Some(seg) => vec![(0.0, seg.start.into()), (1.0, seg.end.into())],
            None => Vec::new(),
        }
    }
}
