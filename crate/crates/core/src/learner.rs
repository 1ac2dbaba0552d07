//! Average-reward actor-critic on a scalarised reward.
//!
//! The actor is a softmax policy over linear scores `<theta, phi(x, u)>`;
//! the critic keeps a linear differential value `V(x) = <rho, psi(x)>` and
//! a gain estimate `g_hat`. Both are driven by the TD error
//! `delta = r - g_hat + V(x') - V(x)`.

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LearnerError {
    #[error("invalid step schedule: {0}")]
    Schedule(String),
}

/// Policy features `phi(x, u)` and value features `psi(x)`.
///
/// Value features depend on the state only: the critic has to evaluate the
/// successor state before the next action is drawn.
pub trait FeatureMaps<S: ?Sized> {
    fn policy_dim(&self) -> usize;
    fn value_dim(&self) -> usize;
    fn policy_features(&self, x: &S, action: usize) -> Vec<f64>;
    fn value_features(&self, x: &S) -> Vec<f64>;
}

/// One-hot over `(x, u)` for the policy and over `x` for the value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TabularFeatures {
    pub num_states: usize,
    pub num_actions: usize,
}

impl TabularFeatures {
    pub fn new(num_states: usize, num_actions: usize) -> Self {
        TabularFeatures {
            num_states,
            num_actions,
        }
    }

    pub fn index(&self, x: usize, action: usize) -> usize {
        x * self.num_actions + action
    }
}

impl FeatureMaps<usize> for TabularFeatures {
    fn policy_dim(&self) -> usize {
        self.num_states * self.num_actions
    }

    fn value_dim(&self) -> usize {
        self.num_states
    }

    fn policy_features(&self, x: &usize, action: usize) -> Vec<f64> {
        let mut f = vec![0.0; self.policy_dim()];
        f[self.index(*x, action)] = 1.0;
        f
    }

    fn value_features(&self, x: &usize) -> Vec<f64> {
        let mut f = vec![0.0; self.num_states];
        f[*x] = 1.0;
        f
    }
}

/// Features for continuous states: a per-action indicator for the policy
/// and `(1, (x - center) / scale)` for the value.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionIndicatorFeatures {
    pub num_actions: usize,
    pub center: Vec<f64>,
    pub scale: Vec<f64>,
}

impl<S: AsRef<[f64]> + ?Sized> FeatureMaps<S> for ActionIndicatorFeatures {
    fn policy_dim(&self) -> usize {
        self.num_actions
    }

    fn value_dim(&self) -> usize {
        1 + self.center.len()
    }

    fn policy_features(&self, _x: &S, action: usize) -> Vec<f64> {
        let mut f = vec![0.0; self.num_actions];
        f[action] = 1.0;
        f
    }

    fn value_features(&self, x: &S) -> Vec<f64> {
        let mut f = Vec::with_capacity(1 + self.center.len());
        f.push(1.0);
        for ((v, c), s) in x.as_ref().iter().zip(&self.center).zip(&self.scale) {
            f.push((v - c) / s);
        }
        f
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActorState {
    pub theta: Vec<f64>,
}

impl ActorState {
    pub fn zeros(dim: usize) -> Self {
        ActorState {
            theta: vec![0.0; dim],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticState {
    pub rho: Vec<f64>,
    pub g_hat: f64,
}

impl CriticState {
    pub fn zeros(dim: usize) -> Self {
        CriticState {
            rho: vec![0.0; dim],
            g_hat: 0.0,
        }
    }

    pub fn value(&self, psi: &[f64]) -> f64 {
        dot(&self.rho, psi)
    }
}

/// `alpha(t) = a0 / (1 + t/t0)^pa`, `beta(t) = b0 / (1 + t/t0)^pb`,
/// `beta_g(t) = ratio * beta(t)`. Exponents in (0.5, 1] make every
/// sequence Robbins-Monro: divergent sum, summable squares.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSchedule {
    pub alpha0: f64,
    pub beta0: f64,
    pub beta_g_ratio: f64,
    pub t0: f64,
    pub alpha_power: f64,
    pub beta_power: f64,
}

impl Default for StepSchedule {
    fn default() -> Self {
        StepSchedule {
            alpha0: 0.05,
            beta0: 0.1,
            beta_g_ratio: 0.1,
            t0: 1000.0,
            alpha_power: 0.8,
            beta_power: 0.6,
        }
    }
}

impl StepSchedule {
    pub fn validate(&self) -> Result<(), LearnerError> {
        for (name, v) in [
            ("alpha0", self.alpha0),
            ("beta0", self.beta0),
            ("beta_g_ratio", self.beta_g_ratio),
            ("t0", self.t0),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(LearnerError::Schedule(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        for (name, p) in [
            ("alpha_power", self.alpha_power),
            ("beta_power", self.beta_power),
        ] {
            if !(p > 0.5 && p <= 1.0) {
                return Err(LearnerError::Schedule(format!(
                    "{name} must lie in (0.5, 1] for Robbins-Monro steps, got {p}"
                )));
            }
        }
        Ok(())
    }

    pub fn alpha(&self, t: u64) -> f64 {
        self.alpha0 / (1.0 + t as f64 / self.t0).powf(self.alpha_power)
    }

    pub fn beta(&self, t: u64) -> f64 {
        self.beta0 / (1.0 + t as f64 / self.t0).powf(self.beta_power)
    }

    pub fn beta_g(&self, t: u64) -> f64 {
        self.beta_g_ratio * self.beta(t)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Softmax over `<theta, phi(x, a)>`, computed with max subtraction.
pub fn policy_probs<S: ?Sized, F: FeatureMaps<S> + ?Sized>(
    actor: &ActorState,
    x: &S,
    num_actions: usize,
    features: &F,
) -> Vec<f64> {
    let scores: Vec<f64> = (0..num_actions)
        .map(|a| dot(&actor.theta, &features.policy_features(x, a)))
        .collect();
    softmax(&scores)
}

pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = p.iter().sum();
    for v in &mut p {
        *v /= total;
    }
    p
}

/// Inverse-CDF draw from `probs`.
pub fn sample_action<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    crate::game::sample_index(probs, rng.random::<f64>())
}

/// `delta = r - g_hat + V(x') - V(x)`.
pub fn td_error(r: f64, critic: &CriticState, psi_x: &[f64], psi_next: &[f64]) -> f64 {
    r - critic.g_hat + critic.value(psi_next) - critic.value(psi_x)
}

/// Semi-gradient TD step: `rho += beta delta psi(x)`, `g_hat += beta_g delta`.
pub fn critic_update(
    critic: &CriticState,
    delta: f64,
    psi_x: &[f64],
    beta: f64,
    beta_g: f64,
) -> CriticState {
    let rho = critic
        .rho
        .iter()
        .zip(psi_x)
        .map(|(r, p)| r + beta * delta * p)
        .collect();
    CriticState {
        rho,
        g_hat: critic.g_hat + beta_g * delta,
    }
}

/// Softmax score `grad log pi(u | x) = phi(x, u) - sum_a pi(a | x) phi(x, a)`.
pub fn score_function<S: ?Sized, F: FeatureMaps<S> + ?Sized>(
    x: &S,
    action: usize,
    probs: &[f64],
    features: &F,
) -> Vec<f64> {
    let mut score = features.policy_features(x, action);
    for (a, &p) in probs.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for (s, f) in score.iter_mut().zip(features.policy_features(x, a)) {
            *s -= p * f;
        }
    }
    score
}

/// `theta += alpha delta grad log pi(u | x)`.
pub fn actor_update<S: ?Sized, F: FeatureMaps<S> + ?Sized>(
    actor: &ActorState,
    x: &S,
    action: usize,
    probs: &[f64],
    delta: f64,
    alpha: f64,
    features: &F,
) -> ActorState {
    if delta == 0.0 {
        return actor.clone();
    }
    let score = score_function(x, action, probs, features);
    ActorState {
        theta: actor
            .theta
            .iter()
            .zip(&score)
            .map(|(t, s)| t + alpha * delta * s)
            .collect(),
    }
}

/// Actor, critic and the global step clock that indexes the schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct ActorCritic {
    pub actor: ActorState,
    pub critic: CriticState,
    pub schedule: StepSchedule,
    pub clock: u64,
}

impl ActorCritic {
    pub fn new(policy_dim: usize, value_dim: usize, schedule: StepSchedule) -> Self {
        ActorCritic {
            actor: ActorState::zeros(policy_dim),
            critic: CriticState::zeros(value_dim),
            schedule,
            clock: 0,
        }
    }

    /// One TD/actor/critic update at the current clock; returns `delta`.
    #[allow(clippy::too_many_arguments)]
    pub fn update<S: ?Sized, F: FeatureMaps<S> + ?Sized>(
        &mut self,
        x: &S,
        action: usize,
        probs: &[f64],
        reward: f64,
        next: &S,
        features: &F,
    ) -> f64 {
        let t = self.clock;
        let psi_x = features.value_features(x);
        let psi_next = features.value_features(next);
        let delta = td_error(reward, &self.critic, &psi_x, &psi_next);
        self.critic = critic_update(
            &self.critic,
            delta,
            &psi_x,
            self.schedule.beta(t),
            self.schedule.beta_g(t),
        );
        self.actor = actor_update(
            &self.actor,
            x,
            action,
            probs,
            delta,
            self.schedule.alpha(t),
            features,
        );
        delta
    }

    pub fn is_finite(&self) -> bool {
        self.actor.theta.iter().all(|v| v.is_finite())
            && self.critic.rho.iter().all(|v| v.is_finite())
            && self.critic.g_hat.is_finite()
    }
}
