//! Exact computations on tabular games.
//!
//! Everything here works on the full model: induced chains, stationary
//! distributions, long-run averages, Poisson-equation solves, Q tables,
//! finite-difference policy gradients and exhaustive Blackwell
//! certificates. Games are expected to be small enough for dense linear
//! algebra and, for certificates, exhaustive enumeration.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::game::TabularGame;
use crate::geometry::{steer, GeometryError, Point, SteeringVector, TargetSet};
use crate::learner::{self, ActorState, FeatureMaps};

/// Tolerance on stationarity `d P = d`.
pub const STATIONARY_TOL: f64 = 1e-10;
/// Tolerance on the Poisson residual.
pub const POISSON_TOL: f64 = 1e-10;
/// Largest number of (Player 1, Player 2) deterministic policy pairs the
/// certificate will enumerate.
pub const MAX_ENUMERATION: usize = 1 << 20;

const ROW_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("ergodicity violation: {0}")]
    NotErgodic(String),
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("anchor state {0} has zero stationary mass")]
    AnchorNotRecurrent(usize),
    #[error("linear system is singular: {0}")]
    Singular(String),
    #[error("enumeration of {pairs} policy pairs exceeds the cap of {cap}; use a smaller game")]
    TooLarge { pairs: u128, cap: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Per-state action distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyTable {
    rows: Vec<Vec<f64>>,
}

impl PolicyTable {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, OracleError> {
        let width = rows.first().map(Vec::len).unwrap_or(0);
        for (x, row) in rows.iter().enumerate() {
            let sum: f64 = row.iter().sum();
            if row.len() != width
                || width == 0
                || row.iter().any(|&p| !(p >= 0.0))
                || (sum - 1.0).abs() > ROW_TOL
            {
                return Err(OracleError::InvalidPolicy(format!(
                    "row {x} is not a distribution over {width} actions"
                )));
            }
        }
        Ok(PolicyTable { rows })
    }

    pub fn uniform(num_states: usize, num_actions: usize) -> Self {
        PolicyTable {
            rows: vec![vec![1.0 / num_actions as f64; num_actions]; num_states],
        }
    }

    pub fn deterministic(choice: &[usize], num_actions: usize) -> Self {
        PolicyTable {
            rows: choice
                .iter()
                .map(|&a| {
                    let mut r = vec![0.0; num_actions];
                    r[a] = 1.0;
                    r
                })
                .collect(),
        }
    }

    /// Softmax policy of `actor` under `features`.
    pub fn softmax<F: FeatureMaps<usize> + ?Sized>(
        actor: &ActorState,
        features: &F,
        num_states: usize,
        num_actions: usize,
    ) -> Self {
        PolicyTable {
            rows: (0..num_states)
                .map(|x| learner::policy_probs(actor, &x, num_actions, features))
                .collect(),
        }
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.rows[x]
    }

    pub fn num_states(&self) -> usize {
        self.rows.len()
    }

    pub fn num_actions(&self) -> usize {
        self.rows.first().map(Vec::len).unwrap_or(0)
    }
}

/// Markov chain and expected reward vectors induced by a joint policy.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedChain {
    pub transition: DMatrix<f64>,
    pub rewards: Vec<Point>,
}

impl InducedChain {
    /// `<R_pi(x), lambda>` per state.
    pub fn scalarized(&self, lambda: &[f64]) -> Vec<f64> {
        self.rewards.iter().map(|r| r.dot(lambda)).collect()
    }
}

/// `P_pi(x, x') = sum pi1(u1|x) pi2(u2|x) P(x'|x,u1,u2)` and
/// `R_pi(x) = sum pi1 pi2 R(x,u1,u2)`.
pub fn induced_chain(
    game: &TabularGame,
    pi1: &PolicyTable,
    pi2: &PolicyTable,
) -> Result<InducedChain, OracleError> {
    let n = game.num_states();
    if pi1.num_states() != n || pi2.num_states() != n {
        return Err(OracleError::Dimension(
            "policy tables must cover every state".into(),
        ));
    }
    if pi1.num_actions() != game.num_u1() || pi2.num_actions() != game.num_u2() {
        return Err(OracleError::Dimension(
            "policy width does not match action sets".into(),
        ));
    }
    let mut transition = DMatrix::zeros(n, n);
    let mut rewards = Vec::with_capacity(n);
    for x in 0..n {
        let mut r = Point::zeros(game.reward_dim());
        for (u1, &p1) in pi1.row(x).iter().enumerate() {
            for (u2, &p2) in pi2.row(x).iter().enumerate() {
                let w = p1 * p2;
                if w == 0.0 {
                    continue;
                }
                for (xn, &p) in game.transition_row(x, u1, u2).iter().enumerate() {
                    transition[(x, xn)] += w * p;
                }
                for (acc, v) in r.coords_mut().iter_mut().zip(game.reward(x, u1, u2).iter()) {
                    *acc += w * v;
                }
            }
        }
        rewards.push(r);
    }
    Ok(InducedChain {
        transition,
        rewards,
    })
}

/// Irreducibility and aperiodicity of the support graph of `p`.
pub fn check_ergodic(p: &DMatrix<f64>) -> Result<(), OracleError> {
    let n = p.nrows();
    if n == 0 || p.ncols() != n {
        return Err(OracleError::Dimension(
            "transition matrix must be square".into(),
        ));
    }
    let edge = |a: usize, b: usize| p[(a, b)] > 0.0;
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(a) = stack.pop() {
            for b in 0..n {
                let e = if forward { edge(a, b) } else { edge(b, a) };
                if e && !seen[b] {
                    seen[b] = true;
                    stack.push(b);
                }
            }
        }
        seen
    };
    let fwd = reach(true);
    let bwd = reach(false);
    if let Some(x) = (0..n).find(|&x| !fwd[x] || !bwd[x]) {
        return Err(OracleError::NotErgodic(format!(
            "chain is reducible: state {x} does not communicate with state 0"
        )));
    }
    // period = gcd over edges of level(a) + 1 - level(b), BFS levels from 0
    let mut level = vec![usize::MAX; n];
    level[0] = 0;
    let mut queue = std::collections::VecDeque::from([0]);
    while let Some(a) = queue.pop_front() {
        for b in 0..n {
            if edge(a, b) && level[b] == usize::MAX {
                level[b] = level[a] + 1;
                queue.push_back(b);
            }
        }
    }
    let mut period = 0usize;
    for a in 0..n {
        for b in 0..n {
            if edge(a, b) {
                let diff = (level[a] + 1).abs_diff(level[b]);
                period = gcd(period, diff);
            }
        }
    }
    if period != 1 {
        return Err(OracleError::NotErgodic(format!(
            "chain is periodic with period {period}"
        )));
    }
    Ok(())
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Invariant distribution of an ergodic chain.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    dist: Vec<f64>,
}

impl StationaryDistribution {
    pub fn probabilities(&self) -> &[f64] {
        &self.dist
    }

    /// `max_x |(d P)(x) - d(x)|`.
    pub fn residual(&self, p: &DMatrix<f64>) -> f64 {
        let d = DVector::from_column_slice(&self.dist);
        let dp = p.transpose() * &d;
        (dp - d).amax()
    }
}

/// Solves `d (P - I) = 0`, `sum d = 1` directly.
pub fn stationary_distribution(p: &DMatrix<f64>) -> Result<StationaryDistribution, OracleError> {
    check_ergodic(p)?;
    let n = p.nrows();
    let mut a = p.transpose() - DMatrix::identity(n, n);
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let lu = a.lu();
    let mut d = lu
        .solve(&b)
        .ok_or_else(|| OracleError::Singular("stationary system".into()))?;
    // one step of iterative refinement
    let mut a2 = p.transpose() - DMatrix::identity(n, n);
    for j in 0..n {
        a2[(n - 1, j)] = 1.0;
    }
    let r = &b - &a2 * &d;
    if let Some(corr) = lu.solve(&r) {
        d += corr;
    }
    let dist: Vec<f64> = d.iter().map(|&v| v.max(0.0)).collect();
    let total: f64 = dist.iter().sum();
    let out = StationaryDistribution {
        dist: dist.into_iter().map(|v| v / total).collect(),
    };
    let res = out.residual(p);
    if res > STATIONARY_TOL {
        return Err(OracleError::Singular(format!(
            "stationarity residual {res:e}"
        )));
    }
    Ok(out)
}

/// Power iteration from the uniform distribution; cross-check for
/// [`stationary_distribution`].
pub fn stationary_by_power_iteration(p: &DMatrix<f64>, iterations: usize) -> Vec<f64> {
    let n = p.nrows();
    let pt = p.transpose();
    let mut d = DVector::from_element(n, 1.0 / n as f64);
    for _ in 0..iterations {
        d = &pt * d;
    }
    d.iter().copied().collect()
}

/// `sum_x d(x) R_pi(x)`.
pub fn exact_average_reward(
    d: &StationaryDistribution,
    rewards: &[Point],
) -> Result<Point, OracleError> {
    if d.dist.len() != rewards.len() || rewards.is_empty() {
        return Err(OracleError::Dimension(format!(
            "{} probabilities for {} reward vectors",
            d.dist.len(),
            rewards.len()
        )));
    }
    let mut out = Point::zeros(rewards[0].dim());
    for (w, r) in d.dist.iter().zip(rewards) {
        for (acc, v) in out.coords_mut().iter_mut().zip(r.iter()) {
            *acc += w * v;
        }
    }
    Ok(out)
}

/// Long-run average reward vector of a joint stationary policy.
pub fn average_reward_of(
    game: &TabularGame,
    pi1: &PolicyTable,
    pi2: &PolicyTable,
) -> Result<Point, OracleError> {
    let chain = induced_chain(game, pi1, pi2)?;
    let d = stationary_distribution(&chain.transition)?;
    exact_average_reward(&d, &chain.rewards)
}

/// `(1/t) sum_{n<t} mu P^n R`, the time-averaged expected reward from `mu`.
pub fn cesaro_average(mu: &[f64], p: &DMatrix<f64>, rewards: &[Point], horizon: usize) -> Point {
    let pt = p.transpose();
    let mut dist = DVector::from_column_slice(mu);
    let dim = rewards[0].dim();
    let mut acc = vec![0.0; dim];
    for _ in 0..horizon {
        for (w, r) in dist.iter().zip(rewards) {
            for (a, v) in acc.iter_mut().zip(r.iter()) {
                *a += w * v;
            }
        }
        dist = &pt * dist;
    }
    Point::new(acc.into_iter().map(|v| v / horizon as f64).collect())
}

/// Mean return time to `anchor`, `1 / d(anchor)`.
pub fn expected_recurrence_time(
    d: &StationaryDistribution,
    anchor: usize,
) -> Result<f64, OracleError> {
    match d.dist.get(anchor) {
        Some(&mass) if mass > 0.0 => Ok(1.0 / mass),
        Some(_) => Err(OracleError::AnchorNotRecurrent(anchor)),
        None => Err(OracleError::Dimension(format!(
            "anchor {anchor} out of range"
        ))),
    }
}

/// Differential values `V` (with `V(anchor) = 0`) and gain `g` solving
/// `V + g 1 = r + P V`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonSolution {
    pub values: Vec<f64>,
    pub gain: f64,
    /// Infinity norm of `V + g - r - P V` at the returned solution.
    pub residual: f64,
}

pub fn solve_poisson(
    p: &DMatrix<f64>,
    r: &[f64],
    anchor: usize,
) -> Result<PoissonSolution, OracleError> {
    check_ergodic(p)?;
    let n = p.nrows();
    if r.len() != n || anchor >= n {
        return Err(OracleError::Dimension(
            "reward or anchor does not match chain".into(),
        ));
    }
    let mut a = DMatrix::zeros(n + 1, n + 1);
    let mut b = DVector::zeros(n + 1);
    for x in 0..n {
        for y in 0..n {
            a[(x, y)] = -p[(x, y)];
        }
        a[(x, x)] += 1.0;
        a[(x, n)] = 1.0;
        b[x] = r[x];
    }
    a[(n, anchor)] = 1.0;
    let lu = a.clone().lu();
    let mut sol = lu
        .solve(&b)
        .ok_or_else(|| OracleError::NotErgodic("Poisson system is singular".into()))?;
    let corr = lu.solve(&(&b - &a * &sol));
    if let Some(c) = corr {
        sol += c;
    }
    let values: Vec<f64> = sol.iter().take(n).copied().collect();
    let gain = sol[n];
    let residual = poisson_residual(p, r, &values, gain);
    Ok(PoissonSolution {
        values,
        gain,
        residual,
    })
}

/// `max_x |V(x) + g - r(x) - sum_x' P(x,x') V(x')|`.
pub fn poisson_residual(p: &DMatrix<f64>, r: &[f64], values: &[f64], gain: f64) -> f64 {
    (0..p.nrows())
        .map(|x| {
            let pv: f64 = (0..p.ncols()).map(|y| p[(x, y)] * values[y]).sum();
            (values[x] + gain - r[x] - pv).abs()
        })
        .fold(0.0, f64::max)
}

/// `Q[x][u1][u2] = <R(x,u1,u2), lambda> - g + sum_x' P(x'|x,u1,u2) V(x')`.
pub fn exact_q_values(
    game: &TabularGame,
    poisson: &PoissonSolution,
    lambda: &[f64],
) -> Vec<Vec<Vec<f64>>> {
    (0..game.num_states())
        .map(|x| {
            (0..game.num_u1())
                .map(|u1| {
                    (0..game.num_u2())
                        .map(|u2| {
                            let next: f64 = game
                                .transition_row(x, u1, u2)
                                .iter()
                                .zip(&poisson.values)
                                .map(|(p, v)| p * v)
                                .sum();
                            game.reward(x, u1, u2).dot(lambda) - poisson.gain + next
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// `max_x |sum_u pi(u|x) Q(x,u) - V(x)|`.
pub fn q_consistency_error(
    q: &[Vec<Vec<f64>>],
    pi1: &PolicyTable,
    pi2: &PolicyTable,
    poisson: &PoissonSolution,
) -> f64 {
    q.iter()
        .enumerate()
        .map(|(x, qx)| {
            let mut v = 0.0;
            for (u1, &p1) in pi1.row(x).iter().enumerate() {
                for (u2, &p2) in pi2.row(x).iter().enumerate() {
                    v += p1 * p2 * qx[u1][u2];
                }
            }
            (v - poisson.values[x]).abs()
        })
        .fold(0.0, f64::max)
}

/// Exact quantities for the Player-1 policy gradient against a fixed
/// Player-2 policy.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientInputs {
    pub policy: PolicyTable,
    pub stationary: StationaryDistribution,
    pub poisson: PoissonSolution,
    /// `delta(x, u1) = Q1(x, u1) - V(x)` with `Q1` averaged over Player 2.
    pub td_errors: Vec<Vec<f64>>,
}

pub fn gradient_inputs<F: FeatureMaps<usize> + ?Sized>(
    game: &TabularGame,
    features: &F,
    actor: &ActorState,
    pi2: &PolicyTable,
    lambda: &[f64],
    anchor: usize,
) -> Result<GradientInputs, OracleError> {
    let policy = PolicyTable::softmax(actor, features, game.num_states(), game.num_u1());
    let chain = induced_chain(game, &policy, pi2)?;
    let stationary = stationary_distribution(&chain.transition)?;
    let poisson = solve_poisson(&chain.transition, &chain.scalarized(lambda), anchor)?;
    let q = exact_q_values(game, &poisson, lambda);
    let td_errors = q
        .iter()
        .enumerate()
        .map(|(x, qx)| {
            qx.iter()
                .map(|row| {
                    let q1: f64 = row.iter().zip(pi2.row(x)).map(|(q, p)| q * p).sum();
                    q1 - poisson.values[x]
                })
                .collect()
        })
        .collect();
    Ok(GradientInputs {
        policy,
        stationary,
        poisson,
        td_errors,
    })
}

/// Score-function form `sum_x d(x) sum_u pi(u|x) grad log pi(u|x) delta(x,u)`.
pub fn score_function_gradient<F: FeatureMaps<usize> + ?Sized>(
    game: &TabularGame,
    features: &F,
    actor: &ActorState,
    pi2: &PolicyTable,
    lambda: &[f64],
    anchor: usize,
) -> Result<Vec<f64>, OracleError> {
    let inputs = gradient_inputs(game, features, actor, pi2, lambda, anchor)?;
    let mut grad = vec![0.0; actor.theta.len()];
    for x in 0..game.num_states() {
        let dx = inputs.stationary.probabilities()[x];
        let probs = inputs.policy.row(x);
        for (u, &pu) in probs.iter().enumerate() {
            let w = dx * pu * inputs.td_errors[x][u];
            for (g, s) in grad
                .iter_mut()
                .zip(learner::score_function(&x, u, probs, features))
            {
                *g += w * s;
            }
        }
    }
    Ok(grad)
}

/// `<rbar(pi_theta, pi2), lambda>` computed exactly.
pub fn scalarized_average_reward<F: FeatureMaps<usize> + ?Sized>(
    game: &TabularGame,
    features: &F,
    actor: &ActorState,
    pi2: &PolicyTable,
    lambda: &[f64],
) -> Result<f64, OracleError> {
    let pi1 = PolicyTable::softmax(actor, features, game.num_states(), game.num_u1());
    Ok(average_reward_of(game, &pi1, pi2)?.dot(lambda))
}

/// Central differences of the exact scalarised average reward in each
/// coordinate of `theta`.
pub fn finite_difference_gradient<F: FeatureMaps<usize> + ?Sized>(
    game: &TabularGame,
    features: &F,
    actor: &ActorState,
    pi2: &PolicyTable,
    lambda: &[f64],
    h: f64,
) -> Result<Vec<f64>, OracleError> {
    let mut grad = Vec::with_capacity(actor.theta.len());
    for i in 0..actor.theta.len() {
        let mut plus = actor.clone();
        plus.theta[i] += h;
        let mut minus = actor.clone();
        minus.theta[i] -= h;
        let fp = scalarized_average_reward(game, features, &plus, pi2, lambda)?;
        let fm = scalarized_average_reward(game, features, &minus, pi2, lambda)?;
        grad.push((fp - fm) / (2.0 * h));
    }
    Ok(grad)
}

/// Max-min certificate of the Blackwell condition at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    /// `max_pi1 min_pi2 <rbar(pi1, pi2) - proj, lambda>`; zero when the
    /// point already lies in the target.
    pub value: f64,
    /// Maximising Player-1 action per state.
    pub policy: Vec<usize>,
    pub projection: Point,
    pub lambda: SteeringVector,
    pub inside: bool,
}

/// Long-run average rewards for every pair of deterministic stationary
/// policies, enumerated once and reused across query points.
#[derive(Debug, Clone)]
pub struct CertificateTable {
    num_states: usize,
    num_u1: usize,
    num_p1: usize,
    num_p2: usize,
    averages: Vec<Point>,
}

impl CertificateTable {
    pub fn new(game: &TabularGame) -> Result<Self, OracleError> {
        let n = game.num_states() as u32;
        let num_p1 = (game.num_u1() as u128).pow(n);
        let num_p2 = (game.num_u2() as u128).pow(n);
        let pairs = num_p1 * num_p2;
        if pairs > MAX_ENUMERATION as u128 {
            return Err(OracleError::TooLarge {
                pairs,
                cap: MAX_ENUMERATION,
            });
        }
        let (num_p1, num_p2) = (num_p1 as usize, num_p2 as usize);
        let mut averages = Vec::with_capacity(pairs as usize);
        for i in 0..num_p1 {
            let pi1 = PolicyTable::deterministic(
                &decode(i, game.num_u1(), game.num_states()),
                game.num_u1(),
            );
            for j in 0..num_p2 {
                let pi2 = PolicyTable::deterministic(
                    &decode(j, game.num_u2(), game.num_states()),
                    game.num_u2(),
                );
                averages.push(average_reward_of(game, &pi1, &pi2)?);
            }
        }
        Ok(CertificateTable {
            num_states: game.num_states(),
            num_u1: game.num_u1(),
            num_p1,
            num_p2,
            averages,
        })
    }

    /// All achievable deterministic-pair averages.
    pub fn averages(&self) -> &[Point] {
        &self.averages
    }

    pub fn certify(&self, target: &TargetSet, s: &Point) -> Result<Certificate, OracleError> {
        // any positive tolerance works here: only the zero/non-zero branch matters
        let st = steer(s, target, f64::MIN_POSITIVE)?;
        if st.distance <= 1e-12 {
            return Ok(Certificate {
                value: 0.0,
                policy: vec![0; self.num_states],
                projection: st.projection,
                lambda: SteeringVector::zero(s.dim()),
                inside: true,
            });
        }
        let offset = st.projection.dot(&st.lambda);
        let mut best = (f64::NEG_INFINITY, 0usize);
        for i in 0..self.num_p1 {
            let worst = self.averages[i * self.num_p2..(i + 1) * self.num_p2]
                .iter()
                .map(|r| r.dot(&st.lambda) - offset)
                .fold(f64::INFINITY, f64::min);
            if worst > best.0 {
                best = (worst, i);
            }
        }
        Ok(Certificate {
            value: best.0,
            policy: decode(best.1, self.num_u1, self.num_states),
            projection: st.projection,
            lambda: st.lambda,
            inside: false,
        })
    }
}

fn decode(mut index: usize, radix: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut() {
        *slot = index % radix;
        index /= radix;
    }
    out
}

/// One-shot certificate; prefer [`CertificateTable`] for many points.
pub fn blackwell_certificate(
    game: &TabularGame,
    target: &TargetSet,
    s: &Point,
) -> Result<Certificate, OracleError> {
    CertificateTable::new(game)?.certify(target, s)
}
