//! Exact cross-checks of a tabular configuration against its model.

use std::fmt;

use anyhow::{bail, Result};
use approach_core::learner::{self, ActorState};
use approach_core::oracle::{self, CertificateTable, OracleError, PolicyTable};
use approach_core::{Point, TabularFeatures, TabularGame, TargetSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{EnvConfig, ExperimentConfig, VerifyConfig};

pub const STATIONARY_TOL: f64 = 1e-10;
pub const KAC_REL_TOL: f64 = 0.02;
pub const CESARO_TOL: f64 = 1e-3;
pub const CESARO_HORIZON: usize = 100_000;
pub const POISSON_TOL: f64 = 1e-10;
pub const Q_TOL: f64 = 1e-10;
pub const GRADIENT_REL_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    pub measured: f64,
    /// How `measured` is compared with `tolerance`.
    pub relation: &'static str,
    pub tolerance: f64,
    pub note: String,
}

impl Check {
    fn bounded(name: &'static str, measured: f64, tolerance: f64, note: String) -> Self {
        Check {
            name,
            status: if measured < tolerance {
                Status::Pass
            } else {
                Status::Fail
            },
            measured,
            relation: "<",
            tolerance,
            note,
        }
    }

    fn failed(name: &'static str, note: String) -> Self {
        Check {
            name,
            status: Status::Fail,
            measured: f64::NAN,
            relation: "",
            tolerance: f64::NAN,
            note,
        }
    }

    fn skipped(name: &'static str) -> Self {
        Check {
            name,
            status: Status::Skip,
            measured: f64::NAN,
            relation: "",
            tolerance: f64::NAN,
            note: "skipped".into(),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        };
        if self.measured.is_nan() {
            write!(f, "{status} {:<14} {}", self.name, self.note)
        } else {
            write!(
                f,
                "{status} {:<14} {:.3e} {} {:.1e}  {}",
                self.name, self.measured, self.relation, self.tolerance, self.note
            )
        }
    }
}

/// Why `verify` cannot run at all.
#[derive(Debug, Clone, PartialEq)]
pub struct NotTabular;

impl fmt::Display for NotTabular {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("verification requires a tabular game")
    }
}

impl std::error::Error for NotTabular {}

pub fn verify(cfg: &ExperimentConfig) -> Result<Vec<Check>, NotTabular> {
    match &cfg.env {
        EnvConfig::Tabular { game, anchor, .. } => {
            Ok(verify_game(game, *anchor, &cfg.run.target, &cfg.verify))
        }
        EnvConfig::Climate { .. } => Err(NotTabular),
    }
}

const NAMES: [&str; 8] = [
    "ergodicity",
    "stationary",
    "kac",
    "cesaro",
    "poisson",
    "q-consistency",
    "gradient",
    "certificate",
];

pub fn verify_game(
    game: &TabularGame,
    anchor: usize,
    target: &TargetSet,
    v: &VerifyConfig,
) -> Vec<Check> {
    let mut checks = Vec::new();
    if let Err(e) = game.check_ergodic() {
        checks.push(Check::failed(NAMES[0], e.to_string()));
        checks.extend(NAMES[1..].iter().map(|n| Check::skipped(n)));
        return checks;
    }
    checks.push(Check {
        name: NAMES[0],
        status: Status::Pass,
        measured: f64::NAN,
        relation: "",
        tolerance: f64::NAN,
        note: "uniform joint policy induces an irreducible aperiodic chain".into(),
    });
    let mut rng = ChaCha8Rng::seed_from_u64(v.seed);
    let n = game.num_states();
    let pi1 = random_policy(&mut rng, n, game.num_u1());
    let pi2 = random_policy(&mut rng, n, game.num_u2());
    let run = |name: &'static str, f: &mut dyn FnMut() -> Result<Check>| {
        f().unwrap_or_else(|e| Check::failed(name, format!("{e:#}")))
    };

    checks.push(run(NAMES[1], &mut || {
        let chain = oracle::induced_chain(game, &pi1, &pi2)?;
        let d = oracle::stationary_distribution(&chain.transition)?;
        Ok(Check::bounded(
            NAMES[1],
            d.residual(&chain.transition),
            STATIONARY_TOL,
            "|dP - d|_inf".into(),
        ))
    }));
    checks.push(run(NAMES[2], &mut || {
        kac_check(game, anchor, &pi1, &pi2, v.kac_cycles, &mut rng)
    }));
    checks.push(run(NAMES[3], &mut || {
        let chain = oracle::induced_chain(game, &pi1, &pi2)?;
        let exact = oracle::average_reward_of(game, &pi1, &pi2)?;
        let mut mu = vec![0.0; n];
        mu[anchor] = 1.0;
        let ces = oracle::cesaro_average(&mu, &chain.transition, &chain.rewards, CESARO_HORIZON);
        Ok(Check::bounded(
            NAMES[3],
            ces.distance_to(&exact),
            CESARO_TOL,
            format!("time average over {CESARO_HORIZON} steps vs stationary average"),
        ))
    }));
    let (poisson, q) = poisson_checks(game, anchor, v.poisson_chains, &mut rng);
    checks.push(poisson);
    checks.push(q);
    checks.push(run(NAMES[6], &mut || {
        gradient_check(game, anchor, v, &mut rng)
    }));
    checks.push(run(NAMES[7], &mut || {
        certificate_check(game, target, v.certificate_points, &mut rng)
    }));
    checks
}

fn random_policy<R: Rng>(rng: &mut R, n: usize, a: usize) -> PolicyTable {
    let rows = (0..n)
        .map(|_| {
            let raw: Vec<f64> = (0..a).map(|_| 0.05 + rng.random::<f64>()).collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|p| p / total).collect()
        })
        .collect();
    PolicyTable::new(rows).expect("rows are distributions")
}

fn random_direction<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn kac_check(
    game: &TabularGame,
    anchor: usize,
    pi1: &PolicyTable,
    pi2: &PolicyTable,
    cycles: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Check> {
    let chain = oracle::induced_chain(game, pi1, pi2)?;
    let d = oracle::stationary_distribution(&chain.transition)?;
    let expected = oracle::expected_recurrence_time(&d, anchor)?;
    let mut x = anchor;
    let mut steps = 0u64;
    for _ in 0..cycles {
        loop {
            let u1 = learner::sample_action(pi1.row(x), rng);
            let u2 = learner::sample_action(pi2.row(x), rng);
            x = game.sample(x, u1, u2, rng)?.next;
            steps += 1;
            if x == anchor {
                break;
            }
        }
    }
    let mean = steps as f64 / cycles as f64;
    Ok(Check::bounded(
        NAMES[2],
        (mean - expected).abs() / expected,
        KAC_REL_TOL,
        format!("mean return time {mean:.4} over {cycles} cycles vs 1/d = {expected:.4}"),
    ))
}

fn poisson_checks(
    game: &TabularGame,
    anchor: usize,
    chains: usize,
    rng: &mut ChaCha8Rng,
) -> (Check, Check) {
    let mut worst_poisson: f64 = 0.0;
    let mut worst_q: f64 = 0.0;
    for _ in 0..chains {
        let pi1 = random_policy(rng, game.num_states(), game.num_u1());
        let pi2 = random_policy(rng, game.num_states(), game.num_u2());
        let lambda = random_direction(rng, game.reward_dim());
        let result = (|| -> Result<(f64, f64), OracleError> {
            let chain = oracle::induced_chain(game, &pi1, &pi2)?;
            let sol = oracle::solve_poisson(&chain.transition, &chain.scalarized(&lambda), anchor)?;
            let gain = oracle::average_reward_of(game, &pi1, &pi2)?.dot(&lambda);
            let q = oracle::exact_q_values(game, &sol, &lambda);
            Ok((
                sol.residual.max((sol.gain - gain).abs()),
                oracle::q_consistency_error(&q, &pi1, &pi2, &sol),
            ))
        })();
        match result {
            Ok((p, q)) => {
                worst_poisson = worst_poisson.max(p);
                worst_q = worst_q.max(q);
            }
            Err(e) => {
                return (
                    Check::failed(NAMES[4], e.to_string()),
                    Check::skipped(NAMES[5]),
                )
            }
        }
    }
    (
        Check::bounded(
            NAMES[4],
            worst_poisson,
            POISSON_TOL,
            format!("max of residual and gain error over {chains} chains"),
        ),
        Check::bounded(
            NAMES[5],
            worst_q,
            Q_TOL,
            format!("max |sum_u pi Q - V| over {chains} chains"),
        ),
    )
}

fn gradient_check(
    game: &TabularGame,
    anchor: usize,
    v: &VerifyConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Check> {
    let features = TabularFeatures::new(game.num_states(), game.num_u1());
    let mut worst: f64 = 0.0;
    for _ in 0..v.gradient_points {
        let actor = ActorState {
            theta: (0..game.num_states() * game.num_u1())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect(),
        };
        let pi2 = random_policy(rng, game.num_states(), game.num_u2());
        let lambda = random_direction(rng, game.reward_dim());
        let analytic =
            oracle::score_function_gradient(game, &features, &actor, &pi2, &lambda, anchor)?;
        let fd = oracle::finite_difference_gradient(
            game,
            &features,
            &actor,
            &pi2,
            &lambda,
            v.gradient_h,
        )?;
        worst = worst.max(relative_error(&analytic, &fd));
    }
    Ok(Check::bounded(
        NAMES[6],
        worst,
        GRADIENT_REL_TOL,
        format!(
            "score-function vs central differences (h = {:e}) at {} points",
            v.gradient_h, v.gradient_points
        ),
    ))
}

pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let scale = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    // a vanishing gradient is compared in absolute terms
    diff / scale.max(1e-8)
}

/// Samples `count` points outside `target` from the box spanned by the
/// achievable averages and the target's feasible point, inflated by one
/// unit, and returns the smallest certificate value among them.
fn certificate_check(
    game: &TabularGame,
    target: &TargetSet,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Check> {
    let table = CertificateTable::new(game)?;
    let k = game.reward_dim();
    let mut lo = target.feasible_point().coords().to_vec();
    let mut hi = lo.clone();
    for p in table
        .averages()
        .iter()
        .chain(target.bounds().into_iter().flat_map(|(a, b)| [a, b]))
    {
        for c in 0..k {
            lo[c] = lo[c].min(p[c]);
            hi[c] = hi[c].max(p[c]);
        }
    }
    let mut worst = f64::INFINITY;
    let mut worst_at = Point::zeros(k);
    let mut tested = 0;
    let mut attempts = 0;
    while tested < count {
        attempts += 1;
        if attempts > 1000 * count {
            bail!("could not sample points outside the target");
        }
        let s = Point::new(
            (0..k)
                .map(|c| rng.random_range(lo[c] - 1.0..hi[c] + 1.0))
                .collect(),
        );
        let cert = table.certify(target, &s)?;
        if cert.inside {
            continue;
        }
        tested += 1;
        if cert.value < worst {
            worst = cert.value;
            worst_at = s;
        }
    }
    let note = if worst >= 0.0 {
        format!("min over {count} points outside the target; approachable")
    } else {
        format!("negative at {worst_at:?}; target not approachable")
    };
    Ok(Check {
        name: NAMES[7],
        status: if worst >= 0.0 {
            Status::Pass
        } else {
            Status::Fail
        },
        measured: worst,
        relation: ">=",
        tolerance: 0.0,
        note,
    })
}
