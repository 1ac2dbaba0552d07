//! Multi-seed runs and their CSV output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use approach_core::driver::{run, DriverError, RunTrace};
use approach_core::game::fixtures;
use approach_core::learner::ActionIndicatorFeatures;
use approach_core::{ClimateEnv, SegmentOracle, StationaryPairOracle, TabularEnv, TabularFeatures};
use rayon::prelude::*;

use crate::config::{ConfigError, EnvConfig, ExperimentConfig, Granularity};

/// Environment, adversary model and features, built once and shared by all
/// seeds.
pub enum Built {
    Tabular {
        env: TabularEnv,
        oracle: StationaryPairOracle,
        features: TabularFeatures,
    },
    Climate {
        env: ClimateEnv,
        features: ActionIndicatorFeatures,
    },
}

impl Built {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self, ConfigError> {
        let fail = |message: String| ConfigError {
            file: cfg.source.clone(),
            line: None,
            message,
        };
        match &cfg.env {
            EnvConfig::Tabular {
                game_path,
                game,
                anchor,
                initial,
            } => {
                game.check_ergodic()
                    .map_err(|e| fail(format!("{}: {e}", game_path.display())))?;
                let oracle = StationaryPairOracle::new(game).map_err(|e| fail(e.to_string()))?;
                let env = match initial {
                    Some(init) => TabularEnv::new(game.clone(), init.clone(), *anchor),
                    None => TabularEnv::uniform_start(game.clone(), *anchor),
                }
                .map_err(|e| fail(e.to_string()))?;
                let features = TabularFeatures::new(game.num_states(), game.num_u1());
                Ok(Built::Tabular {
                    env,
                    oracle,
                    features,
                })
            }
            EnvConfig::Climate {
                params,
                feature_scale,
            } => {
                let env = ClimateEnv::new(params.clone()).map_err(|e| fail(e.to_string()))?;
                let mut features = fixtures::climate_features(params);
                features.scale = feature_scale.to_vec();
                Ok(Built::Climate { env, features })
            }
        }
    }

    pub fn run_seed(&self, cfg: &ExperimentConfig, seed: u64) -> Result<RunTrace, DriverError> {
        let mut rc = cfg.run.clone();
        rc.seed = seed;
        match self {
            Built::Tabular {
                env,
                oracle,
                features,
            } => run(env, oracle, features, &rc),
            Built::Climate { env, features } => run(env, &SegmentOracle, features, &rc),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SeedOutcome {
    pub seed: u64,
    pub trace_path: PathBuf,
    pub final_distance: f64,
    pub episodes: usize,
    pub steps: u64,
    pub wall_time: f64,
}

pub fn trace_file_name(seed: u64) -> String {
    format!("trace_seed{seed}.csv")
}

/// Runs every configured seed, writes one trace per seed and
/// `summary.csv`, and fails if any seed aborted or hit the recurrence cap.
pub fn run_experiment(cfg: &ExperimentConfig, built: &Built) -> Result<Vec<SeedOutcome>> {
    std::fs::create_dir_all(&cfg.out)
        .with_context(|| format!("cannot create {}", cfg.out.display()))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .context("cannot start worker pool")?;
    let seeds = cfg.seed_list();
    log::info!("running {} seed(s) into {}", seeds.len(), cfg.out.display());
    let results: Vec<Result<SeedOutcome>> = pool.install(|| {
        seeds
            .par_iter()
            .map(|&seed| run_one(cfg, built, seed))
            .collect()
    });

    let mut outcomes = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(o) => outcomes.push(o),
            Err(e) => failures.push(format!("{e:#}")),
        }
    }
    write_summary(&cfg.out.join("summary.csv"), &outcomes)?;
    if !failures.is_empty() {
        bail!("{}", failures.join("\n"));
    }
    Ok(outcomes)
}

fn run_one(cfg: &ExperimentConfig, built: &Built, seed: u64) -> Result<SeedOutcome> {
    let start = Instant::now();
    let trace = built
        .run_seed(cfg, seed)
        .with_context(|| format!("seed {seed}"))?;
    let wall_time = start.elapsed().as_secs_f64();
    let trace_path = cfg.out.join(trace_file_name(seed));
    let text = match cfg.granularity {
        Granularity::Episode => episode_csv(&trace),
        Granularity::Step => step_csv(&trace),
    };
    std::fs::write(&trace_path, text)
        .with_context(|| format!("cannot write {}", trace_path.display()))?;
    if !trace.checkpoints.is_empty() {
        let path = cfg.out.join(format!("checkpoints_seed{seed}.csv"));
        std::fs::write(&path, checkpoint_csv(&trace))
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    log::info!(
        "seed {seed}: {} episodes, {} steps, final distance {:.4e}, {wall_time:.2}s",
        trace.episodes.len(),
        trace.total_steps,
        trace.final_distance
    );
    if let Some(e) = trace.capped_episodes().next() {
        bail!(
            "seed {seed}: episode {} hit the recurrence cap of {} steps (trace in {})",
            e.n,
            cfg.run.episode_step_cap,
            trace_path.display()
        );
    }
    Ok(SeedOutcome {
        seed,
        trace_path,
        final_distance: trace.final_distance,
        episodes: trace.episodes.len(),
        steps: trace.total_steps,
        wall_time,
    })
}

fn numbered(prefix: &str, k: usize) -> impl Iterator<Item = String> + '_ {
    (1..=k).map(move |i| format!("{prefix}_{i}"))
}

fn push_all(row: &mut Vec<String>, values: &[f64]) {
    row.extend(values.iter().map(|v| v.to_string()));
}

/// One row per completed episode.
pub fn episode_csv(trace: &RunTrace) -> String {
    let k = trace.final_average.dim();
    let mut header = vec!["n".to_string(), "tau".to_string()];
    header.extend(numbered("eta", k));
    header.extend(numbered("lambda", k));
    header.extend(numbered("rbar", k));
    header.push("dist".into());
    header.push("blackwell_inner".into());
    let mut out = header.join(",");
    out.push('\n');
    for e in &trace.episodes {
        let mut row = vec![e.n.to_string(), e.tau.to_string()];
        push_all(&mut row, &e.eta);
        push_all(&mut row, &e.lambda);
        push_all(&mut row, &e.rbar);
        row.push(e.dist.to_string());
        row.push(e.blackwell_inner.map(|v| v.to_string()).unwrap_or_default());
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

/// One row per simulator step.
pub fn step_csv(trace: &RunTrace) -> String {
    let k = trace.final_average.dim();
    let m = trace.steps.first().map_or(1, |s| s.state.len());
    let mut header = vec!["t".to_string(), "n".to_string()];
    header.extend(numbered("x", m));
    header.push("u1".into());
    header.push("u2".into());
    header.extend(numbered("r", k));
    header.push("delta".into());
    header.push("g_hat".into());
    let mut out = header.join(",");
    out.push('\n');
    for s in &trace.steps {
        let mut row = vec![s.t.to_string(), s.n.to_string()];
        push_all(&mut row, &s.state);
        row.push(s.u1.to_string());
        row.push(s.u2.to_string());
        push_all(&mut row, &s.reward);
        row.push(s.delta.to_string());
        row.push(s.g_hat.to_string());
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

pub fn checkpoint_csv(trace: &RunTrace) -> String {
    let k = trace.final_average.dim();
    let mut header = vec!["t".to_string()];
    header.extend(numbered("rbar", k));
    header.push("dist".into());
    let mut out = header.join(",");
    out.push('\n');
    for c in &trace.checkpoints {
        let mut row = vec![c.t.to_string()];
        push_all(&mut row, &c.rbar);
        row.push(c.dist.to_string());
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

fn write_summary(path: &Path, outcomes: &[SeedOutcome]) -> Result<()> {
    let mut out = String::from("seed,final_dist,episodes,steps,wall_time_s\n");
    for o in outcomes {
        let _ = writeln!(
            out,
            "{},{},{},{},{:.3}",
            o.seed, o.final_distance, o.episodes, o.steps, o.wall_time
        );
    }
    std::fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))
}
