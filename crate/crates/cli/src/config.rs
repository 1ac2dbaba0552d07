//! Experiment configuration: a TOML file with one section per concern.
//!
//! Every key is optional; missing keys take the defaults printed by
//! `approach show-config`. Values are kept with their source spans so a
//! failed check can point at the offending line.

use std::fmt;
use std::fmt::Write as _;
use std::ops::Range;
use std::path::{Path, PathBuf};

use approach_core::driver::{RunConfig, Scalarization, DEFAULT_EPISODE_STEP_CAP};
use approach_core::game::{ClimateParams, Segment};
use approach_core::geometry::DEFAULT_EPS_PROJ;
use approach_core::learner::StepSchedule;
use approach_core::{HalfSpace, Point, TabularGame, TargetSet};
use serde::Deserialize;
use toml::Spanned;

/// Bad configuration, reported with exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub file: PathBuf,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{}: {}", self.file.display(), line, self.message),
            None => write!(f, "{}: {}", self.file.display(), self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Granularity {
    Episode,
    Step,
}

#[derive(Debug, Clone)]
pub enum EnvConfig {
    Tabular {
        game_path: PathBuf,
        /// Parsed without the ergodicity check; `run` checks it, `verify`
        /// reports it.
        game: TabularGame,
        anchor: usize,
        /// `None` starts uniformly over states.
        initial: Option<Vec<f64>>,
    },
    Climate {
        params: ClimateParams,
        feature_scale: [f64; 2],
    },
}

impl EnvConfig {
    pub fn reward_dim(&self) -> usize {
        match self {
            EnvConfig::Tabular { game, .. } => game.reward_dim(),
            EnvConfig::Climate { .. } => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub seed: u64,
    pub kac_cycles: usize,
    pub gradient_points: usize,
    pub gradient_h: f64,
    pub certificate_points: usize,
    pub poisson_chains: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 0,
            kac_cycles: 10_000,
            gradient_points: 10,
            gradient_h: 1e-5,
            certificate_points: 100,
            poisson_chains: 20,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub source: PathBuf,
    pub env: EnvConfig,
    pub run: RunConfig,
    pub seed: u64,
    pub seeds: usize,
    /// Zero uses every core.
    pub workers: usize,
    pub out: PathBuf,
    pub granularity: Granularity,
    pub verify: VerifyConfig,
}

impl ExperimentConfig {
    pub fn seed_list(&self) -> Vec<u64> {
        (0..self.seeds as u64)
            .map(|i| self.seed.wrapping_add(i))
            .collect()
    }
}

type S<T> = Option<Spanned<T>>;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    run: Option<Spanned<RawRun>>,
    env: Option<Spanned<RawEnv>>,
    target: Option<Spanned<RawTarget>>,
    learner: Option<Spanned<RawLearner>>,
    driver: Option<Spanned<RawDriver>>,
    verify: Option<Spanned<RawVerify>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    seed: S<i64>,
    seeds: S<i64>,
    workers: S<i64>,
    out: S<String>,
    granularity: S<String>,
    checkpoint_every: S<i64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnv {
    kind: S<String>,
    game: S<String>,
    anchor: S<toml::Value>,
    initial: S<Vec<f64>>,
    start: S<Vec<f64>>,
    mixing_rate: S<f64>,
    noise_scale: S<f64>,
    bounds_lower: S<Vec<f64>>,
    bounds_upper: S<Vec<f64>>,
    anchor_radius: S<f64>,
    segments: S<Vec<Vec<f64>>>,
    feature_scale: S<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTarget {
    kind: S<String>,
    lower: S<Vec<f64>>,
    upper: S<Vec<f64>>,
    normals: S<Vec<Vec<f64>>>,
    offsets: S<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLearner {
    alpha0: S<f64>,
    beta0: S<f64>,
    beta_g_ratio: S<f64>,
    t0: S<f64>,
    alpha_power: S<f64>,
    beta_power: S<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDriver {
    eps_proj: S<f64>,
    max_steps: S<i64>,
    max_episodes: S<i64>,
    episode_step_cap: S<i64>,
    scalarization: S<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVerify {
    seed: S<i64>,
    kac_cycles: S<i64>,
    gradient_points: S<i64>,
    gradient_h: S<f64>,
    certificate_points: S<i64>,
    poisson_chains: S<i64>,
}

struct Ctx<'a> {
    text: &'a str,
    file: &'a Path,
}

impl Ctx<'_> {
    fn line_of(&self, span: &Range<usize>) -> usize {
        let end = span.start.min(self.text.len());
        self.text[..end].matches('\n').count() + 1
    }

    fn err(&self, span: Option<&Range<usize>>, message: impl Into<String>) -> ConfigError {
        ConfigError {
            file: self.file.to_path_buf(),
            line: span.map(|s| self.line_of(s)),
            message: message.into(),
        }
    }

    fn at<T>(&self, value: &Spanned<T>, message: impl Into<String>) -> ConfigError {
        self.err(Some(&value.span()), message)
    }

    fn positive_f64(&self, v: &S<f64>, name: &str, default: f64) -> Result<f64, ConfigError> {
        match v {
            None => Ok(default),
            Some(s) if *s.get_ref() > 0.0 && s.get_ref().is_finite() => Ok(*s.get_ref()),
            Some(s) => Err(self.at(s, format!("{name} must be positive, got {}", s.get_ref()))),
        }
    }

    fn count(&self, v: &S<i64>, name: &str, default: u64, min: i64) -> Result<u64, ConfigError> {
        match v {
            None => Ok(default),
            Some(s) if *s.get_ref() >= min => Ok(*s.get_ref() as u64),
            Some(s) => Err(self.at(
                s,
                format!("{name} must be at least {min}, got {}", s.get_ref()),
            )),
        }
    }

    fn pair(
        &self,
        v: &S<Vec<f64>>,
        name: &str,
        default: [f64; 2],
    ) -> Result<[f64; 2], ConfigError> {
        match v {
            None => Ok(default),
            Some(s) => match s.get_ref()[..] {
                [a, b] if a.is_finite() && b.is_finite() => Ok([a, b]),
                _ => Err(self.at(s, format!("{name} must hold two finite numbers"))),
            },
        }
    }
}

/// Reads and resolves a configuration file. Relative paths inside it are
/// taken relative to the file's directory.
pub fn load(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        file: path.to_path_buf(),
        line: None,
        message: format!("cannot read config: {e}"),
    })?;
    parse(&text, path)
}

pub fn parse(text: &str, path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let ctx = Ctx { text, file: path };
    let raw: RawConfig =
        toml::from_str(text).map_err(|e| ctx.err(e.span().as_ref(), e.message().trim()))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));

    let run_sec = raw.run.as_ref().map(|s| s.get_ref());
    let default_run = RawRun::default();
    let run_raw = run_sec.unwrap_or(&default_run);

    let env = match &raw.env {
        Some(env) => resolve_env(&ctx, env, base)?,
        None => return Err(ctx.err(None, "missing [env] section")),
    };
    let target = match &raw.target {
        Some(t) => resolve_target(&ctx, t)?,
        None => return Err(ctx.err(None, "missing [target] section")),
    };
    if target.dim() != env.reward_dim() {
        let span = raw.target.as_ref().map(|t| t.span());
        return Err(ctx.err(
            span.as_ref(),
            format!(
                "target has dimension {} but rewards have dimension {}",
                target.dim(),
                env.reward_dim()
            ),
        ));
    }

    let mut run = RunConfig::new(target);
    run.schedule = match &raw.learner {
        Some(l) => resolve_schedule(&ctx, l, &env)?,
        None => default_schedule(&env),
    };
    let default_driver = RawDriver::default();
    let driver = raw
        .driver
        .as_ref()
        .map(|d| d.get_ref())
        .unwrap_or(&default_driver);
    run.eps_proj = ctx.positive_f64(&driver.eps_proj, "eps_proj", DEFAULT_EPS_PROJ)?;
    run.max_total_steps = ctx.count(&driver.max_steps, "max_steps", run.max_total_steps, 1)?;
    run.max_outer = match ctx.count(&driver.max_episodes, "max_episodes", 0, 0)? {
        0 => usize::MAX,
        n => n as usize,
    };
    run.episode_step_cap = ctx.count(
        &driver.episode_step_cap,
        "episode_step_cap",
        DEFAULT_EPISODE_STEP_CAP,
        1,
    )?;
    run.scalarization = match &driver.scalarization {
        None => Scalarization::Centered,
        Some(s) => match s.get_ref().as_str() {
            "centered" => Scalarization::Centered,
            "raw" => Scalarization::Raw,
            other => {
                return Err(ctx.at(
                    s,
                    format!("scalarization must be \"centered\" or \"raw\", got \"{other}\""),
                ))
            }
        },
    };
    run.checkpoint_every = match ctx.count(&run_raw.checkpoint_every, "checkpoint_every", 0, 0)? {
        0 => None,
        n => Some(n),
    };

    let seed = ctx.count(&run_raw.seed, "seed", 0, 0)?;
    run.seed = seed;
    let seeds = ctx.count(&run_raw.seeds, "seeds", 1, 1)? as usize;
    let workers = ctx.count(&run_raw.workers, "workers", 0, 0)? as usize;
    let out = match &run_raw.out {
        None => base.join("runs"),
        Some(s) if s.get_ref().is_empty() => return Err(ctx.at(s, "out must not be empty")),
        Some(s) => base.join(s.get_ref()),
    };
    let granularity = match &run_raw.granularity {
        None => Granularity::Episode,
        Some(s) => match s.get_ref().as_str() {
            "episode" => Granularity::Episode,
            "step" => Granularity::Step,
            other => {
                return Err(ctx.at(
                    s,
                    format!("granularity must be \"episode\" or \"step\", got \"{other}\""),
                ))
            }
        },
    };
    run.record_steps = granularity == Granularity::Step;

    let verify = match &raw.verify {
        None => VerifyConfig::default(),
        Some(v) => {
            let v = v.get_ref();
            let d = VerifyConfig::default();
            VerifyConfig {
                seed: ctx.count(&v.seed, "seed", d.seed, 0)?,
                kac_cycles: ctx.count(&v.kac_cycles, "kac_cycles", d.kac_cycles as u64, 1)?
                    as usize,
                gradient_points: ctx.count(
                    &v.gradient_points,
                    "gradient_points",
                    d.gradient_points as u64,
                    1,
                )? as usize,
                gradient_h: ctx.positive_f64(&v.gradient_h, "gradient_h", d.gradient_h)?,
                certificate_points: ctx.count(
                    &v.certificate_points,
                    "certificate_points",
                    d.certificate_points as u64,
                    1,
                )? as usize,
                poisson_chains: ctx.count(
                    &v.poisson_chains,
                    "poisson_chains",
                    d.poisson_chains as u64,
                    1,
                )? as usize,
            }
        }
    };

    Ok(ExperimentConfig {
        source: path.to_path_buf(),
        env,
        run,
        seed,
        seeds,
        workers,
        out,
        granularity,
        verify,
    })
}

fn default_schedule(env: &EnvConfig) -> StepSchedule {
    match env {
        EnvConfig::Tabular { .. } => StepSchedule::default(),
        EnvConfig::Climate { .. } => approach_core::game::fixtures::climate_schedule(),
    }
}

fn resolve_schedule(
    ctx: &Ctx,
    raw: &Spanned<RawLearner>,
    env: &EnvConfig,
) -> Result<StepSchedule, ConfigError> {
    let l = raw.get_ref();
    let d = default_schedule(env);
    let schedule = StepSchedule {
        alpha0: ctx.positive_f64(&l.alpha0, "alpha0", d.alpha0)?,
        beta0: ctx.positive_f64(&l.beta0, "beta0", d.beta0)?,
        beta_g_ratio: ctx.positive_f64(&l.beta_g_ratio, "beta_g_ratio", d.beta_g_ratio)?,
        t0: ctx.positive_f64(&l.t0, "t0", d.t0)?,
        alpha_power: l
            .alpha_power
            .as_ref()
            .map_or(d.alpha_power, |s| *s.get_ref()),
        beta_power: l.beta_power.as_ref().map_or(d.beta_power, |s| *s.get_ref()),
    };
    for (value, name) in [
        (&l.alpha_power, "alpha_power"),
        (&l.beta_power, "beta_power"),
    ] {
        if let Some(s) = value {
            let p = *s.get_ref();
            if !(p > 0.5 && p <= 1.0) {
                return Err(ctx.at(s, format!("{name} must lie in (0.5, 1], got {p}")));
            }
        }
    }
    schedule
        .validate()
        .map_err(|e| ctx.at(raw, e.to_string()))?;
    Ok(schedule)
}

fn resolve_env(ctx: &Ctx, raw: &Spanned<RawEnv>, base: &Path) -> Result<EnvConfig, ConfigError> {
    let e = raw.get_ref();
    let kind = match &e.kind {
        Some(k) => k,
        None => return Err(ctx.at(raw, "[env] needs kind = \"tabular\" or \"climate\"")),
    };
    let forbid = |present: bool, span: Option<Range<usize>>, key: &str, kind: &str| {
        if present {
            Err(ctx.err(
                span.as_ref(),
                format!("{key} does not apply to a {kind} environment"),
            ))
        } else {
            Ok(())
        }
    };
    match kind.get_ref().as_str() {
        "tabular" => {
            for (present, span, key) in [
                (
                    e.start.is_some(),
                    e.start.as_ref().map(|s| s.span()),
                    "start",
                ),
                (
                    e.mixing_rate.is_some(),
                    e.mixing_rate.as_ref().map(|s| s.span()),
                    "mixing_rate",
                ),
                (
                    e.noise_scale.is_some(),
                    e.noise_scale.as_ref().map(|s| s.span()),
                    "noise_scale",
                ),
                (
                    e.segments.is_some(),
                    e.segments.as_ref().map(|s| s.span()),
                    "segments",
                ),
                (
                    e.anchor_radius.is_some(),
                    e.anchor_radius.as_ref().map(|s| s.span()),
                    "anchor_radius",
                ),
                (
                    e.bounds_lower.is_some(),
                    e.bounds_lower.as_ref().map(|s| s.span()),
                    "bounds_lower",
                ),
                (
                    e.bounds_upper.is_some(),
                    e.bounds_upper.as_ref().map(|s| s.span()),
                    "bounds_upper",
                ),
                (
                    e.feature_scale.is_some(),
                    e.feature_scale.as_ref().map(|s| s.span()),
                    "feature_scale",
                ),
            ] {
                forbid(present, span, key, "tabular")?;
            }
            let game_key = e
                .game
                .as_ref()
                .ok_or_else(|| ctx.at(raw, "tabular environment needs game = \"<file>\""))?;
            let game_path = base.join(game_key.get_ref());
            if !game_path.is_file() {
                return Err(ctx.at(
                    game_key,
                    format!("game file {} does not exist", game_path.display()),
                ));
            }
            let game = TabularGame::load_unchecked(&game_path).map_err(|err| match err {
                approach_core::GameError::Parse { line, message } => ConfigError {
                    file: game_path.clone(),
                    line: Some(line),
                    message,
                },
                other => ctx.at(game_key, other.to_string()),
            })?;
            let anchor = match &e.anchor {
                None => 0,
                Some(s) => match s.get_ref() {
                    toml::Value::Integer(i) if *i >= 0 && (*i as usize) < game.num_states() => {
                        *i as usize
                    }
                    _ => {
                        return Err(ctx.at(
                            s,
                            format!("anchor must be a state index below {}", game.num_states()),
                        ))
                    }
                },
            };
            let initial = match &e.initial {
                None => None,
                Some(s) => {
                    let v = s.get_ref();
                    let sum: f64 = v.iter().sum();
                    if v.len() != game.num_states()
                        || v.iter().any(|&p| !(p >= 0.0))
                        || (sum - 1.0).abs() > 1e-9
                    {
                        return Err(ctx.at(
                            s,
                            format!(
                                "initial must be a distribution over {} states",
                                game.num_states()
                            ),
                        ));
                    }
                    Some(v.clone())
                }
            };
            Ok(EnvConfig::Tabular {
                game_path,
                game,
                anchor,
                initial,
            })
        }
        "climate" => {
            forbid(
                e.game.is_some(),
                e.game.as_ref().map(|s| s.span()),
                "game",
                "climate",
            )?;
            forbid(
                e.initial.is_some(),
                e.initial.as_ref().map(|s| s.span()),
                "initial",
                "climate",
            )?;
            let d = ClimateParams::default();
            let anchor_center = match &e.anchor {
                None => d.anchor_center,
                Some(s) => match s.get_ref().as_array().map(|a| {
                    a.iter()
                        .map(|v| v.as_float().or(v.as_integer().map(|i| i as f64)))
                        .collect::<Option<Vec<f64>>>()
                }) {
                    Some(Some(v)) if v.len() == 2 => [v[0], v[1]],
                    _ => return Err(ctx.at(s, "anchor must be a point [temperature, humidity]")),
                },
            };
            let segments = match &e.segments {
                None => d.segments.clone(),
                Some(s) => {
                    let mut out = Vec::new();
                    for row in s.get_ref() {
                        match row[..] {
                            [a, b, c, e] => out.push(Segment {
                                start: [a, b],
                                end: [c, e],
                            }),
                            _ => return Err(ctx.at(s, "each segment must be [x0, y0, x1, y1]")),
                        }
                    }
                    out
                }
            };
            let params = ClimateParams {
                start: ctx.pair(&e.start, "start", d.start)?,
                mixing_rate: e
                    .mixing_rate
                    .as_ref()
                    .map_or(d.mixing_rate, |s| *s.get_ref()),
                noise_scale: e
                    .noise_scale
                    .as_ref()
                    .map_or(d.noise_scale, |s| *s.get_ref()),
                bounds_lower: ctx.pair(&e.bounds_lower, "bounds_lower", d.bounds_lower)?,
                bounds_upper: ctx.pair(&e.bounds_upper, "bounds_upper", d.bounds_upper)?,
                anchor_center,
                anchor_radius: e
                    .anchor_radius
                    .as_ref()
                    .map_or(d.anchor_radius, |s| *s.get_ref()),
                segments,
            };
            approach_core::ClimateEnv::new(params.clone()).map_err(|err| {
                let span = match err.to_string() {
                    m if m.contains("mixing_rate") => e.mixing_rate.as_ref().map(|s| s.span()),
                    m if m.contains("noise_scale") => e.noise_scale.as_ref().map(|s| s.span()),
                    m if m.contains("radius") => e.anchor_radius.as_ref().map(|s| s.span()),
                    m if m.contains("segment") => e.segments.as_ref().map(|s| s.span()),
                    m if m.contains("start") => e.start.as_ref().map(|s| s.span()),
                    _ => None,
                };
                ctx.err(Some(&span.unwrap_or_else(|| raw.span())), err.to_string())
            })?;
            let feature_scale = ctx.pair(&e.feature_scale, "feature_scale", [5.0, 10.0])?;
            if feature_scale.iter().any(|&v| !(v > 0.0)) {
                let span = e.feature_scale.as_ref().map(|s| s.span());
                return Err(ctx.err(span.as_ref(), "feature_scale entries must be positive"));
            }
            Ok(EnvConfig::Climate {
                params,
                feature_scale,
            })
        }
        other => Err(ctx.at(
            kind,
            format!("env kind must be \"tabular\" or \"climate\", got \"{other}\""),
        )),
    }
}

fn resolve_target(ctx: &Ctx, raw: &Spanned<RawTarget>) -> Result<TargetSet, ConfigError> {
    let t = raw.get_ref();
    let kind = t
        .kind
        .as_ref()
        .map(|k| k.get_ref().as_str())
        .unwrap_or("box");
    match kind {
        "box" => {
            let lower = t
                .lower
                .as_ref()
                .ok_or_else(|| ctx.at(raw, "box target needs lower = [...]"))?;
            let upper = t
                .upper
                .as_ref()
                .ok_or_else(|| ctx.at(raw, "box target needs upper = [...]"))?;
            if lower.get_ref().len() != upper.get_ref().len() {
                return Err(ctx.at(upper, "lower and upper must have the same length"));
            }
            TargetSet::boxed(
                Point::new(lower.get_ref().clone()),
                Point::new(upper.get_ref().clone()),
            )
            .map_err(|e| ctx.at(lower, e.to_string()))
        }
        "polytope" => {
            let normals = t
                .normals
                .as_ref()
                .ok_or_else(|| ctx.at(raw, "polytope target needs normals = [[...], ...]"))?;
            let offsets = t
                .offsets
                .as_ref()
                .ok_or_else(|| ctx.at(raw, "polytope target needs offsets = [...]"))?;
            if normals.get_ref().len() != offsets.get_ref().len() {
                return Err(ctx.at(offsets, "normals and offsets must have the same length"));
            }
            let mut halfspaces = Vec::new();
            for (n, &b) in normals.get_ref().iter().zip(offsets.get_ref()) {
                halfspaces.push(
                    HalfSpace::new(Point::new(n.clone()), b)
                        .map_err(|e| ctx.at(normals, e.to_string()))?,
                );
            }
            TargetSet::polytope(halfspaces).map_err(|e| ctx.at(normals, e.to_string()))
        }
        other => {
            let kind = t.kind.as_ref().expect("non-default kind was given");
            Err(ctx.at(
                kind,
                format!("target kind must be \"box\" or \"polytope\", got \"{other}\""),
            ))
        }
    }
}

/// Resolved configuration in the same format [`parse`] reads.
pub fn render(cfg: &ExperimentConfig) -> String {
    let mut out = String::new();
    let r = &cfg.run;
    let _ = writeln!(out, "[run]");
    let _ = writeln!(out, "seed = {}", cfg.seed);
    let _ = writeln!(out, "seeds = {}", cfg.seeds);
    let _ = writeln!(out, "workers = {}", cfg.workers);
    let _ = writeln!(out, "out = {:?}", cfg.out.display().to_string());
    let gran = match cfg.granularity {
        Granularity::Episode => "episode",
        Granularity::Step => "step",
    };
    let _ = writeln!(out, "granularity = \"{gran}\"");
    let _ = writeln!(
        out,
        "checkpoint_every = {}",
        r.checkpoint_every.unwrap_or(0)
    );
    let _ = writeln!(out, "\n[env]");
    match &cfg.env {
        EnvConfig::Tabular {
            game_path,
            anchor,
            initial,
            ..
        } => {
            let _ = writeln!(out, "kind = \"tabular\"");
            let _ = writeln!(out, "game = {:?}", game_path.display().to_string());
            let _ = writeln!(out, "anchor = {anchor}");
            if let Some(init) = initial {
                let _ = writeln!(out, "initial = {}", floats(init));
            }
        }
        EnvConfig::Climate {
            params,
            feature_scale,
        } => {
            let _ = writeln!(out, "kind = \"climate\"");
            let _ = writeln!(out, "start = {}", floats(&params.start));
            let _ = writeln!(out, "mixing_rate = {:?}", params.mixing_rate);
            let _ = writeln!(out, "noise_scale = {:?}", params.noise_scale);
            let _ = writeln!(out, "bounds_lower = {}", floats(&params.bounds_lower));
            let _ = writeln!(out, "bounds_upper = {}", floats(&params.bounds_upper));
            let _ = writeln!(out, "anchor = {}", floats(&params.anchor_center));
            let _ = writeln!(out, "anchor_radius = {:?}", params.anchor_radius);
            let segs: Vec<String> = params
                .segments
                .iter()
                .map(|s| floats(&[s.start[0], s.start[1], s.end[0], s.end[1]]))
                .collect();
            let _ = writeln!(out, "segments = [{}]", segs.join(", "));
            let _ = writeln!(out, "feature_scale = {}", floats(feature_scale));
        }
    }
    let _ = writeln!(out, "\n[target]");
    match r.target.bounds() {
        Some((lo, hi)) => {
            let _ = writeln!(out, "kind = \"box\"");
            let _ = writeln!(out, "lower = {}", floats(lo));
            let _ = writeln!(out, "upper = {}", floats(hi));
        }
        None => {
            let _ = writeln!(out, "kind = \"polytope\"");
            let normals: Vec<String> = r
                .target
                .halfspaces()
                .iter()
                .map(|h| floats(h.normal()))
                .collect();
            let offsets: Vec<f64> = r.target.halfspaces().iter().map(|h| h.offset()).collect();
            let _ = writeln!(out, "normals = [{}]", normals.join(", "));
            let _ = writeln!(out, "offsets = {}", floats(&offsets));
        }
    }
    let s = &r.schedule;
    let _ = writeln!(out, "\n[learner]");
    let _ = writeln!(out, "alpha0 = {:?}", s.alpha0);
    let _ = writeln!(out, "beta0 = {:?}", s.beta0);
    let _ = writeln!(out, "beta_g_ratio = {:?}", s.beta_g_ratio);
    let _ = writeln!(out, "t0 = {:?}", s.t0);
    let _ = writeln!(out, "alpha_power = {:?}", s.alpha_power);
    let _ = writeln!(out, "beta_power = {:?}", s.beta_power);
    let _ = writeln!(out, "\n[driver]");
    let _ = writeln!(out, "eps_proj = {:?}", r.eps_proj);
    let _ = writeln!(out, "max_steps = {}", r.max_total_steps);
    let max_episodes = if r.max_outer == usize::MAX {
        0
    } else {
        r.max_outer
    };
    let _ = writeln!(out, "max_episodes = {max_episodes}");
    let _ = writeln!(out, "episode_step_cap = {}", r.episode_step_cap);
    let scal = match r.scalarization {
        Scalarization::Centered => "centered",
        Scalarization::Raw => "raw",
    };
    let _ = writeln!(out, "scalarization = \"{scal}\"");
    let v = &cfg.verify;
    let _ = writeln!(out, "\n[verify]");
    let _ = writeln!(out, "seed = {}", v.seed);
    let _ = writeln!(out, "kac_cycles = {}", v.kac_cycles);
    let _ = writeln!(out, "gradient_points = {}", v.gradient_points);
    let _ = writeln!(out, "gradient_h = {:?}", v.gradient_h);
    let _ = writeln!(out, "certificate_points = {}", v.certificate_points);
    let _ = writeln!(out, "poisson_chains = {}", v.poisson_chains);
    out
}

fn floats(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
    format!("[{}]", items.join(", "))
}
