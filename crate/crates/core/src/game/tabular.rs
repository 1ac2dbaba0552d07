use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;

use super::{AdversaryOracle, Environment, GameError, RecurrenceSpec, Transition};
use crate::geometry::Point;
use crate::oracle::{self, PolicyTable};

const STOCHASTIC_TOL: f64 = 1e-12;

/// Finite game with transition tensor `P[x, u1, u2, x']` and vector reward
/// tensor `R[x, u1, u2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularGame {
    num_states: usize,
    num_u1: usize,
    num_u2: usize,
    reward_dim: usize,
    rewards: Vec<Point>,
    transitions: Vec<f64>,
}

impl TabularGame {
    /// Validates shapes, row-stochasticity and ergodicity of the chain
    /// induced by the uniform joint policy. Uniform-policy ergodicity is a
    /// proxy: it does not prove every stationary joint policy is ergodic.
    pub fn new(
        num_states: usize,
        num_u1: usize,
        num_u2: usize,
        rewards: Vec<Point>,
        transitions: Vec<f64>,
    ) -> Result<Self, GameError> {
        let game = Self::unchecked(num_states, num_u1, num_u2, rewards, transitions)?;
        game.check_ergodic()?;
        Ok(game)
    }

    /// Ergodicity of the chain induced by the uniform joint policy.
    pub fn check_ergodic(&self) -> Result<(), GameError> {
        let uniform1 = PolicyTable::uniform(self.num_states, self.num_u1);
        let uniform2 = PolicyTable::uniform(self.num_states, self.num_u2);
        let chain = oracle::induced_chain(self, &uniform1, &uniform2)
            .map_err(|e| GameError::Invalid(e.to_string()))?;
        oracle::check_ergodic(&chain.transition).map_err(|e| match e {
            oracle::OracleError::NotErgodic(m) => GameError::Ergodicity(m),
            other => GameError::Ergodicity(other.to_string()),
        })
    }

    /// Shape and stochasticity checks only.
    pub fn unchecked(
        num_states: usize,
        num_u1: usize,
        num_u2: usize,
        rewards: Vec<Point>,
        transitions: Vec<f64>,
    ) -> Result<Self, GameError> {
        if num_states == 0 || num_u1 == 0 || num_u2 == 0 {
            return Err(GameError::Invalid("empty state or action set".into()));
        }
        let cells = num_states * num_u1 * num_u2;
        if rewards.len() != cells {
            return Err(GameError::Invalid(format!(
                "expected {cells} reward vectors, got {}",
                rewards.len()
            )));
        }
        if transitions.len() != cells * num_states {
            return Err(GameError::Invalid(format!(
                "expected {} transition entries, got {}",
                cells * num_states,
                transitions.len()
            )));
        }
        let reward_dim = rewards[0].dim();
        if reward_dim < 2 {
            return Err(GameError::Invalid(format!(
                "reward dimension must be at least 2, got {reward_dim}"
            )));
        }
        if let Some(r) = rewards
            .iter()
            .find(|r| r.dim() != reward_dim || !r.is_finite())
        {
            return Err(GameError::Invalid(format!("bad reward vector {r:?}")));
        }
        for (cell, row) in transitions.chunks(num_states).enumerate() {
            if row.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
                return Err(GameError::Invalid(format!(
                    "negative probability in row {cell}"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(GameError::Invalid(format!("row {cell} sums to {sum}")));
            }
        }
        Ok(TabularGame {
            num_states,
            num_u1,
            num_u2,
            reward_dim,
            rewards,
            transitions,
        })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_u1(&self) -> usize {
        self.num_u1
    }

    pub fn num_u2(&self) -> usize {
        self.num_u2
    }

    pub fn reward_dim(&self) -> usize {
        self.reward_dim
    }

    fn cell(&self, x: usize, u1: usize, u2: usize) -> usize {
        (x * self.num_u1 + u1) * self.num_u2 + u2
    }

    pub fn reward(&self, x: usize, u1: usize, u2: usize) -> &Point {
        &self.rewards[self.cell(x, u1, u2)]
    }

    /// `P(. | x, u1, u2)`.
    pub fn transition_row(&self, x: usize, u1: usize, u2: usize) -> &[f64] {
        let c = self.cell(x, u1, u2);
        &self.transitions[c * self.num_states..(c + 1) * self.num_states]
    }

    fn check_actions(&self, u1: usize, u2: usize) -> Result<(), GameError> {
        if u1 >= self.num_u1 {
            return Err(GameError::InvalidAction {
                action: u1,
                available: self.num_u1,
            });
        }
        if u2 >= self.num_u2 {
            return Err(GameError::InvalidAction {
                action: u2,
                available: self.num_u2,
            });
        }
        Ok(())
    }

    /// Samples `x' ~ P(. | x, u1, u2)` and returns it with `R(x, u1, u2)`.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        x: usize,
        u1: usize,
        u2: usize,
        rng: &mut R,
    ) -> Result<Transition<usize>, GameError> {
        if x >= self.num_states {
            return Err(GameError::Invalid(format!("state {x} out of range")));
        }
        self.check_actions(u1, u2)?;
        let next = sample_index(self.transition_row(x, u1, u2), rng.random::<f64>());
        Ok(Transition {
            next,
            reward: self.reward(x, u1, u2).clone(),
        })
    }

    /// Parses the plain-text tensor format: a header `states u1 u2 k`, then
    /// one row per `(x, u1, u2)` in row-major order holding `k` reward
    /// components followed by `states` transition probabilities. Blank lines
    /// and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self, GameError> {
        let game = Self::parse_unchecked(text)?;
        game.check_ergodic()?;
        Ok(game)
    }

    /// [`TabularGame::parse`] without the ergodicity check.
    pub fn parse_unchecked(text: &str) -> Result<Self, GameError> {
        let mut rows = text.lines().enumerate().filter_map(|(i, raw)| {
            let line = raw.split('#').next().unwrap_or("").trim();
            (!line.is_empty()).then_some((i + 1, line))
        });
        let (hline, header) = rows.next().ok_or(GameError::Parse {
            line: 1,
            message: "missing header `states u1 u2 k`".into(),
        })?;
        let dims = parse_numbers::<usize>(header, hline)?;
        let [num_states, num_u1, num_u2, k] = dims[..] else {
            return Err(GameError::Parse {
                line: hline,
                message: format!("header needs 4 integers, found {}", dims.len()),
            });
        };
        let cells = num_states * num_u1 * num_u2;
        let mut rewards = Vec::with_capacity(cells);
        let mut transitions = Vec::with_capacity(cells * num_states);
        for cell in 0..cells {
            let (line, text) = rows.next().ok_or(GameError::Parse {
                line: hline,
                message: format!("expected {cells} data rows, found {cell}"),
            })?;
            let values = parse_numbers::<f64>(text, line)?;
            if values.len() != k + num_states {
                return Err(GameError::Parse {
                    line,
                    message: format!("expected {} values, found {}", k + num_states, values.len()),
                });
            }
            let row = &values[k..];
            let sum: f64 = row.iter().sum();
            if row.iter().any(|&p| p < 0.0) || (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(GameError::Parse {
                    line,
                    message: format!("transition row is not a distribution (sum {sum})"),
                });
            }
            rewards.push(Point::new(values[..k].to_vec()));
            transitions.extend_from_slice(row);
        }
        if let Some((line, _)) = rows.next() {
            return Err(GameError::Parse {
                line,
                message: "unexpected trailing data".into(),
            });
        }
        Self::unchecked(num_states, num_u1, num_u2, rewards, transitions)
    }

    pub fn load(path: &Path) -> Result<Self, GameError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| GameError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn load_unchecked(path: &Path) -> Result<Self, GameError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| GameError::Io(format!("{}: {e}", path.display())))?;
        Self::parse_unchecked(&text)
    }

    /// Serialises in the format accepted by [`TabularGame::parse`]. Values
    /// are written in shortest round-trip form.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{} {} {} {}\n",
            self.num_states, self.num_u1, self.num_u2, self.reward_dim
        );
        for x in 0..self.num_states {
            for u1 in 0..self.num_u1 {
                for u2 in 0..self.num_u2 {
                    let fields: Vec<String> = self
                        .reward(x, u1, u2)
                        .iter()
                        .chain(self.transition_row(x, u1, u2))
                        .map(|v| v.to_string())
                        .collect();
                    let _ = writeln!(out, "{}", fields.join(" "));
                }
            }
        }
        out
    }
}

fn parse_numbers<T: std::str::FromStr>(text: &str, line: usize) -> Result<Vec<T>, GameError> {
    text.split_whitespace()
        .map(|tok| {
            tok.parse::<T>().map_err(|_| GameError::Parse {
                line,
                message: format!("cannot parse `{tok}`"),
            })
        })
        .collect()
}

/// Inverse-CDF lookup; `u` in `[0, 1)`.
pub(crate) fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last_positive = i;
        }
        acc += p;
        if u < acc {
            return i;
        }
    }
    // rounding left u above the final partial sum
    last_positive
}

/// A tabular game together with its initial distribution and anchor state.
#[derive(Debug, Clone)]
pub struct TabularEnv {
    game: TabularGame,
    initial: Vec<f64>,
    anchor: usize,
}

impl TabularEnv {
    pub fn new(game: TabularGame, initial: Vec<f64>, anchor: usize) -> Result<Self, GameError> {
        if initial.len() != game.num_states() {
            return Err(GameError::Invalid(format!(
                "initial distribution has {} entries for {} states",
                initial.len(),
                game.num_states()
            )));
        }
        let sum: f64 = initial.iter().sum();
        if initial.iter().any(|&p| !(p >= 0.0)) || (sum - 1.0).abs() > STOCHASTIC_TOL {
            return Err(GameError::Invalid(format!(
                "initial distribution must sum to 1 (got {sum})"
            )));
        }
        if anchor >= game.num_states() {
            return Err(GameError::Invalid(format!(
                "anchor state {anchor} out of range"
            )));
        }
        Ok(TabularEnv {
            game,
            initial,
            anchor,
        })
    }

    /// Uniform initial distribution.
    pub fn uniform_start(game: TabularGame, anchor: usize) -> Result<Self, GameError> {
        let n = game.num_states();
        Self::new(game, vec![1.0 / n as f64; n], anchor)
    }

    pub fn game(&self) -> &TabularGame {
        &self.game
    }

    pub fn anchor(&self) -> usize {
        self.anchor
    }

    pub fn recurrence(&self) -> RecurrenceSpec {
        RecurrenceSpec::State(self.anchor)
    }

    pub fn initial_distribution(&self) -> &[f64] {
        &self.initial
    }
}

impl Environment for TabularEnv {
    type State = usize;
    type Adversary = usize;

    fn reward_dim(&self) -> usize {
        self.game.reward_dim()
    }

    fn num_actions(&self) -> usize {
        self.game.num_u1()
    }

    fn reset<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_index(&self.initial, rng.random::<f64>())
    }

    fn step<R: Rng + ?Sized>(
        &self,
        x: &usize,
        u1: usize,
        u2: usize,
        rng: &mut R,
    ) -> Result<Transition<usize>, GameError> {
        self.game.sample(*x, u1, u2, rng)
    }

    fn is_recurrent(&self, x: &usize) -> bool {
        *x == self.anchor
    }

    fn initial_reward(&self, x: &usize) -> Point {
        self.game.reward(*x, 0, 0).clone()
    }

    fn state_coords(&self, x: &usize) -> Vec<f64> {
        vec![*x as f64]
    }

    fn adversary_code(&self, u2: usize) -> f64 {
        u2 as f64
    }
}

/// Adversary model for tabular games: `eta(u1, u2)` is the exact long-run
/// average reward when both players repeat `(u1, u2)` in every state.
#[derive(Debug, Clone)]
pub struct StationaryPairOracle {
    eta: Vec<Vec<Point>>,
}

impl StationaryPairOracle {
    pub fn new(game: &TabularGame) -> Result<Self, GameError> {
        let n = game.num_states();
        let mut eta = Vec::with_capacity(game.num_u1());
        for u1 in 0..game.num_u1() {
            let mut row = Vec::with_capacity(game.num_u2());
            for u2 in 0..game.num_u2() {
                let pi1 = PolicyTable::deterministic(&vec![u1; n], game.num_u1());
                let pi2 = PolicyTable::deterministic(&vec![u2; n], game.num_u2());
                let value = oracle::average_reward_of(game, &pi1, &pi2)
                    .map_err(|e| GameError::Ergodicity(e.to_string()))?;
                row.push(value);
            }
            eta.push(row);
        }
        Ok(StationaryPairOracle { eta })
    }

    pub fn eta(&self, u1: usize, u2: usize) -> &Point {
        &self.eta[u1][u2]
    }
}

impl AdversaryOracle<TabularEnv> for StationaryPairOracle {
    fn candidates(&self, _env: &TabularEnv, _x: &usize, u1: usize) -> Vec<(usize, Point)> {
        self.eta[u1].iter().cloned().enumerate().collect()
    }
}
