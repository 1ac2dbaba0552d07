#![allow(dead_code)]

use approach_core::{Point, TabularGame};
use nalgebra::DMatrix;
use rand::Rng;

/// Random game with every transition probability at least `floor`.
pub fn random_game<R: Rng>(
    rng: &mut R,
    n: usize,
    a1: usize,
    a2: usize,
    k: usize,
    floor: f64,
) -> TabularGame {
    let cells = n * a1 * a2;
    let mut rewards = Vec::with_capacity(cells);
    let mut transitions = Vec::with_capacity(cells * n);
    for _ in 0..cells {
        rewards.push(Point::new(
            (0..k).map(|_| rng.random_range(-1.0..1.0)).collect(),
        ));
        let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let total: f64 = raw.iter().sum();
        let mut row: Vec<f64> = raw
            .iter()
            .map(|v| floor + (1.0 - floor * n as f64) * v / total)
            .collect();
        // push the rounding residue into the largest entry
        let residue = 1.0 - row.iter().sum::<f64>();
        let imax = (0..n).max_by(|&i, &j| row[i].total_cmp(&row[j])).unwrap();
        row[imax] += residue;
        transitions.extend(row);
    }
    TabularGame::new(n, a1, a2, rewards, transitions).expect("random game is ergodic")
}

pub fn random_stochastic<R: Rng>(rng: &mut R, n: usize, floor: f64) -> DMatrix<f64> {
    let mut p = DMatrix::zeros(n, n);
    for i in 0..n {
        let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let total: f64 = raw.iter().sum();
        for j in 0..n {
            p[(i, j)] = floor + (1.0 - floor * n as f64) * raw[j] / total;
        }
    }
    p
}

pub fn random_policy<R: Rng>(rng: &mut R, n: usize, a: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            let raw: Vec<f64> = (0..a).map(|_| 0.05 + rng.random::<f64>()).collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|v| v / total).collect()
        })
        .collect()
}

/// Stationary distribution by repeated squaring of `P`, independent of the
/// library's linear solve.
pub fn stationary_by_squaring(p: &DMatrix<f64>) -> Vec<f64> {
    let mut m = p.clone();
    for _ in 0..60 {
        m = &m * &m;
        for i in 0..m.nrows() {
            let s: f64 = m.row(i).sum();
            for j in 0..m.ncols() {
                m[(i, j)] /= s;
            }
        }
    }
    m.row(0).iter().copied().collect()
}

/// `P_pi` and `R_pi` from explicit triple loops over the game tensors.
pub fn chain_by_hand(
    game: &TabularGame,
    pi1: &[Vec<f64>],
    pi2: &[Vec<f64>],
) -> (DMatrix<f64>, Vec<Vec<f64>>) {
    let n = game.num_states();
    let k = game.reward_dim();
    let mut p = DMatrix::zeros(n, n);
    let mut r = vec![vec![0.0; k]; n];
    for x in 0..n {
        for u1 in 0..game.num_u1() {
            for u2 in 0..game.num_u2() {
                let w = pi1[x][u1] * pi2[x][u2];
                for y in 0..n {
                    p[(x, y)] += w * game.transition_row(x, u1, u2)[y];
                }
                for c in 0..k {
                    r[x][c] += w * game.reward(x, u1, u2)[c];
                }
            }
        }
    }
    (p, r)
}

pub fn average_by_hand(game: &TabularGame, pi1: &[Vec<f64>], pi2: &[Vec<f64>]) -> Vec<f64> {
    let (p, r) = chain_by_hand(game, pi1, pi2);
    let d = stationary_by_squaring(&p);
    let k = game.reward_dim();
    (0..k)
        .map(|c| d.iter().zip(&r).map(|(w, rx)| w * rx[c]).sum())
        .collect()
}

pub fn one_hot_rows(choice: &[usize], a: usize) -> Vec<Vec<f64>> {
    choice
        .iter()
        .map(|&c| {
            let mut row = vec![0.0; a];
            row[c] = 1.0;
            row
        })
        .collect()
}
