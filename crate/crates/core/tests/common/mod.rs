#![allow(dead_code)]

use lda_exact::{Model, ObservationSeq};
use rand::Rng;
use rand_pcg::Pcg64;

pub const TOY_BETA: [[f64; 3]; 2] = [[0.09, 0.05, 0.02], [0.02, 0.05, 0.08]];

pub fn toy(alpha: f64) -> (Model<f64>, ObservationSeq) {
    let model = Model::new(vec![alpha; 3], TOY_BETA.iter().map(|r| r.to_vec()).collect()).unwrap();
    let obs = ObservationSeq::for_model(vec![0, 1], &model).unwrap();
    (model, obs)
}

/// Toy model with the first cause split into two identical halves.
pub fn subdivided() -> (Model<f64>, ObservationSeq) {
    let third = 1.0 / 3.0;
    let rows = TOY_BETA.iter().map(|r| vec![r[0], r[0], r[1], r[2]]).collect();
    let model = Model::new(vec![third / 2.0, third / 2.0, third, third], rows).unwrap();
    let obs = ObservationSeq::for_model(vec![0, 1], &model).unwrap();
    (model, obs)
}

/// `n` positions, `m` causes, `alpha in (0, 2]`, `beta in [0, 1]`, a
/// vocabulary slightly smaller than `n` so tokens repeat.
pub fn random_instance(rng: &mut Pcg64, n: usize, m: usize) -> (Model<f64>, ObservationSeq) {
    let vocab = (n.max(2) - 1).max(1);
    let alpha = (0..m).map(|_| 2.0 - rng.random_range(0.0..2.0)).collect();
    let beta = (0..vocab)
        .map(|_| (0..m).map(|_| rng.random_range(0.0..=1.0)).collect())
        .collect();
    let model = Model::new(alpha, beta).unwrap();
    let tokens = (0..n).map(|_| rng.random_range(0..vocab)).collect();
    let obs = ObservationSeq::for_model(tokens, &model).unwrap();
    (model, obs)
}

pub fn random_small(rng: &mut Pcg64) -> (Model<f64>, ObservationSeq) {
    let n = rng.random_range(0..=6);
    let m = rng.random_range(1..=5);
    random_instance(rng, n, m)
}

/// One vocabulary item per position. Positions are cut into blocks of at
/// most four; a cause emits on a random nonempty part of one block, or of a
/// window of four straddling two neighbouring blocks.
pub fn block_sparse(rng: &mut Pcg64, n: usize, m: usize) -> (Model<f64>, ObservationSeq) {
    let mut blocks = Vec::new();
    let mut start = 0;
    while start < n {
        let len = rng.random_range(1..=4).min(n - start);
        blocks.push((start, len));
        start += len;
    }
    let mut supports: Vec<Vec<usize>> = blocks.iter().map(|&(s, l)| (s..s + l).collect()).collect();
    while supports.len() < m {
        let window: Vec<usize> = if rng.random_bool(0.7) {
            let (s, l) = blocks[rng.random_range(0..blocks.len())];
            (s..s + l).collect()
        } else {
            let s = rng.random_range(0..n.saturating_sub(3).max(1));
            (s..(s + 4).min(n)).collect()
        };
        let part: Vec<usize> = window.iter().copied().filter(|_| rng.random_bool(0.6)).collect();
        supports.push(if part.is_empty() { vec![window[0]] } else { part });
    }
    let m = supports.len();
    let mut beta = vec![vec![0.0; m]; n];
    for (z, sup) in supports.iter().enumerate() {
        for &i in sup {
            beta[i][z] = rng.random_range(0.05..1.0);
        }
    }
    let alpha = (0..m).map(|_| rng.random_range(0.1..2.0)).collect();
    let model = Model::new(alpha, beta).unwrap();
    let obs = ObservationSeq::for_model((0..n).collect(), &model).unwrap();
    (model, obs)
}

pub fn rel(a: f64, b: f64) -> f64 {
    lda_exact::scalar::rel_diff(a, b)
}

pub fn max_abs(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
