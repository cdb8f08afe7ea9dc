//! Fixtures and an independent reference implementation shared by the
//! integration and acceptance tests. Nothing here calls into the library's
//! statistics code.

#![allow(dead_code)]

use eat_audit::eat::EatInput;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Vectors = Vec<Vec<f64>>;

#[derive(Debug, Clone)]
pub struct Fixture {
    pub x: Vectors,
    pub y: Vectors,
    pub a: Vectors,
    pub b: Vectors,
}

impl Fixture {
    pub fn input(&self) -> EatInput {
        EatInput::new(
            self.x.clone(),
            self.y.clone(),
            self.a.clone(),
            self.b.clone(),
        )
        .expect("valid fixture")
    }
}

/// Two targets per side in the plane; d ≈ 1.1094 and exact p = 1/3.
pub fn two_plus_two() -> Fixture {
    Fixture {
        x: vec![vec![1.0, 0.0], vec![0.6, 0.8]],
        y: vec![vec![0.0, 1.0], vec![0.8, 0.6]],
        a: vec![vec![1.0, 0.0]],
        b: vec![vec![0.0, 1.0]],
    }
}

/// One target per side, each aligned with one attribute; d = 2 and p = 1/2.
pub fn one_plus_one() -> Fixture {
    Fixture {
        x: vec![vec![1.0, 0.0]],
        y: vec![vec![0.0, 1.0]],
        a: vec![vec![1.0, 0.0]],
        b: vec![vec![0.0, 1.0]],
    }
}

fn random_vectors(rng: &mut ChaCha8Rng, count: usize, dim: usize) -> Vectors {
    (0..count)
        .map(|_| loop {
            let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            if v.iter().map(|x| x * x).sum::<f64>() > 1e-6 {
                break v;
            }
        })
        .collect()
}

/// A random instance with `n` targets per side.
pub fn random_fixture(rng: &mut ChaCha8Rng, n: usize) -> Fixture {
    let dim = rng.gen_range(2..=8);
    let na = rng.gen_range(1..=4);
    let nb = rng.gen_range(1..=4);
    Fixture {
        x: random_vectors(rng, n, dim),
        y: random_vectors(rng, n, dim),
        a: random_vectors(rng, na, dim),
        b: random_vectors(rng, nb, dim),
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn naive_cos(u: &[f64], v: &[f64]) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    dot / (nu * nv)
}

fn naive_s(w: &[f64], a: &Vectors, b: &Vectors) -> f64 {
    let ma = a.iter().map(|v| naive_cos(w, v)).sum::<f64>() / a.len() as f64;
    let mb = b.iter().map(|v| naive_cos(w, v)).sum::<f64>() / b.len() as f64;
    ma - mb
}

/// Reference effect size with population standard deviation.
pub fn naive_d(f: &Fixture) -> f64 {
    let sx: Vec<f64> = f.x.iter().map(|w| naive_s(w, &f.a, &f.b)).collect();
    let sy: Vec<f64> = f.y.iter().map(|w| naive_s(w, &f.a, &f.b)).collect();
    let all: Vec<f64> = sx.iter().chain(&sy).copied().collect();
    let mean = all.iter().sum::<f64>() / all.len() as f64;
    let var = all.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / all.len() as f64;
    let mx = sx.iter().sum::<f64>() / sx.len() as f64;
    let my = sy.iter().sum::<f64>() / sy.len() as f64;
    (mx - my) / var.sqrt()
}

/// Reference exact p: walks every bitmask over the pooled targets and keeps
/// those with exactly n bits set. Returns (hits, partitions).
pub fn naive_exact_p(f: &Fixture) -> (u64, u64) {
    let n = f.x.len();
    let s: Vec<f64> =
        f.x.iter()
            .chain(&f.y)
            .map(|w| naive_s(w, &f.a, &f.b))
            .collect();
    let total: f64 = s.iter().sum();
    let observed = 2.0 * s[..n].iter().sum::<f64>() - total;
    let tol = 1e-12 * (1.0 + s.iter().map(|v| v.abs()).sum::<f64>());
    let (mut hits, mut count) = (0u64, 0u64);
    for mask in 0u32..(1 << (2 * n)) {
        if mask.count_ones() as usize != n {
            continue;
        }
        count += 1;
        let chosen: f64 = (0..2 * n)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| s[i])
            .sum();
        if 2.0 * chosen - total >= observed - tol {
            hits += 1;
        }
    }
    (hits, count)
}

/// Runs `f` inside a dedicated pool with `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("pool")
        .install(f)
}
