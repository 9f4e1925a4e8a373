// Shared helpers for the integration suites: a matrix-exponential oracle
// independent of the spectral module, and seeded random graph generators.
#![allow(dead_code)]

use qwalk::{Complex64, ComplexMatrix, RealMatrix, WeightedGraph};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// exp(A) by scaling and squaring around a Taylor core. The scaled norm is
/// at most 1/4, where 25 terms are far below machine precision.
pub fn expm(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.nrows();
    let row_sum_norm = (0..n)
        .map(|i| (0..n).map(|j| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0_f64, f64::max);
    let squarings = if row_sum_norm > 0.25 {
        (row_sum_norm / 0.25).log2().ceil() as i32
    } else {
        0
    };
    let b = a * Complex64::new(0.5_f64.powi(squarings), 0.0);
    let mut sum = ComplexMatrix::identity(n, n);
    let mut term = ComplexMatrix::identity(n, n);
    for k in 1..=25 {
        term = &term * &b * Complex64::new(1.0 / k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// exp(i t M) for real symmetric M.
pub fn expm_i_t(m: &RealMatrix, t: f64) -> ComplexMatrix {
    expm(&m.map(|x| Complex64::new(0.0, t * x)))
}

pub fn max_norm(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> RealMatrix {
    let mut m = RealMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let x = rng.gen_range(-scale..scale);
            m[(i, j)] = x;
            m[(j, i)] = x;
        }
    }
    m
}

/// Connected graph: a random recursive tree plus independent extra edges.
pub fn random_connected_graph(
    rng: &mut ChaCha8Rng,
    n: usize,
    extra_edge_prob: f64,
    weighted: bool,
) -> WeightedGraph {
    let menu = [0.5, 1.0, 1.5, 2.0];
    let pick = |rng: &mut ChaCha8Rng| {
        if weighted {
            menu[rng.gen_range(0..menu.len())]
        } else {
            1.0
        }
    };
    let mut g = WeightedGraph::new(n).unwrap();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        let w = pick(rng);
        g.add_edge(u, v, w).unwrap();
    }
    for u in 0..n {
        for v in (u + 1)..n {
            if !g.has_edge(u, v) && rng.gen_bool(extra_edge_prob) {
                let w = pick(rng);
                g.add_edge(u, v, w).unwrap();
            }
        }
    }
    g
}

pub fn random_tree(rng: &mut ChaCha8Rng, n: usize) -> WeightedGraph {
    random_connected_graph(rng, n, 0.0, false)
}
