#![allow(dead_code)]

use rand::Rng;
use va_core::insilico::{exact_posterior_oracle, run_gibbs, summarize, Alpha, GibbsConfig};
use va_core::seed::rng_for;
use va_core::{CondProbMatrix, SymptomMatrix};

/// Small random instance with N^J ≤ `max_states`, entries in (0.05, 0.95).
pub fn random_instance(seed: u64, max_states: usize) -> (SymptomMatrix, CondProbMatrix, Vec<f64>) {
    let mut rng = rng_for(seed, &[99]);
    let n = rng.random_range(2..=4usize);
    let max_j = (max_states as f64).log(n as f64).floor() as usize;
    let j = rng.random_range(1..=max_j.min(12));
    let k = rng.random_range(1..=5usize);
    let rows: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..n).map(|_| rng.random_range(0.05..0.95)).collect())
        .collect();
    let p = CondProbMatrix::with_default_names(&rows).unwrap();
    let s_rows: Vec<Vec<u8>> = (0..j)
        .map(|_| (0..k).map(|_| rng.random_range(0..2u8)).collect())
        .collect();
    let s = SymptomMatrix::from_binary_rows(&s_rows).unwrap();
    let alpha = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
    (s, p, alpha)
}

pub struct OracleGap {
    pub csmf: f64,
    pub per_death: f64,
    pub per_death_rb: f64,
    pub draws: usize,
}

/// Largest absolute gap between pooled Gibbs output and the exact posterior.
pub fn gibbs_vs_oracle(
    s: &SymptomMatrix,
    p: &CondProbMatrix,
    alpha: &[f64],
    seed: u64,
) -> OracleGap {
    let cfg = GibbsConfig {
        n_chains: 4,
        n_iterations: 26_000,
        burn_in: 1_000,
        thin: 1,
        alpha: Alpha::Explicit(alpha.to_vec()),
        seed,
        prob_clamp_epsilon: 0.0,
        ..GibbsConfig::default()
    };
    let chains = run_gibbs(s, p, &cfg).unwrap();
    let post = summarize(&chains, 0.95).unwrap();
    let exact = exact_posterior_oracle(s, p, alpha, 0.0).unwrap();
    let max_gap = |a: &[Vec<f64>]| {
        a.iter()
            .zip(&exact.per_death)
            .flat_map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u - v).abs()))
            .fold(0.0, f64::max)
    };
    OracleGap {
        csmf: post
            .csmf_mean
            .fractions()
            .iter()
            .zip(&exact.csmf_mean)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max),
        per_death: max_gap(&post.per_death_cause_probs),
        per_death_rb: max_gap(&post.per_death_probs_rb),
        draws: post.n_draws,
    }
}

pub mod invariants;
