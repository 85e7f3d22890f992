//! Exact posterior by enumerating every cause assignment.
//!
//! Deliberately shares no code with the sampler: likelihoods are direct
//! products, the F-marginalized prior on Y uses rising factorials, and
//! nothing is drawn at random. Only usable on tiny instances.

use crate::data::{CondProbMatrix, SymptomMatrix};
use crate::error::{Error, Result};

/// Largest N^J the oracle will enumerate.
pub const ORACLE_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// E[F | S].
    pub csmf_mean: Vec<f64>,
    /// Pr(yⱼ = cₙ | S), J rows of N.
    pub per_death: Vec<Vec<f64>>,
}

/// x (x+1) … (x+m−1)
fn rising(x: f64, m: usize) -> f64 {
    (0..m).map(|i| x + i as f64).product()
}

/// Exact marginals of the Dirichlet–categorical–Bernoulli model.
///
/// Each assignment Y is weighted by Πⱼ Pr(Sⱼ | yⱼ) times the
/// Dirichlet–multinomial probability of its counts M, and
/// E[F | S] = Σ w(Y) (M + α) / (J + Σα) / Σ w(Y).
pub fn exact_posterior_oracle(
    s: &SymptomMatrix,
    p: &CondProbMatrix,
    alpha: &[f64],
    epsilon: f64,
) -> Result<OracleResult> {
    s.check_compatible(p)?;
    let n = p.n_causes();
    let j_total = s.n_deaths();
    if alpha.len() != n {
        return Err(Error::Dimension(format!(
            "alpha has {} entries for {n} causes",
            alpha.len()
        )));
    }
    let size = (n as f64).powi(j_total as i32);
    if size > ORACLE_LIMIT {
        return Err(Error::TooLarge {
            size,
            limit: ORACLE_LIMIT,
        });
    }

    // per-death likelihood, rescaled by its own maximum (cancels on normalizing)
    let mut lik = vec![vec![0.0; n]; j_total];
    for (j, row) in lik.iter_mut().enumerate() {
        for (c, slot) in row.iter_mut().enumerate() {
            let mut prod = 1.0;
            for (k, ind) in s.row(j).iter().enumerate() {
                let mut pr = p.get(k, c);
                if epsilon > 0.0 {
                    pr = pr.clamp(epsilon, 1.0 - epsilon);
                }
                prod *= if ind.is_present() { pr } else { 1.0 - pr };
            }
            *slot = prod;
        }
        let max = row.iter().copied().fold(0.0, f64::max);
        if max <= 0.0 {
            return Err(Error::UndefinedDeath {
                death: s.death_ids()[j].clone(),
            });
        }
        row.iter_mut().for_each(|v| *v /= max);
    }

    let alpha_total: f64 = alpha.iter().sum();
    let norm = rising(alpha_total, j_total);
    let mut assignment = vec![0usize; j_total];
    let mut counts = vec![0usize; n];
    let mut z = 0.0;
    let mut f_acc = vec![0.0; n];
    let mut death_acc = vec![vec![0.0; n]; j_total];
    loop {
        counts.iter_mut().for_each(|c| *c = 0);
        let mut w = 1.0;
        for (j, &c) in assignment.iter().enumerate() {
            counts[c] += 1;
            w *= lik[j][c];
        }
        if w > 0.0 {
            w *= counts
                .iter()
                .zip(alpha)
                .map(|(&m, &a)| rising(a, m))
                .product::<f64>()
                / norm;
            z += w;
            for ((acc, &m), &a) in f_acc.iter_mut().zip(&counts).zip(alpha) {
                *acc += w * (m as f64 + a) / (j_total as f64 + alpha_total);
            }
            for (row, &c) in death_acc.iter_mut().zip(&assignment) {
                row[c] += w;
            }
        }
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == j_total {
                return finish(z, f_acc, death_acc);
            }
            assignment[pos] += 1;
            if assignment[pos] < n {
                break;
            }
            assignment[pos] = 0;
            pos += 1;
        }
    }
}

fn finish(z: f64, f_acc: Vec<f64>, death_acc: Vec<Vec<f64>>) -> Result<OracleResult> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::Numeric(format!("oracle normalizer is {z}")));
    }
    Ok(OracleResult {
        csmf_mean: f_acc.into_iter().map(|v| v / z).collect(),
        per_death: death_acc
            .into_iter()
            .map(|row| row.into_iter().map(|v| v / z).collect())
            .collect(),
    })
}
