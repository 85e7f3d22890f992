use rand::Rng;

use crate::data::{CondProbMatrix, Csmf, Indicator, SymptomMatrix};
use crate::error::{Error, Result};
use crate::math::{normalize_log_weights, sample_weighted};

fn clamped_logs(p: &CondProbMatrix, epsilon: f64) -> (Vec<f64>, Vec<f64>) {
    let mut log_p = Vec::with_capacity(p.entries().len());
    let mut log_q = Vec::with_capacity(p.entries().len());
    for &v in p.entries() {
        let v = if epsilon > 0.0 {
            v.clamp(epsilon, 1.0 - epsilon)
        } else {
            v
        };
        log_p.push(v.ln());
        log_q.push((1.0 - v).ln());
    }
    (log_p, log_q)
}

/// `Σₖ ln[p^s (1−p)^(1−s)]` for every cause, missing read as absent.
fn log_symptom_likelihood(row: &[Indicator], log_p: &[f64], log_q: &[f64], n: usize) -> Vec<f64> {
    let mut acc = vec![0.0; n];
    for (k, s) in row.iter().enumerate() {
        let src = if s.is_present() { log_p } else { log_q };
        for (a, &l) in acc.iter_mut().zip(&src[k * n..(k + 1) * n]) {
            *a += l;
        }
    }
    acc
}

/// Posterior cause probabilities L for one death given the CSMF `f`.
///
/// Both present (`p`) and absent (`1 − p`) symptoms contribute. When
/// `epsilon > 0`, `p` is clamped into `[ε, 1 − ε]` for this computation.
pub fn death_cause_likelihoods(
    symptoms: &[Indicator],
    p: &CondProbMatrix,
    f: &Csmf,
    epsilon: f64,
) -> Result<Vec<f64>> {
    if symptoms.len() != p.n_symptoms() {
        return Err(Error::Dimension(format!(
            "death has {} symptoms, matrix has {}",
            symptoms.len(),
            p.n_symptoms()
        )));
    }
    f.check_causes(p)?;
    let (log_p, log_q) = clamped_logs(p, epsilon);
    let mut log_w = log_symptom_likelihood(symptoms, &log_p, &log_q, p.n_causes());
    for (w, fr) in log_w.iter_mut().zip(f.fractions()) {
        *w += fr.ln();
    }
    normalize_log_weights(&log_w).ok_or_else(|| Error::UndefinedDeath {
        death: "<unnamed>".into(),
    })
}

/// Per-death symptom likelihoods, precomputed once because they do not
/// depend on F. Rows are scaled so their largest entry is 1.
#[derive(Debug, Clone)]
pub struct LikelihoodTable {
    n_causes: usize,
    log_lik: Vec<f64>,
    scaled: Vec<f64>,
}

impl LikelihoodTable {
    /// Fails fast on any death that no cause can explain.
    pub fn new(s: &SymptomMatrix, p: &CondProbMatrix, epsilon: f64) -> Result<Self> {
        s.check_compatible(p)?;
        let n = p.n_causes();
        let (log_p, log_q) = clamped_logs(p, epsilon);
        let mut log_lik = Vec::with_capacity(s.n_deaths() * n);
        let mut scaled = Vec::with_capacity(s.n_deaths() * n);
        for (j, row) in s.rows().enumerate() {
            let ll = log_symptom_likelihood(row, &log_p, &log_q, n);
            let max = ll.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !max.is_finite() {
                return Err(Error::UndefinedDeath {
                    death: s.death_ids()[j].clone(),
                });
            }
            scaled.extend(ll.iter().map(|&l| (l - max).exp()));
            log_lik.extend(ll);
        }
        Ok(Self {
            n_causes: n,
            log_lik,
            scaled,
        })
    }

    pub fn n_deaths(&self) -> usize {
        self.scaled.len() / self.n_causes
    }

    pub fn n_causes(&self) -> usize {
        self.n_causes
    }

    /// Log symptom likelihood of death `j` under each cause.
    pub fn log_likelihood(&self, j: usize) -> &[f64] {
        &self.log_lik[j * self.n_causes..(j + 1) * self.n_causes]
    }

    /// Writes unnormalized weights fₙ·Pr(Sⱼ | cₙ) into `out`, returning their sum.
    /// Falls back to log space when the scaled product underflows.
    #[inline]
    pub(crate) fn weights(&self, j: usize, f: &[f64], out: &mut [f64]) -> Result<f64> {
        let n = self.n_causes;
        let row = &self.scaled[j * n..(j + 1) * n];
        let mut total = 0.0;
        for ((o, &l), &fr) in out.iter_mut().zip(row).zip(f) {
            *o = l * fr;
            total += *o;
        }
        if total.is_normal() {
            return Ok(total);
        }
        let log_w: Vec<f64> = self
            .log_likelihood(j)
            .iter()
            .zip(f)
            .map(|(l, fr)| l + fr.ln())
            .collect();
        let probs = normalize_log_weights(&log_w).ok_or_else(|| {
            Error::Numeric(format!("death {j} has zero weight under the current CSMF"))
        })?;
        out.copy_from_slice(&probs);
        Ok(1.0)
    }

    /// Normalized L for death `j`.
    pub fn cause_probabilities(&self, j: usize, f: &[f64]) -> Result<Vec<f64>> {
        let mut w = vec![0.0; self.n_causes];
        let total = self.weights(j, f, &mut w)?;
        w.iter_mut().for_each(|v| *v /= total);
        Ok(w)
    }

    /// One categorical cause draw per death.
    pub fn sample_causes<R: Rng + ?Sized>(&self, f: &[f64], rng: &mut R) -> Result<Vec<usize>> {
        let mut buf = vec![0.0; self.n_causes];
        (0..self.n_deaths())
            .map(|j| {
                let total = self.weights(j, f, &mut buf)?;
                Ok(sample_weighted(&buf, total, rng))
            })
            .collect()
    }
}

/// Draws a cause for every death from its L vector.
pub fn sample_causes<R: Rng + ?Sized>(
    s: &SymptomMatrix,
    p: &CondProbMatrix,
    f: &Csmf,
    epsilon: f64,
    rng: &mut R,
) -> Result<Vec<usize>> {
    f.check_causes(p)?;
    LikelihoodTable::new(s, p, epsilon)?.sample_causes(f.fractions(), rng)
}
