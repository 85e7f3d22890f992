use super::gibbs::PosteriorChain;
use crate::data::Csmf;
use crate::error::{Error, Result};
use crate::math::{normal_critical, proportion_interval, quantile_sorted, sorted};

/// Scale-reduction values at or above this mark a cause as unconverged.
pub const CONVERGENCE_THRESHOLD: f64 = 1.1;

#[derive(Debug, Clone)]
pub struct PosteriorSummary {
    pub csmf_mean: Csmf,
    /// Equal-tailed credible interval per cause.
    pub csmf_intervals: Vec<(f64, f64)>,
    pub level: f64,
    /// J rows of posterior cause frequencies (share of retained draws).
    pub per_death_cause_probs: Vec<Vec<f64>>,
    /// Normal-approximation interval per cell of `per_death_cause_probs`.
    pub per_death_intervals: Vec<Vec<(f64, f64)>>,
    /// J rows of L averaged over retained draws.
    pub per_death_probs_rb: Vec<Vec<f64>>,
    /// Per-cause potential scale reduction; `None` with fewer than two chains.
    pub diagnostics: Option<Vec<f64>>,
    pub converged: Option<bool>,
    pub n_draws: usize,
}

impl PosteriorSummary {
    /// Highest-frequency cause per death, ties to the lowest index.
    pub fn top_causes(&self) -> Vec<usize> {
        self.per_death_cause_probs
            .iter()
            .map(|row| crate::math::argmax(row))
            .collect()
    }
}

/// Gelman–Rubin statistic over equal-length chains (trimmed to the shortest).
///
/// A quantity with no variance at all reports 1.0; zero within-chain
/// variance with differing chain means reports +∞.
pub fn potential_scale_reduction(chains: &[Vec<f64>]) -> Option<f64> {
    let m = chains.len();
    let n = chains.iter().map(Vec::len).min()?;
    if m < 2 || n < 2 {
        return None;
    }
    let nf = n as f64;
    let stats: Vec<(f64, f64)> = chains
        .iter()
        .map(|c| {
            let c = &c[..n];
            let mean = c.iter().sum::<f64>() / nf;
            let var = c.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
            (mean, var)
        })
        .collect();
    let grand = stats.iter().map(|s| s.0).sum::<f64>() / m as f64;
    let between = nf * stats.iter().map(|s| (s.0 - grand).powi(2)).sum::<f64>() / (m as f64 - 1.0);
    let within = stats.iter().map(|s| s.1).sum::<f64>() / m as f64;
    // relative cutoff: draws that agree to rounding count as constant
    let scale = grand.abs().max(1e-300);
    if within <= (1e-15 * scale).powi(2) {
        return Some(if between <= (1e-15 * scale).powi(2) * nf {
            1.0
        } else {
            f64::INFINITY
        });
    }
    let pooled = (nf - 1.0) / nf * within + between / nf;
    Some((pooled / within).sqrt())
}

/// Pools chains into point estimates, intervals and diagnostics.
pub fn summarize(chains: &[PosteriorChain], level: f64) -> Result<PosteriorSummary> {
    if chains.is_empty() {
        return Err(Error::Invalid("no chains to summarize".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Invalid(format!(
            "interval level {level} outside (0, 1)"
        )));
    }
    if let Some(c) = chains.iter().find(|c| c.len() < 2) {
        return Err(Error::Invalid(format!(
            "chain {} has {} retained draws, need at least 2",
            c.chain_id,
            c.len()
        )));
    }
    let n = chains[0].n_causes();
    let j_total = chains[0].n_deaths();
    if chains
        .iter()
        .any(|c| c.cause_names != chains[0].cause_names || c.n_deaths() != j_total)
    {
        return Err(Error::Dimension(
            "chains disagree on causes or deaths".into(),
        ));
    }
    let total_draws: usize = chains.iter().map(PosteriorChain::len).sum();

    let mut csmf_mean = vec![0.0; n];
    let mut per_cause: Vec<Vec<f64>> = vec![Vec::with_capacity(total_draws); n];
    for f in chains.iter().flat_map(|c| &c.f_draws) {
        for (i, &v) in f.iter().enumerate() {
            csmf_mean[i] += v;
            per_cause[i].push(v);
        }
    }
    csmf_mean.iter_mut().for_each(|v| *v /= total_draws as f64);
    let tail = (1.0 - level) / 2.0;
    let csmf_intervals = per_cause
        .iter()
        .zip(&csmf_mean)
        .map(|(draws, &mean)| {
            let s = sorted(draws);
            let lo = quantile_sorted(&s, tail);
            let hi = quantile_sorted(&s, 1.0 - tail);
            (lo.min(mean), hi.max(mean))
        })
        .collect();

    let mut counts = vec![vec![0usize; n]; j_total];
    for y in chains.iter().flat_map(|c| &c.y_draws) {
        for (row, &c) in counts.iter_mut().zip(y) {
            row[c] += 1;
        }
    }
    let z = normal_critical(level);
    let per_death_cause_probs: Vec<Vec<f64>> = counts
        .iter()
        .map(|row| row.iter().map(|&c| c as f64 / total_draws as f64).collect())
        .collect();
    let per_death_intervals = per_death_cause_probs
        .iter()
        .map(|row| {
            row.iter()
                .map(|&p| proportion_interval(p, total_draws, z))
                .collect()
        })
        .collect();

    let mut rb = vec![vec![0.0; n]; j_total];
    for chain in chains {
        let weight = chain.len() as f64 / total_draws as f64;
        for (row, src) in rb.iter_mut().zip(chain.l_mean.chunks(n)) {
            row.iter_mut().zip(src).for_each(|(r, v)| *r += weight * v);
        }
    }

    let diagnostics = if chains.len() >= 2 {
        (0..n)
            .map(|i| {
                let traces: Vec<Vec<f64>> = chains
                    .iter()
                    .map(|c| c.f_draws.iter().map(|f| f[i]).collect())
                    .collect();
                potential_scale_reduction(&traces)
            })
            .collect::<Option<Vec<f64>>>()
    } else {
        None
    };
    let converged = diagnostics
        .as_ref()
        .map(|d| d.iter().all(|&r| r < CONVERGENCE_THRESHOLD));

    Ok(PosteriorSummary {
        csmf_mean: Csmf::from_weights(csmf_mean, chains[0].cause_names.clone())?,
        csmf_intervals,
        level,
        per_death_cause_probs,
        per_death_intervals,
        per_death_probs_rb: rb,
        diagnostics,
        converged,
        n_draws: total_draws,
    })
}
