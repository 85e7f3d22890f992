use rand::Rng;
use rand_distr::{Distribution, Gamma};

use super::likelihood::LikelihoodTable;
use super::GibbsConfig;
use crate::data::{CondProbMatrix, SymptomMatrix};
use crate::error::{Error, Result};
use crate::math::sample_weighted;
use crate::seed::{rng_for, stream};

/// Retained draws from one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorChain {
    pub chain_id: usize,
    /// One CSMF per retained iteration.
    pub f_draws: Vec<Vec<f64>>,
    /// One cause label per death per retained iteration.
    pub y_draws: Vec<Vec<usize>>,
    /// Row-major J×N mean of the L vectors the retained labels were drawn from.
    pub l_mean: Vec<f64>,
    pub cause_names: Vec<String>,
    pub config: GibbsConfig,
}

impl PosteriorChain {
    pub fn len(&self) -> usize {
        self.f_draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f_draws.is_empty()
    }

    pub fn n_causes(&self) -> usize {
        self.cause_names.len()
    }

    pub fn n_deaths(&self) -> usize {
        self.y_draws.first().map_or(0, Vec::len)
    }
}

/// Draws F | Y ~ Dirichlet(M + α), M the per-cause counts of `y`.
pub fn sample_csmf<R: Rng + ?Sized>(y: &[usize], alpha: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    let mut counts = vec![0.0; alpha.len()];
    for &c in y {
        *counts.get_mut(c).ok_or_else(|| {
            Error::Dimension(format!("cause index {c} for {} causes", alpha.len()))
        })? += 1.0;
    }
    let gammas = counts
        .iter()
        .zip(alpha)
        .map(|(m, a)| Gamma::new(m + a, 1.0).map_err(|e| Error::Invalid(format!("alpha: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    // tiny shapes can underflow every gamma draw to zero; redraw
    for _ in 0..64 {
        let mut draw: Vec<f64> = gammas.iter().map(|g| g.sample(rng)).collect();
        let total: f64 = draw.iter().sum();
        if total > 0.0 && total.is_finite() {
            draw.iter_mut().for_each(|v| *v /= total);
            return Ok(draw);
        }
    }
    Err(Error::Numeric("Dirichlet draw underflowed".into()))
}

fn run_chain(
    table: &LikelihoodTable,
    alpha: &[f64],
    f_init: &[f64],
    cfg: &GibbsConfig,
    cause_names: &[String],
    chain_id: usize,
) -> Result<PosteriorChain> {
    let n = table.n_causes();
    let j_total = table.n_deaths();
    let mut rng = rng_for(cfg.seed, &[stream::CHAIN, chain_id as u64]);
    let retained = cfg.retained_per_chain();
    let mut f_draws = Vec::with_capacity(retained);
    let mut y_draws = Vec::with_capacity(retained);
    let mut l_sum = vec![0.0; j_total * n];

    let mut f = f_init.to_vec();
    let mut y = vec![0usize; j_total];
    let mut w = vec![0.0; n];
    for t in 0..cfg.n_iterations {
        let keep = t >= cfg.burn_in && (t - cfg.burn_in).is_multiple_of(cfg.thin);
        for (j, label) in y.iter_mut().enumerate() {
            let total = table.weights(j, &f, &mut w)?;
            *label = sample_weighted(&w, total, &mut rng);
            if keep {
                let inv = 1.0 / total;
                for (acc, &v) in l_sum[j * n..(j + 1) * n].iter_mut().zip(&w) {
                    *acc += v * inv;
                }
            }
        }
        f = sample_csmf(&y, alpha, &mut rng)?;
        if keep {
            f_draws.push(f.clone());
            y_draws.push(y.clone());
        }
    }
    let kept = f_draws.len().max(1) as f64;
    l_sum.iter_mut().for_each(|v| *v /= kept);
    Ok(PosteriorChain {
        chain_id,
        f_draws,
        y_draws,
        l_mean: l_sum,
        cause_names: cause_names.to_vec(),
        config: cfg.clone(),
    })
}

/// Runs `n_chains` independent chains, each alternating a cause draw for
/// every death with a CSMF draw.
///
/// Chains start from `f_init` (default α/Σα), use disjoint random streams
/// derived from `cfg.seed`, and may run concurrently. Results do not
/// depend on scheduling.
pub fn run_gibbs(
    s: &SymptomMatrix,
    p: &CondProbMatrix,
    cfg: &GibbsConfig,
) -> Result<Vec<PosteriorChain>> {
    cfg.validate()?;
    let alpha = cfg.alpha.resolve(p.n_causes())?;
    let f_init = cfg.initial_f(&alpha)?;
    let table = LikelihoodTable::new(s, p, cfg.prob_clamp_epsilon)?;
    cfg.execution
        .map(cfg.n_chains, |c| {
            run_chain(&table, &alpha, &f_init, cfg, p.cause_names(), c)
        })
        .into_iter()
        .collect()
}
