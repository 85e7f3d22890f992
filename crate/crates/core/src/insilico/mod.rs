//! InSilicoVA: a Bayesian latent-class model for cause assignment.
//!
//! Symptoms are conditionally independent Bernoulli given the cause, each
//! death's cause is a categorical draw from the CSMF `F`, and `F` has a
//! Dirichlet(α) prior. The joint posterior of (F, Y) is explored with a
//! two-block Gibbs sampler: causes given F, then F given the cause counts.

mod gibbs;
mod likelihood;
mod oracle;
mod single;
mod summary;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;

pub use gibbs::{run_gibbs, sample_csmf, PosteriorChain};
pub use likelihood::{death_cause_likelihoods, sample_causes, LikelihoodTable};
pub use oracle::{exact_posterior_oracle, OracleResult, ORACLE_LIMIT};
pub use single::{single_death_assign, SingleDeathAssignment};
pub use summary::{potential_scale_reduction, summarize, PosteriorSummary, CONVERGENCE_THRESHOLD};

/// Default clamp applied to Pr(s | c) inside the likelihood.
pub const DEFAULT_EPSILON: f64 = 1e-7;

/// Dirichlet concentration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Alpha {
    /// Same value for every cause.
    Symmetric(f64),
    Explicit(Vec<f64>),
}

impl Default for Alpha {
    fn default() -> Self {
        Alpha::Symmetric(1.0)
    }
}

impl Alpha {
    pub fn resolve(&self, n_causes: usize) -> Result<Vec<f64>> {
        let alpha = match self {
            Alpha::Symmetric(a) => vec![*a; n_causes],
            Alpha::Explicit(v) => {
                if v.len() != n_causes {
                    return Err(Error::Dimension(format!(
                        "alpha has {} entries for {n_causes} causes",
                        v.len()
                    )));
                }
                v.clone()
            }
        };
        if let Some(bad) = alpha.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::Invalid(format!(
                "alpha entries must be positive, got {bad}"
            )));
        }
        Ok(alpha)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GibbsConfig {
    pub n_chains: usize,
    pub n_iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub alpha: Alpha,
    pub seed: u64,
    /// Starting CSMF; `None` means α/Σα.
    pub f_init: Option<Vec<f64>>,
    pub prob_clamp_epsilon: f64,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for GibbsConfig {
    fn default() -> Self {
        Self {
            n_chains: 4,
            n_iterations: 4000,
            burn_in: 2000,
            thin: 10,
            alpha: Alpha::default(),
            seed: 1,
            f_init: None,
            prob_clamp_epsilon: DEFAULT_EPSILON,
            execution: Execution::default(),
        }
    }
}

impl GibbsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_chains == 0 {
            return Err(Error::Invalid("need at least one chain".into()));
        }
        if self.burn_in >= self.n_iterations {
            return Err(Error::Invalid(format!(
                "burn-in {} must be below the iteration count {}",
                self.burn_in, self.n_iterations
            )));
        }
        if self.thin == 0 {
            return Err(Error::Invalid("thin must be at least 1".into()));
        }
        if !(0.0..0.5).contains(&self.prob_clamp_epsilon) {
            return Err(Error::Invalid(format!(
                "clamp epsilon {} outside [0, 0.5)",
                self.prob_clamp_epsilon
            )));
        }
        if let Alpha::Symmetric(a) = self.alpha {
            if !(a.is_finite() && a > 0.0) {
                return Err(Error::Invalid(format!("alpha must be positive, got {a}")));
            }
        }
        Ok(())
    }

    /// Draws kept per chain after burn-in and thinning.
    pub fn retained_per_chain(&self) -> usize {
        (self.n_iterations - self.burn_in).div_ceil(self.thin)
    }

    pub(crate) fn initial_f(&self, alpha: &[f64]) -> Result<Vec<f64>> {
        match &self.f_init {
            None => {
                let total: f64 = alpha.iter().sum();
                Ok(alpha.iter().map(|a| a / total).collect())
            }
            Some(f) => {
                if f.len() != alpha.len() {
                    return Err(Error::Dimension(format!(
                        "initial CSMF has {} entries for {} causes",
                        f.len(),
                        alpha.len()
                    )));
                }
                let total: f64 = f.iter().sum();
                if f.iter().any(|v| !(*v >= 0.0)) || (total - 1.0).abs() > crate::data::SIMPLEX_TOL
                {
                    return Err(Error::Invalid("initial CSMF is not on the simplex".into()));
                }
                Ok(f.clone())
            }
        }
    }
}
