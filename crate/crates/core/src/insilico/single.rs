use rand::Rng;

use super::likelihood::death_cause_likelihoods;
use crate::data::{CondProbMatrix, Csmf, Indicator};
use crate::error::Result;
use crate::math::{normal_critical, proportion_interval, sample_weighted};

#[derive(Debug, Clone, PartialEq)]
pub struct SingleDeathAssignment {
    pub likelihoods: Vec<f64>,
    /// Share of draws landing on each cause; `None` when no draws were made.
    pub frequencies: Option<Vec<f64>>,
    pub intervals: Option<Vec<(f64, f64)>>,
}

/// Assigns causes to one death under a fixed CSMF by drawing repeatedly
/// from its L vector. `level` sets the interval coverage.
pub fn single_death_assign<R: Rng + ?Sized>(
    symptoms: &[Indicator],
    p: &CondProbMatrix,
    f: &Csmf,
    n_draws: usize,
    epsilon: f64,
    level: f64,
    rng: &mut R,
) -> Result<SingleDeathAssignment> {
    let likelihoods = death_cause_likelihoods(symptoms, p, f, epsilon)?;
    if n_draws == 0 {
        return Ok(SingleDeathAssignment {
            likelihoods,
            frequencies: None,
            intervals: None,
        });
    }
    let mut counts = vec![0usize; likelihoods.len()];
    for _ in 0..n_draws {
        counts[sample_weighted(&likelihoods, 1.0, rng)] += 1;
    }
    let z = normal_critical(level);
    let frequencies: Vec<f64> = counts.iter().map(|&c| c as f64 / n_draws as f64).collect();
    let intervals = frequencies
        .iter()
        .map(|&q| proportion_interval(q, n_draws, z))
        .collect();
    Ok(SingleDeathAssignment {
        likelihoods,
        frequencies: Some(frequencies),
        intervals: Some(intervals),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_for;

    #[test]
    fn deterministic_death() {
        let p = CondProbMatrix::with_default_names(&[vec![1.0, 0.0, 0.0]]).unwrap();
        let f = Csmf::uniform(p.cause_names().to_vec()).unwrap();
        let a = single_death_assign(
            &[Indicator::Present],
            &p,
            &f,
            500,
            0.0,
            0.95,
            &mut rng_for(1, &[]),
        )
        .unwrap();
        assert_eq!(a.likelihoods, vec![1.0, 0.0, 0.0]);
        assert_eq!(a.frequencies.unwrap(), vec![1.0, 0.0, 0.0]);
        assert_eq!(a.intervals.unwrap()[0], (1.0, 1.0));
    }

    #[test]
    fn frequencies_track_l() {
        let p = CondProbMatrix::with_default_names(&[vec![0.8, 0.2]]).unwrap();
        let f = Csmf::uniform(p.cause_names().to_vec()).unwrap();
        let a = single_death_assign(
            &[Indicator::Present],
            &p,
            &f,
            10_000,
            0.0,
            0.95,
            &mut rng_for(2, &[]),
        )
        .unwrap();
        let freq = a.frequencies.unwrap();
        assert!((freq[0] - 0.8).abs() < 0.02);
        assert!((freq[1] - 0.2).abs() < 0.02);
        let (lo, hi) = a.intervals.unwrap()[0];
        assert!(lo < freq[0] && freq[0] < hi);
    }

    #[test]
    fn zero_draws() {
        let p = CondProbMatrix::with_default_names(&[vec![0.8, 0.2]]).unwrap();
        let f = Csmf::uniform(p.cause_names().to_vec()).unwrap();
        let a = single_death_assign(
            &[Indicator::Present],
            &p,
            &f,
            0,
            0.0,
            0.95,
            &mut rng_for(2, &[]),
        )
        .unwrap();
        assert!(a.frequencies.is_none() && a.intervals.is_none());
        assert_eq!(a.likelihoods.len(), 2);
    }
}
