//! Invariant checks shared by the property tests and the acceptance suite.

use proptest::collection::vec;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use va_core::insilico::{
    death_cause_likelihoods, run_gibbs, sample_csmf, summarize, Alpha, GibbsConfig, LikelihoodTable,
};
use va_core::interva::{interva_propensities, run_interva};
use va_core::seed::rng_for;
use va_core::simgen::rescale_p;
use va_core::{CondProbMatrix, Csmf, Error, Indicator, LetterGrade, SymptomMatrix};

type Check = Result<(), TestCaseError>;

#[derive(Debug, Clone)]
pub struct Instance {
    pub p: CondProbMatrix,
    pub s: SymptomMatrix,
    /// Positive weights over causes, used as a prior or a CSMF.
    pub weights: Vec<f64>,
}

impl Instance {
    pub fn csmf(&self) -> Csmf {
        Csmf::from_weights(self.weights.clone(), self.p.cause_names().to_vec()).unwrap()
    }
}

pub fn grade_value() -> BoxedStrategy<f64> {
    prop::sample::select(LetterGrade::VALUES.to_vec()).boxed()
}

pub fn interior_value() -> BoxedStrategy<f64> {
    (0.02..0.98f64).boxed()
}

pub fn indicator() -> impl Strategy<Value = Indicator> {
    prop_oneof![
        4 => Just(Indicator::Absent),
        4 => Just(Indicator::Present),
        1 => Just(Indicator::Missing),
    ]
}

pub fn instances(
    max_k: usize,
    max_n: usize,
    max_j: usize,
    entry: BoxedStrategy<f64>,
) -> impl Strategy<Value = Instance> {
    (1..=max_k, 2..=max_n, 1..=max_j).prop_flat_map(move |(k, n, j)| {
        (
            vec(entry.clone(), k * n),
            vec(indicator(), j * k),
            vec(0.05..1.0f64, n),
        )
            .prop_map(move |(entries, ind, weights)| {
                let rows: Vec<Vec<f64>> = entries.chunks(n).map(<[f64]>::to_vec).collect();
                let p = CondProbMatrix::with_default_names(&rows).unwrap();
                let ids = (0..j).map(|i| format!("D{i}")).collect();
                let s = SymptomMatrix::new(ind, ids, p.symptom_names().to_vec()).unwrap();
                Instance { p, s, weights }
            })
    })
}

fn sum(v: &[f64]) -> f64 {
    v.iter().sum()
}

/// CSMF and per-death probabilities from InterVA, and CSMF draws, lie on the simplex.
pub fn check_simplex(inst: &Instance, seed: u64) -> Check {
    match run_interva(&inst.s, &inst.p, &inst.csmf()) {
        Ok(r) => {
            prop_assert!((sum(r.csmf.fractions()) - 1.0).abs() <= 1e-9);
            for row in r.per_death_probs.iter().flatten() {
                prop_assert!((sum(row) - 1.0).abs() <= 1e-9);
            }
        }
        Err(Error::NoUsableDeaths) => {}
        Err(e) => return Err(TestCaseError::fail(e.to_string())),
    }
    let cfg = GibbsConfig {
        n_chains: 2,
        n_iterations: 40,
        burn_in: 10,
        thin: 1,
        seed,
        ..GibbsConfig::default()
    };
    for chain in
        run_gibbs(&inst.s, &inst.p, &cfg).map_err(|e| TestCaseError::fail(e.to_string()))?
    {
        for f in &chain.f_draws {
            prop_assert!((sum(f) - 1.0).abs() <= 1e-9);
            prop_assert!(f.iter().all(|&x| (0.0..=1.0).contains(&x)));
        }
    }
    let mut rng = rng_for(seed, &[5]);
    let y: Vec<usize> = (0..inst.s.n_deaths())
        .map(|j| j % inst.weights.len())
        .collect();
    let f =
        sample_csmf(&y, &inst.weights, &mut rng).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert!((sum(&f) - 1.0).abs() <= 1e-9);
    Ok(())
}

/// Every L vector sums to one within 1e-12.
pub fn check_l_normalization(inst: &Instance) -> Check {
    let f = inst.csmf();
    let table = LikelihoodTable::new(&inst.s, &inst.p, 1e-7)
        .map_err(|e| TestCaseError::fail(e.to_string()))?;
    for j in 0..inst.s.n_deaths() {
        let l = death_cause_likelihoods(inst.s.row(j), &inst.p, &f, 1e-7)
            .map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert!((sum(&l) - 1.0).abs() <= 1e-12, "sum {}", sum(&l));
        let l2 = table
            .cause_probabilities(j, f.fractions())
            .map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert!((sum(&l2) - 1.0).abs() <= 1e-12);
    }
    Ok(())
}

/// Same configuration and seed give bit-identical chains.
pub fn check_seed_determinism(inst: &Instance, seed: u64) -> Check {
    let cfg = GibbsConfig {
        n_chains: 2,
        n_iterations: 60,
        burn_in: 20,
        thin: 2,
        seed,
        ..GibbsConfig::default()
    };
    let a = run_gibbs(&inst.s, &inst.p, &cfg).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let b = run_gibbs(&inst.s, &inst.p, &cfg).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert_eq!(a, b);
    Ok(())
}

/// InterVA per-death probabilities by plain products, no logarithms.
pub fn interva_direct(inst: &Instance) -> Vec<Option<Vec<f64>>> {
    let f = inst.csmf();
    (0..inst.s.n_deaths())
        .map(|j| {
            let mut w: Vec<f64> = f.fractions().to_vec();
            for (k, ind) in inst.s.row(j).iter().enumerate() {
                if ind.is_present() {
                    for (n, wn) in w.iter_mut().enumerate() {
                        *wn *= inst.p.get(k, n);
                    }
                }
            }
            let total = sum(&w);
            (total > 0.0).then(|| w.iter().map(|x| x / total).collect())
        })
        .collect()
}

pub fn check_log_vs_direct(inst: &Instance) -> Check {
    let direct = interva_direct(inst);
    match run_interva(&inst.s, &inst.p, &inst.csmf()) {
        Ok(r) => {
            for (a, b) in r.per_death_probs.iter().zip(&direct) {
                match (a, b) {
                    (Some(a), Some(b)) => {
                        for (x, y) in a.iter().zip(b) {
                            prop_assert!((x - y).abs() <= 1e-9, "{} vs {}", x, y);
                        }
                    }
                    (None, None) => {}
                    _ => return Err(TestCaseError::fail("undefined deaths disagree")),
                }
            }
        }
        Err(Error::NoUsableDeaths) => prop_assert!(direct.iter().all(Option::is_none)),
        Err(e) => return Err(TestCaseError::fail(e.to_string())),
    }
    Ok(())
}

/// Rewriting the matrix rows of symptoms a death lacks leaves its InterVA result alone.
pub fn check_absence_blindness(inst: &Instance, replacement: &[f64]) -> Check {
    let f = inst.csmf();
    let n = inst.p.n_causes();
    for j in 0..inst.s.n_deaths() {
        let row = inst.s.row(j);
        let mut entries = inst.p.entries().to_vec();
        for (k, ind) in row.iter().enumerate() {
            if !ind.is_present() {
                for c in 0..n {
                    entries[k * n + c] = replacement[(k * n + c) % replacement.len()];
                }
            }
        }
        let changed = CondProbMatrix::new(
            entries,
            inst.p.symptom_names().to_vec(),
            inst.p.cause_names().to_vec(),
        )
        .unwrap();
        let before = interva_propensities(row, &inst.p, &f).unwrap();
        let after = interva_propensities(row, &changed, &f).unwrap();
        prop_assert_eq!(before, after);
    }
    Ok(())
}

/// Two deaths differing in one symptom get different L unless that
/// symptom's matrix row is constant.
pub fn check_complement_sensitivity(inst: &Instance, which: usize, constant: bool) -> Check {
    let k = which % inst.p.n_symptoms();
    let n = inst.p.n_causes();
    let mut entries = inst.p.entries().to_vec();
    if constant {
        let v = entries[k * n];
        entries[k * n..(k + 1) * n].iter_mut().for_each(|e| *e = v);
    }
    let p = CondProbMatrix::new(
        entries,
        inst.p.symptom_names().to_vec(),
        inst.p.cause_names().to_vec(),
    )
    .unwrap();
    let row_constant = p.row(k).iter().all(|&v| v == p.get(k, 0));
    let base: Vec<Indicator> = inst.s.row(0).to_vec();
    let mut a = base.clone();
    let mut b = base;
    a[k] = Indicator::Present;
    b[k] = Indicator::Absent;
    let f = inst.csmf();
    let la = death_cause_likelihoods(&a, &p, &f, 0.0).unwrap();
    let lb = death_cause_likelihoods(&b, &p, &f, 0.0).unwrap();
    let gap = la
        .iter()
        .zip(&lb)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    if row_constant {
        prop_assert!(gap <= 1e-12, "constant row but gap {}", gap);
    } else {
        prop_assert!(gap > 0.0, "L unchanged by flipping symptom {}", k);
    }
    Ok(())
}

/// With no symptoms the posterior CSMF mean is the prior mean α/Σα.
pub fn check_prior_recovery(alpha: &[f64], n_deaths: usize, seed: u64) -> Check {
    let names: Vec<String> = (0..alpha.len()).map(|i| format!("C{i}")).collect();
    let p = CondProbMatrix::new(vec![], vec![], names).unwrap();
    let s = SymptomMatrix::new(
        vec![],
        (0..n_deaths).map(|i| format!("D{i}")).collect(),
        vec![],
    )
    .unwrap();
    let cfg = GibbsConfig {
        n_chains: 2,
        n_iterations: 10_500,
        burn_in: 500,
        thin: 1,
        alpha: Alpha::Explicit(alpha.to_vec()),
        seed,
        ..GibbsConfig::default()
    };
    let post = summarize(&run_gibbs(&s, &p, &cfg).unwrap(), 0.95).unwrap();
    let total = sum(alpha);
    for (f, a) in post.csmf_mean.fractions().iter().zip(alpha) {
        prop_assert!((f - a / total).abs() < 0.03, "{} vs {}", f, a / total);
    }
    Ok(())
}

/// Rescaling keeps the order of entries and lands inside [lo, hi].
pub fn check_rescale_order(p: &CondProbMatrix, lo: f64, hi: f64) -> Check {
    let r = match rescale_p(p, lo, hi) {
        Ok(r) => r,
        Err(_) => {
            prop_assert!(p.entries().iter().all(|&v| v == p.entries()[0]));
            return Ok(());
        }
    };
    let (a, b) = (p.entries(), r.entries());
    prop_assert!(b.iter().all(|&v| (lo..=hi).contains(&v)));
    for i in 0..a.len() {
        for j in 0..a.len() {
            if a[i] < a[j] {
                prop_assert!(b[i] < b[j]);
            } else if a[i] == a[j] {
                prop_assert!(b[i] == b[j]);
            }
        }
    }
    Ok(())
}
