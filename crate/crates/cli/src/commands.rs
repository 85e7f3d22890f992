use anyhow::Context;
use serde_json::json;

use va_core::eval::{run_comparison, ComparisonOptions, IntervaPrior};
use va_core::insilico::{exact_posterior_oracle, run_gibbs, summarize, Alpha, GibbsConfig};
use va_core::interva::run_interva_with;
use va_core::io::{
    load_cond_prob_matrix, load_csmf, load_symptoms, parse_constraints, write_cond_prob_matrix,
    write_csmf, write_symptoms, write_table, write_truth, CellMode,
};
use va_core::simgen::{make_scenario, ScenarioConfig};
use va_core::validate::{validate_cond_prob_matrix, ConstraintSet};
use va_core::{CondProbMatrix, Csmf, Error, Execution, SymptomMatrix};

use crate::manifest::{Run, RunManifest};
use crate::{
    exit, input_error, Command, Common, CompareArgs, DataArgs, GibbsArgs, InsilicoArgs,
    IntervaArgs, OracleArgs, PriorChoice, ScenarioArgs, SimulateArgs, ValidateArgs,
};

pub fn run(command: Command, common: Common) -> anyhow::Result<u8> {
    execute(command, common).map(|(code, _)| code)
}

/// Runs one subcommand and writes its manifest.
pub fn execute(mut command: Command, common: Common) -> anyhow::Result<(u8, RunManifest)> {
    command.absolutize();
    let mut run = Run::new(&common.out_dir())?;
    let exec = if common.threads == 1 {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let code = match &command {
        Command::Interva(a) => interva(a, exec, &mut run)?,
        Command::Insilico(a) => insilico(a, &common, exec, &mut run)?,
        Command::Simulate(a) => simulate(a, &common, &mut run)?,
        Command::Compare(a) => compare(a, &common, exec, &mut run)?,
        Command::Oracle(a) => oracle(a, &mut run)?,
        Command::ValidateP(a) => validate_p(a, &mut run)?,
        Command::Replay(_) => unreachable!("replay is dispatched before execute"),
    };
    let manifest = run.finish(&command, &common)?;
    Ok((code, manifest))
}

fn num(x: f64) -> String {
    x.to_string()
}

fn header_with<'a>(lead: &[&'a str], names: &'a [String]) -> Vec<&'a str> {
    lead.iter()
        .copied()
        .chain(names.iter().map(String::as_str))
        .collect()
}

fn load_data(d: &DataArgs, run: &mut Run) -> anyhow::Result<(SymptomMatrix, CondProbMatrix)> {
    let s_bytes = run.input("symptoms", &d.symptoms)?;
    let p_bytes = run.input("probs", &d.probs)?;
    let s = load_symptoms(s_bytes.as_slice())
        .with_context(|| format!("in {}", d.symptoms.display()))?;
    let p = load_cond_prob_matrix(p_bytes.as_slice(), d.p_format.into())
        .with_context(|| format!("in {}", d.probs.display()))?;
    s.check_compatible(&p)?;
    Ok((s, p))
}

/// Reorders a CSMF read from a file to the matrix's cause order.
fn align_csmf(c: Csmf, p: &CondProbMatrix) -> va_core::Result<Csmf> {
    let fractions = p
        .cause_names()
        .iter()
        .map(|name| {
            c.cause_names()
                .iter()
                .position(|n| n == name)
                .map(|i| c.fractions()[i])
                .ok_or_else(|| Error::Dimension(format!("prior has no entry for cause `{name}`")))
        })
        .collect::<va_core::Result<Vec<f64>>>()?;
    if c.len() != p.n_causes() {
        return Err(Error::Dimension(format!(
            "prior has {} causes, matrix has {}",
            c.len(),
            p.n_causes()
        )));
    }
    Csmf::new(fractions, p.cause_names().to_vec())
}

fn interva(a: &IntervaArgs, exec: Execution, run: &mut Run) -> anyhow::Result<u8> {
    let (s, p) = load_data(&a.data, run)?;
    let (prior, source) = match &a.prior {
        Some(path) => {
            let bytes = run.input("prior", path)?;
            (align_csmf(load_csmf(bytes.as_slice())?, &p)?, "file")
        }
        None => {
            run.note("no prior given; uniform prior used");
            (Csmf::uniform(p.cause_names().to_vec())?, "uniform")
        }
    };
    let r = run_interva_with(&s, &p, &prior, exec)?;

    let causes = p.cause_names();
    let rows: Vec<Vec<String>> = (0..s.n_deaths())
        .map(|j| {
            let mut row = vec![s.death_ids()[j].clone(), s.missing_count(j).to_string()];
            match &r.per_death_probs[j] {
                Some(probs) => {
                    row.push("included".into());
                    row.extend(probs.iter().copied().map(num));
                }
                None => {
                    row.push("excluded".into());
                    row.extend(std::iter::repeat_n(String::new(), causes.len()));
                }
            }
            row
        })
        .collect();
    run.write("per_death.csv", |w| {
        write_table(
            &header_with(&["death_id", "missing", "status"], causes),
            &rows,
            w,
        )
    })?;
    run.write("csmf.csv", |w| write_csmf(&r.csmf, w))?;
    let excluded: Vec<Vec<String>> = (0..s.n_deaths())
        .filter(|&j| r.propensity_underflow_flags[j])
        .map(|j| {
            vec![
                s.death_ids()[j].clone(),
                "zero propensity under every cause".into(),
            ]
        })
        .collect();
    run.write("exclusions.csv", |w| {
        write_table(&["death_id", "reason"], &excluded, w)
    })?;
    if !excluded.is_empty() {
        run.note(format!("{} deaths excluded from the CSMF", excluded.len()));
    }
    run.resolved = json!({
        "p_format": a.data.p_format,
        "prior": source,
        "prior_fractions": prior.fractions(),
        "deaths": s.n_deaths(),
        "included": r.included_count(),
        "excluded": r.undefined_count(),
    });
    println!(
        "interva: {} deaths, {} excluded",
        s.n_deaths(),
        r.undefined_count()
    );
    Ok(exit::SUCCESS)
}

fn resolve_gibbs(
    g: &GibbsArgs,
    seed: Option<u64>,
    exec: Execution,
    run: &mut Run,
) -> anyhow::Result<GibbsConfig> {
    let mut cfg = match &g.gibbs_config {
        Some(path) => {
            let bytes = run.input("gibbs_config", path)?;
            serde_json::from_slice(&bytes)
                .map_err(|e| input_error(format!("bad sampler config {}: {e}", path.display())))?
        }
        None => GibbsConfig::default(),
    };
    if let Some(v) = g.chains {
        cfg.n_chains = v;
    }
    if let Some(v) = g.iterations {
        cfg.n_iterations = v;
    }
    if let Some(v) = g.burn_in {
        cfg.burn_in = v;
    }
    if let Some(v) = g.thin {
        cfg.thin = v;
    }
    if let Some(v) = g.alpha {
        cfg.alpha = Alpha::Symmetric(v);
    }
    if let Some(v) = g.epsilon {
        cfg.prob_clamp_epsilon = v;
    }
    if let Some(v) = seed {
        cfg.seed = v;
    }
    cfg.execution = exec;
    cfg.validate()?;
    Ok(cfg)
}

fn max_gap<'a>(a: impl IntoIterator<Item = &'a f64>, b: impl IntoIterator<Item = &'a f64>) -> f64 {
    a.into_iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn insilico(
    a: &InsilicoArgs,
    common: &Common,
    exec: Execution,
    run: &mut Run,
) -> anyhow::Result<u8> {
    let (s, p) = load_data(&a.data, run)?;
    let cfg = resolve_gibbs(&a.gibbs, common.seed, exec, run)?;
    run.seed = Some(cfg.seed);
    let chains = run_gibbs(&s, &p, &cfg)?;
    let post = summarize(&chains, a.level)?;
    let causes = p.cause_names();

    let rhat = |i: usize| {
        post.diagnostics
            .as_ref()
            .map_or("NA".to_string(), |d| num(d[i]))
    };
    let summary_rows: Vec<Vec<String>> = causes
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let (lo, hi) = post.csmf_intervals[i];
            vec![
                c.clone(),
                num(post.csmf_mean.fractions()[i]),
                num(lo),
                num(hi),
                rhat(i),
            ]
        })
        .collect();
    run.write("csmf_summary.csv", |w| {
        write_table(
            &["cause", "mean", "lower", "upper", "rhat"],
            &summary_rows,
            w,
        )
    })?;

    let top = post.top_causes();
    let per_death: Vec<Vec<String>> = (0..s.n_deaths())
        .map(|j| {
            let mut row = vec![
                s.death_ids()[j].clone(),
                s.missing_count(j).to_string(),
                causes[top[j]].clone(),
            ];
            row.extend(post.per_death_cause_probs[j].iter().copied().map(num));
            row
        })
        .collect();
    run.write("per_death.csv", |w| {
        write_table(
            &header_with(&["death_id", "missing", "top_cause"], causes),
            &per_death,
            w,
        )
    })?;
    let rb: Vec<Vec<String>> = (0..s.n_deaths())
        .map(|j| {
            std::iter::once(s.death_ids()[j].clone())
                .chain(post.per_death_probs_rb[j].iter().copied().map(num))
                .collect()
        })
        .collect();
    run.write("per_death_rb.csv", |w| {
        write_table(&header_with(&["death_id"], causes), &rb, w)
    })?;
    let intervals: Vec<Vec<String>> = (0..s.n_deaths())
        .flat_map(|j| {
            let post = &post;
            let id = &s.death_ids()[j];
            causes.iter().enumerate().map(move |(n, c)| {
                let (lo, hi) = post.per_death_intervals[j][n];
                vec![
                    id.clone(),
                    c.clone(),
                    num(post.per_death_cause_probs[j][n]),
                    num(lo),
                    num(hi),
                ]
            })
        })
        .collect();
    run.write("per_death_intervals.csv", |w| {
        write_table(
            &["death_id", "cause", "probability", "lower", "upper"],
            &intervals,
            w,
        )
    })?;

    if a.raw_draws {
        let f_rows: Vec<Vec<String>> = chains
            .iter()
            .flat_map(|c| {
                c.f_draws.iter().enumerate().map(move |(t, f)| {
                    [c.chain_id.to_string(), t.to_string()]
                        .into_iter()
                        .chain(f.iter().copied().map(num))
                        .collect()
                })
            })
            .collect();
        run.write("draws_csmf.csv", |w| {
            write_table(&header_with(&["chain", "draw"], causes), &f_rows, w)
        })?;
        let y_rows: Vec<Vec<String>> = chains
            .iter()
            .flat_map(|c| {
                c.y_draws.iter().enumerate().map(move |(t, y)| {
                    [c.chain_id.to_string(), t.to_string()]
                        .into_iter()
                        .chain(y.iter().map(|&k| causes[k].clone()))
                        .collect()
                })
            })
            .collect();
        run.write("draws_causes.csv", |w| {
            write_table(&header_with(&["chain", "draw"], s.death_ids()), &y_rows, w)
        })?;
    }

    let converged = match post.converged {
        Some(true) => "yes",
        Some(false) => "no",
        None => {
            run.note("convergence diagnostics unavailable with a single chain");
            "unavailable"
        }
    };
    if post.converged == Some(false) {
        run.note(format!(
            "some causes have scale reduction above {}",
            va_core::insilico::CONVERGENCE_THRESHOLD
        ));
    }

    let mut oracle = serde_json::Value::Null;
    if a.oracle_check {
        let alpha = cfg.alpha.resolve(p.n_causes())?;
        let exact = exact_posterior_oracle(&s, &p, &alpha, cfg.prob_clamp_epsilon)?;
        let csmf_gap = max_gap(post.csmf_mean.fractions(), &exact.csmf_mean);
        let death_gap = max_gap(
            post.per_death_cause_probs.iter().flatten(),
            exact.per_death.iter().flatten(),
        );
        let rb_gap = max_gap(
            post.per_death_probs_rb.iter().flatten(),
            exact.per_death.iter().flatten(),
        );
        let rows = vec![
            vec!["csmf_mean".to_string(), num(csmf_gap)],
            vec!["per_death_frequency".to_string(), num(death_gap)],
            vec!["per_death_rb".to_string(), num(rb_gap)],
        ];
        run.write("oracle_check.csv", |w| {
            write_table(&["quantity", "max_abs_deviation"], &rows, w)
        })?;
        println!("oracle check: max deviation csmf {csmf_gap:.5}, per-death {death_gap:.5}, averaged L {rb_gap:.5}");
        oracle = json!({ "csmf_mean": csmf_gap, "per_death_frequency": death_gap, "per_death_rb": rb_gap });
    }

    run.resolved = json!({
        "p_format": a.data.p_format,
        "gibbs": cfg,
        "level": a.level,
        "raw_draws": a.raw_draws,
        "retained_draws": post.n_draws,
        "converged": converged,
        "oracle_check": oracle,
    });
    println!(
        "insilico: {} deaths, {} retained draws, converged: {converged}",
        s.n_deaths(),
        post.n_draws
    );
    Ok(exit::SUCCESS)
}

fn resolve_scenario(
    a: &ScenarioArgs,
    seed: Option<u64>,
    run: &mut Run,
) -> anyhow::Result<ScenarioConfig> {
    let mut cfg = match &a.scenario_config {
        Some(path) => {
            let bytes = run.input("scenario_config", path)?;
            let text = String::from_utf8(bytes)
                .map_err(|_| input_error(format!("{} is not UTF-8", path.display())))?;
            if text.trim_start().starts_with('{') {
                serde_json::from_str(&text).map_err(|e| {
                    input_error(format!("bad scenario config {}: {e}", path.display()))
                })?
            } else {
                ScenarioConfig::parse(&text).with_context(|| format!("in {}", path.display()))?
            }
        }
        None => ScenarioConfig::default(),
    };
    if let Some(s) = a.scenario {
        cfg.scenario = s;
    }
    if let Some(v) = a.deaths {
        cfg.n_deaths = v;
    }
    if let Some(v) = a.causes {
        cfg.n_causes = v;
    }
    if let Some(v) = a.n_symptoms {
        cfg.n_symptoms = v;
    }
    if let Some(v) = seed {
        cfg.seed = v;
    }
    cfg.validate()?;
    run.seed = Some(cfg.seed);
    Ok(cfg)
}

fn simulate(a: &SimulateArgs, common: &Common, run: &mut Run) -> anyhow::Result<u8> {
    let cfg = resolve_scenario(&a.scenario, common.seed, run)?;
    let d = make_scenario(&cfg)?;
    run.write("symptoms.csv", |w| write_symptoms(&d.symptoms, w))?;
    run.write("truth.csv", |w| {
        write_truth(
            d.symptoms.death_ids(),
            &d.true_causes,
            d.p_given.cause_names(),
            w,
        )
    })?;
    run.write("probs_true.csv", |w| {
        write_cond_prob_matrix(&d.p_true, CellMode::Numeric, w)
    })?;
    run.write("probs.csv", |w| {
        write_cond_prob_matrix(&d.p_given, CellMode::Numeric, w)
    })?;
    run.write("true_csmf.csv", |w| write_csmf(&d.true_csmf, w))?;
    run.write("scenario.txt", |w| {
        w.extend_from_slice(cfg.to_text().as_bytes());
        Ok(())
    })?;
    run.resolved = json!({ "scenario": cfg });
    println!(
        "simulate: {} scenario, {} deaths, {} causes, {} symptoms",
        cfg.scenario, cfg.n_deaths, cfg.n_causes, cfg.n_symptoms
    );
    Ok(exit::SUCCESS)
}

fn compare(a: &CompareArgs, common: &Common, exec: Execution, run: &mut Run) -> anyhow::Result<u8> {
    let cfg = resolve_scenario(&a.scenario, common.seed, run)?;
    // the sampler seed is derived per replicate from the scenario seed
    let gibbs = resolve_gibbs(&a.gibbs, None, exec, run)?;
    let opts = ComparisonOptions {
        replicates: a.replicates,
        interva_prior: match a.interva_prior {
            PriorChoice::Uniform => IntervaPrior::Uniform,
            PriorChoice::Truth => IntervaPrior::Truth,
        },
        histogram_bins: a.bins,
        execution: exec,
    };
    let report = run_comparison(&cfg, &gibbs, &opts)?;

    let cause_names: Vec<String> = (1..=cfg.n_causes).map(|i| format!("abs_err_{i}")).collect();
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            [
                r.replicate_id.to_string(),
                r.method.to_string(),
                num(r.individual_accuracy),
                num(r.csmf_tv),
            ]
            .into_iter()
            .chain(r.csmf_abs_errors.iter().copied().map(num))
            .collect()
        })
        .collect();
    run.write("replicates.csv", |w| {
        write_table(
            &header_with(
                &["replicate", "method", "accuracy", "csmf_tv"],
                &cause_names,
            ),
            &rows,
            w,
        )
    })?;
    let failures: Vec<Vec<String>> = report
        .failures
        .iter()
        .map(|f| vec![f.replicate_id.to_string(), f.error.clone()])
        .collect();
    run.write("failures.csv", |w| {
        write_table(&["replicate", "error"], &failures, w)
    })?;
    if !failures.is_empty() {
        run.note(format!(
            "{} replicates failed and were left out of the summary",
            failures.len()
        ));
    }

    let mut summary = Vec::new();
    let mut hist = Vec::new();
    for m in &report.summary.methods {
        for (metric, spread, h) in [
            ("accuracy", &m.accuracy, &m.accuracy_histogram),
            ("csmf_tv", &m.csmf_tv, &m.tv_histogram),
        ] {
            summary.push(vec![
                m.method.to_string(),
                metric.to_string(),
                spread.n.to_string(),
                num(spread.mean),
                num(spread.min),
                num(spread.q1),
                num(spread.median),
                num(spread.q3),
                num(spread.p95),
                num(spread.max),
            ]);
            for (b, count) in h.counts.iter().enumerate() {
                hist.push(vec![
                    m.method.to_string(),
                    metric.to_string(),
                    num(h.edges[b]),
                    num(h.edges[b + 1]),
                    count.to_string(),
                ]);
            }
            println!(
                "compare: {:<10} {:<8} median {:.4}  [{:.4}, {:.4}]  p95 {:.4}",
                m.method, metric, spread.median, spread.min, spread.max, spread.p95
            );
        }
    }
    run.write("summary.csv", |w| {
        write_table(
            &[
                "method", "metric", "n", "mean", "min", "q1", "median", "q3", "p95", "max",
            ],
            &summary,
            w,
        )
    })?;
    run.write("histograms.csv", |w| {
        write_table(&["method", "metric", "lower", "upper", "count"], &hist, w)
    })?;
    run.resolved = json!({
        "scenario": cfg,
        "gibbs": gibbs,
        "replicates": a.replicates,
        "histogram_bins": a.bins,
        "interva_prior": a.interva_prior,
        "replicates_ok": report.summary.replicates_ok,
        "replicates_failed": report.summary.replicates_failed,
    });
    Ok(exit::SUCCESS)
}

fn oracle(a: &OracleArgs, run: &mut Run) -> anyhow::Result<u8> {
    let (s, p) = load_data(&a.data, run)?;
    let alpha = vec![a.alpha; p.n_causes()];
    let exact = exact_posterior_oracle(&s, &p, &alpha, a.epsilon)?;
    let csmf = Csmf::new(exact.csmf_mean.clone(), p.cause_names().to_vec())?;
    run.write("csmf.csv", |w| write_csmf(&csmf, w))?;
    let rows: Vec<Vec<String>> = (0..s.n_deaths())
        .map(|j| {
            std::iter::once(s.death_ids()[j].clone())
                .chain(exact.per_death[j].iter().copied().map(num))
                .collect()
        })
        .collect();
    run.write("per_death.csv", |w| {
        write_table(&header_with(&["death_id"], p.cause_names()), &rows, w)
    })?;
    run.resolved = json!({ "p_format": a.data.p_format, "alpha": alpha, "epsilon": a.epsilon });
    println!(
        "oracle: enumerated {}^{} assignments",
        p.n_causes(),
        s.n_deaths()
    );
    Ok(exit::SUCCESS)
}

fn validate_p(a: &ValidateArgs, run: &mut Run) -> anyhow::Result<u8> {
    let bytes = run.input("probs", &a.probs)?;
    let p = load_cond_prob_matrix(bytes.as_slice(), a.mode.into())
        .with_context(|| format!("in {}", a.probs.display()))?;
    let set = match &a.constraints {
        Some(path) => {
            let text = run.input("constraints", path)?;
            parse_constraints(text.as_slice()).with_context(|| format!("in {}", path.display()))?
        }
        None => {
            run.note("no constraint file given; matrix checked for well-formedness only");
            ConstraintSet::default()
        }
    };
    let violations = validate_cond_prob_matrix(&p, &set, a.tol)?;
    let rows: Vec<Vec<String>> = violations
        .iter()
        .map(|v| {
            let observed: Vec<String> =
                v.observed.iter().map(|(k, x)| format!("{k}={x}")).collect();
            vec![
                (v.constraint_index + 1).to_string(),
                v.constraint.to_string(),
                v.cause.clone(),
                observed.join(" "),
                num(v.residual),
            ]
        })
        .collect();
    run.write("violations.csv", |w| {
        write_table(
            &["constraint", "rule", "cause", "observed", "residual"],
            &rows,
            w,
        )
    })?;
    for v in &violations {
        println!("{v}");
    }
    run.resolved = json!({ "mode": a.mode, "tol": a.tol, "constraints": set.len() });
    println!(
        "validate-p: {} constraints, {} violations",
        set.len(),
        violations.len()
    );
    Ok(if violations.is_empty() {
        exit::SUCCESS
    } else {
        exit::FINDINGS
    })
}
