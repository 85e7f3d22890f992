//! Runs the three simulation scenarios and prints per-method summaries.
//!
//! `cargo run --release -p va-core --example scenarios -- [replicates]`

use std::time::Instant;

use va_core::eval::{run_comparison, ComparisonOptions, Method};
use va_core::insilico::GibbsConfig;
use va_core::simgen::{Scenario, ScenarioConfig};

fn main() {
    let replicates = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(100);
    let opts = ComparisonOptions {
        replicates,
        ..ComparisonOptions::default()
    };
    for scenario in Scenario::ALL {
        let start = Instant::now();
        let report = run_comparison(
            &ScenarioConfig::for_scenario(scenario),
            &GibbsConfig::default(),
            &opts,
        )
        .expect("comparison");
        println!(
            "{scenario} ({:.1}s, {} failed)",
            start.elapsed().as_secs_f64(),
            report.failures.len()
        );
        for m in Method::ALL {
            let s = report.summary.method(m).unwrap();
            println!(
                "  {m:<10} accuracy median {:.3} [{:.3}, {:.3}]  tv median {:.3} p95 {:.3}",
                s.accuracy.median, s.accuracy.min, s.accuracy.max, s.csmf_tv.median, s.csmf_tv.p95
            );
        }
    }
}
