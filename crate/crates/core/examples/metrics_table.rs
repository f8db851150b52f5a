// Top-K, MFR, MAR and RImp for origin against resampling over a few
// generated versions.

use std::error::Error;

use faultaug::augment::Scenario;
use faultaug::pipeline::templates::builtin_templates;
use faultaug::pipeline::{aggregate, generate_corpus, run_versions, FlMethod, RunConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let corpus = generate_corpus(&builtin_templates()[..5], 0)?;
    let cfg = RunConfig {
        scenarios: vec![Scenario::Origin, Scenario::Resample],
        methods: vec![FlMethod::Dstar, FlMethod::Ochiai],
        ..RunConfig::default()
    };
    let results = corpus.iter().map(|v| v.id.clone()).zip(run_versions(&corpus, &cfg, 1)).collect();
    let out = aggregate(results, &cfg)?;
    print!("{}", out.report.to_table());
    print!("{}", out.report.rimp_csv());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
