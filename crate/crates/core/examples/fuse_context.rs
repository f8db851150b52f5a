// Fault semantic context, contribution ranking and their fusion.

use std::error::Error;

use faultaug::pipeline::{analyze_version, golden_version, RunConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let a = analyze_version(&golden_version(), &RunConfig::default())?;
    println!("StmSC     {:?}", a.semantic.stm_sc);
    println!("StmPCA    {:?} (m = {})", a.statistical.stm_pca, a.statistical.m);
    let contrib: Vec<String> = a.statistical.contributions.iter().map(|c| format!("{c:.3}")).collect();
    println!("contrib   [{}]", contrib.join(", "));
    println!("StmFusion {:?} (K = {}, K^f = {})", a.fused.stm_fusion, a.fused.target_dim, a.fused.k_f);
    for (row, err) in a.fused.matrix.iter().zip(&a.dataset.errors) {
        println!("  {row:?} -> {err}");
    }
    println!("{}", a.dump().to_json());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
