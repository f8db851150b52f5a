// The four balancing scenarios on one generated corpus version.

use std::error::Error;

use faultaug::augment::Scenario;
use faultaug::pipeline::templates::builtin_templates;
use faultaug::pipeline::{analyze_version, augment_version, build_version, RunConfig};
use faultaug::rng::substream;
use faultaug::spectra::Provenance;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let template = &builtin_templates()[0];
    let version = build_version("01-triangle", template, &mut substream(0, "corpus", &template.name))?;
    let cfg = RunConfig { epochs: 100, ..RunConfig::default() };
    let a = analyze_version(&version, &cfg)?;
    let (datasets, loss) = augment_version(&a, &cfg)?;
    println!("{}: StmFusion {:?}, final diffusion loss {loss:?}", version.id, a.fused.stm_fusion);
    for sc in Scenario::ALL {
        let ds = &datasets[&sc].dataset;
        let synthetic = ds.provenance.iter().filter(|p| **p == Provenance::Synthetic).count();
        println!("{:<12} pass {:>2} fail {:>2} synthetic {:>2}", sc.name(), ds.passing(), ds.failing(), synthetic);
    }
    let pcd = &datasets[&Scenario::Pcd];
    for row in pcd.synthetic_rows().take(3) {
        println!("  synthetic {row:?}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
