// Trains the class-conditional denoiser on fused golden rows, round-trips
// a checkpoint, and samples failing rows with the ancestral chain and
// DPM-Solver.

use std::error::Error;

use faultaug::augment::binarize;
use faultaug::diffusion::{ancestral_sample, dpm_solve, encode_bits, make_schedule, train, DpmOptions, TrainConfig};
use faultaug::nn::{load_checkpoint, save_checkpoint, Class, Denoiser, DenoiserConfig, Module};
use faultaug::pipeline::{analyze_version, golden_version, RunConfig};
use faultaug::rng::substream;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let a = analyze_version(&golden_version(), &RunConfig::default())?;
    let data: Vec<(Vec<f64>, Class)> = a
        .fused
        .matrix
        .iter()
        .zip(&a.dataset.errors)
        .map(|(r, &e)| (encode_bits(r), if e == 1 { Class::Fail } else { Class::Pass }))
        .collect();
    let sched = make_schedule(1000, 1e-4, 0.02)?;
    let mut model = Denoiser::new(DenoiserConfig::new(a.fused.stm_fusion.len()), &mut substream(0, "init", "example"))?;
    let cfg = TrainConfig { epochs: 100, ..TrainConfig::default() };
    let report = train(&mut model, &data, &sched, &cfg, &mut substream(0, "training", "example"))?;
    println!(
        "{} parameters, loss {:.4} -> {:.4}",
        model.param_count(),
        report.epoch_losses[0],
        report.epoch_losses.last().unwrap()
    );

    let dir = std::env::temp_dir().join(format!("faultaug-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("denoiser.ckpt");
    save_checkpoint(&model, &path)?;
    let model = load_checkpoint(&path)?;
    std::fs::remove_dir_all(&dir)?;

    let mut rng = substream(0, "sampling", "example");
    println!("real failing rows: {:?}", a.fused.matrix.iter().zip(&a.dataset.errors).filter(|(_, e)| **e == 1).map(|(r, _)| r).collect::<Vec<_>>());
    for _ in 0..3 {
        let fast = binarize(&dpm_solve(&model, &sched, Class::Fail, 2.0, &DpmOptions::default(), &mut rng)?)?;
        println!("dpm-solver (25 steps): {fast:?}");
    }
    let slow = binarize(&ancestral_sample(&model, &sched, Class::Fail, 2.0, 1.0, &mut rng)?)?;
    println!("ancestral (1000 steps): {slow:?}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
