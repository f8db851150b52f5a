// MLP-FL: a perceptron fitted to coverage rows, queried with one-hot
// virtual tests.

use std::error::Error;

use faultaug::dlfl::{train_mlpfl, virtual_suspiciousness, MlpFlConfig};
use faultaug::pipeline::{analyze_version, golden_version, RunConfig};
use faultaug::rng::substream;
use faultaug::spectra::rank;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let a = analyze_version(&golden_version(), &RunConfig::default())?;
    let cfg = MlpFlConfig { steps: 500, ..MlpFlConfig::default() };
    let (model, losses) = train_mlpfl(&a.dataset, &cfg, &mut substream(0, "mlpfl", "example"))?;
    println!("BCE {:.4} -> {:.4}", losses[0], losses.last().unwrap());
    let ranked = rank(&virtual_suspiciousness(&model))?;
    for e in ranked.entries.iter().take(6) {
        println!("{:>2}. {:<4} {:.4}", e.rank, e.stmt.to_string(), e.score);
    }
    println!("fault {} at rank {}", a.faults[0], ranked.rank_of(a.faults[0]).unwrap());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
