// Writes a corpus to disk, runs the pipeline from a TOML config and lists
// the emitted files.

use std::error::Error;

use faultaug::pipeline::templates::builtin_templates;
use faultaug::pipeline::{corpus_gen, run_pipeline, RunConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let root = std::env::temp_dir().join(format!("faultaug-corpus-{}", std::process::id()));
    let ids = corpus_gen(&builtin_templates()[..3], 42, &root.join("corpus"))?;
    println!("corpus: {ids:?}");
    let toml = format!(
        "corpus = {:?}\noutput = {:?}\nscenarios = [\"origin\", \"undersample\"]\nmethods = [\"gp02\", \"barinel\"]\nseed = 42\n",
        root.join("corpus"),
        root.join("out")
    );
    let cfg = RunConfig::from_toml(&toml)?;
    let out = run_pipeline(&cfg)?;
    print!("{}", out.report.to_table());
    for e in std::fs::read_dir(root.join("out"))? {
        println!("  {}", e?.file_name().to_string_lossy());
    }
    std::fs::remove_dir_all(&root)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
