// Coverage spectra and the four SFL formulas on the golden version.

use std::error::Error;

use faultaug::minilang::{execute, ExecConfig};
use faultaug::pipeline::golden_version;
use faultaug::spectra::{build_spectra, rank, score, tally, Formula};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let v = golden_version();
    let program = v.program()?;
    let mut records = Vec::new();
    for t in &v.tests {
        records.push(execute(&program, &t.inputs, &t.oracle, ExecConfig::default())?);
    }
    let ids: Vec<String> = v.tests.iter().map(|t| t.id.clone()).collect();
    let ds = build_spectra(&records, &ids)?;
    let tallies = tally(&ds);
    println!("{} tests ({} failing) over {} statements; fault at {:?}", ds.rows(), ds.failing(), ds.cols(), v.record.faults);
    for f in Formula::ALL {
        let ranked = rank(&score(f, &tallies))?;
        let top: Vec<String> = ranked.entries.iter().take(5).map(|e| format!("{}={:.3}", e.stmt, e.score)).collect();
        println!("{:<8} fault rank {:>2}  top: {}", f.name(), ranked.rank_of(v.record.faults[0]).unwrap(), top.join(" "));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
