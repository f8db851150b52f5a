// Seeds the off-by-one fault into the sixteen-statement program, runs the
// suite and slices each failing run from its first wrong output.

use std::error::Error;

use faultaug::minilang::{execute, parse, seed_fault, ExecConfig, Inputs, Oracle};
use faultaug::pipeline::templates::{golden_mutation, GOLDEN_SOURCE, GOLDEN_TESTS};
use faultaug::slicing::{dynamic_slice, SliceCriterion};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let original = parse(GOLDEN_SOURCE)?;
    let faulty = seed_fault(&original, &golden_mutation())?;
    println!("mutation: {}", golden_mutation());
    for (id, x, y) in GOLDEN_TESTS {
        let inputs: Inputs = [("x".to_string(), x), ("y".to_string(), y)].into();
        let oracle: Oracle = execute(&original, &inputs, &Oracle::new(), ExecConfig::default())?.output_map();
        let run = execute(&faulty, &inputs, &oracle, ExecConfig::default())?;
        print!("{id} x={x:<4} y={y:<4} {:?}", run.verdict);
        if let Some(c) = SliceCriterion::for_failure(&run, id) {
            if run.is_failing() {
                let slice = dynamic_slice(&run, &c)?;
                print!("  slice from {} {:?}: {:?}", c.output_stmt, c.output_vars, slice);
            }
        }
        println!();
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
