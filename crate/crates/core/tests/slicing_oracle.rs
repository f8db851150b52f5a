mod common;

use std::collections::BTreeSet;

use faultaug::minilang::random::{random_inputs, random_program_source};
use faultaug::minilang::{execute, parse, ExecConfig, Oracle};
use faultaug::slicing::{dynamic_slice, SliceCriterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn dynamic_slice_matches_brute_force_closure() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    let mut nontrivial = 0;
    while checked < 100 {
        let src = random_program_source(&mut rng, 50);
        let program = parse(&src).unwrap();
        let record = execute(&program, &random_inputs(&mut rng), &Oracle::new(), ExecConfig::default()).unwrap();
        let candidates: Vec<_> = record.trace.iter().filter(|o| !o.uses.is_empty()).collect();
        if candidates.is_empty() {
            continue;
        }
        let occ = candidates[rng.random_range(0..candidates.len())];
        let vars: BTreeSet<String> = occ.uses.iter().take(rng.random_range(1..=occ.uses.len())).cloned().collect();
        let criterion = SliceCriterion::new(occ.stmt, vars.clone(), "t").unwrap();
        let got = dynamic_slice(&record, &criterion).unwrap();
        let want = common::brute_force_slice(&program, &record, occ.stmt, &vars);
        assert_eq!(got, want, "criterion {} {vars:?}\n{src}", occ.stmt);
        checked += 1;
        nontrivial += usize::from(got.len() > 2);
    }
    assert!(nontrivial > 50, "only {nontrivial} slices with more than two statements");
}

#[test]
fn slice_contains_criterion_and_only_executed_statements() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let program = parse(&random_program_source(&mut rng, 40)).unwrap();
        let record = execute(&program, &random_inputs(&mut rng), &Oracle::new(), ExecConfig::default()).unwrap();
        let Some(occ) = record.trace.iter().rev().find(|o| !o.uses.is_empty()) else { continue };
        let c = SliceCriterion::new(occ.stmt, occ.uses.clone(), "t").unwrap();
        let slice = dynamic_slice(&record, &c).unwrap();
        assert!(slice.contains(&occ.stmt));
        assert!(slice.iter().all(|s| record.coverage[s.col()] == 1));
    }
}
