use faultaug::dlfl::*;
use faultaug::minilang::Stmt;
use faultaug::spectra::{rank, CoverageDataset};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// 32 rows over 5 statements, failing iff S3 covered.
fn separable() -> CoverageDataset {
    let mut matrix = Vec::new();
    let mut errors = Vec::new();
    for bits in 0u8..32 {
        let row: Vec<u8> = (0..5).map(|j| (bits >> j) & 1).collect();
        errors.push(row[2]);
        matrix.push(row);
    }
    CoverageDataset::new((1..=32).map(|i| format!("t{i}")).collect(), (1..=5).map(Stmt).collect(), matrix, errors)
        .unwrap()
}

/// Same rows with every passing row repeated ten times.
fn imbalanced(ds: &CoverageDataset) -> CoverageDataset {
    let mut out = ds.clone();
    for i in 0..ds.rows() {
        if ds.errors[i] == 0 {
            for c in 1..10 {
                out.push_row(format!("{}x{c}", ds.test_ids[i]), ds.matrix[i].clone(), 0, ds.provenance[i]);
            }
        }
    }
    out
}

fn decider(ds: &CoverageDataset, seed: u64) -> (usize, f64) {
    let cfg = MlpFlConfig { steps: 100, ..MlpFlConfig::default() };
    let (model, _) = train_mlpfl(ds, &cfg, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
    let scores = virtual_suspiciousness(&model);
    let best_other = scores.iter().enumerate().filter(|(j, _)| *j != 2).map(|(_, s)| *s).fold(f64::MIN, f64::max);
    (rank(&scores).unwrap().rank_of(Stmt(3)).unwrap(), scores[2] - best_other)
}

#[test]
fn balanced_data_ranks_the_decider_higher() {
    let bal = separable();
    let imb = imbalanced(&bal);
    assert_eq!(imb.passing(), 10 * imb.failing());
    let outcomes: Vec<_> = (0..20).map(|seed| (decider(&bal, seed), decider(&imb, seed))).collect();
    // Ranks tie at the top on separable data; the score margin over the
    // runner-up then decides.
    let wins = outcomes.iter().filter(|((rb, mb), (ri, mi))| rb < ri || (rb == ri && mb > mi)).count();
    assert!(wins > 10, "balanced won {wins}/20");
}
