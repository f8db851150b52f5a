use faultaug::minilang::Stmt;
use faultaug::spectra::*;
use proptest::prelude::*;

fn fixture() -> CoverageDataset {
    CoverageDataset::new(
        (1..=6).map(|i| format!("t{i}")).collect(),
        vec![Stmt(1), Stmt(2), Stmt(3)],
        vec![
            vec![1, 0, 1],
            vec![0, 0, 1],
            vec![1, 0, 1],
            vec![0, 0, 1],
            vec![0, 0, 1],
            vec![1, 0, 1],
        ],
        vec![0, 0, 1, 0, 0, 1],
    )
    .unwrap()
}

fn close(a: f64, b: f64) {
    assert!((a - b).abs() < 1e-12, "{a} vs {b}");
}

#[test]
fn hand_computed_scores() {
    let t = tally(&fixture());
    // ef=2 ep=1 nf=0 np=3
    close(Formula::Dstar.eval(t[0]), 4.0);
    close(Formula::Ochiai.eval(t[0]), 2.0 / 6f64.sqrt());
    close(Formula::Barinel.eval(t[0]), 2.0 / 3.0);
    close(Formula::Gp02.eval(t[0]), 2.0 * (2.0 + 3f64.sqrt()) + 1.0);
    // ef=0 ep=0 nf=2 np=4
    close(Formula::Dstar.eval(t[1]), 0.0);
    close(Formula::Ochiai.eval(t[1]), 0.0);
    close(Formula::Barinel.eval(t[1]), 0.0);
    close(Formula::Gp02.eval(t[1]), 4.0);
    // ef=2 ep=4 nf=0 np=0
    close(Formula::Dstar.eval(t[2]), 1.0);
    close(Formula::Ochiai.eval(t[2]), 2.0 / 12f64.sqrt());
    close(Formula::Barinel.eval(t[2]), 1.0 / 3.0);
    close(Formula::Gp02.eval(t[2]), 6.0);
}

#[test]
fn fixture_rankings() {
    let t = tally(&fixture());
    for f in [Formula::Dstar, Formula::Ochiai, Formula::Barinel] {
        let r = rank(&score(f, &t)).unwrap();
        assert_eq!(r.order(), vec![Stmt(1), Stmt(3), Stmt(2)], "{f}");
    }
    let r = rank(&score(Formula::Gp02, &t)).unwrap();
    assert_eq!(r.order(), vec![Stmt(1), Stmt(3), Stmt(2)]);
}

#[test]
fn division_by_zero_scores_zero() {
    let never_failing = Tally { ef: 0, ep: 3, nf: 0, np: 2 };
    assert_eq!(Formula::Dstar.eval(Tally { ef: 2, ep: 0, nf: 0, np: 4 }), 0.0);
    assert_eq!(Formula::Ochiai.eval(never_failing), 0.0);
    assert_eq!(Formula::Barinel.eval(Tally { ef: 0, ep: 0, nf: 1, np: 1 }), 0.0);
    for f in Formula::ALL {
        assert!(f.eval(never_failing).is_finite());
    }
}

fn dataset() -> impl Strategy<Value = CoverageDataset> {
    (1usize..12, 1usize..10).prop_flat_map(|(m, n)| {
        (
            prop::collection::vec(prop::collection::vec(0u8..2, n), m),
            prop::collection::vec(0u8..2, m),
        )
            .prop_map(move |(matrix, errors)| {
                CoverageDataset::new(
                    (0..m).map(|i| format!("t{i}")).collect(),
                    (1..=n).map(Stmt).collect(),
                    matrix,
                    errors,
                )
                .unwrap()
            })
    })
}

proptest! {
    #[test]
    fn tallies_partition_the_suite(ds in dataset()) {
        let fails = ds.failing();
        for t in tally(&ds) {
            prop_assert_eq!(t.ef + t.ep + t.nf + t.np, ds.rows());
            prop_assert_eq!(t.ef + t.nf, fails);
        }
    }

    #[test]
    fn scores_are_finite_and_nonnegative(ds in dataset()) {
        for f in Formula::ALL {
            for s in score(f, &tally(&ds)) {
                prop_assert!(s.is_finite() && s >= 0.0);
            }
        }
    }

    #[test]
    fn ranking_is_sorted_permutation(scores in prop::collection::vec(
        prop_oneof![Just(0.0), Just(1.0), Just(2.5), -10.0f64..10.0], 1..20)) {
        let r = rank(&scores).unwrap();
        let mut seen: Vec<usize> = r.order().iter().map(|s| s.0).collect();
        seen.sort();
        prop_assert_eq!(seen, (1..=scores.len()).collect::<Vec<_>>());
        for (i, w) in r.entries.windows(2).enumerate() {
            prop_assert_eq!(w[0].rank, i + 1);
            prop_assert!(w[0].score > w[1].score || (w[0].score == w[1].score && w[0].stmt < w[1].stmt));
            prop_assert!(r.best_case_rank_of(w[1].stmt).unwrap() <= w[1].rank);
        }
    }

    #[test]
    fn ranking_ignores_input_order(scores in prop::collection::vec(0u8..4, 1..15), seed in any::<u64>()) {
        let scores: Vec<f64> = scores.into_iter().map(f64::from).collect();
        let stmts: Vec<Stmt> = (1..=scores.len()).map(Stmt).collect();
        let mut perm: Vec<usize> = (0..scores.len()).collect();
        let mut s = seed;
        for i in (1..perm.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let a = rank_statements(&stmts, &scores).unwrap();
        let b = rank_statements(
            &perm.iter().map(|&j| stmts[j]).collect::<Vec<_>>(),
            &perm.iter().map(|&j| scores[j]).collect::<Vec<_>>(),
        ).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn csv_round_trip(ds in dataset()) {
        let mut buf = Vec::new();
        ds.write_csv(&mut buf, true).unwrap();
        let back = CoverageDataset::read_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back, ds);
    }
}
