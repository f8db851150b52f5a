mod common;

use common::diffusion::*;
use faultaug::diffusion::{make_schedule, q_sample, DpmOptions, Spacing};

#[test]
fn alpha_bar_identities_hold() {
    let s = make_schedule(1000, 1e-4, 0.02).unwrap();
    let (err, decreasing) = alpha_bar_identities(&s);
    assert!(err <= 1e-12, "{err}");
    assert!(decreasing);
    assert_eq!(s.alpha_bar[0], 1.0);
    assert_eq!(s.sigma2[1], 0.0);
    for t in 2..=1000 {
        let want = (1.0 - s.alpha_bar[t - 1]) / (1.0 - s.alpha_bar[t]) * s.beta[t];
        assert!((s.sigma2[t] - want).abs() < 1e-15);
        assert!(s.sigma2[t] <= s.beta[t]);
    }
}

#[test]
fn iterated_forward_chain_matches_closed_form_moments() {
    let s = make_schedule(1000, 1e-4, 0.02).unwrap();
    for (t, x0, seed) in [(10, 1.0, 1), (250, -1.0, 2), (1000, 1.0, 3)] {
        let (zm, zv) = forward_moment_z(&s, t, x0, 10_000, seed);
        assert!(zm < 3.0 && zv < 3.0, "t={t}: {zm} {zv}");
    }
}

#[test]
fn q_sample_without_noise_is_exact() {
    let s = make_schedule(1000, 1e-4, 0.02).unwrap();
    let x0 = [1.0, -1.0, 0.5];
    for t in [1, 37, 1000] {
        let x = q_sample(&x0, t, &[0.0; 3], &s).unwrap();
        for (a, b) in x.iter().zip(&x0) {
            assert_eq!(*a, s.alpha_bar[t].sqrt() * b);
        }
    }
}

#[test]
fn first_order_dpm_on_integer_grid_is_the_deterministic_chain() {
    let s = make_schedule(1000, 1e-4, 0.02).unwrap();
    let err = dpm1_vs_deterministic_chain(&s);
    assert!(err < 1e-6, "{err}");
}

#[test]
fn linear_model_matches_fine_step_oracle() {
    let s = make_schedule(1000, 1e-4, 0.02).unwrap();
    let opts = DpmOptions { steps: 100, order: 2, spacing: Spacing::LogSnr };
    let (solver, oracle) = linear_model_errors(&s, 1.0, &opts);
    assert!(oracle < 1e-9, "rk4 vs closed form {oracle}");
    assert!(solver < 1e-3, "{solver}");
}

#[test]
fn second_order_beats_first_order() {
    let s = make_schedule(1000, 1e-4, 0.02).unwrap();
    let e = |order| linear_model_errors(&s, 1.0, &DpmOptions { steps: 25, order, spacing: Spacing::LogSnr }).0;
    assert!(e(2) < e(1), "{} vs {}", e(2), e(1));
}
