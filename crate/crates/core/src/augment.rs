//! Balancing a coverage dataset: diffusion-generated failing rows confined to
//! the fused context, plus undersampling and resampling baselines.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::context::FusedContext;
use crate::diffusion::{dpm_solve, DiffusionError, DpmOptions, NoisePredictor, NoiseSchedule};
use crate::nn::Class;
use crate::spectra::{CoverageDataset, Provenance};

#[derive(Debug, Error)]
pub enum AugmentError {
    #[error("dataset has no failing tests")]
    NoFailingTests,
    #[error("generated sample contains a non-finite value")]
    NonFinite,
    #[error("model width {model} does not match context width {context}")]
    WidthMismatch { model: usize, context: usize },
    #[error("context statement {0} is not a dataset column")]
    UnknownStatement(crate::minilang::Stmt),
    #[error(transparent)]
    Diffusion(#[from] DiffusionError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Origin,
    Pcd,
    Undersample,
    Resample,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [Scenario::Origin, Scenario::Pcd, Scenario::Undersample, Scenario::Resample];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Origin => "origin",
            Scenario::Pcd => "pcd",
            Scenario::Undersample => "undersample",
            Scenario::Resample => "resample",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown scenario `{s}`"))
    }
}

/// A dataset after one balancing scenario. `dataset` holds every row, real
/// and synthetic, with provenance flags.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentedDataset {
    pub scenario: Scenario,
    pub dataset: CoverageDataset,
}

impl AugmentedDataset {
    pub fn origin(dataset: &CoverageDataset) -> Self {
        AugmentedDataset { scenario: Scenario::Origin, dataset: dataset.clone() }
    }

    pub fn synthetic_rows(&self) -> impl Iterator<Item = &Vec<u8>> {
        self.dataset
            .matrix
            .iter()
            .zip(&self.dataset.provenance)
            .filter(|(_, p)| **p == Provenance::Synthetic)
            .map(|(r, _)| r)
    }

    pub fn synthetic_count(&self) -> usize {
        self.synthetic_rows().count()
    }

    pub fn is_balanced(&self) -> bool {
        self.dataset.failing() == self.dataset.passing()
    }
}

/// Decodes a `{−1,+1}`-encoded sample: 1 iff strictly positive.
pub fn binarize(sample: &[f64]) -> Result<Vec<u8>, AugmentError> {
    sample.iter().map(|&v| if !v.is_finite() { Err(AugmentError::NonFinite) } else { Ok(u8::from(v > 0.0)) }).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerateConfig {
    pub gamma: f64,
    pub solver: DpmOptions,
    /// Redraw samples that decode to all zeros (up to `max_redraws` times).
    pub reject_empty: bool,
    pub max_redraws: usize,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        GenerateConfig { gamma: 2.0, solver: DpmOptions::default(), reject_empty: false, max_redraws: 20 }
    }
}

/// Samples fail-conditioned rows in the fused context until the failing
/// count matches the passing count. Each K-row is embedded into the full
/// width with zeros outside `StmFusion`.
pub fn generate_until_balanced<P: NoisePredictor + ?Sized, R: Rng + ?Sized>(
    model: &P,
    sched: &NoiseSchedule,
    dataset: &CoverageDataset,
    ctx: &FusedContext,
    cfg: &GenerateConfig,
    rng: &mut R,
) -> Result<AugmentedDataset, AugmentError> {
    let (fail, pass) = (dataset.failing(), dataset.passing());
    if fail == 0 {
        return Err(AugmentError::NoFailingTests);
    }
    if model.width() != ctx.stm_fusion.len() {
        return Err(AugmentError::WidthMismatch { model: model.width(), context: ctx.stm_fusion.len() });
    }
    let cols = ctx
        .stm_fusion
        .iter()
        .map(|s| dataset.stmt_ids.iter().position(|t| t == s).ok_or(AugmentError::UnknownStatement(*s)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = AugmentedDataset { scenario: Scenario::Pcd, dataset: dataset.clone() };
    for i in 0..pass.saturating_sub(fail) {
        let mut bits = binarize(&dpm_solve(model, sched, Class::Fail, cfg.gamma, &cfg.solver, rng)?)?;
        if cfg.reject_empty {
            for _ in 0..cfg.max_redraws {
                if bits.iter().any(|&b| b == 1) {
                    break;
                }
                bits = binarize(&dpm_solve(model, sched, Class::Fail, cfg.gamma, &cfg.solver, rng)?)?;
            }
        }
        let mut row = vec![0u8; dataset.cols()];
        for (&c, &b) in cols.iter().zip(&bits) {
            row[c] = b;
        }
        out.dataset.push_row(format!("syn{}", i + 1), row, 1, Provenance::Synthetic);
    }
    Ok(out)
}

/// Drops passing rows uniformly at random until both classes have the same size.
pub fn undersample<R: Rng + ?Sized>(dataset: &CoverageDataset, rng: &mut R) -> Result<AugmentedDataset, AugmentError> {
    let fail = dataset.failing();
    if fail == 0 {
        return Err(AugmentError::NoFailingTests);
    }
    let passing: Vec<usize> = (0..dataset.rows()).filter(|&i| dataset.errors[i] == 0).collect();
    let mut keep = vec![true; dataset.rows()];
    if passing.len() > fail {
        keep.fill(false);
        for i in (0..dataset.rows()).filter(|&i| dataset.errors[i] == 1) {
            keep[i] = true;
        }
        for j in index::sample(rng, passing.len(), fail) {
            keep[passing[j]] = true;
        }
    }
    fn pick<T: Clone>(v: &[T], keep: &[bool]) -> Vec<T> {
        v.iter().zip(keep).filter(|(_, k)| **k).map(|(x, _)| x.clone()).collect()
    }
    let ds = CoverageDataset {
        test_ids: pick(&dataset.test_ids, &keep),
        stmt_ids: dataset.stmt_ids.clone(),
        matrix: pick(&dataset.matrix, &keep),
        errors: pick(&dataset.errors, &keep),
        provenance: pick(&dataset.provenance, &keep),
    };
    Ok(AugmentedDataset { scenario: Scenario::Undersample, dataset: ds })
}

/// Duplicates failing rows uniformly with replacement until both classes
/// have the same size. Copies are flagged synthetic.
pub fn resample<R: Rng + ?Sized>(dataset: &CoverageDataset, rng: &mut R) -> Result<AugmentedDataset, AugmentError> {
    let failing: Vec<usize> = (0..dataset.rows()).filter(|&i| dataset.errors[i] == 1).collect();
    if failing.is_empty() {
        return Err(AugmentError::NoFailingTests);
    }
    let mut out = AugmentedDataset { scenario: Scenario::Resample, dataset: dataset.clone() };
    for n in 0..dataset.passing().saturating_sub(failing.len()) {
        let src = failing[rng.random_range(0..failing.len())];
        let id = format!("dup{}-{}", n + 1, dataset.test_ids[src]);
        out.dataset.push_row(id, dataset.matrix[src].clone(), 1, Provenance::Synthetic);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::{make_schedule, FnPredictor};
    use crate::minilang::Stmt;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ds(pass: usize, fail: usize) -> CoverageDataset {
        let n = pass + fail;
        let matrix: Vec<Vec<u8>> = (0..n).map(|i| (0..6).map(|j| u8::from((i + j) % 3 != 0)).collect()).collect();
        let errors = (0..n).map(|i| u8::from(i >= pass)).collect();
        CoverageDataset::new((1..=n).map(|i| format!("t{i}")).collect(), (1..=6).map(Stmt).collect(), matrix, errors)
            .unwrap()
    }

    fn ctx() -> FusedContext {
        FusedContext {
            stm_fusion: vec![Stmt(1), Stmt(3), Stmt(4), Stmt(6)],
            matrix: vec![],
            alpha: 1.0,
            k_f: 4,
            target_dim: 4,
            padded: vec![],
        }
    }

    #[test]
    fn binarize_sign_rule() {
        assert_eq!(binarize(&[-0.9, 0.3, -0.1, 2.0]).unwrap(), vec![0, 1, 0, 1]);
        assert_eq!(binarize(&[-1.0; 3]).unwrap(), vec![0; 3]);
        assert_eq!(binarize(&[0.0]).unwrap(), vec![0]);
        assert!(matches!(binarize(&[1.0, f64::NAN]), Err(AugmentError::NonFinite)));
    }

    #[test]
    fn pcd_adds_the_deficit_within_context() {
        let sched = make_schedule(50, 1e-4, 0.02).unwrap();
        // pushes every coordinate positive
        let m = FnPredictor { width: 4, f: |x: &[f64], _t: f64, _c: Class| x.iter().map(|v| v - 3.0).collect() };
        let base = ds(4, 2);
        let cfg = GenerateConfig { gamma: 0.0, ..Default::default() };
        let out = generate_until_balanced(&m, &sched, &base, &ctx(), &cfg, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(out.synthetic_count(), 2);
        assert!(out.is_balanced());
        assert_eq!(&out.dataset.matrix[..6], &base.matrix[..]);
        for row in out.synthetic_rows() {
            assert_eq!(row[1], 0);
            assert_eq!(row[4], 0);
        }
    }

    #[test]
    fn pcd_noop_and_errors() {
        let sched = make_schedule(10, 1e-4, 0.02).unwrap();
        let m = FnPredictor { width: 4, f: |x: &[f64], _t: f64, _c: Class| vec![0.0; x.len()] };
        let cfg = GenerateConfig::default();
        let balanced = ds(3, 3);
        let out = generate_until_balanced(&m, &sched, &balanced, &ctx(), &cfg, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(out.dataset, balanced);
        assert!(matches!(
            generate_until_balanced(&m, &sched, &ds(3, 0), &ctx(), &cfg, &mut ChaCha8Rng::seed_from_u64(0)),
            Err(AugmentError::NoFailingTests)
        ));
    }

    #[test]
    fn undersample_counts_and_determinism() {
        let base = ds(4, 2);
        let a = undersample(&base, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let b = undersample(&base, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert_eq!((a.dataset.passing(), a.dataset.failing()), (2, 2));
        assert_eq!(a, b);
        let bal = ds(3, 3);
        assert_eq!(undersample(&bal, &mut ChaCha8Rng::seed_from_u64(1)).unwrap().dataset, bal);
    }

    #[test]
    fn resample_duplicates_failures() {
        let out = resample(&ds(4, 2), &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert_eq!((out.dataset.passing(), out.dataset.failing()), (4, 4));
        let one = ds(5, 1);
        let out = resample(&one, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert_eq!(out.synthetic_count(), 4);
        for row in out.synthetic_rows() {
            assert_eq!(row, &one.matrix[5]);
        }
        assert!(matches!(resample(&ds(2, 0), &mut ChaCha8Rng::seed_from_u64(0)), Err(AugmentError::NoFailingTests)));
    }

    #[test]
    fn scenario_names() {
        for s in Scenario::ALL {
            assert_eq!(s.name().parse::<Scenario>().unwrap(), s);
        }
        assert!("smote".parse::<Scenario>().is_err());
    }
}
