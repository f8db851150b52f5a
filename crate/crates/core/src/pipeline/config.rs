use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::augment::Scenario;
use crate::eval::TiePolicy;
use crate::spectra::Formula;

/// Columns SFL and MLP-FL are evaluated over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalSpace {
    /// All N statements.
    #[default]
    Full,
    /// Only the fused context columns.
    Context,
}

impl FromStr for EvalSpace {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "full" => Ok(EvalSpace::Full),
            "context" => Ok(EvalSpace::Context),
            _ => Err(PipelineError::Config(format!("unknown eval space `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlMethod {
    Dstar,
    Ochiai,
    Barinel,
    Gp02,
    Mlpfl,
}

impl FlMethod {
    pub const ALL: [FlMethod; 5] =
        [FlMethod::Dstar, FlMethod::Ochiai, FlMethod::Barinel, FlMethod::Gp02, FlMethod::Mlpfl];

    pub fn name(self) -> &'static str {
        match self {
            FlMethod::Dstar => "dstar",
            FlMethod::Ochiai => "ochiai",
            FlMethod::Barinel => "barinel",
            FlMethod::Gp02 => "gp02",
            FlMethod::Mlpfl => "mlpfl",
        }
    }

    pub fn formula(self) -> Option<Formula> {
        match self {
            FlMethod::Dstar => Some(Formula::Dstar),
            FlMethod::Ochiai => Some(Formula::Ochiai),
            FlMethod::Barinel => Some(Formula::Barinel),
            FlMethod::Gp02 => Some(Formula::Gp02),
            FlMethod::Mlpfl => None,
        }
    }
}

impl FromStr for FlMethod {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FlMethod::ALL
            .into_iter()
            .find(|m| m.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| PipelineError::Config(format!("unknown method `{s}`")))
    }
}

/// Everything one run needs. Keys of the TOML form follow the parameter
/// table names (`steps`, `lr`, `beta_1`, `beta_T`, `alpha`, `gamma`,
/// `sample_steps`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: PathBuf,
    pub output: PathBuf,
    pub scenarios: Vec<Scenario>,
    pub methods: Vec<FlMethod>,
    pub seed: u64,
    pub eval_space: EvalSpace,
    pub tie_policy: TiePolicy,
    /// Diffusion steps T.
    pub steps: usize,
    pub lr: f64,
    pub beta_1: f64,
    #[serde(rename = "beta_T")]
    pub beta_t: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub sample_steps: usize,
    pub solver_order: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub p_uncond: f64,
    /// Leading eigenvectors; the 95% variance rule when absent.
    pub m: Option<usize>,
    /// Model width; derived from the fused context when absent.
    pub k: Option<usize>,
    /// Failing tests sliced per version; all when absent.
    pub max_failing: Option<usize>,
    pub reject_empty: bool,
    pub mlp_steps: usize,
    pub versions: Option<Vec<String>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            corpus: PathBuf::from("corpus"),
            output: PathBuf::from("out"),
            scenarios: Scenario::ALL.to_vec(),
            methods: FlMethod::ALL.to_vec(),
            seed: 0,
            eval_space: EvalSpace::Full,
            tie_policy: TiePolicy::Ordinal,
            steps: 1000,
            lr: 3e-4,
            beta_1: 1e-4,
            beta_t: 0.02,
            alpha: 1.0,
            gamma: 2.0,
            sample_steps: 25,
            solver_order: 2,
            epochs: 400,
            batch_size: 32,
            p_uncond: 0.1,
            m: None,
            k: None,
            max_failing: None,
            reject_empty: false,
            mlp_steps: 1000,
            versions: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if self.scenarios.is_empty() {
            return bad("scenario set is empty".into());
        }
        if self.steps == 0 || self.sample_steps == 0 {
            return bad("steps and sample_steps must be positive".into());
        }
        if !(self.beta_1 > 0.0 && self.beta_1 <= self.beta_t && self.beta_t < 1.0) {
            return bad(format!("beta range {}..{} invalid", self.beta_1, self.beta_t));
        }
        if !(self.alpha >= 0.0) || !(self.lr > 0.0) || !(0.0..=1.0).contains(&self.p_uncond) {
            return bad("alpha, lr or p_uncond out of range".into());
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive".into());
        }
        Ok(())
    }

    pub fn needs_model(&self) -> bool {
        self.scenarios.contains(&Scenario::Pcd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip_uses_table_names() {
        let cfg = RunConfig { k: Some(6), versions: Some(vec!["v1".into()]), ..RunConfig::default() };
        let text = cfg.to_toml();
        for key in ["steps", "lr", "beta_1", "beta_T", "alpha", "gamma", "sample_steps", "seed", "corpus", "scenarios"] {
            assert!(text.lines().any(|l| l.starts_with(&format!("{key} ="))), "{key} missing:\n{text}");
        }
        assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn partial_file_takes_defaults() {
        let cfg = RunConfig::from_toml("seed = 9\nscenarios = [\"origin\"]\nbeta_T = 0.03\n").unwrap();
        assert_eq!((cfg.seed, cfg.beta_t, cfg.steps), (9, 0.03, 1000));
        assert!(!cfg.needs_model());
    }

    #[test]
    fn rejects_bad_values() {
        assert!(RunConfig::from_toml("scenarios = []").is_err());
        assert!(RunConfig::from_toml("bogus = 1").is_err());
        assert!(RunConfig::from_toml("beta_1 = 0.5").is_err());
        assert!("mlpfl".parse::<FlMethod>().is_ok() && "sbfl".parse::<FlMethod>().is_err());
    }
}
