//! Batch driver: corpus generation, per-version scenario runs, reports.

mod config;
mod corpus;
mod run;
pub mod templates;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{EvalSpace, FlMethod, RunConfig};
pub use corpus::{
    build_version, corpus_gen, corpus_ids, generate_corpus, golden_version, load_version, write_corpus,
    CorpusVersion, MutationRecord, TemplateError, TestCase, TESTS_PER_TEMPLATE,
};
pub use run::{
    aggregate, analyze_version, augment_version, emit_report, emit_version, generate_config, localize,
    run_pipeline, run_version, run_versions, schedule, train_config, train_model, RunOutput, VersionAnalysis,
    VersionOutcome,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("program does not parse: {0}")]
    Parse(String),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Exec(#[from] crate::minilang::ExecError),
    #[error(transparent)]
    Spectra(#[from] crate::spectra::SpectraError),
    #[error(transparent)]
    Slice(#[from] crate::slicing::SliceError),
    #[error(transparent)]
    Context(#[from] crate::context::ContextError),
    #[error(transparent)]
    Diffusion(#[from] crate::diffusion::DiffusionError),
    #[error(transparent)]
    Nn(#[from] crate::nn::NnError),
    #[error(transparent)]
    Augment(#[from] crate::augment::AugmentError),
    #[error(transparent)]
    Dlfl(#[from] crate::dlfl::DlflError),
    #[error(transparent)]
    Eval(#[from] crate::eval::EvalError),
}

impl PipelineError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        PipelineError::Io { path: path.to_path_buf(), source }
    }
}
