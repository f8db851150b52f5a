//! Statistical context selection (revised PCA) and its fusion with the
//! slicing-based semantic context.

mod eigen;
mod fusion;
mod pca;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use eigen::{eigen_sym, EigenError, SymEigen};
pub use fusion::{default_target_dim, fuse, fusion_size, initial_fusion, FusedContext, MIN_WIDTH};
pub use pca::{
    VARIANCE_FRACTION,
    contribution_order, contribution_select, covariance, m_for_variance, StatisticalContext,
    CONTRIBUTION_QUANTUM,
};

use crate::minilang::Stmt;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContextError {
    #[error("need at least 2 tests for a covariance, got {0}")]
    DegenerateData(usize),
    #[error("row {row} has width {width}, expected {expected}")]
    WidthMismatch { row: usize, width: usize, expected: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("fused context has {have} statements, model needs at least {need}")]
    InsufficientContext { have: usize, need: usize },
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

/// The selections made for one program version, as dumped to `context.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextDump {
    pub stm_sc: Vec<Stmt>,
    pub stm_pca: Vec<Stmt>,
    pub stm_fusion: Vec<Stmt>,
    pub alpha: f64,
    pub m: usize,
    pub k: usize,
}

impl ContextDump {
    pub fn new(stm_sc: &[Stmt], stat: &StatisticalContext, fused: &FusedContext) -> Self {
        ContextDump {
            stm_sc: stm_sc.to_vec(),
            stm_pca: stat.stm_pca.clone(),
            stm_fusion: fused.stm_fusion.clone(),
            alpha: fused.alpha,
            m: stat.m,
            k: fused.stm_fusion.len(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("context dump serializes")
    }
}
