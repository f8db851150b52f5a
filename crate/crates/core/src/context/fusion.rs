use serde::{Deserialize, Serialize};

use super::ContextError;
use crate::minilang::Stmt;

/// Narrowest context the denoiser accepts.
pub const MIN_WIDTH: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusedContext {
    /// Fused statements, ascending.
    pub stm_fusion: Vec<Stmt>,
    /// Columns of X at `stm_fusion`, row-major M×K.
    pub matrix: Vec<Vec<u8>>,
    pub alpha: f64,
    pub k_f: usize,
    pub target_dim: usize,
    /// Members taken from `StmPCA` outside `StmSC` to reach `target_dim`.
    pub padded: Vec<Stmt>,
}

pub fn fusion_size(alpha: f64, sc_len: usize) -> usize {
    (alpha * sc_len as f64).round().max(0.0) as usize
}

/// `StmSC ∩ StmPCA[:K^f]`, in `StmPCA` order.
pub fn initial_fusion(stm_sc: &[Stmt], stm_pca: &[Stmt], k_f: usize) -> Vec<Stmt> {
    stm_pca.iter().take(k_f).filter(|s| stm_sc.contains(s)).copied().collect()
}

/// Smallest even width at least `max(4, initial)`, capped at the largest
/// even width `StmSC` can fill on its own. Falls back to 4 when `StmSC` is
/// narrower than that; reaching it then needs padding.
pub fn default_target_dim(sc_len: usize, initial: usize) -> usize {
    let want = initial.max(MIN_WIDTH).next_multiple_of(2);
    let cap = sc_len - sc_len % 2;
    if cap < MIN_WIDTH {
        MIN_WIDTH
    } else {
        want.min(cap)
    }
}

/// Fuses the semantic and statistical contexts.
///
/// Starts from `StmSC ∩ StmPCA[:K^f]` and scans `StmPCA` for further `StmSC`
/// members until `target_dim` statements are held. With `pad`, a scan that
/// runs dry continues over `StmPCA` members outside `StmSC`.
pub fn fuse(
    x: &[Vec<u8>],
    stm_sc: &[Stmt],
    stm_pca: &[Stmt],
    alpha: f64,
    target_dim: usize,
    pad: bool,
) -> Result<FusedContext, ContextError> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(ContextError::InvalidParameter(format!("alpha = {alpha}")));
    }
    let width = x.first().map_or(0, Vec::len);
    if let Some(bad) = x.iter().position(|r| r.len() != width) {
        return Err(ContextError::WidthMismatch { row: bad, width: x[bad].len(), expected: width });
    }
    for s in stm_sc.iter().chain(stm_pca) {
        if s.0 == 0 || (!x.is_empty() && s.0 > width) {
            return Err(ContextError::InvalidParameter(format!("statement {s} outside 1..={width}")));
        }
    }

    let k_f = fusion_size(alpha, stm_sc.len());
    let mut fusion = initial_fusion(stm_sc, stm_pca, k_f);
    fusion.truncate(target_dim);
    for s in stm_pca {
        if fusion.len() >= target_dim {
            break;
        }
        if stm_sc.contains(s) && !fusion.contains(s) {
            fusion.push(*s);
        }
    }
    let mut padded = Vec::new();
    if pad {
        for s in stm_pca {
            if fusion.len() >= target_dim {
                break;
            }
            if !fusion.contains(s) {
                fusion.push(*s);
                padded.push(*s);
            }
        }
    }
    if fusion.len() < target_dim && fusion.len() < MIN_WIDTH {
        return Err(ContextError::InsufficientContext { have: fusion.len(), need: MIN_WIDTH });
    }
    fusion.sort();
    let matrix = x.iter().map(|r| fusion.iter().map(|s| r[s.col()]).collect()).collect();
    Ok(FusedContext { stm_fusion: fusion, matrix, alpha, k_f, target_dim, padded })
}
