//! Top-K, MFR, MAR and RImp over per-version rankings, and report rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::minilang::Stmt;
use crate::spectra::RankedList;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("version `{0}` has no faulty statements")]
    MissingFaults(String),
    #[error("faulty statement {stmt} of version `{version}` is not ranked")]
    UnrankedFault { version: String, stmt: Stmt },
    #[error("baseline metric is zero")]
    ZeroBaseline,
}

/// How a fault tied with other statements is ranked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TiePolicy {
    /// Position in the index-tie-broken order.
    #[default]
    Ordinal,
    /// One plus the number of strictly higher scores.
    Best,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VersionResult {
    pub version: String,
    pub ranking: RankedList,
    pub faults: Vec<Stmt>,
}

impl VersionResult {
    pub fn fault_ranks(&self, policy: TiePolicy) -> Result<Vec<usize>, EvalError> {
        if self.faults.is_empty() {
            return Err(EvalError::MissingFaults(self.version.clone()));
        }
        self.faults
            .iter()
            .map(|&s| {
                let r = match policy {
                    TiePolicy::Ordinal => self.ranking.rank_of(s),
                    TiePolicy::Best => self.ranking.best_case_rank_of(s),
                };
                r.ok_or_else(|| EvalError::UnrankedFault { version: self.version.clone(), stmt: s })
            })
            .collect()
    }

    pub fn first_fault_rank(&self, policy: TiePolicy) -> Result<usize, EvalError> {
        Ok(self.fault_ranks(policy)?.into_iter().min().expect("non-empty"))
    }
}

/// Versions with at least one fault ranked within the top `k`.
pub fn topk(results: &[VersionResult], k: usize, policy: TiePolicy) -> Result<usize, EvalError> {
    let mut n = 0;
    for r in results {
        if r.first_fault_rank(policy)? <= k {
            n += 1;
        }
    }
    Ok(n)
}

/// `(MFR, MAR)`; both 0 for an empty result list.
pub fn rank_metrics(results: &[VersionResult], policy: TiePolicy) -> Result<(f64, f64), EvalError> {
    if results.is_empty() {
        return Ok((0.0, 0.0));
    }
    let (mut first, mut avg) = (0.0, 0.0);
    for r in results {
        let ranks = r.fault_ranks(policy)?;
        first += *ranks.iter().min().expect("non-empty") as f64;
        avg += ranks.iter().sum::<usize>() as f64 / ranks.len() as f64;
    }
    let n = results.len() as f64;
    Ok((first / n, avg / n))
}

/// `100 · ours / baseline`; below 100 means fewer statements examined.
pub fn rimp(ours: f64, baseline: f64) -> Result<f64, EvalError> {
    if baseline == 0.0 {
        return Err(EvalError::ZeroBaseline);
    }
    Ok(100.0 * ours / baseline)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub scenario: String,
    pub method: String,
    pub versions: usize,
    pub top1: usize,
    pub top3: usize,
    pub top5: usize,
    pub mfr: f64,
    pub mar: f64,
    /// Relative to the same method under the baseline scenario.
    pub rimp_mfr: Option<f64>,
    pub rimp_mar: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VersionError {
    pub version: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub baseline: String,
    pub tie_policy: TiePolicy,
    pub rows: Vec<MetricsRow>,
    pub errors: Vec<VersionError>,
}

impl MetricsReport {
    /// Builds one row per `(scenario, method)` key. RImp compares summed
    /// ranks against the `baseline` scenario for the same method.
    pub fn build(
        results: &BTreeMap<(String, String), Vec<VersionResult>>,
        baseline: &str,
        policy: TiePolicy,
        errors: Vec<VersionError>,
    ) -> Result<Self, EvalError> {
        let mut rows = Vec::new();
        for ((scenario, method), rs) in results {
            let (mfr, mar) = rank_metrics(rs, policy)?;
            let base = results.get(&(baseline.to_string(), method.clone()));
            let (rimp_mfr, rimp_mar) = match base {
                Some(b) if !rs.is_empty() && b.len() == rs.len() => {
                    let (bf, ba) = rank_metrics(b, policy)?;
                    let n = rs.len() as f64;
                    (rimp(mfr * n, bf * n).ok(), rimp(mar * n, ba * n).ok())
                }
                _ => (None, None),
            };
            rows.push(MetricsRow {
                scenario: scenario.clone(),
                method: method.clone(),
                versions: rs.len(),
                top1: topk(rs, 1, policy)?,
                top3: topk(rs, 3, policy)?,
                top5: topk(rs, 5, policy)?,
                mfr,
                mar,
                rimp_mfr,
                rimp_mar,
            });
        }
        Ok(MetricsReport { baseline: baseline.to_string(), tie_policy: policy, rows, errors })
    }

    pub fn row(&self, scenario: &str, method: &str) -> Option<&MetricsRow> {
        self.rows.iter().find(|r| r.scenario == scenario && r.method == method)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Fixed-width table: one line per scenario × method.
    pub fn to_table(&self) -> String {
        let pct = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.2}%"));
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<12} {:<8} {:>4} {:>6} {:>6} {:>6} {:>8} {:>8} {:>10} {:>10}",
            "scenario", "method", "n", "Top-1", "Top-3", "Top-5", "MFR", "MAR", "RImp-MFR", "RImp-MAR"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<12} {:<8} {:>4} {:>6} {:>6} {:>6} {:>8.2} {:>8.2} {:>10} {:>10}",
                r.scenario,
                r.method,
                r.versions,
                r.top1,
                r.top3,
                r.top5,
                r.mfr,
                r.mar,
                pct(r.rimp_mfr),
                pct(r.rimp_mar)
            );
        }
        for e in &self.errors {
            let _ = writeln!(s, "error {}: {}", e.version, e.error);
        }
        s
    }

    /// `scenario,method,rimp_mfr,rimp_mar` for plotting.
    pub fn rimp_csv(&self) -> String {
        let cell = |v: Option<f64>| v.map_or_else(String::new, |x| format!("{x:.4}"));
        let mut s = String::from("scenario,method,rimp_mfr,rimp_mar\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{},{}", r.scenario, r.method, cell(r.rimp_mfr), cell(r.rimp_mar));
        }
        s
    }
}
