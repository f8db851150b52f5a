//! Dynamic slicing over recorded executions and the fault semantic context
//! built from the slices of several failing tests.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::minilang::{ExecutionRecord, Stmt};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SliceError {
    #[error("criterion statement {0} was not executed by test `{1}`")]
    CriterionNotExecuted(Stmt, String),
    #[error("criterion has no output variables")]
    EmptyOutputVars,
    #[error("no failing tests to build a fault context from")]
    NoFailingTests,
    #[error("coverage row {row} has width {width}, expected {expected}")]
    WidthMismatch { row: usize, width: usize, expected: usize },
}

/// `(outputStm, outputVar, inputTest)`, optionally pinned to one dynamic
/// occurrence of the output statement (by default the last one).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceCriterion {
    pub output_stmt: Stmt,
    pub output_vars: BTreeSet<String>,
    pub test: String,
    #[serde(default)]
    pub occurrence: Option<usize>,
}

impl SliceCriterion {
    pub fn new(
        output_stmt: Stmt,
        output_vars: impl IntoIterator<Item = impl Into<String>>,
        test: impl Into<String>,
    ) -> Result<Self, SliceError> {
        let output_vars: BTreeSet<String> = output_vars.into_iter().map(Into::into).collect();
        if output_vars.is_empty() {
            return Err(SliceError::EmptyOutputVars);
        }
        Ok(SliceCriterion { output_stmt, output_vars, test: test.into(), occurrence: None })
    }

    /// The criterion a failing run is sliced from: its first wrong output,
    /// else the statement that faulted, else its last executed statement.
    pub fn for_failure(record: &ExecutionRecord, test: impl Into<String>) -> Option<Self> {
        let test = test.into();
        if let Some(i) = record.first_mismatch {
            let ev = &record.outputs[i];
            return Some(SliceCriterion {
                output_stmt: record.trace[ev.occurrence].stmt,
                output_vars: BTreeSet::from([ev.var.clone()]),
                test,
                occurrence: Some(ev.occurrence),
            });
        }
        let last = record.trace.len().checked_sub(1)?;
        let occ = &record.trace[last];
        let mut vars: BTreeSet<String> = occ.uses.iter().cloned().collect();
        if vars.is_empty() {
            vars.extend(occ.def.iter().cloned());
        }
        if vars.is_empty() {
            return None;
        }
        Some(SliceCriterion { output_stmt: occ.stmt, output_vars: vars, test, occurrence: Some(last) })
    }
}

/// Statements whose executed occurrences reach the criterion occurrence
/// through data and control dependences, the criterion statement included.
pub fn dynamic_slice(
    record: &ExecutionRecord,
    criterion: &SliceCriterion,
) -> Result<BTreeSet<Stmt>, SliceError> {
    if criterion.output_vars.is_empty() {
        return Err(SliceError::EmptyOutputVars);
    }
    let start = match criterion.occurrence {
        Some(i) if record.trace.get(i).is_some_and(|o| o.stmt == criterion.output_stmt) => i,
        _ => record
            .trace
            .iter()
            .rposition(|o| o.stmt == criterion.output_stmt)
            .ok_or_else(|| {
                SliceError::CriterionNotExecuted(criterion.output_stmt, criterion.test.clone())
            })?,
    };

    let n = record.trace.len();
    let mut deps: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in &record.data_edges {
        if e.from == start && !criterion.output_vars.contains(&e.var) {
            continue;
        }
        deps[e.from].push(e.to);
    }
    for e in &record.control_edges {
        deps[e.from].push(e.to);
    }

    let mut seen = vec![false; n];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(i) = queue.pop_front() {
        for &j in &deps[i] {
            if !seen[j] {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    Ok(seen
        .iter()
        .enumerate()
        .filter(|(_, s)| **s)
        .map(|(i, _)| record.trace[i].stmt)
        .collect())
}

/// `StmSC` plus the coverage matrix restricted to those columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultSemanticContext {
    pub stm_sc: Vec<Stmt>,
    pub matrix: Vec<Vec<u8>>,
}

impl FaultSemanticContext {
    pub fn width(&self) -> usize {
        self.stm_sc.len()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "stm_sc": self.stm_sc, "matrix": self.matrix })
    }
}

/// Unions the slices of the given failing runs and projects `coverage`
/// (all M tests, N columns) onto the resulting statements.
pub fn fault_context(
    failing: &[(&ExecutionRecord, SliceCriterion)],
    coverage: &[Vec<u8>],
) -> Result<FaultSemanticContext, SliceError> {
    if failing.is_empty() {
        return Err(SliceError::NoFailingTests);
    }
    let mut union = BTreeSet::new();
    for (record, criterion) in failing {
        union.extend(dynamic_slice(record, criterion)?);
    }
    let stm_sc: Vec<Stmt> = union.into_iter().collect();
    let width = failing[0].0.coverage.len();
    let mut matrix = Vec::with_capacity(coverage.len());
    for (row, cov) in coverage.iter().enumerate() {
        if cov.len() != width {
            return Err(SliceError::WidthMismatch { row, width: cov.len(), expected: width });
        }
        matrix.push(stm_sc.iter().map(|s| cov[s.col()]).collect());
    }
    Ok(FaultSemanticContext { stm_sc, matrix })
}

/// Slices every failing run of a suite (up to `max_failing`, in suite order)
/// from its default criterion and builds the fault semantic context.
pub fn suite_fault_context(
    records: &[ExecutionRecord],
    test_ids: &[String],
    max_failing: Option<usize>,
) -> Result<FaultSemanticContext, SliceError> {
    let cap = max_failing.unwrap_or(usize::MAX);
    let failing: Vec<(&ExecutionRecord, SliceCriterion)> = records
        .iter()
        .zip(test_ids)
        .filter(|(r, _)| r.is_failing())
        .filter_map(|(r, id)| SliceCriterion::for_failure(r, id.clone()).map(|c| (r, c)))
        .take(cap)
        .collect();
    let coverage: Vec<Vec<u8>> = records.iter().map(|r| r.coverage.clone()).collect();
    fault_context(&failing, &coverage)
}
