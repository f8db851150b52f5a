//! Coverage spectra, per-statement tallies, SFL suspiciousness formulas,
//! and ranking.
//!
//! Formulas (with `a_ef`/`a_ep` failing/passing tests executing a statement
//! and `a_nf`/`a_np` those not executing it):
//!
//! ```text
//! Dstar   = a_ef^2 / (a_ep + a_nf)
//! Ochiai  = a_ef / sqrt((a_ef + a_nf) * (a_ef + a_ep))
//! Barinel = 1 - a_ep / (a_ep + a_ef)
//! GP02    = 2 * (a_ef + sqrt(a_np)) + sqrt(a_ep)
//! ```
//!
//! A zero denominator scores 0 so rankings stay total.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::minilang::{ExecutionRecord, Stmt};

#[derive(Debug, Error)]
pub enum SpectraError {
    #[error("empty test suite")]
    EmptySuite,
    #[error("row {row} has width {width}, expected {expected}")]
    WidthMismatch { row: usize, width: usize, expected: usize },
    #[error("non-finite suspiciousness score for {0}")]
    NonFiniteScore(Stmt),
    #[error("unknown formula `{0}`")]
    UnknownFormula(String),
    #[error("malformed dataset CSV: {0}")]
    Format(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Real,
    Synthetic,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Real => "real",
            Provenance::Synthetic => "synthetic",
        })
    }
}

/// M×N binary coverage plus the error vector (1 = failing).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageDataset {
    pub test_ids: Vec<String>,
    pub stmt_ids: Vec<Stmt>,
    pub matrix: Vec<Vec<u8>>,
    pub errors: Vec<u8>,
    pub provenance: Vec<Provenance>,
}

impl CoverageDataset {
    pub fn new(
        test_ids: Vec<String>,
        stmt_ids: Vec<Stmt>,
        matrix: Vec<Vec<u8>>,
        errors: Vec<u8>,
    ) -> Result<Self, SpectraError> {
        let provenance = vec![Provenance::Real; matrix.len()];
        let ds = CoverageDataset { test_ids, stmt_ids, matrix, errors, provenance };
        ds.validate()?;
        Ok(ds)
    }

    fn validate(&self) -> Result<(), SpectraError> {
        let n = self.stmt_ids.len();
        let m = self.matrix.len();
        if self.errors.len() != m || self.test_ids.len() != m || self.provenance.len() != m {
            return Err(SpectraError::Format(format!(
                "{m} rows but {} errors, {} ids, {} provenance flags",
                self.errors.len(),
                self.test_ids.len(),
                self.provenance.len()
            )));
        }
        for (row, r) in self.matrix.iter().enumerate() {
            if r.len() != n {
                return Err(SpectraError::WidthMismatch { row, width: r.len(), expected: n });
            }
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.matrix.len()
    }

    pub fn cols(&self) -> usize {
        self.stmt_ids.len()
    }

    pub fn failing(&self) -> usize {
        self.errors.iter().filter(|&&e| e == 1).count()
    }

    pub fn passing(&self) -> usize {
        self.rows() - self.failing()
    }

    pub fn push_row(&mut self, id: String, row: Vec<u8>, error: u8, provenance: Provenance) {
        debug_assert_eq!(row.len(), self.cols());
        self.test_ids.push(id);
        self.matrix.push(row);
        self.errors.push(error);
        self.provenance.push(provenance);
    }

    /// Keeps only the given columns, in the given order.
    pub fn project(&self, stmts: &[Stmt]) -> CoverageDataset {
        let cols: Vec<usize> = stmts
            .iter()
            .map(|s| self.stmt_ids.iter().position(|t| t == s).expect("statement in dataset"))
            .collect();
        CoverageDataset {
            test_ids: self.test_ids.clone(),
            stmt_ids: stmts.to_vec(),
            matrix: self.matrix.iter().map(|r| cols.iter().map(|&c| r[c]).collect()).collect(),
            errors: self.errors.clone(),
            provenance: self.provenance.clone(),
        }
    }

    /// CSV: `test,S1,..,SN,result[,provenance]`.
    pub fn write_csv<W: Write>(&self, out: W, with_provenance: bool) -> Result<(), SpectraError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["test".to_string()];
        header.extend(self.stmt_ids.iter().map(|s| s.to_string()));
        header.push("result".into());
        if with_provenance {
            header.push("provenance".into());
        }
        w.write_record(&header)?;
        for i in 0..self.rows() {
            let mut rec = vec![self.test_ids[i].clone()];
            rec.extend(self.matrix[i].iter().map(|b| b.to_string()));
            rec.push(self.errors[i].to_string());
            if with_provenance {
                rec.push(self.provenance[i].to_string());
            }
            w.write_record(&rec)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self, SpectraError> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers()?.clone();
        let names: Vec<&str> = header.iter().collect();
        let has_prov = names.last() == Some(&"provenance");
        let result_at = names.len() - 1 - usize::from(has_prov);
        if names.len() < 2 || names[0] != "test" || names[result_at] != "result" {
            return Err(SpectraError::Format("expected `test,...,result` header".into()));
        }
        let stmt_ids = names[1..result_at]
            .iter()
            .map(|n| {
                n.strip_prefix('S')
                    .and_then(|d| d.parse().ok())
                    .map(Stmt)
                    .ok_or_else(|| SpectraError::Format(format!("bad statement label `{n}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let bit = |s: &str| match s.trim() {
            "0" => Ok(0u8),
            "1" => Ok(1u8),
            other => Err(SpectraError::Format(format!("expected 0/1, got `{other}`"))),
        };
        let mut ds = CoverageDataset {
            test_ids: Vec::new(),
            stmt_ids,
            matrix: Vec::new(),
            errors: Vec::new(),
            provenance: Vec::new(),
        };
        for rec in r.records() {
            let rec = rec?;
            let fields: Vec<&str> = rec.iter().collect();
            let row = fields[1..result_at].iter().map(|f| bit(f)).collect::<Result<_, _>>()?;
            let prov = match (has_prov, fields.get(result_at + 1).copied()) {
                (true, Some("synthetic")) => Provenance::Synthetic,
                (true, Some("real")) | (false, _) => Provenance::Real,
                (true, other) => {
                    return Err(SpectraError::Format(format!("bad provenance {other:?}")))
                }
            };
            ds.push_row(fields[0].to_string(), row, bit(fields[result_at])?, prov);
        }
        ds.validate()?;
        Ok(ds)
    }
}

/// Row i is record i's coverage; errors\[i\] = 1 iff record i failed.
pub fn build_spectra(
    records: &[ExecutionRecord],
    test_ids: &[String],
) -> Result<CoverageDataset, SpectraError> {
    let first = records.first().ok_or(SpectraError::EmptySuite)?;
    let n = first.coverage.len();
    CoverageDataset::new(
        test_ids.to_vec(),
        (1..=n).map(Stmt).collect(),
        records.iter().map(|r| r.coverage.clone()).collect(),
        records.iter().map(|r| u8::from(r.is_failing())).collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Tally {
    pub ef: usize,
    pub ep: usize,
    pub nf: usize,
    pub np: usize,
}

pub type SpectrumTally = Vec<Tally>;

pub fn tally(ds: &CoverageDataset) -> SpectrumTally {
    let mut out = vec![Tally::default(); ds.cols()];
    for (row, &err) in ds.matrix.iter().zip(&ds.errors) {
        for (t, &hit) in out.iter_mut().zip(row) {
            match (hit != 0, err != 0) {
                (true, true) => t.ef += 1,
                (true, false) => t.ep += 1,
                (false, true) => t.nf += 1,
                (false, false) => t.np += 1,
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formula {
    Dstar,
    Ochiai,
    Barinel,
    Gp02,
}

impl Formula {
    pub const ALL: [Formula; 4] = [Formula::Dstar, Formula::Ochiai, Formula::Barinel, Formula::Gp02];

    pub fn name(self) -> &'static str {
        match self {
            Formula::Dstar => "dstar",
            Formula::Ochiai => "ochiai",
            Formula::Barinel => "barinel",
            Formula::Gp02 => "gp02",
        }
    }

    pub fn eval(self, t: Tally) -> f64 {
        let (ef, ep, nf, np) = (t.ef as f64, t.ep as f64, t.nf as f64, t.np as f64);
        let ratio = |num: f64, den: f64| if den == 0.0 { 0.0 } else { num / den };
        match self {
            Formula::Dstar => ratio(ef * ef, ep + nf),
            Formula::Ochiai => ratio(ef, ((ef + nf) * (ef + ep)).sqrt()),
            Formula::Barinel => {
                if ep + ef == 0.0 {
                    0.0
                } else {
                    1.0 - ep / (ep + ef)
                }
            }
            Formula::Gp02 => 2.0 * (ef + np.sqrt()) + ep.sqrt(),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Formula {
    type Err = SpectraError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Formula::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| SpectraError::UnknownFormula(s.to_string()))
    }
}

pub fn score(formula: Formula, tallies: &[Tally]) -> Vec<f64> {
    tallies.iter().map(|&t| formula.eval(t)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub stmt: Stmt,
    pub score: f64,
    pub rank: usize,
}

/// Statements by descending score, ties broken by ascending index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    pub entries: Vec<RankedEntry>,
}

impl RankedList {
    pub fn rank_of(&self, stmt: Stmt) -> Option<usize> {
        self.entries.iter().find(|e| e.stmt == stmt).map(|e| e.rank)
    }

    /// 1 + number of statements scoring strictly higher.
    pub fn best_case_rank_of(&self, stmt: Stmt) -> Option<usize> {
        let s = self.entries.iter().find(|e| e.stmt == stmt)?.score;
        Some(1 + self.entries.iter().filter(|e| e.score > s).count())
    }

    pub fn order(&self) -> Vec<Stmt> {
        self.entries.iter().map(|e| e.stmt).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Ranks `scores[j]` for statement `stmts[j]`.
pub fn rank_statements(stmts: &[Stmt], scores: &[f64]) -> Result<RankedList, SpectraError> {
    assert_eq!(stmts.len(), scores.len());
    if let Some(j) = scores.iter().position(|s| !s.is_finite()) {
        return Err(SpectraError::NonFiniteScore(stmts[j]));
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(stmts[a].cmp(&stmts[b])));
    Ok(RankedList {
        entries: idx
            .into_iter()
            .enumerate()
            .map(|(r, j)| RankedEntry { stmt: stmts[j], score: scores[j], rank: r + 1 })
            .collect(),
    })
}

/// Ranks scores given for `S1..SN` in order.
pub fn rank(scores: &[f64]) -> Result<RankedList, SpectraError> {
    let stmts: Vec<Stmt> = (1..=scores.len()).map(Stmt).collect();
    rank_statements(&stmts, scores)
}
