use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ast::{BinOp, Expr, Program, Stmt, StmtKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MutationKind {
    ConstantReplacement,
    OperatorFlip,
    OffByOne,
}

/// A single-token fault. `site` selects which literal (for constant and
/// off-by-one mutations) or which binary operator (for flips) inside the
/// target statement is replaced, counting in pre-order from zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mutation {
    pub target: Stmt,
    pub kind: MutationKind,
    #[serde(default)]
    pub site: usize,
    pub payload: String,
}

impl fmt::Display for Mutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} at {} (site {}) -> `{}`", self.kind, self.target, self.site, self.payload)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MutationError {
    #[error("mutation target {0} does not exist")]
    InvalidTarget(Stmt),
    #[error("statement {stmt} has no mutation site {site} for {kind:?}")]
    NoSuchSite { stmt: Stmt, site: usize, kind: MutationKind },
    #[error("invalid payload `{0}`")]
    InvalidPayload(String),
    #[error("mutation leaves {0} unchanged")]
    NoChange(Stmt),
}

fn stmt_expr_mut(kind: &mut StmtKind) -> Option<&mut Expr> {
    match kind {
        StmtKind::Assign { expr, .. } => Some(expr),
        StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => Some(cond),
        StmtKind::Output { .. } => None,
    }
}

fn stmt_expr(kind: &StmtKind) -> Option<&Expr> {
    match kind {
        StmtKind::Assign { expr, .. } => Some(expr),
        StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => Some(cond),
        StmtKind::Output { .. } => None,
    }
}

fn literal_mut<'a>(e: &'a mut Expr, site: &mut usize) -> Option<&'a mut i64> {
    match e {
        Expr::Int(v) => {
            if *site == 0 {
                Some(v)
            } else {
                *site -= 1;
                None
            }
        }
        Expr::Var(_) => None,
        Expr::Unary(_, inner) => literal_mut(inner, site),
        Expr::Binary(_, l, r) => {
            if let Some(v) = literal_mut(l, site) {
                return Some(v);
            }
            literal_mut(r, site)
        }
    }
}

fn operator_mut<'a>(e: &'a mut Expr, site: &mut usize) -> Option<&'a mut BinOp> {
    match e {
        Expr::Int(_) | Expr::Var(_) => None,
        Expr::Unary(_, inner) => operator_mut(inner, site),
        Expr::Binary(op, l, r) => {
            if *site == 0 {
                return Some(op);
            }
            *site -= 1;
            if let Some(o) = operator_mut(l, site) {
                return Some(o);
            }
            operator_mut(r, site)
        }
    }
}

fn literals(e: &Expr, out: &mut Vec<i64>) {
    match e {
        Expr::Int(v) => out.push(*v),
        Expr::Var(_) => {}
        Expr::Unary(_, inner) => literals(inner, out),
        Expr::Binary(_, l, r) => {
            literals(l, out);
            literals(r, out);
        }
    }
}

fn operators(e: &Expr, out: &mut Vec<BinOp>) {
    match e {
        Expr::Int(_) | Expr::Var(_) => {}
        Expr::Unary(_, inner) => operators(inner, out),
        Expr::Binary(op, l, r) => {
            out.push(*op);
            operators(l, out);
            operators(r, out);
        }
    }
}

/// Returns a copy of `program` with exactly one token of one statement replaced.
pub fn seed_fault(program: &Program, mutation: &Mutation) -> Result<Program, MutationError> {
    let mut out = program.clone();
    let node = out
        .statement_mut(mutation.target)
        .ok_or(MutationError::InvalidTarget(mutation.target))?;
    let no_site = || MutationError::NoSuchSite {
        stmt: mutation.target,
        site: mutation.site,
        kind: mutation.kind,
    };
    let expr = stmt_expr_mut(&mut node.kind).ok_or_else(no_site)?;
    match mutation.kind {
        MutationKind::ConstantReplacement | MutationKind::OffByOne => {
            let new: i64 = mutation
                .payload
                .trim()
                .parse()
                .map_err(|_| MutationError::InvalidPayload(mutation.payload.clone()))?;
            let slot = literal_mut(expr, &mut mutation.site.clone()).ok_or_else(no_site)?;
            if mutation.kind == MutationKind::OffByOne && (new - *slot).abs() != 1 {
                return Err(MutationError::InvalidPayload(mutation.payload.clone()));
            }
            if *slot == new {
                return Err(MutationError::NoChange(mutation.target));
            }
            *slot = new;
        }
        MutationKind::OperatorFlip => {
            let new = BinOp::from_symbol(mutation.payload.trim())
                .ok_or_else(|| MutationError::InvalidPayload(mutation.payload.clone()))?;
            let slot = operator_mut(expr, &mut mutation.site.clone()).ok_or_else(no_site)?;
            if *slot == new {
                return Err(MutationError::NoChange(mutation.target));
            }
            *slot = new;
        }
    }
    Ok(out)
}

fn flips(op: BinOp) -> &'static [BinOp] {
    use BinOp::*;
    match op {
        Add => &[Sub, Mul],
        Sub => &[Add],
        Mul => &[Add, Div],
        Div => &[Mul, Mod],
        Mod => &[Div],
        Lt => &[Le, Gt],
        Le => &[Lt, Ge],
        Gt => &[Ge, Lt],
        Ge => &[Gt, Le],
        Eq => &[Ne],
        Ne => &[Eq],
        And => &[Or],
        Or => &[And],
    }
}

/// Every single-token mutation the program admits, in statement order.
pub fn candidate_mutations(program: &Program) -> Vec<Mutation> {
    let mut out = Vec::new();
    for node in program.statements() {
        let Some(expr) = stmt_expr(&node.kind) else { continue };
        let mut lits = Vec::new();
        literals(expr, &mut lits);
        for (site, &c) in lits.iter().enumerate() {
            for delta in [1i64, -1] {
                if let Some(v) = c.checked_add(delta) {
                    out.push(Mutation {
                        target: node.index,
                        kind: MutationKind::OffByOne,
                        site,
                        payload: v.to_string(),
                    });
                }
            }
            if c != 0 && c.abs() != 1 {
                out.push(Mutation {
                    target: node.index,
                    kind: MutationKind::ConstantReplacement,
                    site,
                    payload: "0".into(),
                });
            }
        }
        let mut ops = Vec::new();
        operators(expr, &mut ops);
        for (site, &op) in ops.iter().enumerate() {
            for &to in flips(op) {
                out.push(Mutation {
                    target: node.index,
                    kind: MutationKind::OperatorFlip,
                    site,
                    payload: to.symbol().into(),
                });
            }
        }
    }
    out
}
