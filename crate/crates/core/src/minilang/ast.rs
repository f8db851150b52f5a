use std::fmt;

use serde::{Deserialize, Serialize};

/// One-based statement index (`S1..SN`), stable across mutation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Stmt(pub usize);

impl Stmt {
    /// Zero-based column of this statement in a coverage matrix.
    pub fn col(self) -> usize {
        self.0 - 1
    }

    pub fn from_col(col: usize) -> Self {
        Stmt(col + 1)
    }
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        Some(match s {
            "+" => BinOp::Add,
            "-" => BinOp::Sub,
            "*" => BinOp::Mul,
            "/" => BinOp::Div,
            "%" => BinOp::Mod,
            "<" => BinOp::Lt,
            "<=" => BinOp::Le,
            ">" => BinOp::Gt,
            ">=" => BinOp::Ge,
            "==" => BinOp::Eq,
            "!=" => BinOp::Ne,
            "&&" => BinOp::And,
            "||" => BinOp::Or,
            _ => return None,
        })
    }

    pub(crate) fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Int(i64),
    Var(String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    /// Variables read by this expression, in first-occurrence order, without duplicates.
    pub fn vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Expr::Int(_) => {}
            Expr::Var(v) => {
                if !out.iter().any(|o| o == v) {
                    out.push(v.clone());
                }
            }
            Expr::Unary(_, e) => e.collect_vars(out),
            Expr::Binary(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(e: &Expr, parent: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match e {
                Expr::Int(v) if *v < 0 => write!(f, "({v})"),
                Expr::Int(v) => write!(f, "{v}"),
                Expr::Var(v) => write!(f, "{v}"),
                Expr::Unary(op, inner) => {
                    f.write_str(match op {
                        UnOp::Neg => "-",
                        UnOp::Not => "!",
                    })?;
                    go(inner, 7, f)
                }
                Expr::Binary(op, l, r) => {
                    let p = op.precedence();
                    if p < parent {
                        f.write_str("(")?;
                    }
                    go(l, p, f)?;
                    write!(f, " {} ", op.symbol())?;
                    // left-associative: the right operand binds tighter
                    go(r, p + 1, f)?;
                    if p < parent {
                        f.write_str(")")?;
                    }
                    Ok(())
                }
            }
        }
        go(self, 0, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    Assign { var: String, expr: Expr },
    If { cond: Expr, then_body: Vec<Node>, else_body: Vec<Node> },
    While { cond: Expr, body: Vec<Node> },
    Output { var: String },
}

/// A numbered statement together with its nested blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub index: Stmt,
    pub kind: StmtKind,
}

impl Node {
    /// The statement's own line, without nested blocks.
    pub fn head(&self) -> String {
        match &self.kind {
            StmtKind::Assign { var, expr } => format!("{var} = {expr}"),
            StmtKind::If { cond, .. } => format!("if {cond} {{"),
            StmtKind::While { cond, .. } => format!("while {cond} {{"),
            StmtKind::Output { var } => format!("output({var})"),
        }
    }

    pub fn defined_var(&self) -> Option<&str> {
        match &self.kind {
            StmtKind::Assign { var, .. } => Some(var),
            _ => None,
        }
    }

    pub fn used_vars(&self) -> Vec<String> {
        match &self.kind {
            StmtKind::Assign { expr, .. } => expr.vars(),
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => cond.vars(),
            StmtKind::Output { var } => vec![var.clone()],
        }
    }
}

/// A parsed program. Statements are numbered `S1..SN` in source order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub inputs: Vec<String>,
    pub body: Vec<Node>,
    len: usize,
}

impl Program {
    pub(crate) fn from_parts(inputs: Vec<String>, body: Vec<Node>, len: usize) -> Self {
        Program { inputs, body, len }
    }

    /// Number of statements N.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn statements(&self) -> Vec<&Node> {
        fn walk<'a>(nodes: &'a [Node], out: &mut Vec<&'a Node>) {
            for n in nodes {
                out.push(n);
                match &n.kind {
                    StmtKind::If { then_body, else_body, .. } => {
                        walk(then_body, out);
                        walk(else_body, out);
                    }
                    StmtKind::While { body, .. } => walk(body, out),
                    _ => {}
                }
            }
        }
        let mut out = Vec::with_capacity(self.len);
        walk(&self.body, &mut out);
        out
    }

    pub fn statement(&self, index: Stmt) -> Option<&Node> {
        self.statements().into_iter().find(|n| n.index == index)
    }

    pub(crate) fn statement_mut(&mut self, index: Stmt) -> Option<&mut Node> {
        fn walk(nodes: &mut [Node], index: Stmt) -> Option<&mut Node> {
            for n in nodes {
                if n.index == index {
                    return Some(n);
                }
                let found = match &mut n.kind {
                    StmtKind::If { then_body, else_body, .. } => {
                        walk(then_body, index).or_else(|| walk(else_body, index))
                    }
                    StmtKind::While { body, .. } => walk(body, index),
                    _ => None,
                };
                if found.is_some() {
                    return found;
                }
            }
            None
        }
        walk(&mut self.body, index)
    }

    /// Renders the program back to source, one statement per line.
    pub fn to_source(&self) -> String {
        fn emit(nodes: &[Node], depth: usize, out: &mut String) {
            let pad = "    ".repeat(depth);
            for n in nodes {
                out.push_str(&pad);
                out.push_str(&n.head());
                out.push('\n');
                match &n.kind {
                    StmtKind::If { then_body, else_body, .. } => {
                        emit(then_body, depth + 1, out);
                        if else_body.is_empty() {
                            out.push_str(&pad);
                            out.push_str("}\n");
                        } else {
                            out.push_str(&pad);
                            out.push_str("} else {\n");
                            emit(else_body, depth + 1, out);
                            out.push_str(&pad);
                            out.push_str("}\n");
                        }
                    }
                    StmtKind::While { body, .. } => {
                        emit(body, depth + 1, out);
                        out.push_str(&pad);
                        out.push_str("}\n");
                    }
                    _ => {}
                }
            }
        }
        let mut out = String::new();
        if !self.inputs.is_empty() {
            out.push_str("input ");
            out.push_str(&self.inputs.join(", "));
            out.push('\n');
        }
        emit(&self.body, 0, &mut out);
        out
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_source())
    }
}
