use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ast::{BinOp, Expr, Node, Program, Stmt, StmtKind, UnOp};

pub const DEFAULT_LOOP_CAP: usize = 10_000;

pub type Inputs = BTreeMap<String, i64>;
pub type Oracle = BTreeMap<String, i64>;

/// Harness-level errors. Program misbehaviour is never an error: it is a failing verdict.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExecError {
    #[error("input variable `{0}` is not bound")]
    UnboundInput(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Error)]
pub enum RuntimeFault {
    #[error("division by zero at {0}")]
    DivisionByZero(Stmt),
    #[error("integer overflow at {0}")]
    Overflow(Stmt),
    #[error("read of undefined variable `{var}` at {stmt}")]
    Undefined { stmt: Stmt, var: String },
    #[error("loop iteration cap of {cap} exceeded at {stmt}")]
    NonTermination { stmt: Stmt, cap: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// One executed statement instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Occurrence {
    pub stmt: Stmt,
    pub def: Option<String>,
    pub uses: Vec<String>,
}

/// Use-occurrence → most recent defining occurrence of `var`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataEdge {
    pub from: usize,
    pub to: usize,
    pub var: String,
}

/// Occurrence → the predicate evaluation that caused it to execute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ControlEdge {
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputEvent {
    pub occurrence: usize,
    pub var: String,
    pub value: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionRecord {
    pub coverage: Vec<u8>,
    pub trace: Vec<Occurrence>,
    pub data_edges: Vec<DataEdge>,
    pub control_edges: Vec<ControlEdge>,
    pub outputs: Vec<OutputEvent>,
    pub verdict: Verdict,
    pub fault: Option<RuntimeFault>,
    /// First output event whose value disagrees with the oracle.
    pub first_mismatch: Option<usize>,
}

impl ExecutionRecord {
    /// Final value per output variable.
    pub fn output_map(&self) -> BTreeMap<String, i64> {
        self.outputs.iter().map(|o| (o.var.clone(), o.value)).collect()
    }

    pub fn is_failing(&self) -> bool {
        self.verdict == Verdict::Fail
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecConfig {
    pub loop_cap: usize,
}

impl Default for ExecConfig {
    fn default() -> Self {
        ExecConfig { loop_cap: DEFAULT_LOOP_CAP }
    }
}

struct Machine {
    env: BTreeMap<String, i64>,
    last_def: BTreeMap<String, usize>,
    trace: Vec<Occurrence>,
    data_edges: Vec<DataEdge>,
    control_edges: Vec<ControlEdge>,
    outputs: Vec<OutputEvent>,
    iterations: usize,
    cap: usize,
}

impl Machine {
    /// Records an occurrence of `node` with its reads wired to their reaching definitions.
    fn enter(&mut self, node: &Node, parent: Option<usize>) -> usize {
        let id = self.trace.len();
        let uses = node.used_vars();
        for v in &uses {
            if let Some(&def) = self.last_def.get(v) {
                self.data_edges.push(DataEdge { from: id, to: def, var: v.clone() });
            }
        }
        if let Some(p) = parent {
            self.control_edges.push(ControlEdge { from: id, to: p });
        }
        self.trace.push(Occurrence {
            stmt: node.index,
            def: node.defined_var().map(str::to_owned),
            uses,
        });
        id
    }

    fn eval(&self, e: &Expr, at: Stmt) -> Result<i64, RuntimeFault> {
        Ok(match e {
            Expr::Int(v) => *v,
            Expr::Var(v) => *self
                .env
                .get(v)
                .ok_or_else(|| RuntimeFault::Undefined { stmt: at, var: v.clone() })?,
            Expr::Unary(op, inner) => {
                let x = self.eval(inner, at)?;
                match op {
                    UnOp::Neg => x.checked_neg().ok_or(RuntimeFault::Overflow(at))?,
                    UnOp::Not => (x == 0) as i64,
                }
            }
            Expr::Binary(op, l, r) => {
                // both operands are always evaluated, so every named variable is a use
                let a = self.eval(l, at)?;
                let b = self.eval(r, at)?;
                let overflow = RuntimeFault::Overflow(at);
                match op {
                    BinOp::Add => a.checked_add(b).ok_or(overflow)?,
                    BinOp::Sub => a.checked_sub(b).ok_or(overflow)?,
                    BinOp::Mul => a.checked_mul(b).ok_or(overflow)?,
                    BinOp::Div | BinOp::Mod if b == 0 => {
                        return Err(RuntimeFault::DivisionByZero(at))
                    }
                    BinOp::Div => a.checked_div(b).ok_or(overflow)?,
                    BinOp::Mod => a.checked_rem(b).ok_or(overflow)?,
                    BinOp::Lt => (a < b) as i64,
                    BinOp::Le => (a <= b) as i64,
                    BinOp::Gt => (a > b) as i64,
                    BinOp::Ge => (a >= b) as i64,
                    BinOp::Eq => (a == b) as i64,
                    BinOp::Ne => (a != b) as i64,
                    BinOp::And => (a != 0 && b != 0) as i64,
                    BinOp::Or => (a != 0 || b != 0) as i64,
                }
            }
        })
    }

    fn run_block(&mut self, nodes: &[Node], parent: Option<usize>) -> Result<(), RuntimeFault> {
        for node in nodes {
            self.run(node, parent)?;
        }
        Ok(())
    }

    fn run(&mut self, node: &Node, parent: Option<usize>) -> Result<(), RuntimeFault> {
        match &node.kind {
            StmtKind::Assign { var, expr } => {
                let id = self.enter(node, parent);
                let v = self.eval(expr, node.index)?;
                self.env.insert(var.clone(), v);
                self.last_def.insert(var.clone(), id);
            }
            StmtKind::Output { var } => {
                let id = self.enter(node, parent);
                let v = self.eval(&Expr::Var(var.clone()), node.index)?;
                self.outputs.push(OutputEvent { occurrence: id, var: var.clone(), value: v });
            }
            StmtKind::If { cond, then_body, else_body } => {
                let id = self.enter(node, parent);
                if self.eval(cond, node.index)? != 0 {
                    self.run_block(then_body, Some(id))?;
                } else {
                    self.run_block(else_body, Some(id))?;
                }
            }
            StmtKind::While { cond, body } => {
                // each re-evaluation of the predicate is governed by the previous one
                let mut governing = parent;
                loop {
                    let id = self.enter(node, governing);
                    if self.eval(cond, node.index)? == 0 {
                        break;
                    }
                    self.iterations += 1;
                    if self.iterations > self.cap {
                        return Err(RuntimeFault::NonTermination { stmt: node.index, cap: self.cap });
                    }
                    self.run_block(body, Some(id))?;
                    governing = Some(id);
                }
            }
        }
        Ok(())
    }
}

/// Runs `program` on one test input and judges the outputs against `oracle`.
///
/// A runtime fault or exceeded loop cap ends the run with a failing verdict;
/// the only harness error is an unbound declared input.
pub fn execute(
    program: &Program,
    inputs: &Inputs,
    oracle: &Oracle,
    cfg: ExecConfig,
) -> Result<ExecutionRecord, ExecError> {
    for name in &program.inputs {
        if !inputs.contains_key(name) {
            return Err(ExecError::UnboundInput(name.clone()));
        }
    }
    let mut m = Machine {
        env: inputs.clone(),
        last_def: BTreeMap::new(),
        trace: Vec::new(),
        data_edges: Vec::new(),
        control_edges: Vec::new(),
        outputs: Vec::new(),
        iterations: 0,
        cap: cfg.loop_cap,
    };
    let fault = m.run_block(&program.body, None).err();

    let mut coverage = vec![0u8; program.len()];
    for occ in &m.trace {
        coverage[occ.stmt.col()] = 1;
    }
    let first_mismatch = m
        .outputs
        .iter()
        .position(|o| oracle.get(&o.var).is_some_and(|want| *want != o.value));
    let finals: BTreeMap<&str, i64> =
        m.outputs.iter().map(|o| (o.var.as_str(), o.value)).collect();
    let outputs_ok = oracle.iter().all(|(k, v)| finals.get(k.as_str()) == Some(v));
    let verdict = if fault.is_none() && outputs_ok && first_mismatch.is_none() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(ExecutionRecord {
        coverage,
        trace: m.trace,
        data_edges: m.data_edges,
        control_edges: m.control_edges,
        outputs: m.outputs,
        verdict,
        fault,
        first_mismatch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minilang::parse;

    fn run(src: &str, inputs: &[(&str, i64)], oracle: &[(&str, i64)]) -> ExecutionRecord {
        let p = parse(src).unwrap();
        let inputs = inputs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        let oracle = oracle.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        execute(&p, &inputs, &oracle, ExecConfig::default()).unwrap()
    }

    #[test]
    fn straight_line_pass() {
        let r = run("a = 2\nb = 3\nout = a * b\noutput(out)\n", &[], &[("out", 6)]);
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.coverage, vec![1, 1, 1, 1]);
        assert_eq!(r.output_map()["out"], 6);
        // out reads a (occ 0) and b (occ 1)
        let edges: Vec<_> = r.data_edges.iter().filter(|e| e.from == 2).map(|e| e.to).collect();
        assert_eq!(edges, vec![0, 1]);
    }

    #[test]
    fn straight_line_mismatch_fails() {
        let r = run("a = 2\nb = 3\nout = a * b\noutput(out)\n", &[], &[("out", 7)]);
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(r.first_mismatch, Some(0));
    }

    #[test]
    fn division_by_zero_is_a_failing_verdict() {
        let r = run("input x\nout = 1 / x\noutput(out)\n", &[("x", 0)], &[("out", 0)]);
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(r.fault, Some(RuntimeFault::DivisionByZero(Stmt(1))));
        assert_eq!(r.coverage, vec![1, 0]);
    }

    #[test]
    fn loop_cap_marks_nontermination() {
        let p = parse("i = 0\nwhile 1 {\n  i = i + 1\n}\n").unwrap();
        let r = execute(&p, &Inputs::new(), &Oracle::new(), ExecConfig { loop_cap: 50 }).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(matches!(r.fault, Some(RuntimeFault::NonTermination { cap: 50, .. })));
    }

    #[test]
    fn missing_output_fails() {
        let r = run("a = 1\n", &[], &[("b", 1)]);
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(r.first_mismatch, None);
    }

    #[test]
    fn unbound_input_is_harness_error() {
        let p = parse("input x\noutput(x)\n").unwrap();
        let err = execute(&p, &Inputs::new(), &Oracle::new(), ExecConfig::default()).unwrap_err();
        assert_eq!(err, ExecError::UnboundInput("x".into()));
    }

    #[test]
    fn loop_control_edges_chain_predicate_evaluations() {
        let r = run("i = 0\nwhile i < 2 {\n  i = i + 1\n}\noutput(i)\n", &[], &[("i", 2)]);
        // occurrences: 0 i=0, 1 while, 2 body, 3 while, 4 body, 5 while, 6 output
        let stmts: Vec<_> = r.trace.iter().map(|o| o.stmt.0).collect();
        assert_eq!(stmts, vec![1, 2, 3, 2, 3, 2, 4]);
        let ctrl: Vec<_> = r.control_edges.iter().map(|e| (e.from, e.to)).collect();
        assert_eq!(ctrl, vec![(2, 1), (3, 1), (4, 3), (5, 3)]);
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn execution_is_deterministic() {
        let src = "input x\ns = 0\nwhile x > 0 {\n  s = s + x % 10\n  x = x / 10\n}\noutput(s)\n";
        let a = run(src, &[("x", 9876)], &[("s", 30)]);
        let b = run(src, &[("x", 9876)], &[("s", 30)]);
        assert_eq!(a, b);
        assert_eq!(a.verdict, Verdict::Pass);
    }
}
