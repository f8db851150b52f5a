//! Random well-formed programs, used as fuzz inputs for slicing and
//! interpreter properties.
//!
//! Every variable read is either an input or definitely assigned on all
//! paths, and every loop is driven by a fresh countdown counter, so
//! executions always terminate.

use rand::Rng;

use super::ast::{BinOp, Expr};

const INPUTS: [&str; 3] = ["x", "y", "z"];
const VARS: [&str; 5] = ["a", "b", "c", "d", "e"];

struct Gen<'r, R: Rng> {
    rng: &'r mut R,
    budget: usize,
    counters: usize,
    lines: Vec<String>,
}

impl<R: Rng> Gen<'_, R> {
    fn leaf(&mut self, defined: &[String]) -> Expr {
        if self.rng.random_bool(0.3) || defined.is_empty() {
            Expr::Int(self.rng.random_range(0..10))
        } else {
            Expr::Var(defined[self.rng.random_range(0..defined.len())].clone())
        }
    }

    fn expr(&mut self, defined: &[String], depth: usize) -> Expr {
        if depth == 0 || self.rng.random_bool(0.4) {
            return self.leaf(defined);
        }
        let op = match self.rng.random_range(0..10) {
            0..=3 => BinOp::Add,
            4..=6 => BinOp::Sub,
            7 | 8 => BinOp::Mul,
            _ => BinOp::Mod,
        };
        let l = self.expr(defined, depth - 1);
        let r = if op == BinOp::Mod {
            Expr::Int(self.rng.random_range(2..7))
        } else {
            self.expr(defined, depth - 1)
        };
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    fn cond(&mut self, defined: &[String]) -> Expr {
        let op = [BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge, BinOp::Eq, BinOp::Ne]
            [self.rng.random_range(0..6)];
        let l = self.expr(defined, 1);
        let r = self.leaf(defined);
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    fn push(&mut self, depth: usize, text: String) {
        self.lines.push(format!("{}{}", "    ".repeat(depth), text));
    }

    /// Emits statements until the budget runs out or the block is long enough.
    /// Returns the variables definitely assigned on exit.
    fn block(&mut self, mut defined: Vec<String>, depth: usize, max_len: usize) -> Vec<String> {
        let mut emitted = 0;
        while self.budget > 0 && emitted < max_len {
            let roll = self.rng.random_range(0..100);
            if roll < 12 && depth < 2 && self.budget >= 3 {
                self.budget -= 1;
                let c = self.cond(&defined);
                self.push(depth, format!("if {c} {{"));
                let inner = self.rng.random_range(1..4);
                let then_defs = self.block(defined.clone(), depth + 1, inner);
                if self.rng.random_bool(0.5) && self.budget > 0 {
                    self.push(depth, "} else {".into());
                    let else_defs = self.block(defined.clone(), depth + 1, inner);
                    self.push(depth, "}".into());
                    let both: Vec<String> =
                        then_defs.into_iter().filter(|v| else_defs.contains(v)).collect();
                    for v in both {
                        if !defined.contains(&v) {
                            defined.push(v);
                        }
                    }
                } else {
                    self.push(depth, "}".into());
                }
            } else if roll < 20 && depth < 2 && self.budget >= 4 {
                let counter = format!("k{}", self.counters);
                self.counters += 1;
                let trips = self.rng.random_range(1..4);
                self.budget -= 3;
                self.push(depth, format!("{counter} = {trips}"));
                self.push(depth, format!("while {counter} > 0 {{"));
                let inner = self.rng.random_range(1..3);
                self.block(defined.clone(), depth + 1, inner);
                self.push(depth + 1, format!("{counter} = {counter} - 1"));
                self.push(depth, "}".into());
            } else if roll < 30 && !defined.is_empty() {
                self.budget -= 1;
                let v = defined[self.rng.random_range(0..defined.len())].clone();
                self.push(depth, format!("output({v})"));
            } else {
                self.budget -= 1;
                let target = VARS[self.rng.random_range(0..VARS.len())].to_string();
                let e = self.expr(&defined, 2);
                self.push(depth, format!("{target} = {e}"));
                if !defined.contains(&target) {
                    defined.push(target);
                }
            }
            emitted += 1;
        }
        defined
    }
}

/// Generates the source of a random terminating program with at most
/// `max_statements` numbered statements (and at least one).
pub fn random_program_source<R: Rng>(rng: &mut R, max_statements: usize) -> String {
    let max_statements = max_statements.max(1);
    let mut g = Gen { rng, budget: max_statements, counters: 0, lines: Vec::new() };
    let inputs: Vec<String> = INPUTS.iter().map(|s| s.to_string()).collect();
    let defined = g.block(inputs.clone(), 0, usize::MAX);
    if let Some(v) = defined.last() {
        if g.lines.is_empty() {
            g.lines.push(format!("output({v})"));
        }
    }
    let mut src = format!("input {}\n", inputs.join(", "));
    for l in g.lines {
        src.push_str(&l);
        src.push('\n');
    }
    src
}

/// Random bindings for the inputs of programs produced by [`random_program_source`].
pub fn random_inputs<R: Rng>(rng: &mut R) -> super::Inputs {
    INPUTS.iter().map(|n| (n.to_string(), rng.random_range(-20..=20))).collect()
}
