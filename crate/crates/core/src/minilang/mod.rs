//! A tiny imperative language: integer assignments, `if`/`else`, `while`,
//! and `output(v)`, one statement per line with `#` comments.
//!
//! Executing a program records statement coverage, the dynamic trace, and
//! the data/control dependence edges between executed occurrences, which is
//! everything slicing and spectrum construction need.

mod ast;
mod interp;
mod mutate;
mod parser;
pub mod random;

pub use ast::{BinOp, Expr, Node, Program, Stmt, StmtKind, UnOp};
pub use interp::{
    execute, ControlEdge, DataEdge, ExecConfig, ExecError, ExecutionRecord, Inputs, Occurrence,
    Oracle, OutputEvent, RuntimeFault, Verdict, DEFAULT_LOOP_CAP,
};
pub use mutate::{candidate_mutations, seed_fault, Mutation, MutationError, MutationKind};
pub use parser::{parse, ParseError};
