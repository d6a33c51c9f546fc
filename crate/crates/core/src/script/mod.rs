//! `.ffx` experiment scripts: lexer, parser, static checker and an
//! interpreter that drives a [`Testbench`](crate::instruments::Testbench).
//!
//! ```text
//! let k = 0
//! repeat 10 {
//!     bias -1 + k * 0.2
//!     wait 0.4
//!     measure
//!     save T, BIAS, ZC22
//!     k = k + 1
//! }
//! ```

pub mod ast;
pub mod check;
pub mod interp;
pub mod lexer;
pub mod parser;

use std::fmt;

pub use ast::{BinOp, CmpOp, Cond, Expr, Program, Stmt, StmtKind};
pub use check::{check, Code, Diagnostic, Diagnostics, Severity};
pub use interp::{CsvSink, Interpreter, Sink, DEFAULT_STEP_LIMIT};
pub use lexer::{lex, Token, TokenKind};

use crate::instruments::Testbench;

/// Bundled scripts mirroring the canned experiments.
pub mod library {
    pub const HYSTERESIS: &str = include_str!("../../scripts/hysteresis.ffx");
    pub const MEMORY: &str = include_str!("../../scripts/memory.ffx");
    pub const SETPOINT: &str = include_str!("../../scripts/setpoint.ffx");

    pub fn get(name: &str) -> Option<&'static str> {
        match name {
            "hysteresis" => Some(HYSTERESIS),
            "memory" => Some(MEMORY),
            "setpoint" => Some(SETPOINT),
            _ => None,
        }
    }
}

/// Read-only names available to every script.
pub const BUILTINS: [&str; 6] = ["ZC11", "ZC12", "ZC21", "ZC22", "T", "BIAS"];

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScriptError {
    #[error("{pos}: unknown character `{ch}`")]
    UnknownCharacter { ch: char, pos: Pos },

    #[error("{pos}: malformed number `{text}`")]
    BadNumber { text: String, pos: Pos },

    #[error("{pos}: expected {}, found {found}", .expected.join(" or "))]
    Syntax {
        expected: Vec<String>,
        found: String,
        pos: Pos,
    },

    #[error("{pos}: variable `{name}` has no value")]
    UndefinedVariable { name: String, pos: Pos },

    #[error("{pos}: `{name}` read before the first measure")]
    NoMeasurement { name: String, pos: Pos },

    #[error("{pos}: step limit of {limit} statements exceeded")]
    StepLimit { limit: u64, pos: Pos },

    #[error("{pos}: {message}")]
    Sink { message: String, pos: Pos },

    #[error("{pos}: {source}")]
    Runtime { source: crate::Error, pos: Pos },
}

impl ScriptError {
    pub fn pos(&self) -> Pos {
        match self {
            ScriptError::UnknownCharacter { pos, .. }
            | ScriptError::BadNumber { pos, .. }
            | ScriptError::Syntax { pos, .. }
            | ScriptError::UndefinedVariable { pos, .. }
            | ScriptError::NoMeasurement { pos, .. }
            | ScriptError::StepLimit { pos, .. }
            | ScriptError::Sink { pos, .. }
            | ScriptError::Runtime { pos, .. } => *pos,
        }
    }

    /// True for lexer and parser errors.
    pub fn is_syntax(&self) -> bool {
        matches!(
            self,
            ScriptError::UnknownCharacter { .. } | ScriptError::BadNumber { .. } | ScriptError::Syntax { .. }
        )
    }
}

fn end_pos(text: &str) -> Pos {
    let line = text.matches('\n').count() + 1;
    let last = text.rsplit('\n').next().unwrap_or("");
    Pos {
        line,
        col: last.chars().count() + 1,
    }
}

pub fn parse(text: &str) -> Result<Program, ScriptError> {
    let tokens = lex(text)?;
    parser::parse_tokens(&tokens, end_pos(text))
}

/// Parses and checks; syntax errors come back as a single diagnostic.
pub fn check_source(text: &str) -> Diagnostics {
    match parse(text) {
        Ok(p) => check(&p),
        Err(e) => Diagnostics::from_error(&e),
    }
}

/// Runs a program on a bench with the default step limit.
pub fn run(program: &Program, bench: &mut Testbench, sink: &mut dyn Sink) -> Result<(), ScriptError> {
    Interpreter::new(bench).run(program, sink)
}
