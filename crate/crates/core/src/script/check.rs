use std::collections::HashSet;
use std::fmt;

use super::ast::{BinOp, CmpOp, Cond, Expr, Program, Stmt, StmtKind};
use super::{Pos, ScriptError, BUILTINS};
use crate::ffmodel::MAX_BIAS;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Code {
    Syntax,
    UndeclaredVariable,
    BiasOutOfRange,
    NegativeDuration,
    UnreachableCode,
    DivisionByZero,
    AssignToBuiltin,
    FloatEquality,
}

impl Code {
    pub fn as_str(self) -> &'static str {
        match self {
            Code::Syntax => "E000",
            Code::UndeclaredVariable => "E001",
            Code::BiasOutOfRange => "E002",
            Code::NegativeDuration => "E003",
            Code::UnreachableCode => "E004",
            Code::DivisionByZero => "E005",
            Code::AssignToBuiltin => "E006",
            Code::FloatEquality => "W001",
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            Code::FloatEquality => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub code: Code,
    pub message: String,
    pub pos: Pos,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.code.severity() {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}: {sev}[{}]: {}", self.pos, self.code.as_str(), self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnostics {
    pub errors: Vec<Diagnostic>,
    pub warnings: Vec<Diagnostic>,
}

impl Diagnostics {
    pub fn passed(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn has(&self, code: Code) -> bool {
        self.errors.iter().chain(&self.warnings).any(|d| d.code == code)
    }

    fn push(&mut self, code: Code, message: String, pos: Pos) {
        let d = Diagnostic { code, message, pos };
        match code.severity() {
            Severity::Error => self.errors.push(d),
            Severity::Warning => self.warnings.push(d),
        }
    }

    pub(crate) fn from_error(e: &ScriptError) -> Self {
        let mut d = Diagnostics::default();
        d.push(Code::Syntax, e.to_string(), e.pos());
        d
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in self.errors.iter().chain(&self.warnings) {
            writeln!(f, "{d}")?;
        }
        Ok(())
    }
}

struct Checker {
    declared: HashSet<String>,
    diags: Diagnostics,
}

fn is_builtin(name: &str) -> bool {
    BUILTINS.contains(&name)
}

fn mentions_builtin(e: &Expr) -> bool {
    let mut v = Vec::new();
    e.vars(&mut v);
    v.into_iter().any(is_builtin)
}

/// A loop whose condition is constant and true. Loops whose condition
/// depends on variables may never be entered, so they are not flagged.
fn never_exits(cond: &Cond) -> bool {
    match (cond.lhs.constant(), cond.rhs.constant()) {
        (Some(a), Some(b)) => cond.op.apply(a, b),
        _ => false,
    }
}

impl Checker {
    fn expr(&mut self, e: &Expr, pos: Pos) {
        match e {
            Expr::Num(_) => {}
            Expr::Var(v) => {
                if !is_builtin(v) && !self.declared.contains(v) {
                    self.diags
                        .push(Code::UndeclaredVariable, format!("variable `{v}` is used before `let {v}`"), pos);
                }
            }
            Expr::Neg(a) => self.expr(a, pos),
            Expr::Bin(op, a, b) => {
                self.expr(a, pos);
                self.expr(b, pos);
                if *op == BinOp::Div && b.constant() == Some(0.0) {
                    self.diags
                        .push(Code::DivisionByZero, format!("division by constant zero in `{e}`"), pos);
                }
            }
        }
    }

    fn cond(&mut self, c: &Cond, pos: Pos) {
        self.expr(&c.lhs, pos);
        self.expr(&c.rhs, pos);
        if matches!(c.op, CmpOp::Eq | CmpOp::Ne) && (mentions_builtin(&c.lhs) || mentions_builtin(&c.rhs)) {
            self.diags.push(
                Code::FloatEquality,
                format!("exact comparison `{c}` on a measured quantity"),
                pos,
            );
        }
    }

    fn block(&mut self, stmts: &[Stmt]) {
        let mut dead_after: Option<Pos> = None;
        for s in stmts {
            if let Some(loop_pos) = dead_after.take() {
                self.diags.push(
                    Code::UnreachableCode,
                    format!("statement is unreachable: the loop at {loop_pos} never exits"),
                    s.pos,
                );
            }
            self.stmt(s);
            if let StmtKind::While(c, _) = &s.kind {
                if never_exits(c) {
                    dead_after = Some(s.pos);
                }
            }
        }
    }

    fn stmt(&mut self, s: &Stmt) {
        let pos = s.pos;
        match &s.kind {
            StmtKind::Let(n, e) => {
                self.expr(e, pos);
                if is_builtin(n) {
                    self.diags
                        .push(Code::AssignToBuiltin, format!("`{n}` is a read-only builtin"), pos);
                }
                self.declared.insert(n.clone());
            }
            StmtKind::Assign(n, e) => {
                self.expr(e, pos);
                if is_builtin(n) {
                    self.diags
                        .push(Code::AssignToBuiltin, format!("`{n}` is a read-only builtin"), pos);
                } else if !self.declared.contains(n) {
                    self.diags
                        .push(Code::UndeclaredVariable, format!("assignment to undeclared `{n}`"), pos);
                }
            }
            StmtKind::Bias(e) => {
                self.expr(e, pos);
                if let Some(v) = e.constant() {
                    if !(v.abs() <= MAX_BIAS) {
                        self.diags.push(
                            Code::BiasOutOfRange,
                            format!("bias {v} V is outside +/-{MAX_BIAS} V"),
                            pos,
                        );
                    }
                }
            }
            StmtKind::Wait(e) => {
                self.expr(e, pos);
                if let Some(v) = e.constant() {
                    if !(v >= 0.0) {
                        self.diags
                            .push(Code::NegativeDuration, format!("wait of {v} s is negative"), pos);
                    }
                }
            }
            StmtKind::Measure => {}
            StmtKind::Save(es) => {
                for e in es {
                    self.expr(e, pos);
                }
            }
            StmtKind::Print(e) => self.expr(e, pos),
            StmtKind::If(c, a, b) => {
                self.cond(c, pos);
                self.block(a);
                if let Some(b) = b {
                    self.block(b);
                }
            }
            StmtKind::While(c, body) => {
                self.cond(c, pos);
                self.block(body);
            }
            StmtKind::Repeat(_, body) => self.block(body),
        }
    }
}

/// Static pre-execution check. Declarations count from their textual
/// position onward, across blocks.
pub fn check(program: &Program) -> Diagnostics {
    let mut c = Checker {
        declared: HashSet::new(),
        diags: Diagnostics::default(),
    };
    c.block(&program.statements);
    c.diags
}

#[cfg(test)]
mod tests {
    use super::super::{check_source, parse};
    use super::*;

    fn codes(src: &str) -> Vec<Code> {
        let d = check_source(src);
        d.errors.iter().chain(&d.warnings).map(|d| d.code).collect()
    }

    #[test]
    fn canonical_errors() {
        assert_eq!(codes("bias 12"), vec![Code::BiasOutOfRange]);
        assert_eq!(codes("print y\nlet y = 1"), vec![Code::UndeclaredVariable]);
        assert_eq!(codes("repeat 3 {\nmeasure\n"), vec![Code::Syntax]);
        assert_eq!(codes("wait 2 - 3"), vec![Code::NegativeDuration]);
        assert_eq!(codes("let x = 1 / (2 - 2)"), vec![Code::DivisionByZero]);
        assert_eq!(codes("ZC22 = 3"), vec![Code::AssignToBuiltin]);
    }

    #[test]
    fn unreachable_after_infinite_loop() {
        let d = check_source("while 1 > 0 { wait 1 }\nmeasure");
        assert_eq!(d.errors.len(), 1);
        assert_eq!(d.errors[0].code, Code::UnreachableCode);
        assert_eq!(d.errors[0].pos, Pos { line: 2, col: 1 });
        assert!(check_source("while 1 < 0 { wait 1 }\nmeasure").passed());
    }

    #[test]
    fn equality_on_measurement_warns() {
        let d = check_source("measure\nif ZC22 == 3 { print 1 }");
        assert!(d.passed());
        assert_eq!(d.warnings[0].code, Code::FloatEquality);
        assert!(check_source("let k = 0\nif k == 0 { print 1 }").warnings.is_empty());
    }

    #[test]
    fn computed_bias_is_not_flagged() {
        let p = parse("let k = 200\nbias k * 0.1").unwrap();
        assert!(check(&p).passed());
    }
}
