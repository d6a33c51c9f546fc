use std::collections::BTreeSet;
use std::fmt;

use super::Pos;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    fn prec(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }

    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            BinOp::Add => a + b,
            BinOp::Sub => a - b,
            BinOp::Mul => a * b,
            BinOp::Div => a / b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }

    pub fn apply(self, a: f64, b: f64) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    /// Value of the expression if it contains no variables.
    pub fn constant(&self) -> Option<f64> {
        match self {
            Expr::Num(n) => Some(*n),
            Expr::Var(_) => None,
            Expr::Neg(e) => e.constant().map(|v| -v),
            Expr::Bin(op, a, b) => Some(op.apply(a.constant()?, b.constant()?)),
        }
    }

    pub fn vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(v) => out.push(v),
            Expr::Neg(e) => e.vars(out),
            Expr::Bin(_, a, b) => {
                a.vars(out);
                b.vars(out);
            }
        }
    }

    fn prec(&self) -> u8 {
        match self {
            Expr::Bin(op, ..) => op.prec(),
            _ => 3,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(n) => write!(f, "{n}"),
            Expr::Var(v) => f.write_str(v),
            Expr::Neg(e) => write!(f, "-({e})"),
            Expr::Bin(op, a, b) => {
                if a.prec() < op.prec() {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                write!(f, " {} ", op.symbol())?;
                if b.prec() <= op.prec() {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cond {
    pub lhs: Expr,
    pub op: CmpOp,
    pub rhs: Expr,
}

impl fmt::Display for Cond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.op.symbol(), self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Let(String, Expr),
    Assign(String, Expr),
    Bias(Expr),
    Wait(Expr),
    Measure,
    Save(Vec<Expr>),
    Print(Expr),
    If(Cond, Vec<Stmt>, Option<Vec<Stmt>>),
    While(Cond, Vec<Stmt>),
    Repeat(u64, Vec<Stmt>),
}

/// A statement and where it starts. Equality ignores the position.
#[derive(Debug, Clone)]
pub struct Stmt {
    pub kind: StmtKind,
    pub pos: Pos,
}

impl PartialEq for Stmt {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub statements: Vec<Stmt>,
    pub declared_vars: BTreeSet<String>,
}

impl Program {
    /// Start position of every statement, in source order.
    pub fn source_map(&self) -> Vec<Pos> {
        fn walk(stmts: &[Stmt], out: &mut Vec<Pos>) {
            for s in stmts {
                out.push(s.pos);
                match &s.kind {
                    StmtKind::If(_, a, b) => {
                        walk(a, out);
                        if let Some(b) = b {
                            walk(b, out);
                        }
                    }
                    StmtKind::While(_, body) | StmtKind::Repeat(_, body) => walk(body, out),
                    _ => {}
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.statements, &mut out);
        out
    }

    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }
}

fn write_block(f: &mut fmt::Formatter<'_>, stmts: &[Stmt], depth: usize) -> fmt::Result {
    for s in stmts {
        write_stmt(f, s, depth)?;
    }
    Ok(())
}

fn write_stmt(f: &mut fmt::Formatter<'_>, s: &Stmt, depth: usize) -> fmt::Result {
    let pad = "    ".repeat(depth);
    match &s.kind {
        StmtKind::Let(n, e) => writeln!(f, "{pad}let {n} = {e}"),
        StmtKind::Assign(n, e) => writeln!(f, "{pad}{n} = {e}"),
        StmtKind::Bias(e) => writeln!(f, "{pad}bias {e}"),
        StmtKind::Wait(e) => writeln!(f, "{pad}wait {e}"),
        StmtKind::Measure => writeln!(f, "{pad}measure"),
        StmtKind::Save(es) => {
            let cols: Vec<String> = es.iter().map(|e| e.to_string()).collect();
            writeln!(f, "{pad}save {}", cols.join(", "))
        }
        StmtKind::Print(e) => writeln!(f, "{pad}print {e}"),
        StmtKind::If(c, a, b) => {
            writeln!(f, "{pad}if {c} {{")?;
            write_block(f, a, depth + 1)?;
            match b {
                Some(b) => {
                    writeln!(f, "{pad}}} else {{")?;
                    write_block(f, b, depth + 1)?;
                    writeln!(f, "{pad}}}")
                }
                None => writeln!(f, "{pad}}}"),
            }
        }
        StmtKind::While(c, body) => {
            writeln!(f, "{pad}while {c} {{")?;
            write_block(f, body, depth + 1)?;
            writeln!(f, "{pad}}}")
        }
        StmtKind::Repeat(n, body) => {
            writeln!(f, "{pad}repeat {n} {{")?;
            write_block(f, body, depth + 1)?;
            writeln!(f, "{pad}}}")
        }
    }
}

/// Canonical source text of the program.
impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_block(f, &self.statements, 0)
    }
}
