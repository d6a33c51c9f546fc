use std::collections::HashMap;

use super::ast::{Cond, Expr, Program, Stmt, StmtKind};
use super::{Pos, ScriptError};
use crate::instruments::Testbench;
use crate::rf::Collapsed;

pub const DEFAULT_STEP_LIMIT: u64 = 10_000_000;

/// Destination of `save` rows and `print` values.
pub trait Sink {
    /// One row; `columns` are the source texts of the saved expressions.
    fn save(&mut self, columns: &[String], values: &[f64]) -> Result<(), String>;
    fn print(&mut self, value: f64);
}

/// Collects rows in memory. The header comes from the first `save`; later
/// rows must have the same width.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CsvSink {
    pub header: Option<Vec<String>>,
    pub rows: Vec<Vec<f64>>,
    pub printed: Vec<f64>,
}

impl Sink for CsvSink {
    fn save(&mut self, columns: &[String], values: &[f64]) -> Result<(), String> {
        match &self.header {
            None => self.header = Some(columns.to_vec()),
            Some(h) if h.len() != values.len() => {
                return Err(format!("save has {} columns, the header has {}", values.len(), h.len()))
            }
            Some(_) => {}
        }
        self.rows.push(values.to_vec());
        Ok(())
    }

    fn print(&mut self, value: f64) {
        self.printed.push(value);
    }
}

impl CsvSink {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if let Some(h) = &self.header {
            let cells: Vec<String> = h.iter().map(|c| csv_cell(c)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(f64::to_string).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn csv_cell(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub struct Interpreter<'b> {
    bench: &'b mut Testbench,
    vars: HashMap<String, f64>,
    zc: Option<Collapsed>,
    steps: u64,
    pub step_limit: u64,
}

impl<'b> Interpreter<'b> {
    pub fn new(bench: &'b mut Testbench) -> Self {
        Self {
            bench,
            vars: HashMap::new(),
            zc: None,
            steps: 0,
            step_limit: DEFAULT_STEP_LIMIT,
        }
    }

    pub fn with_step_limit(mut self, limit: u64) -> Self {
        self.step_limit = limit;
        self
    }

    /// Statements executed so far.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn var(&self, name: &str) -> Option<f64> {
        self.vars.get(name).copied()
    }

    pub fn run(&mut self, program: &Program, sink: &mut dyn Sink) -> Result<(), ScriptError> {
        self.block(&program.statements, sink)
    }

    fn lookup(&self, name: &str, pos: Pos) -> Result<f64, ScriptError> {
        let zc = |f: fn(&Collapsed) -> f64| {
            self.zc.as_ref().map(f).ok_or_else(|| ScriptError::NoMeasurement {
                name: name.to_string(),
                pos,
            })
        };
        match name {
            "ZC11" => zc(|z| z.zc11),
            "ZC12" => zc(|z| z.zc12),
            "ZC21" => zc(|z| z.zc21),
            "ZC22" => zc(|z| z.zc22),
            "T" => Ok(self.bench.clock()),
            "BIAS" => Ok(self.bench.bias()),
            _ => self.vars.get(name).copied().ok_or_else(|| ScriptError::UndefinedVariable {
                name: name.to_string(),
                pos,
            }),
        }
    }

    fn eval(&self, e: &Expr, pos: Pos) -> Result<f64, ScriptError> {
        Ok(match e {
            Expr::Num(n) => *n,
            Expr::Var(v) => self.lookup(v, pos)?,
            Expr::Neg(a) => -self.eval(a, pos)?,
            Expr::Bin(op, a, b) => op.apply(self.eval(a, pos)?, self.eval(b, pos)?),
        })
    }

    fn test(&self, c: &Cond, pos: Pos) -> Result<bool, ScriptError> {
        Ok(c.op.apply(self.eval(&c.lhs, pos)?, self.eval(&c.rhs, pos)?))
    }

    fn tick(&mut self, pos: Pos) -> Result<(), ScriptError> {
        if self.steps >= self.step_limit {
            return Err(ScriptError::StepLimit {
                limit: self.step_limit,
                pos,
            });
        }
        self.steps += 1;
        Ok(())
    }

    fn block(&mut self, stmts: &[Stmt], sink: &mut dyn Sink) -> Result<(), ScriptError> {
        for s in stmts {
            self.stmt(s, sink)?;
        }
        Ok(())
    }

    fn stmt(&mut self, s: &Stmt, sink: &mut dyn Sink) -> Result<(), ScriptError> {
        let pos = s.pos;
        self.tick(pos)?;
        let bench_err = |source| ScriptError::Runtime { source, pos };
        match &s.kind {
            StmtKind::Let(n, e) => {
                let v = self.eval(e, pos)?;
                self.vars.insert(n.clone(), v);
            }
            StmtKind::Assign(n, e) => {
                let v = self.eval(e, pos)?;
                match self.vars.get_mut(n) {
                    Some(slot) => *slot = v,
                    None => {
                        return Err(ScriptError::UndefinedVariable {
                            name: n.clone(),
                            pos,
                        })
                    }
                }
            }
            StmtKind::Bias(e) => {
                let v = self.eval(e, pos)?;
                self.bench.set_bias(v).map_err(bench_err)?;
            }
            StmtKind::Wait(e) => {
                let v = self.eval(e, pos)?;
                self.bench.wait(v).map_err(bench_err)?;
            }
            StmtKind::Measure => {
                self.zc = Some(self.bench.measure().map_err(bench_err)?);
            }
            StmtKind::Save(es) => {
                let values = es.iter().map(|e| self.eval(e, pos)).collect::<Result<Vec<_>, _>>()?;
                let cols: Vec<String> = es.iter().map(|e| e.to_string()).collect();
                sink.save(&cols, &values)
                    .map_err(|message| ScriptError::Sink { message, pos })?;
            }
            StmtKind::Print(e) => {
                let v = self.eval(e, pos)?;
                sink.print(v);
            }
            StmtKind::If(c, a, b) => {
                if self.test(c, pos)? {
                    self.block(a, sink)?;
                } else if let Some(b) = b {
                    self.block(b, sink)?;
                }
            }
            StmtKind::While(c, body) => {
                while self.test(c, pos)? {
                    self.block(body, sink)?;
                    // An empty body must still consume fuel.
                    self.tick(pos)?;
                }
            }
            StmtKind::Repeat(n, body) => {
                for _ in 0..*n {
                    self.block(body, sink)?;
                    self.tick(pos)?;
                }
            }
        }
        Ok(())
    }
}
