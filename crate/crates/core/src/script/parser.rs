use std::collections::BTreeSet;

use super::ast::{BinOp, CmpOp, Cond, Expr, Program, Stmt, StmtKind};
use super::lexer::{Token, TokenKind, KEYWORDS};
use super::{Pos, ScriptError};

struct Parser<'a> {
    tokens: &'a [Token],
    i: usize,
    end: Pos,
    declared: BTreeSet<String>,
}

fn expected(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a TokenKind> {
        self.tokens.get(self.i).map(|t| &t.kind)
    }

    fn pos(&self) -> Pos {
        self.tokens.get(self.i).map_or(self.end, |t| t.pos)
    }

    fn error(&self, exp: Vec<String>) -> ScriptError {
        ScriptError::Syntax {
            expected: exp,
            found: self.peek().map_or("end of input".into(), TokenKind::describe),
            pos: self.pos(),
        }
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek() == Some(kind) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<(), ScriptError> {
        if self.eat(&kind) {
            Ok(())
        } else {
            Err(self.error(vec![format!("`{}`", kind.symbol())]))
        }
    }

    fn skip_seps(&mut self) {
        while self.eat(&TokenKind::Sep) {}
    }

    fn ident(&mut self) -> Result<String, ScriptError> {
        match self.peek() {
            Some(TokenKind::Ident(n)) if !KEYWORDS.contains(&n.as_str()) => {
                self.i += 1;
                Ok(n.clone())
            }
            _ => Err(self.error(expected(&["identifier"]))),
        }
    }

    /// Statements until `}` (when `in_block`) or end of input.
    fn block(&mut self, in_block: bool) -> Result<Vec<Stmt>, ScriptError> {
        let mut out = Vec::new();
        loop {
            self.skip_seps();
            match self.peek() {
                None if in_block => return Err(self.error(expected(&["`}`"]))),
                None => return Ok(out),
                Some(TokenKind::RBrace) if in_block => {
                    self.i += 1;
                    return Ok(out);
                }
                _ => {}
            }
            out.push(self.statement()?);
            match self.peek() {
                None | Some(TokenKind::Sep) => {}
                Some(TokenKind::RBrace) if in_block => {}
                _ => return Err(self.error(expected(&["end of statement"]))),
            }
        }
    }

    fn braced(&mut self) -> Result<Vec<Stmt>, ScriptError> {
        self.expect(TokenKind::LBrace)?;
        self.block(true)
    }

    fn statement(&mut self) -> Result<Stmt, ScriptError> {
        let pos = self.pos();
        let kw = match self.peek() {
            Some(TokenKind::Ident(n)) => n.as_str(),
            _ => return Err(self.error(expected(&["statement"]))),
        };
        let kind = match kw {
            "let" => {
                self.i += 1;
                let name = self.ident()?;
                self.expect(TokenKind::Assign)?;
                let e = self.expr()?;
                self.declared.insert(name.clone());
                StmtKind::Let(name, e)
            }
            "bias" => {
                self.i += 1;
                StmtKind::Bias(self.expr()?)
            }
            "wait" => {
                self.i += 1;
                StmtKind::Wait(self.expr()?)
            }
            "measure" => {
                self.i += 1;
                StmtKind::Measure
            }
            "save" => {
                self.i += 1;
                let mut cols = vec![self.expr()?];
                while self.eat(&TokenKind::Comma) {
                    cols.push(self.expr()?);
                }
                StmtKind::Save(cols)
            }
            "print" => {
                self.i += 1;
                StmtKind::Print(self.expr()?)
            }
            "if" => {
                self.i += 1;
                let c = self.cond()?;
                let then = self.braced()?;
                let other = if self.eat(&TokenKind::Ident("else".into())) {
                    Some(self.braced()?)
                } else {
                    None
                };
                StmtKind::If(c, then, other)
            }
            "while" => {
                self.i += 1;
                let c = self.cond()?;
                StmtKind::While(c, self.braced()?)
            }
            "repeat" => {
                self.i += 1;
                let n = match self.peek() {
                    Some(TokenKind::Number(n)) if *n >= 0.0 && n.fract() == 0.0 && *n <= u64::MAX as f64 => *n as u64,
                    _ => return Err(self.error(expected(&["non-negative integer"]))),
                };
                self.i += 1;
                StmtKind::Repeat(n, self.braced()?)
            }
            "else" => return Err(self.error(expected(&["statement"]))),
            _ => {
                let name = self.ident()?;
                self.expect(TokenKind::Assign)?;
                StmtKind::Assign(name, self.expr()?)
            }
        };
        Ok(Stmt { kind, pos })
    }

    fn cond(&mut self) -> Result<Cond, ScriptError> {
        let lhs = self.expr()?;
        let op = match self.peek() {
            Some(TokenKind::Lt) => CmpOp::Lt,
            Some(TokenKind::Le) => CmpOp::Le,
            Some(TokenKind::Gt) => CmpOp::Gt,
            Some(TokenKind::Ge) => CmpOp::Ge,
            Some(TokenKind::EqEq) => CmpOp::Eq,
            Some(TokenKind::Ne) => CmpOp::Ne,
            _ => return Err(self.error(expected(&["`<`", "`<=`", "`>`", "`>=`", "`==`", "`!=`"]))),
        };
        self.i += 1;
        let rhs = self.expr()?;
        Ok(Cond { lhs, op, rhs })
    }

    fn expr(&mut self) -> Result<Expr, ScriptError> {
        let mut e = self.term()?;
        loop {
            let op = match self.peek() {
                Some(TokenKind::Plus) => BinOp::Add,
                Some(TokenKind::Minus) => BinOp::Sub,
                _ => return Ok(e),
            };
            self.i += 1;
            e = Expr::bin(op, e, self.term()?);
        }
    }

    fn term(&mut self) -> Result<Expr, ScriptError> {
        let mut e = self.factor()?;
        loop {
            let op = match self.peek() {
                Some(TokenKind::Star) => BinOp::Mul,
                Some(TokenKind::Slash) => BinOp::Div,
                _ => return Ok(e),
            };
            self.i += 1;
            e = Expr::bin(op, e, self.factor()?);
        }
    }

    fn factor(&mut self) -> Result<Expr, ScriptError> {
        match self.peek() {
            Some(TokenKind::Number(n)) => {
                self.i += 1;
                Ok(Expr::Num(*n))
            }
            Some(TokenKind::Minus) => {
                self.i += 1;
                Ok(Expr::Neg(Box::new(self.factor()?)))
            }
            Some(TokenKind::LParen) => {
                self.i += 1;
                let e = self.expr()?;
                self.expect(TokenKind::RParen)?;
                Ok(e)
            }
            Some(TokenKind::Ident(n)) if !KEYWORDS.contains(&n.as_str()) => {
                self.i += 1;
                Ok(Expr::Var(n.clone()))
            }
            _ => Err(self.error(expected(&["number", "identifier", "`(`", "`-`"]))),
        }
    }
}

/// Parses a token stream. `end` is reported for errors at end of input.
pub fn parse_tokens(tokens: &[Token], end: Pos) -> Result<Program, ScriptError> {
    let mut p = Parser {
        tokens,
        i: 0,
        end,
        declared: BTreeSet::new(),
    };
    let statements = p.block(false)?;
    Ok(Program {
        statements,
        declared_vars: p.declared,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{parse, Pos, ScriptError};
    use super::*;

    #[test]
    fn three_statements() {
        let p = parse("bias 3.3\nwait 4\nmeasure").unwrap();
        assert_eq!(p.statements.len(), 3);
        assert_eq!(p.source_map()[2], Pos { line: 3, col: 1 });
    }

    #[test]
    fn let_with_subtraction() {
        let p = parse("let x = ZC22 - 14338").unwrap();
        assert_eq!(
            p.statements[0].kind,
            StmtKind::Let(
                "x".into(),
                Expr::bin(BinOp::Sub, Expr::Var("ZC22".into()), Expr::Num(14338.0))
            )
        );
        assert!(p.declared_vars.contains("x"));
    }

    #[test]
    fn missing_brace_at_end() {
        match parse("if x < 0 { bias 3.3 }\nif x < 0 { bias 3.3") {
            Err(ScriptError::Syntax { found, pos, .. }) => {
                assert_eq!(found, "end of input");
                assert_eq!(pos, Pos { line: 2, col: 20 });
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn precedence_and_printing() {
        let p = parse("let y = 1 - (2 - 3) * 4 / -(5)").unwrap();
        assert_eq!(p.to_string(), "let y = 1 - (2 - 3) * 4 / -(5)\n");
        let q = parse("let z = (1 + 2) - 3 - (4 - 5)").unwrap();
        assert_eq!(q.to_string(), "let z = 1 + 2 - 3 - (4 - 5)\n");
    }

    #[test]
    fn else_branch_and_semicolons() {
        let p = parse("measure; if ZC22 > 1 { print 1 } else { print 2 }; save ZC22, T").unwrap();
        assert_eq!(p.statements.len(), 3);
        assert_eq!(parse(&p.to_string()).unwrap(), p);
    }

    #[test]
    fn junk_after_statement() {
        assert!(matches!(parse("measure 3"), Err(ScriptError::Syntax { .. })));
        assert!(matches!(parse("repeat 2.5 { }"), Err(ScriptError::Syntax { .. })));
    }
}
