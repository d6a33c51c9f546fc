use super::{Pos, ScriptError};

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Ident(String),
    Number(f64),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Assign,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    Ne,
    /// Newline or `;`.
    Sep,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("`{s}`"),
            TokenKind::Number(n) => format!("number {n}"),
            TokenKind::Sep => "end of statement".into(),
            other => format!("`{}`", other.symbol()),
        }
    }

    pub(crate) fn symbol(&self) -> &'static str {
        match self {
            TokenKind::Plus => "+",
            TokenKind::Minus => "-",
            TokenKind::Star => "*",
            TokenKind::Slash => "/",
            TokenKind::LParen => "(",
            TokenKind::RParen => ")",
            TokenKind::LBrace => "{",
            TokenKind::RBrace => "}",
            TokenKind::Comma => ",",
            TokenKind::Assign => "=",
            TokenKind::Lt => "<",
            TokenKind::Le => "<=",
            TokenKind::Gt => ">",
            TokenKind::Ge => ">=",
            TokenKind::EqEq => "==",
            TokenKind::Ne => "!=",
            TokenKind::Sep => ";",
            TokenKind::Ident(_) | TokenKind::Number(_) => "",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub pos: Pos,
}

pub const KEYWORDS: [&str; 10] = [
    "let", "bias", "wait", "measure", "save", "print", "if", "else", "while", "repeat",
];

/// A `-` directly followed by a digit becomes part of the number unless the
/// previous token ends a value (`x -1` is a subtraction, `bias -1` is not).
fn minus_folds(prev: Option<&TokenKind>) -> bool {
    match prev {
        None => true,
        Some(TokenKind::Number(_)) | Some(TokenKind::RParen) => false,
        Some(TokenKind::Ident(name)) => KEYWORDS.contains(&name.as_str()),
        Some(_) => true,
    }
}

pub fn lex(text: &str) -> Result<Vec<Token>, ScriptError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens: Vec<Token> = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        let start = i;
        let single = |k: TokenKind| Some((k, 1usize));
        let simple = match c {
            ' ' | '\t' | '\r' => {
                i += 1;
                col += 1;
                continue;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '\n' => {
                tokens.push(Token { kind: TokenKind::Sep, pos });
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            ';' => single(TokenKind::Sep),
            '+' => single(TokenKind::Plus),
            '*' => single(TokenKind::Star),
            '/' => single(TokenKind::Slash),
            '(' => single(TokenKind::LParen),
            ')' => single(TokenKind::RParen),
            '{' => single(TokenKind::LBrace),
            '}' => single(TokenKind::RBrace),
            ',' => single(TokenKind::Comma),
            '<' | '>' | '=' | '!' => {
                let eq = chars.get(i + 1) == Some(&'=');
                match (c, eq) {
                    ('<', true) => Some((TokenKind::Le, 2)),
                    ('<', false) => single(TokenKind::Lt),
                    ('>', true) => Some((TokenKind::Ge, 2)),
                    ('>', false) => single(TokenKind::Gt),
                    ('=', true) => Some((TokenKind::EqEq, 2)),
                    ('=', false) => single(TokenKind::Assign),
                    ('!', true) => Some((TokenKind::Ne, 2)),
                    _ => return Err(ScriptError::UnknownCharacter { ch: c, pos }),
                }
            }
            '-' => {
                let next_digit = chars
                    .get(i + 1)
                    .is_some_and(|d| d.is_ascii_digit() || *d == '.');
                if next_digit && minus_folds(tokens.last().map(|t| &t.kind)) {
                    None
                } else {
                    single(TokenKind::Minus)
                }
            }
            _ => None,
        };
        if let Some((kind, len)) = simple {
            tokens.push(Token { kind, pos });
            i += len;
            col += len;
            continue;
        }
        if c == '-' || c.is_ascii_digit() || c == '.' {
            i += 1;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let lit: String = chars[start..i].iter().collect();
            let value = match lit.parse::<f64>() {
                Ok(v) if v.is_finite() => v,
                _ => return Err(ScriptError::BadNumber { text: lit, pos }),
            };
            tokens.push(Token {
                kind: TokenKind::Number(value),
                pos,
            });
            col += i - start;
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            tokens.push(Token {
                kind: TokenKind::Ident(chars[start..i].iter().collect()),
                pos,
            });
            col += i - start;
            continue;
        }
        return Err(ScriptError::UnknownCharacter { ch: c, pos });
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(s: &str) -> Vec<TokenKind> {
        lex(s).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn empty_and_comments() {
        assert!(lex("").unwrap().is_empty());
        assert_eq!(kinds("# only a comment"), vec![]);
    }

    #[test]
    fn negative_literal_after_keyword() {
        assert_eq!(
            kinds("bias -3.3"),
            vec![TokenKind::Ident("bias".into()), TokenKind::Number(-3.3)]
        );
        assert_eq!(
            kinds("x -3"),
            vec![TokenKind::Ident("x".into()), TokenKind::Minus, TokenKind::Number(3.0)]
        );
        assert_eq!(
            kinds("1 - -2e-1"),
            vec![TokenKind::Number(1.0), TokenKind::Minus, TokenKind::Number(-0.2)]
        );
    }

    #[test]
    fn unknown_character_position() {
        assert_eq!(
            lex("bias @"),
            Err(ScriptError::UnknownCharacter {
                ch: '@',
                pos: Pos { line: 1, col: 6 }
            })
        );
    }

    #[test]
    fn positions_track_lines() {
        let t = lex("measure\n  wait 2").unwrap();
        assert_eq!(t[2].pos, Pos { line: 2, col: 3 });
    }
}
