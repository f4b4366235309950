//! Tokenizer shared by the textual formats (configurations, statecharts,
//! system models, scenarios).

use crate::diag::{Diagnostic, Pos};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    /// `[A-Za-z_][A-Za-z0-9_.:]*`
    Ident(String),
    Str(String),
    Int(i64),
    Real(f64),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Eq,
    EqEq,
    Semi,
    Arrow,
    Lt,
    Le,
    Gt,
    Ge,
    At,
    Slash,
    LBracket,
    RBracket,
    Minus,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Int(i) => format!("number {i}"),
            Tok::Real(r) => format!("number {r}"),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Eq => "`=`".into(),
            Tok::EqEq => "`==`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::At => "`@`".into(),
            Tok::Slash => "`/`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

/// Tokenizes `src`. `--` and `#` start line comments.
pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos::new(line, col);
        let peek = chars.get(i + 1).copied();
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => advance(1, &mut i, &mut col),
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '-' if peek == Some('-') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '-' if peek == Some('>') => {
                out.push(Token { tok: Tok::Arrow, pos });
                advance(2, &mut i, &mut col);
            }
            '{' | '}' | '(' | ')' | ',' | ';' | '@' | '/' | '[' | ']' => {
                let tok = match c {
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    ';' => Tok::Semi,
                    '@' => Tok::At,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    _ => Tok::Slash,
                };
                out.push(Token { tok, pos });
                advance(1, &mut i, &mut col);
            }
            '=' | '<' | '>' => {
                let (tok, n) = match (c, peek) {
                    ('=', Some('=')) => (Tok::EqEq, 2),
                    ('=', _) => (Tok::Eq, 1),
                    ('<', Some('=')) => (Tok::Le, 2),
                    ('<', _) => (Tok::Lt, 1),
                    ('>', Some('=')) => (Tok::Ge, 2),
                    _ => (Tok::Gt, 1),
                };
                out.push(Token { tok, pos });
                advance(n, &mut i, &mut col);
            }
            '"' | '\'' => {
                let quote = c;
                let mut s = String::new();
                let mut j = i + 1;
                let mut ccol = col + 1;
                loop {
                    match chars.get(j) {
                        None | Some('\n') => {
                            return Err(Diagnostic::error(pos, "unterminated string literal"))
                        }
                        Some(&ch) if ch == quote => break,
                        Some('\\') => {
                            let esc = match chars.get(j + 1) {
                                Some('n') => '\n',
                                Some('t') => '\t',
                                Some(&e @ ('\\' | '"' | '\'')) => e,
                                _ => {
                                    return Err(Diagnostic::error(
                                        Pos::new(line, ccol),
                                        "invalid escape sequence",
                                    ))
                                }
                            };
                            s.push(esc);
                            j += 2;
                            ccol += 2;
                        }
                        Some(&ch) => {
                            s.push(ch);
                            j += 1;
                            ccol += 1;
                        }
                    }
                }
                out.push(Token { tok: Tok::Str(s), pos });
                let n = j + 1 - i;
                advance(n, &mut i, &mut col);
            }
            c if c.is_ascii_digit() || (c == '-' && peek.is_some_and(|p| p.is_ascii_digit())) => {
                let start = i;
                let mut j = i + 1;
                let mut real = false;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if chars.get(j) == Some(&'.') && chars.get(j + 1).is_some_and(|d| d.is_ascii_digit()) {
                    real = true;
                    j += 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                if matches!(chars.get(j), Some('e' | 'E')) {
                    let mut k = j + 1;
                    if matches!(chars.get(k), Some('+' | '-')) {
                        k += 1;
                    }
                    if chars.get(k).is_some_and(|d| d.is_ascii_digit()) {
                        real = true;
                        j = k;
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                    }
                }
                let text: String = chars[start..j].iter().collect();
                let tok = if real {
                    Tok::Real(text.parse().map_err(|_| Diagnostic::error(pos, "invalid number"))?)
                } else {
                    Tok::Int(
                        text.parse()
                            .map_err(|_| Diagnostic::error(pos, "integer literal out of range"))?,
                    )
                };
                out.push(Token { tok, pos });
                let n = j - i;
                advance(n, &mut i, &mut col);
            }
            '-' => {
                out.push(Token { tok: Tok::Minus, pos });
                advance(1, &mut i, &mut col);
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                let mut j = i + 1;
                while j < chars.len()
                    && (chars[j].is_ascii_alphanumeric() || matches!(chars[j], '_' | '.' | ':'))
                {
                    j += 1;
                }
                let text: String = chars[start..j].iter().collect();
                out.push(Token { tok: Tok::Ident(text), pos });
                let n = j - i;
                advance(n, &mut i, &mut col);
            }
            other => {
                return Err(Diagnostic::error(pos, format!("unexpected character {other:?}")));
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos::new(line, col),
    });
    Ok(out)
}

/// Cursor over a token vector with the helpers every format parser needs.
pub(crate) struct Cursor {
    toks: Vec<Token>,
    at: usize,
}

impl Cursor {
    pub(crate) fn new(toks: Vec<Token>) -> Self {
        Cursor { toks, at: 0 }
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    pub(crate) fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    pub(crate) fn next(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    pub(crate) fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub(crate) fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.next();
            true
        } else {
            false
        }
    }

    pub(crate) fn unexpected(&self, expected: &str) -> Diagnostic {
        Diagnostic::error(
            self.pos(),
            format!("expected {expected}, found {}", self.peek().describe()),
        )
    }

    pub(crate) fn expect(&mut self, tok: &Tok) -> Result<Pos, Diagnostic> {
        if self.peek() == tok {
            Ok(self.next().pos)
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    pub(crate) fn ident(&mut self) -> Result<(String, Pos), Diagnostic> {
        match self.peek().clone() {
            Tok::Ident(s) => Ok((s, self.next().pos)),
            _ => Err(self.unexpected("identifier")),
        }
    }

    pub(crate) fn keyword(&mut self, kw: &str) -> Result<Pos, Diagnostic> {
        match self.peek() {
            Tok::Ident(s) if s == kw => Ok(self.next().pos),
            _ => Err(self.unexpected(&format!("`{kw}`"))),
        }
    }

    pub(crate) fn string(&mut self) -> Result<(String, Pos), Diagnostic> {
        match self.peek().clone() {
            Tok::Str(s) => Ok((s, self.next().pos)),
            _ => Err(self.unexpected("string")),
        }
    }

    pub(crate) fn uint(&mut self) -> Result<(u64, Pos), Diagnostic> {
        match self.peek().clone() {
            Tok::Int(i) if i >= 0 => Ok((i as u64, self.next().pos)),
            _ => Err(self.unexpected("non-negative integer")),
        }
    }
}
