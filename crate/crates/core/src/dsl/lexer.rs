//! Tokenizer for `.social` files.

use super::diagnostic::{Diagnostic, DiagnosticCode, Span};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Arrow,
    Eq,
    PlusEq,
    MinusEq,
    Lt,
    Le,
    Gt,
    Ge,
    Pipe,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("number {n}"),
            Tok::Str(_) => "string".to_string(),
            Tok::LBrace => "`{`".to_string(),
            Tok::RBrace => "`}`".to_string(),
            Tok::LParen => "`(`".to_string(),
            Tok::RParen => "`)`".to_string(),
            Tok::Comma => "`,`".to_string(),
            Tok::Arrow => "`->`".to_string(),
            Tok::Eq => "`=`".to_string(),
            Tok::PlusEq => "`+=`".to_string(),
            Tok::MinusEq => "`-=`".to_string(),
            Tok::Lt => "`<`".to_string(),
            Tok::Le => "`<=`".to_string(),
            Tok::Gt => "`>`".to_string(),
            Tok::Ge => "`>=`".to_string(),
            Tok::Pipe => "`|`".to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    column: u32,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line = self.line.saturating_add(1);
            self.column = 1;
        } else {
            self.column = self.column.saturating_add(1);
        }
        Some(c)
    }

    fn span(&self) -> Span {
        Span::new(self.line, self.column)
    }
}

/// Splits `src` into tokens. Lexical errors are reported and skipped.
pub fn lex(src: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let mut cur = Cursor { chars: src.chars().peekable(), line: 1, column: 1 };
    let mut tokens = Vec::new();
    let mut diags = Vec::new();

    while let Some(c) = cur.peek() {
        let span = cur.span();
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '#' {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(c) = cur.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    s.push(c);
                    cur.bump();
                } else {
                    break;
                }
            }
            tokens.push(Token { tok: Tok::Ident(s), span });
            continue;
        }
        if c.is_ascii_digit() {
            match lex_int(&mut cur, false) {
                Some(n) => tokens.push(Token { tok: Tok::Int(n), span }),
                None => diags.push(Diagnostic::new(DiagnosticCode::IntOverflow, span, "integer literal does not fit in 64 bits")),
            }
            continue;
        }
        if c == '"' {
            cur.bump();
            match lex_string(&mut cur, &mut diags) {
                Some(s) => tokens.push(Token { tok: Tok::Str(s), span }),
                None => diags.push(Diagnostic::new(DiagnosticCode::UnterminatedString, span, "string is not closed on this line")),
            }
            continue;
        }
        cur.bump();
        let tok = match c {
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '|' => Tok::Pipe,
            '=' => Tok::Eq,
            '+' if cur.peek() == Some('=') => {
                cur.bump();
                Tok::PlusEq
            }
            '-' => match cur.peek() {
                Some('>') => {
                    cur.bump();
                    Tok::Arrow
                }
                Some('=') => {
                    cur.bump();
                    Tok::MinusEq
                }
                Some(d) if d.is_ascii_digit() => {
                    match lex_int(&mut cur, true) {
                        Some(n) => tokens.push(Token { tok: Tok::Int(n), span }),
                        None => diags.push(Diagnostic::new(DiagnosticCode::IntOverflow, span, "integer literal does not fit in 64 bits")),
                    }
                    continue;
                }
                _ => {
                    diags.push(Diagnostic::new(DiagnosticCode::UnexpectedChar, span, "unexpected character `-`"));
                    continue;
                }
            },
            '<' | '>' => {
                let eq = cur.peek() == Some('=');
                if eq {
                    cur.bump();
                }
                match (c, eq) {
                    ('<', false) => Tok::Lt,
                    ('<', true) => Tok::Le,
                    ('>', false) => Tok::Gt,
                    _ => Tok::Ge,
                }
            }
            other => {
                diags.push(Diagnostic::new(
                    DiagnosticCode::UnexpectedChar,
                    span,
                    format!("unexpected character {:?}", other),
                ));
                continue;
            }
        };
        tokens.push(Token { tok, span });
    }
    (tokens, diags)
}

fn lex_int(cur: &mut Cursor<'_>, negative: bool) -> Option<i64> {
    let mut acc: Option<i64> = Some(0);
    while let Some(c) = cur.peek() {
        let Some(d) = c.to_digit(10) else { break };
        cur.bump();
        acc = acc.and_then(|a| {
            let a = a.checked_mul(10)?;
            if negative {
                a.checked_sub(d as i64)
            } else {
                a.checked_add(d as i64)
            }
        });
    }
    // a number glued to letters is still one bad token
    while let Some(c) = cur.peek() {
        if c.is_ascii_alphabetic() || c == '_' {
            cur.bump();
            acc = None;
        } else {
            break;
        }
    }
    acc
}

fn lex_string(cur: &mut Cursor<'_>, diags: &mut Vec<Diagnostic>) -> Option<String> {
    let mut s = String::new();
    loop {
        let span = cur.span();
        match cur.peek()? {
            '\n' => return None,
            '"' => {
                cur.bump();
                return Some(s);
            }
            '\\' => {
                cur.bump();
                match cur.peek()? {
                    '"' => s.push('"'),
                    '\\' => s.push('\\'),
                    'n' => s.push('\n'),
                    't' => s.push('\t'),
                    '\n' => return None,
                    other => diags.push(Diagnostic::new(
                        DiagnosticCode::UnexpectedChar,
                        span,
                        format!("unknown escape \\{}", other.escape_debug()),
                    )),
                }
                cur.bump();
            }
            c => {
                s.push(c);
                cur.bump();
            }
        }
    }
}
