//! Tokenizer for the Python subset: indentation-sensitive, with implicit
//! line joining inside brackets and `#` comments stripped.

use crate::frontend::FrontendError;
use crate::span::SourceSpan;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Name(String),
    Int(i64),
    Float(f64),
    Str(String),
    Keyword(&'static str),
    Op(&'static str),
    Newline,
    Indent,
    Dedent,
    Eof,
}

pub const KEYWORDS: &[&str] = &[
    "def", "class", "if", "elif", "else", "while", "with", "as", "return", "import", "from", "pass",
    "True", "False", "None", "lambda", "for", "try", "except", "finally", "yield", "global",
    "nonlocal", "del", "raise", "assert", "break", "continue", "in", "is", "not", "and", "or",
];

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

pub struct Lexer<'a> {
    src: &'a [u8],
    text: &'a str,
    file: String,
    pos: usize,
    line: u32,
    col: u32,
    indents: Vec<u32>,
    paren_depth: u32,
    at_line_start: bool,
    tokens: Vec<Token>,
}

impl<'a> Lexer<'a> {
    pub fn new(text: &'a str, file: &str) -> Self {
        Lexer {
            src: text.as_bytes(),
            text,
            file: file.to_string(),
            pos: 0,
            line: 1,
            col: 1,
            indents: vec![0],
            paren_depth: 0,
            at_line_start: true,
            tokens: Vec::new(),
        }
    }

    fn here(&self) -> SourceSpan {
        SourceSpan::point(&self.file, self.line, self.col)
    }

    fn err(&self, msg: impl Into<String>) -> FrontendError {
        FrontendError::Syntax {
            span: self.here(),
            message: msg.into(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<u8> {
        self.src.get(self.pos + 1).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn push(&mut self, tok: Tok, start_line: u32, start_col: u32) {
        let span = SourceSpan::new(
            &self.file,
            start_line,
            start_col,
            self.line,
            self.col.saturating_sub(1).max(start_col),
        );
        self.tokens.push(Token { tok, span });
    }

    pub fn tokenize(mut self) -> Result<Vec<Token>, FrontendError> {
        loop {
            if self.at_line_start && self.paren_depth == 0 {
                if !self.handle_indentation()? {
                    break;
                }
                self.at_line_start = false;
                continue;
            }
            match self.peek() {
                None => break,
                Some(b'#') => {
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                Some(b'\n') => {
                    self.bump();
                    if self.paren_depth == 0 {
                        if !matches!(self.tokens.last().map(|t| &t.tok), Some(Tok::Newline) | None) {
                            let l = self.line - 1;
                            self.tokens.push(Token {
                                tok: Tok::Newline,
                                span: SourceSpan::point(&self.file, l, 1),
                            });
                        }
                        self.at_line_start = true;
                    }
                }
                Some(b' ') | Some(b'\t') | Some(b'\r') => {
                    self.bump();
                }
                Some(b'\\') if self.peek2() == Some(b'\n') => {
                    self.bump();
                    self.bump();
                }
                Some(_) => self.lex_token()?,
            }
        }
        // close any open suite
        if !matches!(self.tokens.last().map(|t| &t.tok), Some(Tok::Newline) | None) {
            let span = self.here();
            self.tokens.push(Token { tok: Tok::Newline, span });
        }
        while self.indents.len() > 1 {
            self.indents.pop();
            let span = self.here();
            self.tokens.push(Token { tok: Tok::Dedent, span });
        }
        let span = self.here();
        self.tokens.push(Token { tok: Tok::Eof, span });
        Ok(self.tokens)
    }

    /// Measures leading whitespace and emits Indent/Dedent. Returns false at EOF.
    fn handle_indentation(&mut self) -> Result<bool, FrontendError> {
        loop {
            let mut width: u32 = 0;
            loop {
                match self.peek() {
                    Some(b' ') => {
                        width += 1;
                        self.bump();
                    }
                    Some(b'\t') => {
                        width += 8 - (width % 8);
                        self.bump();
                    }
                    _ => break,
                }
            }
            match self.peek() {
                None => return Ok(false),
                Some(b'\n') => {
                    self.bump();
                    continue; // blank line
                }
                Some(b'#') => {
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                    continue;
                }
                Some(_) => {
                    let current = *self.indents.last().expect("indent stack never empty");
                    if width > current {
                        self.indents.push(width);
                        let span = self.here();
                        self.tokens.push(Token { tok: Tok::Indent, span });
                    } else if width < current {
                        while *self.indents.last().unwrap() > width {
                            self.indents.pop();
                            let span = self.here();
                            self.tokens.push(Token { tok: Tok::Dedent, span });
                        }
                        if *self.indents.last().unwrap() != width {
                            return Err(self.err("inconsistent dedent"));
                        }
                    }
                    return Ok(true);
                }
            }
        }
    }

    fn lex_token(&mut self) -> Result<(), FrontendError> {
        let (sl, sc) = (self.line, self.col);
        let c = self.peek().expect("caller checked non-eof");
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = self.pos;
            while let Some(c) = self.peek() {
                if c.is_ascii_alphanumeric() || c == b'_' {
                    self.bump();
                } else {
                    break;
                }
            }
            let word = &self.text[start..self.pos];
            if let Some(kw) = KEYWORDS.iter().find(|k| **k == word) {
                self.push(Tok::Keyword(kw), sl, sc);
            } else {
                self.push(Tok::Name(word.to_string()), sl, sc);
            }
            return Ok(());
        }
        if c.is_ascii_digit() || (c == b'.' && self.peek2().is_some_and(|c| c.is_ascii_digit())) {
            return self.lex_number(sl, sc);
        }
        if c == b'\'' || c == b'"' {
            return self.lex_string(sl, sc);
        }
        // operators and delimiters, longest match first
        const TWO: &[&str] = &["**", "//", "==", "!=", "<=", ">=", "+=", "-=", "*=", "/=", "->"];
        const ONE: &[&str] = &["+", "-", "*", "/", "%", "<", ">", "=", "(", ")", "[", "]", "{", "}", ",", ":", ".", ";", "@"];
        let rest = &self.text[self.pos..];
        for op in TWO {
            if rest.starts_with(op) {
                self.bump();
                self.bump();
                self.adjust_parens(op);
                self.push(Tok::Op(op), sl, sc);
                return Ok(());
            }
        }
        for op in ONE {
            if rest.starts_with(op) {
                self.bump();
                self.adjust_parens(op);
                self.push(Tok::Op(op), sl, sc);
                return Ok(());
            }
        }
        Err(self.err(format!("unexpected character {:?}", c as char)))
    }

    fn adjust_parens(&mut self, op: &str) {
        match op {
            "(" | "[" | "{" => self.paren_depth += 1,
            ")" | "]" | "}" => self.paren_depth = self.paren_depth.saturating_sub(1),
            _ => {}
        }
    }

    fn lex_number(&mut self, sl: u32, sc: u32) -> Result<(), FrontendError> {
        let start = self.pos;
        let mut is_float = false;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                self.bump();
            } else if c == b'.' && !is_float && self.peek2() != Some(b'.') {
                is_float = true;
                self.bump();
            } else if (c == b'e' || c == b'E')
                && self.peek2().is_some_and(|n| n.is_ascii_digit() || n == b'-' || n == b'+')
            {
                is_float = true;
                self.bump();
                self.bump();
            } else {
                break;
            }
        }
        let lit = &self.text[start..self.pos];
        if is_float {
            let v: f64 = lit.parse().map_err(|_| self.err(format!("bad float literal {lit:?}")))?;
            self.push(Tok::Float(v), sl, sc);
        } else {
            let v: i64 = lit.parse().map_err(|_| self.err(format!("bad int literal {lit:?}")))?;
            self.push(Tok::Int(v), sl, sc);
        }
        Ok(())
    }

    fn lex_string(&mut self, sl: u32, sc: u32) -> Result<(), FrontendError> {
        let quote = self.bump().expect("caller checked quote");
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return Err(self.err("unterminated string literal")),
                Some(b'\n') => return Err(self.err("newline in string literal")),
                Some(b'\\') => match self.bump() {
                    Some(b'n') => out.push('\n'),
                    Some(b't') => out.push('\t'),
                    Some(b'\\') => out.push('\\'),
                    Some(b'\'') => out.push('\''),
                    Some(b'"') => out.push('"'),
                    Some(other) => {
                        out.push('\\');
                        out.push(other as char);
                    }
                    None => return Err(self.err("unterminated string literal")),
                },
                Some(c) if c == quote => break,
                Some(c) => out.push(c as char),
            }
        }
        self.push(Tok::Str(out), sl, sc);
        Ok(())
    }
}
