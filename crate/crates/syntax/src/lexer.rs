//! Tokenization. Comments run from `--` to end of line; identifiers may use
//! any alphabetic characters (Greek rate symbols lex as ordinary
//! identifiers); numbers accept decimal and scientific notation.

use std::sync::Arc;

use errml_model::diag::{Diagnostic, SourceSpan};

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Ident(String),
    Number(f64),
    Colon,
    Semi,
    Dot,
    Equals,
    FatArrow,
    Arrow,
    Minus,
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    AnnexOpen,
    AnnexClose,
    Eof,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("'{}'", s),
            TokenKind::Number(n) => format!("number {}", n),
            TokenKind::Colon => "':'".into(),
            TokenKind::Semi => "';'".into(),
            TokenKind::Dot => "'.'".into(),
            TokenKind::Equals => "'='".into(),
            TokenKind::FatArrow => "'=>'".into(),
            TokenKind::Arrow => "'->'".into(),
            TokenKind::Minus => "'-'".into(),
            TokenKind::LBrace => "'{'".into(),
            TokenKind::RBrace => "'}'".into(),
            TokenKind::LParen => "'('".into(),
            TokenKind::RParen => "')'".into(),
            TokenKind::LBracket => "'['".into(),
            TokenKind::RBracket => "']'".into(),
            TokenKind::AnnexOpen => "'{**'".into(),
            TokenKind::AnnexClose => "'**}'".into(),
            TokenKind::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
}

struct Lexer<'a> {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    column: u32,
    file: Arc<str>,
    tokens: Vec<Token>,
    diagnostics: Vec<Diagnostic>,
    _text: &'a str,
}

pub fn tokenize(text: &str, file: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let mut lx = Lexer {
        chars: text.chars().collect(),
        pos: 0,
        line: 1,
        column: 1,
        file: Arc::from(file),
        tokens: Vec::new(),
        diagnostics: Vec::new(),
        _text: text,
    };
    lx.run();
    (lx.tokens, lx.diagnostics)
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn span(&self, line: u32, column: u32, length: u32) -> SourceSpan {
        SourceSpan {
            file: self.file.clone(),
            line,
            column,
            length,
        }
    }

    fn push(&mut self, kind: TokenKind, line: u32, column: u32, length: u32) {
        self.tokens.push(Token {
            kind,
            span: self.span(line, column, length),
        });
    }

    fn run(&mut self) {
        while let Some(c) = self.peek() {
            let (line, column) = (self.line, self.column);
            match c {
                c if c.is_whitespace() => {
                    self.bump();
                }
                '-' => match self.peek_at(1) {
                    Some('-') => {
                        while let Some(c) = self.peek() {
                            if c == '\n' {
                                break;
                            }
                            self.bump();
                        }
                    }
                    Some('>') => {
                        self.bump();
                        self.bump();
                        self.push(TokenKind::Arrow, line, column, 2);
                    }
                    _ => {
                        self.bump();
                        self.push(TokenKind::Minus, line, column, 1);
                    }
                },
                '=' => {
                    if self.peek_at(1) == Some('>') {
                        self.bump();
                        self.bump();
                        self.push(TokenKind::FatArrow, line, column, 2);
                    } else {
                        self.bump();
                        self.push(TokenKind::Equals, line, column, 1);
                    }
                }
                '{' => {
                    if self.peek_at(1) == Some('*') && self.peek_at(2) == Some('*') {
                        self.bump();
                        self.bump();
                        self.bump();
                        self.push(TokenKind::AnnexOpen, line, column, 3);
                    } else {
                        self.bump();
                        self.push(TokenKind::LBrace, line, column, 1);
                    }
                }
                '*' => {
                    if self.peek_at(1) == Some('*') && self.peek_at(2) == Some('}') {
                        self.bump();
                        self.bump();
                        self.bump();
                        self.push(TokenKind::AnnexClose, line, column, 3);
                    } else {
                        self.bump();
                        self.diagnostics.push(Diagnostic::error(
                            "unexpected character '*'",
                            self.span(line, column, 1),
                        ));
                    }
                }
                '}' => {
                    self.bump();
                    self.push(TokenKind::RBrace, line, column, 1);
                }
                '(' => {
                    self.bump();
                    self.push(TokenKind::LParen, line, column, 1);
                }
                ')' => {
                    self.bump();
                    self.push(TokenKind::RParen, line, column, 1);
                }
                '[' => {
                    self.bump();
                    self.push(TokenKind::LBracket, line, column, 1);
                }
                ']' => {
                    self.bump();
                    self.push(TokenKind::RBracket, line, column, 1);
                }
                ':' => {
                    self.bump();
                    self.push(TokenKind::Colon, line, column, 1);
                }
                ';' => {
                    self.bump();
                    self.push(TokenKind::Semi, line, column, 1);
                }
                '.' => {
                    self.bump();
                    self.push(TokenKind::Dot, line, column, 1);
                }
                c if c.is_ascii_digit() => self.lex_number(line, column),
                c if c.is_alphabetic() || c == '_' => self.lex_ident(line, column),
                other => {
                    self.bump();
                    self.diagnostics.push(Diagnostic::error(
                        format!("unexpected character '{}'", other),
                        self.span(line, column, 1),
                    ));
                }
            }
        }
        let (line, column) = (self.line, self.column);
        self.push(TokenKind::Eof, line, column, 0);
    }

    fn lex_number(&mut self, line: u32, column: u32) {
        let mut raw = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                raw.push(c);
                self.bump();
            } else {
                break;
            }
        }
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            raw.push('.');
            self.bump();
            while let Some(c) = self.peek() {
                if c.is_ascii_digit() {
                    raw.push(c);
                    self.bump();
                } else {
                    break;
                }
            }
        }
        if matches!(self.peek(), Some('e') | Some('E')) {
            let mut lookahead = 1;
            if matches!(self.peek_at(1), Some('+') | Some('-')) {
                lookahead = 2;
            }
            if self.peek_at(lookahead).is_some_and(|c| c.is_ascii_digit()) {
                for _ in 0..lookahead {
                    raw.push(self.peek().unwrap());
                    self.bump();
                }
                while let Some(c) = self.peek() {
                    if c.is_ascii_digit() {
                        raw.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
            }
        }
        let length = raw.chars().count() as u32;
        match raw.parse::<f64>() {
            Ok(v) if v.is_finite() => self.push(TokenKind::Number(v), line, column, length),
            _ => self.diagnostics.push(Diagnostic::error(
                format!("number '{}' out of range", raw),
                self.span(line, column, length),
            )),
        }
    }

    fn lex_ident(&mut self, line: u32, column: u32) {
        let mut text = String::new();
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || c == '_' {
                text.push(c);
                self.bump();
            } else {
                break;
            }
        }
        let length = text.chars().count() as u32;
        self.push(TokenKind::Ident(text), line, column, length);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(text: &str) -> Vec<TokenKind> {
        let (tokens, diags) = tokenize(text, "t");
        assert!(diags.is_empty(), "{diags:?}");
        tokens.into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn transition_arrow_tokens() {
        let k = kinds("Error_Free-[Fail] -> Failed;");
        assert_eq!(
            k,
            vec![
                TokenKind::Ident("Error_Free".into()),
                TokenKind::Minus,
                TokenKind::LBracket,
                TokenKind::Ident("Fail".into()),
                TokenKind::RBracket,
                TokenKind::Arrow,
                TokenKind::Ident("Failed".into()),
                TokenKind::Semi,
                TokenKind::Eof,
            ]
        );
    }

    #[test]
    fn comments_and_annex_delimiters() {
        let k = kinds("annex error_model {** -- note\n model **};");
        assert_eq!(
            k,
            vec![
                TokenKind::Ident("annex".into()),
                TokenKind::Ident("error_model".into()),
                TokenKind::AnnexOpen,
                TokenKind::Ident("model".into()),
                TokenKind::AnnexClose,
                TokenKind::Semi,
                TokenKind::Eof,
            ]
        );
    }

    #[test]
    fn numbers_decimal_and_scientific() {
        let k = kinds("1.5 2e-3 7 0.001E+2");
        assert_eq!(
            k,
            vec![
                TokenKind::Number(1.5),
                TokenKind::Number(2e-3),
                TokenKind::Number(7.0),
                TokenKind::Number(0.1),
                TokenKind::Eof,
            ]
        );
    }

    #[test]
    fn greek_identifiers() {
        let k = kinds("λ μ");
        assert_eq!(
            k,
            vec![
                TokenKind::Ident("λ".into()),
                TokenKind::Ident("μ".into()),
                TokenKind::Eof
            ]
        );
    }

    #[test]
    fn occurrence_braces() {
        let k = kinds("{Occurrence => Poisson λ}");
        assert_eq!(k[0], TokenKind::LBrace);
        assert_eq!(k[2], TokenKind::FatArrow);
        assert_eq!(*k.last().unwrap(), TokenKind::Eof);
    }

    #[test]
    fn unknown_character_reported_and_skipped() {
        let (tokens, diags) = tokenize("a # b", "t");
        assert_eq!(diags.len(), 1);
        assert!(diags[0].message.contains('#'));
        assert_eq!(tokens.len(), 3); // a, b, eof
    }

    #[test]
    fn spans_are_one_based() {
        let (tokens, _) = tokenize("ab\n cd", "t");
        assert_eq!(tokens[0].span.line, 1);
        assert_eq!(tokens[0].span.column, 1);
        assert_eq!(tokens[1].span.line, 2);
        assert_eq!(tokens[1].span.column, 2);
    }
}
