//! Lisp-style concrete syntax for Scene Language programs.
//!
//! ```text
//! <START>          ::= <bind-expr>*
//! <bind-expr>      ::= (bind <word> <entity-func> <embedding>*)
//! <entity-func>    ::= (lambda (embedding embedding-list) <sub-entities>)
//!                    | (lambda () (list <entity>*))
//! <sub-entities>   ::= (union <entity-transform>*)
//!                    | (union-loop <count> (lambda (i) <entity-transform>))
//!                    | (if <cond> <sub-entities> <sub-entities>)
//! <entity-transform> ::= (transform <entity> <matrix>)
//! <entity>         ::= (call <word> <embedding>*)
//! <embedding>      ::= (embed (<key> <value>+)*)
//! ```
//!
//! Words are quoted strings; bare symbols are variable references.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod pretty;
pub mod validate;

use std::fmt;

use thiserror::Error;

pub use ast::{BindExpr, Builtin, Expr, ExprKind, FuncDef, Program, Span};
pub use lexer::{tokenize, Token, TokenKind};
pub use pretty::pretty_print;
pub use validate::validate;

/// Source text plus a display name, used to turn byte spans into
/// `line:column` positions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SourceMap {
    pub name: String,
    pub text: String,
}

impl SourceMap {
    pub fn new(name: impl Into<String>, text: impl Into<String>) -> Self {
        SourceMap {
            name: name.into(),
            text: text.into(),
        }
    }

    /// 1-based line and column (in characters) of a byte offset.
    pub fn line_col(&self, offset: usize) -> (usize, usize) {
        let offset = offset.min(self.text.len());
        let before = &self.text[..offset];
        let line = before.matches('\n').count() + 1;
        let line_start = before.rfind('\n').map(|i| i + 1).unwrap_or(0);
        let col = before[line_start..].chars().count() + 1;
        (line, col)
    }

    pub(crate) fn error(&self, message: impl Into<String>, span: Span) -> ParseError {
        let (line, column) = self.line_col(span.start);
        ParseError {
            message: message.into(),
            span,
            line,
            column,
        }
    }
}

/// A lexical or grammatical error.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub message: String,
    pub span: Span,
    pub line: usize,
    pub column: usize,
}

impl ParseError {
    pub fn to_diagnostic(&self) -> Diagnostic {
        Diagnostic::error(self.message.clone(), self.span)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
    pub span: Span,
}

impl Diagnostic {
    pub fn error(message: impl Into<String>, span: Span) -> Self {
        Diagnostic {
            severity: Severity::Error,
            message: message.into(),
            span,
        }
    }

    /// `file:line:col: severity: message`
    pub fn render(&self, source: &SourceMap) -> String {
        let (line, col) = source.line_col(self.span.start);
        format!("{}:{}:{}: {}: {}", source.name, line, col, self.severity, self.message)
    }
}

pub fn parse(text: &str) -> Result<Program, ParseError> {
    parse_named("<input>", text)
}

pub fn parse_named(name: &str, text: &str) -> Result<Program, ParseError> {
    parser::parse_program(SourceMap::new(name, text))
}

/// Parses and validates; on failure returns every diagnostic.
pub fn load(name: &str, text: &str) -> Result<Program, Vec<Diagnostic>> {
    let program = parse_named(name, text).map_err(|e| vec![e.to_diagnostic()])?;
    let diags = validate(&program);
    if diags.is_empty() {
        Ok(program)
    } else {
        Err(diags)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_col_counts_characters() {
        let m = SourceMap::new("f.sl", "ab\ncdé\nx");
        assert_eq!(m.line_col(0), (1, 1));
        assert_eq!(m.line_col(3), (2, 1));
        assert_eq!(m.line_col(8), (3, 1));
        assert_eq!(m.line_col(7), (2, 4));
    }

    #[test]
    fn diagnostic_format() {
        let m = SourceMap::new("scene.sl", "(bind\n \"a\")");
        let d = Diagnostic::error("boom", Span::new(7, 10));
        assert_eq!(d.render(&m), "scene.sl:2:2: error: boom");
    }
}
