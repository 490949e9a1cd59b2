//! Textual front end for the dependability modeling language: tokenizer,
//! recursive-descent parser with error recovery, and a canonical pretty
//! printer whose output re-parses to the same AST.
//!
//! Model files carry the `.errml` extension and are UTF-8 text; the grammar
//! reference lives in `docs/grammar.md` at the repository root.

pub mod lexer;
pub mod parser;
pub mod printer;

use std::path::Path;

use errml_model::diag::Diagnostic;
use errml_model::Model;

pub use parser::{parse_guard, parse_model};
pub use printer::pretty_print;

/// Parse a model file from disk.
pub fn parse_file(path: &Path) -> std::io::Result<(Model, Vec<Diagnostic>)> {
    let text = std::fs::read_to_string(path)?;
    Ok(parse_model(&text, &path.to_string_lossy()))
}
