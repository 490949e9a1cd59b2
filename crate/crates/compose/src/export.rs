//! Chain serialization.
//!
//! The explicit-state format is two text files. The transitions file starts
//! with `STATES <n> TRANSITIONS <m>` followed by one `src dst rate` line per
//! transition, 0-based indices, rates in scientific notation with 17
//! significant digits (exact round-trip). The labels file has one
//! `index label...` line per labeled state plus a `#INIT <index>` line.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::ctmc::{Ctmc, RateTransition};
use crate::explore::ExploreStats;

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

#[derive(Debug, Error, PartialEq)]
pub enum ReadError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("transitions file is missing the STATES/TRANSITIONS header")]
    MissingHeader,
    #[error("labels file is missing the #INIT line")]
    MissingInit,
}

/// A positive rate in scientific notation with 17 significant digits:
/// shortest round-trip digits, zero-padded. Reading the text back yields the
/// identical value.
pub fn format_rate(value: f64) -> String {
    let shortest = format!("{:e}", value);
    let (mantissa, exponent) = shortest.split_once('e').expect("exponent form");
    let digits = mantissa.chars().filter(|c| c.is_ascii_digit()).count();
    let mut padded = String::from(mantissa);
    if !padded.contains('.') {
        padded.push('.');
    }
    for _ in digits..17 {
        padded.push('0');
    }
    format!("{}e{}", padded, exponent)
}

/// Render the transitions file body.
pub fn render_transitions(ctmc: &Ctmc) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "STATES {} TRANSITIONS {}",
        ctmc.n_states,
        ctmc.transitions.len()
    );
    for t in &ctmc.transitions {
        let _ = writeln!(out, "{} {} {}", t.source, t.target, format_rate(t.rate));
    }
    out
}

/// Render the labels file body.
pub fn render_labels(ctmc: &Ctmc) -> String {
    let mut out = String::new();
    for state in 0..ctmc.n_states {
        let mask = ctmc.labels[state];
        if mask == 0 {
            continue;
        }
        let _ = write!(out, "{}", state);
        for (ci, class) in ctmc.classes.iter().enumerate() {
            if mask & (1u64 << ci) != 0 {
                let _ = write!(out, " {}", class);
            }
        }
        out.push('\n');
    }
    let _ = writeln!(out, "#INIT {}", ctmc.initial);
    out
}

/// Write `<base>.tra` and `<base>.lab`; returns both paths.
pub fn write_explicit(ctmc: &Ctmc, base: &Path) -> Result<(PathBuf, PathBuf), ExportError> {
    let tra = base.with_extension("tra");
    let lab = base.with_extension("lab");
    fs::write(&tra, render_transitions(ctmc)).map_err(|source| ExportError::Io {
        path: tra.clone(),
        source,
    })?;
    fs::write(&lab, render_labels(ctmc)).map_err(|source| ExportError::Io {
        path: lab.clone(),
        source,
    })?;
    Ok((tra, lab))
}

/// Parse an explicit-state pair back into a chain. State keys are left empty
/// and display names are synthesized.
pub fn read_explicit(transitions_text: &str, labels_text: &str) -> Result<Ctmc, ReadError> {
    let mut lines = transitions_text.lines().enumerate();
    let (_, header) = lines
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or(ReadError::MissingHeader)?;
    let head: Vec<&str> = header.split_whitespace().collect();
    let (n_states, n_transitions) = match head.as_slice() {
        ["STATES", n, "TRANSITIONS", m] => (
            n.parse::<usize>().map_err(|_| ReadError::MissingHeader)?,
            m.parse::<usize>().map_err(|_| ReadError::MissingHeader)?,
        ),
        _ => return Err(ReadError::MissingHeader),
    };
    let mut transitions = Vec::with_capacity(n_transitions);
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(ReadError::Malformed {
                line: i + 1,
                message: format!("expected 'src dst rate', got '{line}'"),
            });
        }
        let source: u32 = parts[0].parse().map_err(|_| ReadError::Malformed {
            line: i + 1,
            message: format!("bad source index '{}'", parts[0]),
        })?;
        let target: u32 = parts[1].parse().map_err(|_| ReadError::Malformed {
            line: i + 1,
            message: format!("bad target index '{}'", parts[1]),
        })?;
        let rate: f64 = parts[2].parse().map_err(|_| ReadError::Malformed {
            line: i + 1,
            message: format!("bad rate '{}'", parts[2]),
        })?;
        if (source as usize) >= n_states || (target as usize) >= n_states {
            return Err(ReadError::Malformed {
                line: i + 1,
                message: format!("state index out of range in '{line}'"),
            });
        }
        transitions.push(RateTransition {
            source,
            target,
            rate,
        });
    }
    if transitions.len() != n_transitions {
        return Err(ReadError::Malformed {
            line: 0,
            message: format!(
                "header declares {} transitions but {} were read",
                n_transitions,
                transitions.len()
            ),
        });
    }

    let mut classes: Vec<String> = Vec::new();
    let mut labels = vec![0u64; n_states];
    let mut initial: Option<u32> = None;
    for (i, line) in labels_text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("#INIT") {
            initial = Some(rest.trim().parse().map_err(|_| ReadError::Malformed {
                line: i + 1,
                message: format!("bad initial state '{}'", rest.trim()),
            })?);
            continue;
        }
        let mut parts = line.split_whitespace();
        let state: usize = parts
            .next()
            .unwrap()
            .parse()
            .map_err(|_| ReadError::Malformed {
                line: i + 1,
                message: format!("bad state index in '{line}'"),
            })?;
        if state >= n_states {
            return Err(ReadError::Malformed {
                line: i + 1,
                message: format!("state index {state} out of range"),
            });
        }
        for class in parts {
            let ci = match classes.iter().position(|c| c == class) {
                Some(ci) => ci,
                None => {
                    classes.push(class.to_string());
                    classes.len() - 1
                }
            };
            labels[state] |= 1u64 << ci;
        }
    }
    let initial = initial.ok_or(ReadError::MissingInit)?;

    Ok(Ctmc {
        n_states,
        initial,
        transitions,
        classes,
        labels,
        state_keys: vec![Box::from([]); n_states],
        state_display: (0..n_states).map(|i| format!("s{i}")).collect(),
        fold_stats: ExploreStats::default(),
    })
}

/// Read `<base>.tra` and `<base>.lab` from disk.
pub fn read_explicit_files(base: &Path) -> Result<Ctmc, String> {
    let tra = base.with_extension("tra");
    let lab = base.with_extension("lab");
    let t = fs::read_to_string(&tra).map_err(|e| format!("cannot read {}: {e}", tra.display()))?;
    let l = fs::read_to_string(&lab).map_err(|e| format!("cannot read {}: {e}", lab.display()))?;
    read_explicit(&t, &l).map_err(|e| e.to_string())
}

/// Render the chain as a DOT digraph: states as nodes annotated with their
/// classes, edges annotated with rates, the initial state double-circled.
pub fn render_dot(ctmc: &Ctmc) -> String {
    let mut out = String::new();
    out.push_str("digraph ctmc {\n  rankdir=LR;\n  node [shape=ellipse];\n");
    for state in 0..ctmc.n_states {
        let mut label = format!("s{state}\\n{}", ctmc.display_state(state));
        let mask = ctmc.labels[state];
        if mask == 0 {
            label.push_str("\\noperational");
        } else {
            for (ci, class) in ctmc.classes.iter().enumerate() {
                if mask & (1u64 << ci) != 0 {
                    label.push_str("\\n");
                    label.push_str(class);
                }
            }
        }
        let peripheries = if state as u32 == ctmc.initial {
            ", peripheries=2"
        } else {
            ""
        };
        let _ = writeln!(out, "  s{state} [label=\"{label}\"{peripheries}];");
    }
    for t in &ctmc.transitions {
        let _ = writeln!(
            out,
            "  s{} -> s{} [label=\"{}\"];",
            t.source, t.target, t.rate
        );
    }
    out.push_str("}\n");
    out
}

pub fn write_dot(ctmc: &Ctmc, path: &Path) -> Result<PathBuf, ExportError> {
    let path = path.with_extension("dot");
    fs::write(&path, render_dot(ctmc)).map_err(|source| ExportError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}
