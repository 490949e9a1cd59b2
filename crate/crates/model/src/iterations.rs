//! Resolution of iteration deltas: the effective set of declarations at a
//! given construction iteration.
//!
//! Deltas are applied sequentially: for each iteration k = 1..=i, first all
//! additions of iteration k, then all removals of iteration k. A removal must
//! match a declaration that is present at that point, structurally and
//! exactly (name, shape, occurrence), or resolution fails.

use thiserror::Error;

use crate::ast::{DerivedClassDecl, Feature, GuardDecl, IterationTag, Polarity, TransitionDecl};
use crate::diag::SourceSpan;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum IterationError {
    #[error("remove delta at iteration {iteration} matches no prior declaration: {what}")]
    RemoveWithoutAdd {
        what: String,
        iteration: u32,
        span: SourceSpan,
    },
    #[error("iteration must be at least 1")]
    ZeroIteration,
}

impl IterationError {
    pub fn span(&self) -> SourceSpan {
        match self {
            IterationError::RemoveWithoutAdd { span, .. } => span.clone(),
            IterationError::ZeroIteration => SourceSpan::dummy(),
        }
    }
}

/// A declaration that carries an iteration tag and supports structural
/// matching for removals.
pub trait IterDecl: Clone {
    fn tag(&self) -> IterationTag;
    fn same_declaration(&self, other: &Self) -> bool;
    fn span(&self) -> &SourceSpan;
    fn describe(&self) -> String;
}

impl IterDecl for Feature {
    fn tag(&self) -> IterationTag {
        Feature::tag(self)
    }
    fn same_declaration(&self, other: &Self) -> bool {
        Feature::same_declaration(self, other)
    }
    fn span(&self) -> &SourceSpan {
        Feature::span(self)
    }
    fn describe(&self) -> String {
        match self {
            Feature::State(s) => format!("state {}", s.name),
            Feature::Event(e) => format!("event {}", e.name),
            Feature::Propagation(p) => format!("{} propagation {}", p.direction, p.name),
        }
    }
}

impl IterDecl for TransitionDecl {
    fn tag(&self) -> IterationTag {
        self.tag
    }
    fn same_declaration(&self, other: &Self) -> bool {
        TransitionDecl::same_declaration(self, other)
    }
    fn span(&self) -> &SourceSpan {
        &self.span
    }
    fn describe(&self) -> String {
        format!(
            "transition {} -[{}]-> {}",
            self.source, self.trigger, self.destination
        )
    }
}

impl IterDecl for GuardDecl {
    fn tag(&self) -> IterationTag {
        self.tag
    }
    fn same_declaration(&self, other: &Self) -> bool {
        GuardDecl::same_declaration(self, other)
    }
    fn span(&self) -> &SourceSpan {
        &self.span
    }
    fn describe(&self) -> String {
        format!("guard on port {}", self.port)
    }
}

impl IterDecl for DerivedClassDecl {
    fn tag(&self) -> IterationTag {
        self.tag
    }
    fn same_declaration(&self, other: &Self) -> bool {
        DerivedClassDecl::same_declaration(self, other)
    }
    fn span(&self) -> &SourceSpan {
        &self.span
    }
    fn describe(&self) -> String {
        format!("derived class {}", self.class)
    }
}

/// Effective declarations at `iteration`, applying add/remove deltas in
/// iteration order. Declaration order within each iteration is preserved.
pub fn apply_iterations<T: IterDecl>(
    decls: &[T],
    iteration: u32,
) -> Result<Vec<T>, IterationError> {
    if iteration == 0 {
        return Err(IterationError::ZeroIteration);
    }
    let mut effective: Vec<T> = Vec::new();
    for k in 1..=iteration {
        for d in decls.iter().filter(|d| d.tag().iteration == k) {
            match d.tag().polarity {
                Polarity::Add => effective.push(d.clone()),
                Polarity::Remove => {
                    let pos = effective.iter().position(|e| e.same_declaration(d));
                    match pos {
                        Some(p) => {
                            effective.remove(p);
                        }
                        None => {
                            return Err(IterationError::RemoveWithoutAdd {
                                what: d.describe(),
                                iteration: k,
                                span: d.span().clone(),
                            })
                        }
                    }
                }
            }
        }
    }
    Ok(effective)
}

/// Names introduced (added) only at iterations strictly greater than
/// `iteration`; used to report forward references precisely.
pub fn introduced_later<'a, T: IterDecl>(
    decls: &'a [T],
    iteration: u32,
    name_of: impl Fn(&'a T) -> &'a str + 'a,
) -> impl Iterator<Item = (&'a str, u32)> + 'a {
    decls.iter().filter_map(move |d| {
        let tag = d.tag();
        if tag.polarity == Polarity::Add && tag.iteration > iteration {
            Some((name_of(d), tag.iteration))
        } else {
            None
        }
    })
}
