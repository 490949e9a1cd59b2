//! Canonical resolved error models: the effective automaton template of an
//! error model type plus implementation at one construction iteration.
//!
//! Resolution canonicalizes declaration order (states, events and
//! propagations sorted by name; transitions sorted structurally) so that the
//! order in which declarations were written inside one iteration cannot
//! influence anything downstream.

use crate::ast::{
    ErrorModelImplementation, ErrorModelType, Feature, NumExpr, Occurrence, OccurrenceKind,
    PropDirection, TriggerSyntax,
};
use crate::diag::{Diagnostic, SourceSpan};
use crate::iterations::{apply_iterations, introduced_later, IterationError};

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedState {
    pub name: String,
    pub initial: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedEvent {
    pub name: String,
    pub occurrence: Option<(OccurrenceKind, NumExpr)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedProp {
    pub name: String,
    pub direction: PropDirection,
    pub occurrence: Option<(OccurrenceKind, NumExpr)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ResolvedTrigger {
    /// Index into `events`.
    Event(usize),
    /// Index into `propagations`; fires on reception.
    InProp(usize),
    /// Index into `propagations`; names an emission.
    OutProp(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedTransition {
    pub source: usize,
    pub trigger: ResolvedTrigger,
    pub destination: usize,
}

/// The effective automaton of `Type.impl` at one iteration, canonicalized.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedErrorModel {
    pub qualified_name: String,
    pub states: Vec<ResolvedState>,
    pub initial: usize,
    pub events: Vec<ResolvedEvent>,
    pub propagations: Vec<ResolvedProp>,
    pub transitions: Vec<ResolvedTransition>,
}

impl ResolvedErrorModel {
    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s.name == name)
    }

    pub fn prop_index(&self, name: &str) -> Option<usize> {
        self.propagations.iter().position(|p| p.name == name)
    }

    /// Propagations with out capability that appear as `out` triggers of at
    /// least one transition whose source and destination coincide; these make
    /// the propagation observable (for guard atoms) in that state.
    pub fn observable_states(&self, prop: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .transitions
            .iter()
            .filter(|t| t.trigger == ResolvedTrigger::OutProp(prop) && t.source == t.destination)
            .map(|t| t.source)
            .collect();
        out.dedup();
        out
    }
}

/// Resolve a type (and optionally its implementation) at `iteration`,
/// reporting every problem as a diagnostic. Returns `None` when an error
/// prevents building a coherent automaton.
pub fn resolve_error_model(
    ty: &ErrorModelType,
    imp: Option<&ErrorModelImplementation>,
    iteration: u32,
) -> (Option<ResolvedErrorModel>, Vec<Diagnostic>) {
    let mut diags = Vec::new();

    let features = match apply_iterations(&ty.features, iteration) {
        Ok(f) => f,
        Err(e) => {
            diags.push(iteration_error_diag(
                &e,
                &format!("error model type {}", ty.name),
            ));
            return (None, diags);
        }
    };

    // split and sort by name
    let mut states: Vec<ResolvedState> = Vec::new();
    let mut events: Vec<ResolvedEvent> = Vec::new();
    let mut props: Vec<ResolvedProp> = Vec::new();
    let mut seen_names: Vec<(&str, &SourceSpan)> = Vec::new();
    for f in &features {
        let name = f.name();
        if let Some((_, _first)) = seen_names.iter().find(|(n, _)| *n == name.as_str()) {
            diags.push(Diagnostic::error(
                format!(
                    "duplicate declaration of name {} in error model type {}",
                    name, ty.name
                ),
                name.span.clone(),
            ));
            continue;
        }
        seen_names.push((name.as_str(), &name.span));
        match f {
            Feature::State(s) => states.push(ResolvedState {
                name: s.name.text.clone(),
                initial: s.initial,
            }),
            Feature::Event(e) => {
                if let Some(occ) = &e.occurrence {
                    check_occurrence_literal(occ, &mut diags);
                    if occ.kind == OccurrenceKind::Fixed {
                        diags.push(Diagnostic::error(
                            format!(
                                "error event {} has a fixed occurrence; only Poisson occurrences are supported on events",
                                e.name
                            ),
                            occ.span.clone(),
                        ));
                    }
                }
                events.push(ResolvedEvent {
                    name: e.name.text.clone(),
                    occurrence: e.occurrence.as_ref().map(|o| (o.kind, o.value.clone())),
                });
            }
            Feature::Propagation(p) => {
                if let Some(occ) = &p.occurrence {
                    check_occurrence_literal(occ, &mut diags);
                    if occ.kind == OccurrenceKind::Poisson && p.direction.can_send() {
                        diags.push(Diagnostic::warning(
                            format!(
                                "out propagation {} has a Poisson occurrence (timed emission); this combination is untested by the reference models",
                                p.name
                            ),
                            occ.span.clone(),
                        ));
                    }
                }
                props.push(ResolvedProp {
                    name: p.name.text.clone(),
                    direction: p.direction,
                    occurrence: p.occurrence.as_ref().map(|o| (o.kind, o.value.clone())),
                });
            }
        }
    }
    states.sort_by(|a, b| a.name.cmp(&b.name));
    events.sort_by(|a, b| a.name.cmp(&b.name));
    props.sort_by(|a, b| a.name.cmp(&b.name));

    // exactly one initial state
    let initials: Vec<usize> = states
        .iter()
        .enumerate()
        .filter(|(_, s)| s.initial)
        .map(|(i, _)| i)
        .collect();
    match initials.len() {
        0 => diags.push(Diagnostic::error(
            format!("error model type {} has no initial error state", ty.name),
            ty.name.span.clone(),
        )),
        1 => {}
        _ => {
            let second = states[initials[1]].name.clone();
            let span = features
                .iter()
                .filter_map(|f| match f {
                    Feature::State(s) if s.initial && s.name.as_str() == second => {
                        Some(s.name.span.clone())
                    }
                    _ => None,
                })
                .next()
                .unwrap_or_else(|| ty.name.span.clone());
            diags.push(Diagnostic::error(
                format!("multiple initial states in error model type {}", ty.name),
                span,
            ));
        }
    }

    let mut model = ResolvedErrorModel {
        qualified_name: ty.name.text.clone(),
        states,
        initial: initials.first().copied().unwrap_or(0),
        events,
        propagations: props,
        transitions: Vec::new(),
    };

    if let Some(imp) = imp {
        model.qualified_name = imp.qualified_name();
        let transitions = match apply_iterations(&imp.transitions, iteration) {
            Ok(t) => t,
            Err(e) => {
                diags.push(iteration_error_diag(
                    &e,
                    &format!("error model implementation {}", imp.qualified_name()),
                ));
                return (None, diags);
            }
        };
        for tr in &transitions {
            let source = resolve_state_ref(&model, ty, iteration, &tr.source, &mut diags);
            let destination = resolve_state_ref(&model, ty, iteration, &tr.destination, &mut diags);
            let trigger = resolve_trigger(&model, ty, iteration, &tr.trigger, &mut diags);
            if let (Some(source), Some(destination), Some(trigger)) = (source, destination, trigger)
            {
                let resolved = ResolvedTransition {
                    source,
                    trigger,
                    destination,
                };
                if let Some(prev) = model
                    .transitions
                    .iter()
                    .find(|t| t.source == resolved.source && t.trigger == resolved.trigger)
                {
                    if prev.destination == resolved.destination {
                        diags.push(Diagnostic::warning(
                            format!(
                                "duplicate transition {} -[{}]-> {}",
                                tr.source, tr.trigger, tr.destination
                            ),
                            tr.span.clone(),
                        ));
                    } else {
                        diags.push(Diagnostic::error(
                            format!(
                                "nondeterministic transitions from state {} on trigger {}",
                                tr.source, tr.trigger
                            ),
                            tr.span.clone(),
                        ));
                    }
                    continue;
                }
                // dead-transition warnings: triggers that can never fire
                match trigger {
                    ResolvedTrigger::Event(e) if model.events[e].occurrence.is_none() => {
                        diags.push(Diagnostic::warning(
                            format!(
                                "event {} has no Occurrence property; transition {} -[{}]-> {} can never fire",
                                tr.trigger.name(),
                                tr.source,
                                tr.trigger,
                                tr.destination
                            ),
                            tr.span.clone(),
                        ));
                    }
                    ResolvedTrigger::OutProp(p)
                        if model.propagations[p].occurrence.is_none() && source != destination =>
                    {
                        // a self-loop without occurrence only declares observability
                        diags.push(Diagnostic::warning(
                            format!(
                                "out propagation {} has no Occurrence property; transition {} -[{}]-> {} can never fire",
                                tr.trigger.name(),
                                tr.source,
                                tr.trigger,
                                tr.destination
                            ),
                            tr.span.clone(),
                        ));
                    }
                    _ => {}
                }
                model.transitions.push(resolved);
            }
        }
        model
            .transitions
            .sort_by_key(|t| (t.source, t.trigger, t.destination));
    }

    if crate::diag::has_errors(&diags) {
        (None, diags)
    } else {
        (Some(model), diags)
    }
}

fn resolve_state_ref(
    model: &ResolvedErrorModel,
    ty: &ErrorModelType,
    iteration: u32,
    name: &crate::ast::Ident,
    diags: &mut Vec<Diagnostic>,
) -> Option<usize> {
    if let Some(i) = model.state_index(name.as_str()) {
        return Some(i);
    }
    if let Some((_, later)) = introduced_later(&ty.features, iteration, |f| f.name().as_str())
        .find(|(n, _)| *n == name.as_str())
    {
        diags.push(Diagnostic::error(
            format!(
                "state {} is declared at iteration {} but referenced at iteration {}",
                name, later, iteration
            ),
            name.span.clone(),
        ));
    } else {
        diags.push(Diagnostic::error(
            format!("unknown state {}", name),
            name.span.clone(),
        ));
    }
    None
}

fn resolve_trigger(
    model: &ResolvedErrorModel,
    ty: &ErrorModelType,
    iteration: u32,
    trigger: &TriggerSyntax,
    diags: &mut Vec<Diagnostic>,
) -> Option<ResolvedTrigger> {
    let name = trigger.name();
    let event = model.events.iter().position(|e| e.name == name.as_str());
    let prop = model.prop_index(name.as_str());
    let report_unknown = |diags: &mut Vec<Diagnostic>| {
        if let Some((_, later)) = introduced_later(&ty.features, iteration, |f| f.name().as_str())
            .find(|(n, _)| *n == name.as_str())
        {
            diags.push(Diagnostic::error(
                format!(
                    "trigger {} is declared at iteration {} but referenced at iteration {}",
                    name, later, iteration
                ),
                name.span.clone(),
            ));
        } else {
            diags.push(Diagnostic::error(
                format!("unknown event or propagation {}", name),
                name.span.clone(),
            ));
        }
    };
    match trigger {
        TriggerSyntax::Bare(_) => {
            if let Some(e) = event {
                return Some(ResolvedTrigger::Event(e));
            }
            match prop {
                Some(p) => match model.propagations[p].direction {
                    PropDirection::In => Some(ResolvedTrigger::InProp(p)),
                    PropDirection::Out => Some(ResolvedTrigger::OutProp(p)),
                    PropDirection::InOut => {
                        diags.push(Diagnostic::error(
                            format!(
                                "trigger {} is an in out propagation; write 'in {}' or 'out {}'",
                                name, name, name
                            ),
                            name.span.clone(),
                        ));
                        None
                    }
                },
                None => {
                    report_unknown(diags);
                    None
                }
            }
        }
        TriggerSyntax::In(_) => match prop {
            Some(p) if model.propagations[p].direction.can_receive() => {
                Some(ResolvedTrigger::InProp(p))
            }
            Some(p) => {
                diags.push(Diagnostic::error(
                    format!(
                        "propagation {} is declared {}; it cannot be received",
                        name, model.propagations[p].direction
                    ),
                    name.span.clone(),
                ));
                None
            }
            None => {
                report_unknown(diags);
                None
            }
        },
        TriggerSyntax::Out(_) => match prop {
            Some(p) if model.propagations[p].direction.can_send() => {
                Some(ResolvedTrigger::OutProp(p))
            }
            Some(p) => {
                diags.push(Diagnostic::error(
                    format!(
                        "propagation {} is declared {}; it cannot be emitted",
                        name, model.propagations[p].direction
                    ),
                    name.span.clone(),
                ));
                None
            }
            None => {
                report_unknown(diags);
                None
            }
        },
    }
}

fn check_occurrence_literal(occ: &Occurrence, diags: &mut Vec<Diagnostic>) {
    if let NumExpr::Literal(v) = &occ.value {
        match occ.kind {
            OccurrenceKind::Poisson => {
                if *v <= 0.0 || !v.is_finite() {
                    diags.push(Diagnostic::error(
                        format!("Poisson occurrence rate must be positive, got {}", v),
                        occ.span.clone(),
                    ));
                }
            }
            OccurrenceKind::Fixed => {
                if !(*v > 0.0 && *v <= 1.0) {
                    diags.push(Diagnostic::error(
                        format!("fixed occurrence probability must be in (0,1], got {}", v),
                        occ.span.clone(),
                    ));
                }
            }
        }
    }
}

fn iteration_error_diag(e: &IterationError, context: &str) -> Diagnostic {
    Diagnostic::error(format!("{e} (in {context})"), e.span())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{EventDecl, Ident, IterationTag, Polarity, StateDecl, TransitionDecl};
    use crate::diag::has_errors;

    fn tagged(iteration: u32, polarity: Polarity) -> IterationTag {
        IterationTag {
            iteration,
            polarity,
        }
    }

    fn simple_type() -> ErrorModelType {
        ErrorModelType {
            name: Ident::synthetic("simple"),
            features: vec![
                Feature::State(StateDecl {
                    name: Ident::synthetic("Error_Free"),
                    initial: true,
                    tag: IterationTag::default(),
                    span: SourceSpan::dummy(),
                }),
                Feature::State(StateDecl {
                    name: Ident::synthetic("Failed"),
                    initial: false,
                    tag: IterationTag::default(),
                    span: SourceSpan::dummy(),
                }),
                Feature::Event(EventDecl {
                    name: Ident::synthetic("Fail"),
                    occurrence: Some(Occurrence {
                        kind: OccurrenceKind::Poisson,
                        value: NumExpr::Param(Ident::synthetic("lambda")),
                        span: SourceSpan::dummy(),
                    }),
                    tag: IterationTag::default(),
                    span: SourceSpan::dummy(),
                }),
                Feature::Propagation(crate::ast::PropDecl {
                    name: Ident::synthetic("KO"),
                    direction: PropDirection::InOut,
                    occurrence: Some(Occurrence {
                        kind: OccurrenceKind::Fixed,
                        value: NumExpr::Param(Ident::synthetic("p")),
                        span: SourceSpan::dummy(),
                    }),
                    tag: IterationTag::default(),
                    span: SourceSpan::dummy(),
                }),
            ],
            span: SourceSpan::dummy(),
        }
    }

    fn simple_impl() -> ErrorModelImplementation {
        let t = |src: &str, trig: TriggerSyntax, dst: &str| TransitionDecl {
            source: Ident::synthetic(src),
            trigger: trig,
            destination: Ident::synthetic(dst),
            tag: IterationTag::default(),
            span: SourceSpan::dummy(),
        };
        ErrorModelImplementation {
            type_name: Ident::synthetic("simple"),
            impl_name: Ident::synthetic("general"),
            transitions: vec![
                t(
                    "Error_Free",
                    TriggerSyntax::Bare(Ident::synthetic("Fail")),
                    "Failed",
                ),
                t(
                    "Error_Free",
                    TriggerSyntax::In(Ident::synthetic("KO")),
                    "Failed",
                ),
                t(
                    "Failed",
                    TriggerSyntax::Out(Ident::synthetic("KO")),
                    "Failed",
                ),
            ],
            span: SourceSpan::dummy(),
        }
    }

    #[test]
    fn resolves_and_canonicalizes() {
        let (model, diags) = resolve_error_model(&simple_type(), Some(&simple_impl()), 1);
        assert!(!has_errors(&diags), "{diags:?}");
        let model = model.unwrap();
        assert_eq!(model.states.len(), 2);
        // canonical order sorts Error_Free before Failed
        assert_eq!(model.states[0].name, "Error_Free");
        assert_eq!(model.initial, 0);
        assert_eq!(model.transitions.len(), 3);
    }

    #[test]
    fn unknown_destination_reported() {
        let mut imp = simple_impl();
        imp.transitions[0].destination = Ident::synthetic("B");
        let (model, diags) = resolve_error_model(&simple_type(), Some(&imp), 1);
        assert!(model.is_none());
        assert!(diags
            .iter()
            .any(|d| d.is_error() && d.message.contains("unknown state B")));
    }

    #[test]
    fn bare_trigger_on_in_out_prop_is_ambiguous() {
        let mut imp = simple_impl();
        imp.transitions[1].trigger = TriggerSyntax::Bare(Ident::synthetic("KO"));
        let (_, diags) = resolve_error_model(&simple_type(), Some(&imp), 1);
        assert!(diags
            .iter()
            .any(|d| d.message.contains("in out propagation")));
    }

    #[test]
    fn forward_reference_names_the_later_iteration() {
        let mut ty = simple_type();
        for f in &mut ty.features {
            if f.name().as_str() == "Failed" {
                f.set_tag(tagged(3, Polarity::Add));
            }
        }
        let (_, diags) = resolve_error_model(&ty, Some(&simple_impl()), 1);
        assert!(
            diags
                .iter()
                .any(|d| d.message.contains("declared at iteration 3")),
            "{diags:?}"
        );
    }

    #[test]
    fn nondeterminism_is_an_error() {
        let mut imp = simple_impl();
        imp.transitions.push(TransitionDecl {
            source: Ident::synthetic("Error_Free"),
            trigger: TriggerSyntax::Bare(Ident::synthetic("Fail")),
            destination: Ident::synthetic("Error_Free"),
            tag: IterationTag::default(),
            span: SourceSpan::dummy(),
        });
        let (_, diags) = resolve_error_model(&simple_type(), Some(&imp), 1);
        assert!(diags
            .iter()
            .any(|d| d.is_error() && d.message.contains("nondeterministic")));
    }

    #[test]
    fn observability_uses_self_loops_only() {
        let ty = simple_type();
        let mut imp = simple_impl();
        // add a non-self-loop out transition; must not make KO observable in Error_Free
        imp.transitions.push(TransitionDecl {
            source: Ident::synthetic("Error_Free"),
            trigger: TriggerSyntax::Out(Ident::synthetic("KO")),
            destination: Ident::synthetic("Failed"),
            tag: IterationTag::default(),
            span: SourceSpan::dummy(),
        });
        let (model, diags) = resolve_error_model(&ty, Some(&imp), 1);
        assert!(!has_errors(&diags), "{diags:?}");
        let model = model.unwrap();
        let ko = model.prop_index("KO").unwrap();
        let failed = model.state_index("Failed").unwrap();
        assert_eq!(model.observable_states(ko), vec![failed]);
    }
}
