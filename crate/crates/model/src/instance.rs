//! Instance resolution and binding.
//!
//! [`instantiate`] turns a validated model into an [`InstanceModel`]: one
//! resolved automaton per error-bound component (black-box abstraction
//! applied), a propagation routing table derived from the connections, and
//! guards plus derived state classes resolved against the bound automata.
//! [`InstanceModel::bind`] then produces a [`BoundInstance`] with all
//! occurrence parameters evaluated, compiled for state-space exploration and
//! simulation.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::ast::{BoolExpr, Component, Ident, Model, NumExpr, OccurrenceKind, PortDirection};
use crate::diag::{Diagnostic, SourceSpan};
use crate::iterations::apply_iterations;
use crate::params::ParamEnv;
use crate::resolved::{resolve_error_model, ResolvedErrorModel, ResolvedTrigger};
use crate::validate::validate_model;

#[derive(Debug, Clone, Error)]
pub enum InstanceError {
    #[error("model has validation errors; run validate for details")]
    Invalid { diagnostics: Vec<Diagnostic> },
    #[error("no component has an associated error model")]
    NoErrorModels,
    #[error("unknown error model {name} bound to component {component}")]
    UnknownErrorModel {
        name: String,
        component: String,
        span: SourceSpan,
    },
    #[error("guard atom {atom} on component {component} cannot be resolved: {reason}")]
    GuardAtomUnresolvable {
        atom: String,
        component: String,
        reason: String,
        span: SourceSpan,
    },
    #[error("derived class atom {atom} on component {component} cannot be resolved: {reason}")]
    DerivedAtomUnresolvable {
        atom: String,
        component: String,
        reason: String,
        span: SourceSpan,
    },
    #[error("architecture has no root component")]
    NoRoot,
}

impl InstanceError {
    /// All errors rendered as diagnostics, for uniform reporting.
    pub fn to_diagnostics(&self) -> Vec<Diagnostic> {
        match self {
            InstanceError::Invalid { diagnostics } => diagnostics.clone(),
            InstanceError::UnknownErrorModel { span, .. }
            | InstanceError::GuardAtomUnresolvable { span, .. }
            | InstanceError::DerivedAtomUnresolvable { span, .. } => {
                vec![Diagnostic::error(self.to_string(), span.clone())]
            }
            _ => vec![Diagnostic::error(self.to_string(), SourceSpan::dummy())],
        }
    }
}

/// Boolean expression with resolved atoms.
#[derive(Debug, Clone, PartialEq)]
pub enum ResolvedExpr<A> {
    Or(Box<ResolvedExpr<A>>, Box<ResolvedExpr<A>>),
    And(Box<ResolvedExpr<A>>, Box<ResolvedExpr<A>>),
    Not(Box<ResolvedExpr<A>>),
    Atom(A),
}

impl<A> ResolvedExpr<A> {
    pub fn eval(&self, atom: &impl Fn(&A) -> bool) -> bool {
        match self {
            ResolvedExpr::Or(a, b) => a.eval(atom) || b.eval(atom),
            ResolvedExpr::And(a, b) => a.eval(atom) && b.eval(atom),
            ResolvedExpr::Not(a) => !a.eval(atom),
            ResolvedExpr::Atom(a) => atom(a),
        }
    }
}

/// Guard atom: the sender automaton and the propagation (index into the
/// sender's propagation list) whose observability is tested.
#[derive(Debug, Clone, PartialEq)]
pub struct GuardAtom {
    pub automaton: usize,
    pub prop: usize,
}

/// Derived-class atom: an automaton in a given local state.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassAtom {
    pub automaton: usize,
    pub state: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedGuardClause {
    pub emit: String,
    pub condition: ResolvedExpr<GuardAtom>,
    /// Automata reachable through the guarded port that can receive `emit`.
    pub receivers: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedGuard {
    pub component: String,
    pub port: String,
    pub clauses: Vec<ResolvedGuardClause>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedClass {
    pub name: String,
    pub condition: ResolvedExpr<ClassAtom>,
}

/// One receiver of a routed propagation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RouteEnd {
    pub component: String,
    pub propagation: String,
}

/// All receivers of one (sender, out propagation) pair. A route with no
/// receivers is retained and marked inactive.
#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    pub sender: String,
    pub propagation: String,
    pub receivers: Vec<RouteEnd>,
}

impl Route {
    pub fn is_active(&self) -> bool {
        !self.receivers.is_empty()
    }
}

/// Name-level propagation routing, sorted by (sender component path,
/// propagation name).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RoutingTable {
    pub routes: Vec<Route>,
}

impl RoutingTable {
    pub fn find(&self, sender: &str, propagation: &str) -> Option<&Route> {
        self.routes
            .iter()
            .find(|r| r.sender == sender && r.propagation == propagation)
    }
}

/// A bound component with its resolved automaton.
#[derive(Debug, Clone, PartialEq)]
pub struct AutomatonInstance {
    /// Dotted component path from the root.
    pub component: String,
    pub model: ResolvedErrorModel,
}

/// The fully resolved instance: automata in canonical component order,
/// routing, guards and derived classes, with instantiation notes.
#[derive(Debug, Clone)]
pub struct InstanceModel {
    pub iteration: u32,
    pub automata: Vec<AutomatonInstance>,
    pub routing: RoutingTable,
    pub guards: Vec<ResolvedGuard>,
    pub classes: Vec<ResolvedClass>,
    pub diagnostics: Vec<Diagnostic>,
}

impl InstanceModel {
    pub fn automaton_index(&self, component: &str) -> Option<usize> {
        self.automata.iter().position(|a| a.component == component)
    }
}

struct ActiveComponent<'a> {
    path: String,
    component: &'a Component,
}

/// Resolve a model at the given construction iteration.
pub fn instantiate(model: &Model, iteration: u32) -> Result<InstanceModel, InstanceError> {
    let validation = validate_model(model);
    if crate::diag::has_errors(&validation) {
        return Err(InstanceError::Invalid {
            diagnostics: validation,
        });
    }
    let mut diagnostics: Vec<Diagnostic> = validation; // keep warnings/infos

    let root = model.root().ok_or(InstanceError::NoErrorModels)?;

    // walk the tree, stopping at black boxes
    let mut active: Vec<ActiveComponent> = Vec::new();
    collect_active(root, root.name.text.clone(), &mut active, &mut diagnostics);

    // bound automata in canonical (path) order
    let mut bound: Vec<(String, &Component)> = active
        .iter()
        .filter(|a| a.component.error_binding.is_some())
        .map(|a| (a.path.clone(), a.component))
        .collect();
    bound.sort_by(|a, b| a.0.cmp(&b.0));
    if bound.is_empty() {
        return Err(InstanceError::NoErrorModels);
    }

    let mut automata = Vec::with_capacity(bound.len());
    for (path, comp) in &bound {
        let binding = comp.error_binding.as_ref().expect("bound component");
        let ty = model
            .library
            .find_type(binding.type_name.as_str())
            .ok_or_else(|| InstanceError::UnknownErrorModel {
                name: binding.qualified_name(),
                component: path.clone(),
                span: binding.span.clone(),
            })?;
        let imp = model
            .library
            .find_implementation(binding.type_name.as_str(), binding.impl_name.as_str())
            .ok_or_else(|| InstanceError::UnknownErrorModel {
                name: binding.qualified_name(),
                component: path.clone(),
                span: binding.span.clone(),
            })?;
        let (resolved, mut diags) = resolve_error_model(ty, Some(imp), iteration);
        let had_errors = crate::diag::has_errors(&diags);
        diagnostics.append(&mut diags);
        match resolved {
            Some(m) => automata.push(AutomatonInstance {
                component: path.clone(),
                model: m,
            }),
            None => {
                debug_assert!(had_errors);
                return Err(InstanceError::Invalid { diagnostics });
            }
        }
    }
    let automaton_index: BTreeMap<String, usize> = automata
        .iter()
        .enumerate()
        .map(|(i, a)| (a.component.clone(), i))
        .collect();

    // connection endpoints resolved to component paths, restricted to the
    // active (non-suppressed) part of the tree
    let mut links: Vec<(String, String)> = Vec::new(); // (src component path, dst component path)
    let mut port_links: Vec<(String, String, String, String)> = Vec::new(); // (src path, src port, dst path, dst port)
    for ac in &active {
        for conn in &ac.component.connections {
            let src = endpoint_path(&ac.path, ac.component, &conn.source);
            let dst = endpoint_path(&ac.path, ac.component, &conn.destination);
            if let (Some(src), Some(dst)) = (src, dst) {
                links.push((src.0.clone(), dst.0.clone()));
                port_links.push((src.0, src.1, dst.0, dst.1));
            }
        }
    }

    // routing: same-name matching across connections
    let mut routes = Vec::new();
    for (ai, a) in automata.iter().enumerate() {
        for prop in &a.model.propagations {
            if !prop.direction.can_send() {
                continue;
            }
            let mut receivers: BTreeSet<RouteEnd> = BTreeSet::new();
            for (src, dst) in &links {
                if src != &a.component {
                    continue;
                }
                if let Some(&ri) = automaton_index.get(dst) {
                    if ri == ai {
                        continue;
                    }
                    if automata[ri]
                        .model
                        .propagations
                        .iter()
                        .any(|p| p.name == prop.name && p.direction.can_receive())
                    {
                        receivers.insert(RouteEnd {
                            component: dst.clone(),
                            propagation: prop.name.clone(),
                        });
                    }
                }
            }
            routes.push(Route {
                sender: a.component.clone(),
                propagation: prop.name.clone(),
                receivers: receivers.into_iter().collect(),
            });
        }
    }
    routes.sort_by(|a, b| {
        (a.sender.as_str(), a.propagation.as_str())
            .cmp(&(b.sender.as_str(), b.propagation.as_str()))
    });
    let routing = RoutingTable { routes };

    // guards
    let mut guards = Vec::new();
    for ac in &active {
        let effective = apply_iterations(&ac.component.guards, iteration).map_err(|e| {
            InstanceError::Invalid {
                diagnostics: vec![Diagnostic::error(e.to_string(), e.span())],
            }
        })?;
        for g in &effective {
            let mut clauses = Vec::new();
            for clause in &g.clauses {
                let condition = resolve_guard_expr(
                    &clause.condition,
                    ac,
                    &automata,
                    &automaton_index,
                    &port_links,
                )?;
                // receivers of the emitted propagation through the guarded port
                let mut receivers: BTreeSet<usize> = BTreeSet::new();
                for (sp, sport, dp, _dport) in &port_links {
                    if sp == &ac.path && sport == g.port.as_str() {
                        if let Some(&ri) = automaton_index.get(dp) {
                            if automata[ri].model.propagations.iter().any(|p| {
                                p.name == clause.emit.as_str() && p.direction.can_receive()
                            }) {
                                receivers.insert(ri);
                            }
                        }
                    }
                }
                if let Some(&gi) = automaton_index.get(&ac.path) {
                    let owner = &automata[gi].model;
                    if !owner
                        .propagations
                        .iter()
                        .any(|p| p.name == clause.emit.as_str() && p.direction.can_send())
                    {
                        diagnostics.push(Diagnostic::warning(
                            format!(
                                "guard on {} emits {} which is not declared as an out propagation of its error model",
                                ac.path, clause.emit
                            ),
                            g.span.clone(),
                        ));
                    }
                }
                clauses.push(ResolvedGuardClause {
                    emit: clause.emit.text.clone(),
                    condition,
                    receivers: receivers.into_iter().collect(),
                });
            }
            guards.push(ResolvedGuard {
                component: ac.path.clone(),
                port: g.port.text.clone(),
                clauses,
            });
        }
    }
    guards.sort_by(|a, b| {
        (a.component.as_str(), a.port.as_str()).cmp(&(b.component.as_str(), b.port.as_str()))
    });

    // derived classes
    let mut classes = Vec::new();
    for ac in &active {
        let effective = apply_iterations(&ac.component.derived, iteration).map_err(|e| {
            InstanceError::Invalid {
                diagnostics: vec![Diagnostic::error(e.to_string(), e.span())],
            }
        })?;
        for d in &effective {
            let condition = resolve_class_expr(&d.condition, ac, &automata, &automaton_index)?;
            classes.push(ResolvedClass {
                name: d.class.text.clone(),
                condition,
            });
        }
    }

    // in-propagation transitions that nothing can feed
    for (ai, a) in automata.iter().enumerate() {
        for t in &a.model.transitions {
            if let ResolvedTrigger::InProp(p) = t.trigger {
                let prop_name = &a.model.propagations[p].name;
                let fed_by_route = routing.routes.iter().any(|r| {
                    r.receivers
                        .iter()
                        .any(|e| e.component == a.component && &e.propagation == prop_name)
                });
                let fed_by_guard = guards.iter().any(|g| {
                    g.clauses
                        .iter()
                        .any(|c| &c.emit == prop_name && c.receivers.contains(&ai))
                });
                if !fed_by_route && !fed_by_guard {
                    diagnostics.push(Diagnostic::warning(format!(
                        "in propagation {} of {} is unreachable: no connection or guard feeds it, transition {} -[in {}]-> {} can never fire",
                        prop_name,
                        a.component,
                        a.model.states[t.source].name,
                        prop_name,
                        a.model.states[t.destination].name,
                    ), SourceSpan::dummy()));
                }
            }
        }
    }

    Ok(InstanceModel {
        iteration,
        automata,
        routing,
        guards,
        classes,
        diagnostics,
    })
}

fn collect_active<'a>(
    comp: &'a Component,
    path: String,
    active: &mut Vec<ActiveComponent<'a>>,
    diagnostics: &mut Vec<Diagnostic>,
) {
    let is_black_box = comp.error_binding.is_some() && !comp.subcomponents.is_empty();
    if is_black_box {
        let suppressed = comp
            .walk()
            .skip(1)
            .filter(|c| c.error_binding.is_some())
            .count();
        if suppressed > 0 {
            diagnostics.push(Diagnostic::info(
                format!(
                    "component {} is abstracted as a black box; {} subcomponent error model binding(s) ignored",
                    path, suppressed
                ),
                comp.name.span.clone(),
            ));
        }
        active.push(ActiveComponent {
            path,
            component: comp,
        });
        return;
    }
    let here = path.clone();
    active.push(ActiveComponent {
        path,
        component: comp,
    });
    for sub in &comp.subcomponents {
        collect_active(sub, format!("{}.{}", here, sub.name), active, diagnostics);
    }
}

/// Resolve a connection endpoint declared in `owner` to the full component
/// path and port name. Validation already guaranteed resolvability.
fn endpoint_path(
    owner_path: &str,
    owner: &Component,
    path: &crate::ast::PortPath,
) -> Option<(String, String)> {
    let mut comp = owner;
    let mut full = owner_path.to_string();
    for seg in path.component_segments() {
        comp = comp.find_subcomponent(seg.as_str())?;
        full.push('.');
        full.push_str(seg.as_str());
    }
    comp.find_port(path.port_name().as_str())?;
    Some((full, path.port_name().text.clone()))
}

fn resolve_guard_expr(
    expr: &BoolExpr,
    owner: &ActiveComponent<'_>,
    automata: &[AutomatonInstance],
    automaton_index: &BTreeMap<String, usize>,
    port_links: &[(String, String, String, String)],
) -> Result<ResolvedExpr<GuardAtom>, InstanceError> {
    match expr {
        BoolExpr::Or(a, b) => Ok(ResolvedExpr::Or(
            Box::new(resolve_guard_expr(
                a,
                owner,
                automata,
                automaton_index,
                port_links,
            )?),
            Box::new(resolve_guard_expr(
                b,
                owner,
                automata,
                automaton_index,
                port_links,
            )?),
        )),
        BoolExpr::And(a, b) => Ok(ResolvedExpr::And(
            Box::new(resolve_guard_expr(
                a,
                owner,
                automata,
                automaton_index,
                port_links,
            )?),
            Box::new(resolve_guard_expr(
                b,
                owner,
                automata,
                automaton_index,
                port_links,
            )?),
        )),
        BoolExpr::Not(a) => Ok(ResolvedExpr::Not(Box::new(resolve_guard_expr(
            a,
            owner,
            automata,
            automaton_index,
            port_links,
        )?))),
        BoolExpr::Atom { subject, item } => {
            let atom_text = render_atom(subject, item);
            let err = |reason: &str, span: &SourceSpan| InstanceError::GuardAtomUnresolvable {
                atom: atom_text.clone(),
                component: owner.path.clone(),
                reason: reason.to_string(),
                span: span.clone(),
            };
            if subject.len() != 1 {
                return Err(err(
                    "guard atoms must name an in port of the owning component",
                    &item.span,
                ));
            }
            let port = &subject[0];
            match owner.component.find_port(port.as_str()) {
                Some(p) if p.direction == PortDirection::In => {}
                Some(_) => return Err(err("port is not an in port", &port.span)),
                None => return Err(err("unknown port", &port.span)),
            }
            // senders connected into this port that declare the propagation
            let mut senders: Vec<(usize, usize)> = Vec::new();
            for (sp, _sport, dp, dport) in port_links {
                if dp == &owner.path && dport == port.as_str() {
                    if let Some(&si) = automaton_index.get(sp) {
                        if let Some(pi) = automata[si]
                            .model
                            .propagations
                            .iter()
                            .position(|pr| pr.name == item.as_str() && pr.direction.can_send())
                        {
                            if !senders.contains(&(si, pi)) {
                                senders.push((si, pi));
                            }
                        }
                    }
                }
            }
            match senders.len() {
                0 => Err(err(
                    "no connected sender declares this out propagation",
                    &item.span,
                )),
                1 => Ok(ResolvedExpr::Atom(GuardAtom {
                    automaton: senders[0].0,
                    prop: senders[0].1,
                })),
                _ => Err(err(
                    "several connected senders declare this out propagation",
                    &item.span,
                )),
            }
        }
    }
}

fn resolve_class_expr(
    expr: &BoolExpr,
    owner: &ActiveComponent<'_>,
    automata: &[AutomatonInstance],
    automaton_index: &BTreeMap<String, usize>,
) -> Result<ResolvedExpr<ClassAtom>, InstanceError> {
    match expr {
        BoolExpr::Or(a, b) => Ok(ResolvedExpr::Or(
            Box::new(resolve_class_expr(a, owner, automata, automaton_index)?),
            Box::new(resolve_class_expr(b, owner, automata, automaton_index)?),
        )),
        BoolExpr::And(a, b) => Ok(ResolvedExpr::And(
            Box::new(resolve_class_expr(a, owner, automata, automaton_index)?),
            Box::new(resolve_class_expr(b, owner, automata, automaton_index)?),
        )),
        BoolExpr::Not(a) => Ok(ResolvedExpr::Not(Box::new(resolve_class_expr(
            a,
            owner,
            automata,
            automaton_index,
        )?))),
        BoolExpr::Atom { subject, item } => {
            let atom_text = render_atom(subject, item);
            let err = |reason: &str, span: &SourceSpan| InstanceError::DerivedAtomUnresolvable {
                atom: atom_text.clone(),
                component: owner.path.clone(),
                reason: reason.to_string(),
                span: span.clone(),
            };
            let mut path = owner.path.clone();
            for seg in subject {
                path.push('.');
                path.push_str(seg.as_str());
            }
            let ai = *automaton_index.get(&path).ok_or_else(|| {
                err(
                    "no error model bound to this subcomponent",
                    &subject[0].span,
                )
            })?;
            let state = automata[ai]
                .model
                .state_index(item.as_str())
                .ok_or_else(|| {
                    err(
                        "no such error state in the subcomponent's model",
                        &item.span,
                    )
                })?;
            Ok(ResolvedExpr::Atom(ClassAtom {
                automaton: ai,
                state,
            }))
        }
    }
}

fn render_atom(subject: &[Ident], item: &Ident) -> String {
    let path: Vec<&str> = subject.iter().map(|s| s.as_str()).collect();
    format!("{}[{}]", path.join("."), item)
}

// ---------------------------------------------------------------------------
// bound (parameter-evaluated) form
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Error, PartialEq)]
pub enum BindError {
    #[error("unbound parameter {name} ({context})")]
    UnboundParameter { name: String, context: String },
    #[error("invalid rate {value} ({context}); rates must be finite and nonnegative")]
    InvalidRate { value: f64, context: String },
    #[error("invalid probability {value} ({context}); probabilities must be within [0,1]")]
    InvalidProbability { value: f64, context: String },
}

/// One exponential transition candidate of a local state.
#[derive(Debug, Clone, PartialEq)]
pub struct TimedFiring {
    pub rate: f64,
    pub destination: u16,
    /// Propagation emitted on firing (Poisson-occurrence out propagation).
    pub emits: Option<u32>,
    /// Trigger name, for reporting.
    pub label: String,
}

/// A fixed-occurrence emission evaluated when the state is entered.
#[derive(Debug, Clone, PartialEq)]
pub struct EntryEmission {
    pub prop: u32,
    pub probability: f64,
    pub destination: u16,
}

#[derive(Debug, Clone)]
pub struct BoundAutomaton {
    pub component: String,
    pub model_name: String,
    pub state_names: Vec<String>,
    pub initial: u16,
    /// Per-state exponential firing candidates, in canonical order.
    pub timed: Vec<Vec<TimedFiring>>,
    /// Per-state entry emissions (only those with active routes and p > 0).
    pub entry: Vec<Vec<EntryEmission>>,
    /// (state, propagation) -> destination for in-propagation receptions.
    pub receptions: HashMap<(u16, u32), u16>,
    /// propagation -> per-state observability (self-loop out transitions).
    pub observable: HashMap<u32, Vec<bool>>,
}

impl BoundAutomaton {
    pub fn reception(&self, state: u16, prop: u32) -> Option<u16> {
        self.receptions.get(&(state, prop)).copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundGuardAtom {
    pub automaton: u32,
    /// Per-state observability of the tested propagation in the sender.
    pub observable: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundGuardClause {
    pub emit: u32,
    pub condition: ResolvedExpr<BoundGuardAtom>,
    pub receivers: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundGuard {
    pub component: String,
    pub port: String,
    pub clauses: Vec<BoundGuardClause>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundClassAtom {
    pub automaton: u32,
    pub state: u16,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundClass {
    pub name: u32,
    pub condition: ResolvedExpr<BoundClassAtom>,
}

/// Execution-ready instance: rates evaluated, names interned, per-state
/// tables compiled. Immutable and safe to share across threads.
#[derive(Debug, Clone)]
pub struct BoundInstance {
    pub automata: Vec<BoundAutomaton>,
    /// Interned propagation names (instance-wide ids).
    pub prop_names: Vec<String>,
    /// `[automaton][prop id] -> receiver automata` in canonical order.
    pub routes: Vec<Vec<Vec<u32>>>,
    pub guards: Vec<BoundGuard>,
    pub classes: Vec<BoundClass>,
    pub class_names: Vec<String>,
}

impl BoundInstance {
    pub fn n_automata(&self) -> usize {
        self.automata.len()
    }

    pub fn initial_config(&self) -> Vec<u16> {
        self.automata.iter().map(|a| a.initial).collect()
    }

    pub fn prop_id(&self, name: &str) -> Option<u32> {
        self.prop_names
            .iter()
            .position(|p| p == name)
            .map(|i| i as u32)
    }

    pub fn receivers(&self, automaton: usize, prop: u32) -> &[u32] {
        &self.routes[automaton][prop as usize]
    }

    /// `(State1,State2,...)` rendering of a configuration.
    pub fn display_config(&self, config: &[u16]) -> String {
        let names: Vec<&str> = config
            .iter()
            .zip(&self.automata)
            .map(|(&s, a)| a.state_names[s as usize].as_str())
            .collect();
        format!("({})", names.join(","))
    }

    /// Class names holding in a configuration, in declaration order.
    pub fn classes_of(&self, config: &[u16]) -> Vec<u32> {
        let mut out = Vec::new();
        for class in &self.classes {
            let holds = class
                .condition
                .eval(&|a: &BoundClassAtom| config[a.automaton as usize] == a.state);
            if holds && !out.contains(&class.name) {
                out.push(class.name);
            }
        }
        out
    }
}

impl InstanceModel {
    /// Evaluate all occurrence parameters and compile the execution tables.
    pub fn bind(&self, params: &ParamEnv) -> Result<BoundInstance, BindError> {
        // intern propagation names
        let mut prop_set: BTreeSet<&str> = BTreeSet::new();
        for a in &self.automata {
            for p in &a.model.propagations {
                prop_set.insert(&p.name);
            }
        }
        let prop_names: Vec<String> = prop_set.iter().map(|s| s.to_string()).collect();
        let prop_id = |name: &str| -> u32 {
            prop_names
                .iter()
                .position(|p| p == name)
                .expect("interned propagation") as u32
        };

        // name-level routing compiled to ids
        let mut routes: Vec<Vec<Vec<u32>>> =
            vec![vec![Vec::new(); prop_names.len()]; self.automata.len()];
        for route in &self.routing.routes {
            let si = self
                .automaton_index(&route.sender)
                .expect("sender automaton");
            let pid = prop_id(&route.propagation);
            let mut receivers: Vec<u32> = route
                .receivers
                .iter()
                .map(|e| {
                    self.automaton_index(&e.component)
                        .expect("receiver automaton") as u32
                })
                .collect();
            receivers.sort_unstable();
            receivers.dedup();
            routes[si][pid as usize] = receivers;
        }

        let eval_value = |value: &NumExpr, context: &str| -> Result<f64, BindError> {
            match value {
                NumExpr::Literal(v) => Ok(*v),
                NumExpr::Param(p) => {
                    params
                        .get(p.as_str())
                        .ok_or_else(|| BindError::UnboundParameter {
                            name: p.text.clone(),
                            context: context.to_string(),
                        })
                }
            }
        };

        let mut automata = Vec::with_capacity(self.automata.len());
        for (ai, inst) in self.automata.iter().enumerate() {
            let m = &inst.model;
            let n_states = m.states.len();
            let mut timed: Vec<Vec<TimedFiring>> = vec![Vec::new(); n_states];
            let mut entry: Vec<Vec<EntryEmission>> = vec![Vec::new(); n_states];
            let mut receptions = HashMap::new();
            for t in &m.transitions {
                match t.trigger {
                    ResolvedTrigger::Event(e) => {
                        let ev = &m.events[e];
                        if let Some((OccurrenceKind::Poisson, value)) =
                            &ev.occurrence.as_ref().map(|(k, v)| (*k, v))
                        {
                            let context =
                                format!("Occurrence of event {} in {}", ev.name, m.qualified_name);
                            let rate = eval_value(value, &context)?;
                            if !rate.is_finite() || rate < 0.0 {
                                return Err(BindError::InvalidRate {
                                    value: rate,
                                    context,
                                });
                            }
                            if rate > 0.0 {
                                timed[t.source].push(TimedFiring {
                                    rate,
                                    destination: t.destination as u16,
                                    emits: None,
                                    label: ev.name.clone(),
                                });
                            }
                        }
                    }
                    ResolvedTrigger::OutProp(p) => {
                        let prop = &m.propagations[p];
                        let pid = prop_id(&prop.name);
                        match prop.occurrence.as_ref() {
                            Some((OccurrenceKind::Poisson, value)) => {
                                let context = format!(
                                    "Occurrence of propagation {} in {}",
                                    prop.name, m.qualified_name
                                );
                                let rate = eval_value(value, &context)?;
                                if !rate.is_finite() || rate < 0.0 {
                                    return Err(BindError::InvalidRate {
                                        value: rate,
                                        context,
                                    });
                                }
                                if rate > 0.0 {
                                    timed[t.source].push(TimedFiring {
                                        rate,
                                        destination: t.destination as u16,
                                        emits: Some(pid),
                                        label: prop.name.clone(),
                                    });
                                }
                            }
                            Some((OccurrenceKind::Fixed, value)) => {
                                let context = format!(
                                    "Occurrence of propagation {} in {}",
                                    prop.name, m.qualified_name
                                );
                                let probability = eval_value(value, &context)?;
                                if !probability.is_finite() || !(0.0..=1.0).contains(&probability) {
                                    return Err(BindError::InvalidProbability {
                                        value: probability,
                                        context,
                                    });
                                }
                                let has_receivers = !routes[ai][pid as usize].is_empty();
                                if probability > 0.0 && has_receivers {
                                    entry[t.source].push(EntryEmission {
                                        prop: pid,
                                        probability,
                                        destination: t.destination as u16,
                                    });
                                }
                            }
                            None => {
                                // observability-only declaration; nothing to fire
                            }
                        }
                    }
                    ResolvedTrigger::InProp(p) => {
                        let pid = prop_id(&m.propagations[p].name);
                        receptions.insert((t.source as u16, pid), t.destination as u16);
                    }
                }
            }
            let mut observable = HashMap::new();
            for (pi, prop) in m.propagations.iter().enumerate() {
                if prop.direction.can_send() {
                    let states = m.observable_states(pi);
                    let mut flags = vec![false; n_states];
                    for s in states {
                        flags[s] = true;
                    }
                    observable.insert(prop_id(&prop.name), flags);
                }
            }
            automata.push(BoundAutomaton {
                component: inst.component.clone(),
                model_name: m.qualified_name.clone(),
                state_names: m.states.iter().map(|s| s.name.clone()).collect(),
                initial: m.initial as u16,
                timed,
                entry,
                receptions,
                observable,
            });
        }

        // guards
        let mut guards = Vec::with_capacity(self.guards.len());
        for g in &self.guards {
            let mut clauses = Vec::with_capacity(g.clauses.len());
            for c in &g.clauses {
                let condition = bind_guard_expr(&c.condition, &self.automata);
                clauses.push(BoundGuardClause {
                    emit: prop_id(&c.emit),
                    condition,
                    receivers: c.receivers.iter().map(|&r| r as u32).collect(),
                });
            }
            guards.push(BoundGuard {
                component: g.component.clone(),
                port: g.port.clone(),
                clauses,
            });
        }

        // classes
        let mut class_names: Vec<String> = Vec::new();
        let mut classes = Vec::with_capacity(self.classes.len());
        for c in &self.classes {
            let name_idx = match class_names.iter().position(|n| n == &c.name) {
                Some(i) => i as u32,
                None => {
                    class_names.push(c.name.clone());
                    (class_names.len() - 1) as u32
                }
            };
            classes.push(BoundClass {
                name: name_idx,
                condition: bind_class_expr(&c.condition),
            });
        }

        Ok(BoundInstance {
            automata,
            prop_names,
            routes,
            guards,
            classes,
            class_names,
        })
    }
}

fn bind_guard_expr(
    expr: &ResolvedExpr<GuardAtom>,
    automata: &[AutomatonInstance],
) -> ResolvedExpr<BoundGuardAtom> {
    match expr {
        ResolvedExpr::Or(a, b) => ResolvedExpr::Or(
            Box::new(bind_guard_expr(a, automata)),
            Box::new(bind_guard_expr(b, automata)),
        ),
        ResolvedExpr::And(a, b) => ResolvedExpr::And(
            Box::new(bind_guard_expr(a, automata)),
            Box::new(bind_guard_expr(b, automata)),
        ),
        ResolvedExpr::Not(a) => ResolvedExpr::Not(Box::new(bind_guard_expr(a, automata))),
        ResolvedExpr::Atom(atom) => {
            let model = &automata[atom.automaton].model;
            let states = model.observable_states(atom.prop);
            let mut flags = vec![false; model.states.len()];
            for s in states {
                flags[s] = true;
            }
            ResolvedExpr::Atom(BoundGuardAtom {
                automaton: atom.automaton as u32,
                observable: flags,
            })
        }
    }
}

fn bind_class_expr(expr: &ResolvedExpr<ClassAtom>) -> ResolvedExpr<BoundClassAtom> {
    match expr {
        ResolvedExpr::Or(a, b) => {
            ResolvedExpr::Or(Box::new(bind_class_expr(a)), Box::new(bind_class_expr(b)))
        }
        ResolvedExpr::And(a, b) => {
            ResolvedExpr::And(Box::new(bind_class_expr(a)), Box::new(bind_class_expr(b)))
        }
        ResolvedExpr::Not(a) => ResolvedExpr::Not(Box::new(bind_class_expr(a))),
        ResolvedExpr::Atom(atom) => ResolvedExpr::Atom(BoundClassAtom {
            automaton: atom.automaton as u32,
            state: atom.state as u16,
        }),
    }
}
