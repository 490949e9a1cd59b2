//! Structural validation of the library and the architecture, reported as
//! diagnostics.

use std::collections::HashSet;

use crate::ast::{Component, ErrorModelLibrary, Model, PortDirection, PortPath};
use crate::diag::{Diagnostic, Severity};
use crate::resolved::resolve_error_model;

/// Well-formedness of the error model library, checked at every declared
/// iteration: exactly one initial state per type, all transition references
/// resolvable, occurrence literals within their domains, deterministic
/// transition relations.
pub fn validate_library(lib: &ErrorModelLibrary) -> Vec<Diagnostic> {
    let mut diags = Vec::new();

    let mut type_names = HashSet::new();
    for ty in &lib.types {
        if !type_names.insert(ty.name.as_str()) {
            diags.push(Diagnostic::error(
                format!("duplicate error model type {}", ty.name),
                ty.name.span.clone(),
            ));
        }
    }
    let mut impl_names = HashSet::new();
    for imp in &lib.implementations {
        if !impl_names.insert(imp.qualified_name()) {
            diags.push(Diagnostic::error(
                format!(
                    "duplicate error model implementation {}",
                    imp.qualified_name()
                ),
                imp.impl_name.span.clone(),
            ));
        }
        if lib.find_type(imp.type_name.as_str()).is_none() {
            diags.push(Diagnostic::error(
                format!(
                    "error model implementation {} refers to unknown type {}",
                    imp.qualified_name(),
                    imp.type_name
                ),
                imp.type_name.span.clone(),
            ));
        }
    }

    // per-iteration resolution of each type, alone and with each implementation
    for ty in &lib.types {
        let impls: Vec<_> = lib
            .implementations
            .iter()
            .filter(|i| i.type_name.as_str() == ty.name.as_str())
            .collect();
        let max_iter = lib.max_iteration();
        for i in 1..=max_iter {
            if impls.is_empty() {
                let (_, d) = resolve_error_model(ty, None, i);
                push_dedup(&mut diags, d);
            }
            for imp in &impls {
                let (_, d) = resolve_error_model(ty, Some(imp), i);
                push_dedup(&mut diags, d);
            }
        }
    }

    diags
}

fn push_dedup(diags: &mut Vec<Diagnostic>, new: Vec<Diagnostic>) {
    for d in new {
        if !diags
            .iter()
            .any(|e| e.severity == d.severity && e.message == d.message && e.span == d.span)
        {
            diags.push(d);
        }
    }
}

/// Structural checks on the component tree: a single root, sibling name
/// uniqueness, port name uniqueness, connection endpoints resolvable with
/// compatible directions (out -> in) between two distinct components.
pub fn validate_architecture(model: &Model) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    if model.components.len() > 1 {
        for extra in &model.components[1..] {
            diags.push(Diagnostic::error(
                format!(
                    "multiple root components: {} (root {} already declared)",
                    extra.name, model.components[0].name
                ),
                extra.name.span.clone(),
            ));
        }
    }
    for root in &model.components {
        validate_component(root, &mut diags);
    }
    // duplicate parameters
    let mut params = HashSet::new();
    for p in &model.parameters {
        if !params.insert(p.name.as_str()) {
            diags.push(Diagnostic::error(
                format!("duplicate parameter {}", p.name),
                p.name.span.clone(),
            ));
        }
    }
    diags
}

fn validate_component(c: &Component, diags: &mut Vec<Diagnostic>) {
    let mut port_names = HashSet::new();
    for p in &c.ports {
        if !port_names.insert(p.name.as_str()) {
            diags.push(Diagnostic::error(
                format!("duplicate port {} in component {}", p.name, c.name),
                p.name.span.clone(),
            ));
        }
    }
    let mut sub_names = HashSet::new();
    for s in &c.subcomponents {
        if !sub_names.insert(s.name.as_str()) {
            diags.push(Diagnostic::error(
                format!("duplicate subcomponent {} in component {}", s.name, c.name),
                s.name.span.clone(),
            ));
        }
    }
    let mut conn_names = HashSet::new();
    for conn in &c.connections {
        if !conn_names.insert(conn.name.as_str()) {
            diags.push(Diagnostic::error(
                format!("duplicate connection {} in component {}", conn.name, c.name),
                conn.name.span.clone(),
            ));
        }
        let src = resolve_endpoint(c, &conn.source, diags);
        let dst = resolve_endpoint(c, &conn.destination, diags);
        if let (Some((sc, sp)), Some((dc, dp))) = (src, dst) {
            if std::ptr::eq(sc, dc) {
                diags.push(Diagnostic::error(
                    format!("connection {} links a component to itself", conn.name),
                    conn.span.clone(),
                ));
            }
            if sp.direction != PortDirection::Out {
                diags.push(Diagnostic::error(
                    format!(
                        "connection {} source {} must be an out port",
                        conn.name, conn.source
                    ),
                    conn.source.span().clone(),
                ));
            }
            if dp.direction != PortDirection::In {
                diags.push(Diagnostic::error(
                    format!(
                        "connection {} destination {} must be an in port",
                        conn.name, conn.destination
                    ),
                    conn.destination.span().clone(),
                ));
            }
        }
    }
    for g in &c.guards {
        match c.find_port(g.port.as_str()) {
            Some(p) if p.direction == PortDirection::Out => {}
            Some(_) => diags.push(Diagnostic::error(
                format!("guard applies to port {} which is not an out port", g.port),
                g.port.span.clone(),
            )),
            None => diags.push(Diagnostic::error(
                format!(
                    "guard applies to unknown port {} of component {}",
                    g.port, c.name
                ),
                g.port.span.clone(),
            )),
        }
    }
    for s in &c.subcomponents {
        validate_component(s, diags);
    }
}

/// Resolve a connection endpoint relative to the declaring component. The
/// path must name a (possibly nested) subcomponent and one of its ports.
fn resolve_endpoint<'a>(
    owner: &'a Component,
    path: &PortPath,
    diags: &mut Vec<Diagnostic>,
) -> Option<(&'a Component, &'a crate::ast::Port)> {
    if path.segments.len() < 2 {
        diags.push(Diagnostic::error(
            format!("connection endpoint {} must name a subcomponent port", path),
            path.span().clone(),
        ));
        return None;
    }
    let mut comp = owner;
    for seg in path.component_segments() {
        match comp.find_subcomponent(seg.as_str()) {
            Some(next) => comp = next,
            None => {
                diags.push(Diagnostic::error(
                    format!(
                        "unknown subcomponent {} in connection endpoint {}",
                        seg, path
                    ),
                    seg.span.clone(),
                ));
                return None;
            }
        }
    }
    match comp.find_port(path.port_name().as_str()) {
        Some(port) => Some((comp, port)),
        None => {
            diags.push(Diagnostic::error(
                format!(
                    "unknown port {} of component {}",
                    path.port_name(),
                    comp.name
                ),
                path.port_name().span.clone(),
            ));
            None
        }
    }
}

/// Convenience: all validation over a parsed model.
pub fn validate_model(model: &Model) -> Vec<Diagnostic> {
    let mut diags = validate_library(&model.library);
    diags.extend(validate_architecture(model));
    diags.sort_by_key(|d| match d.severity {
        Severity::Error => 0,
        Severity::Warning => 1,
        Severity::Info => 2,
    });
    diags
}
