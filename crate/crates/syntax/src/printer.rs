//! Canonical pretty printing. The output re-parses to an AST equal to the
//! input (modulo source spans): declaration order is preserved, consecutive
//! declarations sharing a non-default iteration tag are grouped into one
//! `iteration N { add/remove { ... } }` block, and numbers print in Rust's
//! shortest round-trip form.

use std::fmt::Write;

use errml_model::ast::*;

pub fn pretty_print(model: &Model) -> String {
    let mut out = String::new();
    let mut sections: Vec<String> = Vec::new();

    if !model.parameters.is_empty() {
        let mut s = String::new();
        s.push_str("parameters {\n");
        for p in &model.parameters {
            let _ = writeln!(s, "  {} = {};", p.name, p.value);
        }
        s.push('}');
        sections.push(s);
    }

    for ty in &model.library.types {
        sections.push(print_type(ty));
    }
    for imp in &model.library.implementations {
        sections.push(print_implementation(imp));
    }
    for c in &model.components {
        sections.push(print_component(c, 0));
    }

    for (i, s) in sections.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(s);
        out.push('\n');
    }
    out
}

fn print_type(ty: &ErrorModelType) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "error model {}", ty.name);
    s.push_str("features\n");
    print_tagged_items(&mut s, 1, &ty.features, |f| f.tag(), print_feature);
    let _ = write!(s, "end {};", ty.name);
    s
}

fn print_feature(s: &mut String, indent: usize, f: &Feature) {
    let pad = "  ".repeat(indent);
    match f {
        Feature::State(st) => {
            let initial = if st.initial { "initial " } else { "" };
            let _ = writeln!(s, "{}{}: {}error state;", pad, st.name, initial);
        }
        Feature::Event(e) => {
            let _ = write!(s, "{}{}: error event", pad, e.name);
            print_occurrence(s, &e.occurrence);
            s.push_str(";\n");
        }
        Feature::Propagation(p) => {
            let _ = write!(s, "{}{}: {} error propagation", pad, p.name, p.direction);
            print_occurrence(s, &p.occurrence);
            s.push_str(";\n");
        }
    }
}

fn print_occurrence(s: &mut String, occurrence: &Option<Occurrence>) {
    if let Some(o) = occurrence {
        let kind = match o.kind {
            OccurrenceKind::Poisson => "Poisson",
            OccurrenceKind::Fixed => "fixed",
        };
        let _ = write!(s, " {{Occurrence => {} {}}}", kind, o.value);
    }
}

fn print_implementation(imp: &ErrorModelImplementation) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "error model implementation {}.{}",
        imp.type_name, imp.impl_name
    );
    s.push_str("transitions\n");
    print_tagged_items(
        &mut s,
        1,
        &imp.transitions,
        |t| t.tag,
        |s, indent, t| {
            let pad = "  ".repeat(indent);
            let _ = writeln!(
                s,
                "{}{} -[{}]-> {};",
                pad, t.source, t.trigger, t.destination
            );
        },
    );
    let _ = write!(s, "end {}.{};", imp.type_name, imp.impl_name);
    s
}

/// Print declarations in order, wrapping consecutive runs that share a
/// non-default tag in `iteration N { add|remove { ... } }`.
fn print_tagged_items<T>(
    s: &mut String,
    indent: usize,
    items: &[T],
    tag_of: impl Fn(&T) -> IterationTag,
    print_item: impl Fn(&mut String, usize, &T),
) {
    let pad = "  ".repeat(indent);
    let mut i = 0;
    while i < items.len() {
        let tag = tag_of(&items[i]);
        let mut j = i + 1;
        while j < items.len() && tag_of(&items[j]) == tag {
            j += 1;
        }
        if tag.is_default() {
            for item in &items[i..j] {
                print_item(s, indent, item);
            }
        } else {
            let section = match tag.polarity {
                Polarity::Add => "add",
                Polarity::Remove => "remove",
            };
            let _ = writeln!(s, "{}iteration {} {{", pad, tag.iteration);
            let _ = writeln!(s, "{}  {} {{", pad, section);
            for item in &items[i..j] {
                print_item(s, indent + 2, item);
            }
            let _ = writeln!(s, "{}  }}", pad);
            let _ = writeln!(s, "{}}}", pad);
        }
        i = j;
    }
}

fn print_component(c: &Component, indent: usize) -> String {
    let pad = "  ".repeat(indent);
    let mut s = String::new();
    let _ = writeln!(s, "{}{} {}", pad, c.category, c.name);
    if !c.ports.is_empty() {
        let _ = writeln!(s, "{}features", pad);
        for p in &c.ports {
            let _ = writeln!(s, "{}  {}: {} {} port;", pad, p.name, p.direction, p.kind);
        }
    }
    if !c.subcomponents.is_empty() {
        let _ = writeln!(s, "{}subcomponents {{", pad);
        for (i, sub) in c.subcomponents.iter().enumerate() {
            if i > 0 {
                s.push('\n');
            }
            s.push_str(&print_component(sub, indent + 1));
            s.push('\n');
        }
        let _ = writeln!(s, "{}}}", pad);
    }
    if !c.connections.is_empty() {
        let _ = writeln!(s, "{}connections {{", pad);
        for conn in &c.connections {
            let _ = writeln!(
                s,
                "{}  {}: port {} -> {};",
                pad, conn.name, conn.source, conn.destination
            );
        }
        let _ = writeln!(s, "{}}}", pad);
    }
    if c.error_binding.is_some() || !c.guards.is_empty() || !c.derived.is_empty() {
        let _ = writeln!(s, "{}annex error_model {{**", pad);
        if let Some(b) = &c.error_binding {
            let _ = writeln!(s, "{}  model => {}.{};", pad, b.type_name, b.impl_name);
        }
        print_tagged_items(
            &mut s,
            indent + 1,
            &c.guards,
            |g| g.tag,
            |s, ind, g| {
                print_guard(s, ind, g);
            },
        );
        print_tagged_items(
            &mut s,
            indent + 1,
            &c.derived,
            |d| d.tag,
            |s, ind, d| {
                let p = "  ".repeat(ind);
                let _ = writeln!(s, "{}derived {{", p);
                let _ = writeln!(s, "{}  {} when {};", p, d.class, print_expr(&d.condition));
                let _ = writeln!(s, "{}}}", p);
            },
        );
        let _ = writeln!(s, "{}**}};", pad);
    }
    let _ = write!(s, "{}end {};", pad, c.name);
    s
}

fn print_guard(s: &mut String, indent: usize, g: &GuardDecl) {
    let pad = "  ".repeat(indent);
    let _ = write!(s, "{}Guard_Out =>", pad);
    for clause in &g.clauses {
        let _ = write!(s, " {} when {}", clause.emit, print_expr(&clause.condition));
    }
    let _ = writeln!(s, " mask when others applies to {};", g.port);
}

/// Minimal-parenthesis expression rendering; reparsing restores the same
/// tree shape (operators are left-associative).
pub fn print_expr(e: &BoolExpr) -> String {
    print_prec(e, 0)
}

fn level(e: &BoolExpr) -> u8 {
    match e {
        BoolExpr::Or(..) => 0,
        BoolExpr::And(..) => 1,
        BoolExpr::Not(..) => 2,
        BoolExpr::Atom { .. } => 3,
    }
}

fn print_prec(e: &BoolExpr, min_level: u8) -> String {
    let rendered = match e {
        BoolExpr::Or(a, b) => format!("{} or {}", print_prec(a, 0), print_prec(b, 1)),
        BoolExpr::And(a, b) => format!("{} and {}", print_prec(a, 1), print_prec(b, 2)),
        BoolExpr::Not(a) => format!("not {}", print_prec(a, 2)),
        BoolExpr::Atom { subject, item } => {
            let path: Vec<&str> = subject.iter().map(|s| s.as_str()).collect();
            format!("{}[{}]", path.join("."), item)
        }
    };
    if level(e) < min_level {
        format!("({})", rendered)
    } else {
        rendered
    }
}
