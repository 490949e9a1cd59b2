//! Recursive-descent parser with error recovery: on a syntax error the
//! parser reports a diagnostic, skips to the next `;` (or the end of the
//! enclosing section) and continues, so one pass surfaces every problem.
//! Keywords are contextual; any keyword remains usable as an ordinary name
//! where the grammar is unambiguous.

use errml_model::ast::*;
use errml_model::diag::{Diagnostic, SourceSpan};

use crate::lexer::{tokenize, Token, TokenKind};

pub struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    diagnostics: Vec<Diagnostic>,
}

pub fn parse_model(text: &str, file: &str) -> (Model, Vec<Diagnostic>) {
    let (tokens, mut diagnostics) = tokenize(text, file);
    let mut parser = Parser {
        tokens,
        pos: 0,
        diagnostics: Vec::new(),
    };
    let model = parser.model();
    diagnostics.append(&mut parser.diagnostics);
    (model, diagnostics)
}

/// Parse the body of a `Guard_Out` property: emitting clauses, the mandatory
/// `mask when others` default and the `applies to` port. Accepts an optional
/// `Guard_Out =>` prefix and an optional trailing `;`.
pub fn parse_guard(text: &str) -> (Option<GuardDecl>, Vec<Diagnostic>) {
    let (tokens, mut diagnostics) = tokenize(text, "<guard>");
    let mut parser = Parser {
        tokens,
        pos: 0,
        diagnostics: Vec::new(),
    };
    if parser.at_kw("Guard_Out") {
        parser.bump();
        parser.expect(&TokenKind::FatArrow);
    }
    let guard = parser.guard_body(IterationTag::default(), parser.current_span());
    if !parser.at(&TokenKind::Semi) && !parser.at(&TokenKind::Eof) {
        parser.error_here("unexpected trailing input after guard");
    }
    diagnostics.append(&mut parser.diagnostics);
    (guard, diagnostics)
}

impl Parser {
    fn current(&self) -> &TokenKind {
        &self.tokens[self.pos].kind
    }

    fn current_span(&self) -> SourceSpan {
        self.tokens[self.pos].span.clone()
    }

    fn nth(&self, offset: usize) -> &TokenKind {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].kind
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn at(&self, kind: &TokenKind) -> bool {
        self.current() == kind
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.current(), TokenKind::Ident(s) if s == kw)
    }

    fn nth_is_ident(&self, offset: usize) -> bool {
        matches!(self.nth(offset), TokenKind::Ident(_))
    }

    fn error_here(&mut self, message: impl Into<String>) {
        let span = self.current_span();
        self.diagnostics.push(Diagnostic::error(message, span));
    }

    fn expect(&mut self, kind: &TokenKind) -> bool {
        if self.at(kind) {
            self.bump();
            true
        } else {
            self.error_here(format!(
                "expected {}, found {}",
                kind.describe(),
                self.current().describe()
            ));
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> bool {
        if self.at_kw(kw) {
            self.bump();
            true
        } else {
            self.error_here(format!(
                "expected '{}', found {}",
                kw,
                self.current().describe()
            ));
            false
        }
    }

    fn expect_ident(&mut self, what: &str) -> Option<Ident> {
        match self.current() {
            TokenKind::Ident(_) => {
                let t = self.bump();
                let TokenKind::Ident(text) = t.kind else {
                    unreachable!()
                };
                Some(Ident::new(text, t.span))
            }
            _ => {
                self.error_here(format!(
                    "expected {}, found {}",
                    what,
                    self.current().describe()
                ));
                None
            }
        }
    }

    /// Force progress in a parse loop stuck on a token no rule consumes
    /// (e.g. a stray `}`); a diagnostic for it has already been reported.
    fn skip_stuck(&mut self, before: usize) {
        if self.pos == before && !self.at(&TokenKind::Eof) {
            self.bump();
        }
    }

    /// Skip to just past the next `;`, stopping early (without consuming)
    /// before a section-closing token or one of the given keywords.
    fn recover(&mut self, stop_kws: &[&str]) {
        loop {
            match self.current() {
                TokenKind::Semi => {
                    self.bump();
                    return;
                }
                TokenKind::Eof | TokenKind::RBrace | TokenKind::AnnexClose => return,
                TokenKind::Ident(s) if stop_kws.iter().any(|k| k == s) => return,
                _ => {
                    self.bump();
                }
            }
        }
    }

    fn model(&mut self) -> Model {
        let mut model = Model::default();
        loop {
            let before = self.pos;
            match self.current() {
                TokenKind::Eof => break,
                TokenKind::Ident(s) if s == "error" => self.error_model_decl(&mut model),
                TokenKind::Ident(s) if s == "parameters" => self.parameters_block(&mut model),
                TokenKind::Ident(s) if Category::from_keyword(s).is_some() => {
                    if let Some(c) = self.component() {
                        model.components.push(c);
                    }
                }
                _ => {
                    self.error_here(format!(
                        "expected a declaration (error model, component or parameters), found {}",
                        self.current().describe()
                    ));
                    self.recover(&[]);
                }
            }
            self.skip_stuck(before);
        }
        model
    }

    // -- error model library ------------------------------------------------

    fn error_model_decl(&mut self, model: &mut Model) {
        self.expect_kw("error");
        if !self.expect_kw("model") {
            self.recover(&["error", "end"]);
            return;
        }
        if self.at_kw("implementation") {
            self.bump();
            if let Some(imp) = self.error_model_implementation() {
                model.library.implementations.push(imp);
            }
        } else if let Some(ty) = self.error_model_type() {
            model.library.types.push(ty);
        }
    }

    fn error_model_type(&mut self) -> Option<ErrorModelType> {
        let name = self.expect_ident("error model type name")?;
        let span = name.span.clone();
        self.expect_kw("features");
        let mut features = Vec::new();
        loop {
            if self.at_kw("end") || self.at(&TokenKind::Eof) {
                break;
            }
            let before = self.pos;
            if self.at_kw("iteration") {
                self.iteration_block(
                    |p, tag| {
                        if let Some(mut f) = p.feature() {
                            f.set_tag(tag);
                            Some(f)
                        } else {
                            None
                        }
                    },
                    &mut features,
                );
            } else if let Some(f) = self.feature() {
                features.push(f);
            }
            self.skip_stuck(before);
        }
        self.end_clause(&name, false);
        Some(ErrorModelType {
            name,
            features,
            span,
        })
    }

    fn feature(&mut self) -> Option<Feature> {
        let Some(name) = self.expect_ident("feature name") else {
            self.recover(&["end", "iteration"]);
            return None;
        };
        if !self.expect(&TokenKind::Colon) {
            self.recover(&["end", "iteration"]);
            return None;
        }
        let span = name.span.clone();
        let feature = if self.at_kw("initial") {
            self.bump();
            self.expect_kw("error");
            self.expect_kw("state");
            Some(Feature::State(StateDecl {
                name,
                initial: true,
                tag: Default::default(),
                span,
            }))
        } else if self.at_kw("error") {
            self.bump();
            if self.at_kw("state") {
                self.bump();
                Some(Feature::State(StateDecl {
                    name,
                    initial: false,
                    tag: Default::default(),
                    span,
                }))
            } else if self.at_kw("event") {
                self.bump();
                let occurrence = self.occurrence_opt();
                Some(Feature::Event(EventDecl {
                    name,
                    occurrence,
                    tag: Default::default(),
                    span,
                }))
            } else {
                self.error_here(format!(
                    "expected 'state' or 'event', found {}",
                    self.current().describe()
                ));
                None
            }
        } else if self.at_kw("in") || self.at_kw("out") {
            let mut direction = if self.at_kw("in") {
                PropDirection::In
            } else {
                PropDirection::Out
            };
            self.bump();
            if direction == PropDirection::In && self.at_kw("out") {
                self.bump();
                direction = PropDirection::InOut;
            }
            self.expect_kw("error");
            self.expect_kw("propagation");
            let occurrence = self.occurrence_opt();
            Some(Feature::Propagation(PropDecl {
                name,
                direction,
                occurrence,
                tag: Default::default(),
                span,
            }))
        } else {
            self.error_here(format!(
                "expected a state, event or propagation declaration, found {}",
                self.current().describe()
            ));
            None
        };
        match feature {
            Some(f) => {
                if !self.expect(&TokenKind::Semi) {
                    self.recover(&["end", "iteration"]);
                }
                Some(f)
            }
            None => {
                self.recover(&["end", "iteration"]);
                None
            }
        }
    }

    fn occurrence_opt(&mut self) -> Option<Occurrence> {
        if !self.at(&TokenKind::LBrace) {
            return None;
        }
        let span = self.current_span();
        self.bump();
        self.expect_kw("Occurrence");
        self.expect(&TokenKind::FatArrow);
        let kind = if self.at_kw("Poisson") {
            self.bump();
            OccurrenceKind::Poisson
        } else if self.at_kw("fixed") {
            self.bump();
            OccurrenceKind::Fixed
        } else {
            self.error_here(format!(
                "expected 'Poisson' or 'fixed', found {}",
                self.current().describe()
            ));
            OccurrenceKind::Poisson
        };
        let value = match self.current() {
            TokenKind::Number(_) => {
                let t = self.bump();
                let TokenKind::Number(v) = t.kind else {
                    unreachable!()
                };
                NumExpr::Literal(v)
            }
            TokenKind::Ident(_) => {
                let id = self.expect_ident("parameter name").unwrap();
                NumExpr::Param(id)
            }
            _ => {
                self.error_here(format!(
                    "expected a number or parameter name, found {}",
                    self.current().describe()
                ));
                NumExpr::Literal(0.0)
            }
        };
        self.expect(&TokenKind::RBrace);
        Some(Occurrence { kind, value, span })
    }

    fn error_model_implementation(&mut self) -> Option<ErrorModelImplementation> {
        let type_name = self.expect_ident("error model type name")?;
        self.expect(&TokenKind::Dot);
        let impl_name = self.expect_ident("implementation name")?;
        let span = type_name.span.clone();
        self.expect_kw("transitions");
        let mut transitions = Vec::new();
        loop {
            if self.at_kw("end") || self.at(&TokenKind::Eof) {
                break;
            }
            let before = self.pos;
            if self.at_kw("iteration") {
                self.iteration_block(
                    |p, tag| {
                        p.transition().map(|mut t| {
                            t.tag = tag;
                            t
                        })
                    },
                    &mut transitions,
                );
            } else if let Some(t) = self.transition() {
                transitions.push(t);
            }
            self.skip_stuck(before);
        }
        // end Type.impl ;
        self.expect_kw("end");
        if let Some(end_ty) = self.expect_ident("error model type name") {
            self.expect(&TokenKind::Dot);
            if let Some(end_impl) = self.expect_ident("implementation name") {
                if end_ty != type_name || end_impl != impl_name {
                    self.diagnostics.push(Diagnostic::error(
                        format!(
                            "end name {}.{} does not match implementation {}.{}",
                            end_ty, end_impl, type_name, impl_name
                        ),
                        end_ty.span.clone(),
                    ));
                }
            }
        }
        self.expect(&TokenKind::Semi);
        Some(ErrorModelImplementation {
            type_name,
            impl_name,
            transitions,
            span,
        })
    }

    fn transition(&mut self) -> Option<TransitionDecl> {
        let Some(source) = self.expect_ident("source state name") else {
            self.recover(&["end", "iteration"]);
            return None;
        };
        let span = source.span.clone();
        let ok = self.expect(&TokenKind::Minus) && self.expect(&TokenKind::LBracket);
        if !ok {
            self.recover(&["end", "iteration"]);
            return None;
        }
        let trigger = if self.at_kw("in") && self.nth_is_ident(1) {
            self.bump();
            TriggerSyntax::In(self.expect_ident("propagation name")?)
        } else if self.at_kw("out") && self.nth_is_ident(1) {
            self.bump();
            TriggerSyntax::Out(self.expect_ident("propagation name")?)
        } else {
            match self.expect_ident("trigger name") {
                Some(id) => TriggerSyntax::Bare(id),
                None => {
                    self.recover(&["end", "iteration"]);
                    return None;
                }
            }
        };
        let ok = self.expect(&TokenKind::RBracket) && self.expect(&TokenKind::Arrow);
        if !ok {
            self.recover(&["end", "iteration"]);
            return None;
        }
        let Some(destination) = self.expect_ident("destination state name") else {
            self.recover(&["end", "iteration"]);
            return None;
        };
        if !self.expect(&TokenKind::Semi) {
            self.recover(&["end", "iteration"]);
        }
        Some(TransitionDecl {
            source,
            trigger,
            destination,
            tag: Default::default(),
            span,
        })
    }

    /// `iteration N { add { ... } remove { ... } }`; parsed items are pushed
    /// onto `out` in source order with the block's tag applied.
    fn iteration_block<T>(
        &mut self,
        mut item: impl FnMut(&mut Self, IterationTag) -> Option<T>,
        out: &mut Vec<T>,
    ) {
        self.expect_kw("iteration");
        let iteration = match self.current() {
            TokenKind::Number(n) if n.fract() == 0.0 && *n >= 1.0 && *n <= u32::MAX as f64 => {
                let n = *n as u32;
                self.bump();
                n
            }
            _ => {
                self.error_here(format!(
                    "expected a positive iteration number, found {}",
                    self.current().describe()
                ));
                self.recover(&["end"]);
                return;
            }
        };
        if !self.expect(&TokenKind::LBrace) {
            self.recover(&["end"]);
            return;
        }
        while self.at_kw("add") || self.at_kw("remove") {
            let polarity = if self.at_kw("add") {
                Polarity::Add
            } else {
                Polarity::Remove
            };
            self.bump();
            if !self.expect(&TokenKind::LBrace) {
                break;
            }
            let tag = IterationTag {
                iteration,
                polarity,
            };
            while !self.at(&TokenKind::RBrace) && !self.at(&TokenKind::Eof) {
                let before = self.pos;
                if let Some(v) = item(self, tag) {
                    out.push(v);
                }
                self.skip_stuck(before);
            }
            self.expect(&TokenKind::RBrace);
        }
        self.expect(&TokenKind::RBrace);
    }

    // -- architecture --------------------------------------------------------

    fn component(&mut self) -> Option<Component> {
        let TokenKind::Ident(cat) = self.current() else {
            unreachable!()
        };
        let category = Category::from_keyword(cat).expect("checked by caller");
        self.bump();
        let name = self.expect_ident("component name")?;
        let span = name.span.clone();
        let mut component = Component {
            name,
            category,
            ports: Vec::new(),
            subcomponents: Vec::new(),
            connections: Vec::new(),
            error_binding: None,
            guards: Vec::new(),
            derived: Vec::new(),
            span,
        };
        if self.at_kw("features") {
            self.bump();
            while !self.at_kw("subcomponents")
                && !self.at_kw("connections")
                && !self.at_kw("annex")
                && !self.at_kw("end")
                && !self.at(&TokenKind::Eof)
            {
                let before = self.pos;
                if let Some(p) = self.port() {
                    component.ports.push(p);
                }
                self.skip_stuck(before);
            }
        }
        if self.at_kw("subcomponents") {
            self.bump();
            self.expect(&TokenKind::LBrace);
            while !self.at(&TokenKind::RBrace) && !self.at(&TokenKind::Eof) {
                let before = self.pos;
                match self.current() {
                    TokenKind::Ident(s) if Category::from_keyword(s).is_some() => {
                        if let Some(sub) = self.component() {
                            component.subcomponents.push(sub);
                        }
                    }
                    _ => {
                        self.error_here(format!(
                            "expected a component declaration, found {}",
                            self.current().describe()
                        ));
                        self.recover(&[]);
                    }
                }
                self.skip_stuck(before);
            }
            self.expect(&TokenKind::RBrace);
        }
        if self.at_kw("connections") {
            self.bump();
            self.expect(&TokenKind::LBrace);
            while !self.at(&TokenKind::RBrace) && !self.at(&TokenKind::Eof) {
                let before = self.pos;
                if let Some(c) = self.connection() {
                    component.connections.push(c);
                }
                self.skip_stuck(before);
            }
            self.expect(&TokenKind::RBrace);
        }
        if self.at_kw("annex") {
            self.annex_block(&mut component);
        }
        self.end_clause(&component.name, true);
        Some(component)
    }

    fn port(&mut self) -> Option<Port> {
        let Some(name) = self.expect_ident("port name") else {
            self.recover(&["subcomponents", "connections", "annex", "end"]);
            return None;
        };
        if !self.expect(&TokenKind::Colon) {
            self.recover(&["subcomponents", "connections", "annex", "end"]);
            return None;
        }
        let direction = if self.at_kw("in") {
            self.bump();
            PortDirection::In
        } else if self.at_kw("out") {
            self.bump();
            PortDirection::Out
        } else {
            self.error_here(format!(
                "expected 'in' or 'out', found {}",
                self.current().describe()
            ));
            self.recover(&["subcomponents", "connections", "annex", "end"]);
            return None;
        };
        let kind = if self.at_kw("data") {
            self.bump();
            PortKind::Data
        } else if self.at_kw("event") {
            self.bump();
            PortKind::Event
        } else {
            self.error_here(format!(
                "expected 'data' or 'event', found {}",
                self.current().describe()
            ));
            self.recover(&["subcomponents", "connections", "annex", "end"]);
            return None;
        };
        self.expect_kw("port");
        let span = name.span.clone();
        if !self.expect(&TokenKind::Semi) {
            self.recover(&["subcomponents", "connections", "annex", "end"]);
        }
        Some(Port {
            name,
            direction,
            kind,
            span,
        })
    }

    fn connection(&mut self) -> Option<Connection> {
        let Some(name) = self.expect_ident("connection name") else {
            self.recover(&["annex", "end"]);
            return None;
        };
        let span = name.span.clone();
        let ok = self.expect(&TokenKind::Colon) && self.expect_kw("port");
        if !ok {
            self.recover(&["annex", "end"]);
            return None;
        }
        let Some(source) = self.port_path() else {
            self.recover(&["annex", "end"]);
            return None;
        };
        if !self.expect(&TokenKind::Arrow) {
            self.recover(&["annex", "end"]);
            return None;
        }
        let Some(destination) = self.port_path() else {
            self.recover(&["annex", "end"]);
            return None;
        };
        if !self.expect(&TokenKind::Semi) {
            self.recover(&["annex", "end"]);
        }
        Some(Connection {
            name,
            source,
            destination,
            span,
        })
    }

    fn port_path(&mut self) -> Option<PortPath> {
        let first = self.expect_ident("port reference")?;
        let mut segments = vec![first];
        while self.at(&TokenKind::Dot) {
            self.bump();
            segments.push(self.expect_ident("port reference")?);
        }
        Some(PortPath::new(segments))
    }

    fn annex_block(&mut self, component: &mut Component) {
        self.expect_kw("annex");
        self.expect_kw("error_model");
        if !self.expect(&TokenKind::AnnexOpen) {
            self.recover(&["end"]);
            return;
        }
        while !self.at(&TokenKind::AnnexClose) && !self.at(&TokenKind::Eof) {
            let before = self.pos;
            self.annex_item(component, IterationTag::default(), true);
            self.skip_stuck(before);
        }
        self.expect(&TokenKind::AnnexClose);
        self.expect(&TokenKind::Semi);
    }

    fn annex_item(&mut self, component: &mut Component, tag: IterationTag, allow_nested: bool) {
        if self.at_kw("model") {
            let span = self.current_span();
            self.bump();
            self.expect(&TokenKind::FatArrow);
            let Some(type_name) = self.expect_ident("error model type name") else {
                self.recover(&[]);
                return;
            };
            self.expect(&TokenKind::Dot);
            let Some(impl_name) = self.expect_ident("implementation name") else {
                self.recover(&[]);
                return;
            };
            self.expect(&TokenKind::Semi);
            if !allow_nested {
                self.diagnostics.push(Diagnostic::error(
                    "error model associations cannot be iteration-tagged",
                    span,
                ));
            } else if component.error_binding.is_some() {
                self.diagnostics.push(Diagnostic::error(
                    format!(
                        "component {} already has an error model association",
                        component.name
                    ),
                    span,
                ));
            } else {
                component.error_binding = Some(ErrorModelRef {
                    type_name,
                    impl_name,
                    span,
                });
            }
        } else if self.at_kw("Guard_Out") {
            let span = self.current_span();
            self.bump();
            self.expect(&TokenKind::FatArrow);
            if let Some(guard) = self.guard_body(tag, span) {
                component.guards.push(guard);
            }
            self.expect(&TokenKind::Semi);
        } else if self.at_kw("derived") {
            self.bump();
            self.expect(&TokenKind::LBrace);
            while !self.at(&TokenKind::RBrace) && !self.at(&TokenKind::Eof) {
                let before = self.pos;
                'decl: {
                    let Some(class) = self.expect_ident("class name") else {
                        self.recover(&[]);
                        break 'decl;
                    };
                    if !self.expect_kw("when") {
                        self.recover(&[]);
                        break 'decl;
                    }
                    let Some(condition) = self.bool_expr() else {
                        self.recover(&[]);
                        break 'decl;
                    };
                    let span = class.span.clone();
                    self.expect(&TokenKind::Semi);
                    component.derived.push(DerivedClassDecl {
                        class,
                        condition,
                        tag,
                        span,
                    });
                }
                self.skip_stuck(before);
            }
            self.expect(&TokenKind::RBrace);
        } else if self.at_kw("iteration") && allow_nested {
            // collected items carry the block tag; model associations are not
            // iteration-taggable
            let mut dummy: Vec<()> = Vec::new();
            self.iteration_block(
                |p, tag| {
                    p.annex_item(component, tag, false);
                    None::<()>
                },
                &mut dummy,
            );
        } else {
            self.error_here(format!(
                "expected 'model', 'Guard_Out', 'derived' or 'iteration', found {}",
                self.current().describe()
            ));
            self.recover(&[]);
        }
    }

    fn guard_body(&mut self, tag: IterationTag, span: SourceSpan) -> Option<GuardDecl> {
        let mut clauses = Vec::new();
        let mut has_default = false;
        loop {
            if self.at_kw("mask") {
                self.bump();
                self.expect_kw("when");
                self.expect_kw("others");
                has_default = true;
                break;
            }
            if self.at_kw("applies") || self.at(&TokenKind::Semi) || self.at(&TokenKind::Eof) {
                break;
            }
            let emit = self.expect_ident("emitted propagation name")?;
            if !self.expect_kw("when") {
                return None;
            }
            let condition = self.bool_expr()?;
            clauses.push(GuardClause { emit, condition });
        }
        if !has_default {
            self.diagnostics.push(Diagnostic::error(
                "guard is missing the 'mask when others' default",
                self.current_span(),
            ));
        }
        self.expect_kw("applies");
        self.expect_kw("to");
        let port = self.expect_ident("port name")?;
        if !has_default {
            return None;
        }
        Some(GuardDecl {
            port,
            clauses,
            tag,
            span,
        })
    }

    // -- boolean expressions --------------------------------------------------

    fn bool_expr(&mut self) -> Option<BoolExpr> {
        self.or_expr()
    }

    fn or_expr(&mut self) -> Option<BoolExpr> {
        let mut left = self.and_expr()?;
        while self.at_kw("or") {
            self.bump();
            let right = self.and_expr()?;
            left = BoolExpr::Or(Box::new(left), Box::new(right));
        }
        Some(left)
    }

    fn and_expr(&mut self) -> Option<BoolExpr> {
        let mut left = self.not_expr()?;
        while self.at_kw("and") {
            self.bump();
            let right = self.not_expr()?;
            left = BoolExpr::And(Box::new(left), Box::new(right));
        }
        Some(left)
    }

    fn not_expr(&mut self) -> Option<BoolExpr> {
        if self.at_kw("not") {
            self.bump();
            return Some(BoolExpr::Not(Box::new(self.not_expr()?)));
        }
        if self.at(&TokenKind::LParen) {
            self.bump();
            let e = self.or_expr()?;
            self.expect(&TokenKind::RParen);
            return Some(e);
        }
        // atom: subject[.subject]*[item]
        let first = self.expect_ident("port or subcomponent name")?;
        let mut subject = vec![first];
        while self.at(&TokenKind::Dot) {
            self.bump();
            subject.push(self.expect_ident("subcomponent name")?);
        }
        self.expect(&TokenKind::LBracket);
        let item = self.expect_ident("propagation or state name")?;
        self.expect(&TokenKind::RBracket);
        Some(BoolExpr::Atom { subject, item })
    }

    // -- parameters -----------------------------------------------------------

    fn parameters_block(&mut self, model: &mut Model) {
        self.expect_kw("parameters");
        if !self.expect(&TokenKind::LBrace) {
            self.recover(&[]);
            return;
        }
        while !self.at(&TokenKind::RBrace) && !self.at(&TokenKind::Eof) {
            let before = self.pos;
            'binding: {
                let Some(name) = self.expect_ident("parameter name") else {
                    self.recover(&[]);
                    break 'binding;
                };
                if !self.expect(&TokenKind::Equals) {
                    self.recover(&[]);
                    break 'binding;
                }
                let value = match self.current() {
                    TokenKind::Number(_) => {
                        let t = self.bump();
                        let TokenKind::Number(v) = t.kind else {
                            unreachable!()
                        };
                        v
                    }
                    _ => {
                        self.error_here(format!(
                            "expected a numeric value, found {}",
                            self.current().describe()
                        ));
                        self.recover(&[]);
                        break 'binding;
                    }
                };
                let span = name.span.clone();
                self.expect(&TokenKind::Semi);
                model.parameters.push(ParamBinding { name, value, span });
            }
            self.skip_stuck(before);
        }
        self.expect(&TokenKind::RBrace);
    }

    fn end_clause(&mut self, name: &Ident, _component: bool) {
        self.expect_kw("end");
        if let Some(end_name) = self.expect_ident("declaration name") {
            if &end_name != name {
                self.diagnostics.push(Diagnostic::error(
                    format!("end name {} does not match declaration {}", end_name, name),
                    end_name.span.clone(),
                ));
            }
        }
        self.expect(&TokenKind::Semi);
    }
}
