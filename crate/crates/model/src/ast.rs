//! Abstract syntax of the dependability modeling language: architecture
//! declarations, error model types and implementations, guard properties,
//! derived state classes, parameter bindings and iteration deltas.
//!
//! Every declaration carries an [`IterationTag`] (defaulting to iteration 1,
//! add) so that a model can be resolved at any construction iteration.

use std::fmt;

use crate::diag::SourceSpan;

/// An identifier with its source location. Equality and hashing ignore the
/// span so that re-parsed canonical text compares equal to the original.
#[derive(Debug, Clone)]
pub struct Ident {
    pub text: String,
    pub span: SourceSpan,
}

impl Ident {
    pub fn new(text: impl Into<String>, span: SourceSpan) -> Self {
        Self {
            text: text.into(),
            span,
        }
    }

    pub fn synthetic(text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            span: SourceSpan::dummy(),
        }
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

impl PartialEq for Ident {
    fn eq(&self, other: &Self) -> bool {
        self.text == other.text
    }
}

impl Eq for Ident {}

impl std::hash::Hash for Ident {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.text.hash(state);
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// Which construction iteration a declaration belongs to, and whether it is
/// added or removed there. Untagged declarations are `(1, Add)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IterationTag {
    pub iteration: u32,
    pub polarity: Polarity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    Add,
    Remove,
}

impl Default for IterationTag {
    fn default() -> Self {
        Self {
            iteration: 1,
            polarity: Polarity::Add,
        }
    }
}

impl IterationTag {
    pub fn is_default(&self) -> bool {
        self.iteration == 1 && self.polarity == Polarity::Add
    }
}

/// A numeric value in an occurrence property: either a literal or a named
/// parameter bound later (in a `parameters` block or on the command line).
#[derive(Debug, Clone, PartialEq)]
pub enum NumExpr {
    Literal(f64),
    Param(Ident),
}

impl fmt::Display for NumExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NumExpr::Literal(v) => write!(f, "{}", v),
            NumExpr::Param(p) => write!(f, "{}", p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OccurrenceKind {
    Poisson,
    Fixed,
}

/// `{Occurrence => Poisson r}` or `{Occurrence => fixed p}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Occurrence {
    pub kind: OccurrenceKind,
    pub value: NumExpr,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PropDirection {
    In,
    Out,
    InOut,
}

impl PropDirection {
    pub fn can_receive(&self) -> bool {
        matches!(self, PropDirection::In | PropDirection::InOut)
    }

    pub fn can_send(&self) -> bool {
        matches!(self, PropDirection::Out | PropDirection::InOut)
    }
}

impl fmt::Display for PropDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropDirection::In => write!(f, "in"),
            PropDirection::Out => write!(f, "out"),
            PropDirection::InOut => write!(f, "in out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateDecl {
    pub name: Ident,
    pub initial: bool,
    pub tag: IterationTag,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventDecl {
    pub name: Ident,
    pub occurrence: Option<Occurrence>,
    pub tag: IterationTag,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropDecl {
    pub name: Ident,
    pub direction: PropDirection,
    pub occurrence: Option<Occurrence>,
    pub tag: IterationTag,
    pub span: SourceSpan,
}

/// One declaration in an error model type's `features` section.
#[derive(Debug, Clone, PartialEq)]
pub enum Feature {
    State(StateDecl),
    Event(EventDecl),
    Propagation(PropDecl),
}

impl Feature {
    pub fn name(&self) -> &Ident {
        match self {
            Feature::State(s) => &s.name,
            Feature::Event(e) => &e.name,
            Feature::Propagation(p) => &p.name,
        }
    }

    pub fn tag(&self) -> IterationTag {
        match self {
            Feature::State(s) => s.tag,
            Feature::Event(e) => e.tag,
            Feature::Propagation(p) => p.tag,
        }
    }

    pub fn set_tag(&mut self, tag: IterationTag) {
        match self {
            Feature::State(s) => s.tag = tag,
            Feature::Event(e) => e.tag = tag,
            Feature::Propagation(p) => p.tag = tag,
        }
    }

    pub fn span(&self) -> &SourceSpan {
        match self {
            Feature::State(s) => &s.span,
            Feature::Event(e) => &e.span,
            Feature::Propagation(p) => &p.span,
        }
    }

    /// Structural identity used for matching `remove` deltas, ignoring the
    /// tag and the span.
    pub fn same_declaration(&self, other: &Feature) -> bool {
        match (self, other) {
            (Feature::State(a), Feature::State(b)) => a.name == b.name && a.initial == b.initial,
            (Feature::Event(a), Feature::Event(b)) => {
                a.name == b.name && occurrence_eq(&a.occurrence, &b.occurrence)
            }
            (Feature::Propagation(a), Feature::Propagation(b)) => {
                a.name == b.name
                    && a.direction == b.direction
                    && occurrence_eq(&a.occurrence, &b.occurrence)
            }
            _ => false,
        }
    }
}

fn occurrence_eq(a: &Option<Occurrence>, b: &Option<Occurrence>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(a), Some(b)) => a.kind == b.kind && a.value == b.value,
        _ => false,
    }
}

/// A reusable error behavior declaration: states, events and propagations.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorModelType {
    pub name: Ident,
    pub features: Vec<Feature>,
    pub span: SourceSpan,
}

/// Trigger of a transition as written: a bare name (event or unambiguous
/// propagation), or an explicitly directed propagation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TriggerSyntax {
    Bare(Ident),
    In(Ident),
    Out(Ident),
}

impl TriggerSyntax {
    pub fn name(&self) -> &Ident {
        match self {
            TriggerSyntax::Bare(n) | TriggerSyntax::In(n) | TriggerSyntax::Out(n) => n,
        }
    }
}

impl fmt::Display for TriggerSyntax {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TriggerSyntax::Bare(n) => write!(f, "{}", n),
            TriggerSyntax::In(n) => write!(f, "in {}", n),
            TriggerSyntax::Out(n) => write!(f, "out {}", n),
        }
    }
}

/// `Source -[trigger]-> Destination;`
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionDecl {
    pub source: Ident,
    pub trigger: TriggerSyntax,
    pub destination: Ident,
    pub tag: IterationTag,
    pub span: SourceSpan,
}

impl TransitionDecl {
    pub fn same_declaration(&self, other: &TransitionDecl) -> bool {
        self.source == other.source
            && self.trigger == other.trigger
            && self.destination == other.destination
    }
}

/// Transition relation for an error model type.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorModelImplementation {
    pub type_name: Ident,
    pub impl_name: Ident,
    pub transitions: Vec<TransitionDecl>,
    pub span: SourceSpan,
}

impl ErrorModelImplementation {
    /// `Type.impl` qualified name.
    pub fn qualified_name(&self) -> String {
        format!("{}.{}", self.type_name, self.impl_name)
    }
}

/// The reusable error model declarations of a source file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ErrorModelLibrary {
    pub types: Vec<ErrorModelType>,
    pub implementations: Vec<ErrorModelImplementation>,
}

impl ErrorModelLibrary {
    pub fn is_empty(&self) -> bool {
        self.types.is_empty() && self.implementations.is_empty()
    }

    pub fn find_type(&self, name: &str) -> Option<&ErrorModelType> {
        self.types.iter().find(|t| t.name.as_str() == name)
    }

    pub fn find_implementation(
        &self,
        type_name: &str,
        impl_name: &str,
    ) -> Option<&ErrorModelImplementation> {
        self.implementations
            .iter()
            .find(|i| i.type_name.as_str() == type_name && i.impl_name.as_str() == impl_name)
    }

    /// Highest iteration number appearing on any declaration.
    pub fn max_iteration(&self) -> u32 {
        let mut max = 1;
        for t in &self.types {
            for f in &t.features {
                max = max.max(f.tag().iteration);
            }
        }
        for i in &self.implementations {
            for tr in &i.transitions {
                max = max.max(tr.tag.iteration);
            }
        }
        max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Category {
    System,
    Process,
    Thread,
    Device,
    Processor,
}

impl Category {
    pub fn keyword(&self) -> &'static str {
        match self {
            Category::System => "system",
            Category::Process => "process",
            Category::Thread => "thread",
            Category::Device => "device",
            Category::Processor => "processor",
        }
    }

    pub fn from_keyword(kw: &str) -> Option<Self> {
        Some(match kw {
            "system" => Category::System,
            "process" => Category::Process,
            "thread" => Category::Thread,
            "device" => Category::Device,
            "processor" => Category::Processor,
            _ => return None,
        })
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PortDirection {
    In,
    Out,
}

impl fmt::Display for PortDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PortDirection::In => write!(f, "in"),
            PortDirection::Out => write!(f, "out"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PortKind {
    Data,
    Event,
}

impl fmt::Display for PortKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PortKind::Data => write!(f, "data"),
            PortKind::Event => write!(f, "event"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Port {
    pub name: Ident,
    pub direction: PortDirection,
    pub kind: PortKind,
    pub span: SourceSpan,
}

/// A dotted port reference, relative to the declaring component:
/// `compute1.to_next` or `stage.inner.out_port`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PortPath {
    pub segments: Vec<Ident>,
}

impl PortPath {
    pub fn new(segments: Vec<Ident>) -> Self {
        Self { segments }
    }

    /// Component part of the path (everything but the final port name).
    pub fn component_segments(&self) -> &[Ident] {
        &self.segments[..self.segments.len() - 1]
    }

    pub fn port_name(&self) -> &Ident {
        self.segments
            .last()
            .expect("port path has at least one segment")
    }

    pub fn span(&self) -> &SourceSpan {
        &self.segments.first().expect("non-empty path").span
    }
}

impl fmt::Display for PortPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.segments.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "{}", s)?;
        }
        Ok(())
    }
}

/// `name: port source -> destination;` declared in a component.
#[derive(Debug, Clone, PartialEq)]
pub struct Connection {
    pub name: Ident,
    pub source: PortPath,
    pub destination: PortPath,
    pub span: SourceSpan,
}

/// `model => Type.impl;` association inside an annex block.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorModelRef {
    pub type_name: Ident,
    pub impl_name: Ident,
    pub span: SourceSpan,
}

impl ErrorModelRef {
    pub fn qualified_name(&self) -> String {
        format!("{}.{}", self.type_name, self.impl_name)
    }
}

/// Boolean conditions over `port[propagation]` atoms (guards) or
/// `subcomponent[state]` atoms (derived classes). `and` binds tighter than
/// `or`; `not` binds tightest.
#[derive(Debug, Clone, PartialEq)]
pub enum BoolExpr {
    Or(Box<BoolExpr>, Box<BoolExpr>),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Not(Box<BoolExpr>),
    /// `subject[item]` where subject is a dotted path.
    Atom {
        subject: Vec<Ident>,
        item: Ident,
    },
}

impl BoolExpr {
    pub fn atom(subject: Vec<Ident>, item: Ident) -> Self {
        BoolExpr::Atom { subject, item }
    }

    /// All atoms of the expression in left-to-right order.
    pub fn atoms(&self) -> Vec<(&[Ident], &Ident)> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<(&'a [Ident], &'a Ident)>) {
        match self {
            BoolExpr::Or(a, b) | BoolExpr::And(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
            BoolExpr::Not(a) => a.collect_atoms(out),
            BoolExpr::Atom { subject, item } => out.push((subject, item)),
        }
    }
}

/// One emitting clause of a `Guard_Out` property. The trailing
/// `mask when others` default is implicit (required by the grammar).
#[derive(Debug, Clone, PartialEq)]
pub struct GuardClause {
    pub emit: Ident,
    pub condition: BoolExpr,
}

/// `Guard_Out => P when expr ... mask when others applies to port;`
#[derive(Debug, Clone, PartialEq)]
pub struct GuardDecl {
    pub port: Ident,
    pub clauses: Vec<GuardClause>,
    pub tag: IterationTag,
    pub span: SourceSpan,
}

impl GuardDecl {
    pub fn same_declaration(&self, other: &GuardDecl) -> bool {
        self.port == other.port && self.clauses == other.clauses
    }
}

/// `Class when expr;` inside a `derived { ... }` block.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedClassDecl {
    pub class: Ident,
    pub condition: BoolExpr,
    pub tag: IterationTag,
    pub span: SourceSpan,
}

impl DerivedClassDecl {
    pub fn same_declaration(&self, other: &DerivedClassDecl) -> bool {
        self.class == other.class && self.condition == other.condition
    }
}

/// An architecture component: category, ports, nested subcomponents,
/// connections among them, and the dependability annex content (error model
/// association, guards, derived classes).
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub name: Ident,
    pub category: Category,
    pub ports: Vec<Port>,
    pub subcomponents: Vec<Component>,
    pub connections: Vec<Connection>,
    pub error_binding: Option<ErrorModelRef>,
    pub guards: Vec<GuardDecl>,
    pub derived: Vec<DerivedClassDecl>,
    pub span: SourceSpan,
}

impl Component {
    pub fn find_port(&self, name: &str) -> Option<&Port> {
        self.ports.iter().find(|p| p.name.as_str() == name)
    }

    pub fn find_subcomponent(&self, name: &str) -> Option<&Component> {
        self.subcomponents.iter().find(|c| c.name.as_str() == name)
    }

    /// Depth-first walk over this component and all its descendants.
    pub fn walk(&self) -> impl Iterator<Item = &Component> {
        let mut stack = vec![self];
        std::iter::from_fn(move || {
            let next = stack.pop()?;
            for sub in next.subcomponents.iter().rev() {
                stack.push(sub);
            }
            Some(next)
        })
    }

    pub fn max_iteration(&self) -> u32 {
        let mut max = 1;
        for c in self.walk() {
            for g in &c.guards {
                max = max.max(g.tag.iteration);
            }
            for d in &c.derived {
                max = max.max(d.tag.iteration);
            }
        }
        max
    }
}

/// `name = value;` in a `parameters { ... }` block.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamBinding {
    pub name: Ident,
    pub value: f64,
    pub span: SourceSpan,
}

/// A parsed source file: top-level components (normally exactly one root),
/// the error model library and parameter bindings.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Model {
    pub components: Vec<Component>,
    pub library: ErrorModelLibrary,
    pub parameters: Vec<ParamBinding>,
}

impl Model {
    pub fn is_empty(&self) -> bool {
        self.components.is_empty() && self.library.is_empty() && self.parameters.is_empty()
    }

    pub fn root(&self) -> Option<&Component> {
        self.components.first()
    }

    /// Highest iteration declared anywhere (library, guards, derived).
    pub fn max_iteration(&self) -> u32 {
        let mut max = self.library.max_iteration();
        for c in &self.components {
            max = max.max(c.max_iteration());
        }
        max
    }

    /// Reset all spans to the dummy span, for span-insensitive comparison.
    pub fn strip_spans(&mut self) {
        for c in &mut self.components {
            strip_component(c);
        }
        for t in &mut self.library.types {
            t.span = SourceSpan::dummy();
            t.name.span = SourceSpan::dummy();
            for f in &mut t.features {
                strip_feature(f);
            }
        }
        for i in &mut self.library.implementations {
            i.span = SourceSpan::dummy();
            i.type_name.span = SourceSpan::dummy();
            i.impl_name.span = SourceSpan::dummy();
            for tr in &mut i.transitions {
                tr.span = SourceSpan::dummy();
                tr.source.span = SourceSpan::dummy();
                tr.destination.span = SourceSpan::dummy();
                strip_trigger(&mut tr.trigger);
            }
        }
        for p in &mut self.parameters {
            p.span = SourceSpan::dummy();
            p.name.span = SourceSpan::dummy();
        }
    }

    /// Span-stripped clone.
    pub fn normalized(&self) -> Model {
        let mut m = self.clone();
        m.strip_spans();
        m
    }
}

fn strip_feature(f: &mut Feature) {
    match f {
        Feature::State(s) => {
            s.span = SourceSpan::dummy();
            s.name.span = SourceSpan::dummy();
        }
        Feature::Event(e) => {
            e.span = SourceSpan::dummy();
            e.name.span = SourceSpan::dummy();
            strip_occurrence(&mut e.occurrence);
        }
        Feature::Propagation(p) => {
            p.span = SourceSpan::dummy();
            p.name.span = SourceSpan::dummy();
            strip_occurrence(&mut p.occurrence);
        }
    }
}

fn strip_occurrence(o: &mut Option<Occurrence>) {
    if let Some(o) = o {
        o.span = SourceSpan::dummy();
        if let NumExpr::Param(p) = &mut o.value {
            p.span = SourceSpan::dummy();
        }
    }
}

fn strip_trigger(t: &mut TriggerSyntax) {
    match t {
        TriggerSyntax::Bare(n) | TriggerSyntax::In(n) | TriggerSyntax::Out(n) => {
            n.span = SourceSpan::dummy()
        }
    }
}

fn strip_expr(e: &mut BoolExpr) {
    match e {
        BoolExpr::Or(a, b) | BoolExpr::And(a, b) => {
            strip_expr(a);
            strip_expr(b);
        }
        BoolExpr::Not(a) => strip_expr(a),
        BoolExpr::Atom { subject, item } => {
            for s in subject {
                s.span = SourceSpan::dummy();
            }
            item.span = SourceSpan::dummy();
        }
    }
}

fn strip_component(c: &mut Component) {
    c.span = SourceSpan::dummy();
    c.name.span = SourceSpan::dummy();
    for p in &mut c.ports {
        p.span = SourceSpan::dummy();
        p.name.span = SourceSpan::dummy();
    }
    for conn in &mut c.connections {
        conn.span = SourceSpan::dummy();
        conn.name.span = SourceSpan::dummy();
        for s in &mut conn.source.segments {
            s.span = SourceSpan::dummy();
        }
        for s in &mut conn.destination.segments {
            s.span = SourceSpan::dummy();
        }
    }
    if let Some(b) = &mut c.error_binding {
        b.span = SourceSpan::dummy();
        b.type_name.span = SourceSpan::dummy();
        b.impl_name.span = SourceSpan::dummy();
    }
    for g in &mut c.guards {
        g.span = SourceSpan::dummy();
        g.port.span = SourceSpan::dummy();
        for cl in &mut g.clauses {
            cl.emit.span = SourceSpan::dummy();
            strip_expr(&mut cl.condition);
        }
    }
    for d in &mut c.derived {
        d.span = SourceSpan::dummy();
        d.class.span = SourceSpan::dummy();
        strip_expr(&mut d.condition);
    }
    for sub in &mut c.subcomponents {
        strip_component(sub);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ident(s: &str) -> Ident {
        Ident::new(s, SourceSpan::new("t", 4, 2, s.len() as u32))
    }

    #[test]
    fn ident_equality_ignores_span() {
        assert_eq!(ident("Failed"), Ident::synthetic("Failed"));
        assert_ne!(ident("Failed"), ident("Error_Free"));
    }

    #[test]
    fn feature_matching_for_removal() {
        let a = Feature::State(StateDecl {
            name: ident("Failed"),
            initial: false,
            tag: IterationTag::default(),
            span: SourceSpan::new("t", 1, 1, 6),
        });
        let b = Feature::State(StateDecl {
            name: Ident::synthetic("Failed"),
            initial: false,
            tag: IterationTag {
                iteration: 3,
                polarity: Polarity::Remove,
            },
            span: SourceSpan::dummy(),
        });
        assert!(a.same_declaration(&b));
        let c = Feature::State(StateDecl {
            name: Ident::synthetic("Failed"),
            initial: true,
            tag: IterationTag::default(),
            span: SourceSpan::dummy(),
        });
        assert!(!a.same_declaration(&c));
    }

    #[test]
    fn normalized_models_compare_equal() {
        let m1 = Model {
            components: vec![],
            library: ErrorModelLibrary {
                types: vec![ErrorModelType {
                    name: ident("simple"),
                    features: vec![Feature::State(StateDecl {
                        name: ident("Error_Free"),
                        initial: true,
                        tag: IterationTag::default(),
                        span: SourceSpan::new("t", 2, 1, 10),
                    })],
                    span: SourceSpan::new("t", 1, 1, 5),
                }],
                implementations: vec![],
            },
            parameters: vec![],
        };
        let mut m2 = m1.clone();
        m2.library.types[0].span = SourceSpan::new("other", 9, 9, 1);
        assert_eq!(m1.normalized(), m2.normalized());
    }

    #[test]
    fn walk_visits_depth_first() {
        let leaf = |n: &str| Component {
            name: Ident::synthetic(n),
            category: Category::Thread,
            ports: vec![],
            subcomponents: vec![],
            connections: vec![],
            error_binding: None,
            guards: vec![],
            derived: vec![],
            span: SourceSpan::dummy(),
        };
        let mut root = leaf("root");
        let mut mid = leaf("mid");
        mid.subcomponents.push(leaf("inner"));
        root.subcomponents.push(mid);
        root.subcomponents.push(leaf("side"));
        let names: Vec<_> = root.walk().map(|c| c.name.as_str().to_string()).collect();
        assert_eq!(names, ["root", "mid", "inner", "side"]);
    }
}
