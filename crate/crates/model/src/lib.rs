//! Domain model for architecture-based dependability models.
//!
//! An architecture is a tree of components connected through ports. Error
//! models (states, events, propagations, transitions) are declared in a
//! reusable library and associated with components; propagations travel
//! across connections; guards filter and redirect them; derived classes name
//! sets of global states. Declarations carry iteration tags so a model can
//! be resolved and checked at every step of its progressive construction.
//!
//! This crate is purely in-memory: parsing lives in `errml-syntax`, state
//! space construction in `errml-compose`.

pub mod ast;
pub mod diag;
pub mod instance;
pub mod iterations;
pub mod params;
pub mod resolved;
pub mod validate;

pub use ast::Model;
pub use diag::{has_errors, Diagnostic, Severity, SourceSpan};
pub use instance::{instantiate, BoundInstance, InstanceError, InstanceModel, RoutingTable};
pub use params::{ParamEnv, ParamError};
pub use validate::{validate_architecture, validate_library, validate_model};
