//! Parameter environments: named rate/probability values from in-file
//! `parameters` blocks, optionally overridden by caller-supplied bindings.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::ast::{NumExpr, ParamBinding};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ParamError {
    #[error("malformed parameter binding '{0}', expected name=value")]
    Malformed(String),
    #[error("parameter {0} has a non-numeric value '{1}'")]
    NotANumber(String, String),
}

/// Name -> value map with deterministic iteration order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamEnv {
    values: BTreeMap<String, f64>,
}

impl ParamEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_model_bindings(bindings: &[ParamBinding]) -> Self {
        let mut env = Self::new();
        for b in bindings {
            env.values.insert(b.name.text.clone(), b.value);
        }
        env
    }

    /// Parse `name=value,name=value` as passed on a command line and layer it
    /// over this environment (later bindings win).
    pub fn with_overrides(mut self, spec: &str) -> Result<Self, ParamError> {
        for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (name, value) = part
                .split_once('=')
                .ok_or_else(|| ParamError::Malformed(part.to_string()))?;
            let name = name.trim();
            let value = value.trim();
            if name.is_empty() {
                return Err(ParamError::Malformed(part.to_string()));
            }
            let v: f64 = value
                .parse()
                .map_err(|_| ParamError::NotANumber(name.to_string(), value.to_string()))?;
            self.values.insert(name.to_string(), v);
        }
        Ok(self)
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.values.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    pub fn eval(&self, expr: &NumExpr) -> Option<f64> {
        match expr {
            NumExpr::Literal(v) => Some(*v),
            NumExpr::Param(p) => self.get(p.as_str()),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }
}
