//! Threshold monitors: read-only observers that turn component state into
//! events.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::event::Event;
use crate::runtime::{split_path, Registry};
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
}

impl FromStr for Comparison {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Ok(match s {
            "lt" | "<" => Comparison::Lt,
            "le" | "<=" => Comparison::Le,
            "gt" | ">" => Comparison::Gt,
            "ge" | ">=" => Comparison::Ge,
            "eq" | "==" => Comparison::Eq,
            _ => return Err(()),
        })
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Comparison::Lt => "lt",
            Comparison::Le => "le",
            Comparison::Gt => "gt",
            Comparison::Ge => "ge",
            Comparison::Eq => "eq",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MonitorError {
    #[error("monitor {monitor}: unknown target `{target}`")]
    UnknownTarget { monitor: String, target: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorSpec {
    pub id: String,
    /// `comp.port` or `comp.prop`.
    pub watch: String,
    pub op: Comparison,
    pub threshold: Value,
    pub emit: String,
    /// Emit only on false -> true changes of the predicate.
    pub edge: bool,
}

/// Evaluates `value op threshold`. Numeric arrays compare by Euclidean norm;
/// non-numeric values only support `eq`.
pub fn predicate(value: &Value, op: Comparison, threshold: &Value) -> bool {
    let lhs = match value {
        Value::Array(_) => value.norm(),
        v => v.as_f64(),
    };
    match (lhs, threshold.as_f64()) {
        (Some(a), Some(b)) => match op {
            Comparison::Lt => a < b,
            Comparison::Le => a <= b,
            Comparison::Gt => a > b,
            Comparison::Ge => a >= b,
            Comparison::Eq => a == b,
        },
        _ => op == Comparison::Eq && value == threshold,
    }
}

#[derive(Debug, Clone)]
pub struct Monitor {
    spec: MonitorSpec,
    last: bool,
}

impl Monitor {
    pub fn new(spec: MonitorSpec) -> Self {
        Monitor { spec, last: false }
    }

    pub fn spec(&self) -> &MonitorSpec {
        &self.spec
    }

    /// Reads the watched value and returns the event to emit, if any. A port
    /// that was never written yields no event and counts as "false".
    pub fn eval(&mut self, registry: &Registry) -> Result<Option<Event>, MonitorError> {
        let unknown = || MonitorError::UnknownTarget {
            monitor: self.spec.id.clone(),
            target: self.spec.watch.clone(),
        };
        let (comp, name) = split_path(&self.spec.watch).map_err(|_| unknown())?;
        let c = registry.component(comp).ok_or_else(unknown)?;
        let value = match c.property(name) {
            Some(v) => Some(v),
            None if c.has_port(name) => c.port(name),
            None => return Err(unknown()),
        };
        let now = value.is_some_and(|v| predicate(v, self.spec.op, &self.spec.threshold));
        let fire = now && (!self.spec.edge || !self.last);
        self.last = now;
        if !fire {
            return Ok(None);
        }
        Ok(Event::new(self.spec.emit.as_str(), format!("monitor:{}", self.spec.id)).ok())
    }
}
