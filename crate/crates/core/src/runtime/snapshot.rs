use std::collections::{BTreeMap, BTreeSet};

use super::{Connection, LifecycleState};
use crate::value::Value;

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentSnapshot {
    pub type_name: String,
    pub lifecycle: LifecycleState,
    pub properties: BTreeMap<String, Value>,
    pub in_ports: BTreeMap<String, Option<Value>>,
    pub out_ports: BTreeMap<String, Option<Value>>,
}

/// Deep, immutable copy of all observable registry state.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SystemSnapshot {
    pub components: BTreeMap<String, ComponentSnapshot>,
    pub connections: BTreeSet<Connection>,
}

impl SystemSnapshot {
    pub fn component_ids(&self) -> impl Iterator<Item = &str> {
        self.components.keys().map(String::as_str)
    }

    pub fn lifecycle(&self, id: &str) -> Option<LifecycleState> {
        self.components.get(id).map(|c| c.lifecycle)
    }

    pub fn property(&self, id: &str, name: &str) -> Option<&Value> {
        self.components.get(id)?.properties.get(name)
    }

    /// Last value of an in- or out-port; `None` if the port does not exist
    /// or was never written.
    pub fn port(&self, id: &str, name: &str) -> Option<&Value> {
        let c = self.components.get(id)?;
        c.in_ports
            .get(name)
            .or_else(|| c.out_ports.get(name))
            .and_then(Option::as_ref)
    }

    /// Human-readable list of differing fields, used in test failure messages.
    pub fn diff(&self, other: &SystemSnapshot) -> Vec<String> {
        let mut out = Vec::new();
        let ids: BTreeSet<&String> = self.components.keys().chain(other.components.keys()).collect();
        for id in ids {
            match (self.components.get(id), other.components.get(id)) {
                (Some(a), Some(b)) => {
                    if a.lifecycle != b.lifecycle {
                        out.push(format!("{id}: lifecycle {} vs {}", a.lifecycle, b.lifecycle));
                    }
                    diff_map(&mut out, id, &a.properties, &b.properties);
                    diff_map(&mut out, id, &a.in_ports, &b.in_ports);
                    diff_map(&mut out, id, &a.out_ports, &b.out_ports);
                }
                (Some(_), None) => out.push(format!("{id}: only in left")),
                (None, Some(_)) => out.push(format!("{id}: only in right")),
                (None, None) => {}
            }
        }
        for c in self.connections.symmetric_difference(&other.connections) {
            out.push(format!("connection {c} differs"));
        }
        out
    }
}

fn diff_map<V: PartialEq + std::fmt::Debug>(
    out: &mut Vec<String>,
    id: &str,
    a: &BTreeMap<String, V>,
    b: &BTreeMap<String, V>,
) {
    let keys: BTreeSet<&String> = a.keys().chain(b.keys()).collect();
    for k in keys {
        let (x, y) = (a.get(k), b.get(k));
        if x != y {
            out.push(format!("{id}.{k}: {x:?} vs {y:?}"));
        }
    }
}
