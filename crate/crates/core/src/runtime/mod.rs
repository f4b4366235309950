//! Simulated component framework: components with lifecycle, properties,
//! depth-1 data-flow ports and callable operations, plus connections and
//! fault injection.

mod lifecycle;
mod snapshot;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::value::{Value, ValueKind};

pub use lifecycle::{
    compute_lifecycle_path, FatalEndpoint, LifecycleCommand, LifecycleState, UnknownLifecycleState,
};
pub use snapshot::{ComponentSnapshot, SystemSnapshot};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegistryError {
    #[error("unknown component {0:?}")]
    UnknownComponent(String),
    #[error("unknown port {0:?}")]
    UnknownPort(String),
    #[error("unknown property {0:?}")]
    UnknownProperty(String),
    #[error("unknown operation {0:?}")]
    UnknownOperation(String),
    #[error("component {component:?}: illegal transition {command} from {current}")]
    IllegalTransition {
        component: String,
        current: LifecycleState,
        command: LifecycleCommand,
    },
    #[error("component {0:?} is fatal")]
    ComponentFatal(String),
    #[error("{target}: kind mismatch, expected {expected}, found {found}")]
    KindMismatch {
        target: String,
        expected: ValueKind,
        found: ValueKind,
    },
    #[error("{target}: expected {expected} arguments, got {found}")]
    ArityMismatch {
        target: String,
        expected: usize,
        found: usize,
    },
    #[error("component id {0:?} already exists")]
    DuplicateId(String),
    #[error("component {0:?} must be stopped before it is destroyed")]
    DestroyWhileRunning(String),
    #[error("unknown connection {0}")]
    UnknownConnection(String),
    #[error("connection {0} already exists")]
    DuplicateConnection(String),
    #[error("malformed target {0:?}, expected <component>.<name>")]
    BadPath(String),
    #[error("{0:?} is declared twice")]
    DuplicateDeclaration(String),
}

pub type Result<T, E = RegistryError> = std::result::Result<T, E>;

/// Splits `comp.member` at its single dot.
pub fn split_path(path: &str) -> Result<(&str, &str)> {
    match path.split_once('.') {
        Some((c, m)) if !c.is_empty() && !m.is_empty() && !m.contains('.') => Ok((c, m)),
        _ => Err(RegistryError::BadPath(path.to_string())),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PortRef {
    pub component: String,
    pub port: String,
}

impl PortRef {
    pub fn parse(path: &str) -> Result<PortRef> {
        let (component, port) = split_path(path)?;
        Ok(PortRef {
            component: component.to_string(),
            port: port.to_string(),
        })
    }
}

impl fmt::Display for PortRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.component, self.port)
    }
}

/// Directed data-flow link from an out-port to an in-port.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Connection {
    pub from: PortRef,
    pub to: PortRef,
}

impl fmt::Display for Connection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.from, self.to)
    }
}

/// Fault-injection knob for an operation.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum OpBehavior {
    #[default]
    Succeed,
    Fail(String),
    Block(Duration),
    Crash,
}

impl fmt::Display for OpBehavior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpBehavior::Succeed => f.write_str("succeed"),
            OpBehavior::Fail(m) => write!(f, "fail {m:?}"),
            OpBehavior::Block(d) => write!(f, "block {}", d.as_millis()),
            OpBehavior::Crash => f.write_str("crash"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperationSpec {
    pub name: String,
    pub arity: usize,
    pub behavior: OpBehavior,
}

impl OperationSpec {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        OperationSpec {
            name: name.into(),
            arity,
            behavior: OpBehavior::Succeed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CallOutcome {
    Success,
    Failure(String),
}

/// What the caller must do to finish an operation call. Blocking is left to
/// the caller so the registry is never held while an operation waits.
#[derive(Debug, Clone, PartialEq)]
pub enum CallPlan {
    Done(CallOutcome),
    Block(Duration),
}

/// Declarations used to instantiate a component of some type.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComponentTemplate {
    pub properties: Vec<(String, Value)>,
    pub in_ports: Vec<String>,
    pub out_ports: Vec<String>,
    pub operations: Vec<OperationSpec>,
}

/// Component types known to deployment changes, keyed by type name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TypeCatalog {
    types: BTreeMap<String, ComponentTemplate>,
}

impl TypeCatalog {
    pub fn insert(&mut self, type_name: impl Into<String>, template: ComponentTemplate) {
        self.types.insert(type_name.into(), template);
    }

    pub fn get(&self, type_name: &str) -> Option<&ComponentTemplate> {
        self.types.get(type_name)
    }

    pub fn contains(&self, type_name: &str) -> bool {
        self.types.contains_key(type_name)
    }

    pub fn type_names(&self) -> impl Iterator<Item = &str> {
        self.types.keys().map(String::as_str)
    }
}

#[derive(Debug, Clone, Default)]
struct Port {
    kind: Option<ValueKind>,
    value: Option<Value>,
}

#[derive(Debug, Clone)]
struct Property {
    kind: ValueKind,
    value: Value,
}

#[derive(Debug, Clone)]
pub struct Component {
    id: String,
    type_name: String,
    lifecycle: LifecycleState,
    properties: IndexMap<String, Property>,
    in_ports: IndexMap<String, Port>,
    out_ports: IndexMap<String, Port>,
    operations: IndexMap<String, OperationSpec>,
}

impl Component {
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn type_name(&self) -> &str {
        &self.type_name
    }

    pub fn lifecycle(&self) -> LifecycleState {
        self.lifecycle
    }

    pub fn property(&self, name: &str) -> Option<&Value> {
        self.properties.get(name).map(|p| &p.value)
    }

    pub fn property_kind(&self, name: &str) -> Option<ValueKind> {
        self.properties.get(name).map(|p| p.kind)
    }

    pub fn has_in_port(&self, name: &str) -> bool {
        self.in_ports.contains_key(name)
    }

    pub fn has_out_port(&self, name: &str) -> bool {
        self.out_ports.contains_key(name)
    }

    pub fn has_port(&self, name: &str) -> bool {
        self.has_in_port(name) || self.has_out_port(name)
    }

    pub fn port(&self, name: &str) -> Option<&Value> {
        self.in_ports
            .get(name)
            .or_else(|| self.out_ports.get(name))
            .and_then(|p| p.value.as_ref())
    }

    pub fn operation(&self, name: &str) -> Option<&OperationSpec> {
        self.operations.get(name)
    }

    fn port_mut(&mut self, name: &str) -> Option<&mut Port> {
        match self.out_ports.get_mut(name) {
            Some(p) => Some(p),
            None => self.in_ports.get_mut(name),
        }
    }

    fn snapshot(&self) -> ComponentSnapshot {
        let ports = |m: &IndexMap<String, Port>| {
            m.iter().map(|(k, p)| (k.clone(), p.value.clone())).collect()
        };
        ComponentSnapshot {
            type_name: self.type_name.clone(),
            lifecycle: self.lifecycle,
            properties: self
                .properties
                .iter()
                .map(|(k, p)| (k.clone(), p.value.clone()))
                .collect(),
            in_ports: ports(&self.in_ports),
            out_ports: ports(&self.out_ports),
        }
    }
}

/// The set of live components and connections.
///
/// Mutations take `&mut self`; wrap it in [`SharedRegistry`] to serialize
/// access from several threads.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    components: IndexMap<String, Component>,
    connections: BTreeSet<Connection>,
}

pub type SharedRegistry = Arc<Mutex<Registry>>;

fn kind_check(target: &str, expected: ValueKind, v: &Value) -> Result<Value> {
    v.coerce_to(expected).ok_or_else(|| RegistryError::KindMismatch {
        target: target.to_string(),
        expected,
        found: v.kind(),
    })
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn into_shared(self) -> SharedRegistry {
        Arc::new(Mutex::new(self))
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn component(&self, id: &str) -> Option<&Component> {
        self.components.get(id)
    }

    pub fn components(&self) -> impl Iterator<Item = &Component> {
        self.components.values()
    }

    pub fn connections(&self) -> impl Iterator<Item = &Connection> {
        self.connections.iter()
    }

    fn get(&self, id: &str) -> Result<&Component> {
        self.components
            .get(id)
            .ok_or_else(|| RegistryError::UnknownComponent(id.to_string()))
    }

    fn get_mut(&mut self, id: &str) -> Result<&mut Component> {
        self.components
            .get_mut(id)
            .ok_or_else(|| RegistryError::UnknownComponent(id.to_string()))
    }

    pub fn component_create(&mut self, id: &str, type_name: &str, decl: &ComponentTemplate) -> Result<()> {
        if self.components.contains_key(id) {
            return Err(RegistryError::DuplicateId(id.to_string()));
        }
        if id.is_empty() || id.contains('.') {
            return Err(RegistryError::BadPath(id.to_string()));
        }
        let mut c = Component {
            id: id.to_string(),
            type_name: type_name.to_string(),
            lifecycle: LifecycleState::PreOperational,
            properties: IndexMap::new(),
            in_ports: IndexMap::new(),
            out_ports: IndexMap::new(),
            operations: IndexMap::new(),
        };
        let dup = |name: &str| RegistryError::DuplicateDeclaration(format!("{id}.{name}"));
        for (name, value) in &decl.properties {
            let p = Property {
                kind: value.kind(),
                value: value.clone(),
            };
            if c.properties.insert(name.clone(), p).is_some() {
                return Err(dup(name));
            }
        }
        for name in decl.in_ports.iter().chain(&decl.out_ports) {
            if c.in_ports.contains_key(name) || c.out_ports.contains_key(name) {
                return Err(dup(name));
            }
            if decl.in_ports.contains(name) {
                c.in_ports.insert(name.clone(), Port::default());
            } else {
                c.out_ports.insert(name.clone(), Port::default());
            }
        }
        for op in &decl.operations {
            if c.operations.insert(op.name.clone(), op.clone()).is_some() {
                return Err(dup(&op.name));
            }
        }
        self.components.insert(id.to_string(), c);
        Ok(())
    }

    pub fn component_destroy(&mut self, id: &str) -> Result<()> {
        let c = self.get(id)?;
        if c.lifecycle == LifecycleState::Running {
            return Err(RegistryError::DestroyWhileRunning(id.to_string()));
        }
        self.components.shift_remove(id);
        self.connections
            .retain(|c| c.from.component != id && c.to.component != id);
        Ok(())
    }

    pub fn connection_create(&mut self, from: &str, to: &str) -> Result<()> {
        let from = PortRef::parse(from)?;
        let to = PortRef::parse(to)?;
        if !self.get(&from.component)?.has_out_port(&from.port) {
            return Err(RegistryError::UnknownPort(from.to_string()));
        }
        if !self.get(&to.component)?.has_in_port(&to.port) {
            return Err(RegistryError::UnknownPort(to.to_string()));
        }
        let conn = Connection { from, to };
        if self.connections.contains(&conn) {
            return Err(RegistryError::DuplicateConnection(conn.to_string()));
        }
        self.connections.insert(conn);
        Ok(())
    }

    pub fn connection_remove(&mut self, from: &str, to: &str) -> Result<()> {
        let conn = Connection {
            from: PortRef::parse(from)?,
            to: PortRef::parse(to)?,
        };
        if !self.connections.remove(&conn) {
            return Err(RegistryError::UnknownConnection(conn.to_string()));
        }
        Ok(())
    }

    pub fn lifecycle_command(&mut self, id: &str, cmd: LifecycleCommand) -> Result<LifecycleState> {
        let c = self.get_mut(id)?;
        if c.lifecycle == LifecycleState::Fatal {
            return Err(RegistryError::ComponentFatal(id.to_string()));
        }
        let next = c.lifecycle.after(cmd).ok_or(RegistryError::IllegalTransition {
            component: id.to_string(),
            current: c.lifecycle,
            command: cmd,
        })?;
        c.lifecycle = next;
        Ok(next)
    }

    /// Walks the shortest command path to `target`.
    pub fn bring_to(&mut self, id: &str, target: LifecycleState) -> Result<LifecycleState> {
        let current = self.get(id)?.lifecycle;
        let path = compute_lifecycle_path(current, target)
            .map_err(|_| RegistryError::ComponentFatal(id.to_string()))?;
        let mut state = current;
        for cmd in path {
            state = self.lifecycle_command(id, cmd)?;
        }
        Ok(state)
    }

    /// In-ports fed by the out-port `comp.port`.
    pub fn connected_inputs(&self, comp: &str, port: &str) -> Vec<PortRef> {
        self.connections
            .iter()
            .filter(|c| c.from.component == comp && c.from.port == port)
            .map(|c| c.to.clone())
            .collect()
    }

    /// Replaces a port's last value; out-port writes propagate to every
    /// connected in-port. Nothing is written unless every destination accepts
    /// the value's kind.
    pub fn write_port(&mut self, target: &str, v: Value) -> Result<()> {
        let (comp, port) = split_path(target)?;
        let c = self.get(comp)?;
        let is_out = c.has_out_port(port);
        if !is_out && !c.has_in_port(port) {
            return Err(RegistryError::UnknownPort(target.to_string()));
        }
        let mut dests = vec![PortRef {
            component: comp.to_string(),
            port: port.to_string(),
        }];
        if is_out {
            dests.extend(self.connected_inputs(comp, port));
        }
        let mut writes = Vec::with_capacity(dests.len());
        for d in &dests {
            let p = self.port_ref(d)?;
            let value = match p.kind {
                Some(k) => kind_check(&d.to_string(), k, &v)?,
                None => v.clone(),
            };
            writes.push(value);
        }
        for (d, value) in dests.iter().zip(writes) {
            let p = self.get_mut(&d.component)?.port_mut(&d.port).expect("checked above");
            p.kind = Some(value.kind());
            p.value = Some(value);
        }
        Ok(())
    }

    fn port_ref(&self, r: &PortRef) -> Result<&Port> {
        let c = self.get(&r.component)?;
        c.out_ports
            .get(&r.port)
            .or_else(|| c.in_ports.get(&r.port))
            .ok_or_else(|| RegistryError::UnknownPort(r.to_string()))
    }

    /// Restores a port's raw last value without propagation. `None` returns
    /// the port to its never-written state.
    pub fn restore_port(&mut self, target: &str, prior: Option<Value>) -> Result<()> {
        let (comp, port) = split_path(target)?;
        let p = self
            .get_mut(comp)?
            .port_mut(port)
            .ok_or_else(|| RegistryError::UnknownPort(target.to_string()))?;
        p.kind = prior.as_ref().map(Value::kind);
        p.value = prior;
        Ok(())
    }

    pub fn read_port(&self, target: &str) -> Result<Option<&Value>> {
        let (comp, port) = split_path(target)?;
        let c = self.get(comp)?;
        if !c.has_port(port) {
            return Err(RegistryError::UnknownPort(target.to_string()));
        }
        Ok(c.port(port))
    }

    pub fn set_property(&mut self, target: &str, v: Value) -> Result<()> {
        let (comp, name) = split_path(target)?;
        let p = self
            .get_mut(comp)?
            .properties
            .get_mut(name)
            .ok_or_else(|| RegistryError::UnknownProperty(target.to_string()))?;
        p.value = kind_check(target, p.kind, &v)?;
        Ok(())
    }

    pub fn get_property(&self, target: &str) -> Result<&Value> {
        let (comp, name) = split_path(target)?;
        self.get(comp)?
            .property(name)
            .ok_or_else(|| RegistryError::UnknownProperty(target.to_string()))
    }

    pub fn set_behavior(&mut self, target: &str, behavior: OpBehavior) -> Result<()> {
        let (comp, name) = split_path(target)?;
        let op = self
            .get_mut(comp)?
            .operations
            .get_mut(name)
            .ok_or_else(|| RegistryError::UnknownOperation(target.to_string()))?;
        op.behavior = behavior;
        Ok(())
    }

    /// Starts an operation call. A `Block` plan must be waited out by the
    /// caller, after which the call counts as a success.
    pub fn call_operation(&mut self, target: &str, args: &[Value]) -> Result<CallPlan> {
        let (comp, name) = split_path(target)?;
        let c = self.get_mut(comp)?;
        let op = c
            .operations
            .get(name)
            .ok_or_else(|| RegistryError::UnknownOperation(target.to_string()))?;
        if op.arity != args.len() {
            return Err(RegistryError::ArityMismatch {
                target: target.to_string(),
                expected: op.arity,
                found: args.len(),
            });
        }
        if c.lifecycle == LifecycleState::Fatal {
            return Err(RegistryError::ComponentFatal(comp.to_string()));
        }
        Ok(match op.behavior.clone() {
            OpBehavior::Succeed => CallPlan::Done(CallOutcome::Success),
            OpBehavior::Fail(msg) => CallPlan::Done(CallOutcome::Failure(msg)),
            OpBehavior::Block(d) => CallPlan::Block(d),
            OpBehavior::Crash => {
                c.lifecycle = LifecycleState::Fatal;
                CallPlan::Done(CallOutcome::Failure(format!("{target} crashed")))
            }
        })
    }

    pub fn take_snapshot(&self) -> SystemSnapshot {
        SystemSnapshot {
            components: self
                .components
                .iter()
                .map(|(id, c)| (id.clone(), c.snapshot()))
                .collect(),
            connections: self.connections.clone(),
        }
    }
}
