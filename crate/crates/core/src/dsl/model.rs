use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::diag::Pos;
use crate::runtime::LifecycleState;
use crate::value::Value;

pub const DEFAULT_SUBJECT: &str = "_default";

/// Who a lifecycle entry applies to.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", from = "String")]
pub enum Subject {
    /// Every component not otherwise mentioned in the same list.
    Default,
    Component(String),
}

impl From<String> for Subject {
    fn from(s: String) -> Self {
        if s == DEFAULT_SUBJECT {
            Subject::Default
        } else {
            Subject::Component(s)
        }
    }
}

impl From<Subject> for String {
    fn from(s: Subject) -> Self {
        s.to_string()
    }
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Default => f.write_str(DEFAULT_SUBJECT),
            Subject::Component(id) => f.write_str(id),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LifecycleSpecEntry {
    pub subject: Subject,
    pub target: LifecycleState,
}

impl LifecycleSpecEntry {
    pub fn new(subject: impl Into<String>, target: LifecycleState) -> Self {
        LifecycleSpecEntry {
            subject: Subject::from(subject.into()),
            target,
        }
    }
}

impl fmt::Display for LifecycleSpecEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.subject, self.target)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChangeKind {
    PropertySet,
    PortWrite,
    OperationCall,
    ComponentCreate,
    ComponentDestroy,
    ConnectionCreate,
    ConnectionRemove,
}

impl ChangeKind {
    pub const ALL: [ChangeKind; 7] = [
        ChangeKind::PropertySet,
        ChangeKind::PortWrite,
        ChangeKind::OperationCall,
        ChangeKind::ComponentCreate,
        ChangeKind::ComponentDestroy,
        ChangeKind::ConnectionCreate,
        ChangeKind::ConnectionRemove,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            ChangeKind::PropertySet => "property_set",
            ChangeKind::PortWrite => "port_write",
            ChangeKind::OperationCall => "operation_call",
            ChangeKind::ComponentCreate => "component_create",
            ChangeKind::ComponentDestroy => "component_destroy",
            ChangeKind::ConnectionCreate => "connection_create",
            ChangeKind::ConnectionRemove => "connection_remove",
        }
    }

    pub fn is_deployment(self) -> bool {
        matches!(
            self,
            ChangeKind::ComponentCreate
                | ChangeKind::ComponentDestroy
                | ChangeKind::ConnectionCreate
                | ChangeKind::ConnectionRemove
        )
    }

    /// Kinds whose target is a `component.member` path.
    pub fn is_dotted(self) -> bool {
        matches!(
            self,
            ChangeKind::PropertySet | ChangeKind::PortWrite | ChangeKind::OperationCall
        )
    }
}

impl FromStr for ChangeKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        ChangeKind::ALL.into_iter().find(|k| k.keyword() == s).ok_or(())
    }
}

impl fmt::Display for ChangeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// One platform-specific change. `pos` is source metadata and does not take
/// part in equality.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Change {
    pub kind: ChangeKind,
    pub target: String,
    pub args: Vec<Value>,
    #[serde(skip)]
    pub pos: Pos,
}

impl PartialEq for Change {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.target == other.target && self.args == other.args
    }
}

impl Change {
    pub fn new(kind: ChangeKind, target: impl Into<String>, args: Vec<Value>) -> Self {
        Change {
            kind,
            target: target.into(),
            args,
            pos: Pos::default(),
        }
    }

    pub fn property_set(target: &str, v: Value) -> Self {
        Change::new(ChangeKind::PropertySet, target, vec![v])
    }

    pub fn port_write(target: &str, v: Value) -> Self {
        Change::new(ChangeKind::PortWrite, target, vec![v])
    }

    pub fn operation_call(target: &str, args: Vec<Value>) -> Self {
        Change::new(ChangeKind::OperationCall, target, args)
    }

    pub fn component_create(id: &str, type_name: &str) -> Self {
        Change::new(ChangeKind::ComponentCreate, id, vec![Value::from(type_name)])
    }

    pub fn component_destroy(id: &str) -> Self {
        Change::new(ChangeKind::ComponentDestroy, id, vec![])
    }

    pub fn connection_create(from: &str, to: &str) -> Self {
        Change::new(ChangeKind::ConnectionCreate, from, vec![Value::from(to)])
    }

    pub fn connection_remove(from: &str, to: &str) -> Self {
        Change::new(ChangeKind::ConnectionRemove, from, vec![Value::from(to)])
    }

    /// The single value carried by property_set and port_write.
    pub fn value(&self) -> Option<&Value> {
        match self.kind {
            ChangeKind::PropertySet | ChangeKind::PortWrite => self.args.first(),
            _ => None,
        }
    }

    /// Second string argument: the type name of component_create or the
    /// destination endpoint of connection changes.
    pub fn second(&self) -> Option<&str> {
        match self.args.first() {
            Some(Value::Str(s)) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Change {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}", self.kind, Value::Str(self.target.clone()))?;
        for a in &self.args {
            write!(f, ", {a}")?;
        }
        f.write_str(")")
    }
}

/// A named description of one system state: lifecycle specs applied before
/// and after an unordered set of changes.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Configuration {
    pub pre: Vec<LifecycleSpecEntry>,
    pub post: Vec<LifecycleSpecEntry>,
    pub changes: Vec<Change>,
    #[serde(skip)]
    pub pos: Pos,
}

impl PartialEq for Configuration {
    fn eq(&self, other: &Self) -> bool {
        self.pre == other.pre && self.post == other.post && self.changes == other.changes
    }
}

impl Configuration {
    pub fn with_changes(changes: Vec<Change>) -> Self {
        Configuration {
            changes,
            ..Default::default()
        }
    }

    pub fn has_operation_calls(&self) -> bool {
        self.changes.iter().any(|c| c.kind == ChangeKind::OperationCall)
    }

    pub fn has_deployment_changes(&self) -> bool {
        self.changes.iter().any(|c| c.kind.is_deployment())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConfiguratorConf {
    pub configurations: IndexMap<String, Configuration>,
}

impl ConfiguratorConf {
    pub fn get(&self, id: &str) -> Option<&Configuration> {
        self.configurations.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.configurations.contains_key(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.configurations.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.configurations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configurations.is_empty()
    }
}

pub fn is_valid_config_id(id: &str) -> bool {
    let mut chars = id.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}
