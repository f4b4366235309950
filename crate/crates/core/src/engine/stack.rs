use crate::dsl::Change;
use crate::runtime::{LifecycleState, SystemSnapshot};
use crate::value::Value;

/// Prior state recorded when a configuration is pushed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Inverse {
    /// Components whose lifecycle the application changed, with their prior state.
    pub lifecycles: Vec<(String, LifecycleState)>,
    pub properties: Vec<(String, Value)>,
    /// `None` marks a port that had never been written.
    pub ports: Vec<(String, Option<Value>)>,
    /// Operation calls and deployment changes; these have no inverse.
    pub not_invertible: Vec<Change>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StackEntry {
    pub config_id: String,
    pub inverse: Inverse,
    pub snapshot_before: SystemSnapshot,
}
