//! The pure coordinator: a hierarchical statechart whose only actions are
//! raising events.

mod machine;
mod spec;

pub use machine::{Coordinator, Fired, StepResult, SOURCE};
pub use spec::{parse_statechart, StateId, StateSpec, StatechartSpec, TimerSpec, TransitionSpec};
