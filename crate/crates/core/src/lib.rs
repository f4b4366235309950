//! Coordinator/Configurator runtime.
//!
//! A pure statechart coordinator decides *what* should happen by raising
//! events; a configurator decides *how* by applying named, declarative
//! configurations to a set of (simulated) components and reporting the
//! outcome as status events.
//!
//! - [`runtime`]: components, lifecycle, ports, properties, operations.
//! - [`dsl`]: the configuration language.
//! - [`engine`]: the configurator and its undo stack.
//! - [`fsm`]: the hierarchical statechart coordinator.
//! - [`monitor`]: threshold monitors that turn state into events.
//! - [`harness`]: system model files, scenarios, traces and the runners.

pub mod diag;
pub mod dsl;
pub mod engine;
pub mod event;
pub mod fsm;
pub mod harness;
mod lex;
pub mod monitor;
pub mod runtime;
pub mod value;

pub use diag::{Diagnostic, Pos, Severity};
pub use dsl::{parse_configurator_conf, Change, ChangeKind, Configuration, ConfiguratorConf};
pub use engine::{ApplyReport, Configurator, EngineConfig, Outcome, Phase};
pub use event::Event;
pub use fsm::{parse_statechart, Coordinator, StatechartSpec};
pub use harness::{run_scenario, Mode, RunOutput, SystemModel};
pub use monitor::MonitorSpec;
pub use runtime::{LifecycleState, Registry, SharedRegistry, SystemSnapshot};
pub use value::Value;
