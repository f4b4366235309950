use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Runtime stage of a component.
///
/// `PreOperational <-> Stopped <-> Running` via configure/cleanup and
/// start/stop. `Fatal` is only reached through an injected crash.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LifecycleState {
    PreOperational,
    Stopped,
    Running,
    Fatal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LifecycleCommand {
    Configure,
    Start,
    Stop,
    Cleanup,
}

impl LifecycleState {
    pub const OPERATIONAL: [LifecycleState; 3] = [
        LifecycleState::PreOperational,
        LifecycleState::Stopped,
        LifecycleState::Running,
    ];

    fn rank(self) -> Option<u8> {
        match self {
            LifecycleState::PreOperational => Some(0),
            LifecycleState::Stopped => Some(1),
            LifecycleState::Running => Some(2),
            LifecycleState::Fatal => None,
        }
    }

    /// The state reached by `cmd`, or `None` if the command is not legal here.
    pub fn after(self, cmd: LifecycleCommand) -> Option<LifecycleState> {
        use LifecycleCommand::*;
        use LifecycleState::*;
        match (self, cmd) {
            (PreOperational, Configure) => Some(Stopped),
            (Stopped, Start) => Some(Running),
            (Running, Stop) => Some(Stopped),
            (Stopped, Cleanup) => Some(PreOperational),
            _ => None,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            LifecycleState::PreOperational => "preoperational",
            LifecycleState::Stopped => "stopped",
            LifecycleState::Running => "running",
            LifecycleState::Fatal => "fatal",
        }
    }
}

impl fmt::Display for LifecycleState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown lifecycle state {0:?}")]
pub struct UnknownLifecycleState(pub String);

impl FromStr for LifecycleState {
    type Err = UnknownLifecycleState;

    /// Accepts the lowercase keywords; `configure` is the target reached by
    /// the configure command and therefore means `stopped`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "preoperational" => Ok(LifecycleState::PreOperational),
            "stopped" | "configure" => Ok(LifecycleState::Stopped),
            "running" => Ok(LifecycleState::Running),
            "fatal" => Ok(LifecycleState::Fatal),
            _ => Err(UnknownLifecycleState(s.to_string())),
        }
    }
}

impl fmt::Display for LifecycleCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LifecycleCommand::Configure => "configure",
            LifecycleCommand::Start => "start",
            LifecycleCommand::Stop => "stop",
            LifecycleCommand::Cleanup => "cleanup",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("no lifecycle path to or from the fatal state")]
pub struct FatalEndpoint;

/// Shortest command sequence that moves a component from `from` to `to`.
pub fn compute_lifecycle_path(
    from: LifecycleState,
    to: LifecycleState,
) -> Result<Vec<LifecycleCommand>, FatalEndpoint> {
    let (a, b) = match (from.rank(), to.rank()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(FatalEndpoint),
    };
    let up = [LifecycleCommand::Configure, LifecycleCommand::Start];
    let down = [LifecycleCommand::Cleanup, LifecycleCommand::Stop];
    Ok(if a <= b {
        up[a as usize..b as usize].to_vec()
    } else {
        down[b as usize..a as usize].iter().rev().copied().collect()
    })
}
