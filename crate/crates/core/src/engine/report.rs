use std::fmt;
use std::time::Duration;

use crate::dsl::ChangeKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Phase {
    Resolve,
    Pre,
    Changes,
    Post,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Resolve => "resolve",
            Phase::Pre => "pre",
            Phase::Changes => "changes",
            Phase::Post => "post",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Applied,
    Failed,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Applied => "applied",
            Outcome::Failed => "failed",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChangeStatus {
    Done,
    Failed(String),
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChangeResult {
    /// Position of the change in the configuration's declaration order.
    pub index: usize,
    pub kind: ChangeKind,
    pub target: String,
    pub status: ChangeStatus,
}

/// Result of applying (or undoing) one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ApplyReport {
    pub config_id: String,
    pub outcome: Outcome,
    /// Last phase entered. `Post` together with `Applied` means complete.
    pub phase: Phase,
    pub error: Option<String>,
    /// Changes in the order they were attempted.
    pub changes: Vec<ChangeResult>,
    pub warnings: Vec<String>,
    pub wall: Duration,
    /// Time spent waiting on blocking operations.
    pub blocked: Duration,
}

impl ApplyReport {
    pub(crate) fn new(config_id: &str) -> Self {
        ApplyReport {
            config_id: config_id.to_string(),
            outcome: Outcome::Applied,
            phase: Phase::Resolve,
            error: None,
            changes: Vec::new(),
            warnings: Vec::new(),
            wall: Duration::ZERO,
            blocked: Duration::ZERO,
        }
    }

    pub fn is_applied(&self) -> bool {
        self.outcome == Outcome::Applied
    }

    pub(crate) fn fail(&mut self, detail: impl Into<String>) {
        self.outcome = Outcome::Failed;
        self.error = Some(detail.into());
    }

    /// `<id> <applied|failed> phase=<p> detail=<msg>`, the body of a CONF
    /// trace record.
    pub fn trace_detail(&self) -> String {
        let detail = match (&self.error, self.warnings.is_empty()) {
            (Some(e), _) => e.clone(),
            (None, false) => format!("{} warning(s)", self.warnings.len()),
            (None, true) => "-".into(),
        };
        format!("{} {} phase={} detail={}", self.config_id, self.outcome, self.phase, detail)
    }
}
