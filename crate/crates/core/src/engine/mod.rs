//! The configurator: matches events to configuration ids, applies them in
//! four phases (resolve, pre, changes, post) and answers with a status event.

mod report;
mod stack;
mod worker;

use std::collections::{HashSet, VecDeque};
use std::sync::MutexGuard;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::dsl::{check_targets, Change, ChangeKind, Configuration, ConfiguratorConf, IssueClass, ModelRef, Projection, Subject};
use crate::event::Event;
use crate::runtime::{
    CallOutcome, CallPlan, LifecycleState, Registry, RegistryError, SharedRegistry, TypeCatalog,
};
use crate::value::Value;

pub use report::{ApplyReport, ChangeResult, ChangeStatus, Outcome, Phase};
pub use stack::{Inverse, StackEntry};
pub use worker::{spawn_worker, ConfiguratorHandle};

pub const SOURCE: &str = "configurator";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("unknown configuration `{0}`")]
    UnknownConfiguration(String),
    #[error("configuration stack is empty")]
    EmptyStack,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    /// Status event name templates; `{id}` is replaced by the configuration id.
    pub applied_template: String,
    pub failed_template: String,
    pub queue_capacity: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            applied_template: "conf.applied.{id}".into(),
            failed_template: "conf.failed.{id}".into(),
            queue_capacity: 64,
        }
    }
}

/// How the engine waits out a blocking operation.
pub trait Blocker: Send {
    /// Returns false if the wait was interrupted.
    fn block(&mut self, d: Duration) -> bool;
}

/// Does not wait; blocked time is only accounted in the report. Used by the
/// deterministic runner, which advances logical time instead.
#[derive(Debug, Default)]
pub struct LogicalBlocker;

impl Blocker for LogicalBlocker {
    fn block(&mut self, _d: Duration) -> bool {
        true
    }
}

/// Sleeps the calling thread; the registry is not held while sleeping.
#[derive(Debug, Default)]
pub struct SleepBlocker;

impl Blocker for SleepBlocker {
    fn block(&mut self, d: Duration) -> bool {
        std::thread::sleep(d);
        true
    }
}

/// Sleeps until the duration elapses or the paired sender is dropped.
pub struct InterruptibleBlocker {
    pub shutdown: crossbeam_channel::Receiver<()>,
}

impl Blocker for InterruptibleBlocker {
    fn block(&mut self, d: Duration) -> bool {
        matches!(
            self.shutdown.recv_timeout(d),
            Err(crossbeam_channel::RecvTimeoutError::Timeout)
        )
    }
}

pub struct Configurator {
    conf: ConfiguratorConf,
    registry: SharedRegistry,
    catalog: TypeCatalog,
    config: EngineConfig,
    queue: VecDeque<String>,
    stack: Vec<StackEntry>,
    blocker: Box<dyn Blocker>,
}

fn lock(reg: &SharedRegistry) -> MutexGuard<'_, Registry> {
    // a panic elsewhere must not take the configurator down with it
    reg.lock().unwrap_or_else(|e| e.into_inner())
}

/// Changes are applied create-first, destroy-last so that deployment changes
/// in one configuration compose; within a stage declaration order is kept.
fn stage(kind: ChangeKind) -> u8 {
    match kind {
        ChangeKind::ComponentCreate => 0,
        ChangeKind::ConnectionCreate => 1,
        ChangeKind::PropertySet | ChangeKind::PortWrite | ChangeKind::OperationCall => 2,
        ChangeKind::ConnectionRemove => 3,
        ChangeKind::ComponentDestroy => 4,
    }
}

struct Plan {
    pre: Vec<(String, LifecycleState)>,
    post: Vec<(String, LifecycleState)>,
}

impl Configurator {
    pub fn new(
        conf: ConfiguratorConf,
        registry: SharedRegistry,
        catalog: TypeCatalog,
        config: EngineConfig,
    ) -> Self {
        Configurator {
            conf,
            registry,
            catalog,
            config: EngineConfig {
                queue_capacity: config.queue_capacity.max(1),
                ..config
            },
            queue: VecDeque::new(),
            stack: Vec::new(),
            blocker: Box::new(LogicalBlocker),
        }
    }

    pub fn with_blocker(mut self, blocker: Box<dyn Blocker>) -> Self {
        self.blocker = blocker;
        self
    }

    pub fn conf(&self) -> &ConfiguratorConf {
        &self.conf
    }

    pub fn registry(&self) -> &SharedRegistry {
        &self.registry
    }

    pub fn engine_config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    pub fn stack(&self) -> &[StackEntry] {
        &self.stack
    }

    pub fn status_event(&self, report: &ApplyReport) -> Event {
        let template = match report.outcome {
            Outcome::Applied => &self.config.applied_template,
            Outcome::Failed => &self.config.failed_template,
        };
        let name = template.replace("{id}", &report.config_id);
        let ev = Event::new(name, SOURCE).expect("configuration ids are valid event name segments");
        match &report.error {
            Some(detail) if report.outcome == Outcome::Failed => ev.with_payload(Value::Str(detail.clone())),
            _ => ev,
        }
    }

    /// Schedules the configuration named by `e`, if any. Events that match no
    /// configuration are ignored. Returns an immediate failure status when the
    /// queue is full.
    pub fn on_event(&mut self, e: &Event) -> Option<Event> {
        if !self.conf.contains(e.name()) {
            return None;
        }
        if self.queue.len() >= self.config.queue_capacity {
            let mut r = ApplyReport::new(e.name());
            r.fail("queue full");
            return Some(self.status_event(&r));
        }
        self.queue.push_back(e.name().to_string());
        None
    }

    /// Applies the oldest queued configuration to completion.
    pub fn step(&mut self) -> Option<(ApplyReport, Event)> {
        let id = self.queue.pop_front()?;
        let config = self.conf.get(&id).expect("only known ids are queued").clone();
        let report = self.apply_configuration(&id, &config);
        let ev = self.status_event(&report);
        Some((report, ev))
    }

    fn resolve(&self, config: &Configuration, report: &mut ApplyReport) -> Option<Plan> {
        let reg = lock(&self.registry);
        let model = ModelRef {
            registry: &reg,
            catalog: &self.catalog,
        };
        let unresolved: Vec<String> = check_targets(config, model)
            .into_iter()
            .filter(|i| i.class == IssueClass::Unresolved)
            .map(|i| i.message)
            .collect();
        if !unresolved.is_empty() {
            report.fail(unresolved.join("; "));
            return None;
        }
        let proj = Projection::new(model, config);
        // `_default` covers components not named explicitly in either list
        let mentioned: HashSet<&str> = config
            .pre
            .iter()
            .chain(&config.post)
            .filter_map(|e| match &e.subject {
                Subject::Component(id) => Some(id.as_str()),
                Subject::Default => None,
            })
            .collect();
        let expand = |list: &[crate::dsl::LifecycleSpecEntry], population: Vec<String>| {
            let mut plan: Vec<(String, LifecycleState)> = list
                .iter()
                .filter_map(|e| match &e.subject {
                    Subject::Component(id) => Some((id.clone(), e.target)),
                    Subject::Default => None,
                })
                .collect();
            if let Some(d) = list.iter().find(|e| e.subject == Subject::Default) {
                plan.extend(
                    population
                        .into_iter()
                        .filter(|id| !mentioned.contains(id.as_str()))
                        .map(|id| (id, d.target)),
                );
            }
            plan
        };
        Some(Plan {
            pre: expand(&config.pre, proj.initial_ids()),
            post: expand(&config.post, proj.final_ids()),
        })
    }

    fn run_lifecycle(&self, plan: &[(String, LifecycleState)], report: &mut ApplyReport) -> bool {
        for (id, target) in plan {
            let mut reg = lock(&self.registry);
            if let Err(e) = reg.bring_to(id, *target) {
                report.fail(e.to_string());
                return false;
            }
        }
        true
    }

    fn apply_change(&mut self, ch: &Change, report: &mut ApplyReport) -> Result<(), String> {
        let mut reg = lock(&self.registry);
        let second = || ch.second().unwrap_or_default().to_string();
        let res: Result<(), RegistryError> = match ch.kind {
            ChangeKind::PropertySet => reg.set_property(&ch.target, ch.args[0].clone()),
            ChangeKind::PortWrite => reg.write_port(&ch.target, ch.args[0].clone()),
            ChangeKind::OperationCall => match reg.call_operation(&ch.target, &ch.args) {
                Ok(CallPlan::Done(CallOutcome::Success)) => Ok(()),
                Ok(CallPlan::Done(CallOutcome::Failure(msg))) => return Err(msg),
                Ok(CallPlan::Block(d)) => {
                    drop(reg);
                    report.blocked += d;
                    return if self.blocker.block(d) {
                        Ok(())
                    } else {
                        Err(format!("{}: interrupted while blocked", ch.target))
                    };
                }
                Err(e) => Err(e),
            },
            ChangeKind::ComponentCreate => {
                let ty = second();
                match self.catalog.get(&ty) {
                    Some(t) => reg.component_create(&ch.target, &ty, t),
                    None => return Err(format!("unknown component type `{ty}`")),
                }
            }
            ChangeKind::ComponentDestroy => reg.component_destroy(&ch.target),
            ChangeKind::ConnectionCreate => reg.connection_create(&ch.target, &second()),
            ChangeKind::ConnectionRemove => reg.connection_remove(&ch.target, &second()),
        };
        res.map_err(|e| e.to_string())
    }

    /// Applies `config` in four phases. Nothing is touched unless every
    /// target resolves; after that the first failure stops the application
    /// without rolling back what was already done.
    pub fn apply_configuration(&mut self, id: &str, config: &Configuration) -> ApplyReport {
        let start = Instant::now();
        let mut report = ApplyReport::new(id);
        self.apply_inner(config, &mut report);
        report.wall = start.elapsed();
        log::debug!("configuration {}", report.trace_detail());
        report
    }

    fn apply_inner(&mut self, config: &Configuration, report: &mut ApplyReport) {
        let Some(plan) = self.resolve(config, report) else { return };

        report.phase = Phase::Pre;
        if !self.run_lifecycle(&plan.pre, report) {
            return;
        }

        report.phase = Phase::Changes;
        let mut order: Vec<usize> = (0..config.changes.len()).collect();
        order.sort_by_key(|&i| stage(config.changes[i].kind));
        for i in order {
            let ch = &config.changes[i];
            let res = self.apply_change(ch, report);
            let status = match &res {
                Ok(()) => ChangeStatus::Done,
                Err(e) => ChangeStatus::Failed(e.clone()),
            };
            report.changes.push(ChangeResult {
                index: i,
                kind: ch.kind,
                target: ch.target.clone(),
                status,
            });
            if let Err(e) = res {
                report.fail(e);
                return;
            }
        }

        report.phase = Phase::Post;
        self.run_lifecycle(&plan.post, report);
    }

    /// Applies a configuration by id.
    pub fn apply(&mut self, id: &str) -> Result<ApplyReport, EngineError> {
        let config = self
            .conf
            .get(id)
            .ok_or_else(|| EngineError::UnknownConfiguration(id.to_string()))?
            .clone();
        Ok(self.apply_configuration(id, &config))
    }

    /// Records the prior state, applies the configuration and pushes it on
    /// the undo stack if it applied.
    pub fn push_configuration(&mut self, id: &str) -> Result<ApplyReport, EngineError> {
        let config = self
            .conf
            .get(id)
            .ok_or_else(|| EngineError::UnknownConfiguration(id.to_string()))?
            .clone();
        let (before, touched_ports) = {
            let reg = lock(&self.registry);
            let mut ports = Vec::new();
            for ch in config.changes.iter().filter(|c| c.kind == ChangeKind::PortWrite) {
                ports.push(ch.target.clone());
                if let Ok((comp, port)) = crate::runtime::split_path(&ch.target) {
                    ports.extend(reg.connected_inputs(comp, port).iter().map(|p| p.to_string()));
                }
            }
            (reg.take_snapshot(), ports)
        };

        let report = self.apply_configuration(id, &config);
        if !report.is_applied() {
            return Ok(report);
        }

        let after = lock(&self.registry).take_snapshot();
        let mut inverse = Inverse::default();
        for (cid, c) in &before.components {
            if after.lifecycle(cid).is_some_and(|s| s != c.lifecycle) {
                inverse.lifecycles.push((cid.clone(), c.lifecycle));
            }
        }
        let mut seen = HashSet::new();
        for ch in &config.changes {
            match ch.kind {
                ChangeKind::PropertySet => {
                    if let Ok((comp, name)) = crate::runtime::split_path(&ch.target) {
                        if let Some(v) = before.property(comp, name) {
                            inverse.properties.push((ch.target.clone(), v.clone()));
                        }
                    }
                }
                ChangeKind::PortWrite => {}
                _ => inverse.not_invertible.push(ch.clone()),
            }
        }
        for target in touched_ports {
            if !seen.insert(target.clone()) {
                continue;
            }
            if let Ok((comp, port)) = crate::runtime::split_path(&target) {
                if before.components.contains_key(comp) {
                    inverse.ports.push((target.clone(), before.port(comp, port).cloned()));
                }
            }
        }
        self.stack.push(StackEntry {
            config_id: id.to_string(),
            inverse,
            snapshot_before: before,
        });
        Ok(report)
    }

    /// Undoes the most recent push. Operation calls and deployment changes
    /// are skipped with a warning.
    pub fn pop_configuration(&mut self) -> Result<ApplyReport, EngineError> {
        let entry = self.stack.pop().ok_or(EngineError::EmptyStack)?;
        let start = Instant::now();
        let mut report = ApplyReport::new(&entry.config_id);
        for ch in &entry.inverse.not_invertible {
            report.warnings.push(format!("{ch} has no inverse; skipped"));
            report.changes.push(ChangeResult {
                index: report.changes.len(),
                kind: ch.kind,
                target: ch.target.clone(),
                status: ChangeStatus::Skipped("not invertible".into()),
            });
        }

        report.phase = Phase::Changes;
        {
            let mut reg = lock(&self.registry);
            let mut failure = None;
            for (target, v) in &entry.inverse.properties {
                match reg.set_property(target, v.clone()) {
                    Err(RegistryError::UnknownComponent(c)) => {
                        report.warnings.push(format!("component `{c}` no longer exists; {target} not restored"))
                    }
                    Err(e) => {
                        failure = Some(e.to_string());
                        break;
                    }
                    Ok(()) => {}
                }
            }
            if failure.is_none() {
                for (target, v) in &entry.inverse.ports {
                    match reg.restore_port(target, v.clone()) {
                        Err(RegistryError::UnknownComponent(c)) => report
                            .warnings
                            .push(format!("component `{c}` no longer exists; {target} not restored")),
                        Err(e) => {
                            failure = Some(e.to_string());
                            break;
                        }
                        Ok(()) => {}
                    }
                }
            }
            if let Some(e) = failure {
                report.fail(e);
                report.wall = start.elapsed();
                return Ok(report);
            }
        }

        report.phase = Phase::Post;
        let mut plan = Vec::new();
        {
            let reg = lock(&self.registry);
            for (id, state) in &entry.inverse.lifecycles {
                if reg.component(id).is_some() {
                    plan.push((id.clone(), *state));
                } else {
                    report.warnings.push(format!("component `{id}` no longer exists; lifecycle not restored"));
                }
            }
        }
        self.run_lifecycle(&plan, &mut report);
        report.wall = start.elapsed();
        Ok(report)
    }
}

#[cfg(test)]
mod tests;
