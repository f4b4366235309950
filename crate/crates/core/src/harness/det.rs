//! Deterministic runner: one context, logical milliseconds.
//!
//! At each logical time the runner injects the scenario's events and then
//! runs rounds until nothing is left to do. A round evaluates monitors (at
//! the first round and after every configuration), delivers every pending
//! event to the configurator and the coordinator, and applies at most one
//! queued configuration. Expectations are checked once the time is
//! quiescent. Time then jumps to the next directive, timer expiry or the end
//! of a blocking configuration, whichever is first. The run ends after the
//! last directive.

use std::collections::{HashSet, VecDeque};
use std::sync::MutexGuard;

use super::{check_expectation, transition_detail, Inputs, Observation, RunOutput, Scenario, TraceKind, TraceRecord, SCENARIO_SOURCE};
use crate::engine::{ApplyReport, Configurator, EngineConfig};
use crate::event::Event;
use crate::fsm::Coordinator;
use crate::monitor::Monitor;
use crate::runtime::{Registry, SharedRegistry};

/// Rounds allowed at one logical time before the run is declared livelocked.
const MAX_ROUNDS: usize = 10_000;

fn lock(r: &SharedRegistry) -> MutexGuard<'_, Registry> {
    r.lock().unwrap_or_else(|e| e.into_inner())
}

struct Runner {
    registry: SharedRegistry,
    configurator: Configurator,
    coordinator: Coordinator,
    monitors: Vec<Monitor>,
    trace: Vec<TraceRecord>,
    failures: Vec<String>,
    seen: HashSet<String>,
    pending: VecDeque<Event>,
    /// A configuration whose blocking operations end at the given time.
    in_flight: Option<(u64, ApplyReport, Event)>,
    now: u64,
}

impl Runner {
    fn record(&mut self, kind: TraceKind, detail: String) {
        self.trace.push(TraceRecord::new(self.now, kind, detail));
    }

    fn eval_monitors(&mut self) {
        let reg = lock(&self.registry);
        let mut fired = Vec::new();
        for m in &mut self.monitors {
            match m.eval(&reg) {
                Ok(Some(e)) => fired.push((m.spec().id.clone(), e)),
                Ok(None) => {}
                Err(e) => log::warn!("{e}"),
            }
        }
        drop(reg);
        for (id, e) in fired {
            self.record(TraceKind::Monitor, format!("{id} emit {}", e.name()));
            self.pending.push_back(e);
        }
    }

    fn deliver(&mut self, e: Event) {
        self.record(TraceKind::Event, e.to_string());
        self.seen.insert(e.name().to_string());
        if let Some(immediate) = self.configurator.on_event(&e) {
            self.pending.push_back(immediate);
        }
        let r = self.coordinator.step(&e);
        if let Some(f) = &r.fired {
            let detail = transition_detail(&f.from, &f.to, Some(&f.event), &r.raised);
            self.record(TraceKind::Transition, detail);
        }
        self.pending.extend(r.raised);
        let expired = self.coordinator.tick(0);
        self.pending.extend(expired);
    }

    fn finish(&mut self, report: ApplyReport, status: Event) {
        self.record(TraceKind::Conf, report.trace_detail());
        self.pending.push_back(status);
    }

    fn settle(&mut self) {
        let mut monitors_due = true;
        for _ in 0..MAX_ROUNDS {
            if monitors_due {
                self.eval_monitors();
                monitors_due = false;
            }
            while let Some(e) = self.pending.pop_front() {
                self.deliver(e);
            }
            if self.in_flight.is_none() {
                if let Some((report, status)) = self.configurator.step() {
                    monitors_due = true;
                    let blocked = report.blocked.as_millis() as u64;
                    if blocked > 0 {
                        self.in_flight = Some((self.now + blocked, report, status));
                    } else {
                        self.finish(report, status);
                    }
                    continue;
                }
            }
            if self.pending.is_empty() {
                return;
            }
        }
        self.failures.push(format!("@{}: no quiescence after {MAX_ROUNDS} rounds", self.now));
        self.pending.clear();
    }

    fn check(&mut self, scenario: &Scenario) {
        for d in scenario.at(self.now).filter(|d| d.action.is_expectation()) {
            let path = self.coordinator.active_path();
            let reg = lock(&self.registry);
            let seen = |n: &str| self.seen.contains(n);
            let obs = Observation {
                fsm_path: &path,
                registry: &reg,
                seen: &seen,
            };
            let res = check_expectation(&d.action, &obs);
            drop(reg);
            match res {
                Ok(()) => self.record(TraceKind::Assert, format!("ok {}", d.action)),
                Err(actual) => {
                    self.failures
                        .push(format!("line {}: @{} {}: {actual}", d.line, d.time, d.action));
                    self.record(TraceKind::Assert, format!("FAIL {} {actual}", d.action));
                }
            }
        }
    }
}

pub(super) fn run(inputs: &Inputs, scenario: &Scenario) -> RunOutput {
    let registry = inputs.build_registry().into_shared();
    let configurator = Configurator::new(
        inputs.conf.clone(),
        registry.clone(),
        inputs.system.catalog(),
        EngineConfig::default(),
    );
    let mut runner = Runner {
        registry,
        configurator,
        coordinator: Coordinator::new(inputs.chart.clone()),
        monitors: inputs.system.monitors.iter().cloned().map(Monitor::new).collect(),
        trace: Vec::new(),
        failures: Vec::new(),
        seen: HashSet::new(),
        pending: VecDeque::new(),
        in_flight: None,
        now: 0,
    };

    let raised = runner.coordinator.init();
    let detail = transition_detail("(init)", &runner.coordinator.active_path(), None, &raised);
    runner.record(TraceKind::Transition, detail);
    runner.pending.extend(raised);

    let times = scenario.times();
    let mut next_directive = times.iter().copied().peekable();
    loop {
        if next_directive.peek() == Some(&runner.now) {
            next_directive.next();
            for d in scenario.at(runner.now) {
                if let super::Action::Inject { event, payload } = &d.action {
                    let mut e = Event::new(event.as_str(), SCENARIO_SOURCE).expect("checked by the scenario parser");
                    if let Some(p) = payload {
                        e = e.with_payload(p.clone());
                    }
                    runner.pending.push_back(e);
                }
            }
        }
        runner.settle();
        runner.check(scenario);

        let Some(&directive_at) = next_directive.peek() else { break };
        let mut next = directive_at;
        if let Some(dt) = runner.coordinator.next_timer() {
            next = next.min(runner.now + dt);
        }
        if let Some((at, _, _)) = &runner.in_flight {
            next = next.min(*at);
        }
        let expired = runner.coordinator.tick(next - runner.now);
        runner.now = next;
        runner.pending.extend(expired);
        if runner.in_flight.as_ref().is_some_and(|(at, _, _)| *at == next) {
            let (_, report, status) = runner.in_flight.take().expect("checked");
            runner.finish(report, status);
        }
    }

    let final_snapshot = lock(&runner.registry).take_snapshot();
    RunOutput {
        trace: runner.trace,
        failures: runner.failures,
        final_snapshot,
    }
}
