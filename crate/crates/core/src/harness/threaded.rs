//! Threaded runner: the bus, the coordinator and the configurator each run
//! on their own thread and talk only through bounded queues. Trace times are
//! wall-clock milliseconds since the start of the run.

use std::collections::{HashSet, VecDeque};
use std::sync::{Arc, Mutex, MutexGuard};
use std::thread;
use std::time::{Duration, Instant};

use crossbeam_channel::{bounded, tick, Receiver, Select, Sender};

use super::{check_expectation, transition_detail, Action, Inputs, Observation, RunOptions, RunOutput, Scenario, TraceKind, TraceRecord, SCENARIO_SOURCE};
use crate::engine::{spawn_worker, Configurator, EngineConfig, InterruptibleBlocker};
use crate::event::Event;
use crate::fsm::{Coordinator, StatechartSpec};
use crate::monitor::Monitor;
use crate::runtime::SharedRegistry;

const QUEUE_CAPACITY: usize = 64;
const MONITOR_PERIOD: Duration = Duration::from_millis(10);
const POLL: Duration = Duration::from_millis(2);

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

struct Shared {
    start: Instant,
    trace: Mutex<Vec<TraceRecord>>,
    seen: Mutex<HashSet<String>>,
    fsm_path: Mutex<String>,
}

impl Shared {
    fn now_ms(&self) -> u64 {
        self.start.elapsed().as_millis() as u64
    }

    fn record(&self, kind: TraceKind, detail: String) {
        let mut trace = lock(&self.trace);
        // taken under the lock so times never decrease
        let time = self.now_ms();
        trace.push(TraceRecord::new(time, kind, detail));
    }
}

struct Bus {
    shared: Arc<Shared>,
    registry: SharedRegistry,
    monitors: Vec<Monitor>,
    to_coordinator: VecDeque<Event>,
}

impl Bus {
    fn dispatch(&mut self, e: Event, configurator: &crate::engine::ConfiguratorHandle) {
        self.shared.record(TraceKind::Event, e.to_string());
        lock(&self.shared.seen).insert(e.name().to_string());
        let immediate = configurator.on_event(&e);
        self.to_coordinator.push_back(e);
        if let Some(status) = immediate {
            self.dispatch(status, configurator);
        }
    }

    fn eval_monitors(&mut self) -> Vec<Event> {
        let reg = lock(&self.registry);
        let mut out = Vec::new();
        for m in &mut self.monitors {
            match m.eval(&reg) {
                Ok(Some(e)) => {
                    self.shared.record(TraceKind::Monitor, format!("{} emit {}", m.spec().id, e.name()));
                    out.push(e);
                }
                Ok(None) => {}
                Err(e) => log::warn!("{e}"),
            }
        }
        out
    }
}

fn bus_loop(
    mut bus: Bus,
    configurator: Configurator,
    inbound: (Sender<Event>, Receiver<Event>),
    to_coordinator: Sender<Event>,
    stop: Receiver<()>,
) {
    let (tx, rx) = inbound;
    let shared = Arc::clone(&bus.shared);
    let handle = spawn_worker(configurator, tx, move |r| shared.record(TraceKind::Conf, r.trace_detail()));
    let ticker = tick(MONITOR_PERIOD);
    loop {
        let mut sel = Select::new();
        let i_in = sel.recv(&rx);
        let i_tick = sel.recv(&ticker);
        let i_stop = sel.recv(&stop);
        let i_out = (!bus.to_coordinator.is_empty()).then(|| sel.send(&to_coordinator));
        let op = sel.select();
        match op.index() {
            i if i == i_in => match op.recv(&rx) {
                Ok(e) => bus.dispatch(e, &handle),
                Err(_) => break,
            },
            i if i == i_tick => {
                let _ = op.recv(&ticker);
                for e in bus.eval_monitors() {
                    bus.dispatch(e, &handle);
                }
            }
            i if i == i_stop => {
                let _ = op.recv(&stop);
                break;
            }
            i if Some(i) == i_out => {
                let e = bus.to_coordinator.pop_front().expect("selected only when non-empty");
                if op.send(&to_coordinator, e).is_err() {
                    break;
                }
            }
            _ => unreachable!("unknown select index"),
        }
    }
    // the worker may be waiting to hand us a status event
    drop(rx);
    handle.shutdown();
}

fn coordinator_loop(
    shared: Arc<Shared>,
    chart: Arc<StatechartSpec>,
    inbox: Receiver<Event>,
    bus: Sender<Event>,
    stop: Receiver<()>,
) {
    let mut coord = Coordinator::new(chart);
    let raised = coord.init();
    shared.record(
        TraceKind::Transition,
        transition_detail("(init)", &coord.active_path(), None, &raised),
    );
    *lock(&shared.fsm_path) = coord.active_path();
    let mut last_ms = shared.now_ms();
    let mut outbox: Vec<Event> = raised;
    loop {
        for e in outbox.drain(..) {
            if bus.send(e).is_err() {
                return;
            }
        }
        let mut sel = Select::new();
        let i_in = sel.recv(&inbox);
        let i_stop = sel.recv(&stop);
        let op = match coord.next_timer() {
            Some(d) => {
                let deadline = shared.start + Duration::from_millis(last_ms + d);
                sel.select_deadline(deadline).ok()
            }
            None => Some(sel.select()),
        };
        let event = match op {
            Some(op) if op.index() == i_in => match op.recv(&inbox) {
                Ok(e) => Some(e),
                Err(_) => return,
            },
            Some(op) if op.index() == i_stop => {
                let _ = op.recv(&stop);
                return;
            }
            Some(_) => unreachable!("unknown select index"),
            None => None,
        };
        let now = shared.now_ms();
        outbox.extend(coord.tick(now - last_ms));
        last_ms = now;
        if let Some(e) = event {
            let r = coord.step(&e);
            if let Some(f) = &r.fired {
                shared.record(
                    TraceKind::Transition,
                    transition_detail(&f.from, &f.to, Some(&f.event), &r.raised),
                );
                *lock(&shared.fsm_path) = coord.active_path();
            }
            outbox.extend(r.raised);
        }
    }
}

pub(super) fn run(inputs: &Inputs, scenario: &Scenario, opts: &RunOptions) -> RunOutput {
    let registry = inputs.build_registry().into_shared();
    let shared = Arc::new(Shared {
        start: Instant::now(),
        trace: Mutex::new(Vec::new()),
        seen: Mutex::new(HashSet::new()),
        fsm_path: Mutex::new(String::new()),
    });

    let (bus_tx, bus_rx) = bounded::<Event>(QUEUE_CAPACITY);
    let (coord_tx, coord_rx) = bounded::<Event>(QUEUE_CAPACITY);
    let (stop_tx, stop_rx) = bounded::<()>(0);
    let (interrupt_tx, interrupt_rx) = bounded::<()>(0);
    let (done_tx, done_rx) = bounded::<()>(2);

    let configurator = Configurator::new(
        inputs.conf.clone(),
        registry.clone(),
        inputs.system.catalog(),
        EngineConfig {
            queue_capacity: QUEUE_CAPACITY,
            ..EngineConfig::default()
        },
    )
    .with_blocker(Box::new(InterruptibleBlocker { shutdown: interrupt_rx }));
    let bus = Bus {
        shared: Arc::clone(&shared),
        registry: registry.clone(),
        monitors: inputs.system.monitors.iter().cloned().map(Monitor::new).collect(),
        to_coordinator: VecDeque::new(),
    };

    let bus_thread = {
        let (tx, stop, done) = (bus_tx.clone(), stop_rx.clone(), done_tx.clone());
        thread::Builder::new()
            .name("bus".into())
            .spawn(move || {
                bus_loop(bus, configurator, (tx, bus_rx), coord_tx, stop);
                let _ = done.send(());
            })
            .expect("spawn bus thread")
    };
    let coord_thread = {
        let (shared, chart, tx) = (Arc::clone(&shared), Arc::clone(&inputs.chart), bus_tx.clone());
        thread::Builder::new()
            .name("coordinator".into())
            .spawn(move || {
                coordinator_loop(shared, chart, coord_rx, tx, stop_rx);
                let _ = done_tx.send(());
            })
            .expect("spawn coordinator thread")
    };

    let mut failures = Vec::new();
    for t in scenario.times() {
        let at = shared.start + Duration::from_millis(t);
        if let Some(wait) = at.checked_duration_since(Instant::now()) {
            thread::sleep(wait);
        }
        for d in scenario.at(t) {
            if let Action::Inject { event, payload } = &d.action {
                let mut e = Event::new(event.as_str(), SCENARIO_SOURCE).expect("checked by the scenario parser");
                if let Some(p) = payload {
                    e = e.with_payload(p.clone());
                }
                if bus_tx.send(e).is_err() {
                    failures.push(format!("line {}: bus stopped before injection", d.line));
                }
            }
        }
        for d in scenario.at(t).filter(|d| d.action.is_expectation()) {
            let res = poll_expectation(&shared, &registry, &d.action, opts.expect_window);
            match res {
                Ok(()) => shared.record(TraceKind::Assert, format!("ok {}", d.action)),
                Err(actual) => {
                    failures.push(format!("line {}: @{} {}: {actual}", d.line, d.time, d.action));
                    shared.record(TraceKind::Assert, format!("FAIL {} {actual}", d.action));
                }
            }
        }
    }

    drop(interrupt_tx);
    drop(stop_tx);
    drop(bus_tx);
    let deadline = Instant::now() + opts.watchdog;
    let stopped = (0..2).all(|_| done_rx.recv_deadline(deadline).is_ok());
    if stopped {
        let _ = bus_thread.join();
        let _ = coord_thread.join();
    } else {
        failures.push(format!("watchdog: threads still running after {:?}", opts.watchdog));
    }

    let final_snapshot = lock(&registry).take_snapshot();
    let trace = lock(&shared.trace).clone();
    RunOutput {
        trace,
        failures,
        final_snapshot,
    }
}

/// Expectations may take a moment to come true on other threads; absence of
/// an event is only judged at the end of the window.
fn poll_expectation(shared: &Shared, registry: &SharedRegistry, action: &Action, window: Duration) -> Result<(), String> {
    let deadline = Instant::now() + window;
    let negative = matches!(action, Action::ExpectNoEvent(_));
    if negative {
        thread::sleep(window);
    }
    loop {
        let path = lock(&shared.fsm_path).clone();
        let res = {
            let reg = lock(registry);
            let seen = |n: &str| lock(&shared.seen).contains(n);
            check_expectation(
                action,
                &Observation {
                    fsm_path: &path,
                    registry: &reg,
                    seen: &seen,
                },
            )
        };
        if res.is_ok() || negative || Instant::now() >= deadline {
            return res;
        }
        thread::sleep(POLL);
    }
}
