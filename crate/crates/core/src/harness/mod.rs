//! Scenario harness: loads the three model files, replays a timed scenario
//! either deterministically (one context, logical time) or with each part on
//! its own thread, and records a trace.

mod det;
mod scenario;
mod sysmodel;
mod threaded;
mod trace;

use std::fmt;
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use crate::diag::Diagnostic;
use crate::dsl::{check_targets, parse_configurator_conf, validate, ConfiguratorConf, ModelRef};
use crate::fsm::{parse_statechart, StatechartSpec};
use crate::runtime::{split_path, Registry, SystemSnapshot};
use crate::value::Value;

pub use scenario::{Action, Directive, Scenario};
pub use sysmodel::{ComponentDecl, SystemModel};
pub use trace::{parse_trace, render_trace, TraceKind, TraceParseError, TraceRecord};

/// Source name of events injected by a scenario.
pub const SCENARIO_SOURCE: &str = "scenario";

/// Diagnostics for one input file.
#[derive(Debug, Clone, PartialEq)]
pub struct FileDiagnostics {
    pub file: String,
    pub diagnostics: Vec<Diagnostic>,
}

impl FileDiagnostics {
    pub fn render(&self) -> String {
        self.diagnostics
            .iter()
            .map(|d| format!("{}\n", d.render(&self.file)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadError {
    pub files: Vec<FileDiagnostics>,
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for fd in &self.files {
            f.write_str(&fd.render())?;
        }
        Ok(())
    }
}

impl std::error::Error for LoadError {}

impl LoadError {
    fn single(file: &str, d: Diagnostic) -> Self {
        LoadError {
            files: vec![FileDiagnostics {
                file: file.to_string(),
                diagnostics: vec![d],
            }],
        }
    }
}

/// Everything a run needs besides the scenario.
#[derive(Debug, Clone)]
pub struct Inputs {
    pub system: SystemModel,
    pub conf: ConfiguratorConf,
    pub chart: Arc<StatechartSpec>,
    /// Non-fatal diagnostics, per file.
    pub warnings: Vec<FileDiagnostics>,
}

pub fn read_file(path: &Path) -> Result<String, LoadError> {
    std::fs::read_to_string(path).map_err(|e| {
        LoadError::single(&path.display().to_string(), Diagnostic::error(Default::default(), e.to_string()))
    })
}

/// A named input text.
#[derive(Debug, Clone, Copy)]
pub struct Source<'a> {
    pub name: &'a str,
    pub text: &'a str,
}

/// Whatever parsed, plus all diagnostics, for any subset of the input files.
#[derive(Debug, Clone, Default)]
pub struct Checked {
    pub system: Option<SystemModel>,
    pub conf: Option<ConfiguratorConf>,
    pub chart: Option<StatechartSpec>,
    pub errors: Vec<FileDiagnostics>,
    pub warnings: Vec<FileDiagnostics>,
}

impl Checked {
    fn push(&mut self, file: &str, diags: Vec<Diagnostic>) {
        let (errs, warns): (Vec<_>, Vec<_>) = diags.into_iter().partition(Diagnostic::is_error);
        for (list, diagnostics) in [(&mut self.errors, errs), (&mut self.warnings, warns)] {
            if !diagnostics.is_empty() {
                list.push(FileDiagnostics {
                    file: file.to_string(),
                    diagnostics,
                });
            }
        }
    }
}

/// Parses the given files and validates the configurations against the
/// system model when both are present.
pub fn check_sources(system: Option<Source<'_>>, conf: Option<Source<'_>>, fsm: Option<Source<'_>>) -> Checked {
    let mut out = Checked::default();
    let mut registry = None;
    if let Some(src) = system {
        match SystemModel::parse(src.text) {
            Ok(m) => {
                match m.build_registry() {
                    Ok(r) => registry = Some(r),
                    Err(d) => out.push(src.name, d),
                }
                out.system = Some(m);
            }
            Err(d) => out.push(src.name, d),
        }
    }
    if let Some(src) = fsm {
        match parse_statechart(src.text) {
            Ok(c) => out.chart = Some(c),
            Err(d) => out.push(src.name, d),
        }
    }
    let Some(src) = conf else { return out };
    let conf = match parse_configurator_conf(src.text) {
        Ok(c) => c,
        Err(d) => {
            out.push(src.name, d);
            return out;
        }
    };
    let diags = match (&out.system, &registry) {
        (Some(system), Some(registry)) => {
            let catalog = system.catalog();
            let model = ModelRef {
                registry,
                catalog: &catalog,
            };
            if conf.configurations.values().any(|c| c.has_deployment_changes()) {
                // configurations may depend on components created or removed
                // by earlier ones, so unresolved targets are only suspicious
                let mut diags = validate(&conf, None);
                for (id, c) in &conf.configurations {
                    diags.extend(
                        check_targets(c, model)
                            .into_iter()
                            .map(|i| Diagnostic::warning(i.pos, format!("{id}: {}", i.message))),
                    );
                }
                diags
            } else {
                validate(&conf, Some(model))
            }
        }
        _ => validate(&conf, None),
    };
    out.push(src.name, diags);
    out.conf = Some(conf);
    out
}

impl Inputs {
    /// Parses and cross-validates the three files. `names` label the
    /// diagnostics (system, conf, fsm).
    pub fn parse(texts: [&str; 3], names: [&str; 3]) -> Result<Inputs, LoadError> {
        let src = |i: usize| Some(Source { name: names[i], text: texts[i] });
        let checked = check_sources(src(0), src(1), src(2));
        match checked {
            Checked {
                system: Some(system),
                conf: Some(conf),
                chart: Some(chart),
                errors,
                warnings,
            } if errors.is_empty() => Ok(Inputs {
                system,
                conf,
                chart: Arc::new(chart),
                warnings,
            }),
            c => Err(LoadError { files: c.errors }),
        }
    }

    pub fn load(system: &Path, conf: &Path, fsm: &Path) -> Result<Inputs, LoadError> {
        let texts = [read_file(system)?, read_file(conf)?, read_file(fsm)?];
        let names = [system, conf, fsm].map(|p| p.display().to_string());
        Inputs::parse(
            [&texts[0], &texts[1], &texts[2]],
            [&names[0], &names[1], &names[2]],
        )
    }

    pub fn build_registry(&self) -> Registry {
        self.system.build_registry().expect("checked when the inputs were parsed")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Deterministic,
    Threaded,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Threaded mode only: how long shutdown may take before the run is
    /// declared stuck.
    pub watchdog: Duration,
    /// Threaded mode only: how long an expectation may take to come true.
    pub expect_window: Duration,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            watchdog: Duration::from_secs(5),
            expect_window: Duration::from_millis(100),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trace: Vec<TraceRecord>,
    /// One line per failed expectation or runner problem.
    pub failures: Vec<String>,
    pub final_snapshot: SystemSnapshot,
}

impl RunOutput {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn trace_text(&self) -> String {
        render_trace(&self.trace)
    }
}

pub fn run_scenario(inputs: &Inputs, scenario: &Scenario, mode: Mode) -> RunOutput {
    run_scenario_with(inputs, scenario, mode, &RunOptions::default())
}

pub fn run_scenario_with(inputs: &Inputs, scenario: &Scenario, mode: Mode, opts: &RunOptions) -> RunOutput {
    match mode {
        Mode::Deterministic => det::run(inputs, scenario),
        Mode::Threaded => threaded::run(inputs, scenario, opts),
    }
}

/// What expectations are checked against.
pub(crate) struct Observation<'a> {
    pub fsm_path: &'a str,
    pub registry: &'a Registry,
    pub seen: &'a dyn Fn(&str) -> bool,
}

fn matches_value(expected: &Value, actual: &Value) -> bool {
    let expected = expected.coerce_to(actual.kind()).unwrap_or_else(|| expected.clone());
    expected.approx_eq(actual, 1e-9)
}

/// Checks one expectation. On failure returns the observed value.
pub(crate) fn check_expectation(action: &Action, obs: &Observation<'_>) -> Result<(), String> {
    let fail = |actual: String| Err(format!("actual={actual}"));
    match action {
        Action::Inject { .. } => Ok(()),
        Action::ExpectFsm(path) => {
            // `copying` also matches `copying/five_DOF_mode`
            let active: Vec<&str> = obs.fsm_path.split('/').collect();
            let want: Vec<&str> = path.split('/').collect();
            if active.starts_with(&want) {
                Ok(())
            } else {
                fail(obs.fsm_path.to_string())
            }
        }
        Action::ExpectLifecycle(id, state) => match obs.registry.component(id) {
            Some(c) if c.lifecycle() == *state => Ok(()),
            Some(c) => fail(c.lifecycle().keyword().to_string()),
            None => fail("no such component".into()),
        },
        Action::ExpectProp(target, v) => match obs.registry.get_property(target) {
            Ok(actual) if matches_value(v, actual) => Ok(()),
            Ok(actual) => fail(actual.to_string()),
            Err(e) => fail(e.to_string()),
        },
        Action::ExpectPort(target, v) => match (obs.registry.read_port(target), v) {
            (Ok(None), None) => Ok(()),
            (Ok(Some(actual)), Some(v)) if matches_value(v, actual) => Ok(()),
            (Ok(actual), _) => fail(actual.map_or("absent".into(), Value::to_string)),
            (Err(e), _) => fail(e.to_string()),
        },
        Action::ExpectEvent(name) => {
            if (obs.seen)(name) {
                Ok(())
            } else {
                fail("not delivered".into())
            }
        }
        Action::ExpectNoEvent(name) => {
            if (obs.seen)(name) {
                fail("delivered".into())
            } else {
                Ok(())
            }
        }
    }
}

/// True if `target` names something a monitor can watch.
pub(crate) fn watchable(registry: &Registry, target: &str) -> bool {
    split_path(target)
        .ok()
        .and_then(|(c, n)| registry.component(c).map(|c| c.property(n).is_some() || c.has_port(n)))
        .unwrap_or(false)
}

fn transition_detail(from: &str, to: &str, event: Option<&str>, raised: &[crate::event::Event]) -> String {
    let raised: Vec<&str> = raised.iter().map(|e| e.name()).collect();
    match event {
        Some(e) => format!("{from} -> {to} on {e} raise=[{}]", raised.join(",")),
        None => format!("{from} -> {to} raise=[{}]", raised.join(",")),
    }
}
