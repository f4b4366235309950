use super::*;
use crate::dsl::parse_configurator_conf;
use crate::runtime::{ComponentTemplate, OpBehavior, OperationSpec};

const YOUBOT_CONF: &str = r#"
ConfiguratorConf {
   disable_copying = Configuration{
       port_write("Cart_Impedance.ext_ref_mode", false)
   },
   enable_copying = Configuration {
       port_write("Cart_Impedance.ext_ref_mode", true)
   },
   eight_DOF = Configuration {
      property_set("Dynamics.force_gain", {0.1, 0.1, 0.1})
   },
   five_DOF = Configuration {
      property_set("Dynamics.force_gain", {0, 0, 0})
   },
}
"#;

fn youbot_registry() -> Registry {
    let mut r = Registry::new();
    r.component_create(
        "Cart_Impedance",
        "impedance",
        &ComponentTemplate {
            in_ports: vec!["ext_ref_mode".into()],
            out_ports: vec!["desired_force".into()],
            ..Default::default()
        },
    )
    .unwrap();
    r.component_create(
        "Dynamics",
        "dynamics",
        &ComponentTemplate {
            properties: vec![("force_gain".into(), Value::Array(vec![Value::Real(0.1); 3]))],
            in_ports: vec!["desired_force".into()],
            ..Default::default()
        },
    )
    .unwrap();
    r.connection_create("Cart_Impedance.desired_force", "Dynamics.desired_force").unwrap();
    r
}

fn youbot_engine() -> Configurator {
    Configurator::new(
        parse_configurator_conf(YOUBOT_CONF).unwrap(),
        youbot_registry().into_shared(),
        TypeCatalog::default(),
        EngineConfig::default(),
    )
}

fn ev(name: &str) -> Event {
    Event::new(name, "test").unwrap()
}

fn snap(e: &Configurator) -> crate::runtime::SystemSnapshot {
    e.registry().lock().unwrap().take_snapshot()
}

#[test]
fn enable_copying_event_writes_port_and_reports() {
    let mut e = youbot_engine();
    assert_eq!(e.on_event(&ev("enable_copying")), None);
    let (report, status) = e.step().unwrap();
    assert!(report.is_applied());
    assert_eq!(report.phase, Phase::Post);
    assert_eq!(status.name(), "conf.applied.enable_copying");
    assert_eq!(snap(&e).port("Cart_Impedance", "ext_ref_mode"), Some(&Value::Bool(true)));
}

#[test]
fn five_dof_sets_zero_gain() {
    let mut e = youbot_engine();
    e.on_event(&ev("five_DOF"));
    let (_, status) = e.step().unwrap();
    assert_eq!(status.name(), "conf.applied.five_DOF");
    assert_eq!(
        snap(&e).property("Dynamics", "force_gain"),
        Some(&Value::Array(vec![Value::Real(0.0); 3]))
    );
}

#[test]
fn unknown_events_are_ignored() {
    let mut e = youbot_engine();
    let before = snap(&e);
    assert_eq!(e.on_event(&ev("no_such_config")), None);
    assert!(e.step().is_none());
    assert_eq!(snap(&e), before);
}

#[test]
fn queue_is_fifo_and_bounded() {
    let mut e = Configurator::new(
        parse_configurator_conf(YOUBOT_CONF).unwrap(),
        youbot_registry().into_shared(),
        TypeCatalog::default(),
        EngineConfig {
            queue_capacity: 2,
            ..Default::default()
        },
    );
    assert!(e.on_event(&ev("enable_copying")).is_none());
    assert!(e.on_event(&ev("five_DOF")).is_none());
    let full = e.on_event(&ev("eight_DOF")).unwrap();
    assert_eq!(full.name(), "conf.failed.eight_DOF");
    assert_eq!(full.payload(), Some(&Value::Str("queue full".into())));
    assert_eq!(e.step().unwrap().0.config_id, "enable_copying");
    assert_eq!(e.step().unwrap().0.config_id, "five_DOF");
    assert!(e.step().is_none());
}

fn sample_engine() -> Configurator {
    let conf = parse_configurator_conf(
        r#"ConfiguratorConf { c1 = Configuration {
            pre_conf_state = { 'compA:running', 'compB:configure', '_default:stopped' },
            post_conf_state = { _default='running' },
            property_set("compA.prop1", { 2.3, 3.4, 5.34 } ),
            port_write("compB.portX", 33.4),
            operation_call("compG.op1", 'arg1', 'arg2'),
        } }"#,
    )
    .unwrap();
    let mut r = Registry::new();
    r.component_create(
        "compA",
        "a",
        &ComponentTemplate {
            properties: vec![("prop1".into(), Value::Array(vec![Value::Real(0.0); 3]))],
            ..Default::default()
        },
    )
    .unwrap();
    r.component_create(
        "compB",
        "b",
        &ComponentTemplate {
            in_ports: vec!["portX".into()],
            ..Default::default()
        },
    )
    .unwrap();
    r.component_create(
        "compG",
        "g",
        &ComponentTemplate {
            operations: vec![OperationSpec::new("op1", 2)],
            ..Default::default()
        },
    )
    .unwrap();
    r.component_create("compH", "h", &ComponentTemplate::default()).unwrap();
    Configurator::new(conf, r.into_shared(), TypeCatalog::default(), EngineConfig::default())
}

#[test]
fn sample_lifecycle_semantics() {
    let mut e = sample_engine();
    let report = e.apply("c1").unwrap();
    assert!(report.is_applied(), "{report:?}");
    let s = snap(&e);
    assert_eq!(s.lifecycle("compA"), Some(LifecycleState::Running));
    assert_eq!(s.lifecycle("compB"), Some(LifecycleState::Stopped));
    assert_eq!(s.lifecycle("compG"), Some(LifecycleState::Running));
    assert_eq!(s.lifecycle("compH"), Some(LifecycleState::Running));
    assert_eq!(s.port("compB", "portX"), Some(&Value::Real(33.4)));
    assert_eq!(report.changes.len(), 3);
}

#[test]
fn pre_runs_before_changes_and_post_after() {
    // compG's op crashes: pre must already have happened, post must not
    let mut e = sample_engine();
    e.registry()
        .lock()
        .unwrap()
        .set_behavior("compG.op1", OpBehavior::Crash)
        .unwrap();
    let report = e.apply("c1").unwrap();
    assert_eq!(report.outcome, Outcome::Failed);
    assert_eq!(report.phase, Phase::Changes);
    let s = snap(&e);
    assert_eq!(s.lifecycle("compA"), Some(LifecycleState::Running));
    assert_eq!(s.lifecycle("compH"), Some(LifecycleState::Stopped));
    assert_eq!(s.lifecycle("compG"), Some(LifecycleState::Fatal));
    // applied changes are not rolled back
    assert_eq!(s.port("compB", "portX"), Some(&Value::Real(33.4)));
}

#[test]
fn empty_configuration_is_identity() {
    let mut e = youbot_engine();
    let before = snap(&e);
    let report = e.apply_configuration("noop", &Configuration::default());
    assert!(report.is_applied());
    assert_eq!(snap(&e), before);
}

#[test]
fn ghost_target_fails_at_resolve_without_side_effects() {
    let mut e = youbot_engine();
    let before = snap(&e);
    let config = Configuration::with_changes(vec![
        Change::port_write("Cart_Impedance.ext_ref_mode", Value::Bool(true)),
        Change::property_set("ghost.gain", Value::Real(1.0)),
    ]);
    let report = e.apply_configuration("bad", &config);
    assert_eq!(report.outcome, Outcome::Failed);
    assert_eq!(report.phase, Phase::Resolve);
    assert!(report.error.unwrap().contains("ghost"));
    assert_eq!(snap(&e), before);
}

#[test]
fn push_pop_restores_previous_gain() {
    let mut e = youbot_engine();
    let before = snap(&e);
    let r = e.push_configuration("five_DOF").unwrap();
    assert!(r.is_applied());
    assert_eq!(e.stack().len(), 1);
    assert_eq!(
        e.stack()[0].inverse.properties,
        vec![("Dynamics.force_gain".to_string(), Value::Array(vec![Value::Real(0.1); 3]))]
    );
    let r = e.pop_configuration().unwrap();
    assert!(r.is_applied());
    assert_eq!(snap(&e), before);
    assert_eq!(e.pop_configuration(), Err(EngineError::EmptyStack));
}

#[test]
fn inverse_records_absent_port() {
    let mut e = youbot_engine();
    e.push_configuration("enable_copying").unwrap();
    assert_eq!(
        e.stack()[0].inverse.ports,
        vec![("Cart_Impedance.ext_ref_mode".to_string(), None)]
    );
    e.pop_configuration().unwrap();
    assert_eq!(snap(&e).port("Cart_Impedance", "ext_ref_mode"), None);
}

#[test]
fn failing_push_leaves_stack_alone() {
    let mut conf = parse_configurator_conf(YOUBOT_CONF).unwrap();
    conf.configurations.insert(
        "bad".into(),
        Configuration::with_changes(vec![Change::property_set("Dynamics.force_gain", Value::Bool(true))]),
    );
    let mut e = Configurator::new(conf, youbot_registry().into_shared(), TypeCatalog::default(), EngineConfig::default());
    let r = e.push_configuration("bad").unwrap();
    assert_eq!(r.outcome, Outcome::Failed);
    assert!(e.stack().is_empty());
    assert_eq!(
        e.push_configuration("nope"),
        Err(EngineError::UnknownConfiguration("nope".into()))
    );
}

#[test]
fn operation_calls_are_skipped_on_pop() {
    let mut e = sample_engine();
    e.push_configuration("c1").unwrap();
    let r = e.pop_configuration().unwrap();
    assert!(r.is_applied());
    assert_eq!(r.warnings.len(), 1);
    assert!(matches!(r.changes[0].status, ChangeStatus::Skipped(_)));
    // everything except the operation's effects is back
    let s = snap(&e);
    assert_eq!(s.lifecycle("compA"), Some(LifecycleState::PreOperational));
    assert_eq!(s.port("compB", "portX"), None);
}

#[test]
fn out_port_push_restores_propagated_inputs() {
    let mut conf = ConfiguratorConf::default();
    conf.configurations.insert(
        "force".into(),
        Configuration::with_changes(vec![Change::port_write(
            "Cart_Impedance.desired_force",
            Value::Real(3.0),
        )]),
    );
    let mut e = Configurator::new(conf, youbot_registry().into_shared(), TypeCatalog::default(), EngineConfig::default());
    let before = snap(&e);
    e.push_configuration("force").unwrap();
    assert_eq!(snap(&e).port("Dynamics", "desired_force"), Some(&Value::Real(3.0)));
    e.pop_configuration().unwrap();
    assert_eq!(snap(&e), before);
}

fn deployment_engine() -> Configurator {
    let conf = parse_configurator_conf(
        r#"ConfiguratorConf {
            boot = Configuration {
                post_conf_state = { _default = 'running' },
                component_create("src", "source"),
                component_create("dst", "sink"),
                connection_create("src.out", "dst.in"),
            },
            stop_all = Configuration { pre_conf_state = { '_default:stopped' } },
            destroy_all = Configuration {
                component_destroy("src"),
                component_destroy("dst"),
            },
            again = Configuration { component_create("src", "source") },
        }"#,
    )
    .unwrap();
    let mut cat = TypeCatalog::default();
    cat.insert(
        "source",
        ComponentTemplate {
            out_ports: vec!["out".into()],
            ..Default::default()
        },
    );
    cat.insert(
        "sink",
        ComponentTemplate {
            in_ports: vec!["in".into()],
            ..Default::default()
        },
    );
    Configurator::new(conf, Registry::new().into_shared(), cat, EngineConfig::default())
}

#[test]
fn bootstrap_and_two_step_shutdown() {
    let mut e = deployment_engine();
    let r = e.apply("boot").unwrap();
    assert!(r.is_applied(), "{r:?}");
    let s = snap(&e);
    assert_eq!(s.components.len(), 2);
    assert!(s.components.values().all(|c| c.lifecycle == LifecycleState::Running));
    assert_eq!(s.connections.len(), 1);

    let r = e.apply("destroy_all").unwrap();
    assert_eq!(r.outcome, Outcome::Failed);
    assert!(r.error.unwrap().contains("stopped before"));

    assert!(e.apply("stop_all").unwrap().is_applied());
    assert!(e.apply("destroy_all").unwrap().is_applied());
    assert!(snap(&e).components.is_empty());
}

#[test]
fn duplicate_create_fails() {
    let mut e = deployment_engine();
    e.apply("boot").unwrap();
    let r = e.apply("again").unwrap();
    assert_eq!(r.outcome, Outcome::Failed);
    assert_eq!(r.phase, Phase::Changes);
    assert!(r.error.unwrap().contains("already exists"));
}

#[test]
fn blocked_time_is_reported() {
    let mut e = sample_engine();
    e.registry()
        .lock()
        .unwrap()
        .set_behavior("compG.op1", OpBehavior::Block(Duration::from_millis(500)))
        .unwrap();
    let r = e.apply("c1").unwrap();
    assert!(r.is_applied());
    assert_eq!(r.blocked, Duration::from_millis(500));
}

#[test]
fn worker_thread_reports_status() {
    let e = youbot_engine();
    let registry = e.registry().clone();
    let (tx, rx) = crossbeam_channel::unbounded();
    let handle = spawn_worker(e, tx, |_| {});
    assert!(handle.on_event(&ev("enable_copying")).is_none());
    assert!(handle.on_event(&ev("unrelated")).is_none());
    let status = rx.recv_timeout(Duration::from_secs(5)).unwrap();
    assert_eq!(status.name(), "conf.applied.enable_copying");
    handle.shutdown().unwrap();
    assert_eq!(
        registry.lock().unwrap().read_port("Cart_Impedance.ext_ref_mode").unwrap(),
        Some(&Value::Bool(true))
    );
}
