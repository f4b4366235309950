use std::path::{Path, PathBuf};

use coordconf::harness::{parse_trace, Inputs, Scenario, TraceKind};
use coordconf::{run_scenario, LifecycleState, Mode};

fn model(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models").join(name)
}

fn load(stem: &str) -> (Inputs, Scenario) {
    let inputs = Inputs::load(
        &model(&format!("{stem}.sys")),
        &model(&format!("{stem}.conf")),
        &model(&format!("{stem}.fsm")),
    )
    .unwrap();
    let text = std::fs::read_to_string(model(&format!("{stem}.scn"))).unwrap();
    (inputs, Scenario::parse(&text).unwrap())
}

#[test]
fn youbot_scenario_passes() {
    let (inputs, scenario) = load("youbot");
    let out = run_scenario(&inputs, &scenario, Mode::Deterministic);
    assert!(out.passed(), "{:?}", out.failures);
    assert_eq!(parse_trace(&out.trace_text()).unwrap(), out.trace);
}

#[test]
fn deploy_scenario_builds_and_tears_down() {
    let (inputs, scenario) = load("deploy");
    assert!(!inputs.warnings.is_empty(), "destroy targets do not exist up front");
    let out = run_scenario(&inputs, &scenario, Mode::Deterministic);
    assert!(out.passed(), "{:?}\n{}", out.failures, out.trace_text());
    assert_eq!(out.final_snapshot.components.len(), 0);
}

#[test]
fn empty_scenario_records_only_init() {
    let (inputs, _) = load("youbot");
    let out = run_scenario(&inputs, &Scenario::default(), Mode::Deterministic);
    assert!(out.passed());
    assert_eq!(out.trace_text(), "T=0 TRANSITION (init) -> unsync raise=[]\n");
}

#[test]
fn failed_expectation_is_reported() {
    let (inputs, _) = load("youbot");
    let scenario = Scenario::parse("@5 expect fsm copying\n@5 expect lifecycle Dynamics stopped").unwrap();
    let out = run_scenario(&inputs, &scenario, Mode::Deterministic);
    assert_eq!(out.failures.len(), 2);
    assert!(out.failures[0].contains("actual=unsync"), "{}", out.failures[0]);
    assert!(out.failures[1].contains("actual=running"), "{}", out.failures[1]);
    let asserts = out.trace.iter().filter(|r| r.kind == TraceKind::Assert).count();
    assert_eq!(asserts, 2);
}

#[test]
fn monitor_fires_on_edge_only() {
    let sys = "component A type t\noutport A.o\ncomponent B type u\ninport B.i\nconnect A.o -> B.i\n\
               monitor low watch B.i when lt 0.5 emit e_low edge\n";
    let conf = "ConfiguratorConf {\n small = Configuration { port_write(\"A.o\", {0.1, 0.1, 0.1}) },\n \
                big = Configuration { port_write(\"A.o\", {10, 0, 0}) },\n}";
    let fsm = "fsm m { initial a; state a { } state b { } transition a -> b on e_low; transition b -> a on e_reset; }";
    let inputs = Inputs::parse([sys, conf, fsm], ["s", "c", "f"]).unwrap();
    let scenario = Scenario::parse(
        "@10 inject small\n@10 expect fsm b\n@20 inject e_reset\n@20 inject small\n@20 expect fsm a\n\
         @30 inject big\n@40 inject small\n@40 expect fsm b\n",
    )
    .unwrap();
    let out = run_scenario(&inputs, &scenario, Mode::Deterministic);
    assert!(out.passed(), "{:?}\n{}", out.failures, out.trace_text());
    let fired: Vec<u64> = out
        .trace
        .iter()
        .filter(|r| r.kind == TraceKind::Monitor)
        .map(|r| r.time)
        .collect();
    assert_eq!(fired, [10, 40]);
}

#[test]
fn blocking_configuration_delays_status_in_logical_time() {
    let sys = "component W type w\noperation W.slow arity 0\nfault W.slow block 250\nlifecycle W running\n";
    let conf = "ConfiguratorConf { slow = Configuration { operation_call(\"W.slow\") } }";
    let fsm = "fsm m { initial a; state a { } state b { entry raise slow; after 100 raise e_late; } state c { } \
               transition a -> b on go; transition b -> c on e_late; transition c -> a on conf.applied.slow; }";
    let inputs = Inputs::parse([sys, conf, fsm], ["s", "c", "f"]).unwrap();
    let scenario = Scenario::parse(
        "@0 inject go\n@200 expect fsm c\n@200 expect no-event conf.applied.slow\n@300 expect fsm a\n",
    )
    .unwrap();
    let out = run_scenario(&inputs, &scenario, Mode::Deterministic);
    assert!(out.passed(), "{:?}\n{}", out.failures, out.trace_text());
    let conf = out.trace.iter().find(|r| r.kind == TraceKind::Conf).unwrap();
    assert_eq!(conf.time, 250);
    let late = out.trace.iter().find(|r| r.event_name() == Some("e_late")).unwrap();
    assert_eq!(late.time, 100);
}

#[test]
fn invalid_inputs_are_rejected_with_file_names() {
    let err = Inputs::parse(
        [
            "component A type t\nproperty A.p int = 1\n",
            "ConfiguratorConf { x = Configuration { property_set(\"A.p\", 1), property_set(\"A.p\", 2) } }",
            "fsm m { initial a; state a { } }",
        ],
        ["a.sys", "a.conf", "a.fsm"],
    )
    .unwrap_err();
    assert_eq!(err.files.len(), 1);
    assert_eq!(err.files[0].file, "a.conf");
    assert!(err.to_string().starts_with("a.conf:1:"), "{err}");
}

#[test]
fn threaded_youbot_matches_deterministic_state_sequence() {
    let (inputs, scenario) = load("youbot");
    let out = run_scenario(&inputs, &scenario, Mode::Threaded);
    assert!(out.passed(), "{:?}\n{}", out.failures, out.trace_text());
    let det = run_scenario(&inputs, &scenario, Mode::Deterministic);
    let transitions = |o: &coordconf::RunOutput| -> Vec<String> {
        o.trace
            .iter()
            .filter(|r| r.kind == TraceKind::Transition)
            .map(|r| r.detail.clone())
            .collect()
    };
    assert_eq!(transitions(&out), transitions(&det));
    assert_eq!(
        out.final_snapshot.lifecycle("Dynamics"),
        Some(LifecycleState::Running)
    );
}
