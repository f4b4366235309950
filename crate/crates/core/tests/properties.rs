mod common;

use std::sync::Arc;

use coordconf::dsl::{pretty_print, Change, Configuration, ConfiguratorConf, LifecycleSpecEntry};
use coordconf::fsm::parse_statechart;
use coordconf::monitor::{Comparison, Monitor, MonitorSpec};
use coordconf::runtime::{compute_lifecycle_path, ComponentTemplate, LifecycleState, Registry};
use coordconf::{parse_configurator_conf, Coordinator, Event, Value};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

use common::*;

fn scalar() -> impl Strategy<Value = Value> {
    prop_oneof![
        any::<bool>().prop_map(Value::Bool),
        any::<i32>().prop_map(|i| Value::Int(i as i64)),
        (-1e6f64..1e6).prop_map(Value::Real),
        "[ -~]{0,8}".prop_map(Value::Str),
    ]
}

fn value() -> impl Strategy<Value = Value> {
    prop_oneof![
        3 => scalar(),
        1 => prop::collection::vec(-1e3f64..1e3, 1..4)
            .prop_map(|v| Value::Array(v.into_iter().map(Value::Real).collect())),
        1 => prop::collection::vec(any::<i16>(), 1..4)
            .prop_map(|v| Value::Array(v.into_iter().map(|i| Value::Int(i as i64)).collect())),
    ]
}

fn ident() -> impl Strategy<Value = String> {
    "[A-Za-z][A-Za-z0-9_]{0,6}"
}

fn dotted() -> impl Strategy<Value = String> {
    (ident(), ident()).prop_map(|(a, b)| format!("{a}.{b}"))
}

fn change() -> impl Strategy<Value = Change> {
    prop_oneof![
        (dotted(), value()).prop_map(|(t, v)| Change::property_set(&t, v)),
        (dotted(), value()).prop_map(|(t, v)| Change::port_write(&t, v)),
        (dotted(), prop::collection::vec(value(), 0..3)).prop_map(|(t, a)| Change::operation_call(&t, a)),
        (ident(), ident()).prop_map(|(i, t)| Change::component_create(&i, &t)),
        ident().prop_map(|i| Change::component_destroy(&i)),
        (dotted(), dotted()).prop_map(|(a, b)| Change::connection_create(&a, &b)),
        (dotted(), dotted()).prop_map(|(a, b)| Change::connection_remove(&a, &b)),
    ]
}

fn state() -> impl Strategy<Value = LifecycleState> {
    prop::sample::select(STATES.to_vec())
}

fn entries() -> impl Strategy<Value = Vec<LifecycleSpecEntry>> {
    prop::collection::vec(
        (prop_oneof![ident(), Just("_default".to_string())], state())
            .prop_map(|(s, t)| LifecycleSpecEntry::new(s, t)),
        0..4,
    )
}

fn configuration() -> impl Strategy<Value = Configuration> {
    (entries(), entries(), prop::collection::vec(change(), 0..5)).prop_map(|(pre, post, changes)| Configuration {
        pre,
        post,
        changes,
        ..Default::default()
    })
}

fn conf() -> impl Strategy<Value = ConfiguratorConf> {
    prop::collection::vec(("[a-z][a-z0-9_]{0,6}", configuration()), 0..4).prop_map(|items| ConfiguratorConf {
        configurations: items.into_iter().collect(),
    })
}

proptest! {
    #[test]
    fn pretty_print_round_trips(c in conf()) {
        let text = pretty_print(&c);
        let back = parse_configurator_conf(&text).map_err(|d| TestCaseError::fail(format!("{d:?}\n{text}")))?;
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(pretty_print(&back), text);
    }

    #[test]
    fn lifecycle_paths_are_legal_and_reach_the_target(from in state(), to in state()) {
        let path = compute_lifecycle_path(from, to).unwrap();
        let mut s = from;
        for cmd in &path {
            s = s.after(*cmd).expect("every step is legal");
        }
        prop_assert_eq!(s, to);
        prop_assert!(path.len() <= 2);
    }

    #[test]
    fn writes_reach_every_connected_in_port(seed in any::<u64>(), v in -1e3f64..1e3) {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut r = random_model(&mut rng);
        r.write_port("c0.o0", Value::Real(v)).unwrap();
        for p in r.connected_inputs("c0", "o0") {
            prop_assert_eq!(r.read_port(&p.to_string()).unwrap(), Some(&Value::Real(v)));
        }
    }

    #[test]
    fn stack_is_lifo(seed in any::<u64>(), k in 1usize..5) {
        let mut rng = StdRng::seed_from_u64(seed);
        let model = random_model(&mut rng);
        let configs: Vec<(String, Configuration)> =
            (0..k).map(|i| (format!("c{i}"), random_config(&mut rng, &model, 4))).collect();
        let mut e = engine(ConfiguratorConf { configurations: configs.into_iter().collect() }, model);
        let ids: Vec<String> = e.conf().ids().map(String::from).collect();
        let mut snaps = vec![snapshot(&e)];
        for id in &ids {
            prop_assert!(e.push_configuration(id).unwrap().is_applied());
            snaps.push(snapshot(&e));
        }
        snaps.pop();
        while let Some(want) = snaps.pop() {
            prop_assert!(e.pop_configuration().unwrap().is_applied());
            prop_assert_eq!(snapshot(&e), want);
        }
        prop_assert!(e.pop_configuration().is_err());
    }

    #[test]
    fn unknown_events_never_touch_the_registry(seed in any::<u64>(), name in "[a-z_]{1,10}") {
        let mut rng = StdRng::seed_from_u64(seed);
        let model = random_model(&mut rng);
        let config = random_config(&mut rng, &model, 3);
        let mut e = engine(single("known", config), model);
        let before = snapshot(&e);
        prop_assume!(name != "known");
        prop_assert!(e.on_event(&Event::new(name, "test").unwrap()).is_none());
        prop_assert!(e.step().is_none());
        prop_assert_eq!(snapshot(&e), before);
    }

    #[test]
    fn edge_monitor_counts_rising_edges(values in prop::collection::vec(-2.0f64..2.0, 1..40)) {
        let mut r = Registry::new();
        let t = ComponentTemplate { properties: vec![("x".into(), Value::Real(0.0))], ..Default::default() };
        r.component_create("A", "t", &t).unwrap();
        let mut m = Monitor::new(MonitorSpec {
            id: "m".into(),
            watch: "A.x".into(),
            op: Comparison::Lt,
            threshold: Value::Real(0.5),
            emit: "e_low".into(),
            edge: true,
        });
        let mut fired = 0;
        let mut rising = 0;
        let mut last = false;
        for v in values {
            r.set_property("A.x", Value::Real(v)).unwrap();
            fired += m.eval(&r).unwrap().is_some() as usize;
            let now = v < 0.5;
            rising += (now && !last) as usize;
            last = now;
        }
        prop_assert_eq!(fired, rising);
    }

    #[test]
    fn coordinator_replay_is_deterministic(events in prop::collection::vec(0usize..6, 0..60)) {
        let spec = Arc::new(parse_statechart(include_str!("../../../models/youbot.fsm")).unwrap());
        let names = ["e_comm_ok", "e_ready", "e_aligned", "e_toggle_dof", "e_force_high", "e_comm_lost"];
        let run = || {
            let mut c = Coordinator::new(spec.clone());
            let mut out: Vec<String> = c.init().iter().map(|e| e.name().to_string()).collect();
            for &i in &events {
                out.extend(c.step(&Event::new(names[i], "t").unwrap()).raised.iter().map(|e| e.name().to_string()));
                out.push(c.active_path());
            }
            out
        };
        prop_assert_eq!(run(), run());
    }
}

#[test]
fn copying_is_entered_and_left_through_its_raise_lists() {
    // every enable_copying is eventually matched by a disable_copying
    let spec = Arc::new(parse_statechart(include_str!("../../../models/youbot.fsm")).unwrap());
    let mut c = Coordinator::new(spec);
    c.init();
    let mut depth = 0i32;
    for name in ["e_comm_ok", "e_ready", "e_aligned", "e_force_high", "e_aligned", "e_toggle_dof", "e_comm_lost"] {
        for e in c.step(&Event::new(name, "t").unwrap()).raised {
            match e.name() {
                "enable_copying" => depth += 1,
                "disable_copying" => depth -= 1,
                _ => {}
            }
            assert!((0..=1).contains(&depth));
        }
        assert_eq!(depth == 1, c.is_active("copying"));
    }
    assert_eq!(depth, 0);
}
