//! Random models and configurations shared by the property tests and the
//! acceptance suite.

#![allow(dead_code)]

use coordconf::dsl::{validate, Change, Configuration, ConfiguratorConf, LifecycleSpecEntry, ModelRef};
use coordconf::runtime::{ComponentTemplate, LifecycleState, Registry, TypeCatalog};
use coordconf::{Configurator, EngineConfig, SystemSnapshot, Value};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub const COMPONENTS: usize = 4;
pub const STATES: [LifecycleState; 3] = [
    LifecycleState::PreOperational,
    LifecycleState::Stopped,
    LifecycleState::Running,
];

pub fn template() -> ComponentTemplate {
    ComponentTemplate {
        properties: vec![
            ("count".into(), Value::Int(0)),
            ("gain".into(), Value::Real(1.0)),
            ("enabled".into(), Value::Bool(false)),
            ("vec".into(), Value::Array(vec![Value::Real(0.0); 3])),
        ],
        in_ports: vec!["i0".into(), "i1".into()],
        out_ports: vec!["o0".into(), "o1".into()],
        operations: Vec::new(),
    }
}

pub fn catalog() -> TypeCatalog {
    let mut cat = TypeCatalog::default();
    cat.insert("node", template());
    cat
}

pub fn id(i: usize) -> String {
    format!("c{i}")
}

/// Four components with random connections, lifecycles and port values.
pub fn random_model(rng: &mut StdRng) -> Registry {
    let mut r = Registry::new();
    let t = template();
    for i in 0..COMPONENTS {
        r.component_create(&id(i), "node", &t).unwrap();
    }
    for a in 0..COMPONENTS {
        for b in 0..COMPONENTS {
            for (o, i) in [("o0", "i0"), ("o1", "i1"), ("o0", "i1")] {
                if a != b && rng.gen_bool(0.15) {
                    r.connection_create(&format!("{}.{o}", id(a)), &format!("{}.{i}", id(b))).unwrap();
                }
            }
        }
    }
    for i in 0..COMPONENTS {
        r.bring_to(&id(i), *STATES.choose(rng).unwrap()).unwrap();
        if rng.gen_bool(0.5) {
            r.write_port(&format!("{}.o0", id(i)), Value::Real(rng.gen_range(-5.0..5.0))).unwrap();
        }
    }
    r
}

pub fn random_value(rng: &mut StdRng, prop: &str) -> Value {
    match prop {
        "count" => Value::Int(rng.gen_range(-100..100)),
        "gain" => Value::Real(rng.gen_range(-10.0..10.0)),
        "enabled" => Value::Bool(rng.gen()),
        _ => Value::Array((0..3).map(|_| Value::Real(rng.gen_range(-1.0..1.0))).collect()),
    }
}

fn random_entries(rng: &mut StdRng, max: usize) -> Vec<LifecycleSpecEntry> {
    let n = rng.gen_range(0..=max);
    let mut ids: Vec<usize> = (0..COMPONENTS).collect();
    ids.shuffle(rng);
    let mut out: Vec<LifecycleSpecEntry> = ids[..n]
        .iter()
        .map(|&i| LifecycleSpecEntry::new(id(i), *STATES.choose(rng).unwrap()))
        .collect();
    if rng.gen_bool(0.2) {
        out.push(LifecycleSpecEntry::new("_default", *STATES.choose(rng).unwrap()));
    }
    out
}

/// A configuration of 1..=`max_changes` property/port changes plus random
/// pre/post lifecycle lists, valid (no conflict) against `model`.
pub fn random_config(rng: &mut StdRng, model: &Registry, max_changes: usize) -> Configuration {
    let cat = catalog();
    loop {
        let n = rng.gen_range(1..=max_changes);
        let mut changes = Vec::new();
        for _ in 0..n {
            let c = id(rng.gen_range(0..COMPONENTS));
            let ch = if rng.gen_bool(0.5) {
                let prop = *["count", "gain", "enabled", "vec"].choose(rng).unwrap();
                Change::property_set(&format!("{c}.{prop}"), random_value(rng, prop))
            } else {
                let port = *["i0", "i1", "o0", "o1"].choose(rng).unwrap();
                Change::port_write(&format!("{c}.{port}"), Value::Real(rng.gen_range(-5.0..5.0)))
            };
            changes.push(ch);
        }
        let mut config = Configuration::with_changes(changes);
        config.pre = random_entries(rng, 2);
        config.post = random_entries(rng, 2);
        let conf = single("x", config.clone());
        let model = ModelRef {
            registry: model,
            catalog: &cat,
        };
        if !validate(&conf, Some(model)).iter().any(|d| d.is_error()) {
            return config;
        }
    }
}

pub fn single(id: &str, config: Configuration) -> ConfiguratorConf {
    ConfiguratorConf {
        configurations: [(id.to_string(), config)].into_iter().collect(),
    }
}

pub fn engine(conf: ConfiguratorConf, registry: Registry) -> Configurator {
    Configurator::new(conf, registry.into_shared(), catalog(), EngineConfig::default())
}

pub fn snapshot(e: &Configurator) -> SystemSnapshot {
    e.registry().lock().unwrap().take_snapshot()
}

/// All orderings of `items`.
pub fn permutations<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head.clone());
            out.push(tail);
        }
    }
    out
}
