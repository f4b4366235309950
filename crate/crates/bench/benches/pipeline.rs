use std::hint::black_box;

use coordconf::{parse_configurator_conf, run_scenario, Configurator, Coordinator, EngineConfig, Event, Mode};
use coordconf_bench::{read_model, youbot};
use criterion::{criterion_group, criterion_main, Criterion};

fn parse(c: &mut Criterion) {
    let text = read_model("youbot.conf");
    c.bench_function("parse youbot.conf", |b| b.iter(|| parse_configurator_conf(black_box(&text)).unwrap()));
}

fn apply(c: &mut Criterion) {
    let (inputs, _) = youbot();
    let mut e = Configurator::new(
        inputs.conf.clone(),
        inputs.build_registry().into_shared(),
        inputs.system.catalog(),
        EngineConfig::default(),
    );
    c.bench_function("apply five_DOF", |b| b.iter(|| e.apply(black_box("five_DOF")).unwrap()));
    c.bench_function("push/pop eight_DOF", |b| {
        b.iter(|| {
            e.push_configuration("eight_DOF").unwrap();
            e.pop_configuration().unwrap()
        })
    });
}

fn fsm_step(c: &mut Criterion) {
    let (inputs, _) = youbot();
    let events: Vec<Event> = ["e_comm_ok", "e_ready", "e_aligned", "e_toggle_dof", "e_toggle_dof", "e_comm_lost"]
        .into_iter()
        .map(|n| Event::new(n, "bench").unwrap())
        .collect();
    let mut coord = Coordinator::new(inputs.chart.clone());
    coord.init();
    c.bench_function("fsm cycle (6 steps)", |b| {
        b.iter(|| {
            for e in &events {
                black_box(coord.step(e));
            }
        })
    });
}

fn replay(c: &mut Criterion) {
    let (inputs, scenario) = youbot();
    c.bench_function("deterministic youbot replay", |b| {
        b.iter(|| run_scenario(&inputs, &scenario, Mode::Deterministic))
    });
}

criterion_group!(benches, parse, apply, fsm_step, replay);
criterion_main!(benches);
