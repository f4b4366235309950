//! Fixtures for the benchmarks.

use std::path::{Path, PathBuf};

use coordconf::harness::{Inputs, Scenario};

pub fn models_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

pub fn read_model(name: &str) -> String {
    std::fs::read_to_string(models_dir().join(name)).expect("shipped model file")
}

pub fn youbot() -> (Inputs, Scenario) {
    let dir = models_dir();
    let inputs = Inputs::load(&dir.join("youbot.sys"), &dir.join("youbot.conf"), &dir.join("youbot.fsm"))
        .expect("shipped models are valid");
    let scenario = Scenario::parse(&read_model("youbot.scn")).expect("shipped scenario is valid");
    (inputs, scenario)
}
