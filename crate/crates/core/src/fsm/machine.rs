use std::sync::Arc;

use super::spec::{StateId, StatechartSpec};
use crate::event::Event;

pub const SOURCE: &str = "coordinator";

#[derive(Debug, Clone, PartialEq, Eq)]
struct ArmedTimer {
    state: StateId,
    remaining: u64,
    event: String,
}

/// A transition that fired, for tracing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fired {
    pub from: String,
    pub to: String,
    pub event: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepResult {
    pub fired: Option<Fired>,
    pub raised: Vec<Event>,
}

/// A running statechart instance. Its only output is raised events; it has
/// no access to components.
#[derive(Debug, Clone)]
pub struct Coordinator {
    spec: Arc<StatechartSpec>,
    /// Active states from the outermost down to the leaf.
    active: Vec<StateId>,
    timers: Vec<ArmedTimer>,
}

impl Coordinator {
    pub fn new(spec: Arc<StatechartSpec>) -> Self {
        Coordinator {
            spec,
            active: Vec::new(),
            timers: Vec::new(),
        }
    }

    pub fn spec(&self) -> &StatechartSpec {
        &self.spec
    }

    pub fn is_initialized(&self) -> bool {
        !self.active.is_empty()
    }

    /// Active path rendered as `copying/five_DOF_mode`.
    pub fn active_path(&self) -> String {
        self.active
            .iter()
            .map(|&s| self.spec.state(s).name.as_str())
            .collect::<Vec<_>>()
            .join("/")
    }

    pub fn active_leaf(&self) -> Option<&str> {
        self.active.last().map(|&s| self.spec.state(s).name.as_str())
    }

    pub fn is_active(&self, name: &str) -> bool {
        self.active.iter().any(|&s| self.spec.state(s).name == name)
    }

    /// Time until the earliest armed timer expires.
    pub fn next_timer(&self) -> Option<u64> {
        self.timers.iter().map(|t| t.remaining).min()
    }

    fn raise(names: &[String], out: &mut Vec<Event>) {
        out.extend(
            names
                .iter()
                .map(|n| Event::new(n.as_str(), SOURCE).expect("validated at parse time")),
        );
    }

    fn enter(&mut self, s: StateId, out: &mut Vec<Event>) {
        let st = self.spec.state(s);
        Self::raise(&st.entry, out);
        self.timers.extend(st.timers.iter().map(|t| ArmedTimer {
            state: s,
            remaining: t.after_ms,
            event: t.event.clone(),
        }));
        self.active.push(s);
    }

    /// Enters `s` and then initial children down to a leaf.
    fn enter_to_leaf(&mut self, mut s: StateId, out: &mut Vec<Event>) {
        self.enter(s, out);
        while let Some(child) = self.spec.state(s).initial {
            self.enter(child, out);
            s = child;
        }
    }

    /// Enters the initial configuration. Entry raises fire outermost first.
    pub fn init(&mut self) -> Vec<Event> {
        self.active.clear();
        self.timers.clear();
        let mut out = Vec::new();
        let initial = self.spec.initial;
        self.enter_to_leaf(initial, &mut out);
        out
    }

    /// Processes one event. The deepest active state with a transition on
    /// the event wins; events without a transition change nothing.
    pub fn step(&mut self, e: &Event) -> StepResult {
        let spec = Arc::clone(&self.spec);
        let found = self.active.iter().rev().find_map(|&s| {
            spec.transitions
                .iter()
                .find(|t| t.source == s && t.event == e.name())
        });
        let Some(t) = found else {
            return StepResult::default();
        };
        let from = self.active_path();

        // least common strict ancestor of source and target
        let src_path = spec.path_to(t.source);
        let dst_path = spec.path_to(t.target);
        let mut common = 0;
        while common < src_path.len() - 1
            && common < dst_path.len() - 1
            && src_path[common] == dst_path[common]
        {
            common += 1;
        }

        let mut raised = Vec::new();
        while self.active.len() > common {
            let s = self.active.pop().expect("non-empty");
            Self::raise(&spec.state(s).exit, &mut raised);
            self.timers.retain(|tm| tm.state != s);
        }
        for &s in &dst_path[common..dst_path.len() - 1] {
            self.enter(s, &mut raised);
        }
        self.enter_to_leaf(t.target, &mut raised);

        StepResult {
            fired: Some(Fired {
                from,
                to: self.active_path(),
                event: e.name().to_string(),
            }),
            raised,
        }
    }

    /// Advances timers of active states by `dt` milliseconds. Expired timers
    /// raise their events, earliest expiry first.
    pub fn tick(&mut self, dt: u64) -> Vec<Event> {
        let mut expired: Vec<(u64, usize, String)> = Vec::new();
        let mut keep = Vec::with_capacity(self.timers.len());
        for (i, mut t) in std::mem::take(&mut self.timers).into_iter().enumerate() {
            if t.remaining <= dt {
                expired.push((t.remaining, i, t.event));
            } else {
                t.remaining -= dt;
                keep.push(t);
            }
        }
        self.timers = keep;
        expired.sort();
        expired
            .into_iter()
            .map(|(_, _, ev)| Event::new(ev, SOURCE).expect("validated at parse time"))
            .collect()
    }
}
