//! Statechart model and its `.fsm` text format.
//!
//! ```text
//! fsm youbot {
//!     initial unsync;
//!     state unsync { }
//!     state copying {
//!         entry raise enable_copying;
//!         exit raise disable_copying;
//!         after 200 raise e_conf_timeout;
//!         initial five_DOF_mode;
//!         state five_DOF_mode { entry raise five_DOF; }
//!         ...
//!     }
//!     transition unsync -> copying on e_go;
//! }
//! ```
//!
//! Transitions may appear in any block and may only reference states
//! declared inside that block (at any depth).

use std::collections::HashMap;

use crate::diag::{Diagnostic, Pos};
use crate::dsl::ChangeKind;
use crate::event::is_valid_event_name;
use crate::lex::{tokenize, Cursor, Tok};

pub type StateId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimerSpec {
    pub after_ms: u64,
    pub event: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpec {
    pub name: String,
    pub parent: Option<StateId>,
    pub children: Vec<StateId>,
    pub initial: Option<StateId>,
    pub entry: Vec<String>,
    pub exit: Vec<String>,
    pub timers: Vec<TimerSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionSpec {
    pub source: StateId,
    pub target: StateId,
    pub event: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatechartSpec {
    pub name: String,
    pub states: Vec<StateSpec>,
    pub transitions: Vec<TransitionSpec>,
    pub initial: StateId,
    index: HashMap<String, StateId>,
}

impl StatechartSpec {
    pub fn state(&self, id: StateId) -> &StateSpec {
        &self.states[id]
    }

    pub fn lookup(&self, name: &str) -> Option<StateId> {
        self.index.get(name).copied()
    }

    pub fn top_level(&self) -> impl Iterator<Item = &StateSpec> {
        self.states.iter().filter(|s| s.parent.is_none())
    }

    /// Ancestors of `id` from the outermost down to `id` itself.
    pub fn path_to(&self, id: StateId) -> Vec<StateId> {
        let mut path = vec![id];
        let mut cur = id;
        while let Some(p) = self.states[cur].parent {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// `a/b/c` rendering of a state's path.
    pub fn path_name(&self, id: StateId) -> String {
        self.path_to(id)
            .iter()
            .map(|&s| self.states[s].name.as_str())
            .collect::<Vec<_>>()
            .join("/")
    }
}

struct RawState {
    name: String,
    pos: Pos,
    entry: Vec<String>,
    exit: Vec<String>,
    timers: Vec<TimerSpec>,
    initial: Option<(String, Pos)>,
    children: Vec<RawState>,
    transitions: Vec<RawTransition>,
}

struct RawTransition {
    source: (String, Pos),
    target: (String, Pos),
    event: String,
}

type PResult<T> = Result<T, Diagnostic>;

/// Parses and validates a `.fsm` document.
pub fn parse_statechart(text: &str) -> Result<StatechartSpec, Vec<Diagnostic>> {
    let toks = tokenize(text).map_err(|d| vec![d])?;
    let mut cur = Cursor::new(toks);
    let (name, root) = parse_root(&mut cur).map_err(|d| vec![d])?;
    build(name, root)
}

fn parse_root(cur: &mut Cursor) -> PResult<(String, RawState)> {
    let pos = cur.keyword("fsm")?;
    let (name, _) = cur.ident()?;
    let mut root = RawState {
        name: String::new(),
        pos,
        entry: vec![],
        exit: vec![],
        timers: vec![],
        initial: None,
        children: vec![],
        transitions: vec![],
    };
    parse_block(cur, &mut root, true)?;
    if !cur.at_eof() {
        return Err(cur.unexpected("end of input"));
    }
    Ok((name, root))
}

fn raise_list(cur: &mut Cursor) -> PResult<Vec<String>> {
    cur.keyword("raise")?;
    let mut out = vec![event_name(cur)?];
    while cur.eat(&Tok::Comma) {
        out.push(event_name(cur)?);
    }
    cur.expect(&Tok::Semi)?;
    Ok(out)
}

fn event_name(cur: &mut Cursor) -> PResult<String> {
    let (name, pos) = cur.ident()?;
    if name.parse::<ChangeKind>().is_ok() || matches!(cur.peek(), Tok::LParen) {
        return Err(Diagnostic::error(
            pos,
            format!("raise-lists contain event names only; `{name}` is a configuration action"),
        ));
    }
    if !is_valid_event_name(&name) {
        return Err(Diagnostic::error(pos, format!("invalid event name `{name}`")));
    }
    Ok(name)
}

fn parse_block(cur: &mut Cursor, st: &mut RawState, is_root: bool) -> PResult<()> {
    cur.expect(&Tok::LBrace)?;
    while !cur.eat(&Tok::RBrace) {
        let (kw, pos) = cur.ident()?;
        match kw.as_str() {
            "entry" if !is_root => st.entry.extend(raise_list(cur)?),
            "exit" if !is_root => st.exit.extend(raise_list(cur)?),
            "after" if !is_root => {
                let (ms, _) = cur.uint()?;
                cur.keyword("raise")?;
                let event = event_name(cur)?;
                cur.expect(&Tok::Semi)?;
                st.timers.push(TimerSpec { after_ms: ms, event });
            }
            "initial" => {
                if st.initial.is_some() {
                    return Err(Diagnostic::error(pos, "initial state declared twice"));
                }
                st.initial = Some(cur.ident()?);
                cur.expect(&Tok::Semi)?;
            }
            "state" => {
                let (name, npos) = cur.ident()?;
                if name.contains(['.', ':']) {
                    return Err(Diagnostic::error(npos, format!("invalid state id `{name}`")));
                }
                let mut child = RawState {
                    name,
                    pos: npos,
                    entry: vec![],
                    exit: vec![],
                    timers: vec![],
                    initial: None,
                    children: vec![],
                    transitions: vec![],
                };
                parse_block(cur, &mut child, false)?;
                st.children.push(child);
            }
            "transition" => {
                let source = cur.ident()?;
                cur.expect(&Tok::Arrow)?;
                let target = cur.ident()?;
                cur.keyword("on")?;
                let event = event_name(cur)?;
                cur.expect(&Tok::Semi)?;
                st.transitions.push(RawTransition { source, target, event });
            }
            other => {
                return Err(Diagnostic::error(pos, format!("unexpected `{other}` in state body")));
            }
        }
    }
    Ok(())
}

/// Scope, its declared initial child, and the scope's position.
type InitialDecl = (Option<StateId>, Option<(String, Pos)>, Pos);

struct Builder {
    states: Vec<StateSpec>,
    index: HashMap<String, StateId>,
    diags: Vec<Diagnostic>,
    pending: Vec<(Option<StateId>, RawTransition)>,
    initials: Vec<InitialDecl>,
}

impl Builder {
    fn add(&mut self, raw: RawState, parent: Option<StateId>) -> StateId {
        let id = self.states.len();
        if self.index.insert(raw.name.clone(), id).is_some() {
            self.diags
                .push(Diagnostic::error(raw.pos, format!("state `{}` declared twice", raw.name)));
        }
        self.states.push(StateSpec {
            name: raw.name,
            parent,
            children: vec![],
            initial: None,
            entry: raw.entry,
            exit: raw.exit,
            timers: raw.timers,
        });
        if !raw.children.is_empty() || raw.initial.is_some() {
            self.initials.push((Some(id), raw.initial, raw.pos));
        }
        for child in raw.children {
            let c = self.add(child, Some(id));
            self.states[id].children.push(c);
        }
        self.pending
            .extend(raw.transitions.into_iter().map(|t| (Some(id), t)));
        id
    }

    fn is_within(&self, state: StateId, scope: Option<StateId>) -> bool {
        match scope {
            None => true,
            Some(s) => {
                let mut cur = self.states[state].parent;
                while let Some(p) = cur {
                    if p == s {
                        return true;
                    }
                    cur = self.states[p].parent;
                }
                false
            }
        }
    }

    fn resolve_in(&mut self, (name, pos): &(String, Pos), scope: Option<StateId>) -> Option<StateId> {
        match self.index.get(name) {
            Some(&id) if self.is_within(id, scope) => Some(id),
            Some(_) => {
                self.diags.push(Diagnostic::error(
                    *pos,
                    format!("state `{name}` is not declared in this block"),
                ));
                None
            }
            None => {
                self.diags
                    .push(Diagnostic::error(*pos, format!("unknown state `{name}`")));
                None
            }
        }
    }
}

fn build(name: String, root: RawState) -> Result<StatechartSpec, Vec<Diagnostic>> {
    let mut b = Builder {
        states: vec![],
        index: HashMap::new(),
        diags: vec![],
        pending: vec![],
        initials: vec![],
    };
    let mut top = Vec::new();
    for child in root.children {
        top.push(b.add(child, None));
    }
    b.pending
        .extend(root.transitions.into_iter().map(|t| (None, t)));

    let mut initial = None;
    match &root.initial {
        None => b
            .diags
            .push(Diagnostic::error(root.pos, "chart declares no initial state")),
        Some(init) => {
            if let Some(id) = b.resolve_in(init, None) {
                if b.states[id].parent.is_some() {
                    b.diags.push(Diagnostic::error(
                        init.1,
                        format!("initial state `{}` is not a top-level state", init.0),
                    ));
                } else {
                    initial = Some(id);
                }
            }
        }
    }

    for (scope, init, pos) in std::mem::take(&mut b.initials) {
        let sid = scope.expect("composite states only");
        match init {
            None => {
                let name = b.states[sid].name.clone();
                b.diags.push(Diagnostic::error(
                    pos,
                    format!("composite state `{name}` declares no initial child"),
                ));
            }
            Some(init) => {
                if let Some(c) = b.resolve_in(&init, scope) {
                    if b.states[c].parent != Some(sid) {
                        b.diags.push(Diagnostic::error(
                            init.1,
                            format!("initial state `{}` is not a direct child", init.0),
                        ));
                    } else {
                        b.states[sid].initial = Some(c);
                    }
                }
            }
        }
    }

    let mut transitions = Vec::new();
    for (scope, t) in std::mem::take(&mut b.pending) {
        let s = b.resolve_in(&t.source, scope);
        let d = b.resolve_in(&t.target, scope);
        if let (Some(source), Some(target)) = (s, d) {
            transitions.push(TransitionSpec {
                source,
                target,
                event: t.event,
            });
        }
    }

    if !b.diags.is_empty() {
        b.diags.sort_by_key(|d| (d.line, d.col));
        return Err(b.diags);
    }
    Ok(StatechartSpec {
        name,
        states: b.states,
        transitions,
        initial: initial.expect("checked above"),
        index: b.index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_chart() {
        let spec = parse_statechart("fsm m { initial a; state a { } }").unwrap();
        assert_eq!(spec.name, "m");
        assert_eq!(spec.states.len(), 1);
        assert_eq!(spec.state(spec.initial).name, "a");
    }

    #[test]
    fn undeclared_transition_target() {
        let err = parse_statechart("fsm m {\n initial a;\n state a { }\n transition a -> b on go;\n}")
            .unwrap_err();
        assert_eq!(err.len(), 1);
        assert_eq!(err[0].line, 4);
        assert!(err[0].message.contains("unknown state `b`"));
    }

    #[test]
    fn transitions_are_scoped_to_their_block() {
        let src = "fsm m { initial a; state a { initial x; state x { } transition x -> b on go; } state b { } }";
        let err = parse_statechart(src).unwrap_err();
        assert!(err[0].message.contains("not declared in this block"));
    }

    #[test]
    fn composite_needs_initial_child() {
        let err = parse_statechart("fsm m { initial a; state a { state x { } } }").unwrap_err();
        assert!(err[0].message.contains("no initial child"));
    }

    #[test]
    fn raise_lists_are_pure() {
        for body in [
            "entry raise port_write;",
            "entry raise port_write(\"a.b\", 1);",
            "exit raise ok, property_set;",
        ] {
            let src = format!("fsm m {{ initial a; state a {{ {body} }} }}");
            let err = parse_statechart(&src).unwrap_err();
            assert!(err[0].message.contains("event names only"), "{body}: {err:?}");
        }
    }

    #[test]
    fn duplicate_state_ids() {
        let err = parse_statechart("fsm m { initial a; state a { } state a { } }").unwrap_err();
        assert!(err[0].message.contains("declared twice"));
    }

    #[test]
    fn timers_and_raise_lists() {
        let spec = parse_statechart(
            "fsm m { initial a; state a { entry raise x, y; exit raise z; after 200 raise e_conf_timeout; } }",
        )
        .unwrap();
        let a = spec.state(0);
        assert_eq!(a.entry, vec!["x", "y"]);
        assert_eq!(a.exit, vec!["z"]);
        assert_eq!(
            a.timers,
            vec![TimerSpec {
                after_ms: 200,
                event: "e_conf_timeout".into()
            }]
        );
    }
}
