//! Timed scenario scripts.
//!
//! ```text
//! @10 inject e_comm_ok
//! @30 expect fsm copying/five_DOF_mode
//! @30 expect port Cart_Impedance.ext_ref_mode == true
//! @40 expect prop Dynamics.force_gain == {0.1, 0.1, 0.1}
//! @40 expect lifecycle Dynamics running
//! @40 expect event conf.applied.eight_DOF
//! @40 expect no-event conf.failed.eight_DOF
//! ```
//!
//! Times are logical milliseconds and must not decrease. `expect event`
//! holds if the event was delivered at or before the directive's time;
//! `expect no-event` holds if it was not. A port expectation may use
//! `absent` for a port that was never written.

use std::fmt;

use crate::diag::Diagnostic;
use crate::dsl::parse_value_tokens;
use crate::event::is_valid_event_name;
use crate::lex::{tokenize, Cursor, Tok};
use crate::runtime::{split_path, LifecycleState};
use crate::value::Value;

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Inject { event: String, payload: Option<Value> },
    ExpectFsm(String),
    ExpectLifecycle(String, LifecycleState),
    ExpectProp(String, Value),
    /// `None` expects a port that was never written.
    ExpectPort(String, Option<Value>),
    ExpectEvent(String),
    ExpectNoEvent(String),
}

impl Action {
    pub fn is_expectation(&self) -> bool {
        !matches!(self, Action::Inject { .. })
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Inject { event, payload: None } => write!(f, "inject {event}"),
            Action::Inject { event, payload: Some(p) } => write!(f, "inject {event} {p}"),
            Action::ExpectFsm(p) => write!(f, "expect fsm {p}"),
            Action::ExpectLifecycle(c, s) => write!(f, "expect lifecycle {c} {}", s.keyword()),
            Action::ExpectProp(t, v) => write!(f, "expect prop {t} == {v}"),
            Action::ExpectPort(t, Some(v)) => write!(f, "expect port {t} == {v}"),
            Action::ExpectPort(t, None) => write!(f, "expect port {t} == absent"),
            Action::ExpectEvent(e) => write!(f, "expect event {e}"),
            Action::ExpectNoEvent(e) => write!(f, "expect no-event {e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Directive {
    pub time: u64,
    pub action: Action,
    pub line: usize,
}

impl fmt::Display for Directive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "@{} {}", self.time, self.action)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scenario {
    pub directives: Vec<Directive>,
}

type PResult<T> = Result<T, Diagnostic>;

fn event_name(cur: &mut Cursor) -> PResult<String> {
    let (name, pos) = cur.ident()?;
    if !is_valid_event_name(&name) {
        return Err(Diagnostic::error(pos, format!("invalid event name `{name}`")));
    }
    Ok(name)
}

fn target(cur: &mut Cursor) -> PResult<String> {
    let (t, pos) = cur.ident()?;
    split_path(&t).map_err(|_| Diagnostic::error(pos, format!("expected <component>.<name>, found `{t}`")))?;
    Ok(t)
}

fn state_path(cur: &mut Cursor) -> PResult<String> {
    let mut path = cur.ident()?.0;
    while cur.eat(&Tok::Slash) {
        path.push('/');
        path.push_str(&cur.ident()?.0);
    }
    Ok(path)
}

fn action(cur: &mut Cursor) -> PResult<Action> {
    let (verb, pos) = cur.ident()?;
    match verb.as_str() {
        "inject" => {
            let event = event_name(cur)?;
            let payload = if cur.at_eof() { None } else { Some(parse_value_tokens(cur)?) };
            return Ok(Action::Inject { event, payload });
        }
        "expect" => {}
        _ => return Err(Diagnostic::error(pos, format!("expected `inject` or `expect`, found `{verb}`"))),
    }
    let (what, wpos) = cur.ident()?;
    Ok(match what.as_str() {
        "fsm" => Action::ExpectFsm(state_path(cur)?),
        "lifecycle" => {
            let (comp, _) = cur.ident()?;
            let (state, spos) = cur.ident()?;
            let state = state
                .parse()
                .map_err(|_| Diagnostic::error(spos, format!("unknown lifecycle state `{state}`")))?;
            Action::ExpectLifecycle(comp, state)
        }
        "prop" => {
            let t = target(cur)?;
            cur.expect(&Tok::EqEq)?;
            Action::ExpectProp(t, parse_value_tokens(cur)?)
        }
        "port" => {
            let t = target(cur)?;
            cur.expect(&Tok::EqEq)?;
            match cur.peek() {
                Tok::Ident(s) if s == "absent" => {
                    cur.next();
                    Action::ExpectPort(t, None)
                }
                _ => Action::ExpectPort(t, Some(parse_value_tokens(cur)?)),
            }
        }
        "event" => Action::ExpectEvent(event_name(cur)?),
        // `no-event` lexes as an identifier only without the dash
        "no" => {
            cur.expect(&Tok::Minus)?;
            cur.keyword("event")?;
            Action::ExpectNoEvent(event_name(cur)?)
        }
        _ => return Err(Diagnostic::error(wpos, format!("unknown expectation `{what}`"))),
    })
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Scenario, Vec<Diagnostic>> {
        let mut directives: Vec<Directive> = Vec::new();
        let mut diags = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let res = tokenize(line).and_then(|toks| {
                let toks = toks
                    .into_iter()
                    .map(|mut t| {
                        t.pos.line = lineno;
                        t
                    })
                    .collect();
                let mut cur = Cursor::new(toks);
                if cur.at_eof() {
                    return Ok(None);
                }
                let pos = cur.expect(&Tok::At)?;
                let (time, _) = cur.uint()?;
                let action = action(&mut cur)?;
                if !cur.at_eof() {
                    return Err(cur.unexpected("end of line"));
                }
                if let Some(prev) = directives.last() {
                    if time < prev.time {
                        return Err(Diagnostic::error(
                            pos,
                            format!("time @{time} is earlier than the preceding @{}", prev.time),
                        ));
                    }
                }
                Ok(Some(Directive {
                    time,
                    action,
                    line: lineno,
                }))
            });
            match res {
                Ok(Some(d)) => directives.push(d),
                Ok(None) => {}
                Err(d) => diags.push(d),
            }
        }
        if diags.is_empty() {
            Ok(Scenario { directives })
        } else {
            Err(diags)
        }
    }

    pub fn end_time(&self) -> u64 {
        self.directives.last().map_or(0, |d| d.time)
    }

    /// Directives scheduled at exactly `t`.
    pub fn at(&self, t: u64) -> impl Iterator<Item = &Directive> {
        self.directives.iter().filter(move |d| d.time == t)
    }

    /// Times at which something is scheduled, without duplicates.
    pub fn times(&self) -> Vec<u64> {
        let mut ts: Vec<u64> = self.directives.iter().map(|d| d.time).collect();
        ts.dedup();
        ts
    }
}
