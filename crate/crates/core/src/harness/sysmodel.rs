//! System model files: one declaration per line.
//!
//! ```text
//! component Dynamics type dynamics
//! property Dynamics.force_gain real[] = {0.1, 0.1, 0.1}
//! inport Dynamics.desired_force
//! outport Cart_Impedance.desired_force
//! operation Dynamics.reset arity 0
//! connect Cart_Impedance.desired_force -> Dynamics.desired_force
//! fault Dynamics.reset block 500
//! lifecycle Dynamics running
//! monitor align watch Cart_Impedance.desired_force when lt 0.5 emit e_aligned edge
//! type sensor property rate int = 100
//! type sensor outport reading
//! ```
//!
//! `type` lines declare templates for components that deployment changes
//! may create; every declared component also contributes its type.

use std::time::Duration;

use indexmap::IndexMap;

use crate::diag::{Diagnostic, Pos};
use crate::dsl::parse_value_tokens;
use crate::lex::{tokenize, Cursor, Tok};
use crate::monitor::{Comparison, MonitorSpec};
use crate::runtime::{
    split_path, ComponentTemplate, LifecycleState, OpBehavior, OperationSpec, Registry, TypeCatalog,
};
use crate::value::{Value, ValueKind};

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentDecl {
    pub type_name: String,
    pub template: ComponentTemplate,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SystemModel {
    pub components: IndexMap<String, ComponentDecl>,
    pub types: IndexMap<String, ComponentTemplate>,
    pub connections: Vec<(String, String, Pos)>,
    pub faults: Vec<(String, OpBehavior, Pos)>,
    pub lifecycles: Vec<(String, LifecycleState, Pos)>,
    pub monitors: Vec<MonitorSpec>,
    /// Declaration position of each monitor, parallel to `monitors`.
    pub monitor_pos: Vec<Pos>,
}

type PResult<T> = Result<T, Diagnostic>;

enum Member {
    Property(String, Value),
    InPort(String),
    OutPort(String),
    Operation(String, usize),
}

fn kind(cur: &mut Cursor) -> PResult<ValueKind> {
    let (base, pos) = cur.ident()?;
    let text = if cur.eat(&Tok::LBracket) {
        cur.expect(&Tok::RBracket)?;
        format!("{base}[]")
    } else {
        base
    };
    ValueKind::parse(&text).ok_or_else(|| Diagnostic::error(pos, format!("unknown kind `{text}`")))
}

fn member(cur: &mut Cursor, what: &str, name: String) -> PResult<Member> {
    Ok(match what {
        "property" => {
            let k = kind(cur)?;
            cur.expect(&Tok::Eq)?;
            let pos = cur.pos();
            let v = parse_value_tokens(cur)?;
            let v = v.coerce_to(k).ok_or_else(|| {
                Diagnostic::error(pos, format!("literal of kind {} does not match declared kind {k}", v.kind()))
            })?;
            Member::Property(name, v)
        }
        "inport" => Member::InPort(name),
        "outport" => Member::OutPort(name),
        _ => {
            cur.keyword("arity")?;
            let (n, _) = cur.uint()?;
            Member::Operation(name, n as usize)
        }
    })
}

fn add_member(t: &mut ComponentTemplate, m: Member) {
    match m {
        Member::Property(n, v) => t.properties.push((n, v)),
        Member::InPort(n) => t.in_ports.push(n),
        Member::OutPort(n) => t.out_ports.push(n),
        Member::Operation(n, a) => t.operations.push(OperationSpec::new(n, a)),
    }
}

fn dotted(cur: &mut Cursor) -> PResult<(String, String, Pos)> {
    let (path, pos) = cur.ident()?;
    let (c, m) = split_path(&path)
        .map_err(|_| Diagnostic::error(pos, format!("expected <component>.<name>, found `{path}`")))?;
    Ok((c.to_string(), m.to_string(), pos))
}

impl SystemModel {
    pub fn parse(text: &str) -> Result<SystemModel, Vec<Diagnostic>> {
        let mut model = SystemModel::default();
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
                    return Ok(());
                }
                model.statement(&mut cur)?;
                if !cur.at_eof() {
                    return Err(cur.unexpected("end of line"));
                }
                Ok(())
            });
            if let Err(d) = res {
                diags.push(d);
            }
        }
        if diags.is_empty() {
            Ok(model)
        } else {
            Err(diags)
        }
    }

    fn component_mut(&mut self, id: &str, pos: Pos) -> PResult<&mut ComponentTemplate> {
        self.components
            .get_mut(id)
            .map(|c| &mut c.template)
            .ok_or_else(|| Diagnostic::error(pos, format!("component `{id}` is not declared")))
    }

    fn statement(&mut self, cur: &mut Cursor) -> PResult<()> {
        let (kw, pos) = cur.ident()?;
        match kw.as_str() {
            "component" => {
                let (id, ipos) = cur.ident()?;
                if id.contains(['.', ':']) {
                    return Err(Diagnostic::error(ipos, format!("invalid component id `{id}`")));
                }
                cur.keyword("type")?;
                let (type_name, _) = cur.ident()?;
                if self.components.contains_key(&id) {
                    return Err(Diagnostic::error(ipos, format!("component `{id}` declared twice")));
                }
                self.components.insert(
                    id,
                    ComponentDecl {
                        type_name,
                        template: ComponentTemplate::default(),
                        pos,
                    },
                );
            }
            "property" | "inport" | "outport" | "operation" => {
                let (comp, name, dpos) = dotted(cur)?;
                let m = member(cur, &kw, name)?;
                add_member(self.component_mut(&comp, dpos)?, m);
            }
            "type" => {
                let (type_name, _) = cur.ident()?;
                let (what, wpos) = cur.ident()?;
                if !matches!(what.as_str(), "property" | "inport" | "outport" | "operation") {
                    return Err(Diagnostic::error(wpos, format!("unexpected `{what}` in type declaration")));
                }
                let (name, _) = cur.ident()?;
                let m = member(cur, &what, name)?;
                add_member(self.types.entry(type_name).or_default(), m);
            }
            "connect" => {
                let (a, ap, _) = dotted(cur)?;
                cur.expect(&Tok::Arrow)?;
                let (b, bp, _) = dotted(cur)?;
                self.connections.push((format!("{a}.{ap}"), format!("{b}.{bp}"), pos));
            }
            "fault" => {
                let (c, op, _) = dotted(cur)?;
                let (b, bpos) = cur.ident()?;
                let behavior = match b.as_str() {
                    "succeed" => OpBehavior::Succeed,
                    "crash" => OpBehavior::Crash,
                    "fail" => OpBehavior::Fail(cur.string()?.0),
                    "block" => OpBehavior::Block(Duration::from_millis(cur.uint()?.0)),
                    _ => return Err(Diagnostic::error(bpos, format!("unknown fault behavior `{b}`"))),
                };
                self.faults.push((format!("{c}.{op}"), behavior, pos));
            }
            "lifecycle" => {
                let (id, _) = cur.ident()?;
                let (state, spos) = cur.ident()?;
                let state: LifecycleState = state
                    .parse()
                    .ok()
                    .filter(|s| *s != LifecycleState::Fatal)
                    .ok_or_else(|| Diagnostic::error(spos, format!("unknown lifecycle state `{state}`")))?;
                self.lifecycles.push((id, state, pos));
            }
            "monitor" => {
                let (id, _) = cur.ident()?;
                cur.keyword("watch")?;
                let (c, m, _) = dotted(cur)?;
                cur.keyword("when")?;
                let opos = cur.pos();
                let op = match cur.next().tok {
                    Tok::Ident(s) => s.parse().ok(),
                    Tok::Lt => Some(Comparison::Lt),
                    Tok::Le => Some(Comparison::Le),
                    Tok::Gt => Some(Comparison::Gt),
                    Tok::Ge => Some(Comparison::Ge),
                    Tok::EqEq => Some(Comparison::Eq),
                    _ => None,
                }
                .ok_or_else(|| Diagnostic::error(opos, "expected lt, le, gt, ge or eq"))?;
                let threshold = parse_value_tokens(cur)?;
                cur.keyword("emit")?;
                let (emit, epos) = cur.ident()?;
                if !crate::event::is_valid_event_name(&emit) {
                    return Err(Diagnostic::error(epos, format!("invalid event name `{emit}`")));
                }
                let edge = match cur.peek() {
                    Tok::Ident(s) if s == "edge" => {
                        cur.next();
                        true
                    }
                    _ => false,
                };
                self.monitor_pos.push(pos);
                self.monitors.push(MonitorSpec {
                    id,
                    watch: format!("{c}.{m}"),
                    op,
                    threshold,
                    emit,
                    edge,
                });
            }
            other => return Err(Diagnostic::error(pos, format!("unknown statement `{other}`"))),
        }
        Ok(())
    }

    /// Explicit `type` declarations plus the type of every declared component.
    pub fn catalog(&self) -> TypeCatalog {
        let mut cat = TypeCatalog::default();
        for c in self.components.values().rev() {
            cat.insert(c.type_name.clone(), c.template.clone());
        }
        for (name, t) in &self.types {
            cat.insert(name.clone(), t.clone());
        }
        cat
    }

    /// Instantiates components, connections, faults and initial lifecycles.
    pub fn build_registry(&self) -> Result<Registry, Vec<Diagnostic>> {
        let mut r = Registry::new();
        let mut diags = Vec::new();
        let mut check = |res: Result<_, crate::runtime::RegistryError>, pos: Pos| {
            if let Err(e) = res {
                diags.push(Diagnostic::error(pos, e.to_string()));
            }
        };
        for (id, c) in &self.components {
            check(r.component_create(id, &c.type_name, &c.template), c.pos);
        }
        for (from, to, pos) in &self.connections {
            check(r.connection_create(from, to), *pos);
        }
        for (target, b, pos) in &self.faults {
            check(r.set_behavior(target, b.clone()), *pos);
        }
        for (id, state, pos) in &self.lifecycles {
            check(r.bring_to(id, *state).map(|_| ()), *pos);
        }
        for (m, pos) in self.monitors.iter().zip(&self.monitor_pos) {
            if !super::watchable(&r, &m.watch) {
                diags.push(Diagnostic::error(*pos, format!("monitor {}: unknown target `{}`", m.id, m.watch)));
            }
        }
        if diags.is_empty() {
            Ok(r)
        } else {
            Err(diags)
        }
    }
}
