//! Static checks on parsed configurations, optionally against a system model.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::diag::{Diagnostic, Pos};
use crate::runtime::{split_path, Component, ComponentTemplate, PortRef, Registry, TypeCatalog};
use crate::value::Value;

use super::model::*;

/// A component system to check targets against.
#[derive(Clone, Copy)]
pub struct ModelRef<'a> {
    pub registry: &'a Registry,
    pub catalog: &'a TypeCatalog,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IssueClass {
    /// A target or lifecycle subject does not exist; the configuration cannot
    /// be resolved.
    Unresolved,
    /// Resolvable, but bound to fail when applied (kind, arity, duplicate id).
    Runtime,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetIssue {
    pub class: IssueClass,
    pub pos: Pos,
    pub message: String,
}

enum Member<'a> {
    Live(&'a Component),
    Planned(&'a ComponentTemplate),
}

impl Member<'_> {
    fn property_value(&self, name: &str) -> Option<&Value> {
        match self {
            Member::Live(c) => c.property(name),
            Member::Planned(t) => t.properties.iter().find(|(n, _)| n == name).map(|(_, v)| v),
        }
    }

    fn has_in_port(&self, name: &str) -> bool {
        match self {
            Member::Live(c) => c.has_in_port(name),
            Member::Planned(t) => t.in_ports.iter().any(|p| p == name),
        }
    }

    fn has_out_port(&self, name: &str) -> bool {
        match self {
            Member::Live(c) => c.has_out_port(name),
            Member::Planned(t) => t.out_ports.iter().any(|p| p == name),
        }
    }

    fn op_arity(&self, name: &str) -> Option<usize> {
        match self {
            Member::Live(c) => c.operation(name).map(|o| o.arity),
            Member::Planned(t) => t.operations.iter().find(|o| o.name == name).map(|o| o.arity),
        }
    }
}

/// The component population a configuration sees: the registry plus the
/// components it creates, minus the ones it destroys.
pub struct Projection<'a> {
    model: ModelRef<'a>,
    created: BTreeMap<&'a str, &'a ComponentTemplate>,
    destroyed: HashSet<&'a str>,
}

impl<'a> Projection<'a> {
    pub fn new(model: ModelRef<'a>, config: &'a Configuration) -> Self {
        let mut created = BTreeMap::new();
        let mut destroyed = HashSet::new();
        for ch in &config.changes {
            match ch.kind {
                ChangeKind::ComponentCreate => {
                    if let Some(t) = ch.second().and_then(|t| model.catalog.get(t)) {
                        created.insert(ch.target.as_str(), t);
                    }
                }
                ChangeKind::ComponentDestroy => {
                    destroyed.insert(ch.target.as_str());
                }
                _ => {}
            }
        }
        Projection {
            model,
            created,
            destroyed,
        }
    }

    fn member(&self, id: &str) -> Option<Member<'a>> {
        if let Some(c) = self.model.registry.component(id) {
            return Some(Member::Live(c));
        }
        self.created.get(id).map(|t| Member::Planned(t))
    }

    /// Ids present after the changes are applied, sorted.
    pub fn final_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self
            .model
            .registry
            .components()
            .map(|c| c.id().to_string())
            .filter(|id| !self.destroyed.contains(id.as_str()))
            .collect();
        ids.extend(self.created.keys().map(|s| s.to_string()));
        ids.sort();
        ids.dedup();
        ids
    }

    /// Ids present before the changes, sorted.
    pub fn initial_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.model.registry.components().map(|c| c.id().to_string()).collect();
        ids.sort();
        ids
    }
}

/// Checks every change target and lifecycle subject of `config` against
/// `model`.
pub fn check_targets(config: &Configuration, model: ModelRef<'_>) -> Vec<TargetIssue> {
    let proj = Projection::new(model, config);
    let mut issues = Vec::new();
    let mut push = |class, pos, message: String| issues.push(TargetIssue { class, pos, message });
    let unresolved = IssueClass::Unresolved;

    let initial: HashSet<String> = proj.initial_ids().into_iter().collect();
    let fin: HashSet<String> = proj.final_ids().into_iter().collect();
    for (list, ids, label) in [(&config.pre, &initial, "pre_conf_state"), (&config.post, &fin, "post_conf_state")] {
        for e in list {
            if let Subject::Component(id) = &e.subject {
                if !ids.contains(id) {
                    push(unresolved, config.pos, format!("{label}: unknown component `{id}`"));
                }
            }
        }
    }

    for ch in &config.changes {
        let pos = ch.pos;
        match ch.kind {
            ChangeKind::PropertySet | ChangeKind::PortWrite | ChangeKind::OperationCall => {
                let Ok((comp, name)) = split_path(&ch.target) else {
                    push(unresolved, pos, format!("malformed target {:?}", ch.target));
                    continue;
                };
                let Some(m) = proj.member(comp) else {
                    push(unresolved, pos, format!("{}: unknown component `{comp}`", ch.kind));
                    continue;
                };
                match ch.kind {
                    ChangeKind::PropertySet => match m.property_value(name) {
                        None => push(unresolved, pos, format!("unknown property `{}`", ch.target)),
                        Some(decl) => {
                            if let Some(v) = ch.value() {
                                if v.coerce_to(decl.kind()).is_none() {
                                    push(
                                        IssueClass::Runtime,
                                        pos,
                                        format!("{}: kind mismatch, expected {}, found {}", ch.target, decl.kind(), v.kind()),
                                    );
                                }
                            }
                        }
                    },
                    ChangeKind::PortWrite => {
                        if !m.has_in_port(name) && !m.has_out_port(name) {
                            push(unresolved, pos, format!("unknown port `{}`", ch.target));
                        }
                    }
                    _ => match m.op_arity(name) {
                        None => push(unresolved, pos, format!("unknown operation `{}`", ch.target)),
                        Some(a) if a != ch.args.len() => push(
                            IssueClass::Runtime,
                            pos,
                            format!("{}: expected {a} arguments, got {}", ch.target, ch.args.len()),
                        ),
                        Some(_) => {}
                    },
                }
            }
            ChangeKind::ComponentCreate => {
                let ty = ch.second().unwrap_or_default();
                if model.catalog.get(ty).is_none() {
                    push(unresolved, pos, format!("unknown component type `{ty}`"));
                }
                if model.registry.component(&ch.target).is_some() {
                    push(IssueClass::Runtime, pos, format!("component id {:?} already exists", ch.target));
                }
            }
            ChangeKind::ComponentDestroy => {
                if proj.member(&ch.target).is_none() {
                    push(unresolved, pos, format!("component_destroy: unknown component `{}`", ch.target));
                }
            }
            ChangeKind::ConnectionCreate | ChangeKind::ConnectionRemove => {
                let to = ch.second().unwrap_or_default();
                for (end, out) in [(ch.target.as_str(), true), (to, false)] {
                    let Ok(r) = PortRef::parse(end) else {
                        push(unresolved, pos, format!("malformed endpoint {end:?}"));
                        continue;
                    };
                    match proj.member(&r.component) {
                        None => push(unresolved, pos, format!("{}: unknown component `{}`", ch.kind, r.component)),
                        Some(m) => {
                            let ok = if out { m.has_out_port(&r.port) } else { m.has_in_port(&r.port) };
                            if !ok {
                                let dir = if out { "out-port" } else { "in-port" };
                                push(unresolved, pos, format!("{}: unknown {dir} `{end}`", ch.kind));
                            }
                        }
                    }
                }
            }
        }
    }
    issues
}

fn check_lists(config: &Configuration, diags: &mut Vec<Diagnostic>) {
    for (list, label) in [(&config.pre, "pre_conf_state"), (&config.post, "post_conf_state")] {
        let mut seen = HashSet::new();
        for e in list {
            if !seen.insert(&e.subject) {
                let msg = match &e.subject {
                    Subject::Default => format!("{label}: `_default` given more than once"),
                    Subject::Component(id) => format!("{label}: component `{id}` mentioned more than once"),
                };
                diags.push(Diagnostic::error(config.pos, msg));
            }
        }
    }
}

/// No two changes of one configuration may write the same property or port.
/// With a model, a direct write to an in-port that a written out-port feeds
/// conflicts too, as do two written out-ports feeding one in-port: the result
/// would depend on application order.
fn check_conflicts(config: &Configuration, model: Option<ModelRef<'_>>, diags: &mut Vec<Diagnostic>) {
    let mut seen: HashMap<(ChangeKind, &str), Pos> = HashMap::new();
    for ch in &config.changes {
        let key = (ch.kind, ch.target.as_str());
        match ch.kind {
            ChangeKind::PropertySet | ChangeKind::PortWrite => {
                if let Some(first) = seen.get(&key) {
                    diags.push(Diagnostic::error(
                        ch.pos,
                        format!(
                            "conflict: {} targets `{}` already written at line {}",
                            ch.kind, ch.target, first.line
                        ),
                    ));
                } else {
                    seen.insert(key, ch.pos);
                }
            }
            ChangeKind::OperationCall => {
                if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(key) {
                    e.insert(ch.pos);
                } else {
                    diags.push(Diagnostic::warning(
                        ch.pos,
                        format!("operation `{}` called more than once; relative order is unspecified", ch.target),
                    ));
                }
            }
            _ => {}
        }
    }

    let Some(model) = model else { return };
    let written: HashMap<&str, Pos> = config
        .changes
        .iter()
        .filter(|c| c.kind == ChangeKind::PortWrite)
        .map(|c| (c.target.as_str(), c.pos))
        .collect();
    let mut links: Vec<(String, String)> = model
        .registry
        .connections()
        .map(|c| (c.from.to_string(), c.to.to_string()))
        .collect();
    links.extend(
        config
            .changes
            .iter()
            .filter(|c| c.kind == ChangeKind::ConnectionCreate)
            .filter_map(|c| Some((c.target.clone(), c.second()?.to_string()))),
    );
    let mut feeders: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (from, to) in &links {
        if let (Some(_), Some(pos)) = (written.get(from.as_str()), written.get(to.as_str())) {
            diags.push(Diagnostic::error(
                *pos,
                format!("conflict: `{to}` is written directly and also fed by written out-port `{from}`"),
            ));
        }
        if written.contains_key(from.as_str()) {
            feeders.entry(to.as_str()).or_default().push(from.as_str());
        }
    }
    for (to, mut from) in feeders.into_iter().filter(|(_, f)| f.len() > 1) {
        from.sort_unstable();
        from.dedup();
        if from.len() > 1 {
            diags.push(Diagnostic::error(
                written[from[1]],
                format!("conflict: `{to}` is fed by several written out-ports ({})", from.join(", ")),
            ));
        }
    }
}

/// Returns all diagnostics for `conf`; errors make the file unusable.
pub fn validate(conf: &ConfiguratorConf, model: Option<ModelRef<'_>>) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    for (id, config) in &conf.configurations {
        check_lists(config, &mut diags);
        check_conflicts(config, model, &mut diags);
        if let Some(model) = model {
            for issue in check_targets(config, model) {
                diags.push(Diagnostic::error(issue.pos, format!("{id}: {}", issue.message)));
            }
        }
    }
    diags.sort_by_key(|d| (d.line, d.col));
    diags
}
