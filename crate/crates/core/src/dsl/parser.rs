//! Recursive-descent parser for `.conf` files.
//!
//! ```text
//! conf          := 'ConfiguratorConf' '{' (id '=' configuration ','?)* '}'
//! configuration := 'Configuration' '{' (item (',' item)* ','?)? '}'
//! item          := 'pre_conf_state' '=' statelist
//!                | 'post_conf_state' '=' statelist
//!                | kind '(' string (',' value)* ')'
//! statelist     := '{' ((string | id '=' string) (',' ...)* ','?)? '}'
//! value         := 'true' | 'false' | number | string | '{' value (',' value)* ','? '}'
//! ```

use crate::diag::{Diagnostic, Pos};
use crate::lex::{tokenize, Cursor, Tok};
use crate::runtime::{split_path, LifecycleState};
use crate::value::Value;

use super::model::*;

type PResult<T> = Result<T, Diagnostic>;

/// Parses a whole `.conf` document. On failure the returned list holds at
/// least one error.
pub fn parse_configurator_conf(text: &str) -> Result<ConfiguratorConf, Vec<Diagnostic>> {
    let toks = tokenize(text).map_err(|d| vec![d])?;
    let mut p = Parser {
        cur: Cursor::new(toks),
        diags: Vec::new(),
    };
    match p.conf() {
        Ok(conf) if p.diags.is_empty() => Ok(conf),
        Ok(_) => Err(p.diags),
        Err(d) => {
            p.diags.push(d);
            Err(p.diags)
        }
    }
}

/// Parses a document holding one bare `Configuration { ... }`.
pub fn parse_configuration(text: &str) -> Result<Configuration, Vec<Diagnostic>> {
    let toks = tokenize(text).map_err(|d| vec![d])?;
    let mut p = Parser {
        cur: Cursor::new(toks),
        diags: Vec::new(),
    };
    let res = p.configuration().and_then(|c| {
        if p.cur.at_eof() {
            Ok(c)
        } else {
            Err(p.cur.unexpected("end of input"))
        }
    });
    match res {
        Ok(c) if p.diags.is_empty() => Ok(c),
        Ok(_) => Err(p.diags),
        Err(d) => {
            p.diags.push(d);
            Err(p.diags)
        }
    }
}

/// Parses a single value literal such as `{0.1, 0.1, 0.1}` or `"text"`.
pub fn parse_value(text: &str) -> Result<Value, Diagnostic> {
    let toks = tokenize(text)?;
    let mut cur = Cursor::new(toks);
    let v = value(&mut cur)?;
    if !cur.at_eof() {
        return Err(cur.unexpected("end of value"));
    }
    Ok(v)
}

pub(crate) fn value(cur: &mut Cursor) -> PResult<Value> {
    let pos = cur.pos();
    match cur.peek().clone() {
        Tok::Ident(s) if s == "true" => {
            cur.next();
            Ok(Value::Bool(true))
        }
        Tok::Ident(s) if s == "false" => {
            cur.next();
            Ok(Value::Bool(false))
        }
        Tok::Int(i) => {
            cur.next();
            Ok(Value::Int(i))
        }
        Tok::Real(r) => {
            cur.next();
            Ok(Value::Real(r))
        }
        Tok::Str(s) => {
            cur.next();
            Ok(Value::Str(s))
        }
        Tok::LBrace => {
            cur.next();
            let mut items = Vec::new();
            loop {
                if cur.eat(&Tok::RBrace) {
                    break;
                }
                items.push(value(cur)?);
                if !cur.eat(&Tok::Comma) {
                    cur.expect(&Tok::RBrace)?;
                    break;
                }
            }
            Value::array(items).map_err(|e| Diagnostic::error(pos, e.to_string()))
        }
        _ => Err(cur.unexpected("value")),
    }
}

struct Parser {
    cur: Cursor,
    diags: Vec<Diagnostic>,
}

impl Parser {
    fn conf(&mut self) -> PResult<ConfiguratorConf> {
        self.cur.keyword("ConfiguratorConf")?;
        self.cur.expect(&Tok::LBrace)?;
        let mut conf = ConfiguratorConf::default();
        while !self.cur.eat(&Tok::RBrace) {
            let (id, pos) = self.cur.ident()?;
            if !is_valid_config_id(&id) {
                return Err(Diagnostic::error(pos, format!("invalid configuration id `{id}`")));
            }
            self.cur.expect(&Tok::Eq)?;
            let mut c = self.configuration()?;
            c.pos = pos;
            if conf.configurations.contains_key(&id) {
                self.diags
                    .push(Diagnostic::error(pos, format!("duplicate configuration id `{id}`")));
            } else {
                conf.configurations.insert(id, c);
            }
            self.cur.eat(&Tok::Comma);
        }
        if !self.cur.at_eof() {
            return Err(self.cur.unexpected("end of input"));
        }
        Ok(conf)
    }

    fn configuration(&mut self) -> PResult<Configuration> {
        self.cur.keyword("Configuration")?;
        self.cur.expect(&Tok::LBrace)?;
        let mut c = Configuration::default();
        let (mut seen_pre, mut seen_post) = (false, false);
        loop {
            if self.cur.eat(&Tok::RBrace) {
                break;
            }
            let (name, pos) = self.cur.ident()?;
            match name.as_str() {
                "pre_conf_state" | "post_conf_state" => {
                    let seen = if name == "pre_conf_state" {
                        &mut seen_pre
                    } else {
                        &mut seen_post
                    };
                    if *seen {
                        return Err(Diagnostic::error(pos, format!("`{name}` given twice")));
                    }
                    *seen = true;
                    self.cur.expect(&Tok::Eq)?;
                    let list = self.statelist()?;
                    if name == "pre_conf_state" {
                        c.pre = list;
                    } else {
                        c.post = list;
                    }
                }
                other => {
                    let kind: ChangeKind = other.parse().map_err(|_| {
                        Diagnostic::error(
                            pos,
                            format!("expected `pre_conf_state`, `post_conf_state` or a change kind, found `{other}`"),
                        )
                    })?;
                    c.changes.push(self.change(kind, pos)?);
                }
            }
            if !self.cur.eat(&Tok::Comma) {
                self.cur.expect(&Tok::RBrace)?;
                break;
            }
        }
        Ok(c)
    }

    fn statelist(&mut self) -> PResult<Vec<LifecycleSpecEntry>> {
        self.cur.expect(&Tok::LBrace)?;
        let mut out = Vec::new();
        loop {
            if self.cur.eat(&Tok::RBrace) {
                break;
            }
            let pos = self.cur.pos();
            let entry = match self.cur.peek().clone() {
                Tok::Str(s) => {
                    self.cur.next();
                    let (subject, state) = s.split_once(':').ok_or_else(|| {
                        Diagnostic::error(pos, format!("expected 'component:state', found {s:?}"))
                    })?;
                    lifecycle_entry(subject, state, pos)?
                }
                Tok::Ident(subject) => {
                    self.cur.next();
                    self.cur.expect(&Tok::Eq)?;
                    let (state, spos) = self.cur.string()?;
                    lifecycle_entry(&subject, &state, spos)?
                }
                _ => return Err(self.cur.unexpected("lifecycle entry")),
            };
            out.push(entry);
            if !self.cur.eat(&Tok::Comma) {
                self.cur.expect(&Tok::RBrace)?;
                break;
            }
        }
        Ok(out)
    }

    fn change(&mut self, kind: ChangeKind, pos: Pos) -> PResult<Change> {
        self.cur.expect(&Tok::LParen)?;
        let (target, tpos) = self.cur.string()?;
        let mut args = Vec::new();
        while self.cur.eat(&Tok::Comma) {
            args.push(value(&mut self.cur)?);
        }
        self.cur.expect(&Tok::RParen)?;
        let change = Change {
            kind,
            target,
            args,
            pos,
        };
        check_change_shape(&change, tpos)?;
        Ok(change)
    }
}

fn lifecycle_entry(subject: &str, state: &str, pos: Pos) -> PResult<LifecycleSpecEntry> {
    if subject.is_empty() || subject.contains('.') {
        return Err(Diagnostic::error(pos, format!("invalid component id {subject:?}")));
    }
    let target: LifecycleState = state
        .parse()
        .ok()
        .filter(|s| *s != LifecycleState::Fatal)
        .ok_or_else(|| {
            Diagnostic::error(
                pos,
                format!("unknown lifecycle target {state:?} (expected preoperational, stopped, configure or running)"),
            )
        })?;
    Ok(LifecycleSpecEntry::new(subject, target))
}

fn check_change_shape(c: &Change, pos: Pos) -> PResult<()> {
    let err = |msg: String| Err(Diagnostic::error(pos, format!("{}: {msg}", c.kind)));
    let plain_id = |s: &str| !s.is_empty() && !s.contains('.');
    if c.kind.is_dotted() && split_path(&c.target).is_err() {
        return err(format!("target {:?} must have the form component.name", c.target));
    }
    match c.kind {
        ChangeKind::PropertySet | ChangeKind::PortWrite if c.args.len() != 1 => {
            err(format!("expected exactly one value, got {}", c.args.len()))
        }
        ChangeKind::ComponentCreate => match (c.args.as_slice(), plain_id(&c.target)) {
            ([Value::Str(t)], true) if !t.is_empty() => Ok(()),
            _ => err("expected (\"id\", \"type_name\")".into()),
        },
        ChangeKind::ComponentDestroy if !c.args.is_empty() || !plain_id(&c.target) => {
            err("expected (\"id\")".into())
        }
        ChangeKind::ConnectionCreate | ChangeKind::ConnectionRemove => {
            match c.args.as_slice() {
                [Value::Str(to)] if split_path(&c.target).is_ok() && split_path(to).is_ok() => Ok(()),
                _ => err("expected (\"comp.out_port\", \"comp.in_port\")".into()),
            }
        }
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_conf() {
        assert!(parse_configurator_conf("ConfiguratorConf { }").unwrap().is_empty());
    }

    #[test]
    fn map_and_list_state_forms_are_equivalent() {
        let a = parse_configurator_conf(
            "ConfiguratorConf { c = Configuration { post_conf_state = { _default='running', x = \"stopped\" } } }",
        )
        .unwrap();
        let b = parse_configurator_conf(
            "ConfiguratorConf { c = Configuration { post_conf_state = { '_default:running', 'x:configure' } } }",
        )
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(a.get("c").unwrap().post[0].subject, Subject::Default);
    }

    #[test]
    fn duplicate_ids_are_errors() {
        let err = parse_configurator_conf(
            "ConfiguratorConf {\n a = Configuration { },\n a = Configuration { } }",
        )
        .unwrap_err();
        assert_eq!(err.len(), 1);
        assert_eq!(err[0].line, 3);
        assert!(err[0].message.contains("duplicate"));
    }

    #[test]
    fn syntax_errors_point_at_the_offending_line() {
        let cases = [
            ("ConfiguratorConf {\n a = Configuration {\n port_write(\"x.y\" 1)\n }\n}", 3),
            ("ConfiguratorConf {\n a = Configuration {\n property_set(\"x.y\", 1)\n", 4),
            ("ConfiguratorConf {\n\n a = Configuraton { }\n}", 3),
            ("ConfiguratorConf {\n a = Configuration { pre_conf_state = { 'x:flying' } }\n}", 2),
            ("ConfiguratorConf {\n a = Configuration {\n  port_write(\"nodot\", 1) } }", 3),
            ("ConfiguratorConf {\n a = Configuration {\n  frobnicate(\"x.y\", 1) } }", 3),
            ("ConfiguratorConf {\n a = Configuration {\n  port_write(\"x.y\", {1, true}) } }", 3),
            ("ConfiguratorConf { } }", 1),
        ];
        for (src, line) in cases {
            let diags = parse_configurator_conf(src).unwrap_err();
            assert!(!diags.is_empty());
            assert!(diags[0].is_error());
            assert_eq!(diags[0].line, line, "{src}\n{:?}", diags[0]);
        }
    }

    #[test]
    fn deployment_change_shapes() {
        let ok = parse_configurator_conf(
            r#"ConfiguratorConf { boot = Configuration {
                component_create("A", "t"), component_destroy("B"),
                connection_create("A.o", "B.i"), connection_remove("A.o", "B.i"), } }"#,
        )
        .unwrap();
        assert_eq!(ok.get("boot").unwrap().changes.len(), 4);
        for bad in [
            r#"component_create("A")"#,
            r#"component_create("A.b", "t")"#,
            r#"component_destroy("A", 1)"#,
            r#"connection_create("A.o", "B")"#,
            r#"port_write("a.b", 1, 2)"#,
        ] {
            let src = format!("ConfiguratorConf {{ c = Configuration {{ {bad} }} }}");
            assert!(parse_configurator_conf(&src).is_err(), "{bad}");
        }
    }

    #[test]
    fn value_literals() {
        assert_eq!(parse_value("{0, 0, 0}").unwrap(), Value::Array(vec![Value::Int(0); 3]));
        assert_eq!(parse_value("'hi'").unwrap(), Value::Str("hi".into()));
        assert_eq!(parse_value("-4.5").unwrap(), Value::Real(-4.5));
        assert!(parse_value("{}").is_err());
        assert!(parse_value("1 2").is_err());
    }
}
