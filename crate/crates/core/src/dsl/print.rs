use std::fmt::Write;

use super::model::*;

fn statelist(entries: &[LifecycleSpecEntry]) -> String {
    let items: Vec<String> = entries.iter().map(|e| format!("'{e}'")).collect();
    format!("{{ {} }}", items.join(", "))
}

/// Renders `conf` in canonical form. Parsing the output yields a model equal
/// to `conf`, and printing is a fixed point.
pub fn pretty_print(conf: &ConfiguratorConf) -> String {
    let mut out = String::from("ConfiguratorConf {\n");
    for (id, c) in &conf.configurations {
        if c.pre.is_empty() && c.post.is_empty() && c.changes.is_empty() {
            let _ = writeln!(out, "    {id} = Configuration {{ }},");
            continue;
        }
        let _ = writeln!(out, "    {id} = Configuration {{");
        if !c.pre.is_empty() {
            let _ = writeln!(out, "        pre_conf_state = {},", statelist(&c.pre));
        }
        if !c.post.is_empty() {
            let _ = writeln!(out, "        post_conf_state = {},", statelist(&c.post));
        }
        for ch in &c.changes {
            let _ = writeln!(out, "        {ch},");
        }
        out.push_str("    },\n");
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_configurator_conf;
    use crate::runtime::LifecycleState;
    use crate::value::Value;

    #[test]
    fn prints_canonical_layout() {
        let mut conf = ConfiguratorConf::default();
        let mut c = Configuration::with_changes(vec![Change::port_write(
            "Cart_Impedance.ext_ref_mode",
            Value::Bool(false),
        )]);
        c.post.push(LifecycleSpecEntry::new("_default", LifecycleState::Running));
        conf.configurations.insert("disable_copying".into(), c);
        conf.configurations.insert("noop".into(), Configuration::default());
        let text = pretty_print(&conf);
        assert_eq!(
            text,
            "ConfiguratorConf {\n    disable_copying = Configuration {\n        post_conf_state = { '_default:running' },\n        port_write(\"Cart_Impedance.ext_ref_mode\", false),\n    },\n    noop = Configuration { },\n}\n"
        );
        assert_eq!(parse_configurator_conf(&text).unwrap(), conf);
    }
}
