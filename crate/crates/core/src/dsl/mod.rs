//! The configuration language: model, parser, canonical printer and
//! validator.

mod model;
mod parser;
mod print;
mod validate;

pub use model::*;
pub use parser::{parse_configuration, parse_configurator_conf, parse_value};
pub(crate) use parser::value as parse_value_tokens;
pub use print::pretty_print;
pub use validate::{check_targets, validate, IssueClass, ModelRef, Projection, TargetIssue};
