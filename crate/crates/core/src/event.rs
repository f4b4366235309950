use std::fmt;

use thiserror::Error;

use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid event name {0:?}")]
pub struct InvalidEventName(pub String);

/// Returns true if `name` matches `[A-Za-z_][A-Za-z0-9_.:]*`.
pub fn is_valid_event_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | ':'))
}

/// A named signal; the only thing that travels between monitors, the
/// coordinator and the configurator.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    name: String,
    payload: Option<Value>,
    source: String,
}

impl Event {
    pub fn new(name: impl Into<String>, source: impl Into<String>) -> Result<Event, InvalidEventName> {
        let name = name.into();
        if !is_valid_event_name(&name) {
            return Err(InvalidEventName(name));
        }
        Ok(Event {
            name,
            payload: None,
            source: source.into(),
        })
    }

    pub fn with_payload(mut self, payload: Value) -> Event {
        self.payload = Some(payload);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn payload(&self) -> Option<&Value> {
        self.payload.as_ref()
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} src={}", self.name, self.source)?;
        if let Some(p) = &self.payload {
            write!(f, " payload={p}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn name_pattern() {
        assert!(is_valid_event_name("e_comm_ok"));
        assert!(is_valid_event_name("conf.applied.five_DOF"));
        assert!(is_valid_event_name("_x:y"));
        assert!(!is_valid_event_name(""));
        assert!(!is_valid_event_name("1abc"));
        assert!(!is_valid_event_name("a b"));
        assert!(Event::new("bad-name", "test").is_err());
    }
}
