//! Line-oriented run traces: `T=<t> <KIND> <detail>`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TraceKind {
    Event,
    Transition,
    Conf,
    Monitor,
    Assert,
}

impl TraceKind {
    pub fn keyword(self) -> &'static str {
        match self {
            TraceKind::Event => "EVENT",
            TraceKind::Transition => "TRANSITION",
            TraceKind::Conf => "CONF",
            TraceKind::Monitor => "MONITOR",
            TraceKind::Assert => "ASSERT",
        }
    }
}

impl FromStr for TraceKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Ok(match s {
            "EVENT" => TraceKind::Event,
            "TRANSITION" => TraceKind::Transition,
            "CONF" => TraceKind::Conf,
            "MONITOR" => TraceKind::Monitor,
            "ASSERT" => TraceKind::Assert,
            _ => return Err(()),
        })
    }
}

impl fmt::Display for TraceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRecord {
    /// Milliseconds, logical or wall-clock depending on the run mode.
    pub time: u64,
    pub kind: TraceKind,
    pub detail: String,
}

impl TraceRecord {
    pub fn new(time: u64, kind: TraceKind, detail: impl Into<String>) -> Self {
        TraceRecord {
            time,
            kind,
            detail: detail.into(),
        }
    }

    /// The event name of an EVENT record.
    pub fn event_name(&self) -> Option<&str> {
        match self.kind {
            TraceKind::Event => self.detail.split(' ').next(),
            _ => None,
        }
    }
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T={} {} {}", self.time, self.kind, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct TraceParseError {
    pub line: usize,
    pub message: String,
}

impl FromStr for TraceRecord {
    type Err = String;

    fn from_str(line: &str) -> Result<Self, String> {
        let mut parts = line.splitn(3, ' ');
        let time = parts
            .next()
            .and_then(|t| t.strip_prefix("T="))
            .ok_or("expected `T=<time>`")?
            .parse()
            .map_err(|_| "invalid time")?;
        let kind = parts.next().ok_or("missing record kind")?;
        let kind = kind.parse().map_err(|_| format!("unknown record kind `{kind}`"))?;
        let detail = parts.next().unwrap_or("").to_string();
        Ok(TraceRecord { time, kind, detail })
    }
}

pub fn render_trace(records: &[TraceRecord]) -> String {
    records.iter().map(|r| format!("{r}\n")).collect()
}

/// Parses a saved trace. Blank lines are skipped.
pub fn parse_trace(text: &str) -> Result<Vec<TraceRecord>, TraceParseError> {
    let mut out: Vec<TraceRecord> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| TraceParseError { line: i + 1, message };
        let rec: TraceRecord = line.parse().map_err(err)?;
        if out.last().is_some_and(|p| p.time > rec.time) {
            return Err(err("time decreases".into()));
        }
        out.push(rec);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let recs = vec![
            TraceRecord::new(0, TraceKind::Transition, "(init) -> unsync raise=[]"),
            TraceRecord::new(10, TraceKind::Event, "e_comm_ok src=scenario"),
            TraceRecord::new(10, TraceKind::Conf, "five_DOF applied phase=post detail=-"),
        ];
        let text = render_trace(&recs);
        assert!(text.starts_with("T=0 TRANSITION (init) -> unsync raise=[]\n"));
        assert_eq!(parse_trace(&text).unwrap(), recs);
        assert_eq!(recs[1].event_name(), Some("e_comm_ok"));
    }

    #[test]
    fn rejects_bad_lines() {
        assert_eq!(parse_trace("T=1 EVENT a\nT=0 EVENT b").unwrap_err().line, 2);
        assert!(parse_trace("T=x EVENT a").is_err());
        assert!(parse_trace("T=1 NOPE a").is_err());
    }
}
