//! Dynamically typed values carried by ports, properties and operation arguments.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Kind of a scalar value; arrays are homogeneous over one of these.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarKind {
    Bool,
    Int,
    Real,
    Str,
}

impl ScalarKind {
    pub fn keyword(self) -> &'static str {
        match self {
            ScalarKind::Bool => "bool",
            ScalarKind::Int => "int",
            ScalarKind::Real => "real",
            ScalarKind::Str => "string",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    Scalar(ScalarKind),
    Array(ScalarKind),
}

impl ValueKind {
    /// Parses the kind keywords used in system model files: `real`, `real[]`, ...
    pub fn parse(s: &str) -> Option<ValueKind> {
        let (base, array) = match s.strip_suffix("[]") {
            Some(b) => (b, true),
            None => (s, false),
        };
        let scalar = match base {
            "bool" => ScalarKind::Bool,
            "int" => ScalarKind::Int,
            "real" => ScalarKind::Real,
            "string" => ScalarKind::Str,
            _ => return None,
        };
        Some(if array {
            ValueKind::Array(scalar)
        } else {
            ValueKind::Scalar(scalar)
        })
    }
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueKind::Scalar(k) => f.write_str(k.keyword()),
            ValueKind::Array(k) => write!(f, "{}[]", k.keyword()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValueError {
    #[error("array literal must not be empty")]
    EmptyArray,
    #[error("array elements must be scalars of one kind (found {0} and {1})")]
    Heterogeneous(String, String),
}

/// A datum flowing through the system.
///
/// Equality is exact and deep. Use [`Value::approx_eq`] when comparing
/// computed reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Value {
    Bool(bool),
    Int(i64),
    Real(f64),
    Str(String),
    Array(Vec<Value>),
}

impl Value {
    /// Builds a homogeneous array. Mixed int/real elements are promoted to real.
    pub fn array(items: Vec<Value>) -> Result<Value, ValueError> {
        let first = items.first().ok_or(ValueError::EmptyArray)?;
        let mut kind = match first.kind() {
            ValueKind::Scalar(k) => k,
            ValueKind::Array(_) => {
                return Err(ValueError::Heterogeneous(
                    first.kind().to_string(),
                    "nested array".into(),
                ))
            }
        };
        for item in &items[1..] {
            match (kind, item.kind()) {
                (a, ValueKind::Scalar(b)) if a == b => {}
                (ScalarKind::Int, ValueKind::Scalar(ScalarKind::Real)) => kind = ScalarKind::Real,
                (ScalarKind::Real, ValueKind::Scalar(ScalarKind::Int)) => {}
                (a, b) => return Err(ValueError::Heterogeneous(a.keyword().into(), b.to_string())),
            }
        }
        if kind == ScalarKind::Real {
            Ok(Value::Array(
                items
                    .into_iter()
                    .map(|v| match v {
                        Value::Int(i) => Value::Real(i as f64),
                        other => other,
                    })
                    .collect(),
            ))
        } else {
            Ok(Value::Array(items))
        }
    }

    pub fn kind(&self) -> ValueKind {
        match self {
            Value::Bool(_) => ValueKind::Scalar(ScalarKind::Bool),
            Value::Int(_) => ValueKind::Scalar(ScalarKind::Int),
            Value::Real(_) => ValueKind::Scalar(ScalarKind::Real),
            Value::Str(_) => ValueKind::Scalar(ScalarKind::Str),
            Value::Array(items) => match items.first().map(Value::kind) {
                Some(ValueKind::Scalar(k)) => ValueKind::Array(k),
                // empty arrays are only constructible by hand; treat them as real
                _ => ValueKind::Array(ScalarKind::Real),
            },
        }
    }

    /// Converts `self` to `kind` when the kinds agree or when an integer
    /// (or integer array) widens to real.
    pub fn coerce_to(&self, kind: ValueKind) -> Option<Value> {
        if self.kind() == kind {
            return Some(self.clone());
        }
        match (self, kind) {
            (Value::Int(i), ValueKind::Scalar(ScalarKind::Real)) => Some(Value::Real(*i as f64)),
            (Value::Array(items), ValueKind::Array(ScalarKind::Real))
                if self.kind() == ValueKind::Array(ScalarKind::Int) =>
            {
                Some(Value::Array(
                    items
                        .iter()
                        .map(|v| match v {
                            Value::Int(i) => Value::Real(*i as f64),
                            other => other.clone(),
                        })
                        .collect(),
                ))
            }
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(*i as f64),
            Value::Real(r) => Some(*r),
            _ => None,
        }
    }

    /// Euclidean norm of a numeric array, or absolute value of a numeric scalar.
    pub fn norm(&self) -> Option<f64> {
        match self {
            Value::Array(items) => {
                let mut sum = 0.0;
                for item in items {
                    let x = item.as_f64()?;
                    sum += x * x;
                }
                Some(sum.sqrt())
            }
            other => other.as_f64().map(f64::abs),
        }
    }

    /// Deep equality with an absolute tolerance on reals.
    pub fn approx_eq(&self, other: &Value, tol: f64) -> bool {
        match (self, other) {
            (Value::Real(a), Value::Real(b)) => (a - b).abs() <= tol,
            (Value::Array(a), Value::Array(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.approx_eq(y, tol))
            }
            (a, b) => a == b,
        }
    }
}

fn write_real(f: &mut fmt::Formatter<'_>, r: f64) -> fmt::Result {
    if r.is_finite() && r.fract() == 0.0 && r.abs() < 1e15 {
        write!(f, "{r:.1}")
    } else {
        write!(f, "{r}")
    }
}

/// Formats values in the literal syntax accepted by the configuration parser.
impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Real(r) => write_real(f, *r),
            Value::Str(s) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        '\t' => f.write_str("\\t")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
            Value::Array(items) => {
                f.write_str("{")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str("}")
            }
        }
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Int(i)
    }
}

impl From<f64> for Value {
    fn from(r: f64) -> Self {
        Value::Real(r)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Str(s.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_numeric_arrays_promote_to_real() {
        let v = Value::array(vec![Value::Int(0), Value::Real(0.5)]).unwrap();
        assert_eq!(v, Value::Array(vec![Value::Real(0.0), Value::Real(0.5)]));
        assert_eq!(v.kind(), ValueKind::Array(ScalarKind::Real));
    }

    #[test]
    fn heterogeneous_arrays_are_rejected() {
        let err = Value::array(vec![Value::Bool(true), Value::Int(1)]).unwrap_err();
        assert!(matches!(err, ValueError::Heterogeneous(..)));
        assert_eq!(Value::array(vec![]), Err(ValueError::EmptyArray));
    }

    #[test]
    fn int_arrays_widen_to_real() {
        let zeros = Value::Array(vec![Value::Int(0); 3]);
        let widened = zeros.coerce_to(ValueKind::Array(ScalarKind::Real)).unwrap();
        assert_eq!(widened, Value::Array(vec![Value::Real(0.0); 3]));
        assert!(Value::Str("x".into())
            .coerce_to(ValueKind::Array(ScalarKind::Real))
            .is_none());
        assert!(Value::Real(1.0).coerce_to(ValueKind::Scalar(ScalarKind::Int)).is_none());
    }

    #[test]
    fn norm_of_force_vector() {
        let v = Value::Array(vec![Value::Real(0.1); 3]);
        assert!((v.norm().unwrap() - 0.03f64.sqrt()).abs() < 1e-12);
        assert_eq!(Value::Str("a".into()).norm(), None);
    }

    #[test]
    fn display_uses_literal_syntax() {
        assert_eq!(Value::Real(3.0).to_string(), "3.0");
        assert_eq!(Value::Real(0.1).to_string(), "0.1");
        assert_eq!(Value::Str("a\"b".into()).to_string(), "\"a\\\"b\"");
        let arr = Value::Array(vec![Value::Real(2.3), Value::Real(3.4), Value::Real(5.34)]);
        assert_eq!(arr.to_string(), "{2.3, 3.4, 5.34}");
    }

    #[test]
    fn kind_keywords_parse() {
        assert_eq!(ValueKind::parse("real[]"), Some(ValueKind::Array(ScalarKind::Real)));
        assert_eq!(ValueKind::parse("bool"), Some(ValueKind::Scalar(ScalarKind::Bool)));
        assert_eq!(ValueKind::parse("float"), None);
        assert_eq!(ValueKind::Array(ScalarKind::Str).to_string(), "string[]");
    }
}
