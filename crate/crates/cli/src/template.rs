//! Named parameters in circuit specs.
//!
//! Any numeric field may instead hold a string `"$name"`, resolved from the
//! parameter bindings, or `"$cancellation(name)"`, the beamsplitter value
//! `a = √(1/b − 1)` for `b = name`.

use std::collections::BTreeMap;

use heraldsim_core::circuits::solve_cancellation;
use serde_json::{Number, Value};

use crate::error::{CliError, CliResult};

pub type Bindings = BTreeMap<String, f64>;

/// Replaces every parameter reference in `v`. Returns how many were replaced.
pub fn substitute(v: &mut Value, bindings: &Bindings) -> CliResult<usize> {
    substitute_at(v, bindings, "$")
}

fn substitute_at(v: &mut Value, bindings: &Bindings, path: &str) -> CliResult<usize> {
    match v {
        Value::String(s) if s.starts_with('$') => {
            let x = resolve(&s[1..], bindings).map_err(|m| CliError::schema(path, m))?;
            let n = Number::from_f64(x)
                .ok_or_else(|| CliError::schema(path, format!("parameter value {x} is not finite")))?;
            *v = Value::Number(n);
            Ok(1)
        }
        Value::Array(items) => {
            let mut count = 0;
            for (i, item) in items.iter_mut().enumerate() {
                count += substitute_at(item, bindings, &format!("{path}[{i}]"))?;
            }
            Ok(count)
        }
        Value::Object(map) => {
            let mut count = 0;
            for (k, item) in map.iter_mut() {
                count += substitute_at(item, bindings, &format!("{path}.{k}"))?;
            }
            Ok(count)
        }
        _ => Ok(0),
    }
}

fn resolve(expr: &str, bindings: &Bindings) -> Result<f64, String> {
    let lookup = |name: &str| {
        bindings
            .get(name)
            .copied()
            .ok_or_else(|| format!("unbound parameter `{name}`"))
    };
    if let Some(inner) = expr.strip_prefix("cancellation(").and_then(|r| r.strip_suffix(')')) {
        let b = lookup(inner.trim())?;
        return solve_cancellation(b).map_err(|e| e.to_string());
    }
    lookup(expr)
}

/// Names referenced anywhere in `v`, sorted.
pub fn parameters(v: &Value) -> Vec<String> {
    let mut out = Vec::new();
    collect(v, &mut out);
    out.sort();
    out.dedup();
    out
}

fn collect(v: &Value, out: &mut Vec<String>) {
    match v {
        Value::String(s) if s.starts_with('$') => {
            let e = &s[1..];
            let name = e
                .strip_prefix("cancellation(")
                .and_then(|r| r.strip_suffix(')'))
                .unwrap_or(e);
            out.push(name.trim().to_string());
        }
        Value::Array(items) => items.iter().for_each(|i| collect(i, out)),
        Value::Object(map) => map.values().for_each(|i| collect(i, out)),
        _ => {}
    }
}

/// Parses `name=value`.
pub fn parse_binding(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| format!("`{value}` is not a number"))?;
    Ok((name.trim().to_string(), value))
}

/// A scan axis `name=lo:hi:step`.
#[derive(Debug, Clone, PartialEq)]
pub struct Range {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Range {
    /// Grid values; empty when `lo > hi`. The upper end is included when the
    /// step lands on it to within a small relative slack.
    pub fn values(&self) -> Vec<f64> {
        if self.lo > self.hi {
            return Vec::new();
        }
        let span = (self.hi - self.lo) / self.step;
        let n = (span + 1e-9).floor() as usize;
        (0..=n).map(|i| (self.lo + i as f64 * self.step).min(self.hi)).collect()
    }
}

pub fn parse_range(s: &str) -> Result<Range, String> {
    let (name, rest) = s
        .split_once('=')
        .ok_or_else(|| format!("expected name=lo:hi:step, got `{s}`"))?;
    let parts: Vec<&str> = rest.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected lo:hi:step, got `{rest}`"));
    }
    let num = |p: &str| {
        p.trim()
            .parse::<f64>()
            .map_err(|_| format!("`{p}` is not a number"))
    };
    let (lo, hi, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
    if !(step > 0.0) || !lo.is_finite() || !hi.is_finite() {
        return Err(format!("range `{rest}` needs finite bounds and a positive step"));
    }
    Ok(Range {
        name: name.trim().to_string(),
        lo,
        hi,
        step,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn substitutes_names_and_cancellation() {
        let mut v = json!({"x": "$b", "y": ["$cancellation(b)", 3], "z": "text"});
        let bindings = Bindings::from([("b".to_string(), 0.8)]);
        assert_eq!(substitute(&mut v, &bindings).unwrap(), 2);
        assert_eq!(v["x"], json!(0.8));
        assert!((v["y"][0].as_f64().unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(v["z"], json!("text"));
    }

    #[test]
    fn unbound_parameter_is_a_schema_error() {
        let mut v = json!({"sources": [{"lambda": "$lam"}]});
        let err = substitute(&mut v, &Bindings::new()).unwrap_err();
        assert!(err.to_string().contains("$.sources[0].lambda"), "{err}");
    }

    #[test]
    fn parameters_are_listed() {
        let v = json!({"a": "$cancellation(b)", "l": "$lambda", "c": "$b"});
        assert_eq!(parameters(&v), ["b", "lambda"]);
    }

    #[test]
    fn ranges() {
        let r = parse_range("b=0.5:1.0:0.05").unwrap();
        let v = r.values();
        assert_eq!(v.len(), 11);
        assert_eq!(v[10], 1.0);
        assert!(parse_range("b=1:0.5:0.1").unwrap().values().is_empty());
        assert!(parse_range("b=0:1:0").is_err());
        assert!(parse_range("b=0:1").is_err());
    }
}
