//! Merges a JSON config file into the argument list. Config values are
//! inserted right after the subcommand so that later command-line flags
//! override them.

use std::ffi::OsString;
use std::path::Path;

use serde_json::{Map, Value};

use crate::args::SUBCOMMANDS;
use crate::error::{invalid, usage, CliError};

/// Global options that take a value and so may hide a subcommand-like token.
const VALUE_GLOBALS: [&str; 4] = ["--out", "--format", "--config", "--threads"];

pub fn merge(raw: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&raw) else {
        return Ok(raw);
    };
    let (subcommand, params) = load(Path::new(&path))?;
    let mut flags = Vec::new();
    for (key, value) in params {
        flags.extend(to_flags(&key, &value)?);
    }
    let mut out = raw;
    let position = subcommand_position(&out);
    let insert_at = match (position, subcommand) {
        (Some(i), Some(s)) if out[i] != *s => {
            return Err(usage(format!(
                "config is for `{s}` but `{}` was requested",
                out[i].to_string_lossy()
            )))
        }
        (Some(i), _) => i + 1,
        (None, Some(s)) => {
            out.insert(1, OsString::from(s));
            2
        }
        (None, None) => return Ok(out),
    };
    out.splice(insert_at..insert_at, flags.into_iter().map(OsString::from));
    Ok(out)
}

fn config_path(raw: &[OsString]) -> Option<OsString> {
    let mut it = raw.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(OsString::from(p));
        }
    }
    None
}

fn subcommand_position(raw: &[OsString]) -> Option<usize> {
    let mut i = 1;
    while i < raw.len() {
        let s = raw[i].to_string_lossy();
        if VALUE_GLOBALS.contains(&s.as_ref()) {
            i += 2;
            continue;
        }
        if SUBCOMMANDS.contains(&s.as_ref()) {
            return Some(i);
        }
        i += 1;
    }
    None
}

/// Reads `{flag: value}`, a run manifest, or a full output with a manifest.
fn load(path: &Path) -> Result<(Option<String>, Map<String, Value>), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| invalid(format!("config {}: {e}", path.display())))?;
    let value = value.get("manifest").cloned().unwrap_or(value);
    let Value::Object(mut obj) = value else {
        return Err(invalid("config must be a JSON object"));
    };
    let subcommand = match obj.remove("subcommand") {
        Some(Value::String(s)) => Some(s),
        Some(_) => return Err(invalid("config `subcommand` must be a string")),
        None => None,
    };
    let params = match obj.remove("parameters") {
        Some(Value::Object(p)) => p,
        Some(_) => return Err(invalid("config `parameters` must be an object")),
        None => obj,
    };
    Ok((subcommand, params))
}

fn to_flags(key: &str, value: &Value) -> Result<Vec<String>, CliError> {
    let flag = format!("--{}", key.replace('_', "-"));
    let scalar = |v: &Value| -> Result<String, CliError> {
        match v {
            Value::String(s) => Ok(s.clone()),
            Value::Number(n) => Ok(n.to_string()),
            _ => Err(invalid(format!("config value for `{key}` must be a scalar or a list"))),
        }
    };
    Ok(match value {
        Value::Null | Value::Bool(false) => vec![],
        Value::Bool(true) => vec![flag],
        Value::Array(items) => {
            let parts = items.iter().map(scalar).collect::<Result<Vec<_>, _>>()?;
            vec![format!("{flag}={}", parts.join(","))]
        }
        v => vec![format!("{flag}={}", scalar(v)?)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn flags_from_values() {
        assert_eq!(to_flags("n_grid", &Value::from("8:48:4")).unwrap(), vec!["--n-grid=8:48:4"]);
        assert_eq!(to_flags("alpha", &Value::from(-0.25)).unwrap(), vec!["--alpha=-0.25"]);
        assert_eq!(to_flags("finite", &Value::from(true)).unwrap(), vec!["--finite"]);
        assert!(to_flags("finite", &Value::from(false)).unwrap().is_empty());
        assert_eq!(
            to_flags("n_grid", &serde_json::json!([64, 128])).unwrap(),
            vec!["--n-grid=64,128"]
        );
    }

    #[test]
    fn finds_subcommand_after_globals() {
        assert_eq!(subcommand_position(&os(&["x", "--out", "blue", "decay"])), Some(3));
        assert_eq!(subcommand_position(&os(&["x", "--format=csv", "blue"])), Some(2));
        assert_eq!(subcommand_position(&os(&["x", "--config", "c.json"])), None);
    }
}
