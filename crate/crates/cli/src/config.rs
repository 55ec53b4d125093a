//! JSON config files, merged into the argument list so explicit flags win.

use std::path::Path;

use serde_json::Value;

use crate::error::CliError;

/// Turns a flat JSON object into `--key value` pairs. Booleans become bare
/// flags (omitted when false) and arrays become comma lists.
pub fn config_flags(path: &Path) -> Result<Vec<(String, Option<String>)>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))?;
    let Value::Object(map) = value else {
        return Err(CliError::usage("config file must hold a JSON object"));
    };
    let mut out = Vec::new();
    for (key, v) in map {
        let flag = format!("--{}", key.replace('_', "-"));
        match v {
            Value::Bool(true) => out.push((flag, None)),
            Value::Bool(false) | Value::Null => {}
            Value::Array(items) => {
                let parts: Vec<String> = items.iter().map(scalar).collect::<Result<_, _>>()?;
                out.push((flag, Some(parts.join(","))));
            }
            other => out.push((flag, Some(scalar(&other)?))),
        }
    }
    Ok(out)
}

fn scalar(v: &Value) -> Result<String, CliError> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        _ => Err(CliError::usage(format!("unsupported config value {v}"))),
    }
}

fn flag_name(arg: &str) -> Option<&str> {
    let a = arg.strip_prefix("--")?;
    Some(a.split('=').next().unwrap_or(a))
}

/// Inserts config flags after the subcommand name, skipping any flag the
/// user passed explicitly.
pub fn merge_config(argv: Vec<String>) -> Result<Vec<String>, CliError> {
    let mut path = None;
    for (i, a) in argv.iter().enumerate() {
        if a == "--config" {
            path = argv.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else { return Ok(argv) };
    let given: Vec<&str> = argv.iter().filter_map(|a| flag_name(a)).collect();
    let mut extra = Vec::new();
    for (flag, value) in config_flags(Path::new(&path))? {
        if flag == "--config" || given.contains(&&flag[2..]) {
            continue;
        }
        extra.push(flag);
        extra.extend(value);
    }
    let mut out = argv;
    if out.len() >= 2 {
        let tail = out.split_off(2);
        out.extend(extra);
        out.extend(tail);
    }
    Ok(out)
}
