//! Key-value config files whose keys mirror long flags.
//!
//! ```text
//! # comment
//! eps = 0.5
//! verify-every = 1
//! exact = true
//! ```

use anyhow::{bail, Context, Result};

/// Parses `key = value` lines; blank lines and `#` comments are skipped.
/// Double quotes around a value are dropped, so flat TOML files also work.
pub fn parse(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("config line {}: expected `key = value`", i + 1);
        };
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            bail!("config line {}: empty key", i + 1);
        }
        let v = v.trim();
        let v = v.strip_prefix('"').and_then(|x| x.strip_suffix('"')).unwrap_or(v);
        out.push((key, v.to_string()));
    }
    Ok(out)
}

fn flag_present(args: &[String], key: &str) -> bool {
    let flag = format!("--{key}");
    let prefix = format!("--{key}=");
    args.iter().any(|a| *a == flag || a.starts_with(&prefix))
}

/// Appends config entries to `args` unless the flag is already given.
/// `true` becomes a bare switch and `false` is dropped.
pub fn merge(mut args: Vec<String>) -> Result<Vec<String>> {
    let Some(pos) = args.iter().position(|a| a == "--config" || a.starts_with("--config=")) else {
        return Ok(args);
    };
    let path = match args[pos].strip_prefix("--config=") {
        Some(p) => p.to_string(),
        None => args.get(pos + 1).cloned().context("--config needs a path")?,
    };
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading config {path}"))?;
    for (key, value) in parse(&text)? {
        if key == "config" || flag_present(&args, &key) {
            continue;
        }
        match value.as_str() {
            "true" => args.push(format!("--{key}")),
            "false" => {}
            _ => args.push(format!("--{key}={value}")),
        }
    }
    Ok(args)
}
