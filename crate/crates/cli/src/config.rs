//! Flat key=value configuration files, expanded into command-line flags.
//!
//! Keys are flag names without the leading dashes. `true` turns a switch on,
//! `false` leaves it off. The key `subcommand` names the subcommand when the
//! command line does not.

use std::fs;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Parse config text into ordered (key, value) pairs.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            ConfigError(format!("line {}: expected key=value, got {raw:?}", i + 1))
        })?;
        let key = k.trim();
        if key.is_empty() {
            return Err(ConfigError(format!("line {}: empty key", i + 1)));
        }
        out.push((key.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn to_flags(pairs: &[(String, String)]) -> Vec<String> {
    let mut flags = Vec::new();
    for (k, v) in pairs {
        if k == "subcommand" {
            continue;
        }
        match v.as_str() {
            "true" => flags.push(format!("--{k}")),
            "false" => {}
            _ => {
                flags.push(format!("--{k}"));
                flags.push(v.clone());
            }
        }
    }
    flags
}

/// Remove `--config FILE` from `argv` and splice the file's flags in right
/// after the subcommand, so explicit flags later on the line win.
pub fn expand(argv: Vec<String>) -> Result<Vec<String>, ConfigError> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut path = None;
    let mut it = argv.into_iter();
    let program = it.next().unwrap_or_else(|| "seqmon".into());
    while let Some(arg) = it.next() {
        if arg == "--config" {
            path = Some(
                it.next()
                    .ok_or_else(|| ConfigError("--config needs a file".into()))?,
            );
        } else if let Some(p) = arg.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = path else {
        let mut out = vec![program];
        out.extend(rest);
        return Ok(out);
    };
    let text = fs::read_to_string(Path::new(&path))
        .map_err(|e| ConfigError(format!("cannot read config {path}: {e}")))?;
    let pairs = parse(&text)?;
    let from_file = pairs
        .iter()
        .find(|(k, _)| k == "subcommand")
        .map(|(_, v)| v.clone());

    // The subcommand is the first argument that is not a flag or a flag value.
    // Global flags before it always take a value except --machine.
    let mut sub_index = None;
    let mut i = 0;
    while i < rest.len() {
        let a = &rest[i];
        if !a.starts_with('-') {
            sub_index = Some(i);
            break;
        }
        i += if a == "--machine"
            || a.contains('=')
            || a == "-h"
            || a == "--help"
            || a == "-V"
            || a == "--version"
        {
            1
        } else {
            2
        };
    }

    let mut out = vec![program];
    match (sub_index, from_file) {
        (Some(i), file_sub) => {
            if let Some(f) = file_sub {
                if f != rest[i] {
                    return Err(ConfigError(format!(
                        "config is for subcommand {f:?} but {:?} was requested",
                        rest[i]
                    )));
                }
            }
            out.extend(rest[..=i].iter().cloned());
            out.extend(to_flags(&pairs));
            out.extend(rest[i + 1..].iter().cloned());
        }
        (None, Some(f)) => {
            out.push(f);
            out.extend(to_flags(&pairs));
            out.extend(rest);
        }
        (None, None) => {
            return Err(ConfigError(
                "no subcommand given on the command line or in the config".into(),
            ));
        }
    }
    Ok(out)
}
