//! Universe/set parsing and config files.
//!
//! Element lists are accepted as comma-separated integers or as a path to a
//! file with one element per line. Config files mirror the session config
//! field names, either as JSON or as flat `key=value` lines; flags win over
//! config values.

use std::path::Path;

use serde::Deserialize;

use crate::exit_code;

/// A failed command: exit code plus message for stderr.
#[derive(Debug)]
pub struct CliFailure {
    pub code: i32,
    pub message: String,
}

pub fn usage(message: impl Into<String>) -> CliFailure {
    CliFailure {
        code: exit_code::USAGE,
        message: message.into(),
    }
}

pub fn input_file(message: impl Into<String>) -> CliFailure {
    CliFailure {
        code: exit_code::INPUT_FILE,
        message: message.into(),
    }
}

fn parse_csv(value: &str) -> Result<Vec<u64>, String> {
    let trimmed = value.trim();
    if trimmed.is_empty() {
        return Ok(Vec::new());
    }
    trimmed
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<u64>()
                .map_err(|_| format!("invalid element {part:?}: expected a non-negative integer"))
        })
        .collect()
}

/// Interprets a flag value as CSV when it looks like one, otherwise as a
/// file path (one element per line; blank lines ignored).
pub fn parse_elements_arg(value: &str) -> Result<Vec<u64>, CliFailure> {
    let looks_like_csv = value.trim().is_empty()
        || value.chars().all(|c| c.is_ascii_digit() || c == ',' || c.is_whitespace());
    if looks_like_csv {
        return parse_csv(value).map_err(usage);
    }
    let content = std::fs::read_to_string(value)
        .map_err(|e| input_file(format!("cannot read {value}: {e}")))?;
    content
        .lines()
        .map(str::trim)
        .filter(|line| !line.is_empty())
        .map(|line| {
            line.parse::<u64>()
                .map_err(|_| input_file(format!("malformed element {line:?} in {value}")))
        })
        .collect()
}

/// An element list in a config file: inline array or CSV string.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ElementList {
    List(Vec<u64>),
    Csv(String),
}

impl ElementList {
    pub fn resolve(&self) -> Result<Vec<u64>, String> {
        match self {
            ElementList::List(v) => Ok(v.clone()),
            ElementList::Csv(s) => parse_csv(s),
        }
    }
}

/// Optional session settings loaded from `--config`. Field names mirror the
/// session config.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub universe: Option<ElementList>,
    pub set_a: Option<ElementList>,
    pub set_b: Option<ElementList>,
    pub decoys_per_hop: Option<usize>,
    pub compare_mode: Option<String>,
    pub repetitions: Option<usize>,
    pub max_retries: Option<u32>,
    pub exponent_bound: Option<u32>,
    pub seed: Option<u64>,
}

pub fn load_config_file(path: &Path) -> Result<ConfigFile, CliFailure> {
    let content = std::fs::read_to_string(path)
        .map_err(|e| input_file(format!("cannot read {}: {e}", path.display())))?;
    if content.trim_start().starts_with('{') {
        return serde_json::from_str(&content)
            .map_err(|e| input_file(format!("malformed config {}: {e}", path.display())));
    }
    parse_key_value(&content)
        .map_err(|e| input_file(format!("malformed config {}: {e}", path.display())))
}

fn parse_key_value(content: &str) -> Result<ConfigFile, String> {
    let mut cfg = ConfigFile::default();
    for line in content.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, got {line:?}"))?;
        let (key, value) = (key.trim(), value.trim());
        let parse_usize =
            |v: &str| v.parse::<usize>().map_err(|_| format!("invalid {key}: {v:?}"));
        match key {
            "universe" => cfg.universe = Some(ElementList::Csv(value.to_string())),
            "set_a" => cfg.set_a = Some(ElementList::Csv(value.to_string())),
            "set_b" => cfg.set_b = Some(ElementList::Csv(value.to_string())),
            "decoys_per_hop" => cfg.decoys_per_hop = Some(parse_usize(value)?),
            "compare_mode" => cfg.compare_mode = Some(value.to_string()),
            "repetitions" => cfg.repetitions = Some(parse_usize(value)?),
            "max_retries" => {
                cfg.max_retries =
                    Some(value.parse().map_err(|_| format!("invalid {key}: {value:?}"))?)
            }
            "exponent_bound" => {
                cfg.exponent_bound =
                    Some(value.parse().map_err(|_| format!("invalid {key}: {value:?}"))?)
            }
            "seed" => {
                cfg.seed = Some(value.parse().map_err(|_| format!("invalid {key}: {value:?}"))?)
            }
            other => return Err(format!("unknown key {other:?}")),
        }
    }
    Ok(cfg)
}

/// Seed fallback from the environment; flags and config files win.
pub fn seed_from_env() -> Result<Option<u64>, CliFailure> {
    match std::env::var("QPSI_SEED") {
        Ok(value) => value
            .trim()
            .parse::<u64>()
            .map(Some)
            .map_err(|_| usage(format!("QPSI_SEED must be a 64-bit unsigned integer, got {value:?}"))),
        Err(_) => Ok(None),
    }
}
