//! Flat `key = value` configuration files mapped onto [`TrackerConfig`].

use crate::error::{io_err, BenchError, Result};
use fusetrack_core::tracker::TrackerConfig;
use std::path::Path;

/// Parses `key = value` lines on top of the defaults. `#` starts a comment;
/// blank lines are ignored and values may be quoted.
pub fn parse_config(text: &str, path: &Path) -> Result<TrackerConfig> {
    let mut config = TrackerConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |message: String| BenchError::Parse { path: path.to_path_buf(), line: i + 1, message };
        let (key, value) = line.split_once('=').ok_or_else(|| parse_err("expected `key = value`".into()))?;
        let value = value.trim().trim_matches('"');
        config.set(key.trim(), value).map_err(|e| parse_err(e.to_string()))?;
    }
    config.validate().map_err(|e| BenchError::Parse { path: path.to_path_buf(), line: 0, message: e.to_string() })?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<TrackerConfig> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_config(&text, path)
}
