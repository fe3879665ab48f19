//! TOML scenario documents.

use crate::engine::scenario::Scenario;
use crate::error::{Error, Result};

/// Parses and validates a scenario. Errors name the offending key.
pub fn parse_config(text: &str) -> Result<Scenario> {
    let scenario: Scenario = toml::from_str(text).map_err(|e| {
        let key = e
            .span()
            .and_then(|s| key_at(text, s.start))
            .unwrap_or_else(|| "document".to_string());
        Error::config(key, e.message().to_string())
    })?;
    scenario.validate()?;
    Ok(scenario)
}

/// Serializes a scenario so that [`parse_config`] reads it back unchanged.
pub fn to_toml(scenario: &Scenario) -> Result<String> {
    toml::to_string(scenario).map_err(|e| Error::Invalid(format!("cannot serialize scenario: {e}")))
}

// Dotted key of the assignment on the line holding byte `pos`, qualified by
// the enclosing table header.
fn key_at(text: &str, pos: usize) -> Option<String> {
    let pos = pos.min(text.len());
    let line_start = text[..pos].rfind('\n').map_or(0, |i| i + 1);
    let line = text[line_start..].lines().next().unwrap_or("");
    let table = text[..line_start]
        .lines()
        .rev()
        .map(str::trim)
        .find(|l| l.starts_with('['))
        .map(|l| l.trim_matches(|c| c == '[' || c == ']').trim().to_string());
    let trimmed = line.trim();
    if trimmed.starts_with('[') {
        return Some(
            trimmed
                .trim_matches(|c| c == '[' || c == ']')
                .trim()
                .to_string(),
        );
    }
    let key = line.split_once('=')?.0.trim().trim_matches('"');
    if key.is_empty() {
        return None;
    }
    Some(match table {
        Some(t) if !t.is_empty() => format!("{t}.{key}"),
        _ => key.to_string(),
    })
}
