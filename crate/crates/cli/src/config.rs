//! Scenario loading: a preset name, a TOML file, or a JSON file (either a bare
//! config or a `run.json` summary, whose `config` echo is used), then
//! `key=value` overrides on the dotted field path (`run.dt=0.01`).

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use mprk_core::scenarios::{preset, ScenarioConfig, PRESET_NAMES};
use toml::Value;

pub fn load(source: &str) -> Result<ScenarioConfig> {
    if let Some(cfg) = preset(source) {
        return Ok(cfg);
    }
    let path = Path::new(source);
    if !path.exists() {
        bail!("'{source}' is neither a preset ({}) nor a readable file", PRESET_NAMES.join(", "));
    }
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if path.extension().is_some_and(|e| e == "json") {
        let mut v: serde_json::Value = serde_json::from_str(&text).map_err(|e| anyhow!("{}: {e}", path.display()))?;
        if let Some(c) = v.get_mut("config") {
            v = c.take();
        }
        return serde_json::from_value(v).map_err(|e| anyhow!("{}: {e}", path.display()));
    }
    toml::from_str(&text).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn parse_literal(raw: &str) -> Value {
    // bare words such as `mprk` or `wall` are strings
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

fn set_path(root: &mut Value, key: &str, value: Value) -> Result<()> {
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (n, part) in parts.iter().enumerate() {
        let table = node.as_table_mut().ok_or_else(|| anyhow!("'{key}': '{part}' is not inside a table"))?;
        if n + 1 == parts.len() {
            table.insert(part.to_string(), value);
            return Ok(());
        }
        node = table.entry(part.to_string()).or_insert_with(|| Value::Table(Default::default()));
    }
    unreachable!("split yields at least one part")
}

/// Applies `key=value` overrides and re-validates the result.
pub fn apply_overrides(cfg: &ScenarioConfig, overrides: &[(String, String)]) -> Result<ScenarioConfig> {
    if overrides.is_empty() {
        return Ok(cfg.clone());
    }
    let mut tree = Value::try_from(cfg).context("serializing configuration")?;
    for (k, v) in overrides {
        set_path(&mut tree, k, parse_literal(v))?;
    }
    let text = toml::to_string(&tree)?;
    toml::from_str(&text).map_err(|e| anyhow!("after overrides: {e}"))
}

pub fn split_assignment(s: &str) -> Result<(String, String)> {
    let (k, v) = s.split_once('=').ok_or_else(|| anyhow!("'{s}' is not of the form key=value"))?;
    if k.trim().is_empty() {
        bail!("empty key in '{s}'");
    }
    Ok((k.trim().to_string(), v.trim().to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_override() {
        let cfg = preset("convection2d").unwrap();
        let out = apply_overrides(
            &cfg,
            &[("run.dt".into(), "0.0125".into()), ("run.scheme".into(), "rk2".into()), ("fluid.mu1".into(), "1e-4".into())],
        )
        .unwrap();
        assert_eq!(out.run.dt, 0.0125);
        assert_eq!(out.fluid.mu1, 1e-4);
        assert_eq!(out.run.scheme, mprk_core::scenarios::SchemeName::Rk2);
    }

    #[test]
    fn unknown_field_rejected() {
        let cfg = preset("convection2d").unwrap();
        let err = apply_overrides(&cfg, &[("run.dtt".into(), "1".into())]).unwrap_err();
        assert!(format!("{err:#}").contains("dtt"));
    }

    #[test]
    fn resolved_config_roundtrips() {
        for name in PRESET_NAMES {
            let cfg = preset(name).unwrap();
            let text = toml::to_string(&cfg).unwrap();
            let back: ScenarioConfig = toml::from_str(&text).unwrap();
            assert_eq!(back, cfg);
        }
    }
}
