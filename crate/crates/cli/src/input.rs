use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use num_rational::BigRational;
use probeq_core::regret::{RegretFunction, RegretFunctional};
use probeq_core::scalar::parse_rational;
use probeq_core::{Distribution, EquivalenceCertificate, SimpleRV};
use serde::de::DeserializeOwned;
use serde_json::Value;

pub fn read_text(path: &Path, what: &str) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {what} {}", path.display()))
}

pub fn read_json<T: DeserializeOwned>(path: &Path, what: &str) -> Result<T> {
    let text = read_text(path, what)?;
    serde_json::from_str(&text).with_context(|| format!("malformed {what} {}", path.display()))
}

pub fn load_rv(path: &Path) -> Result<SimpleRV> {
    read_json(path, "random variable")
}

pub fn load_certificate(path: &Path) -> Result<EquivalenceCertificate> {
    let text = read_text(path, "certificate")?;
    EquivalenceCertificate::from_json(&text).with_context(|| format!("malformed certificate {}", path.display()))
}

/// A law given either as a random variable file (`"cells"`) or a
/// distribution file (`"atoms"`).
pub fn load_law(path: &Path) -> Result<Distribution> {
    let value: Value = read_json(path, "law")?;
    let parsed = if value.get("cells").is_some() {
        serde_json::from_value::<SimpleRV>(value).map(|rv| rv.distribution())
    } else if value.get("atoms").is_some() {
        serde_json::from_value::<Distribution>(value)
    } else {
        bail!("{}: expected a random variable (\"cells\") or a distribution (\"atoms\")", path.display());
    };
    parsed.with_context(|| format!("malformed law {}", path.display()))
}

/// Inline JSON, a bare form name, or a path to a JSON file.
fn load_spec<T: DeserializeOwned>(arg: &str, what: &str) -> Result<T> {
    let trimmed = arg.trim();
    let value: Value = if trimmed.starts_with('{') {
        serde_json::from_str(trimmed).with_context(|| format!("malformed {what} {trimmed}"))?
    } else if Path::new(arg).is_file() {
        read_json(Path::new(arg), what)?
    } else if trimmed.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        serde_json::json!({ "form": trimmed })
    } else {
        bail!("{what} {arg:?} is neither JSON, a form name nor a file");
    };
    serde_json::from_value(value).with_context(|| format!("invalid {what} {trimmed}"))
}

pub fn regret_function(arg: &str) -> Result<RegretFunction> {
    load_spec(arg, "regret function")
}

pub fn functional(arg: &str) -> Result<RegretFunctional> {
    load_spec(arg, "functional")
}

pub fn rational(arg: &str) -> Result<BigRational> {
    parse_rational(arg.trim()).map_err(|e| anyhow!(e))
}
