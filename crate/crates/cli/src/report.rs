use std::path::Path;

use serde::Serialize;
use serde_json::{Number, Value};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::CliError;

/// Significant digits kept for floats in reports.
const DIGITS: usize = 10;

pub fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            let r: f64 = format!("{:.*e}", DIGITS - 1, x).parse().expect("formatted float parses");
            Number::from_f64(r).map(Value::Number).unwrap_or(Value::Null)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_floats).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_floats(v))).collect()),
        other => other,
    }
}

#[derive(Serialize)]
struct Provenance<'a> {
    config: &'a RunConfig,
    steps: usize,
    seed: u64,
}

/// Hash of the effective configuration together with the stage count and seed.
pub fn config_hash(cfg: &RunConfig, steps: usize, seed: u64) -> String {
    let json = serde_json::to_vec(&Provenance { config: cfg, steps, seed }).expect("config serializes");
    hex::encode(Sha256::digest(&json))
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'a str,
    pass: bool,
    config_hash: String,
    versions: Versions,
    steps: usize,
    seed: u64,
    config: &'a RunConfig,
    result: &'a T,
}

#[derive(Serialize)]
struct Versions {
    #[serde(rename = "fqc-core")]
    core: &'static str,
    #[serde(rename = "fqc-cli")]
    cli: &'static str,
}

pub struct ReportMeta<'a> {
    pub cfg: &'a RunConfig,
    pub steps: usize,
    pub seed: u64,
}

pub fn write_report<T: Serialize>(path: &Path, command: &str, meta: &ReportMeta<'_>, pass: bool, result: &T) -> Result<(), CliError> {
    let env = Envelope {
        command,
        pass,
        config_hash: config_hash(meta.cfg, meta.steps, meta.seed),
        versions: Versions { core: fqc_core::VERSION, cli: env!("CARGO_PKG_VERSION") },
        steps: meta.steps,
        seed: meta.seed,
        config: meta.cfg,
        result,
    };
    let v = serde_json::to_value(&env).map_err(|e| CliError::Io(e.to_string()))?;
    let text = serde_json::to_string_pretty(&round_floats(v)).map_err(|e| CliError::Io(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}
