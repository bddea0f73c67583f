use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;
use crate::request::{Output, Request};

/// Bumped whenever the record layout changes.
pub const SCHEMA_VERSION: u32 = 1;

/// One executed command: the canonical inputs, the outputs and provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    pub inputs: Request,
    pub outputs: Value,
    pub seed: Option<u64>,
    pub version: String,
    pub schema: u32,
    pub wall_time_ms: u64,
}

pub fn run(request: Request) -> Result<(RunRecord, Output), CliError> {
    let started = Instant::now();
    let output = request.execute()?;
    let record = RunRecord {
        command: request.name().to_string(),
        seed: request.seed(),
        inputs: request,
        outputs: output.value.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        schema: SCHEMA_VERSION,
        wall_time_ms: started.elapsed().as_millis() as u64,
    };
    Ok((record, output))
}

/// Drops every `wall_time_ms` field, the only nondeterministic output.
pub fn strip_timing(v: &Value) -> Value {
    match v {
        Value::Object(map) => Value::Object(
            map.iter()
                .filter(|(k, _)| k.as_str() != "wall_time_ms")
                .map(|(k, v)| (k.clone(), strip_timing(v)))
                .collect(),
        ),
        Value::Array(items) => Value::Array(items.iter().map(strip_timing).collect()),
        other => other.clone(),
    }
}

/// Re-executes a record's inputs and checks the outputs match.
pub fn replay(record: &RunRecord) -> Result<(RunRecord, Output), CliError> {
    let (fresh, output) = run(record.inputs.clone())?;
    if strip_timing(&fresh.outputs) != strip_timing(&record.outputs) {
        return Err(CliError::Mismatch(format!(
            "{} outputs differ from the recorded run",
            record.command
        )));
    }
    Ok((fresh, output))
}
