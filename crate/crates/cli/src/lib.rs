//! Command-line front end for `sforge`: one operation registry, a JSON
//! scenario runner and report emission.

pub mod ops;
pub mod params;
pub mod scenario;

use std::fmt;

use serde_json::{json, Value};

pub use scenario::{run_scenario, ScenarioRun};

#[derive(Debug)]
pub enum CliError {
    Core(sforge::Error),
    /// Malformed invocation or scenario: unknown operation, missing or
    /// mistyped parameter.
    Usage(String),
}

impl From<sforge::Error> for CliError {
    fn from(e: sforge::Error) -> Self {
        CliError::Core(e)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "usage error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    /// 2 for parse and usage errors, 3 for capacity, 1 for failed
    /// preconditions, assertions and sunflower witnesses.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Core(sforge::Error::Parse(_)) => 2,
            CliError::Core(sforge::Error::Capacity(_)) => 3,
            CliError::Core(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Core(sforge::Error::Parse(_)) => "parse",
            CliError::Core(sforge::Error::Capacity(_)) => "capacity",
            CliError::Core(sforge::Error::Precondition(_)) => "precondition",
            CliError::Core(sforge::Error::Assertion(_)) => "assertion",
            CliError::Core(sforge::Error::SunflowerPresent { .. }) => "sunflower_present",
        }
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({ "kind": self.kind(), "message": self.to_string(), "exit_code": self.exit_code() });
        if let CliError::Core(sforge::Error::SunflowerPresent { context, witness }) = self {
            v["context"] = Value::String(context.clone());
            v["witness"] = json!({
                "core": sforge::bits::to_elements_1based(witness.core),
                "petals": witness.petals_1based(),
                "degenerate": witness.degenerate,
            });
        }
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// Flattens the scalar top-level fields of a report into `key,value` rows;
/// reports carrying their own table (`csv`) emit it verbatim.
pub fn to_csv(v: &Value) -> String {
    if let Some(Value::String(t)) = v.get("csv") {
        return t.clone();
    }
    let mut out = String::from("key,value\n");
    if let Value::Object(map) = v {
        for (k, x) in map {
            let cell = match x {
                Value::String(s) => s.clone(),
                Value::Number(_) | Value::Bool(_) | Value::Null => x.to_string(),
                _ => continue,
            };
            let cell = if cell.contains([',', '"', '\n']) { format!("\"{}\"", cell.replace('"', "\"\"")) } else { cell };
            out.push_str(&format!("{k},{cell}\n"));
        }
    }
    out
}

pub fn render(v: &Value, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(v).expect("json") + "\n",
        Format::Csv => to_csv(v),
    }
}
