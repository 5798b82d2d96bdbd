//! Scenario files: an ordered list of operations threaded by named family
//! handles.
//!
//! ```json
//! {"schema": 1, "seed": 7,
//!  "steps": [{"op": "bounds.example23", "params": {"n": 12, "k": 4, "s": 3, "t": 2}, "save": "F"},
//!            {"op": "pipeline.cover", "params": {"family": "$F", "domain": "binomial:12:4",
//!                                                "s": 3, "t": 2, "r": 3}}]}
//! ```
//!
//! Step `i` draws its seed from stream `i` of the root seed, so inserting a
//! step leaves the streams of the others untouched. Execution stops at the
//! first failing step.

use std::collections::BTreeMap;

use rand::RngCore;
use serde::Deserialize;
use serde_json::{json, Value};
use sforge::SetFamily;

use crate::ops::execute;
use crate::CliError;

pub const SCHEMA: u64 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Scenario {
    schema: u64,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    steps: Vec<Step>,
    #[serde(default)]
    output: Option<OutputSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Step {
    op: String,
    #[serde(default)]
    params: Value,
    #[serde(default)]
    save: Option<Save>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Save {
    Primary(String),
    Named(BTreeMap<String, String>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: Option<String>,
    pub format: Option<String>,
}

#[derive(Debug)]
pub struct ScenarioRun {
    pub report: Value,
    pub exit_code: i32,
    pub output: Option<OutputSpec>,
}

pub fn step_seed(root: u64, index: u64) -> u64 {
    sforge::rng::stream(root, index).next_u64()
}

/// Parses and runs a scenario; `seed` overrides the file's seed.
pub fn run_scenario(text: &str, seed: Option<u64>) -> Result<ScenarioRun, CliError> {
    let sc: Scenario = serde_json::from_str(text).map_err(|e| CliError::Core(sforge::Error::parse(format!("scenario: {e}"))))?;
    if sc.schema != SCHEMA {
        return Err(CliError::Core(sforge::Error::parse(format!("unsupported scenario schema {}", sc.schema))));
    }
    let root = seed.or(sc.seed).unwrap_or(0);
    let mut handles: BTreeMap<String, SetFamily> = BTreeMap::new();
    let mut steps = Vec::new();
    let mut exit_code = 0;
    for (i, step) in sc.steps.iter().enumerate() {
        let s = step_seed(root, i as u64);
        let params = if step.params.is_null() { json!({}) } else { step.params.clone() };
        match execute(&step.op, &params, &handles, s) {
            Ok(out) => {
                let mut saved = BTreeMap::new();
                match &step.save {
                    Some(Save::Primary(name)) => {
                        let (_, f) = out.families.first().ok_or_else(|| CliError::Usage(format!("step {i} ({}) produces no family to save", step.op)))?;
                        handles.insert(name.clone(), f.clone());
                        saved.insert("family".to_string(), name.clone());
                    }
                    Some(Save::Named(map)) => {
                        for (output, name) in map {
                            let (_, f) = out
                                .families
                                .iter()
                                .find(|(k, _)| k == output)
                                .ok_or_else(|| CliError::Usage(format!("step {i} ({}) has no output {output:?}", step.op)))?;
                            handles.insert(name.clone(), f.clone());
                            saved.insert(output.clone(), name.clone());
                        }
                    }
                    None => {}
                }
                steps.push(json!({ "index": i, "op": step.op, "status": "ok", "saved": saved, "result": out.report }));
            }
            Err(e) => {
                exit_code = e.exit_code();
                steps.push(json!({ "index": i, "op": step.op, "status": "failed", "error": e.to_json() }));
                break;
            }
        }
    }
    let report = json!({
        "schema": SCHEMA,
        "seed": root,
        "status": if exit_code == 0 { "ok" } else { "failed" },
        "exit_code": exit_code,
        "steps": steps,
    });
    Ok(ScenarioRun { report, exit_code, output: sc.output })
}

/// One row per step for CSV output.
pub fn steps_csv(report: &Value) -> String {
    let mut out = String::from("index,op,status,detail\n");
    for s in report["steps"].as_array().into_iter().flatten() {
        let detail = s["error"]["message"].as_str().unwrap_or("").replace('"', "\"\"");
        out.push_str(&format!(
            "{},{},{},\"{}\"\n",
            s["index"],
            s["op"].as_str().unwrap_or(""),
            s["status"].as_str().unwrap_or(""),
            detail
        ));
    }
    out
}
