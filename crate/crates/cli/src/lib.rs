//! Batch front end: one JSON task in, one JSON report out. Reports are
//! deterministic byte for byte: object keys are sorted by construction
//! and timing is never written into them.

use serde_json::{json, Value};

mod dispatch;
mod schema;

pub const TOOL_NAME: &str = "psl";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const KINDS: [&str; 9] = [
    "differential",
    "q",
    "certify",
    "lift_check",
    "sp_twist",
    "bernstein_step",
    "mutate",
    "compatible",
    "isogeny",
];

#[derive(Debug, Clone)]
pub enum CliError {
    /// Polynomial or element text failed to parse; position annotated by
    /// the grammar.
    Parse(String),
    /// Task file shape is wrong: missing fields, bad types, unknown kind.
    Schema(String),
    /// Input polynomial above the degree guardrail.
    Degree(String),
    /// The requested mode exists but not for this kind.
    UnsupportedMode(String),
    /// Well-formed input the engine rejects (not flat, not invertible, ...).
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::UnsupportedMode(_) => 3,
            _ => 2,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            CliError::Parse(_) => "parse",
            CliError::Schema(_) => "schema",
            CliError::Degree(_) => "degree_exceeded",
            CliError::UnsupportedMode(_) => "unsupported_mode",
            CliError::Compute(_) => "compute",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Parse(m)
            | CliError::Schema(m)
            | CliError::Degree(m)
            | CliError::UnsupportedMode(m)
            | CliError::Compute(m) => m,
        }
    }

    pub fn report(&self) -> Value {
        json!({
            "tool": {"name": TOOL_NAME, "version": TOOL_VERSION},
            "error": {"type": self.label(), "message": self.message()},
        })
    }
}

/// Command-line overrides applied on top of the task's own options block.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub mode: Option<String>,
    pub seed: Option<u64>,
    pub depth: Option<usize>,
    pub oracle: bool,
}

/// Effective options after merging the task's "options" object with the
/// command line; the command line wins.
#[derive(Debug, Clone)]
pub struct Options {
    pub mode: String,
    pub seed: u64,
    pub depth: usize,
    pub max_degree: i64,
    pub oracle: bool,
}

fn merge_options(task: &Value, over: &Overrides) -> Result<Options, CliError> {
    let mut mode = "eigen".to_string();
    let mut seed = 0u64;
    let mut depth = 8usize;
    let mut max_degree = 512i64;
    if let Some(opts) = task.get("options") {
        let m = schema::object(opts, "options")?;
        if let Some(v) = m.get("mode") {
            mode = v
                .as_str()
                .ok_or_else(|| CliError::Schema("options.mode must be a string".into()))?
                .to_string();
        }
        if let Some(v) = m.get("seed") {
            seed = v
                .as_u64()
                .ok_or_else(|| CliError::Schema("options.seed must be an integer".into()))?;
        }
        if let Some(v) = m.get("depth") {
            depth = v
                .as_u64()
                .ok_or_else(|| CliError::Schema("options.depth must be an integer".into()))?
                as usize;
        }
        if let Some(v) = m.get("max_degree") {
            max_degree = v
                .as_i64()
                .ok_or_else(|| CliError::Schema("options.max_degree must be an integer".into()))?;
        }
    }
    if let Some(m) = &over.mode {
        mode = m.clone();
    }
    if let Some(s) = over.seed {
        seed = s;
    }
    if let Some(d) = over.depth {
        depth = d;
    }
    if mode != "eigen" && mode != "ideal" {
        return Err(CliError::Schema(format!("unknown mode \"{mode}\"")));
    }
    Ok(Options { mode, seed, depth, max_degree, oracle: over.oracle })
}

/// Runs one task and builds the report. The verdict is `Some(bool)` for
/// kinds that answer a question and `None` for pure computations; the
/// binary maps it to the exit code.
pub fn run_task(
    kind: &str,
    task: &Value,
    over: &Overrides,
) -> Result<(Value, Option<bool>), CliError> {
    if !KINDS.contains(&kind) {
        return Err(CliError::Schema(format!("unknown kind \"{kind}\"")));
    }
    let m = schema::object(task, "task")?;
    if let Some(declared) = m.get("kind") {
        if declared.as_str() != Some(kind) {
            return Err(CliError::Schema(format!(
                "task file declares kind {declared} but {kind} was requested"
            )));
        }
    }
    let opts = merge_options(task, over)?;
    let (result, verdict) = match kind {
        "differential" => dispatch::differential(m, &opts)?,
        "q" => dispatch::q_difference(m, &opts)?,
        "certify" => dispatch::certify(m, &opts)?,
        "lift_check" => dispatch::lift_check(m, &opts)?,
        "sp_twist" => dispatch::sp_twist_task(m, &opts)?,
        "bernstein_step" => dispatch::bernstein(m, &opts)?,
        "mutate" => dispatch::mutate(m, &opts)?,
        "compatible" => dispatch::compatible(m, &opts)?,
        "isogeny" => dispatch::isogeny(m, &opts)?,
        _ => unreachable!(),
    };
    let report = json!({
        "tool": {"name": TOOL_NAME, "version": TOOL_VERSION},
        "kind": kind,
        "task": task,
        "result": result,
        "verdict": verdict,
        "timing_ms": Value::Null,
    });
    Ok((report, verdict))
}

/// Pretty JSON with a trailing newline; serde maps are ordered, so the
/// bytes are a function of the value alone.
pub fn render(report: &Value) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}
