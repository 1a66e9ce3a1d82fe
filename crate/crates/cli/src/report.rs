use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA: &str = "lotkit.report/1";

/// The outcome of one command.
///
/// A `true` verdict always comes with a witness: a serialized map or
/// isomorphism, or the string "exhaustive check".
#[derive(Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: String,
    pub verdict: Option<bool>,
    pub witness: Option<Value>,
    pub summary: Vec<String>,
    pub details: Value,
    /// Serialized object produced by the command, if any.
    pub output: Option<String>,
    pub inputs: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, u128>>,
}

impl Report {
    pub fn new(command: impl Into<String>) -> Self {
        Report {
            schema: SCHEMA,
            command: command.into(),
            verdict: None,
            witness: None,
            summary: Vec::new(),
            details: Value::Null,
            output: None,
            inputs: BTreeMap::new(),
            timings_ms: None,
        }
    }

    pub fn line(&mut self, s: impl Into<String>) -> &mut Self {
        self.summary.push(s.into());
        self
    }

    pub fn verdict(&mut self, v: bool, witness: Option<Value>) -> &mut Self {
        self.verdict = Some(v);
        self.witness = match (v, witness) {
            (true, None) => Some(Value::String("exhaustive check".into())),
            (_, w) => w,
        };
        self
    }

    pub fn exit_code(&self) -> i32 {
        match self.verdict {
            Some(false) => 1,
            _ => 0,
        }
    }

    pub fn render_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// The text form: the produced object verbatim if there is one, else a
    /// summary with the verdict.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for l in &self.summary {
            let _ = writeln!(out, "# {l}");
        }
        if let Some(v) = self.verdict {
            let _ = writeln!(out, "# verdict: {}", if v { "true" } else { "false" });
        }
        if let Some(t) = &self.timings_ms {
            for (k, ms) in t {
                let _ = writeln!(out, "# time {k}: {ms} ms");
            }
        }
        if let Some(o) = &self.output {
            out.push_str(o);
        }
        out
    }
}
