use std::fmt::Display;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use sramsey::boolalg::BoolAlgError;
use sramsey::constructions::ConstructionError;
use sramsey::indiscernibles::IndiscernibleError;
use sramsey::ramsey::RamseyError;
use sramsey::semiretraction::SemiRetractionError;
use sramsey::StructureError;

pub const EXIT_OK: u8 = 0;
pub const EXIT_INTERNAL: u8 = 1;
pub const EXIT_MALFORMED: u8 = 2;
pub const EXIT_FAIL: u8 = 3;
pub const EXIT_DEGENERATE: u8 = 4;
pub const EXIT_BUDGET: u8 = 5;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn malformed(msg: impl Into<String>) -> Self {
        CliError { code: EXIT_MALFORMED, message: msg.into() }
    }

    pub fn internal(msg: impl Into<String>) -> Self {
        CliError { code: EXIT_INTERNAL, message: msg.into() }
    }
}

/// Exit code for a library error: budget overruns get their own code, the
/// rest are input problems unless flagged as internal.
pub trait Classify: Display {
    fn code(&self) -> u8;
}

impl Classify for StructureError {
    fn code(&self) -> u8 {
        match self {
            StructureError::UniverseTooLarge { .. }
            | StructureError::TupleTooLong { .. }
            | StructureError::ArityTooLarge { .. }
            | StructureError::Budget(_) => EXIT_BUDGET,
            _ => EXIT_MALFORMED,
        }
    }
}

impl Classify for RamseyError {
    fn code(&self) -> u8 {
        match self {
            RamseyError::Structure(e) => e.code(),
            RamseyError::DomainTooLarge { .. } | RamseyError::Budget(_) => EXIT_BUDGET,
            _ => EXIT_MALFORMED,
        }
    }
}

impl Classify for SemiRetractionError {
    fn code(&self) -> u8 {
        match self {
            SemiRetractionError::Structure(e) => e.code(),
            SemiRetractionError::Budget(_) => EXIT_BUDGET,
            SemiRetractionError::Alarm(_) => EXIT_INTERNAL,
            _ => EXIT_MALFORMED,
        }
    }
}

impl Classify for BoolAlgError {
    fn code(&self) -> u8 {
        match self {
            BoolAlgError::TooManyAtoms { .. } | BoolAlgError::TupleTooLong { .. } => EXIT_BUDGET,
            _ => EXIT_MALFORMED,
        }
    }
}

impl Classify for ConstructionError {
    fn code(&self) -> u8 {
        match self {
            ConstructionError::Budget { .. } | ConstructionError::Sizing(_) => EXIT_BUDGET,
            ConstructionError::InvalidSpec(_) => EXIT_MALFORMED,
            ConstructionError::Structure(e) => e.code(),
            ConstructionError::BoolAlg(e) => e.code(),
            ConstructionError::SemiRetraction(e) => e.code(),
        }
    }
}

impl Classify for IndiscernibleError {
    fn code(&self) -> u8 {
        match self {
            IndiscernibleError::Structure(e) => e.code(),
            IndiscernibleError::Budget(_) => EXIT_BUDGET,
            IndiscernibleError::InvalidFamily(_) => EXIT_MALFORMED,
        }
    }
}

impl<E: Classify> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError { code: e.code(), message: e.to_string() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Tsv,
}

/// Hash of the canonical JSON forms of all inputs, in order.
#[derive(Default)]
pub struct Digest256(Sha256);

impl Digest256 {
    pub fn add(&mut self, label: &str, value: &impl Serialize) {
        self.0.update(label.as_bytes());
        self.0.update([0]);
        self.0.update(serde_json::to_vec(value).expect("serializable"));
        self.0.update([0]);
    }

    pub fn hex(self) -> String {
        self.0.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub struct Report {
    pub command: Vec<String>,
    pub budgets: Value,
    pub started: Instant,
    pub digest: Digest256,
}

pub struct Outcome {
    pub verdict: &'static str,
    pub code: u8,
    pub details: Value,
    pub witness: Value,
    pub stats: Value,
}

impl Outcome {
    pub fn new(verdict: &'static str, code: u8, details: Value) -> Self {
        Outcome { verdict, code, details, witness: Value::Null, stats: Value::Null }
    }

    pub fn ok(details: Value) -> Self {
        Self::new("ok", EXIT_OK, details)
    }

    pub fn pass_fail(passed: bool, details: Value) -> Self {
        if passed {
            Self::new("pass", EXIT_OK, details)
        } else {
            Self::new("fail", EXIT_FAIL, details)
        }
    }

    pub fn witness(mut self, w: Value) -> Self {
        self.witness = w;
        self
    }

    pub fn stats(mut self, s: Value) -> Self {
        self.stats = s;
        self
    }
}

impl Report {
    pub fn render(self, out: &Outcome, format: Format) -> String {
        let mut fields = vec![
            ("command", json!(self.command)),
            ("inputs_digest", json!(self.digest.hex())),
            ("budgets", self.budgets),
            ("verdict", json!(out.verdict)),
            ("details", out.details.clone()),
        ];
        if !out.witness.is_null() {
            fields.push(("witness", out.witness.clone()));
        }
        if !out.stats.is_null() {
            fields.push(("stats", out.stats.clone()));
        }
        fields.push(("wall_time_ms", json!(self.started.elapsed().as_millis() as u64)));
        match format {
            Format::Json => {
                let obj: serde_json::Map<String, Value> = fields.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
                serde_json::to_string_pretty(&Value::Object(obj)).expect("serializable")
            }
            Format::Tsv => fields
                .into_iter()
                .map(|(k, v)| match v {
                    Value::String(s) => format!("{k}\t{s}"),
                    v => format!("{k}\t{v}"),
                })
                .collect::<Vec<_>>()
                .join("\n"),
        }
    }
}
