//! Report types shared by the verifier suite.

use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct DegreeRow {
    pub label: String,
    pub rank: usize,
    pub required: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inertia: Option<(usize, usize, usize)>,
    pub expected: String,
    pub pass: bool,
}

impl DegreeRow {
    pub fn rank_row(label: String, rank: usize, required: usize) -> Self {
        DegreeRow {
            label,
            rank,
            required,
            inertia: None,
            expected: format!("bijective of rank {required}"),
            pass: rank == required,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub hypotheses: Vec<String>,
    pub rows: Vec<DegreeRow>,
    pub pass: bool,
}

impl CheckReport {
    pub fn new(name: impl Into<String>) -> Self {
        CheckReport {
            name: name.into(),
            hypotheses: Vec::new(),
            rows: Vec::new(),
            pass: true,
        }
    }

    pub fn hypothesis(&mut self, text: impl Into<String>) {
        self.hypotheses.push(text.into());
    }

    pub fn push(&mut self, row: DegreeRow) {
        self.pass &= row.pass;
        self.rows.push(row);
    }

    pub fn merge(&mut self, other: CheckReport) {
        self.pass &= other.pass;
        self.hypotheses.extend(other.hypotheses);
        self.rows.extend(other.rows);
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serialization")
    }
}

/// How hypothesis certification failures are treated: hard errors for the
/// production verifiers, recorded rows for control experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Hypotheses {
    Enforce,
    RecordOnly,
}
