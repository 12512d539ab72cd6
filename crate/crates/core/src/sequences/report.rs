//! Tabulated defects over the indices of a sequence.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::defects::{choi_gap, strong_gap, strongstar_gap, weak_gap};
use super::{ChannelSequence, TestFamily};
use crate::error::Result;

pub const SCHEMA_VERSION: &str = "channel-lab/1";

pub const CSV_HEADER: &str = "n,strong,strongstar,choi,weak,strong_witness,strongstar_witness,weak_witness";

const CHOI_NOTE: &str = "choi = ||J(Phi_n) - J(Phi_0)||_1 / d_in, a lower bound on the diamond-norm distance";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub n: usize,
    pub strong: f64,
    pub strongstar: f64,
    pub choi: f64,
    pub weak: f64,
    pub strong_witness: String,
    pub strongstar_witness: String,
    pub weak_witness: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub schema: String,
    pub label: String,
    pub d_in: usize,
    pub d_out: usize,
    pub test_family: String,
    pub choi_note: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub rows: Vec<ReportRow>,
}

impl ConvergenceReport {
    pub fn indices(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.n).collect()
    }

    pub fn row(&self, n: usize) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.n == n)
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{:.12e},{:.12e},{:.12e},{:.12e},{},{},{}",
                r.n,
                r.strong,
                r.strongstar,
                r.choi,
                r.weak,
                csv_field(&r.strong_witness),
                csv_field(&r.strongstar_witness),
                csv_field(&r.weak_witness)
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report fields serialize")
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Evaluates every defect at each index of the sequence. Indices are
/// processed in parallel and rows are returned in index order.
pub fn sweep(seq: &ChannelSequence, family: &TestFamily) -> Result<ConvergenceReport> {
    let limit = seq.limit();
    let rows = seq
        .indices()
        .par_iter()
        .map(|&n| {
            let term = seq.term(n)?;
            let strong = strong_gap(&term, limit, &family.states)?;
            let star = strongstar_gap(&term, limit, &family.observables, &family.vectors)?;
            let weak = weak_gap(&term, limit, &family.states, &family.observables)?;
            Ok(ReportRow {
                n,
                strong: strong.value,
                strongstar: star.value,
                choi: choi_gap(&term, limit),
                weak: weak.value,
                strong_witness: strong.witness,
                strongstar_witness: star.witness,
                weak_witness: weak.witness,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport {
        schema: SCHEMA_VERSION.to_string(),
        label: seq.label().to_string(),
        d_in: seq.d_in(),
        d_out: seq.d_out(),
        test_family: family.describe(),
        choi_note: CHOI_NOTE.to_string(),
        notes: Vec::new(),
        rows,
    })
}
