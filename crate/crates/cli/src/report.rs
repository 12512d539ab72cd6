use std::fmt::Write as _;
use std::path::PathBuf;

use channel_lab::gaussian::ParamReport;
use channel_lab::sequences::ConvergenceReport;
use clap::{Args, ValueEnum};
use serde_json::Value;

use crate::io::{self, CliError, CliResult};

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Summary,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// A JSON report written by `sequence` or `gaussian converge`.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Summary)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Stored {
    Channels(ConvergenceReport),
    Gaussian(ParamReport),
}

fn load(value: Value) -> CliResult<Stored> {
    let is_param = value.get("grid_points").is_some();
    let parsed = if is_param {
        serde_json::from_value(value).map(Stored::Gaussian)
    } else {
        serde_json::from_value(value).map(Stored::Channels)
    };
    parsed.map_err(|e| CliError::Parse(format!("not a report: {e}")))
}

fn summary(stored: &Stored) -> String {
    let mut s = String::new();
    match stored {
        Stored::Channels(r) => {
            let _ = writeln!(s, "{} ({} -> {}), {} rows, {}", r.label, r.d_in, r.d_out, r.rows.len(), r.test_family);
            if let (Some(first), Some(last)) = (r.rows.first(), r.rows.last()) {
                for (name, a, b) in [
                    ("strong", first.strong, last.strong),
                    ("strongstar", first.strongstar, last.strongstar),
                    ("choi", first.choi, last.choi),
                    ("weak", first.weak, last.weak),
                ] {
                    let _ = writeln!(s, "  {name:<10} n={}: {a:.6e}  n={}: {b:.6e}", first.n, last.n);
                }
            }
            for note in &r.notes {
                let _ = writeln!(s, "  note: {note}");
            }
        }
        Stored::Gaussian(r) => {
            let _ = writeln!(s, "{} (eps {}), {} rows, {} grid points", r.label, r.eps, r.rows.len(), r.grid_points);
            let within = r.rows.iter().filter(|row| row.within_eps).count();
            let _ = writeln!(s, "  within eps: {within}/{}", r.rows.len());
            let _ = writeln!(s, "  max charfn/param ratio: {:.6e}", r.max_ratio());
        }
    }
    s
}

pub fn run(a: ReportArgs) -> CliResult<()> {
    let stored = load(io::read_json(&a.input)?)?;
    let text = match (a.format, &stored) {
        (Format::Csv, Stored::Channels(r)) => r.to_csv(),
        (Format::Csv, Stored::Gaussian(r)) => r.to_csv(),
        (Format::Json, Stored::Channels(r)) => r.to_json() + "\n",
        (Format::Json, Stored::Gaussian(r)) => io::pretty(r),
        (Format::Summary, s) => summary(s),
    };
    io::emit(a.out.as_deref(), &text)
}
