use std::path::PathBuf;

use channel_lab::dilation::{
    isometry_from_kraus, kraus_from_isometry, minimal_stinespring, stinespring_from_unitary,
    unitary_from_isometry_default,
};
use channel_lab::sequences::SCHEMA_VERSION;
use channel_lab::{action_deviation, linalg, tolerance, KrausChannel};
use clap::{Args, ValueEnum};
use serde_json::{json, Value};

use crate::io::{self, CliError, CliResult, Representation};

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Kraus,
    Stinespring,
    /// Stinespring isometry with environment dimension equal to the Choi rank.
    Minimal,
    Unitary,
}

#[derive(Args, Debug)]
pub struct ConvertArgs {
    /// Channel file (Kraus, Stinespring or unitary-dilation layout).
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum)]
    to: Target,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Largest accepted action deviation for the `verified` flag.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

pub fn to_kraus(rep: &Representation) -> KrausChannel {
    match rep {
        Representation::Kraus(k) => k.clone(),
        Representation::Stinespring(v) => kraus_from_isometry(v),
        Representation::Unitary(u) => kraus_from_isometry(&stinespring_from_unitary(u)),
    }
}

pub fn convert(source: &Representation, to: Target) -> CliResult<Representation> {
    let kraus = to_kraus(source);
    Ok(match to {
        Target::Kraus => Representation::Kraus(kraus),
        Target::Stinespring => Representation::Stinespring(match source {
            Representation::Stinespring(v) => v.clone(),
            Representation::Unitary(u) => stinespring_from_unitary(u),
            Representation::Kraus(k) => isometry_from_kraus(k),
        }),
        Target::Minimal => Representation::Stinespring(minimal_stinespring(&kraus)),
        Target::Unitary => Representation::Unitary(match source {
            Representation::Unitary(u) => u.clone(),
            Representation::Stinespring(v) => unitary_from_isometry_default(v)?,
            Representation::Kraus(k) => unitary_from_isometry_default(&isometry_from_kraus(k))?,
        }),
    })
}

pub fn run(args: ConvertArgs) -> CliResult<()> {
    if !(args.tol.is_finite() && args.tol > 0.0) {
        return Err(CliError::Parse(format!("--tol must be positive, got {}", args.tol)));
    }
    let source = io::parse_representation(io::read_json(&args.input)?)?;
    let target = convert(&source, args.to)?;
    let deviation = action_deviation(&to_kraus(&source), &to_kraus(&target));

    let mut metadata = json!({
        "schema": SCHEMA_VERSION,
        "kind": target.kind(),
        "source": source.kind(),
        "verified": deviation <= args.tol,
        "action_deviation": deviation,
        "tolerance": args.tol,
    });
    if let Representation::Unitary(u) = &target {
        let m = u.unitary().matrix();
        let id = linalg::identity(m.nrows());
        let unitarity = linalg::op_norm(&(m.adjoint() * m - &id)).max(linalg::op_norm(&(m * m.adjoint() - &id)));
        metadata["unitarity_deviation"] = json!(unitarity);
    }
    if deviation > args.tol.max(tolerance::VALIDATION) {
        return Err(CliError::Validation(format!(
            "converted channel deviates from the source by {deviation:.3e}"
        )));
    }

    let mut value = target.to_value();
    if let Value::Object(map) = &mut value {
        map.insert("metadata".into(), metadata);
    }
    io::emit(args.out.as_deref(), &io::pretty(&value))
}
