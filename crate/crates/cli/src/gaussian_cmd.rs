use std::path::PathBuf;

use channel_lab::gaussian::{
    apply_gaussian, attenuator, attenuator_output_distance, param_convergence_check, standard_test_states,
    validate_channel, validate_state, z_grid, GaussianChannel, GaussianChannelSequence, GaussianState,
    DEFAULT_GRID_POINTS,
};
use channel_lab::sequences::SCHEMA_VERSION;
use clap::{Args, Subcommand};
use num_complex::Complex64;
use serde_json::json;

use crate::args;
use crate::io::{self, CliError, CliResult, GaussianObject};

#[derive(Subcommand, Debug)]
pub enum GaussianCommand {
    /// Push a state through a channel (a file, or an attenuator via `--k`).
    Apply(ApplyArgs),
    /// Check the uncertainty condition of a state or channel; exit 2 if violated.
    Validate(ValidateArgs),
    /// Trace distance between attenuator outputs on a coherent state.
    Distance(DistanceArgs),
    /// Parameter and characteristic-function deviations of attenuators from the first `--k`.
    Converge(ConvergeArgs),
}

#[derive(Args, Debug)]
pub struct ApplyArgs {
    /// State file; the one-mode vacuum when omitted.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long, conflicts_with = "k", required_unless_present = "k")]
    channel: Option<PathBuf>,
    /// Attenuator transmissivity.
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DistanceArgs {
    /// `k,k'`.
    #[arg(long, value_parser = args::floats)]
    k: args::List<f64>,
    /// Coherent amplitude `re` or `re,im`.
    #[arg(long, value_parser = io::parse_complex)]
    eta: Complex64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ConvergeArgs {
    /// `k_0,k_1,k_2,...`: the limit followed by terms n = 1, 2, ...
    #[arg(long, value_parser = args::floats)]
    k: args::List<f64>,
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    grid: usize,
    #[arg(long, default_value_t = 1e-2)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(cmd: GaussianCommand) -> CliResult<()> {
    match cmd {
        GaussianCommand::Apply(a) => apply(a),
        GaussianCommand::Validate(a) => validate(a),
        GaussianCommand::Distance(a) => distance(a),
        GaussianCommand::Converge(a) => converge(a),
    }
}

fn apply(a: ApplyArgs) -> CliResult<()> {
    let state = match &a.input {
        Some(p) => io::parse_gaussian_state(p)?,
        None => GaussianState::vacuum(1)?,
    };
    let (channel, source) = match (&a.channel, a.k) {
        (Some(p), _) => (io::parse_gaussian_channel(p)?, json!({"file": p.display().to_string()})),
        (None, Some(k)) => (attenuator(k)?, json!({"attenuator": k})),
        (None, None) => unreachable!("clap requires --channel or --k"),
    };
    let output = apply_gaussian(&channel, &state)?;
    let doc = json!({
        "schema": SCHEMA_VERSION,
        "input": {
            "channel_source": source,
            "channel": channel,
            "state": state,
        },
        "output": output,
    });
    io::emit(a.out.as_deref(), &io::pretty(&doc))
}

fn validate(a: ValidateArgs) -> CliResult<()> {
    let value = io::read_json(&a.input)?;
    let (kind, diag, echo) = match io::parse_gaussian(value)? {
        GaussianObject::State(s) => ("state", validate_state(&s), serde_json::to_value(&s)),
        GaussianObject::Channel(c) => ("channel", validate_channel(&c), serde_json::to_value(&c)),
    };
    let doc = json!({
        "schema": SCHEMA_VERSION,
        "kind": kind,
        "input": echo.expect("gaussian objects serialize"),
        "diagnostics": diag,
        "min_eigenvalue": diag.min_eig(),
    });
    io::emit(a.out.as_deref(), &io::pretty(&doc))?;
    if diag.valid {
        Ok(())
    } else {
        Err(CliError::Validation(format!(
            "{kind} violates the uncertainty condition: min eigenvalue {:.6e}, symmetry error {:.3e}",
            diag.min_eig(),
            diag.symmetry_error
        )))
    }
}

fn distance(a: DistanceArgs) -> CliResult<()> {
    let [k, k_prime] = a.k[..] else {
        return Err(CliError::Parse(format!("--k expects two values `k,k'`, got {}", a.k.len())));
    };
    // rejects transmissivities outside (0, 1]
    attenuator(k)?;
    attenuator(k_prime)?;
    let d = attenuator_output_distance(k, k_prime, a.eta);
    let doc = json!({
        "schema": SCHEMA_VERSION,
        "k": k,
        "k_prime": k_prime,
        "eta": [a.eta.re, a.eta.im],
        "distance": d,
    });
    io::emit(a.out.as_deref(), &io::pretty(&doc))
}

fn converge(a: ConvergeArgs) -> CliResult<()> {
    if a.k.len() < 2 {
        return Err(CliError::Parse("--k needs the limit and at least one term".into()));
    }
    let channels = a.k.iter().map(|&k| attenuator(k)).collect::<Result<Vec<GaussianChannel>, _>>()?;
    let terms = channels.clone();
    let seq = GaussianChannelSequence::new("attenuator", channels[0].clone(), move |n| {
        terms
            .get(n)
            .cloned()
            .ok_or(channel_lab::Error::IndexOutOfRange(n))
    });
    let ns: Vec<usize> = (1..a.k.len()).collect();
    let report = param_convergence_check(&seq, &ns, a.tol, &standard_test_states(1)?, &z_grid(2, a.grid))?;
    io::emit(a.out.as_deref(), &io::pretty(&report))
}
