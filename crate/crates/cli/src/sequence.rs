use std::path::PathBuf;

use channel_lab::gaussian::{
    param_convergence_check, standard_test_states, z_grid, GaussianChannelSequence, DEFAULT_GRID_POINTS,
};
use channel_lab::sequences::{
    channels_from_partial_isometries, compression_sequence, rotation_form, swap_counterexample, swap_form,
    strongstar_defect, sweep, ChannelSequence, ConvergenceReport, TestFamily,
};
use channel_lab::{linalg, random, DensityOperator, KrausChannel, Observable};
use clap::{Args, Subcommand, ValueEnum};

use crate::args;
use crate::io::{self, CliError, CliResult};

#[derive(Subcommand, Debug)]
pub enum SequenceCommand {
    /// Rank-r compressions of a base channel, refilled with a fixed state.
    Compress(CompressArgs),
    /// Channels built from the swap partial isometries on C^d.
    Swap(SwapArgs),
    /// Channels `Tr_E W(n) V_0 ρ V_0* W(n)*` with `W(n)` a plane rotation by `θ_n = scale / n`.
    PartialTraceForm(RotationArgs),
    /// Attenuators `k_n = k + offset / n` against the limit `k`.
    Gaussian(GaussianSeqArgs),
}

#[derive(Args, Debug)]
pub struct FamilyArgs {
    /// Haar-random test states and vectors added to the basis family.
    #[arg(long, default_value_t = 4)]
    random: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output prefix: writes PREFIX.csv and PREFIX.json. CSV goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Base {
    /// Random channel with `--kraus` Kraus operators, drawn from `--seed`.
    Random,
    /// Identity on C^dim (requires `--d-in` equal to `--dim`).
    Identity,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Refill {
    /// `|0><0|`.
    Pure,
    /// `I / dim`.
    Mixed,
}

#[derive(Args, Debug)]
pub struct CompressArgs {
    /// Output dimension.
    #[arg(long)]
    dim: usize,
    #[arg(long, default_value_t = 2)]
    d_in: usize,
    /// Ranks, e.g. `1..8`. Defaults to `1..dim`.
    #[arg(long, value_parser = args::usizes)]
    ranks: Option<args::List<usize>>,
    #[arg(long, value_enum, default_value_t = Base::Random)]
    base: Base,
    #[arg(long, default_value_t = 2)]
    kraus: usize,
    #[arg(long, value_enum, default_value_t = Refill::Pure)]
    sigma: Refill,
    #[command(flatten)]
    family: FamilyArgs,
}

#[derive(Args, Debug)]
pub struct SwapArgs {
    /// Total dimension `d = d_B * d_E` of the dilation space.
    #[arg(long)]
    dim: usize,
    /// Environment dimension; defaults to the largest divisor of `dim` not above its square root.
    #[arg(long)]
    env: Option<usize>,
    #[command(flatten)]
    family: FamilyArgs,
}

#[derive(Args, Debug)]
pub struct RotationArgs {
    /// Output dimension d_B.
    #[arg(long)]
    dim: usize,
    #[arg(long, default_value_t = 2)]
    env: usize,
    #[arg(long, default_value_t = 2)]
    d_in: usize,
    /// Rotation plane `i,j` in C^{d_B} ⊗ C^{d_E}.
    #[arg(long, value_parser = args::pair, default_value = "0,2")]
    plane: (usize, usize),
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long, value_parser = args::usizes, default_value = "1,2,5,10,100,1000")]
    indices: args::List<usize>,
    #[command(flatten)]
    family: FamilyArgs,
}

#[derive(Args, Debug)]
pub struct GaussianSeqArgs {
    /// Limit transmissivity.
    #[arg(long, default_value_t = 0.5)]
    k: f64,
    #[arg(long, default_value_t = 1.0)]
    offset: f64,
    /// Defaults to every n in 2..100 with `k + offset / n <= 1`.
    #[arg(long, value_parser = args::usizes)]
    indices: Option<args::List<usize>>,
    /// Largest number of characteristic-function grid points.
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    grid: usize,
    /// Deviation threshold for the `within_eps` column.
    #[arg(long, default_value_t = 1e-2)]
    tol: f64,
    /// Output prefix: writes PREFIX.csv and PREFIX.json. CSV goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(cmd: SequenceCommand) -> CliResult<()> {
    match cmd {
        SequenceCommand::Compress(a) => compress(a),
        SequenceCommand::Swap(a) => swap(a),
        SequenceCommand::PartialTraceForm(a) => rotation(a),
        SequenceCommand::Gaussian(a) => gaussian(a),
    }
}

fn write_report(report: &ConvergenceReport, out: Option<&std::path::Path>) -> CliResult<()> {
    match out {
        Some(prefix) => {
            let (csv, json) = io::report_paths(prefix);
            io::write_text(&csv, &report.to_csv())?;
            io::write_text(&json, &(report.to_json() + "\n"))
        }
        None => io::emit(None, &report.to_csv()),
    }
}

fn run_sweep(seq: &ChannelSequence, family: &FamilyArgs, notes: Vec<String>) -> CliResult<()> {
    let fam = TestFamily::standard(seq.d_in(), seq.d_out(), family.random, family.seed);
    let mut report = sweep(seq, &fam)?;
    for note in notes {
        report = report.with_note(note);
    }
    write_report(&report, family.out.as_deref())
}

fn compress(a: CompressArgs) -> CliResult<()> {
    if a.dim == 0 || a.d_in == 0 {
        return Err(CliError::Validation("dimensions must be positive".into()));
    }
    let phi = match a.base {
        Base::Random => {
            if a.kraus == 0 {
                return Err(CliError::Validation("--kraus must be positive".into()));
            }
            random::channel(&mut random::rng(a.family.seed), a.d_in, a.dim, a.kraus)
        }
        Base::Identity => {
            if a.d_in != a.dim {
                return Err(CliError::Validation(format!(
                    "identity base needs --d-in = --dim, got {} and {}",
                    a.d_in, a.dim
                )));
            }
            KrausChannel::identity(a.dim)
        }
    };
    let sigma = match a.sigma {
        Refill::Pure => DensityOperator::pure(&linalg::basis_vector(a.dim, 0))?,
        Refill::Mixed => DensityOperator::maximally_mixed(a.dim)?,
    };
    let ranks = a.ranks.clone().map(|l| l.0).unwrap_or_else(|| (1..=a.dim).collect());
    let seq = compression_sequence(&phi, &sigma, &ranks)?;
    // rows are indexed by position; map them back to ranks
    let notes = vec![format!(
        "index n is rank {}",
        ranks.iter().enumerate().map(|(i, r)| format!("{}->{r}", i + 1)).collect::<Vec<_>>().join(" ")
    )];
    run_sweep(&seq, &a.family, notes)
}

fn default_env(d: usize) -> usize {
    (1..=d).filter(|&e| d.is_multiple_of(e) && e * e <= d).max().unwrap_or(1)
}

fn swap(a: SwapArgs) -> CliResult<()> {
    let d = a.dim;
    let env = a.env.unwrap_or_else(|| default_env(d));
    if env == 0 || !d.is_multiple_of(env) {
        return Err(CliError::Validation(format!("--env {env} does not divide --dim {d}")));
    }
    let d_b = d / env;
    let form = swap_form(d_b, env)?;
    let seq = channels_from_partial_isometries(&form, form.indices())?;
    let ops = swap_counterexample(d)?;
    let mut op_dev: f64 = 0.0;
    for n in form.indices() {
        op_dev = op_dev.max((ops.vector_defects(*n, &ops.witness)?.1 - 1.0).abs());
    }
    let mut notes = vec![
        format!("d_B = {d_b}, d_E = {env}"),
        format!("operator witness |(W_n* - P_0) psi| = 1 for every n (max deviation {op_dev:.3e})"),
    ];
    // τ_env = |0>|d_E - 1> shares the environment index of ψ, so
    // (E_{d_B-1,0}, e_{env-1}) sees a unit defect at every n except n = env
    if d_b >= 2 {
        let obs = vec![(format!("E{}_0", d_b - 1), Observable::unit(d_b, d_b - 1, 0))];
        let phi = vec![(format!("e{}", env - 1), linalg::basis_vector(d - 1, env - 1))];
        let mut fixed_dev: f64 = 0.0;
        for &n in form.indices().iter().filter(|&&n| n != env) {
            fixed_dev = fixed_dev.max((strongstar_defect(&seq, n, &obs, &phi)?.value - 1.0).abs());
        }
        notes.push(format!(
            "fixed witness ({}, {}): strongstar defect 1 for every n != {env} (max deviation {fixed_dev:.3e})",
            obs[0].0, phi[0].0
        ));
    }
    run_sweep(&seq, &a.family, notes)
}

fn rotation(a: RotationArgs) -> CliResult<()> {
    if !a.scale.is_finite() {
        return Err(CliError::Validation("--scale must be finite".into()));
    }
    let scale = a.scale;
    let form = rotation_form(a.d_in, a.dim, a.env, a.plane, move |n| scale / n as f64, a.indices.0.clone())?;
    let seq = channels_from_partial_isometries(&form, form.indices())?;
    let notes = vec![format!("theta_n = {scale} / n in plane ({}, {})", a.plane.0, a.plane.1)];
    run_sweep(&seq, &a.family, notes)
}

fn gaussian(a: GaussianSeqArgs) -> CliResult<()> {
    let (k, offset) = (a.k, a.offset);
    if !(k > 0.0 && k <= 1.0) || !offset.is_finite() {
        return Err(CliError::Validation(format!("need 0 < k <= 1 and finite offset, got k={k}, offset={offset}")));
    }
    if !(a.tol.is_finite() && a.tol > 0.0) {
        return Err(CliError::Validation(format!("--tol must be positive, got {}", a.tol)));
    }
    let k_n = move |n: usize| if n == 0 { k } else { k + offset / n as f64 };
    let indices = a
        .indices
        .clone()
        .map(|l| l.0)
        .unwrap_or_else(|| (2..=100).filter(|&n| k_n(n) > 0.0 && k_n(n) <= 1.0).collect());
    let seq = GaussianChannelSequence::attenuators(k_n)?;
    let states = standard_test_states(1)?;
    let grid = z_grid(2, a.grid);
    let report = param_convergence_check(&seq, &indices, a.tol, &states, &grid)?;
    match a.out.as_deref() {
        Some(prefix) => {
            let (csv, json) = io::report_paths(prefix);
            io::write_text(&csv, &report.to_csv())?;
            io::write_text(&json, &io::pretty(&report))
        }
        None => io::emit(None, &report.to_csv()),
    }
}
