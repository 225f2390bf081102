//! `qtrunc` — truncation sizes, truncated Schrödinger propagation, monotonic
//! optimal control and bound verification for weakly-coupled systems.

mod manifest;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qtrunc::bounds::{full_report, FieldBudget, TruncationReport};
use qtrunc::error::Error;
use qtrunc::field::ControlField;
use qtrunc::optimize::{optimize_monotonic, OptimizerConfig};
use qtrunc::propagate::{
    fidelity, leakage_profile, propagate, write_leakage_csv, RunSummary, StateVector,
};
use qtrunc::system::{builtin_oscillator, builtin_rotor, load_system, QuantumSystem};
use qtrunc::verify::{any_failed, run_suite, SuiteConfig};

use manifest::RunManifest;

#[derive(Parser)]
#[command(name = "qtrunc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute rough and refined truncation dimensions for a field budget.
    Bound(BoundArgs),
    /// Integrate the truncated dynamics for a stored control field.
    Propagate(PropagateArgs),
    /// Run the monotonically convergent transfer optimization.
    Optimize(OptimizeArgs),
    /// Confront the analytic bounds with seeded trajectories.
    Verify(VerifyArgs),
    /// Pretty-print a stored truncation report.
    Report(ReportArgs),
}

#[derive(Args)]
struct BoundArgs {
    /// Builtin name (rotor, oscillator) or path to a system JSON file.
    #[arg(long)]
    system: String,
    /// L1 budget of the control field.
    #[arg(long = "K")]
    k_l1: f64,
    /// Threshold error.
    #[arg(long)]
    eps: f64,
    /// Horizon (informational; the bounds depend only on K).
    #[arg(long = "T", default_value_t = std::f64::consts::PI)]
    horizon: f64,
    /// Physical index of the initial basis state.
    #[arg(long, default_value_t = 1)]
    psi0_level: i64,
    /// Also write the report JSON to this path (plus a manifest next to it).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PropagateArgs {
    #[arg(long)]
    system: String,
    /// Truncation size (number of retained levels).
    #[arg(long = "N")]
    dim: usize,
    /// Control field file, CSV (`t,u`) or JSON (`{"dt":…,"samples":[…]}`).
    #[arg(long)]
    field: PathBuf,
    #[arg(long, default_value_t = 1)]
    psi0_level: i64,
    /// Record every n-th step (leakage maxima want stride 1).
    #[arg(long, default_value_t = 1)]
    stride: usize,
    /// Optional target level for the fidelity block of the summary.
    #[arg(long)]
    target_level: Option<i64>,
    /// Output prefix: writes <prefix>.traj.csv, <prefix>.leakage.csv,
    /// <prefix>.summary.json, <prefix>.manifest.json.
    #[arg(long)]
    out_prefix: PathBuf,
}

#[derive(Args)]
struct OptimizeArgs {
    #[arg(long)]
    system: String,
    #[arg(long = "N")]
    dim: usize,
    /// Control horizon.
    #[arg(long = "T", default_value_t = std::f64::consts::PI)]
    horizon: f64,
    #[arg(long, default_value_t = 1)]
    psi0_level: i64,
    #[arg(long, default_value_t = 2)]
    psif_level: i64,
    /// Field-energy penalty weight.
    #[arg(long, default_value_t = 0.01)]
    lambda: f64,
    #[arg(long, default_value_t = 300)]
    iters: usize,
    /// Samples of the piecewise-constant field over the horizon.
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    /// Stop once |<psif|psi(T)>|^2 reaches this value.
    #[arg(long, default_value_t = 0.9955)]
    fidelity_goal: f64,
    /// Constant initial guess amplitude (zero is a fixed point for
    /// orthogonal states — keep a small bias).
    #[arg(long, default_value_t = 0.1)]
    u0: f64,
    /// Output prefix: writes <prefix>.field.csv, <prefix>.result.json,
    /// <prefix>.manifest.json.
    #[arg(long)]
    out_prefix: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite config JSON; the built-in default suite runs when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Also write the JSON-lines report to this path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Truncation report JSON produced by `bound --out`.
    #[arg(long = "in")]
    input: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Bound(args) => cmd_bound(args),
        Command::Propagate(args) => cmd_propagate(args),
        Command::Optimize(args) => cmd_optimize(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Report(args) => cmd_report(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err
                .downcast_ref::<Error>()
                .map_or(1, exit_code_for);
            ExitCode::from(code)
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Schema(_) => 2,
        Error::CertificateViolation { .. } => 3,
        Error::Overflow { .. } => 4,
        Error::FieldFile(_) | Error::NonFiniteField => 5,
        Error::DimensionMismatch { .. } | Error::SpectrumExhausted { .. } => 6,
        Error::NonConvergence { .. } => 7,
        _ => 1,
    }
}

fn resolve_system(spec: &str) -> anyhow::Result<QuantumSystem> {
    match spec {
        "rotor" => Ok(builtin_rotor()),
        "oscillator" => Ok(builtin_oscillator()),
        path => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Schema(format!("cannot read system file {path}: {e}")))?;
            Ok(load_system(&text)?)
        }
    }
}

fn position_of(system: &QuantumSystem, level: i64) -> anyhow::Result<usize> {
    let position = level - system.spectrum.first_index;
    if position < 0 {
        return Err(Error::Schema(format!(
            "level {level} precedes the first level of `{}`",
            system.name
        ))
        .into());
    }
    Ok(position as usize)
}

fn cmd_bound(args: BoundArgs) -> anyhow::Result<ExitCode> {
    let system = resolve_system(&args.system)?;
    let budget = FieldBudget::new(args.k_l1, args.horizon)?;

    if let Some(out) = &args.out {
        RunManifest::new("bound")
            .input(&args.system)
            .output(out)
            .config(serde_json::json!({
                "system": args.system, "K": args.k_l1, "eps": args.eps,
                "T": args.horizon, "psi0_level": args.psi0_level,
            }))
            .write_to(&out.with_extension("manifest.json"))?;
    }

    let report = full_report(&system, &budget, args.psi0_level, args.eps)?;
    let json = serde_json::to_string_pretty(&report)?;
    println!("{json}");
    if let Some(out) = &args.out {
        fs::write(out, json.as_bytes())?;
    }

    let overflowed = report
        .rough
        .as_ref()
        .is_some_and(|r| r.overflow_log10.is_some());
    Ok(if overflowed { ExitCode::from(4) } else { ExitCode::SUCCESS })
}

fn cmd_propagate(args: PropagateArgs) -> anyhow::Result<ExitCode> {
    let system = resolve_system(&args.system)?;
    let field = ControlField::from_path(&args.field)?;
    let position = position_of(&system, args.psi0_level)?;
    if position >= args.dim {
        return Err(Error::DimensionMismatch { expected: args.dim, got: position + 1 }.into());
    }
    let psi0 = StateVector::basis_state(args.dim, position);

    let traj_path = suffixed(&args.out_prefix, "traj.csv");
    let leak_path = suffixed(&args.out_prefix, "leakage.csv");
    let summary_path = suffixed(&args.out_prefix, "summary.json");
    RunManifest::new("propagate")
        .input(&args.system)
        .input_path(&args.field)
        .output(&traj_path)
        .output(&leak_path)
        .output(&summary_path)
        .config(serde_json::json!({
            "system": args.system, "N": args.dim, "psi0_level": args.psi0_level,
            "stride": args.stride, "target_level": args.target_level,
        }))
        .write_to(&suffixed(&args.out_prefix, "manifest.json"))?;

    let traj = propagate(&system, args.dim, &field, &psi0, args.stride)?;

    let mut buf = Vec::new();
    traj.write_csv(&mut buf)?;
    fs::write(&traj_path, buf)?;

    let profile = leakage_profile(&traj);
    let mut buf = Vec::new();
    write_leakage_csv(&profile, system.spectrum.first_index, &mut buf)?;
    fs::write(&leak_path, buf)?;

    let fid = match args.target_level {
        Some(level) => {
            let target_pos = position_of(&system, level)?;
            if target_pos >= args.dim {
                return Err(
                    Error::DimensionMismatch { expected: args.dim, got: target_pos + 1 }.into()
                );
            }
            Some(fidelity(&traj, &StateVector::basis_state(args.dim, target_pos))?)
        }
        None => None,
    };
    let summary = RunSummary {
        system: system.name.clone(),
        dim: args.dim,
        k_l1: field.l1_norm(),
        horizon: field.horizon(),
        final_norm_error: traj.worst_norm_error(),
        fidelity: fid,
    };
    fs::write(&summary_path, serde_json::to_string_pretty(&summary)?)?;
    println!("{}", serde_json::to_string(&summary)?);
    Ok(ExitCode::SUCCESS)
}

fn cmd_optimize(args: OptimizeArgs) -> anyhow::Result<ExitCode> {
    let system = resolve_system(&args.system)?;
    let psi0_pos = position_of(&system, args.psi0_level)?;
    let psif_pos = position_of(&system, args.psif_level)?;
    if psi0_pos >= args.dim || psif_pos >= args.dim {
        return Err(Error::DimensionMismatch {
            expected: args.dim,
            got: psi0_pos.max(psif_pos) + 1,
        }
        .into());
    }
    if args.steps == 0 {
        return Err(Error::Schema("need at least one field sample".into()).into());
    }

    let field_path = suffixed(&args.out_prefix, "field.csv");
    let result_path = suffixed(&args.out_prefix, "result.json");
    RunManifest::new("optimize")
        .input(&args.system)
        .output(&field_path)
        .output(&result_path)
        .config(serde_json::json!({
            "system": args.system, "N": args.dim, "T": args.horizon,
            "psi0_level": args.psi0_level, "psif_level": args.psif_level,
            "lambda": args.lambda, "iters": args.iters, "steps": args.steps,
            "fidelity_goal": args.fidelity_goal, "u0": args.u0,
        }))
        .write_to(&suffixed(&args.out_prefix, "manifest.json"))?;

    let config = OptimizerConfig {
        penalty_lambda: args.lambda,
        max_iterations: args.iters,
        fidelity_goal: args.fidelity_goal,
        initial_field: ControlField::constant(args.u0, args.horizon / args.steps as f64, args.steps)?,
    };
    let psi0 = StateVector::basis_state(args.dim, psi0_pos);
    let psif = StateVector::basis_state(args.dim, psif_pos);
    let result = optimize_monotonic(&system, args.dim, &psi0, &psif, &config)?;

    let mut buf = Vec::new();
    result.field.write_csv(&mut buf)?;
    fs::write(&field_path, buf)?;
    let json = serde_json::to_string_pretty(&result)?;
    fs::write(&result_path, &json)?;
    println!(
        "{}",
        serde_json::json!({
            "iterations": result.iterations,
            "final_distance": result.final_distance,
            "achieved_K": result.achieved_k,
            "objective": result.objective_trace.last(),
        })
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> anyhow::Result<ExitCode> {
    let config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Schema(format!("cannot read config {}: {e}", path.display())))?;
            serde_json::from_str::<SuiteConfig>(&text)
                .map_err(|e| Error::Schema(format!("bad suite config: {e}")))?
        }
        None => SuiteConfig::default(),
    };

    if let Some(out) = &args.out {
        RunManifest::new("verify")
            .input(args.config.as_deref().map_or("builtin-default", |p| p.to_str().unwrap_or("?")))
            .output(out)
            .config(serde_json::to_value(&config)?)
            .write_to(&out.with_extension("manifest.json"))?;
    }

    let reports = run_suite(&config)?;
    let mut lines = String::new();
    for report in &reports {
        lines.push_str(&serde_json::to_string(report)?);
        lines.push('\n');
    }
    print!("{lines}");
    if let Some(out) = &args.out {
        fs::write(out, lines.as_bytes())?;
    }
    Ok(if any_failed(&reports) { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn cmd_report(args: ReportArgs) -> anyhow::Result<ExitCode> {
    let text = fs::read_to_string(&args.input)?;
    let report: TruncationReport = serde_json::from_str(&text)?;
    println!("system        : {}", report.system);
    println!("K (L1 budget) : {}", report.k_l1);
    println!("eps           : {:e}", report.eps);
    println!("psi0 level    : {}  (⟨H0⟩(0) = {})", report.psi0_level, report.h0_init);
    match report.energy_bound {
        Some(v) => println!("energy bound  : {v:.6e}"),
        None => println!("energy bound  : 10^{:.3}", report.energy_bound_log10),
    }
    if let Some(rough) = &report.rough {
        match (rough.n, rough.overflow_log10) {
            (Some(n), _) => println!("rough N       : {n}  [{}]", rough.provenance),
            (None, Some(log10)) => {
                println!("rough N       : overflow, threshold 10^{log10:.3}  [{}]", rough.provenance)
            }
            _ => {}
        }
    }
    if let Some(pf) = &report.paper_formula {
        match pf.value {
            Some(v) => println!("printed form  : {v:.6e}  [{}]", pf.provenance),
            None => println!("printed form  : 10^{:.3}  [{}]", pf.log10, pf.provenance),
        }
        if let (Some(reported), Some(agrees)) = (pf.paper_reported, pf.agrees_with_paper) {
            println!(
                "              : published value {reported:.2e} — {}",
                if agrees { "agrees within 1%" } else { "MISMATCH (reported, not reconciled)" }
            );
        }
    }
    if let Some(refined) = &report.refined {
        println!("refined N     : {}  [{}]", refined.n, refined.provenance);
        println!(
            "  condition   : lhs(N) = {:.6e}, lhs(N-1) = {}",
            refined.condition_lhs_at_n,
            refined
                .condition_lhs_at_n_minus_1
                .map_or("n/a".into(), |v| format!("{v:.6e}")),
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn suffixed(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.file_name().map_or_else(String::new, |s| {
        s.to_string_lossy().into_owned()
    });
    name.push('.');
    name.push_str(suffix);
    prefix.with_file_name(name)
}
