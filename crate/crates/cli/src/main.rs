//! `trotres` command-line front end.
//!
//! Exit codes: 0 success, 2 configuration error, 3 invariant or numerical failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use trotres::gate_count::{fswap_step_costs, split_step_costs, BasisChange, HwpBudget};
use trotres::optimizer::{minimize_with, PhaseEstimationScheme, PrecisionMode};
use trotres::orderings::{fswap_ordering, split_operator_ordering, SplitOrder};
use trotres::pipeline::{default_basis_change, evaluate_step, run_pipeline, target_delta_e, CostReport, RunConfig, StepChoice};
use trotres::surface_code::{estimate, PhysicalAssumptions};
use trotres::trotter_error::{trotter_error_norm, NormOptions};
use trotres::verify::{verify, Scope};

const WORKERS_ENV: &str = "TROTRES_WORKERS";
const CHECKPOINT_ENV: &str = "TROTRES_CHECKPOINT_DIR";

#[derive(Parser)]
#[command(name = "trotres", version, about = "Fault-tolerant resource estimates for Trotterized phase estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum StepArg {
    Fswap,
    Split,
    Auto,
}

impl From<StepArg> for StepChoice {
    fn from(s: StepArg) -> Self {
        match s {
            StepArg::Fswap => StepChoice::Fswap,
            StepArg::Split => StepChoice::SplitOperator,
            StepArg::Auto => StepChoice::Auto,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BasisArg {
    Ffft,
    Givens,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    Tv,
    Vt,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    Relative,
    Absolute,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScopeArg {
    Pauli,
    Trotter,
    Hwp,
    All,
}

#[derive(clap::Args)]
struct ConfigArgs {
    /// JSON run configuration.
    #[arg(long, short)]
    config: PathBuf,
    /// Overrides the configured step type.
    #[arg(long)]
    step: Option<StepArg>,
    /// Overrides the configured split-operator order.
    #[arg(long)]
    order: Option<OrderArg>,
    /// Overrides the configured basis change.
    #[arg(long)]
    basis: Option<BasisArg>,
    /// Overrides the configured Hamming-weight-phasing ancilla budget.
    #[arg(long)]
    hwp_ancillae: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the Hamiltonian and print its qubit-operator summary.
    Hamiltonian {
        #[command(flatten)]
        args: ConfigArgs,
        /// Write the Pauli terms, one per line, to this file.
        #[arg(long)]
        terms: Option<PathBuf>,
    },
    /// Build the Trotter ordering and print its fragments.
    Ordering {
        #[command(flatten)]
        args: ConfigArgs,
    },
    /// Compute the Trotter error norm W.
    TrotterNorm {
        #[command(flatten)]
        args: ConfigArgs,
        /// Use the unpruned multiply-based route.
        #[arg(long)]
        no_pruning: bool,
    },
    /// Per-step gate counts.
    Gates {
        #[command(flatten)]
        args: ConfigArgs,
    },
    /// Minimise the T count over the error budget.
    Optimize {
        /// Full configuration; W, N_r and N_d are computed from it unless overridden.
        #[arg(long, short)]
        config: Option<PathBuf>,
        #[arg(long)]
        w: Option<f64>,
        #[arg(long)]
        nr: Option<u64>,
        #[arg(long)]
        nd: Option<u64>,
        #[arg(long)]
        target: Option<TargetArg>,
        #[arg(long)]
        fraction: Option<f64>,
        /// Absolute ΔE, or the energy proxy's ΔE when given without a config.
        #[arg(long)]
        abs_value: Option<f64>,
        /// Energy proxy Ẽ₀ for relative targets without a config.
        #[arg(long)]
        energy: Option<f64>,
    },
    /// Surface-code estimate from an optimize or run report.
    Estimate {
        /// JSON with logical_qubits, t_gates and toffoli_gates.
        #[arg(long, short)]
        input: Option<PathBuf>,
        #[arg(long)]
        logical: Option<u64>,
        #[arg(long)]
        t_gates: Option<u64>,
        #[arg(long)]
        toffoli: Option<u64>,
        #[arg(long, default_value_t = 1e-3)]
        p: f64,
    },
    /// Full pipeline.
    Run {
        #[command(flatten)]
        args: ConfigArgs,
        /// Write the JSON report here instead of standard output.
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Append a CSV row (with header when the file is new).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run the built-in oracle checks.
    Verify {
        #[arg(long, value_enum, default_value_t = ScopeArg::All)]
        scope: ScopeArg,
    },
}

/// Error with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl std::fmt::Display) -> Self {
        Failure { code: 2, message: message.to_string() }
    }

    fn invariant(message: impl std::fmt::Display) -> Self {
        Failure { code: 3, message: message.to_string() }
    }
}

impl From<trotres::pipeline::PipelineError> for Failure {
    fn from(e: trotres::pipeline::PipelineError) -> Self {
        if e.is_config_error() {
            Failure::config(e)
        } else {
            Failure::invariant(e)
        }
    }
}

type CliResult = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> CliResult {
    fs::write(path, text).map_err(|e| Failure::invariant(format!("{}: {e}", path.display())))
}

fn print_json(value: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("serialisable output"));
}

fn load_config(args: &ConfigArgs) -> Result<RunConfig, Failure> {
    let mut config: RunConfig = serde_json::from_str(&read(&args.config)?)
        .map_err(|e| Failure::config(format!("config: {}: {e}", args.config.display())))?;
    if let Some(s) = args.step {
        config.step = s.into();
    }
    if let Some(o) = args.order {
        config.split_order = Some(match o {
            OrderArg::Tv => SplitOrder::Tv,
            OrderArg::Vt => SplitOrder::Vt,
        });
    }
    if let Some(b) = args.basis {
        config.basis_change = Some(match b {
            BasisArg::Ffft => BasisChange::Ffft,
            BasisArg::Givens => BasisChange::Givens,
        });
    }
    if let Some(r) = args.hwp_ancillae {
        config.hwp_ancillae = r;
    }
    if let Ok(w) = std::env::var(WORKERS_ENV) {
        let n: usize = w.parse().map_err(|_| Failure::config(format!("{WORKERS_ENV}={w:?} is not a worker count")))?;
        config.workers = Some(n);
    }
    if let Ok(dir) = std::env::var(CHECKPOINT_ENV) {
        config.checkpoint_dir = Some(PathBuf::from(dir));
    }
    config.validate()?;
    Ok(config)
}

fn hamiltonian_cmd(args: &ConfigArgs, terms: Option<&Path>) -> CliResult {
    let config = load_config(args)?;
    let h = config.system.build().map_err(|e| Failure::config(format!("hamiltonian: {e}")))?;
    let op = trotres::hamiltonians::jordan_wigner(&h);
    if let Some(path) = terms {
        write(path, &op.to_text())?;
    }
    print_json(&json!({
        "system": config.system.label(),
        "spin_orbitals": h.num_modes(),
        "pauli_terms": op.len(),
        "one_norm": op.one_norm(),
        "one_norm_traceless": op.one_norm_traceless(),
        "identity_coefficient": op.coefficient(&trotres::pauli::PauliString::identity()).re,
    }));
    Ok(())
}

fn ordering_of(config: &RunConfig) -> Result<trotres::orderings::TrotterOrdering, Failure> {
    let h = config.system.build().map_err(|e| Failure::config(format!("hamiltonian: {e}")))?;
    Ok(match config.step {
        StepChoice::Fswap => fswap_ordering(&h, config.granularity),
        StepChoice::SplitOperator | StepChoice::Auto => {
            split_operator_ordering(&h, config.split_order.unwrap_or(SplitOrder::Tv))
        }
    })
}

fn ordering_cmd(args: &ConfigArgs) -> CliResult {
    let config = load_config(args)?;
    let o = ordering_of(&config)?;
    let fragments: Vec<Value> = o
        .fragments
        .iter()
        .map(|f| json!({"terms": f.len(), "one_norm": f.one_norm()}))
        .collect();
    print_json(&json!({
        "label": o.label,
        "qubits": o.num_qubits,
        "layers": o.layers,
        "gates": o.gates.len(),
        "fragments": fragments,
    }));
    Ok(())
}

fn trotter_norm_cmd(args: &ConfigArgs, no_pruning: bool) -> CliResult {
    let config = load_config(args)?;
    if config.step == StepChoice::Auto {
        return Err(Failure::config("trotter-norm needs an explicit step"));
    }
    let o = ordering_of(&config)?;
    let options = NormOptions {
        workers: config.workers,
        disable_pruning: no_pruning,
        checkpoint: config.checkpoint_dir.as_ref().map(|d| d.join(format!("{}-norm.ckpt", &config.hash()[..16]))),
    };
    let r = trotter_error_norm(&o, &options).map_err(Failure::invariant)?;
    print_json(&json!({
        "label": o.label,
        "fragments": r.fragments,
        "w": r.w,
        "pruned_pairs": r.pruned_pairs,
        "per_qubit": r.per_qubit,
    }));
    Ok(())
}

fn gates_cmd(args: &ConfigArgs) -> CliResult {
    let config = load_config(args)?;
    let h = config.system.build().map_err(|e| Failure::config(format!("hamiltonian: {e}")))?;
    let budget = HwpBudget { ancillae: config.hwp_ancillae, scheme: config.hwp_scheme };
    let (counts, basis) = match config.step {
        StepChoice::Fswap => (fswap_step_costs(&h, &budget), None),
        _ => {
            let basis = config.basis_change.unwrap_or_else(|| default_basis_change(&h));
            let c = split_step_costs(&h, &budget, basis).map_err(|e| Failure::config(format!("gates: {e}")))?;
            (c, Some(basis))
        }
    };
    print_json(&json!({
        "system": config.system.label(),
        "basis_change": basis,
        "counts": counts,
        "n_r": counts.rotations,
        "n_d": counts.direct_t + config.physical.toffoli_t_cost * counts.direct_toffoli,
    }));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn optimize_cmd(
    config: Option<&Path>,
    w: Option<f64>,
    nr: Option<u64>,
    nd: Option<u64>,
    target: Option<TargetArg>,
    fraction: Option<f64>,
    abs_value: Option<f64>,
    energy: Option<f64>,
) -> CliResult {
    let apply_target = |p: &mut trotres::optimizer::PrecisionTarget| {
        if let Some(t) = target {
            p.mode = match t {
                TargetArg::Relative => PrecisionMode::Relative,
                TargetArg::Absolute => PrecisionMode::Absolute,
            };
        }
        if let Some(f) = fraction {
            p.fraction = f;
        }
        if abs_value.is_some() {
            p.absolute = abs_value;
        }
        if energy.is_some() {
            p.energy_proxy = energy;
        }
    };
    let (delta_e, w, nr, nd, toffoli_per_step, direct_t, logical, scheme, label) = match config {
        Some(path) => {
            let args = ConfigArgs { config: path.to_path_buf(), step: None, order: None, basis: None, hwp_ancillae: None };
            let mut config = load_config(&args)?;
            apply_target(&mut config.precision);
            let (_, delta_e) = target_delta_e(&config)?;
            let h = config.system.build().map_err(|e| Failure::config(format!("hamiltonian: {e}")))?;
            let step = if config.step == StepChoice::Auto { StepChoice::SplitOperator } else { config.step };
            let report = if w.is_some() && nr.is_some() && nd.is_some() { None } else { Some(evaluate_step(&h, &config, step)?) };
            let pick = |o: Option<f64>, f: &dyn Fn(&trotres::pipeline::StepReport) -> f64| {
                o.or_else(|| report.as_ref().map(f)).expect("report computed when an override is missing")
            };
            (
                delta_e,
                pick(w, &|r| r.w),
                pick(nr.map(|v| v as f64), &|r| r.n_r as f64),
                pick(nd.map(|v| v as f64), &|r| r.n_d as f64),
                report.as_ref().map(|r| r.gates.direct_toffoli),
                report.as_ref().map(|r| r.gates.direct_t),
                Some(h.num_modes() as u64 + config.hwp_ancillae as u64),
                config.precision.phase_estimation,
                config.system.label(),
            )
        }
        None => {
            let (Some(w), Some(nr), Some(nd)) = (w, nr, nd) else {
                return Err(Failure::config("optimize needs --config or all of --w, --nr, --nd"));
            };
            let mut p = trotres::optimizer::PrecisionTarget::default();
            apply_target(&mut p);
            let delta_e = p.delta_e(None, f64::NAN).map_err(|e| Failure::config(format!("optimize: {e}")))?;
            (delta_e, w, nr as f64, nd as f64, None, None, None, PhaseEstimationScheme::SingleAncilla, "custom".to_owned())
        }
    };
    let o = minimize_with(delta_e, w, nr, nd, scheme).map_err(|e| Failure::config(format!("optimize: {e}")))?;
    let steps = o.cost.reported_steps();
    let t_per_rotation = o.cost.reported_t_per_rotation();
    let (t_gates, toffoli_gates) = match (toffoli_per_step, direct_t) {
        (Some(tof), Some(dt)) => ((nr as u64 * t_per_rotation + dt) * steps, tof * steps),
        _ => ((nr as u64 * t_per_rotation + nd as u64) * steps, 0),
    };
    let mut out = json!({
        "system": label,
        "delta_e": delta_e,
        "w": w,
        "n_r": nr,
        "n_d": nd,
        "budget": o.budget,
        "cost": o.cost,
        "typical_budget_ordering": o.typical_ordering,
        "trotter_steps": steps,
        "t_per_rotation": t_per_rotation,
        "t_gates": t_gates,
        "toffoli_gates": toffoli_gates,
    });
    if let Some(l) = logical {
        out["logical_qubits"] = json!(l);
    }
    print_json(&out);
    println!("# csv: system,n_r,n_d,w,delta_e,trotter_steps,t_per_rotation,t_gates,toffoli_gates");
    println!("{label},{nr},{nd},{w:.12e},{delta_e:.12e},{steps},{t_per_rotation},{t_gates},{toffoli_gates}");
    Ok(())
}

fn estimate_cmd(input: Option<&Path>, logical: Option<u64>, t: Option<u64>, toffoli: Option<u64>, p: f64) -> CliResult {
    let from_file: Value = match input {
        Some(path) => {
            let text = read(path)?;
            // Optimize output carries a trailing CSV comment; only the JSON object is read.
            let end = text.rfind('}').map_or(text.len(), |i| i + 1);
            serde_json::from_str(&text[..end]).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?
        }
        None => json!({}),
    };
    let field = |cli: Option<u64>, name: &str| -> Result<u64, Failure> {
        cli.or_else(|| from_file.get(name).and_then(Value::as_u64))
            .ok_or_else(|| Failure::config(format!("estimate needs {name}")))
    };
    let logical = field(logical, "logical_qubits")?;
    let t = field(t, "t_gates")?;
    let toffoli = field(toffoli, "toffoli_gates")?;
    let assumptions = PhysicalAssumptions::with_error_rate(p);
    let e = estimate(logical, t, toffoli, &assumptions).map_err(|err| match err {
        trotres::surface_code::SurfaceCodeError::BudgetUnreachable { .. } => Failure::invariant(format!("estimate: {err}")),
        _ => Failure::config(format!("estimate: {err}")),
    })?;
    print_json(&e);
    println!("# csv: log,toffoli,t,physical_qubits,scheme,hours");
    println!("{logical},{toffoli},{t},{},{},{:.6e}", e.physical_qubits, e.scheme.letter(), e.hours);
    Ok(())
}

fn run_cmd(args: &ConfigArgs, output: Option<&Path>, csv: Option<&Path>) -> CliResult {
    let config = load_config(args)?;
    if let Some(dir) = &config.checkpoint_dir {
        fs::create_dir_all(dir).map_err(|e| Failure::invariant(format!("{}: {e}", dir.display())))?;
    }
    let report = run_pipeline(&config)?;
    let json = report.to_json();
    match output {
        Some(path) => write(path, &(json + "\n"))?,
        None => println!("{json}"),
    }
    if let Some(path) = csv {
        let mut text = if path.exists() { read(path)? } else { format!("{}\n", CostReport::CSV_HEADER) };
        text.push_str(&report.csv_row());
        text.push('\n');
        write(path, &text)?;
    }
    Ok(())
}

fn verify_cmd(scope: ScopeArg) -> CliResult {
    let scope = match scope {
        ScopeArg::Pauli => Scope::Pauli,
        ScopeArg::Trotter => Scope::Trotter,
        ScopeArg::Hwp => Scope::Hwp,
        ScopeArg::All => Scope::All,
    };
    let report = verify(scope);
    for check in &report.checks {
        println!("{check}");
    }
    let failed = report.checks.iter().filter(|c| !c.passed).count();
    if failed == 0 {
        println!("all {} checks passed", report.checks.len());
        Ok(())
    } else {
        Err(Failure::invariant(format!("{failed} of {} checks failed", report.checks.len())))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Hamiltonian { args, terms } => hamiltonian_cmd(args, terms.as_deref()),
        Command::Ordering { args } => ordering_cmd(args),
        Command::TrotterNorm { args, no_pruning } => trotter_norm_cmd(args, *no_pruning),
        Command::Gates { args } => gates_cmd(args),
        Command::Optimize { config, w, nr, nd, target, fraction, abs_value, energy } => {
            optimize_cmd(config.as_deref(), *w, *nr, *nd, *target, *fraction, *abs_value, *energy)
        }
        Command::Estimate { input, logical, t_gates, toffoli, p } => {
            estimate_cmd(input.as_deref(), *logical, *t_gates, *toffoli, *p)
        }
        Command::Run { args, output, csv } => run_cmd(args, output.as_deref(), csv.as_deref()),
        Command::Verify { scope } => verify_cmd(*scope),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
