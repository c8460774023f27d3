//! End-to-end run: Hamiltonian, ordering, `W`, gate counts, budget minimisation
//! and surface-code estimate, collected in one deterministic report.

use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::gate_count::{fswap_step_costs, split_step_costs, BasisChange, GateCountError, GateCounts, HwpBudget, HwpScheme};
use crate::hamiltonians::{hubbard, jellium, material, FermionHamiltonian, GridSpec, HamiltonianError, HubbardSpec, Nucleus};
use crate::optimizer::{
    hubbard_energy_proxy, jellium_energy_proxy_with, minimize_with, CostBreakdown, ErrorBudget, OptimizerError,
    PrecisionTarget, CHEMICAL_ACCURACY,
};
use crate::orderings::{fswap_ordering, split_operator_ordering, Granularity, OrderingLabel, SplitOrder, TrotterOrdering};
use crate::surface_code::{estimate, PhysicalAssumptions, ResourceEstimate, SurfaceCodeError};
use crate::trotter_error::{trotter_error_norm, NormOptions, TrotterError};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Pipeline stage, used to label errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Config,
    Hamiltonian,
    Ordering,
    TrotterNorm,
    Gates,
    Optimize,
    Estimate,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Stage::Config => "config",
            Stage::Hamiltonian => "hamiltonian",
            Stage::Ordering => "ordering",
            Stage::TrotterNorm => "trotter-norm",
            Stage::Gates => "gates",
            Stage::Optimize => "optimize",
            Stage::Estimate => "estimate",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{stage}: {reason}")]
    Invalid { stage: Stage, reason: String },
    #[error("hamiltonian: {0}")]
    Hamiltonian(#[from] HamiltonianError),
    #[error("trotter-norm: {0}")]
    Trotter(#[from] TrotterError),
    #[error("gates: {0}")]
    Gates(#[from] GateCountError),
    #[error("optimize: {0}")]
    Optimizer(#[from] OptimizerError),
    #[error("estimate: {0}")]
    SurfaceCode(#[from] SurfaceCodeError),
}

impl PipelineError {
    fn invalid(stage: Stage, reason: impl Into<String>) -> Self {
        PipelineError::Invalid { stage, reason: reason.into() }
    }

    /// Configuration problems, as opposed to numerical or I/O failures.
    pub fn is_config_error(&self) -> bool {
        match self {
            PipelineError::Invalid { .. }
            | PipelineError::Hamiltonian(_)
            | PipelineError::Gates(_)
            | PipelineError::Optimizer(_) => true,
            PipelineError::SurfaceCode(e) => !matches!(e, SurfaceCodeError::BudgetUnreachable { .. }),
            PipelineError::Trotter(_) => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    Jellium { grid: GridSpec },
    Material { grid: GridSpec, nuclei: Vec<Nucleus> },
    Hubbard(HubbardSpec),
}

impl SystemSpec {
    pub fn build(&self) -> Result<FermionHamiltonian, HamiltonianError> {
        match self {
            SystemSpec::Jellium { grid } => jellium(grid),
            SystemSpec::Material { grid, nuclei } => material(grid, nuclei),
            SystemSpec::Hubbard(spec) => hubbard(spec),
        }
    }

    /// Short label, e.g. `FH 8x8` or `UEG 3x3x3`.
    pub fn label(&self) -> String {
        let join = |l: &[usize]| l.iter().map(usize::to_string).collect::<Vec<_>>().join("x");
        match self {
            SystemSpec::Jellium { grid } => format!("UEG {}", join(&grid.lengths)),
            SystemSpec::Material { grid, .. } => format!("material {}", join(&grid.lengths)),
            SystemSpec::Hubbard(s) => format!("FH {}x{}", s.lx, s.ly),
        }
    }

    /// Energy proxy Ẽ₀ when one can be computed, and the default absolute ΔE.
    fn energy_defaults(&self, target: &PrecisionTarget) -> Result<(Option<f64>, f64), OptimizerError> {
        match self {
            SystemSpec::Jellium { grid } => {
                let rs = grid.wigner_seitz_radius;
                let proxy = rs.map(|rs| jellium_energy_proxy_with(rs, grid.electron_count(), target.jellium_form));
                Ok((proxy, CHEMICAL_ACCURACY))
            }
            SystemSpec::Material { .. } => Ok((None, CHEMICAL_ACCURACY)),
            SystemSpec::Hubbard(s) => {
                let proxy = match target.mode {
                    crate::optimizer::PrecisionMode::Relative if target.energy_proxy.is_none() => {
                        Some(s.tau * hubbard_energy_proxy(s.u / s.tau, s.lx * s.ly)?)
                    }
                    _ => None,
                };
                Ok((proxy, s.tau / 100.0))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StepChoice {
    Fswap,
    #[default]
    SplitOperator,
    /// Both steps; the one with the lower total T count is reported.
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSpec,
    #[serde(default)]
    pub step: StepChoice,
    /// Split-operator order; the one with the smaller `W` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split_order: Option<SplitOrder>,
    #[serde(default)]
    pub granularity: Granularity,
    /// FFFT when every side is 4, 8 or 16 and the kinetic term allows it, otherwise Givens.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis_change: Option<BasisChange>,
    pub hwp_ancillae: usize,
    #[serde(default = "default_hwp_scheme")]
    pub hwp_scheme: HwpScheme,
    #[serde(default)]
    pub precision: PrecisionTarget,
    #[serde(default)]
    pub physical: PhysicalAssumptions,
    /// Execution settings; they do not enter the config hash.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoint_dir: Option<PathBuf>,
    /// Record the run's wall time; off by default so reports are reproducible byte for byte.
    #[serde(default)]
    pub record_wall_time: bool,
}

fn default_hwp_scheme() -> HwpScheme {
    HwpScheme::Limited
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        let config: RunConfig =
            serde_json::from_str(text).map_err(|e| PipelineError::invalid(Stage::Config, e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Checks that need no Hamiltonian.
    pub fn validate(&self) -> Result<(), PipelineError> {
        match &self.system {
            SystemSpec::Jellium { grid } | SystemSpec::Material { grid, .. } => grid.validate()?,
            SystemSpec::Hubbard(s) => {
                if s.lx == 0 || s.ly == 0 {
                    return Err(HamiltonianError::EmptyLattice.into());
                }
            }
        }
        if self.basis_change == Some(BasisChange::Ffft) {
            if let Some(bad) = self.side_lengths().into_iter().find(|l| ![4, 8, 16].contains(l)) {
                return Err(PipelineError::invalid(Stage::Gates, format!("FFFT needs side lengths in {{4, 8, 16}}, got {bad}")));
            }
            if self.step == StepChoice::Fswap {
                return Err(PipelineError::invalid(Stage::Gates, "basis change applies only to split-operator steps"));
            }
        }
        if self.workers == Some(0) {
            return Err(PipelineError::invalid(Stage::Config, "workers must be at least 1"));
        }
        let p = &self.precision;
        if !(p.fraction > 0.0) || p.absolute.is_some_and(|a| !(a > 0.0)) {
            return Err(PipelineError::invalid(Stage::Optimize, "precision targets must be positive"));
        }
        self.physical.validate()?;
        Ok(())
    }

    fn side_lengths(&self) -> Vec<usize> {
        match &self.system {
            SystemSpec::Jellium { grid } | SystemSpec::Material { grid, .. } => grid.lengths.clone(),
            SystemSpec::Hubbard(s) => vec![s.ly, s.lx],
        }
    }

    /// SHA-256 of the canonical JSON with execution settings cleared.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.workers = None;
        canonical.checkpoint_dir = None;
        let json = serde_json::to_string(&canonical).expect("config serialises");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    fn hwp_budget(&self) -> HwpBudget {
        HwpBudget { ancillae: self.hwp_ancillae, scheme: self.hwp_scheme }
    }

    fn norm_options(&self, tag: &str) -> NormOptions {
        NormOptions {
            workers: self.workers,
            disable_pruning: false,
            checkpoint: self.checkpoint_dir.as_ref().map(|d| d.join(format!("{}-{tag}.ckpt", &self.hash()[..16]))),
        }
    }
}

/// Basis change used when the config leaves it open.
pub fn default_basis_change(h: &FermionHamiltonian) -> BasisChange {
    let sides: Vec<usize> = match &h.model {
        crate::hamiltonians::Model::Hubbard(s) => vec![s.ly, s.lx],
        _ => h.grid.lengths.clone(),
    };
    let scale = h.kinetic.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    if sides.iter().all(|l| [4, 8, 16].contains(l)) && h.kinetic_is_translation_invariant(1e-12 * scale.max(1e-300)) {
        BasisChange::Ffft
    } else {
        BasisChange::Givens
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub ordering: OrderingLabel,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis_change: Option<BasisChange>,
    pub fragments: usize,
    pub w: f64,
    /// Both split-operator norms when the order was chosen automatically.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_tv: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_vt: Option<f64>,
    pub pruned_pairs: u64,
    pub gates: GateCounts,
    pub n_r: u64,
    pub n_d: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub version: String,
    pub config_hash: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_seconds: Option<f64>,
    pub system: String,
    pub spin_orbitals: usize,
    pub hwp_ancillae: usize,
    /// System qubits plus HWP ancillae.
    pub logical_qubits: u64,
    pub step: StepReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_proxy: Option<f64>,
    pub delta_e: f64,
    pub budget: ErrorBudget,
    pub cost: CostBreakdown,
    pub typical_budget_ordering: bool,
    pub trotter_steps: u64,
    pub t_per_rotation: u64,
    pub toffoli_gates: u64,
    pub t_gates: u64,
    pub physical: ResourceEstimate,
}

impl CostReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub const CSV_HEADER: &'static str =
        "system,anc,log,toffoli,t,physical_qubits,scheme,hours,spin_orbitals,ordering,w,n_r,n_d,delta_e,trotter_steps";

    /// Table column order first, then the series behind the scaling plots.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{:.6e},{},{},{:.12e},{},{},{:.12e},{}",
            self.system,
            self.hwp_ancillae,
            self.logical_qubits,
            self.toffoli_gates,
            self.t_gates,
            self.physical.physical_qubits,
            self.physical.scheme.letter(),
            self.physical.hours,
            self.spin_orbitals,
            serde_json::to_value(self.step.ordering).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default(),
            self.step.w,
            self.step.n_r,
            self.step.n_d,
            self.delta_e,
            self.trotter_steps,
        )
    }
}

/// Orders, `W` and per-step counts for one step type.
pub fn evaluate_step(h: &FermionHamiltonian, config: &RunConfig, step: StepChoice) -> Result<StepReport, PipelineError> {
    let budget = config.hwp_budget();
    let (ordering, basis, w_pair) = match step {
        StepChoice::Fswap => (fswap_ordering(h, config.granularity), None, None),
        StepChoice::SplitOperator => {
            let basis = config.basis_change.unwrap_or_else(|| default_basis_change(h));
            match config.split_order {
                Some(order) => (split_operator_ordering(h, order), Some(basis), None),
                None => {
                    let tv = split_operator_ordering(h, SplitOrder::Tv);
                    let vt = split_operator_ordering(h, SplitOrder::Vt);
                    let w_tv = trotter_error_norm(&tv, &config.norm_options("tv"))?;
                    let w_vt = trotter_error_norm(&vt, &config.norm_options("vt"))?;
                    let (o, r) = if w_vt.w < w_tv.w { (vt, w_vt.clone()) } else { (tv, w_tv.clone()) };
                    (o, Some(basis), Some((w_tv.w, w_vt.w, r)))
                }
            }
        }
        StepChoice::Auto => unreachable!("resolved by the caller"),
    };
    let norm = match &w_pair {
        Some((_, _, r)) => r.clone(),
        None => trotter_error_norm(&ordering, &config.norm_options(tag(&ordering)))?,
    };
    let gates = match basis {
        None => fswap_step_costs(h, &budget),
        Some(b) => split_step_costs(h, &budget, b)?,
    };
    if gates.rotations == 0 {
        return Err(PipelineError::invalid(Stage::Gates, "step has no rotations to synthesise"));
    }
    Ok(StepReport {
        ordering: ordering.label,
        basis_change: basis,
        fragments: ordering.fragments.len(),
        w: norm.w,
        w_tv: w_pair.as_ref().map(|p| p.0),
        w_vt: w_pair.as_ref().map(|p| p.1),
        pruned_pairs: norm.pruned_pairs,
        gates,
        n_r: gates.rotations,
        n_d: direct_t_equivalents(&gates, config),
    })
}

fn tag(o: &TrotterOrdering) -> &'static str {
    match o.label {
        OrderingLabel::Fswap => "fswap",
        OrderingLabel::SplitTv => "tv",
        OrderingLabel::SplitVt => "vt",
    }
}

fn direct_t_equivalents(g: &GateCounts, config: &RunConfig) -> u64 {
    g.direct_t + config.physical.toffoli_t_cost * g.direct_toffoli
}

struct Costed {
    step: StepReport,
    budget: ErrorBudget,
    cost: CostBreakdown,
    typical: bool,
    trotter_steps: u64,
    t_per_rotation: u64,
    toffoli: u64,
    t: u64,
}

fn cost_step(step: StepReport, delta_e: f64, config: &RunConfig) -> Result<Costed, PipelineError> {
    let o = minimize_with(delta_e, step.w, step.n_r as f64, step.n_d as f64, config.precision.phase_estimation)?;
    let trotter_steps = o.cost.reported_steps();
    let t_per_rotation = o.cost.reported_t_per_rotation();
    // Catalysis seed rotations are synthesised once for the whole computation.
    let per_step_t = step.n_r * t_per_rotation + step.gates.direct_t;
    let t = per_step_t * trotter_steps + step.gates.catalysis_seeds * t_per_rotation;
    let toffoli = step.gates.direct_toffoli * trotter_steps;
    Ok(Costed { step, budget: o.budget, cost: o.cost, typical: o.typical_ordering, trotter_steps, t_per_rotation, toffoli, t })
}

/// Energy proxy (when one applies) and the precision target ΔE.
pub fn target_delta_e(config: &RunConfig) -> Result<(Option<f64>, f64), PipelineError> {
    let (proxy, default_abs) = config.system.energy_defaults(&config.precision)?;
    Ok((config.precision.energy_proxy.or(proxy), config.precision.delta_e(proxy, default_abs)?))
}

pub fn run_pipeline(config: &RunConfig) -> Result<CostReport, PipelineError> {
    let started = Instant::now();
    config.validate()?;
    let h = config.system.build()?;
    let (proxy, delta_e) = target_delta_e(config)?;

    let chosen = match config.step {
        StepChoice::Auto => {
            let split = evaluate_step(&h, config, StepChoice::SplitOperator);
            let fswap = cost_step(evaluate_step(&h, config, StepChoice::Fswap)?, delta_e, config)?;
            match split {
                Ok(s) => {
                    let split = cost_step(s, delta_e, config)?;
                    if split.cost.total_t <= fswap.cost.total_t {
                        split
                    } else {
                        fswap
                    }
                }
                Err(PipelineError::Gates(_)) => fswap,
                Err(e) => return Err(e),
            }
        }
        step => cost_step(evaluate_step(&h, config, step)?, delta_e, config)?,
    };

    let logical_qubits = h.num_modes() as u64 + config.hwp_ancillae as u64;
    let physical = estimate(logical_qubits, chosen.t.max(1), chosen.toffoli, &config.physical)?;
    Ok(CostReport {
        version: VERSION.to_owned(),
        config_hash: config.hash(),
        wall_time_seconds: config.record_wall_time.then(|| started.elapsed().as_secs_f64()),
        system: config.system.label(),
        spin_orbitals: h.num_modes(),
        hwp_ancillae: config.hwp_ancillae,
        logical_qubits,
        step: chosen.step,
        energy_proxy: proxy,
        delta_e,
        budget: chosen.budget,
        cost: chosen.cost,
        typical_budget_ordering: chosen.typical,
        trotter_steps: chosen.trotter_steps,
        t_per_rotation: chosen.t_per_rotation,
        toffoli_gates: chosen.toffoli,
        t_gates: chosen.t,
        physical,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hubbard_config(side: usize, basis: Option<BasisChange>) -> RunConfig {
        RunConfig {
            system: SystemSpec::Hubbard(HubbardSpec { lx: side, ly: side, tau: 1.0, u: 4.0, periodic: true }),
            step: StepChoice::SplitOperator,
            split_order: None,
            granularity: Granularity::PerGate,
            basis_change: basis,
            hwp_ancillae: 4,
            hwp_scheme: HwpScheme::Limited,
            precision: PrecisionTarget::default(),
            physical: PhysicalAssumptions::default(),
            workers: None,
            checkpoint_dir: None,
            record_wall_time: false,
        }
    }

    #[test]
    fn ffft_on_side_five_is_a_gates_error() {
        let err = hubbard_config(5, Some(BasisChange::Ffft)).validate().unwrap_err();
        assert!(err.to_string().starts_with("gates:"), "{err}");
        assert!(err.is_config_error());
    }

    #[test]
    fn hash_ignores_execution_settings() {
        let a = hubbard_config(4, None);
        let mut b = a.clone();
        b.workers = Some(3);
        b.checkpoint_dir = Some(PathBuf::from("/tmp"));
        assert_eq!(a.hash(), b.hash());
        let mut c = a.clone();
        c.hwp_ancillae = 5;
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn json_round_trip_and_unknown_fields() {
        let text = r#"{"system": {"kind": "hubbard", "lx": 2, "ly": 2, "tau": 1.0, "u": 4.0, "periodic": true}, "hwp_ancillae": 2}"#;
        let c = RunConfig::from_json(text).unwrap();
        assert_eq!(c.step, StepChoice::SplitOperator);
        let again = RunConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(c, again);
        assert!(RunConfig::from_json(r#"{"system": {"kind": "hubbard", "lx": 2, "ly": 2, "tau": 1.0, "u": 4.0, "periodic": true}, "hwp_ancillae": 2, "bogus": 1}"#).is_err());
    }

    #[test]
    fn small_hubbard_run_is_consistent() {
        let r = run_pipeline(&hubbard_config(4, None)).unwrap();
        assert_eq!(r.spin_orbitals, 32);
        assert_eq!(r.logical_qubits, 36);
        assert_eq!(r.step.basis_change, Some(BasisChange::Ffft));
        assert_eq!(r.step.ordering, OrderingLabel::SplitTv);
        assert!((r.delta_e - 0.005 * 16.0 * 1.02).abs() < 1e-12);
        assert_eq!(r.toffoli_gates, r.step.gates.direct_toffoli * r.trotter_steps);
        assert_eq!(r.to_json(), run_pipeline(&hubbard_config(4, None)).unwrap().to_json());
    }
}
