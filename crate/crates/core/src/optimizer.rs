//! Phase-estimation T count and its minimisation over the error budget.
//!
//! ```text
//! t    = √(ΔE_TS / W)
//! N_PE = c_PE √W / (ΔE_PE √ΔE_TS)
//! N_HT = 1.15 log₂(N_r √W / (ΔE_HT √ΔE_TS)) + 9.2
//! T    = (N_r N_HT + N_d) N_PE
//! ```

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizerError {
    #[error("budget component {name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("Hubbard energy proxy is tabulated only for U/tau = 4 or 8 (got {0}); supply a per-site value")]
    UnsupportedRatio(f64),
    #[error("Trotter error norm must be positive, got {0}")]
    BadNorm(f64),
    #[error("at least one rotation per step is required")]
    NoRotations,
    #[error("relative precision needs an energy proxy for this system")]
    MissingProxy,
}

fn positive(name: &'static str, value: f64) -> Result<f64, OptimizerError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(OptimizerError::NonPositive { name, value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub trotter: f64,
    pub phase_estimation: f64,
    pub synthesis: f64,
}

impl ErrorBudget {
    pub fn total(&self) -> f64 {
        self.trotter + self.phase_estimation + self.synthesis
    }

    pub fn equal_thirds(delta_e: f64) -> Self {
        ErrorBudget { trotter: delta_e / 3.0, phase_estimation: delta_e / 3.0, synthesis: delta_e / 3.0 }
    }
}

/// Phase-estimation prefactor variants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PhaseEstimationScheme {
    /// Single control qubit, `0.76π`.
    #[default]
    SingleAncilla,
    /// Multiple control qubits: the prefactor is divided by 1.52.
    MultiControl,
    /// Median estimator: the prefactor is divided by 1.45.
    Median,
}

impl PhaseEstimationScheme {
    pub fn prefactor(self) -> f64 {
        let base = 0.76 * PI;
        match self {
            PhaseEstimationScheme::SingleAncilla => base,
            PhaseEstimationScheme::MultiControl => base / 1.52,
            PhaseEstimationScheme::Median => base / 1.45,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    /// Trotter steps, kept real.
    pub n_pe: f64,
    /// T gates per synthesised rotation, kept real.
    pub n_ht: f64,
    /// Trotter step duration (inverse energy units).
    pub t: f64,
    pub total_t: f64,
    /// `ΔE_TS³ ≤ W`, equivalently `W t³ ≤ 1`.
    pub valid: bool,
}

impl CostBreakdown {
    /// Trotter steps as reported: ceiled and at least one.
    pub fn reported_steps(&self) -> u64 {
        self.n_pe.ceil().max(1.0) as u64
    }

    pub fn reported_t_per_rotation(&self) -> u64 {
        self.n_ht.ceil().max(0.0) as u64
    }
}

/// Evaluates the cost model at a fixed budget.
pub fn t_count(budget: &ErrorBudget, w: f64, n_r: f64, n_d: f64) -> Result<CostBreakdown, OptimizerError> {
    t_count_with(budget, w, n_r, n_d, PhaseEstimationScheme::SingleAncilla)
}

pub fn t_count_with(
    budget: &ErrorBudget,
    w: f64,
    n_r: f64,
    n_d: f64,
    scheme: PhaseEstimationScheme,
) -> Result<CostBreakdown, OptimizerError> {
    let ts = positive("trotter", budget.trotter)?;
    let pe = positive("phase_estimation", budget.phase_estimation)?;
    let ht = positive("synthesis", budget.synthesis)?;
    if !(w > 0.0 && w.is_finite()) {
        return Err(OptimizerError::BadNorm(w));
    }
    let sw = w.sqrt();
    let t = (ts / w).sqrt();
    let n_pe = scheme.prefactor() * sw / (pe * ts.sqrt());
    let n_ht = 1.15 * (n_r * sw / (ht * ts.sqrt())).log2() + 9.2;
    Ok(CostBreakdown { n_pe, n_ht, t, total_t: (n_r * n_ht + n_d) * n_pe, valid: ts.powi(3) <= w })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub budget: ErrorBudget,
    pub cost: CostBreakdown,
    /// Whether `ΔE_TS > ΔE_PE > ΔE_HT` holds at the optimum. Reported only; the
    /// cost model alone favours `ΔE_PE ≈ 2 ΔE_TS`.
    pub typical_ordering: bool,
}

/// Fractions `(x, y)` of ΔE for (TS, PE); HT gets the remainder.
fn split(delta_e: f64, lx: f64, ly: f64) -> Option<ErrorBudget> {
    let (x, y) = (lx.exp(), ly.exp());
    let rest = 1.0 - x - y;
    if rest <= 0.0 {
        return None;
    }
    Some(ErrorBudget { trotter: x * delta_e, phase_estimation: y * delta_e, synthesis: rest * delta_e })
}

/// Log-fraction of the smallest budget share considered by the grid.
const MIN_LOG_FRACTION: f64 = -20.0;
const GRID_POINTS: usize = 64;

fn golden<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-13 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Largest log-fraction `ly` with `e^{lx} + e^{ly} < 1`.
fn upper(l: f64) -> f64 {
    (1.0 - l.exp()).max(1e-300).ln() - 1e-12
}

/// Minimises the total T count with the budget summing exactly to `delta_e`.
pub fn minimize(delta_e: f64, w: f64, n_r: f64, n_d: f64) -> Result<Optimum, OptimizerError> {
    minimize_with(delta_e, w, n_r, n_d, PhaseEstimationScheme::SingleAncilla)
}

pub fn minimize_with(
    delta_e: f64,
    w: f64,
    n_r: f64,
    n_d: f64,
    scheme: PhaseEstimationScheme,
) -> Result<Optimum, OptimizerError> {
    positive("delta_e", delta_e)?;
    if !(w > 0.0 && w.is_finite()) {
        return Err(OptimizerError::BadNorm(w));
    }
    if !(n_r >= 1.0) {
        return Err(OptimizerError::NoRotations);
    }
    let cost = |lx: f64, ly: f64| -> f64 {
        split(delta_e, lx, ly)
            .and_then(|b| t_count_with(&b, w, n_r, n_d, scheme).ok())
            .map_or(f64::INFINITY, |c| c.total_t)
    };

    let step = -MIN_LOG_FRACTION / (GRID_POINTS - 1) as f64;
    let (mut bx, mut by, mut best) = (-(3f64.ln()), -(3f64.ln()), cost(-(3f64.ln()), -(3f64.ln())));
    for i in 0..GRID_POINTS {
        for j in 0..GRID_POINTS {
            let (lx, ly) = (MIN_LOG_FRACTION + i as f64 * step, MIN_LOG_FRACTION + j as f64 * step);
            let c = cost(lx, ly);
            if c < best {
                (bx, by, best) = (lx, ly, c);
            }
        }
    }

    // Coordinate refinement with golden-section line searches.
    for _ in 0..500 {
        let prev = best;
        let nx = golden(|lx| cost(lx, by), MIN_LOG_FRACTION.min(bx - 1.0), upper(by));
        if cost(nx, by) < best {
            bx = nx;
            best = cost(bx, by);
        }
        let ny = golden(|ly| cost(bx, ly), MIN_LOG_FRACTION.min(by - 1.0), upper(bx));
        if cost(bx, ny) < best {
            by = ny;
            best = cost(bx, by);
        }
        if (prev - best).abs() <= 1e-6 * best {
            break;
        }
    }

    let budget = split(delta_e, bx, by).expect("refined point is feasible");
    let cost = t_count_with(&budget, w, n_r, n_d, scheme)?;
    let typical_ordering = budget.trotter > budget.phase_estimation && budget.phase_estimation > budget.synthesis;
    Ok(Optimum { budget, cost, typical_ordering })
}

/// Which coefficients the jellium energy proxy uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum JelliumProxyForm {
    /// Kinetic `(3/10)(9π/4)^{2/3}/r_s²` and exchange `−(3/4π)(9π/4)^{1/3}/r_s`
    /// in Hartree, plus the correlation fit.
    #[default]
    Hartree,
    /// Kinetic `(3/5)(9π/4)^{2/3}/r_s²` and exchange `−(3/2)(9π/4)^{1/3}/r_s`.
    /// Larger in magnitude by roughly 5x at `r_s = 10`.
    AsPrinted,
}

/// Correlation energy per electron (Hartree), `a ln(1 + b/r_s + b/r_s²)`.
pub fn jellium_correlation(rs: f64) -> f64 {
    let a = (2f64.ln() - 1.0) / (2.0 * PI * PI);
    let b = 20.4562557;
    a * (1.0 + b / rs + b / (rs * rs)).ln()
}

/// Jellium ground-state energy proxy (Hartree) for `electrons` electrons.
pub fn jellium_energy_proxy(rs: f64, electrons: usize) -> f64 {
    jellium_energy_proxy_with(rs, electrons, JelliumProxyForm::Hartree)
}

pub fn jellium_energy_proxy_with(rs: f64, electrons: usize, form: JelliumProxyForm) -> f64 {
    let c = 9.0 * PI / 4.0;
    let (kinetic, exchange) = match form {
        JelliumProxyForm::Hartree => (0.3, 0.75 / PI),
        JelliumProxyForm::AsPrinted => (0.6, 1.5),
    };
    let per_electron = kinetic * c.powf(2.0 / 3.0) / (rs * rs) - exchange * c.powf(1.0 / 3.0) / rs + jellium_correlation(rs);
    electrons as f64 * per_electron
}

/// Magnitude bound of the Hubbard ground-state energy (units of τ).
pub fn hubbard_energy_proxy(u_over_tau: f64, sites: usize) -> Result<f64, OptimizerError> {
    let per_site = if u_over_tau == 4.0 {
        1.02
    } else if u_over_tau == 8.0 {
        0.74
    } else {
        return Err(OptimizerError::UnsupportedRatio(u_over_tau));
    };
    Ok(per_site * sites as f64)
}

/// Default relative precision, a fraction of |Ẽ₀|.
pub const RELATIVE_FRACTION: f64 = 0.005;
/// Chemical accuracy in Hartree.
pub const CHEMICAL_ACCURACY: f64 = 0.0016;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PrecisionMode {
    #[default]
    Relative,
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrecisionTarget {
    pub mode: PrecisionMode,
    pub fraction: f64,
    /// Absolute ΔE; the system default applies when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub absolute: Option<f64>,
    /// Overrides the computed energy proxy Ẽ₀.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_proxy: Option<f64>,
    pub jellium_form: JelliumProxyForm,
    pub phase_estimation: PhaseEstimationScheme,
}

impl Default for PrecisionTarget {
    fn default() -> Self {
        PrecisionTarget {
            mode: PrecisionMode::Relative,
            fraction: RELATIVE_FRACTION,
            absolute: None,
            energy_proxy: None,
            jellium_form: JelliumProxyForm::Hartree,
            phase_estimation: PhaseEstimationScheme::SingleAncilla,
        }
    }
}

impl PrecisionTarget {
    /// ΔE given the system's computed proxy and default absolute target.
    pub fn delta_e(&self, computed_proxy: Option<f64>, default_absolute: f64) -> Result<f64, OptimizerError> {
        let value = match self.mode {
            PrecisionMode::Relative => {
                let proxy = self.energy_proxy.or(computed_proxy).ok_or(OptimizerError::MissingProxy)?;
                positive("fraction", self.fraction)? * proxy.abs()
            }
            PrecisionMode::Absolute => self.absolute.unwrap_or(default_absolute),
        };
        positive("delta_e", value)
    }
}
