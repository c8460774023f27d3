//! Physical-qubit and wall-time estimates for a surface-code layout with one
//! serial magic-state factory.
//!
//! The factory models are parametric. Each level costs a footprint in logical
//! tiles (`2d²` physical qubits each) and a number of code cycles per output
//! state proportional to its distance. Its output error is the distillation
//! suppression of the input error plus the topological failure of its tiles
//! over those cycles.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurfaceCodeError {
    #[error("physical error rate {p} must lie in (0, {threshold})")]
    AboveThreshold { p: f64, threshold: f64 },
    #[error("distance range {min}..={max} must contain odd distances ≥ 3")]
    BadDistanceRange { min: u32, max: u32 },
    #[error("workload needs at least one logical qubit and one magic state")]
    EmptyWorkload,
    #[error("no configuration keeps the total failure probability below {budget}")]
    BudgetUnreachable { budget: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactoryScheme {
    /// One round of 15-to-1 T distillation.
    OneRound15To1,
    /// 15-to-1 T states distilled into CCZ states, with catalysed `|CCZ⟩ → 2|T⟩`.
    CczCatalyzed,
    /// Two rounds of 15-to-1 T distillation.
    TwoRound15To1,
}

impl FactoryScheme {
    pub const ALL: [FactoryScheme; 3] = [FactoryScheme::OneRound15To1, FactoryScheme::CczCatalyzed, FactoryScheme::TwoRound15To1];

    /// Table superscript.
    pub fn letter(self) -> char {
        match self {
            FactoryScheme::OneRound15To1 => 'a',
            FactoryScheme::CczCatalyzed => 'b',
            FactoryScheme::TwoRound15To1 => 'c',
        }
    }
}

/// Factory constants. The defaults are tuned to reproduce published resource
/// tables within a small factor; they are not derived from factory layouts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FactoryParams {
    /// Tiles of one 15-to-1 factory.
    pub t_factory_tiles: f64,
    /// Level-1 factories feeding a level-2 stage.
    pub level1_factories: f64,
    /// Tiles of the level-2 stage (CCZ or second 15-to-1).
    pub level2_tiles: f64,
    /// Code cycles per level-1 output state, per unit of distance.
    pub level1_cycles_per_distance: f64,
    /// Code cycles per level-2 output state, per unit of distance.
    pub level2_cycles_per_distance: f64,
    /// 15-to-1 output error is `coefficient · ε_in³`.
    pub t_distill_coefficient: f64,
    /// 8T-to-CCZ output error is `coefficient · ε_in²`.
    pub ccz_distill_coefficient: f64,
}

impl Default for FactoryParams {
    fn default() -> Self {
        FactoryParams {
            t_factory_tiles: 11.0,
            level1_factories: 8.0,
            level2_tiles: 40.0,
            level1_cycles_per_distance: 5.5,
            level2_cycles_per_distance: 8.5,
            t_distill_coefficient: 35.0,
            ccz_distill_coefficient: 28.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhysicalAssumptions {
    pub physical_error_rate: f64,
    pub cycle_time_us: f64,
    pub decoder_latency_us: f64,
    /// Adds one decoder latency per consumed state on top of the factory interval.
    pub decoder_stalls: bool,
    pub min_distance: u32,
    pub max_distance: u32,
    pub failure_budget: f64,
    /// `A` in `A (p/p_th)^{⌈d/2⌉}`.
    pub error_prefactor: f64,
    pub threshold: f64,
    /// Tiles per logical qubit in the data block.
    pub routing_overhead: f64,
    /// T states consumed per Toffoli when no CCZ states are available.
    pub toffoli_t_cost: u64,
    pub factory: FactoryParams,
}

impl Default for PhysicalAssumptions {
    fn default() -> Self {
        PhysicalAssumptions {
            physical_error_rate: 1e-3,
            cycle_time_us: 1.0,
            decoder_latency_us: 10.0,
            decoder_stalls: false,
            min_distance: 15,
            max_distance: 51,
            failure_budget: 0.3,
            error_prefactor: 0.1,
            threshold: 1e-2,
            routing_overhead: 1.5,
            toffoli_t_cost: 2,
            factory: FactoryParams::default(),
        }
    }
}

impl PhysicalAssumptions {
    pub fn with_error_rate(p: f64) -> Self {
        PhysicalAssumptions { physical_error_rate: p, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), SurfaceCodeError> {
        let p = self.physical_error_rate;
        if !(p > 0.0 && p < self.threshold) {
            return Err(SurfaceCodeError::AboveThreshold { p, threshold: self.threshold });
        }
        if self.min_distance < 3 || self.max_distance < self.min_distance || self.distances().next().is_none() {
            return Err(SurfaceCodeError::BadDistanceRange { min: self.min_distance, max: self.max_distance });
        }
        Ok(())
    }

    /// Odd distances in range.
    pub fn distances(&self) -> impl Iterator<Item = u32> + Clone {
        let start = self.min_distance | 1;
        (start..=self.max_distance).step_by(2)
    }

    fn rate(&self, d: u32) -> f64 {
        logical_error_rate_with(self.physical_error_rate, d, self.error_prefactor, self.threshold)
    }
}

/// Per-patch, per-cycle logical error rate with the default constants.
pub fn logical_error_rate(p: f64, d: u32) -> f64 {
    logical_error_rate_with(p, d, 0.1, 1e-2)
}

pub fn logical_error_rate_with(p: f64, d: u32, prefactor: f64, threshold: f64) -> f64 {
    prefactor * (p / threshold).powi(d.div_ceil(2) as i32)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResourceEstimate {
    pub scheme: FactoryScheme,
    pub level1_distance: u32,
    /// Equal to the level-1 distance for single-level schemes.
    pub level2_distance: u32,
    pub data_distance: u32,
    pub physical_qubits: u64,
    pub data_qubits: u64,
    pub factory_qubits: u64,
    pub magic_states: u64,
    pub hours: f64,
    pub failure_probability: f64,
}

struct FactoryCandidate {
    scheme: FactoryScheme,
    level1: u32,
    level2: u32,
    qubits: f64,
    states: u64,
    state_error: f64,
    interval_cycles: f64,
}

fn tile_qubits(d: u32) -> f64 {
    2.0 * f64::from(d) * f64::from(d)
}

fn factory_candidates(a: &PhysicalAssumptions, t_gates: u64, toffoli_gates: u64) -> Vec<FactoryCandidate> {
    let f = &a.factory;
    let p = a.physical_error_rate;
    let t_states = t_gates + a.toffoli_t_cost * toffoli_gates;
    let ccz_states = toffoli_gates + t_gates.div_ceil(2);
    // 15-to-1 output error and footprint at distance d.
    let level1 = |d: u32| {
        let cycles = f.level1_cycles_per_distance * f64::from(d);
        let err = f.t_distill_coefficient * p.powi(3) + f.t_factory_tiles * cycles * a.rate(d);
        (err, cycles)
    };
    let mut out = Vec::new();
    for d1 in a.distances() {
        let (eps1, cycles1) = level1(d1);
        out.push(FactoryCandidate {
            scheme: FactoryScheme::OneRound15To1,
            level1: d1,
            level2: d1,
            qubits: f.t_factory_tiles * tile_qubits(d1),
            states: t_states,
            state_error: eps1,
            interval_cycles: cycles1,
        });
        for d2 in a.distances() {
            let cycles2 = f.level2_cycles_per_distance * f64::from(d2);
            let topo2 = f.level2_tiles * cycles2 * a.rate(d2);
            let qubits = f.level1_factories * f.t_factory_tiles * tile_qubits(d1) + f.level2_tiles * tile_qubits(d2);
            out.push(FactoryCandidate {
                scheme: FactoryScheme::CczCatalyzed,
                level1: d1,
                level2: d2,
                qubits,
                states: ccz_states,
                state_error: f.ccz_distill_coefficient * eps1 * eps1 + topo2,
                interval_cycles: cycles2,
            });
            out.push(FactoryCandidate {
                scheme: FactoryScheme::TwoRound15To1,
                level1: d1,
                level2: d2,
                qubits,
                states: t_states,
                state_error: f.t_distill_coefficient * eps1.powi(3) + topo2,
                interval_cycles: cycles2,
            });
        }
    }
    out
}

/// Minimum-physical-qubit layout meeting the failure budget.
///
/// Ties on qubit count go to the shorter run, then to scheme and distance order.
pub fn estimate(
    logical_qubits: u64,
    t_gates: u64,
    toffoli_gates: u64,
    assumptions: &PhysicalAssumptions,
) -> Result<ResourceEstimate, SurfaceCodeError> {
    assumptions.validate()?;
    if logical_qubits == 0 || t_gates + toffoli_gates == 0 {
        return Err(SurfaceCodeError::EmptyWorkload);
    }
    let tiles = (assumptions.routing_overhead * logical_qubits as f64).ceil();
    let mut best: Option<ResourceEstimate> = None;
    for c in factory_candidates(assumptions, t_gates, toffoli_gates) {
        let factory_failure = c.states as f64 * c.state_error;
        if factory_failure > assumptions.failure_budget {
            continue;
        }
        let interval_us = (c.interval_cycles * assumptions.cycle_time_us).max(assumptions.decoder_latency_us)
            + if assumptions.decoder_stalls { assumptions.decoder_latency_us } else { 0.0 };
        let total_cycles = c.states as f64 * interval_us / assumptions.cycle_time_us;
        let Some((data_distance, failure)) = assumptions
            .distances()
            .map(|d| (d, factory_failure + tiles * total_cycles * assumptions.rate(d)))
            .find(|&(_, failure)| failure <= assumptions.failure_budget)
        else {
            continue;
        };
        let data_qubits = (tiles * tile_qubits(data_distance)).round() as u64;
        let factory_qubits = c.qubits.round() as u64;
        let candidate = ResourceEstimate {
            scheme: c.scheme,
            level1_distance: c.level1,
            level2_distance: c.level2,
            data_distance,
            physical_qubits: data_qubits + factory_qubits,
            data_qubits,
            factory_qubits,
            magic_states: c.states,
            hours: c.states as f64 * interval_us / 3.6e9,
            failure_probability: failure,
        };
        let better = match &best {
            None => true,
            Some(b) => (candidate.physical_qubits, candidate.hours) < (b.physical_qubits, b.hours),
        };
        if better {
            best = Some(candidate);
        }
    }
    best.ok_or(SurfaceCodeError::BudgetUnreachable { budget: assumptions.failure_budget })
}
