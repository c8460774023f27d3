//! Per-step gate counts with Hamming weight phasing (HWP) and catalysis.
//!
//! HWP adders are temporary-AND Toffolis; they are reported as Toffoli gates, and
//! closed forms that quote T gates use 4 T per adder.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hamiltonians::{jw_potential, FermionHamiltonian};
use crate::orderings::swap_network;
use crate::pauli::Axis;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GateCountError {
    #[error("FFFT needs side lengths in {{4, 8, 16}}, got {0}")]
    FfftSide(usize),
    #[error("FFFT needs a translation-invariant kinetic term")]
    FfftNotTranslationInvariant,
    #[error("potential layering needs a translation-invariant interaction")]
    NotTranslationInvariant,
    #[error("{what} needs n >= {min}, got {got}")]
    TooSmall { what: &'static str, min: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HwpScheme {
    Full,
    Limited,
    SqrtGrouping,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HwpBudget {
    pub ancillae: usize,
    pub scheme: HwpScheme,
}

impl HwpBudget {
    pub fn limited(ancillae: usize) -> Self {
        HwpBudget { ancillae, scheme: HwpScheme::Limited }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisChange {
    Ffft,
    Givens,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GateCounts {
    pub rotations: u64,
    pub direct_t: u64,
    pub direct_toffoli: u64,
    pub hwp_ancillae: u64,
    pub catalysis_seeds: u64,
    pub logical_system_qubits: u64,
}

/// T cost of one Toffoli in the effective direct count.
pub const TOFFOLI_T_COST: u64 = 2;

impl GateCounts {
    /// `N_d`: direct T gates with each Toffoli priced at [`TOFFOLI_T_COST`].
    pub fn effective_direct_t(&self) -> u64 {
        self.direct_t + TOFFOLI_T_COST * self.direct_toffoli
    }

    fn add(&mut self, g: GroupCost, times: u64) {
        self.rotations += g.rotations * times;
        self.direct_toffoli += g.toffoli * times;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FullHwp {
    pub rotations: u64,
    pub toffoli: u64,
    pub ancillae: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LimitedHwp {
    pub rotations: u64,
    pub t_gates: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SqrtGroupingHwp {
    pub rotations: u64,
    pub t_gates: u64,
    pub ancillae: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalysisCost {
    pub t_gates: u64,
    pub toffoli: u64,
    pub seeds: u64,
}

impl CatalysisCost {
    /// With each Toffoli at 4 T.
    pub fn t_equivalents(&self) -> u64 {
        self.t_gates + 4 * self.toffoli
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BasisChangeCost {
    pub t_gates: u64,
    pub toffoli: u64,
    pub rotations: u64,
    pub seeds: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayeringCost {
    pub t_gates: u64,
    pub rotations: u64,
    pub layers: u64,
}

/// `⌊log₂ n⌋` for `n ≥ 1`.
fn log2_floor(n: u64) -> u64 {
    (63 - n.leading_zeros()) as u64
}

fn choose2(m: u64) -> u64 {
    m * m.saturating_sub(1) / 2
}

pub fn hwp_full(n: u64) -> FullHwp {
    let n = n.max(1);
    FullHwp { rotations: log2_floor(n) + 1, toffoli: n - 1, ancillae: n - 1 }
}

/// HWP with at most `r` ancillae.
///
/// The rotations are split into `g ≥ ⌈n/(r+1)⌉` balanced groups, each phased with its
/// own adder tree; `g` is chosen to minimise rotations, then T gates. Using fewer
/// ancillae than allowed is sometimes cheaper (ten rotations cost 7 in groups of
/// 3, 3, 3, 1 but 8 in groups of 4, 3, 3), so the count never grows with `r` and
/// never exceeds `n`. Fifty rotations on 30 ancillae use two groups of 25.
pub fn hwp_limited(n: u64, r: u64) -> LimitedHwp {
    let n = n.max(1);
    if r + 1 >= n {
        let full = hwp_full(n);
        return LimitedHwp { rotations: full.rotations, t_gates: 4 * full.toffoli };
    }
    (n.div_ceil(r + 1)..=n)
        .map(|g| {
            let (small, extra) = (n / g, n % g);
            let rotations = extra * (log2_floor(small + 1) + 1) + (g - extra) * (log2_floor(small) + 1);
            LimitedHwp { rotations, t_gates: 4 * (n - g) }
        })
        .min_by_key(|c| (c.rotations, c.t_gates))
        .expect("non-empty range")
}

pub fn hwp_sqrt_grouping(n: u64) -> Result<SqrtGroupingHwp, GateCountError> {
    if n < 2 {
        return Err(GateCountError::TooSmall { what: "square-root grouping", min: 2, got: n as usize });
    }
    let s = n.isqrt();
    let g = n.div_ceil(s);
    let lg = log2_floor(n);
    // 8(g - 1/2)(s - 1) is integral because the half multiplies 8.
    let t_gates = 8 * g * (s - 1) - 4 * (s - 1) + 8 * lg * g;
    let nf = n as f64;
    let loose = 8.0 * nf + 8.0 * nf.sqrt() * nf.log2() + 12.0 * nf.log2() - 8.0;
    assert!(t_gates as f64 <= loose, "square-root grouping exceeds its loose bound at n = {n}");
    Ok(SqrtGroupingHwp { rotations: lg + 1, t_gates, ancillae: s + lg })
}

pub fn catalysis_costs(pairs: u64) -> CatalysisCost {
    CatalysisCost { t_gates: pairs, toffoli: pairs, seeds: if pairs > 0 { 2 } else { 0 } }
}

/// T gates and catalysed √T-class pairs of one 1D FFFT.
pub fn ffft_1d(side: usize) -> Result<(u64, u64), GateCountError> {
    match side {
        4 => Ok((8, 0)),
        8 => Ok((26, 0)),
        16 => Ok((70, 2)),
        s => Err(GateCountError::FfftSide(s)),
    }
}

/// One multidimensional FFFT basis change on a cubic grid.
pub fn ffft_costs(side: usize, d: u32, spinful: bool) -> Result<BasisChangeCost, GateCountError> {
    ffft_grid(&vec![side; d as usize], spinful)
}

fn ffft_grid(lengths: &[usize], spinful: bool) -> Result<BasisChangeCost, GateCountError> {
    let total: usize = lengths.iter().product();
    let spins = if spinful { 2 } else { 1 };
    let (mut t, mut pairs) = (0u64, 0u64);
    for &side in lengths {
        let (t1, p1) = ffft_1d(side)?;
        let applications = (total / side * spins) as u64;
        t += t1 * applications;
        pairs += p1 * applications;
    }
    let cat = catalysis_costs(pairs);
    Ok(BasisChangeCost { t_gates: t + cat.t_gates, toffoli: cat.toffoli, rotations: 0, seeds: cat.seeds })
}

/// Closed-form Givens-network cost with unrestricted HWP.
pub fn givens_costs(m: u64, d: u32, spinful: bool) -> Result<BasisChangeCost, GateCountError> {
    if m < 2 {
        return Err(GateCountError::TooSmall { what: "Givens network", min: 2, got: m as usize });
    }
    let d64 = d as u64;
    let lg = log2_floor(m.pow(d - 1));
    let per = d64 * choose2(m);
    let mpow = m.pow(d - 1);
    let (rotations, toffoli) = if spinful {
        (per * (lg + 3), per * (4 * mpow + 2 * lg + 2))
    } else {
        (per * (lg + 2), per * (2 * mpow + 2 * lg))
    };
    Ok(BasisChangeCost { t_gates: 0, toffoli, rotations, seeds: 0 })
}

/// Closed-form layered cost of a translation-invariant `Σ V_pq n_p n_q` with full HWP.
pub fn potential_layering_costs(n: u64) -> Result<LayeringCost, GateCountError> {
    if n < 2 {
        return Err(GateCountError::TooSmall { what: "potential layering", min: 2, got: n as usize });
    }
    Ok(if n % 2 == 0 {
        LayeringCost { t_gates: 4 * (n - 1) * (n - 2), rotations: (2 * n - 2) * log2_floor(n), layers: 2 * n - 2 }
    } else {
        // 2N − 2 layers of (N − 1)/2 pairs plus N − 1 layers holding the leftover pair.
        LayeringCost {
            t_gates: 4 * (n - 1) * (n - 1),
            rotations: (n - 1) * (2 * log2_floor(n - 1) + 1),
            layers: 3 * (n - 1),
        }
    })
}

/// [`potential_layering_costs`] after checking that the interaction allows it.
pub fn potential_layering_costs_for(h: &FermionHamiltonian) -> Result<LayeringCost, GateCountError> {
    if !h.interaction_is_translation_invariant(1e-12 * max_abs(&h.interaction).max(1.0)) {
        return Err(GateCountError::NotTranslationInvariant);
    }
    potential_layering_costs(h.num_modes() as u64)
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, &b| a.max(b.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
struct GroupCost {
    rotations: u64,
    toffoli: u64,
}

/// Cost of `n` parallel equal-angle rotations under the budget.
fn group_cost(n: u64, budget: &HwpBudget) -> GroupCost {
    if n == 0 {
        return GroupCost::default();
    }
    match budget.scheme {
        HwpScheme::Full => {
            let f = hwp_full(n);
            GroupCost { rotations: f.rotations, toffoli: f.toffoli }
        }
        HwpScheme::Limited => {
            let l = hwp_limited(n, budget.ancillae as u64);
            GroupCost { rotations: l.rotations, toffoli: l.t_gates / 4 }
        }
        HwpScheme::SqrtGrouping if n >= 2 => {
            let s = hwp_sqrt_grouping(n).expect("n >= 2");
            GroupCost { rotations: s.rotations, toffoli: s.t_gates / 4 }
        }
        HwpScheme::SqrtGrouping => GroupCost { rotations: 1, toffoli: 0 },
    }
}

/// Clusters nearly equal angles; zero angles are dropped. Returns group sizes in angle order.
///
/// Angles agreeing to about 12 significant digits (relative to the largest angle in
/// the set) are treated as equal.
pub fn equiangular_groups(angles: &[f64]) -> Vec<u64> {
    let scale = angles.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    if scale == 0.0 {
        return Vec::new();
    }
    let tol = 1e-12 * scale;
    let mut sorted: Vec<f64> = angles.iter().copied().filter(|a| a.abs() > tol).collect();
    sorted.sort_by(f64::total_cmp);
    let mut groups = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] - sorted[j - 1] <= tol {
            j += 1;
        }
        groups.push((j - i) as u64);
        i = j;
    }
    groups
}

fn grouped_cost(angles: &[f64], budget: &HwpBudget) -> GroupCost {
    equiangular_groups(angles).into_iter().fold(GroupCost::default(), |acc, n| {
        let g = group_cost(n, budget);
        GroupCost { rotations: acc.rotations + g.rotations, toffoli: acc.toffoli + g.toffoli }
    })
}

fn ancillae_used(budget: &HwpBudget, largest_group: u64) -> u64 {
    let needed = largest_group.saturating_sub(1);
    match budget.scheme {
        HwpScheme::Full => needed,
        HwpScheme::Limited => needed.min(budget.ancillae as u64),
        HwpScheme::SqrtGrouping if largest_group >= 2 => hwp_sqrt_grouping(largest_group).map_or(0, |s| s.ancillae),
        HwpScheme::SqrtGrouping => 0,
    }
}

/// Swap-network step: forward layers, the mirrored reverse, and merged end layers.
pub fn fswap_step_costs(h: &FermionHamiltonian, budget: &HwpBudget) -> GateCounts {
    let n = h.num_modes();
    let (gates, _) = swap_network(h);
    let mut counts = GateCounts { logical_system_qubits: n as u64, ..GateCounts::default() };
    let mut largest = 0u64;
    let mut track = |angles: &[f64]| {
        largest = largest.max(equiangular_groups(angles).into_iter().max().unwrap_or(0));
    };

    if h.is_hubbard() {
        // All on-site terms in one leading layer; the trailing copy merges into the next step.
        let onsite: Vec<f64> = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .filter(|&(p, q)| h.interaction[(p, q)] != 0.0)
            .flat_map(|(p, q)| [h.interaction[(p, q)]; 2])
            .collect();
        track(&onsite);
        counts.add(grouped_cost(&onsite, budget), 1);

        // Deferred accumulation: flush once a position would be acted on twice.
        let mut batches: Vec<Vec<f64>> = Vec::new();
        let mut pending: Vec<f64> = Vec::new();
        let mut touched = vec![false; n];
        for g in gates.iter().filter(|g| g.hopping != 0.0) {
            let (i, j) = (g.position, g.position + 1);
            if touched[i] || touched[j] {
                batches.push(std::mem::take(&mut pending));
                touched.iter_mut().for_each(|t| *t = false);
            }
            touched[i] = true;
            touched[j] = true;
            pending.extend([g.hopping; 2]);
        }
        if !pending.is_empty() {
            batches.push(pending);
        }
        let last = batches.len().saturating_sub(1);
        for (k, batch) in batches.iter().enumerate() {
            track(batch);
            counts.add(grouped_cost(batch, budget), if k == last { 1 } else { 2 });
        }
    } else {
        let layers = n;
        for layer in 0..layers {
            let angles: Vec<f64> = gates
                .iter()
                .filter(|g| g.layer == layer)
                .flat_map(|g| {
                    let hop = if g.hopping != 0.0 { vec![g.hopping; 2] } else { vec![] };
                    let int = if g.interaction != 0.0 { vec![g.interaction; 2] } else { vec![] };
                    hop.into_iter().chain(int)
                })
                .collect();
            track(&angles);
            let times = if layer == 0 || layer + 1 == layers { 1 } else { 2 };
            counts.add(grouped_cost(&angles, budget), times);
        }
        // A uniform one-body diagonal is a multiple of the number operator and costs nothing.
        let diagonal: Vec<f64> = (0..n).map(|p| h.kinetic[(p, p)] + h.external[p]).collect();
        let first = diagonal[0];
        let scale = diagonal.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if diagonal.iter().any(|d| (d - first).abs() > 1e-12 * scale) {
            track(&diagonal);
            counts.add(grouped_cost(&diagonal, budget), 1);
        }
    }
    counts.hwp_ancillae = ancillae_used(budget, largest);
    counts
}

/// Single-particle kinetic energies, one per mode.
fn kinetic_energies(h: &FermionHamiltonian) -> Vec<f64> {
    h.kinetic.clone().symmetric_eigenvalues().iter().copied().collect()
}

/// Splits disjoint-support rotations into layers greedily, in input order.
fn matchings(pairs: &[(usize, usize)], n: usize) -> Vec<u64> {
    let mut layers: Vec<Vec<bool>> = Vec::new();
    let mut sizes: Vec<u64> = Vec::new();
    for &(p, q) in pairs {
        match layers.iter().position(|busy| !busy[p] && !busy[q]) {
            Some(k) => {
                layers[k][p] = true;
                layers[k][q] = true;
                sizes[k] += 1;
            }
            None => {
                let mut busy = vec![false; n];
                busy[p] = true;
                busy[q] = true;
                layers.push(busy);
                sizes.push(1);
            }
        }
    }
    sizes
}

/// Potential block `Σ U_p n_p + Σ V_pq n_p n_q`: ZZ rotations grouped by angle and
/// scheduled as disjoint layers, then single-qubit Z rotations.
fn potential_cost(h: &FermionHamiltonian, budget: &HwpBudget) -> (GroupCost, u64) {
    let n = h.num_modes();
    let v = jw_potential(h).without_identity();
    let mut zz: Vec<(f64, (usize, usize))> = Vec::new();
    let mut z: Vec<f64> = Vec::new();
    for (p, c) in v.terms() {
        let f: Vec<(usize, Axis)> = p.factors().collect();
        match f.as_slice() {
            [(a, Axis::Z), (b, Axis::Z)] => zz.push((c.re, (*a, *b))),
            [(_, Axis::Z)] => z.push(c.re),
            _ => unreachable!("potential contains only Z and ZZ terms"),
        }
    }
    let mut total = GroupCost::default();
    let mut largest = 0;
    // Cluster ZZ angles the same way as everything else, then lay out each cluster.
    let scale = zz.iter().fold(0.0f64, |a, b| a.max(b.0.abs()));
    let tol = 1e-12 * scale;
    zz.retain(|(c, _)| c.abs() > tol);
    zz.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut i = 0;
    while i < zz.len() {
        let mut j = i + 1;
        while j < zz.len() && zz[j].0 - zz[j - 1].0 <= tol {
            j += 1;
        }
        let mut pairs: Vec<(usize, usize)> = zz[i..j].iter().map(|e| e.1).collect();
        pairs.sort();
        for size in matchings(&pairs, n) {
            largest = largest.max(size);
            let g = group_cost(size, budget);
            total.rotations += g.rotations;
            total.toffoli += g.toffoli;
        }
        i = j;
    }
    largest = largest.max(equiangular_groups(&z).into_iter().max().unwrap_or(0));
    let zc = grouped_cost(&z, budget);
    total.rotations += zc.rotations;
    total.toffoli += zc.toffoli;
    (total, largest)
}

/// Rotations and Toffolis of the potential block alone.
pub fn potential_step_costs(h: &FermionHamiltonian, budget: &HwpBudget) -> GateCounts {
    let (pot, largest) = potential_cost(h, budget);
    let mut counts = GateCounts { logical_system_qubits: h.num_modes() as u64, ..GateCounts::default() };
    counts.add(pot, 1);
    counts.hwp_ancillae = ancillae_used(budget, largest);
    counts
}

/// Givens network with each rotation's parallel copies phased together under the budget.
fn givens_under_budget(h: &FermionHamiltonian, budget: &HwpBudget) -> (BasisChangeCost, u64) {
    let grid = &h.grid;
    let total = grid.spatial_orbitals();
    let mut cost = BasisChangeCost::default();
    let mut largest = 0;
    for &m in &grid.lengths {
        let copies = (total / m * grid.spin_count()) as u64;
        let g = group_cost(2 * copies, budget);
        let count = choose2(m as u64);
        largest = largest.max(2 * copies);
        cost.rotations += g.rotations * count;
        cost.toffoli += g.toffoli * count;
    }
    (cost, largest)
}

/// Split-operator step: kinetic rotations twice, potential once, basis change twice.
pub fn split_step_costs(h: &FermionHamiltonian, budget: &HwpBudget, basis: BasisChange) -> Result<GateCounts, GateCountError> {
    let n = h.num_modes();
    let mut counts = GateCounts { logical_system_qubits: n as u64, ..GateCounts::default() };
    let mut largest;

    let energies = kinetic_energies(h);
    largest = equiangular_groups(&energies).into_iter().max().unwrap_or(0);
    counts.add(grouped_cost(&energies, budget), 2);

    let (pot, pot_largest) = potential_cost(h, budget);
    largest = largest.max(pot_largest);
    counts.add(pot, 1);

    let change = match basis {
        BasisChange::Ffft => {
            if !h.kinetic_is_translation_invariant(1e-12 * max_abs(&h.kinetic).max(1e-300)) {
                return Err(GateCountError::FfftNotTranslationInvariant);
            }
            ffft_grid(&h.grid.lengths, h.grid.spinful)?
        }
        BasisChange::Givens => {
            let (c, l) = givens_under_budget(h, budget);
            largest = largest.max(l);
            c
        }
    };
    counts.rotations += 2 * change.rotations;
    counts.direct_t += 2 * change.t_gates;
    counts.direct_toffoli += 2 * change.toffoli;
    counts.catalysis_seeds = change.seeds;
    counts.hwp_ancillae = ancillae_used(budget, largest);
    Ok(counts)
}

/// Direct and Hamming-weight phases over all `2^n` computational basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTable {
    pub direct: Vec<f64>,
    pub hamming: Vec<f64>,
}

impl PhaseTable {
    pub fn max_residual(&self) -> f64 {
        self.direct.iter().zip(&self.hamming).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Phases of `n` parallel `exp(-iθZ/2)`-type rotations, applied directly and via the Hamming weight.
///
/// Bit value 1 contributes `+θ/2` and 0 contributes `−θ/2`; on the Hamming weight
/// register bit `k` contributes `±2^k θ/2`, with the constant `−nθ/2` restored.
pub fn hwp_phase_table(n: u32, theta: f64) -> Result<PhaseTable, GateCountError> {
    if n > 16 {
        return Err(GateCountError::TooSmall { what: "phase table (n <= 16)", min: 0, got: n as usize });
    }
    let dim = 1usize << n;
    let mut direct = Vec::with_capacity(dim);
    let mut hamming = Vec::with_capacity(dim);
    let bits = log2_floor(n.max(1) as u64) as u32 + 1;
    for s in 0..dim {
        let d: f64 = (0..n).map(|q| if s >> q & 1 == 1 { theta / 2.0 } else { -theta / 2.0 }).sum();
        direct.push(d);
        let w = s.count_ones() as usize;
        // Σ_k ±2^k θ/2 over the weight register reproduces (2w − (2^bits − 1)) θ/2.
        let register: f64 = (0..bits)
            .map(|k| {
                let scale = (1u64 << k) as f64 * theta / 2.0;
                if w >> k & 1 == 1 {
                    scale
                } else {
                    -scale
                }
            })
            .sum();
        let offset = ((1u64 << bits) - 1) as f64 * theta / 2.0 - n as f64 * theta / 2.0;
        hamming.push(register + offset);
    }
    Ok(PhaseTable { direct, hamming })
}
