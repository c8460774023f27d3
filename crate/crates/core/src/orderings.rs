//! Trotter orderings: the fragment sequence `H_1 … H_L` of one forward half-step.
//!
//! The symmetric second-order step (forward then reversed) is implicit.

use serde::{Deserialize, Serialize};

use crate::hamiltonians::{jw_hopping, jw_kinetic, jw_number, jw_number_pair, jw_potential, FermionHamiltonian, GridSpec};
use crate::pauli::QubitOperator;
use crate::trotter_error::{trotter_error_norm, NormOptions, TrotterError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderingLabel {
    Fswap,
    SplitTv,
    SplitVt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitOrder {
    /// Kinetic fragment first.
    Tv,
    /// Potential fragment first.
    Vt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    /// One fragment per fermionic simulation gate.
    #[default]
    PerGate,
    /// One fragment per swap-network layer.
    PerLayer,
}

/// One fermionic simulation gate of the swap network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwapGate {
    pub layer: usize,
    /// Adjacent network positions `(i, i + 1)` acted on.
    pub position: usize,
    /// Modes occupying the two positions before the swap.
    pub modes: (usize, usize),
    pub hopping: f64,
    /// Coefficient of `n_p n_q` after folding both orderings of the pair.
    pub interaction: f64,
}

impl SwapGate {
    pub fn is_trivial(&self) -> bool {
        self.hopping == 0.0 && self.interaction == 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrotterOrdering {
    pub fragments: Vec<QubitOperator>,
    pub label: OrderingLabel,
    pub grid: GridSpec,
    pub num_qubits: usize,
    /// Swap-network schedule; empty for split-operator orderings.
    pub gates: Vec<SwapGate>,
    /// Number of swap layers; zero for split-operator orderings.
    pub layers: usize,
}

impl TrotterOrdering {
    /// Sum of all fragments.
    pub fn total(&self) -> QubitOperator {
        let mut sum = QubitOperator::zero();
        for f in &self.fragments {
            sum.add_assign(f);
        }
        sum
    }

    /// Multiplies every fragment by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        let factor = num_complex::Complex64::new(s, 0.0);
        out.fragments = self.fragments.iter().map(|f| f.scaled(factor)).collect();
        out
    }

    /// Ordering built directly from fragments, for tests and custom product formulas.
    pub fn from_fragments(fragments: Vec<QubitOperator>, grid: GridSpec) -> Self {
        let num_qubits = fragments.iter().map(QubitOperator::num_qubits).max().unwrap_or(0);
        TrotterOrdering { fragments, label: OrderingLabel::Fswap, grid, num_qubits, gates: Vec::new(), layers: 0 }
    }
}

/// Mode arrangement the swap network starts from.
///
/// Spinful plane-wave grids start spin-blocked so that the last layers bring
/// same-spin partners together; every other system starts in mode order.
pub fn initial_arrangement(h: &FermionHamiltonian) -> Vec<usize> {
    let grid = &h.grid;
    if grid.spinful && !h.is_hubbard() {
        (0..grid.spin_count())
            .flat_map(|spin| (0..grid.spatial_orbitals()).map(move |site| grid.mode(site, spin)))
            .collect()
    } else {
        (0..h.num_modes()).collect()
    }
}

/// Odd-even transposition sort over `n` positions.
///
/// Returns every gate in network order together with the final mode arrangement.
pub fn swap_network(h: &FermionHamiltonian) -> (Vec<SwapGate>, Vec<usize>) {
    let n = h.num_modes();
    let mut order = initial_arrangement(h);
    let mut gates = Vec::with_capacity(n * n / 2);
    let on_site_separate = h.is_hubbard();
    for layer in 0..n {
        let mut i = layer % 2;
        while i + 1 < n {
            let (p, q) = (order[i], order[i + 1]);
            let interaction = if on_site_separate { 0.0 } else { h.interaction[(p, q)] + h.interaction[(q, p)] };
            gates.push(SwapGate { layer, position: i, modes: (p, q), hopping: h.kinetic[(p, q)], interaction });
            order.swap(i, i + 1);
            i += 2;
        }
    }
    (gates, order)
}

fn gate_fragment(g: &SwapGate) -> QubitOperator {
    let (p, q) = g.modes;
    let mut f = QubitOperator::zero();
    if g.hopping != 0.0 {
        f.add_assign(&jw_hopping(p, q, g.hopping));
    }
    if g.interaction != 0.0 {
        f.add_assign(&jw_number_pair(p, q, g.interaction));
    }
    f.without_identity()
}

/// Fermionic swap-network ordering.
///
/// Fragments are written in the fixed Jordan-Wigner frame of the input ordering, so
/// they sum to the Hamiltonian. Hubbard models get one leading fragment with every
/// on-site interaction; non-uniform one-body diagonal terms form a trailing fragment.
pub fn fswap_ordering(h: &FermionHamiltonian, granularity: Granularity) -> TrotterOrdering {
    let n = h.num_modes();
    let (gates, _) = swap_network(h);
    let mut fragments = Vec::new();
    if h.is_hubbard() {
        let mut onsite = QubitOperator::zero();
        for p in 0..n {
            for q in p + 1..n {
                let c = h.interaction[(p, q)] + h.interaction[(q, p)];
                if c != 0.0 {
                    onsite.add_assign(&jw_number_pair(p, q, c));
                }
            }
        }
        let onsite = onsite.without_identity();
        if !onsite.is_empty() {
            fragments.push(onsite);
        }
    }
    match granularity {
        Granularity::PerGate => {
            fragments.extend(gates.iter().filter(|g| !g.is_trivial()).map(gate_fragment));
        }
        Granularity::PerLayer => {
            for layer in 0..n {
                let mut f = QubitOperator::zero();
                for g in gates.iter().filter(|g| g.layer == layer && !g.is_trivial()) {
                    f.add_assign(&gate_fragment(g));
                }
                if !f.is_empty() {
                    fragments.push(f);
                }
            }
        }
    }
    let mut diagonal = QubitOperator::zero();
    for p in 0..n {
        let c = h.kinetic[(p, p)] + h.external[p];
        if c != 0.0 {
            diagonal.add_assign(&jw_number(p, c));
        }
    }
    let diagonal = diagonal.without_identity();
    if !diagonal.is_empty() {
        fragments.push(diagonal);
    }
    TrotterOrdering { fragments, label: OrderingLabel::Fswap, grid: h.grid.clone(), num_qubits: n, gates, layers: n }
}

/// Two-fragment split-operator ordering.
pub fn split_operator_ordering(h: &FermionHamiltonian, order: SplitOrder) -> TrotterOrdering {
    let t = jw_kinetic(h).without_identity();
    let v = jw_potential(h).without_identity();
    let (fragments, label) = match order {
        SplitOrder::Tv => (vec![t, v], OrderingLabel::SplitTv),
        SplitOrder::Vt => (vec![v, t], OrderingLabel::SplitVt),
    };
    TrotterOrdering { fragments, label, grid: h.grid.clone(), num_qubits: h.num_modes(), gates: Vec::new(), layers: 0 }
}

/// The split order with the smaller Trotter error norm; ties go to `Tv`.
pub fn recommend_split_order(h: &FermionHamiltonian, options: &NormOptions) -> Result<(SplitOrder, f64, f64), TrotterError> {
    let w_tv = trotter_error_norm(&split_operator_ordering(h, SplitOrder::Tv), options)?.w;
    let w_vt = trotter_error_norm(&split_operator_ordering(h, SplitOrder::Vt), options)?.w;
    let order = if w_vt < w_tv { SplitOrder::Vt } else { SplitOrder::Tv };
    Ok((order, w_tv, w_vt))
}
