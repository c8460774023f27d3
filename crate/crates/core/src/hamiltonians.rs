//! Fermionic Hamiltonians on plane-wave dual-basis grids and Hubbard lattices, and
//! their Jordan-Wigner images.
//!
//! Convention throughout:
//!
//! ```text
//! H = Σ_pq T_pq a†_p a_q + Σ_p U_p n_p + Σ_{p≠q} V_pq n_p n_q
//! ```
//!
//! with the interaction summed over ordered pairs, so an unordered pair contributes
//! `2 V_pq n_p n_q`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pauli::{Axis, PauliString, QubitOperator};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HamiltonianError {
    #[error("dimension must be 1, 2 or 3, got {0}")]
    BadDimension(usize),
    #[error("expected {expected} side lengths, got {got}")]
    LengthCount { expected: usize, got: usize },
    #[error("side lengths must be positive")]
    ZeroLength,
    #[error("cell volume must be positive, got {0}")]
    BadVolume(f64),
    #[error("grid needs either a Wigner-Seitz radius or an explicit volume")]
    MissingScale,
    #[error("{electrons} electrons do not fit in {orbitals} spin-orbitals")]
    TooManyElectrons { electrons: usize, orbitals: usize },
    #[error("material needs at least one nucleus")]
    NoNuclei,
    #[error("nucleus charge must be non-negative, got {0}")]
    NegativeCharge(f64),
    #[error("lattice must have at least one site")]
    EmptyLattice,
    #[error("nuclei file line {line}: {reason}")]
    NucleiParse { line: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SpinOrder {
    /// Site `s` occupies modes `2s` (up) and `2s + 1` (down).
    #[default]
    Interleaved,
    /// All spin-up modes first, then all spin-down modes.
    Blocked,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dims: usize,
    pub lengths: Vec<usize>,
    pub spinful: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wigner_seitz_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volume: Option<f64>,
    /// Defaults to half filling, `⌊N/2⌋`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub electrons: Option<usize>,
    #[serde(default)]
    pub spin_order: SpinOrder,
}

impl GridSpec {
    pub fn cubic(dims: usize, side: usize, spinful: bool, rs: f64) -> Self {
        GridSpec {
            dims,
            lengths: vec![side; dims],
            spinful,
            wigner_seitz_radius: Some(rs),
            volume: None,
            electrons: None,
            spin_order: SpinOrder::Interleaved,
        }
    }

    pub fn validate(&self) -> Result<(), HamiltonianError> {
        if !(1..=3).contains(&self.dims) {
            return Err(HamiltonianError::BadDimension(self.dims));
        }
        if self.lengths.len() != self.dims {
            return Err(HamiltonianError::LengthCount { expected: self.dims, got: self.lengths.len() });
        }
        if self.lengths.contains(&0) {
            return Err(HamiltonianError::ZeroLength);
        }
        let (electrons, orbitals) = (self.electron_count(), self.spin_orbitals());
        if electrons > orbitals {
            return Err(HamiltonianError::TooManyElectrons { electrons, orbitals });
        }
        Ok(())
    }

    /// Spatial orbital count `M`.
    pub fn spatial_orbitals(&self) -> usize {
        self.lengths.iter().product()
    }

    /// Spin-orbital (qubit) count `N`.
    pub fn spin_orbitals(&self) -> usize {
        self.spatial_orbitals() * self.spin_count()
    }

    pub fn spin_count(&self) -> usize {
        if self.spinful {
            2
        } else {
            1
        }
    }

    pub fn electron_count(&self) -> usize {
        self.electrons.unwrap_or(self.spin_orbitals() / 2)
    }

    /// Cell volume in Bohr^d, from the explicit override or from `r_s`.
    pub fn cell_volume(&self) -> Result<f64, HamiltonianError> {
        let omega = match (self.volume, self.wigner_seitz_radius) {
            (Some(v), _) => v,
            (None, Some(rs)) => {
                let eta = self.electron_count() as f64;
                match self.dims {
                    1 => eta * 2.0 * rs,
                    2 => eta * PI * rs * rs,
                    3 => eta * 4.0 / 3.0 * PI * rs.powi(3),
                    d => return Err(HamiltonianError::BadDimension(d)),
                }
            }
            (None, None) => return Err(HamiltonianError::MissingScale),
        };
        if omega.is_finite() && omega > 0.0 {
            Ok(omega)
        } else {
            Err(HamiltonianError::BadVolume(omega))
        }
    }

    /// Row-major grid coordinates of spatial site `s` (last dimension fastest).
    pub fn site_coords(&self, mut s: usize) -> Vec<usize> {
        let mut c = vec![0; self.dims];
        for i in (0..self.dims).rev() {
            c[i] = s % self.lengths[i];
            s /= self.lengths[i];
        }
        c
    }

    pub fn site_index(&self, coords: &[usize]) -> usize {
        coords
            .iter()
            .zip(&self.lengths)
            .fold(0, |acc, (&c, &l)| acc * l + c % l)
    }

    /// Mode index of `(site, spin)`; spin is 0 (up) or 1 (down) and ignored when spinless.
    pub fn mode(&self, site: usize, spin: usize) -> usize {
        if !self.spinful {
            return site;
        }
        match self.spin_order {
            SpinOrder::Interleaved => 2 * site + spin,
            SpinOrder::Blocked => spin * self.spatial_orbitals() + site,
        }
    }

    /// Inverse of [`GridSpec::mode`].
    pub fn site_and_spin(&self, mode: usize) -> (usize, usize) {
        if !self.spinful {
            return (mode, 0);
        }
        match self.spin_order {
            SpinOrder::Interleaved => (mode / 2, mode % 2),
            SpinOrder::Blocked => (mode % self.spatial_orbitals(), mode / self.spatial_orbitals()),
        }
    }

    /// Momentum index range per dimension, `[-⌊L/2⌋, ⌈L/2⌉)`.
    pub fn momentum_range(length: usize) -> std::ops::Range<i64> {
        let lo = -((length / 2) as i64);
        lo..lo + length as i64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Nucleus {
    /// Position in Bohr; only the first `dims` components are used.
    pub position: Vec<f64>,
    pub charge: f64,
}

/// Parses one `x y z charge` line per nucleus; blank lines and `#` comments are skipped.
pub fn parse_nuclei(text: &str) -> Result<Vec<Nucleus>, HamiltonianError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let nums = line
            .split_whitespace()
            .map(str::parse::<f64>)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| HamiltonianError::NucleiParse { line: i + 1, reason: e.to_string() })?;
        if nums.len() != 4 {
            return Err(HamiltonianError::NucleiParse {
                line: i + 1,
                reason: format!("expected 4 numbers, found {}", nums.len()),
            });
        }
        out.push(Nucleus { position: nums[..3].to_vec(), charge: nums[3] });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HubbardSpec {
    pub lx: usize,
    pub ly: usize,
    pub tau: f64,
    pub u: f64,
    pub periodic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    Jellium,
    Material { nuclei: Vec<Nucleus> },
    Hubbard(HubbardSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FermionHamiltonian {
    pub kinetic: DMatrix<f64>,
    pub external: DVector<f64>,
    /// Symmetric with zero diagonal; summed over ordered pairs.
    pub interaction: DMatrix<f64>,
    pub grid: GridSpec,
    pub model: Model,
}

impl FermionHamiltonian {
    pub fn num_modes(&self) -> usize {
        self.external.len()
    }

    pub fn is_hubbard(&self) -> bool {
        matches!(self.model, Model::Hubbard(_))
    }

    /// True when `V_{p,q} = V_{p+s,q+s}` for every grid translation `s` (spin labels kept).
    pub fn interaction_is_translation_invariant(&self, tol: f64) -> bool {
        translation_invariant(&self.grid, &self.interaction, tol)
    }

    pub fn kinetic_is_translation_invariant(&self, tol: f64) -> bool {
        translation_invariant(&self.grid, &self.kinetic, tol)
    }
}

fn translation_invariant(grid: &GridSpec, m: &DMatrix<f64>, tol: f64) -> bool {
    let n = m.nrows();
    let sites = grid.spatial_orbitals();
    for p in 0..n {
        let (sp, sigp) = grid.site_and_spin(p);
        let cp = grid.site_coords(sp);
        for q in 0..n {
            let (sq, sigq) = grid.site_and_spin(q);
            let cq = grid.site_coords(sq);
            // Shift both so that p sits at the origin.
            let shifted: Vec<usize> = cq
                .iter()
                .zip(&cp)
                .zip(&grid.lengths)
                .map(|((&a, &b), &l)| (a + l - b) % l)
                .collect();
            let p0 = grid.mode(0, sigp);
            let q0 = grid.mode(grid.site_index(&shifted) % sites, sigq);
            if (m[(p, q)] - m[(p0, q0)]).abs() > tol {
                return false;
            }
        }
    }
    true
}

/// Momentum vectors of the grid (excluding none) in row-major order.
fn momenta(grid: &GridSpec, side: f64) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for &l in &grid.lengths {
        let mut next = Vec::with_capacity(out.len() * l);
        for prefix in &out {
            for nu in GridSpec::momentum_range(l) {
                let mut k = prefix.clone();
                k.push(2.0 * PI * nu as f64 / side);
                next.push(k);
            }
        }
        out = next;
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Orbital centroid of spatial site `s`.
fn centroid(grid: &GridSpec, side: f64, s: usize) -> Vec<f64> {
    grid.site_coords(s)
        .iter()
        .zip(&grid.lengths)
        .map(|(&c, &l)| c as f64 * side / l as f64)
        .collect()
}

/// Uniform electron gas in the plane-wave dual basis.
pub fn jellium(grid: &GridSpec) -> Result<FermionHamiltonian, HamiltonianError> {
    grid.validate()?;
    let omega = grid.cell_volume()?;
    let side = omega.powf(1.0 / grid.dims as f64);
    let sites = grid.spatial_orbitals();
    let ks = momenta(grid, side);

    // Both tensors depend only on the displacement between sites.
    let mut t_of = vec![0.0; sites];
    let mut v_of = vec![0.0; sites];
    for (delta, (t, v)) in t_of.iter_mut().zip(v_of.iter_mut()).enumerate() {
        let r = centroid(grid, side, delta);
        for k in &ks {
            let k2 = dot(k, k);
            let cos = dot(k, &r).cos();
            *t += k2 * cos / (2.0 * sites as f64);
            if k2 > 0.0 {
                *v += 2.0 * PI * cos / (omega * k2);
            }
        }
    }

    let n = grid.spin_orbitals();
    let mut kinetic = DMatrix::zeros(n, n);
    let mut interaction = DMatrix::zeros(n, n);
    for p in 0..n {
        let (sp, sigp) = grid.site_and_spin(p);
        let cp = grid.site_coords(sp);
        for q in 0..n {
            let (sq, sigq) = grid.site_and_spin(q);
            let delta: Vec<usize> = grid
                .site_coords(sq)
                .iter()
                .zip(&cp)
                .zip(&grid.lengths)
                .map(|((&a, &b), &l)| (a + l - b) % l)
                .collect();
            let d = grid.site_index(&delta);
            if sigp == sigq {
                kinetic[(p, q)] = t_of[d];
            }
            if p != q {
                interaction[(p, q)] = v_of[d];
            }
        }
    }
    symmetrize(&mut kinetic);
    symmetrize(&mut interaction);
    Ok(FermionHamiltonian {
        kinetic,
        external: DVector::zeros(n),
        interaction,
        grid: grid.clone(),
        model: Model::Jellium,
    })
}

// cos(k·δ) and cos(k·(−δ)) are evaluated at different wrapped displacements; average away the ULPs.
fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for p in 0..n {
        for q in p + 1..n {
            let avg = 0.5 * (m[(p, q)] + m[(q, p)]);
            m[(p, q)] = avg;
            m[(q, p)] = avg;
        }
    }
}

/// Plane-wave Hamiltonian with a nuclear external potential.
pub fn material(grid: &GridSpec, nuclei: &[Nucleus]) -> Result<FermionHamiltonian, HamiltonianError> {
    if nuclei.is_empty() {
        return Err(HamiltonianError::NoNuclei);
    }
    if let Some(n) = nuclei.iter().find(|n| !(n.charge >= 0.0)) {
        return Err(HamiltonianError::NegativeCharge(n.charge));
    }
    let mut h = jellium(grid)?;
    let omega = grid.cell_volume()?;
    let side = omega.powf(1.0 / grid.dims as f64);
    let ks = momenta(grid, side);
    let wrapped: Vec<Vec<f64>> = nuclei
        .iter()
        .map(|n| (0..grid.dims).map(|i| n.position.get(i).copied().unwrap_or(0.0).rem_euclid(side)).collect())
        .collect();
    for site in 0..grid.spatial_orbitals() {
        let r = centroid(grid, side, site);
        let mut u = 0.0;
        for (nuc, pos) in nuclei.iter().zip(&wrapped) {
            let rel: Vec<f64> = pos.iter().zip(&r).map(|(a, b)| a - b).collect();
            for k in &ks {
                let k2 = dot(k, k);
                if k2 > 0.0 {
                    u -= 4.0 * PI * nuc.charge * dot(k, &rel).cos() / (omega * k2);
                }
            }
        }
        for spin in 0..grid.spin_count() {
            h.external[grid.mode(site, spin)] = u;
        }
    }
    h.model = Model::Material { nuclei: nuclei.to_vec() };
    Ok(h)
}

/// Spinful Fermi-Hubbard model on an `lx × ly` lattice, site index `x + lx·y`.
///
/// Each site hops to its right and lower neighbours; on a periodic side of length 2
/// both directions reach the same neighbour and the hopping is counted twice.
pub fn hubbard(spec: &HubbardSpec) -> Result<FermionHamiltonian, HamiltonianError> {
    let HubbardSpec { lx, ly, tau, u, periodic } = *spec;
    if lx * ly == 0 {
        return Err(HamiltonianError::EmptyLattice);
    }
    // Coordinates are (y, x) so that the row-major site index is x + lx·y.
    let grid = GridSpec {
        dims: 2,
        lengths: vec![ly, lx],
        spinful: true,
        wigner_seitz_radius: None,
        volume: None,
        electrons: None,
        spin_order: SpinOrder::Interleaved,
    };
    let n = grid.spin_orbitals();
    let mut kinetic = DMatrix::zeros(n, n);
    let mut interaction = DMatrix::zeros(n, n);
    for y in 0..ly {
        for x in 0..lx {
            let site = x + lx * y;
            let mut neighbours = Vec::with_capacity(2);
            if x + 1 < lx || periodic {
                neighbours.push((x + 1) % lx + lx * y);
            }
            if y + 1 < ly || periodic {
                neighbours.push(x + lx * ((y + 1) % ly));
            }
            for other in neighbours.into_iter().filter(|&o| o != site) {
                for spin in 0..2 {
                    let (p, q) = (grid.mode(site, spin), grid.mode(other, spin));
                    kinetic[(p, q)] -= tau;
                    kinetic[(q, p)] -= tau;
                }
            }
            let (up, down) = (grid.mode(site, 0), grid.mode(site, 1));
            interaction[(up, down)] = u / 2.0;
            interaction[(down, up)] = u / 2.0;
        }
    }
    Ok(FermionHamiltonian {
        kinetic,
        external: DVector::zeros(n),
        interaction,
        grid,
        model: Model::Hubbard(*spec),
    })
}

/// `X_p Z…Z X_q` or `Y_p Z…Z Y_q` for `p < q`.
pub fn hopping_string(p: usize, q: usize, axis: Axis) -> PauliString {
    let factors = std::iter::once((p, axis))
        .chain((p + 1..q).map(|k| (k, Axis::Z)))
        .chain(std::iter::once((q, axis)));
    PauliString::from_factors(factors).expect("distinct qubits")
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Jordan-Wigner image of `T_pq (a†_p a_q + a†_q a_p)` for `p < q`.
pub fn jw_hopping(p: usize, q: usize, t: f64) -> QubitOperator {
    let (p, q) = (p.min(q), p.max(q));
    QubitOperator::from_terms([
        (hopping_string(p, q, Axis::X), real(t / 2.0)),
        (hopping_string(p, q, Axis::Y), real(t / 2.0)),
    ])
}

/// Jordan-Wigner image of `c n_p n_q` for `p ≠ q`, identity included.
pub fn jw_number_pair(p: usize, q: usize, c: f64) -> QubitOperator {
    QubitOperator::from_terms([
        (PauliString::identity(), real(c / 4.0)),
        (PauliString::single(p, Axis::Z), real(-c / 4.0)),
        (PauliString::single(q, Axis::Z), real(-c / 4.0)),
        (PauliString::from_factors([(p, Axis::Z), (q, Axis::Z)]).expect("p ≠ q"), real(c / 4.0)),
    ])
}

/// Jordan-Wigner image of `c n_p`, identity included.
pub fn jw_number(p: usize, c: f64) -> QubitOperator {
    QubitOperator::from_terms([
        (PauliString::identity(), real(c / 2.0)),
        (PauliString::single(p, Axis::Z), real(-c / 2.0)),
    ])
}

/// Qubit operator of the kinetic part `Σ_pq T_pq a†_p a_q`.
pub fn jw_kinetic(h: &FermionHamiltonian) -> QubitOperator {
    let n = h.num_modes();
    let mut op = QubitOperator::zero();
    for p in 0..n {
        if h.kinetic[(p, p)] != 0.0 {
            op.add_assign(&jw_number(p, h.kinetic[(p, p)]));
        }
        for q in p + 1..n {
            if h.kinetic[(p, q)] != 0.0 {
                op.add_assign(&jw_hopping(p, q, h.kinetic[(p, q)]));
            }
        }
    }
    op
}

/// Qubit operator of the diagonal part `Σ_p U_p n_p + Σ_{p≠q} V_pq n_p n_q`.
pub fn jw_potential(h: &FermionHamiltonian) -> QubitOperator {
    let n = h.num_modes();
    let mut op = QubitOperator::zero();
    for p in 0..n {
        if h.external[p] != 0.0 {
            op.add_assign(&jw_number(p, h.external[p]));
        }
        for q in p + 1..n {
            let c = h.interaction[(p, q)] + h.interaction[(q, p)];
            if c != 0.0 {
                op.add_assign(&jw_number_pair(p, q, c));
            }
        }
    }
    op
}

/// Full Jordan-Wigner qubit Hamiltonian.
///
/// The `Z_p Z_q` coefficient per unordered pair is `V_pq / 2` under the ordered-pair
/// interaction sum, which is what makes the `Z_p` and identity terms consistent.
pub fn jordan_wigner(h: &FermionHamiltonian) -> QubitOperator {
    jw_kinetic(h).add(&jw_potential(h))
}
