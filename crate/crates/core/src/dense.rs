//! Dense-matrix routes used as verification oracles on small systems.
//!
//! Qubit `q` is bit `q` of the basis-state index.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::hamiltonians::FermionHamiltonian;
use crate::pauli::{Axis, PauliString, QubitOperator};

/// Hard ceiling for dense oracles.
pub const MAX_DENSE_QUBITS: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DenseError {
    #[error("dense oracle limited to {max} qubits, got {got}")]
    TooManyQubits { got: usize, max: usize },
    #[error("eigenphase matching is ambiguous: |E t| = {0} reaches π")]
    PhaseWrap(f64),
}

pub fn check_size(n: usize) -> Result<(), DenseError> {
    if n > MAX_DENSE_QUBITS {
        Err(DenseError::TooManyQubits { got: n, max: MAX_DENSE_QUBITS })
    } else {
        Ok(())
    }
}

fn masks(p: &PauliString) -> (usize, usize, u32) {
    let (mut x, mut z, mut ny) = (0usize, 0usize, 0u32);
    for (q, a) in p.factors() {
        match a {
            Axis::X => x |= 1 << q,
            Axis::Z => z |= 1 << q,
            Axis::Y => {
                x |= 1 << q;
                z |= 1 << q;
                ny += 1;
            }
        }
    }
    (x, z, ny)
}

/// `⟨b ⊕ x| P |b⟩` for `P = i^{#Y} X^x Z^z`.
fn pauli_entry(z: usize, ny: u32, b: usize) -> Complex64 {
    let sign = if (z & b).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
    crate::pauli::phase((ny % 4) as u8) * sign
}

pub fn qubit_matrix(op: &QubitOperator, n: usize) -> DMatrix<Complex64> {
    let dim = 1usize << n;
    let mut m = DMatrix::zeros(dim, dim);
    for (p, c) in op.terms() {
        let (x, z, ny) = masks(p);
        for b in 0..dim {
            m[(b ^ x, b)] += c * pauli_entry(z, ny, b);
        }
    }
    m
}

/// Expansion coefficients `c_P = Tr(P M) / 2^n` over all `4^n` strings; exact zeros omitted.
pub fn pauli_decompose(m: &DMatrix<Complex64>, n: usize) -> QubitOperator {
    let dim = 1usize << n;
    let mut op = QubitOperator::zero();
    for x in 0..dim {
        for z in 0..dim {
            let y = x & z;
            let factors = (0..n).filter_map(|q| {
                let axis = match (x >> q & 1, z >> q & 1) {
                    (1, 0) => Axis::X,
                    (1, 1) => Axis::Y,
                    (0, 1) => Axis::Z,
                    _ => return None,
                };
                Some((q, axis))
            });
            let p = PauliString::from_factors(factors).expect("distinct");
            let ny = y.count_ones();
            // Tr(P M) = Σ_b P[b, b⊕x] M[b⊕x, b].
            let mut tr = Complex64::new(0.0, 0.0);
            for b in 0..dim {
                tr += pauli_entry(z, ny, b ^ x) * m[(b ^ x, b)];
            }
            let c = tr / dim as f64;
            if c.norm() != 0.0 {
                op.add_term(p, c);
            }
        }
    }
    op
}

/// Applies `a_p` to occupation basis state `b`; `None` when mode `p` is empty.
fn annihilate(b: usize, p: usize) -> Option<(f64, usize)> {
    if b >> p & 1 == 0 {
        return None;
    }
    let sign = if (b & ((1 << p) - 1)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
    Some((sign, b ^ (1 << p)))
}

fn create(b: usize, p: usize) -> Option<(f64, usize)> {
    if b >> p & 1 == 1 {
        return None;
    }
    let sign = if (b & ((1 << p) - 1)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
    Some((sign, b | (1 << p)))
}

/// Second-quantized Hamiltonian in the occupation basis, built from ladder operators.
pub fn fermion_matrix(h: &FermionHamiltonian) -> Result<DMatrix<Complex64>, DenseError> {
    let n = h.num_modes();
    check_size(n)?;
    let dim = 1usize << n;
    let mut m = DMatrix::zeros(dim, dim);
    for b in 0..dim {
        for p in 0..n {
            for q in 0..n {
                let t = h.kinetic[(p, q)];
                if t != 0.0 {
                    if let Some((s1, b1)) = annihilate(b, q) {
                        if let Some((s2, b2)) = create(b1, p) {
                            m[(b2, b)] += Complex64::new(t * s1 * s2, 0.0);
                        }
                    }
                }
            }
            let occ_p = (b >> p & 1) as f64;
            let mut diag = h.external[p] * occ_p;
            for q in 0..n {
                if q != p {
                    diag += h.interaction[(p, q)] * occ_p * (b >> q & 1) as f64;
                }
            }
            m[(b, b)] += Complex64::new(diag, 0.0);
        }
    }
    Ok(m)
}

/// `exp(-i H t)` for Hermitian `H`.
pub fn hermitian_expm(h: &DMatrix<Complex64>, t: f64) -> DMatrix<Complex64> {
    let eig = h.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| Complex64::from_polar(1.0, -e * t)));
    v * phases * v.adjoint()
}

pub fn hermitian_eigenvalues(h: &DMatrix<Complex64>) -> Vec<f64> {
    let mut e: Vec<f64> = h.clone().symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<Complex64>) -> f64 {
    m.clone().singular_values().iter().copied().fold(0.0, f64::max)
}

/// Phases `φ` of a unitary's eigenvalues `e^{-iφ}`, sorted, each in `(−π, π)`.
///
/// Uses the Cayley transform `K = i(I − U)(I + U)⁻¹`, which is Hermitian with
/// eigenvalues `−tan(φ/2)`; this avoids non-Hermitian eigensolvers entirely.
pub fn unitary_phases(u: &DMatrix<Complex64>) -> Result<Vec<f64>, DenseError> {
    let dim = u.nrows();
    let id = DMatrix::<Complex64>::identity(dim, dim);
    let inv = (&id + u).try_inverse().ok_or(DenseError::PhaseWrap(std::f64::consts::PI))?;
    let k = (&id - u) * inv * Complex64::new(0.0, 1.0);
    let hermitian = (&k + k.adjoint()) * Complex64::new(0.5, 0.0);
    let mut phases: Vec<f64> = hermitian.symmetric_eigenvalues().iter().map(|l| -2.0 * l.atan()).collect();
    phases.sort_by(f64::total_cmp);
    Ok(phases)
}

fn dense_commutator(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a * b - b * a
}

/// Trotter error norm from dense nested commutators, each inner sum expanded in
/// the Pauli basis. Includes the 1/12 factor.
pub fn trotter_error_norm(fragments: &[QubitOperator], n: usize) -> Result<f64, DenseError> {
    check_size(n)?;
    let mats: Vec<_> = fragments.iter().map(|f| qubit_matrix(f, n)).collect();
    let dim = 1usize << n;
    let mut w = 0.0;
    for b in 0..mats.len() {
        let mut suffix = DMatrix::<Complex64>::zeros(dim, dim);
        for m in &mats[b + 1..] {
            suffix += m;
        }
        let inner = dense_commutator(&mats[b], &suffix);
        let cross = dense_commutator(&inner, &suffix);
        let self_term = dense_commutator(&inner, &mats[b]);
        w += pauli_decompose(&cross, n).one_norm() + 0.5 * pauli_decompose(&self_term, n).one_norm();
    }
    Ok(w / 12.0)
}
