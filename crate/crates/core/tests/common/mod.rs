//! Oracles shared by the integration tests. Nothing here calls into the
//! library's own dense routines.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use trotres::pauli::{Axis, PauliString, QubitOperator};

pub type CMat = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

fn sigma(axis: Option<Axis>) -> CMat {
    let (a, b, cc, d) = match axis {
        None => (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)),
        Some(Axis::X) => (c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)),
        Some(Axis::Y) => (c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)),
        Some(Axis::Z) => (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)),
    };
    DMatrix::from_row_slice(2, 2, &[a, b, cc, d])
}

/// Kronecker product with qubit 0 as the least significant factor.
pub fn pauli_matrix(p: &PauliString, n: usize) -> CMat {
    let mut m = DMatrix::from_element(1, 1, c(1.0, 0.0));
    for q in (0..n).rev() {
        m = m.kronecker(&sigma(p.get(q)));
    }
    m
}

pub fn operator_matrix(op: &QubitOperator, n: usize) -> CMat {
    let dim = 1 << n;
    let mut m = CMat::zeros(dim, dim);
    for (p, coeff) in op.terms() {
        m += pauli_matrix(p, n) * *coeff;
    }
    m
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn spectral_norm(m: &CMat) -> f64 {
    m.clone().singular_values().iter().copied().fold(0.0, f64::max)
}

/// Sum of |Pauli coefficients| of a dense matrix, via one Walsh-Hadamard
/// transform per X pattern: |c_P| = |Σ_b (−1)^{z·b} M[b⊕x, b]| / 2^n.
pub fn pauli_one_norm(m: &CMat, n: usize) -> f64 {
    let dim = 1usize << n;
    let mut total = 0.0;
    let mut v = vec![c(0.0, 0.0); dim];
    for x in 0..dim {
        for (b, slot) in v.iter_mut().enumerate() {
            *slot = m[(b ^ x, b)];
        }
        let mut h = 1;
        while h < dim {
            for i in (0..dim).step_by(2 * h) {
                for j in i..i + h {
                    let (u, w) = (v[j], v[j + h]);
                    v[j] = u + w;
                    v[j + h] = u - w;
                }
            }
            h *= 2;
        }
        total += v.iter().map(|z| z.norm()).sum::<f64>();
    }
    total / dim as f64
}

/// Nested-commutator error norm built from dense matrices, with the 1/12 factor.
pub fn dense_w(fragments: &[QubitOperator], n: usize) -> f64 {
    let mats: Vec<CMat> = fragments.iter().map(|f| operator_matrix(f, n)).collect();
    let dim = 1 << n;
    let mut w = 0.0;
    for b in 0..mats.len() {
        let suffix = mats[b + 1..].iter().fold(CMat::zeros(dim, dim), |acc, m| acc + m);
        let inner = &mats[b] * &suffix - &suffix * &mats[b];
        let cross = &inner * &suffix - &suffix * &inner;
        let own = &inner * &mats[b] - &mats[b] * &inner;
        w += pauli_one_norm(&cross, n) + 0.5 * pauli_one_norm(&own, n);
    }
    w / 12.0
}

pub fn random_string(rng: &mut impl Rng, n: usize) -> PauliString {
    let axes = [None, Some(Axis::X), Some(Axis::Y), Some(Axis::Z)];
    PauliString::from_factors((0..n).filter_map(|q| axes[rng.gen_range(0..4)].map(|a| (q, a)))).unwrap()
}

/// Hermitian operator with real coefficients in [−1, 1].
pub fn random_hermitian(rng: &mut impl Rng, n: usize, terms: usize) -> QubitOperator {
    QubitOperator::from_terms((0..terms).map(|_| (random_string(rng, n), c(rng.gen_range(-1.0..1.0), 0.0))))
}

/// Annihilation operators from Kronecker products: `a_p = Z^{⊗(q<p)} ⊗ |0⟩⟨1|_p`.
pub fn ladder_annihilators(n: usize) -> Vec<CMat> {
    let lower = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    (0..n)
        .map(|p| {
            let mut m = DMatrix::from_element(1, 1, c(1.0, 0.0));
            for q in (0..n).rev() {
                let factor = if q == p {
                    lower.clone()
                } else if q < p {
                    sigma(Some(Axis::Z))
                } else {
                    sigma(None)
                };
                m = m.kronecker(&factor);
            }
            m
        })
        .collect()
}

/// Second-quantized Hamiltonian `Σ T a†a + Σ U n + Σ_{p≠q} V n n` from ladder matrices.
pub fn fermionic_matrix(h: &trotres::hamiltonians::FermionHamiltonian) -> CMat {
    let n = h.num_modes();
    let a = ladder_annihilators(n);
    let dim = 1 << n;
    let num: Vec<CMat> = a.iter().map(|ap| ap.adjoint() * ap).collect();
    let mut m = CMat::zeros(dim, dim);
    for p in 0..n {
        for q in 0..n {
            if h.kinetic[(p, q)] != 0.0 {
                m += a[p].adjoint() * &a[q] * c(h.kinetic[(p, q)], 0.0);
            }
            if p != q && h.interaction[(p, q)] != 0.0 {
                m += &num[p] * &num[q] * c(h.interaction[(p, q)], 0.0);
            }
        }
        m += &num[p] * c(h.external[p], 0.0);
    }
    m
}

pub fn sorted_eigenvalues(m: &CMat) -> Vec<f64> {
    let mut e: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

/// Eigendecompositions of every fragment and of their sum, reused across times.
pub struct DenseSteps {
    total: nalgebra::SymmetricEigen<Complex64, nalgebra::Dyn>,
    fragments: Vec<nalgebra::SymmetricEigen<Complex64, nalgebra::Dyn>>,
}

fn expm(eig: &nalgebra::SymmetricEigen<Complex64, nalgebra::Dyn>, s: f64) -> CMat {
    let d = CMat::from_diagonal(&eig.eigenvalues.map(|e| c((e * s).cos(), -(e * s).sin())));
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

impl DenseSteps {
    pub fn new(o: &trotres::orderings::TrotterOrdering) -> Self {
        let n = o.num_qubits;
        let mats: Vec<CMat> = o.fragments.iter().map(|f| operator_matrix(f, n)).collect();
        let total = mats.iter().fold(CMat::zeros(1 << n, 1 << n), |a, m| a + m);
        DenseSteps { total: total.symmetric_eigen(), fragments: mats.into_iter().map(|m| m.symmetric_eigen()).collect() }
    }

    pub fn step(&self, t: f64) -> CMat {
        let dim = self.total.eigenvalues.len();
        let halves: Vec<CMat> = self.fragments.iter().map(|e| expm(e, t / 2.0)).collect();
        halves.iter().chain(halves.iter().rev()).fold(CMat::identity(dim, dim), |u, e| u * e)
    }

    /// `‖e^{-iHt} − U₂(t)‖`.
    pub fn gap(&self, t: f64) -> f64 {
        spectral_norm(&(expm(&self.total, t) - self.step(t)))
    }

    /// Largest shift between the spectrum of `H` and the effective Hamiltonian of `U₂(t)`.
    pub fn eigenphase_shift(&self, t: f64) -> f64 {
        let step = self.step(t);
        let dim = step.nrows();
        let id = CMat::identity(dim, dim);
        let cayley = (&id - &step) * (&id + &step).try_inverse().unwrap() * c(0.0, 1.0);
        let eig = ((&cayley + cayley.adjoint()) * c(0.5, 0.0)).symmetric_eigen();
        // Each eigenvector of the Cayley image is an eigenvector of U; read its phase directly.
        let mut effective: Vec<f64> = (0..dim)
            .map(|k| {
                let v = eig.eigenvectors.column(k);
                let z = (v.adjoint() * &step * v)[(0, 0)];
                -z.im.atan2(z.re) / t
            })
            .collect();
        effective.sort_by(f64::total_cmp);
        let mut exact: Vec<f64> = self.total.eigenvalues.iter().copied().collect();
        exact.sort_by(f64::total_cmp);
        exact.iter().zip(&effective).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Up to 5 fragments on up to 6 qubits, coefficients in [−1, 1].
pub fn random_ordering(seed: u64) -> (trotres::orderings::TrotterOrdering, usize) {
    let mut rng = seeded(seed);
    let n = rng.gen_range(2..=6);
    let count = rng.gen_range(2..=5);
    let frags: Vec<QubitOperator> = (0..count)
        .map(|_| {
            let terms = rng.gen_range(1..=5);
            random_hermitian(&mut rng, n, terms)
        })
        .collect();
    (trotres::orderings::TrotterOrdering::from_fragments(frags, trotres::hamiltonians::GridSpec::cubic(1, n, false, 1.0)), n)
}
