//! Desk-scale self-checks against the dense oracles.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dense;
use crate::gate_count::{ffft_1d, hwp_limited, hwp_phase_table};
use crate::hamiltonians::{hubbard, GridSpec, HubbardSpec};
use crate::orderings::{fswap_ordering, split_operator_ordering, Granularity, SplitOrder, TrotterOrdering};
use crate::pauli::{commutes_trivially, phase, Axis, PauliString, QubitOperator};
use crate::trotter_error::{dense_eigenphase_shift, dense_unitary_gap, eigenphase_shift_bound, trotter_error_norm, NormOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    Pauli,
    Trotter,
    Hwp,
    All,
}

impl FromStr for Scope {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pauli" => Ok(Scope::Pauli),
            "trotter" => Ok(Scope::Trotter),
            "hwp" => Ok(Scope::Hwp),
            "all" => Ok(Scope::All),
            other => Err(format!("unknown scope {other:?}; expected pauli, trotter, hwp or all")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Largest residual (or smallest margin) observed.
    pub residual: f64,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {:<44} residual={:.3e} {}", self.name, self.residual, self.detail)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: &str, passed: bool, residual: f64, detail: impl Into<String>) {
        self.checks.push(Check { name: name.to_owned(), passed, residual, detail: detail.into() });
    }
}

/// Random Pauli string on `n` qubits (possibly the identity).
pub fn random_pauli<R: Rng>(rng: &mut R, n: usize) -> PauliString {
    let factors: Vec<(usize, Axis)> = (0..n)
        .filter_map(|q| match rng.gen_range(0..4) {
            0 => None,
            1 => Some((q, Axis::X)),
            2 => Some((q, Axis::Y)),
            _ => Some((q, Axis::Z)),
        })
        .collect();
    PauliString::from_factors(factors).expect("distinct qubits")
}

/// Random operator with `terms` strings; real coefficients in [−1, 1] when `hermitian`.
pub fn random_operator<R: Rng>(rng: &mut R, n: usize, terms: usize, hermitian: bool) -> QubitOperator {
    let mut op = QubitOperator::zero();
    for _ in 0..terms {
        let re = rng.gen_range(-1.0..=1.0);
        let im = if hermitian { 0.0 } else { rng.gen_range(-1.0..=1.0) };
        op.add_term(random_pauli(rng, n), Complex64::new(re, im));
    }
    op
}

/// Random ordering of `fragments` Hermitian fragments on `n` qubits.
pub fn random_ordering<R: Rng>(rng: &mut R, n: usize, fragments: usize) -> TrotterOrdering {
    let frags = (0..fragments)
        .map(|_| {
            let terms = rng.gen_range(1..=4);
            random_operator(rng, n, terms, true).without_identity()
        })
        .collect();
    let grid = GridSpec::cubic(1, n, false, 1.0);
    let mut o = TrotterOrdering::from_fragments(frags, grid);
    o.num_qubits = n;
    o
}

fn max_entry(m: &nalgebra::DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Commutator built with the conjugated phase convention (`XY = −iZ`).
fn conjugated_commutator(a: &QubitOperator, b: &QubitOperator) -> QubitOperator {
    let product = |x: &QubitOperator, y: &QubitOperator| {
        let mut out = QubitOperator::zero();
        for (p, cp) in x.terms() {
            for (q, cq) in y.terms() {
                let (k, s) = p.mul(q);
                out.add_term(s, phase((4 - (k & 3)) & 3) * cp * cq);
            }
        }
        out
    };
    product(a, b).sub(&product(b, a))
}

/// Largest dense-matrix residual of `commutator` over random operator pairs.
fn commutator_residual<F: Fn(&QubitOperator, &QubitOperator) -> QubitOperator>(rng: &mut ChaCha8Rng, commutator: F) -> f64 {
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let n = rng.gen_range(1..=5);
        let a = random_operator(rng, n, 6, false);
        let b = random_operator(rng, n, 6, false);
        let (ma, mb) = (dense::qubit_matrix(&a, n), dense::qubit_matrix(&b, n));
        let got = dense::qubit_matrix(&commutator(&a, &b), n);
        worst = worst.max(max_entry(&(got - (&ma * &mb - &mb * &ma))));
    }
    worst
}

fn verify_pauli(report: &mut VerifyReport) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let mut product = 0.0f64;
    let mut antisym = 0.0f64;
    let mut norm_margin = f64::INFINITY;
    for _ in 0..20 {
        let n = rng.gen_range(1..=6);
        let a = random_operator(&mut rng, n, 8, false);
        let b = random_operator(&mut rng, n, 8, false);
        let (ma, mb) = (dense::qubit_matrix(&a, n), dense::qubit_matrix(&b, n));
        product = product.max(max_entry(&(dense::qubit_matrix(&a.multiply(&b), n) - &ma * &mb)));
        let sum = a.commutator(&b).add(&b.commutator(&a));
        antisym = antisym.max(sum.terms().map(|(_, c)| c.norm()).fold(0.0, f64::max));
        norm_margin = norm_margin.min(a.one_norm() - dense::spectral_norm(&ma));
    }
    report.push("pauli: multiply matches dense product", product < 1e-12, product, "20 pairs, <= 6 qubits");
    let comm = commutator_residual(&mut rng, QubitOperator::commutator);
    report.push("pauli: commutator matches dense", comm < 1e-12, comm, "20 pairs, <= 5 qubits");
    report.push("pauli: commutator antisymmetry", antisym < 1e-12, antisym, "");
    report.push("pauli: one-norm bounds spectral norm", norm_margin >= -1e-9, (-norm_margin).max(0.0), format!("min margin {norm_margin:.3e}"));

    let strings: Vec<PauliString> = (0..64usize)
        .map(|code| {
            let factors = (0..3).filter_map(|q| match (code >> (2 * q)) & 3 {
                0 => None,
                1 => Some((q, Axis::X)),
                2 => Some((q, Axis::Y)),
                _ => Some((q, Axis::Z)),
            });
            PauliString::from_factors(factors).expect("distinct qubits")
        })
        .collect();
    let mut violations = 0usize;
    for a in &strings {
        for b in &strings {
            if commutes_trivially(a, b) {
                let ca = QubitOperator::term(a.clone(), Complex64::new(1.0, 0.0));
                let cb = QubitOperator::term(b.clone(), Complex64::new(1.0, 0.0));
                if !ca.commutator(&cb).is_empty() {
                    violations += 1;
                }
            }
        }
    }
    report.push("pauli: trivial commutation implies zero", violations == 0, violations as f64, "all 4096 pairs on 3 qubits");

    let mut mutant_rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let mutant = commutator_residual(&mut mutant_rng, conjugated_commutator);
    report.push("pauli: perturbed phase convention is caught", mutant > 1e-6, mutant, "XY = -iZ must fail the dense check");
}

fn gap_check(report: &mut VerifyReport, name: &str, orderings: &[TrotterOrdering]) {
    let mut worst_margin = f64::INFINITY;
    let mut eigen_margin = f64::INFINITY;
    let mut failure = None;
    for o in orderings {
        let w = match trotter_error_norm(o, &NormOptions::default()) {
            Ok(r) => r.w,
            Err(e) => {
                failure = Some(e.to_string());
                break;
            }
        };
        for t in [0.01, 0.05, 0.2] {
            let bound = w * t * t * t;
            if bound > 1.0 {
                continue;
            }
            match (dense_unitary_gap(o, t), dense_eigenphase_shift(o, t)) {
                (Ok(gap), Ok(shift)) => {
                    worst_margin = worst_margin.min(bound - gap);
                    if let Ok(limit) = eigenphase_shift_bound(gap.min(2f64.sqrt()), t) {
                        eigen_margin = eigen_margin.min(limit * (1.0 + 1e-9) + 1e-12 - shift);
                    }
                }
                (Err(e), _) | (_, Err(e)) => failure = Some(e.to_string()),
            }
        }
    }
    let ok = failure.is_none() && worst_margin >= -1e-12;
    report.push(
        &format!("trotter: {name} gap <= W t^3"),
        ok,
        (-worst_margin).max(0.0),
        failure.clone().unwrap_or_else(|| format!("min margin {worst_margin:.3e}")),
    );
    report.push(
        &format!("trotter: {name} eigenphase bound"),
        failure.is_none() && eigen_margin >= 0.0,
        (-eigen_margin).max(0.0),
        format!("min margin {eigen_margin:.3e}"),
    );
}

fn verify_trotter(report: &mut VerifyReport) {
    let h21 = hubbard(&HubbardSpec { lx: 2, ly: 1, tau: 1.0, u: 4.0, periodic: false }).expect("valid lattice");
    let hubbard_orderings = vec![
        fswap_ordering(&h21, Granularity::PerGate),
        split_operator_ordering(&h21, SplitOrder::Tv),
        split_operator_ordering(&h21, SplitOrder::Vt),
    ];
    gap_check(report, "2x1 Hubbard", &hubbard_orderings);

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    let random: Vec<_> = (0..20)
        .map(|_| {
            let n = rng.gen_range(2..=5);
            let l = rng.gen_range(2..=5);
            random_ordering(&mut rng, n, l)
        })
        .collect();
    gap_check(report, "random orderings", &random);

    let mut worst = 0.0f64;
    for o in hubbard_orderings.iter().chain(&random) {
        let sparse = trotter_error_norm(o, &NormOptions::default()).map(|r| r.w).unwrap_or(f64::NAN);
        let n = o.fragments.iter().map(QubitOperator::num_qubits).max().unwrap_or(0).max(o.num_qubits);
        let oracle = dense::trotter_error_norm(&o.fragments, n).unwrap_or(f64::NAN);
        let rel = if oracle == 0.0 { sparse.abs() } else { (sparse - oracle).abs() / oracle };
        worst = if rel.is_nan() { f64::INFINITY } else { worst.max(rel) };
    }
    report.push("trotter: sparse W matches dense oracle", worst < 1e-9, worst, "relative, 23 orderings");
}

fn verify_hwp(report: &mut VerifyReport) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let theta = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        for n in 1..=10 {
            let table = hwp_phase_table(n, theta).expect("n <= 10");
            worst = worst.max(table.max_residual());
        }
    }
    report.push("hwp: phases equal direct rotations", worst < 1e-12, worst, "n <= 10, 20 angles, all bitstrings");

    let limited = hwp_limited(50, 30);
    report.push(
        "hwp: 50 rotations on 30 ancillae",
        limited.rotations == 10 && limited.t_gates == 192,
        0.0,
        format!("{} rotations, {} T", limited.rotations, limited.t_gates),
    );
    let ffft = [4usize, 8, 16].map(|s| ffft_1d(s).map_or(0, |c| c.0));
    report.push("hwp: FFFT per-application T counts", ffft == [8, 26, 70], 0.0, format!("{ffft:?}"));
}

pub fn verify(scope: Scope) -> VerifyReport {
    let mut report = VerifyReport::default();
    if matches!(scope, Scope::Pauli | Scope::All) {
        verify_pauli(&mut report);
    }
    if matches!(scope, Scope::Trotter | Scope::All) {
        verify_trotter(&mut report);
    }
    if matches!(scope, Scope::Hwp | Scope::All) {
        verify_hwp(&mut report);
    }
    report
}
