//! Trotter error norm `W` of the second-order product formula.
//!
//! ```text
//! W = 1/12 Σ_b ( ‖Σ_{c>b} Σ_{a>b} [[H_b, H_c], H_a]‖ + ½ ‖Σ_{c>b} [[H_b, H_c], H_b]‖ )
//! ```
//!
//! Each inner sum is expanded in the Pauli basis before its coefficient 1-norm is
//! taken, so cancellations between commutators are kept. The outer index is the
//! parallel work unit and each one produces per-qubit buckets (keyed by the smallest
//! qubit of every Pauli string) that are reduced in a fixed order, which makes `W`
//! independent of the worker count.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::sync::Mutex;

use num_complex::Complex64;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dense::{self, DenseError};
use crate::orderings::TrotterOrdering;
use crate::pauli::{phase, PauliString, QubitOperator};

#[derive(Debug, Error)]
pub enum TrotterError {
    #[error("ordering has no fragments")]
    EmptyOrdering,
    #[error("delta^2 = {0} exceeds 2, outside the eigenphase bound's range")]
    DeltaOutOfRange(f64),
    #[error("time step must be positive, got {0}")]
    BadTime(f64),
    #[error(transparent)]
    Dense(#[from] DenseError),
    #[error("worker pool: {0}")]
    Pool(String),
    #[error("checkpoint {path}: {reason}")]
    Checkpoint { path: String, reason: String },
}

#[derive(Debug, Clone, Default)]
pub struct NormOptions {
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
    /// Disabling pruning switches to the plain multiply-based commutator route.
    pub disable_pruning: bool,
    /// JSON-lines file of finished outer indices, for resumable runs.
    pub checkpoint: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrotterNormResult {
    pub w: f64,
    /// `(qubit, contribution)` for every qubit that owns a nonzero share of `W`.
    pub per_qubit: Vec<(usize, f64)>,
    pub fragments: usize,
    /// Fragment pairs `(b, c)`, `c > b`, whose commutator vanishes identically.
    pub pruned_pairs: u64,
}

impl TrotterNormResult {
    /// Whether `W t³ ≤ 1`, the regime where the eigenphase series is justified.
    pub fn is_valid_at(&self, t: f64) -> bool {
        self.w * t.powi(3) <= 1.0
    }
}

/// Term list with real-valued access to the Pauli words.
type Terms = Vec<(PauliString, Complex64)>;

fn to_terms(op: &QubitOperator) -> Terms {
    op.terms().filter(|(p, _)| !p.is_identity()).map(|(p, c)| (p.clone(), *c)).collect()
}

fn accumulate(map: &mut FxHashMap<PauliString, Complex64>, p: PauliString, c: Complex64) {
    *map.entry(p).or_default() += c;
}

/// `[A, B]` accumulated into `out`, scaled by `s`; returns whether any pair anticommuted.
fn commutator_into(a: &[(PauliString, Complex64)], b: &[(PauliString, Complex64)], s: f64, out: &mut FxHashMap<PauliString, Complex64>) -> bool {
    let mut any = false;
    for (pa, ca) in a {
        for (pb, cb) in b {
            if pa.commutes_with(pb) {
                continue;
            }
            any = true;
            let (k, p) = pa.mul(pb);
            accumulate(out, p, ca * cb * phase(k) * (2.0 * s));
        }
    }
    any
}

fn nonzero(map: FxHashMap<PauliString, Complex64>) -> Terms {
    map.into_iter().filter(|(_, c)| *c != Complex64::new(0.0, 0.0)).collect()
}

/// Contribution of one outer index, bucketed by smallest qubit.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct OuterResult {
    b: usize,
    buckets: Vec<f64>,
    pruned: u64,
}

fn bucket_norms(terms: &FxHashMap<PauliString, Complex64>, weight: f64, buckets: &mut [f64]) {
    // Sorted so that the floating-point summation order is canonical.
    let mut entries: Vec<(usize, f64)> = terms
        .iter()
        .filter_map(|(p, c)| Some((p.min_qubit()?, c.norm())))
        .filter(|(_, m)| *m != 0.0)
        .collect();
    entries.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
    let mut i = 0;
    while i < entries.len() {
        let q = entries[i].0;
        let j = entries[i..].iter().position(|e| e.0 != q).map_or(entries.len(), |k| i + k);
        let vals: Vec<f64> = entries[i..j].iter().map(|e| e.1).collect();
        buckets[q] += weight * pairwise_sum(&vals);
        i = j;
    }
}

fn outer_pruned(frags: &[Terms], b: usize, n: usize) -> OuterResult {
    let hb = &frags[b];
    let mut c_map = FxHashMap::default();
    let mut pruned = 0u64;
    for hc in &frags[b + 1..] {
        if !commutator_into(hb, hc, 1.0, &mut c_map) {
            pruned += 1;
        }
    }
    let c_terms = nonzero(c_map);
    let mut buckets = vec![0.0; n];
    if c_terms.is_empty() {
        return OuterResult { b, buckets, pruned };
    }
    let mut suffix = FxHashMap::default();
    for frag in &frags[b + 1..] {
        for (p, c) in frag {
            accumulate(&mut suffix, p.clone(), *c);
        }
    }
    let suffix = nonzero(suffix);
    let mut outer = FxHashMap::default();
    commutator_into(&c_terms, &suffix, 1.0, &mut outer);
    bucket_norms(&outer, 1.0, &mut buckets);
    drop(outer);
    let mut inner = FxHashMap::default();
    commutator_into(&c_terms, hb, 1.0, &mut inner);
    bucket_norms(&inner, 0.5, &mut buckets);
    OuterResult { b, buckets, pruned }
}

/// Reference route: every commutator formed as `xy - yx` from full operator products.
fn outer_unpruned(frags: &[QubitOperator], b: usize, n: usize) -> OuterResult {
    let comm = |x: &QubitOperator, y: &QubitOperator| x.multiply(y).sub(&y.multiply(x));
    let hb = &frags[b];
    let mut outer = QubitOperator::zero();
    let mut inner = QubitOperator::zero();
    let mut pruned = 0;
    for c in b + 1..frags.len() {
        let x = comm(hb, &frags[c]);
        if x.is_empty() {
            pruned += 1;
            continue;
        }
        for a in b + 1..frags.len() {
            outer.add_assign(&comm(&x, &frags[a]));
        }
        inner.add_assign(&comm(&x, hb));
    }
    let mut buckets = vec![0.0; n];
    let to_map = |op: &QubitOperator| op.terms().map(|(p, c)| (p.clone(), *c)).collect::<FxHashMap<_, _>>();
    bucket_norms(&to_map(&outer), 1.0, &mut buckets);
    bucket_norms(&to_map(&inner), 0.5, &mut buckets);
    OuterResult { b, buckets, pruned }
}

/// Recursive halving sum; the result depends only on the order of `v`.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        len if len <= 8 => v.iter().sum(),
        len => pairwise_sum(&v[..len / 2]) + pairwise_sum(&v[len / 2..]),
    }
}

fn fingerprint(frags: &[QubitOperator]) -> String {
    let mut h = Sha256::new();
    for f in frags {
        h.update(f.to_text().as_bytes());
        h.update(b"--\n");
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Serialize, Deserialize)]
struct CheckpointHeader {
    fingerprint: String,
    fragments: usize,
}

struct Checkpoint {
    path: PathBuf,
    done: BTreeMap<usize, OuterResult>,
    writer: Mutex<File>,
}

impl Checkpoint {
    fn open(path: PathBuf, frags: &[QubitOperator]) -> Result<Self, TrotterError> {
        let err = |reason: String| TrotterError::Checkpoint { path: path.display().to_string(), reason };
        let header = CheckpointHeader { fingerprint: fingerprint(frags), fragments: frags.len() };
        let mut done = BTreeMap::new();
        let fresh = !path.exists();
        if !fresh {
            let file = File::open(&path).map_err(|e| err(e.to_string()))?;
            let mut lines = BufReader::new(file).lines();
            let first = lines.next().transpose().map_err(|e| err(e.to_string()))?.unwrap_or_default();
            let stored: CheckpointHeader = serde_json::from_str(&first).map_err(|e| err(format!("bad header: {e}")))?;
            if stored.fingerprint != header.fingerprint {
                return Err(err("written for a different ordering".into()));
            }
            for line in lines {
                let line = line.map_err(|e| err(e.to_string()))?;
                // A torn final line from an interrupted run is recomputed.
                if let Ok(r) = serde_json::from_str::<OuterResult>(&line) {
                    done.insert(r.b, r);
                }
            }
        }
        let mut file = OpenOptions::new().create(true).append(true).open(&path).map_err(|e| err(e.to_string()))?;
        if fresh {
            writeln!(file, "{}", serde_json::to_string(&header).expect("header serializes")).map_err(|e| err(e.to_string()))?;
        }
        Ok(Checkpoint { path, done, writer: Mutex::new(file) })
    }

    fn record(&self, r: &OuterResult) -> Result<(), TrotterError> {
        let line = serde_json::to_string(r).expect("result serializes");
        let mut w = self.writer.lock().expect("checkpoint writer poisoned");
        writeln!(w, "{line}").map_err(|e| TrotterError::Checkpoint { path: self.path.display().to_string(), reason: e.to_string() })
    }
}

/// Trotter error norm of a forward ordering.
pub fn trotter_error_norm(o: &TrotterOrdering, options: &NormOptions) -> Result<TrotterNormResult, TrotterError> {
    let l = o.fragments.len();
    if l == 0 {
        return Err(TrotterError::EmptyOrdering);
    }
    let n = o.fragments.iter().map(QubitOperator::num_qubits).max().unwrap_or(0).max(o.num_qubits).max(1);
    let checkpoint = options.checkpoint.clone().map(|p| Checkpoint::open(p, &o.fragments)).transpose()?;
    let terms: Vec<Terms> = o.fragments.iter().map(to_terms).collect();
    let todo: Vec<usize> = (0..l.saturating_sub(1))
        .filter(|b| checkpoint.as_ref().is_none_or(|c| !c.done.contains_key(b)))
        .collect();

    let compute = || -> Result<Vec<OuterResult>, TrotterError> {
        todo.par_iter()
            .map(|&b| {
                let r = if options.disable_pruning { outer_unpruned(&o.fragments, b, n) } else { outer_pruned(&terms, b, n) };
                if let Some(c) = &checkpoint {
                    c.record(&r)?;
                }
                Ok(r)
            })
            .collect()
    };
    let fresh = match options.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| TrotterError::Pool(e.to_string()))?
            .install(compute)?,
        None => compute()?,
    };

    let mut all: BTreeMap<usize, OuterResult> = checkpoint.map(|c| c.done).unwrap_or_default();
    for r in fresh {
        all.insert(r.b, r);
    }
    let results: Vec<&OuterResult> = all.values().collect();
    let pruned_pairs = results.iter().map(|r| r.pruned).sum();
    let mut per_qubit = Vec::new();
    let mut bucket_totals = Vec::with_capacity(n);
    for q in 0..n {
        let column: Vec<f64> = results.iter().map(|r| r.buckets.get(q).copied().unwrap_or(0.0)).collect();
        let total = pairwise_sum(&column) / 12.0;
        bucket_totals.push(total);
        if total != 0.0 {
            per_qubit.push((q, total));
        }
    }
    Ok(TrotterNormResult { w: pairwise_sum(&bucket_totals), per_qubit, fragments: l, pruned_pairs })
}

/// Energy-shift bound `arctan(Δ√(4−Δ²)/(2−Δ²)) / t` for `‖U − U_TS‖ ≤ Δ`.
pub fn eigenphase_shift_bound(delta: f64, t: f64) -> Result<f64, TrotterError> {
    if !(t > 0.0) {
        return Err(TrotterError::BadTime(t));
    }
    let d2 = delta * delta;
    // One ulp of slack so that Δ = √2 itself is accepted.
    if !(delta >= 0.0) || d2 > 2.0 * (1.0 + f64::EPSILON) {
        return Err(TrotterError::DeltaOutOfRange(d2));
    }
    // atan2 keeps Δ² = 2 finite (π/2).
    Ok((delta * (4.0 - d2).sqrt()).atan2((2.0 - d2).max(0.0)) / t)
}

/// Leading terms `Δ + Δ³/24` of the eigenphase bound.
pub fn eigenphase_series_head(delta: f64) -> f64 {
    delta + delta.powi(3) / 24.0
}

fn dense_fragments(o: &TrotterOrdering) -> Result<(usize, Vec<nalgebra::DMatrix<Complex64>>), TrotterError> {
    let n = o.fragments.iter().map(QubitOperator::num_qubits).max().unwrap_or(0).max(o.num_qubits);
    dense::check_size(n)?;
    Ok((n, o.fragments.iter().map(|f| dense::qubit_matrix(f, n)).collect()))
}

fn symmetric_step(mats: &[nalgebra::DMatrix<Complex64>], n: usize, t: f64) -> nalgebra::DMatrix<Complex64> {
    let dim = 1 << n;
    let halves: Vec<_> = mats.iter().map(|m| dense::hermitian_expm(m, t / 2.0)).collect();
    let mut u = nalgebra::DMatrix::identity(dim, dim);
    for e in halves.iter().chain(halves.iter().rev()) {
        u *= e;
    }
    u
}

/// Spectral norm of `e^{-iHt}` minus the symmetric Trotter product.
pub fn dense_unitary_gap(o: &TrotterOrdering, t: f64) -> Result<f64, TrotterError> {
    let (n, mats) = dense_fragments(o)?;
    let h = mats.iter().fold(nalgebra::DMatrix::zeros(1 << n, 1 << n), |acc, m| acc + m);
    let exact = dense::hermitian_expm(&h, t);
    Ok(dense::spectral_norm(&(exact - symmetric_step(&mats, n, t))))
}

/// Largest shift between the spectrum of `H` and the effective Hamiltonian of one Trotter step.
pub fn dense_eigenphase_shift(o: &TrotterOrdering, t: f64) -> Result<f64, TrotterError> {
    if !(t > 0.0) {
        return Err(TrotterError::BadTime(t));
    }
    let (n, mats) = dense_fragments(o)?;
    let h = mats.iter().fold(nalgebra::DMatrix::zeros(1 << n, 1 << n), |acc, m| acc + m);
    let exact = dense::hermitian_eigenvalues(&h);
    if let Some(e) = exact.iter().find(|e| (*e * t).abs() >= std::f64::consts::PI) {
        return Err(DenseError::PhaseWrap((e * t).abs()).into());
    }
    let mut effective: Vec<f64> = dense::unitary_phases(&symmetric_step(&mats, n, t))?
        .iter()
        .map(|phi| phi / t)
        .collect();
    effective.sort_by(f64::total_cmp);
    Ok(exact.iter().zip(&effective).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::GridSpec;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn frag(terms: &[(&str, f64)]) -> QubitOperator {
        QubitOperator::from_terms(terms.iter().map(|(s, c)| (p(s), Complex64::new(*c, 0.0))))
    }

    fn ordering(frags: Vec<QubitOperator>) -> TrotterOrdering {
        TrotterOrdering::from_fragments(frags, GridSpec::cubic(1, 2, false, 1.0))
    }

    #[test]
    fn commuting_fragments_give_zero() {
        let o = ordering(vec![frag(&[("Z0", 1.0)]), frag(&[("Z0 Z1", 0.5)]), frag(&[("Z1", -2.0)])]);
        let r = trotter_error_norm(&o, &NormOptions::default()).unwrap();
        assert_eq!(r.w, 0.0);
        assert_eq!(r.pruned_pairs, 3);
    }

    #[test]
    fn two_fragment_specialisation() {
        let h1 = frag(&[("X0", 0.7), ("X0 X1", 0.2)]);
        let h2 = frag(&[("Z0", 0.3), ("Z1", -0.4)]);
        let o = ordering(vec![h1.clone(), h2.clone()]);
        let c = h1.commutator(&h2);
        let expected = (c.commutator(&h2).one_norm() + 0.5 * c.commutator(&h1).one_norm()) / 12.0;
        let w = trotter_error_norm(&o, &NormOptions::default()).unwrap().w;
        assert!((w - expected).abs() <= 1e-14 * expected);
    }

    #[test]
    fn empty_ordering_is_rejected() {
        assert!(matches!(trotter_error_norm(&ordering(vec![]), &NormOptions::default()), Err(TrotterError::EmptyOrdering)));
    }

    #[test]
    fn bound_closed_form_values() {
        assert_eq!(eigenphase_shift_bound(0.0, 1.0).unwrap(), 0.0);
        let third = eigenphase_shift_bound(1.0, 1.0).unwrap();
        assert!((third - std::f64::consts::FRAC_PI_3).abs() < 1e-15);
        let d = 1e-2;
        assert!((eigenphase_shift_bound(d, 1.0).unwrap() - eigenphase_series_head(d)).abs() < 1e-9);
        assert!(eigenphase_shift_bound(1.5, 1.0).is_err());
        assert!((eigenphase_shift_bound(2f64.sqrt(), 2.0).unwrap() - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn pairwise_sum_matches_naive_on_integers() {
        let v: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&v), 500500.0);
    }
}
