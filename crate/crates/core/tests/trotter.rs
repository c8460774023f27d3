mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use trotres::hamiltonians::{hubbard, jellium, GridSpec, HubbardSpec};
use trotres::orderings::{fswap_ordering, split_operator_ordering, Granularity, SplitOrder, TrotterOrdering};
use trotres::pauli::QubitOperator;
use trotres::trotter_error::{eigenphase_shift_bound, trotter_error_norm, NormOptions};

fn w_of(o: &TrotterOrdering, options: &NormOptions) -> f64 {
    trotter_error_norm(o, options).unwrap().w
}

fn small_systems() -> Vec<TrotterOrdering> {
    let hub21 = hubbard(&HubbardSpec { lx: 2, ly: 1, tau: 1.0, u: 4.0, periodic: false }).unwrap();
    let hub22 = hubbard(&HubbardSpec { lx: 2, ly: 2, tau: 1.0, u: 4.0, periodic: true }).unwrap();
    let ueg = jellium(&GridSpec::cubic(2, 2, true, 10.0)).unwrap();
    let chain = jellium(&GridSpec::cubic(1, 6, false, 1.0)).unwrap();
    let mut out = Vec::new();
    for h in [&hub21, &hub22, &ueg, &chain] {
        // Per-gate orderings on 8 qubits are covered by the acceptance suite; they dominate runtime here.
        if h.num_modes() < 8 {
            out.push(fswap_ordering(h, Granularity::PerGate));
        }
        out.push(fswap_ordering(h, Granularity::PerLayer));
        out.push(split_operator_ordering(h, SplitOrder::Tv));
        out.push(split_operator_ordering(h, SplitOrder::Vt));
    }
    out
}

#[test]
fn sparse_norm_matches_dense_oracle() {
    let mut cases: Vec<(TrotterOrdering, usize)> = (0..20).map(random_ordering).collect();
    cases.extend(small_systems().into_iter().map(|o| {
        let n = o.num_qubits;
        (o, n)
    }));
    for (o, n) in &cases {
        let sparse = w_of(o, &NormOptions::default());
        let dense = dense_w(&o.fragments, *n);
        assert!((sparse - dense).abs() <= 1e-9 * dense.max(1e-300), "sparse {sparse} vs dense {dense}");
    }
}

#[test]
fn norm_bounds_the_unitary_gap() {
    let mut cases: Vec<TrotterOrdering> = (100..120).map(|s| random_ordering(s).0).collect();
    cases.extend(small_systems());
    for o in &cases {
        let w = w_of(o, &NormOptions::default());
        let dense = DenseSteps::new(o);
        for t in [0.01f64, 0.05, 0.2] {
            let gap = dense.gap(t);
            assert!(gap <= w * t.powi(3) * (1.0 + 1e-9) + 1e-13, "gap {gap} > W t³ = {}", w * t.powi(3));
        }
    }
}

#[test]
fn eigenphase_shift_respects_the_arctan_bound() {
    for o in small_systems().iter().chain((200..210).map(|s| random_ordering(s).0).collect::<Vec<_>>().iter()) {
        let w = w_of(o, &NormOptions::default());
        let dense = DenseSteps::new(o);
        for t in [0.01f64, 0.05, 0.2] {
            let delta = w * t.powi(3);
            if delta * delta > 2.0 {
                continue;
            }
            let shift = dense.eigenphase_shift(t);
            if t == 0.05 {
                let library = trotres::trotter_error::dense_eigenphase_shift(o, t).unwrap();
                assert!((shift - library).abs() <= 1e-9, "oracle {shift} vs library {library}");
            }
            let bound = eigenphase_shift_bound(delta, t).unwrap();
            assert!(shift <= bound * (1.0 + 1e-9) + 1e-10, "shift {shift} > bound {bound}");
        }
    }
}

#[test]
fn pruning_does_not_change_the_norm() {
    for o in small_systems() {
        let pruned = trotter_error_norm(&o, &NormOptions::default()).unwrap();
        let plain = trotter_error_norm(&o, &NormOptions { disable_pruning: true, ..NormOptions::default() }).unwrap();
        assert!((pruned.w - plain.w).abs() <= 1e-12 * plain.w.max(1e-300));
    }
}

#[test]
fn worker_count_does_not_change_the_norm() {
    let h = hubbard(&HubbardSpec { lx: 4, ly: 4, tau: 1.0, u: 4.0, periodic: true }).unwrap();
    let ueg = jellium(&GridSpec::cubic(3, 2, true, 10.0)).unwrap();
    for o in [fswap_ordering(&h, Granularity::PerGate), split_operator_ordering(&ueg, SplitOrder::Vt)] {
        let runs: Vec<_> = [1, 2, 8]
            .iter()
            .map(|&k| trotter_error_norm(&o, &NormOptions { workers: Some(k), ..NormOptions::default() }).unwrap())
            .collect();
        for r in &runs[1..] {
            assert!((r.w - runs[0].w).abs() <= 1e-12 * runs[0].w);
            assert_eq!(r.per_qubit, runs[0].per_qubit);
        }
    }
}

#[test]
fn per_qubit_shares_add_up() {
    for o in small_systems() {
        let r = trotter_error_norm(&o, &NormOptions::default()).unwrap();
        let sum: f64 = r.per_qubit.iter().map(|(_, v)| v).sum();
        assert!((sum - r.w).abs() <= 1e-12 * r.w.max(1.0));
    }
}

#[test]
fn resumed_run_matches_fresh_run() {
    let dir = std::env::temp_dir().join(format!("trotres-ckpt-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("w.jsonl");
    let h = hubbard(&HubbardSpec { lx: 3, ly: 3, tau: 1.0, u: 4.0, periodic: true }).unwrap();
    let o = fswap_ordering(&h, Granularity::PerGate);
    let fresh = w_of(&o, &NormOptions::default());
    let with_ckpt = NormOptions { checkpoint: Some(path.clone()), ..NormOptions::default() };
    let first = w_of(&o, &with_ckpt);
    let resumed = w_of(&o, &with_ckpt);
    std::fs::remove_dir_all(&dir).ok();
    assert_eq!(first, fresh);
    assert_eq!(resumed, fresh);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn norm_scales_cubically(seed in 0u64..10_000, s in 0.1f64..3.0) {
        let (o, _) = random_ordering(seed);
        let w = w_of(&o, &NormOptions::default());
        let scaled = w_of(&o.scaled(s), &NormOptions::default());
        prop_assert!((scaled - s.powi(3) * w).abs() <= 1e-12 * (s.powi(3) * w).max(1e-300));
    }

    #[test]
    fn norm_is_non_negative_and_zero_for_commuting_fragments(seed in 0u64..10_000) {
        let mut rng = seeded(seed);
        let n = rng.gen_range(1..=6);
        // Z-only fragments all commute.
        let frags: Vec<QubitOperator> = (0..3)
            .map(|_| {
                let mask: u32 = rng.gen_range(1..(1 << n));
                let s = trotres::pauli::PauliString::from_factors(
                    (0..n).filter(|q| mask >> q & 1 == 1).map(|q| (q, trotres::pauli::Axis::Z)),
                ).unwrap();
                QubitOperator::term(s, c(rng.gen_range(-1.0..1.0), 0.0))
            })
            .collect();
        let o = TrotterOrdering::from_fragments(frags, GridSpec::cubic(1, n.max(2), false, 1.0));
        prop_assert_eq!(w_of(&o, &NormOptions::default()), 0.0);
        let (r, _) = random_ordering(seed);
        prop_assert!(w_of(&r, &NormOptions::default()) >= 0.0);
    }
}
