mod common;

use std::f64::consts::PI;

use common::seeded;
use proptest::prelude::*;
use rand::Rng;
use trotres::optimizer::{
    hubbard_energy_proxy, jellium_energy_proxy, minimize, t_count, ErrorBudget, PrecisionMode, PrecisionTarget,
};

/// Total T count written out directly from the cost model.
fn cost(ts: f64, pe: f64, ht: f64, w: f64, n_r: f64, n_d: f64) -> f64 {
    let n_pe = 0.76 * PI * w.sqrt() / (pe * ts.sqrt());
    let n_ht = 1.15 * (n_r * w.sqrt() / (ht * ts.sqrt())).log2() + 9.2;
    (n_r * n_ht + n_d) * n_pe
}

/// Best cost over a 200 × 200 logarithmic grid of Trotter and synthesis shares.
fn grid_minimum(delta_e: f64, w: f64, n_r: f64, n_d: f64) -> f64 {
    let points = 200;
    let share = |i: usize, lo: f64| (lo + (0.0 - lo) * i as f64 / (points - 1) as f64).exp();
    let mut best = f64::INFINITY;
    for i in 0..points {
        let ts = share(i, (1e-4f64).ln()) * delta_e;
        for j in 0..points {
            let ht = share(j, (1e-9f64).ln()) * delta_e;
            let pe = delta_e - ts - ht;
            if pe <= 0.0 {
                continue;
            }
            best = best.min(cost(ts, pe, ht, w, n_r, n_d));
        }
    }
    best
}

#[test]
fn optimum_matches_log_grid_search() {
    let mut rng = seeded(2024);
    for _ in 0..10 {
        let delta_e = 10f64.powf(rng.gen_range(-4.0..-1.0));
        let w = 10f64.powf(rng.gen_range(-4.0..3.0));
        let n_r = 10f64.powf(rng.gen_range(1.0..4.0)).round();
        let n_d = 10f64.powf(rng.gen_range(0.0..5.0)).round();
        let opt = minimize(delta_e, w, n_r, n_d).unwrap();
        let oracle = grid_minimum(delta_e, w, n_r, n_d);
        let ours = opt.cost.total_t;
        assert!((ours - oracle).abs() <= 0.005 * oracle, "optimizer {ours} vs grid {oracle}");
        assert!(ours <= oracle * (1.0 + 1e-9), "grid found a cheaper point");
        assert!((opt.budget.total() - delta_e).abs() <= 1e-9 * delta_e);
        let b = opt.budget;
        let direct = cost(b.trotter, b.phase_estimation, b.synthesis, w, n_r, n_d);
        assert!((direct - ours).abs() <= 1e-12 * direct);
    }
}

#[test]
fn optimum_beats_equal_split() {
    let opt = minimize(0.01, 1.0, 100.0, 0.0).unwrap();
    let thirds = t_count(&ErrorBudget::equal_thirds(0.01), 1.0, 100.0, 0.0).unwrap();
    assert!(opt.cost.total_t < thirds.total_t);
    let b = opt.budget;
    assert!(b.synthesis < b.trotter && b.trotter < b.phase_estimation);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cost_grows_with_every_input(
        delta_e in 1e-4f64..1e-1,
        w in 1e-3f64..1e3,
        n_r in 10.0f64..1e4,
        n_d in 0.0f64..1e5,
        factor in 1.05f64..4.0,
    ) {
        let base = minimize(delta_e, w, n_r, n_d).unwrap().cost.total_t;
        let tol = 1e-6 * base;
        prop_assert!(minimize(delta_e, w * factor, n_r, n_d).unwrap().cost.total_t >= base - tol);
        prop_assert!(minimize(delta_e, w, n_r * factor, n_d).unwrap().cost.total_t >= base - tol);
        prop_assert!(minimize(delta_e, w, n_r, n_d * factor + 1.0).unwrap().cost.total_t >= base - tol);
        prop_assert!(minimize(delta_e * factor, w, n_r, n_d).unwrap().cost.total_t <= base + tol);
    }

    #[test]
    fn budget_always_sums_to_target(delta_e in 1e-5f64..1.0, w in 1e-4f64..1e4, n_r in 1.0f64..1e5) {
        let opt = minimize(delta_e, w, n_r, 0.0).unwrap();
        prop_assert!((opt.budget.total() - delta_e).abs() <= 1e-9 * delta_e);
        prop_assert!(opt.budget.trotter > 0.0 && opt.budget.phase_estimation > 0.0 && opt.budget.synthesis > 0.0);
    }
}

#[test]
fn invalid_inputs_are_rejected() {
    assert!(minimize(0.0, 1.0, 10.0, 0.0).is_err());
    assert!(minimize(0.01, -1.0, 10.0, 0.0).is_err());
    assert!(minimize(0.01, 1.0, 0.0, 0.0).is_err());
    assert!(hubbard_energy_proxy(4.0, 64).is_ok());
    assert!(hubbard_energy_proxy(100.0, 64).is_err());
}

#[test]
fn energy_proxies() {
    // Magnitude bounds on the energy per site, in units of τ.
    assert!((hubbard_energy_proxy(4.0, 64).unwrap() - 65.28).abs() < 1e-12);
    assert!((hubbard_energy_proxy(8.0, 16).unwrap() - 16.0 * 0.74).abs() < 1e-12);
    // Low density: exchange and correlation dominate, so the energy is negative.
    assert!(jellium_energy_proxy(10.0, 27) < 0.0);
    // High density: kinetic energy dominates.
    assert!(jellium_energy_proxy(0.5, 27) > 0.0);
}

#[test]
fn precision_targets() {
    let relative = PrecisionTarget::default();
    assert_eq!(relative.mode, PrecisionMode::Relative);
    assert!((relative.delta_e(Some(-2.0), 1.0).unwrap() - 0.01).abs() < 1e-15);
    let absolute = PrecisionTarget { mode: PrecisionMode::Absolute, absolute: Some(0.0016), ..PrecisionTarget::default() };
    assert_eq!(absolute.delta_e(None, 1.0).unwrap(), 0.0016);
}
