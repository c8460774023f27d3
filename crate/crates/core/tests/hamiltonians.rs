mod common;

use std::f64::consts::PI;

use common::*;
use trotres::hamiltonians::{
    hubbard, jellium, jordan_wigner, material, FermionHamiltonian, GridSpec, HubbardSpec, Nucleus, SpinOrder,
};

/// Direct evaluation of the dual-basis sums on a 2D `l × l` spinless grid.
struct PlaneWave2d {
    l: usize,
    omega: f64,
}

impl PlaneWave2d {
    fn side(&self) -> f64 {
        self.omega.sqrt()
    }

    fn momenta(&self) -> Vec<[f64; 2]> {
        let lo = -((self.l / 2) as i64);
        let hi = lo + self.l as i64;
        let scale = 2.0 * PI / self.side();
        let mut ks = Vec::new();
        for a in lo..hi {
            for b in lo..hi {
                ks.push([scale * a as f64, scale * b as f64]);
            }
        }
        ks
    }

    fn position(&self, site: usize) -> [f64; 2] {
        let h = self.side() / self.l as f64;
        [(site / self.l) as f64 * h, (site % self.l) as f64 * h]
    }

    fn kinetic(&self, p: usize, q: usize) -> f64 {
        let (rp, rq) = (self.position(p), self.position(q));
        let m = (self.l * self.l) as f64;
        self.momenta()
            .iter()
            .map(|k| (k[0] * k[0] + k[1] * k[1]) * (k[0] * (rq[0] - rp[0]) + k[1] * (rq[1] - rp[1])).cos() / (2.0 * m))
            .sum()
    }

    fn interaction(&self, p: usize, q: usize) -> f64 {
        let (rp, rq) = (self.position(p), self.position(q));
        self.momenta()
            .iter()
            .filter(|k| k[0] != 0.0 || k[1] != 0.0)
            .map(|k| {
                let k2 = k[0] * k[0] + k[1] * k[1];
                2.0 * PI * (k[0] * (rp[0] - rq[0]) + k[1] * (rp[1] - rq[1])).cos() / (self.omega * k2)
            })
            .sum()
    }

    fn external(&self, p: usize, nuclei: &[([f64; 2], f64)]) -> f64 {
        let rp = self.position(p);
        let mut u = 0.0;
        for (pos, z) in nuclei {
            for k in self.momenta().iter().filter(|k| k[0] != 0.0 || k[1] != 0.0) {
                let k2 = k[0] * k[0] + k[1] * k[1];
                u -= 4.0 * PI * z * (k[0] * (pos[0] - rp[0]) + k[1] * (pos[1] - rp[1])).cos() / (self.omega * k2);
            }
        }
        u
    }
}

fn grid_2d(l: usize, spinful: bool) -> GridSpec {
    GridSpec::cubic(2, l, spinful, 10.0)
}

fn oracle_for(grid: &GridSpec) -> PlaneWave2d {
    PlaneWave2d { l: grid.lengths[0], omega: grid.cell_volume().unwrap() }
}

#[test]
fn jellium_matches_direct_sums() {
    for l in [2, 3, 4] {
        let grid = grid_2d(l, false);
        let h = jellium(&grid).unwrap();
        let pw = oracle_for(&grid);
        let m = l * l;
        for p in 0..m {
            for q in 0..m {
                assert!((h.kinetic[(p, q)] - pw.kinetic(p, q)).abs() < 1e-12, "T[{p},{q}] on {l}x{l}");
                let v = if p == q { 0.0 } else { pw.interaction(p, q) };
                assert!((h.interaction[(p, q)] - v).abs() < 1e-12, "V[{p},{q}] on {l}x{l}");
            }
            assert_eq!(h.external[p], 0.0);
        }
    }
}

#[test]
fn jellium_volume_follows_wigner_seitz_radius() {
    let grid = grid_2d(2, false);
    // Two electrons on four spinless modes at r_s = 10.
    assert!((grid.cell_volume().unwrap() - 2.0 * PI * 100.0).abs() < 1e-9);
    let cubic = GridSpec::cubic(3, 2, true, 1.0);
    assert!((cubic.cell_volume().unwrap() - 8.0 * 4.0 / 3.0 * PI).abs() < 1e-12);
}

#[test]
fn spinful_jellium_kinetic_is_spin_diagonal() {
    for order in [SpinOrder::Interleaved, SpinOrder::Blocked] {
        let mut grid = grid_2d(3, true);
        grid.spin_order = order;
        // Pin the volume so that both grids share one cell.
        grid.volume = Some(grid.cell_volume().unwrap());
        let h = jellium(&grid).unwrap();
        let spinless = jellium(&GridSpec { spinful: false, ..grid.clone() }).unwrap();
        let n = grid.spin_orbitals();
        for p in 0..n {
            for q in 0..n {
                let ((sp, sigp), (sq, sigq)) = (grid.site_and_spin(p), grid.site_and_spin(q));
                let t = if sigp == sigq { spinless.kinetic[(sp, sq)] } else { 0.0 };
                assert!((h.kinetic[(p, q)] - t).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn jellium_interaction_is_translation_invariant() {
    for grid in [grid_2d(4, false), GridSpec::cubic(3, 3, false, 5.0), GridSpec::cubic(1, 7, true, 2.0)] {
        let h = jellium(&grid).unwrap();
        assert!(h.interaction_is_translation_invariant(1e-12));
        assert!(h.kinetic_is_translation_invariant(1e-12));
    }
}

#[test]
fn material_without_charge_is_jellium() {
    let grid = grid_2d(3, false);
    let neutral = material(&grid, &[Nucleus { position: vec![1.0, 2.0, 0.0], charge: 0.0 }]).unwrap();
    let plain = jellium(&grid).unwrap();
    assert_eq!(neutral.kinetic, plain.kinetic);
    assert_eq!(neutral.interaction, plain.interaction);
    assert!(neutral.external.iter().all(|&u| u == 0.0));
}

#[test]
fn material_external_potential_matches_direct_sums() {
    let grid = grid_2d(3, false);
    let pw = oracle_for(&grid);
    // The second nucleus lies outside the cell; the sums are periodic in the cell side.
    let nuclei = [([1.3, 4.1], 1.0), ([pw.side() + 0.7, -2.2], 2.0)];
    let spec: Vec<Nucleus> =
        nuclei.iter().map(|(r, z)| Nucleus { position: vec![r[0], r[1], 0.0], charge: *z }).collect();
    let h = material(&grid, &spec).unwrap();
    for p in 0..9 {
        assert!((h.external[p] - pw.external(p, &nuclei)).abs() < 1e-12, "U[{p}]");
    }
}

#[test]
fn shifting_a_nucleus_by_one_spacing_shifts_the_potential() {
    let grid = grid_2d(4, false);
    let spacing = grid.cell_volume().unwrap().sqrt() / 4.0;
    let at = |x: f64| material(&grid, &[Nucleus { position: vec![x, 0.3, 0.0], charge: 1.0 }]).unwrap();
    let (h0, h1) = (at(0.4), at(0.4 + spacing));
    for site in 0..16 {
        let coords = grid.site_coords(site);
        let moved = grid.site_index(&[(coords[0] + 1) % 4, coords[1]]);
        assert!((h0.external[site] - h1.external[moved]).abs() < 1e-12);
    }
}

#[test]
fn hubbard_term_counts() {
    let count = |h: &FermionHamiltonian| {
        let n = h.num_modes();
        let hops = (0..n).flat_map(|p| (p + 1..n).map(move |q| (p, q))).filter(|&(p, q)| h.kinetic[(p, q)] != 0.0).count();
        let onsite =
            (0..n).flat_map(|p| (p + 1..n).map(move |q| (p, q))).filter(|&(p, q)| h.interaction[(p, q)] != 0.0).count();
        (hops, onsite)
    };
    let open = hubbard(&HubbardSpec { lx: 2, ly: 1, tau: 1.0, u: 4.0, periodic: false }).unwrap();
    assert_eq!(count(&open), (2, 2));
    let ring = hubbard(&HubbardSpec { lx: 3, ly: 3, tau: 1.0, u: 4.0, periodic: true }).unwrap();
    assert_eq!(count(&ring), (2 * 18, 9));
    let big = hubbard(&HubbardSpec { lx: 8, ly: 8, tau: 1.0, u: 4.0, periodic: true }).unwrap();
    assert_eq!(big.num_modes(), 128);
    assert_eq!(count(&big), (2 * 128, 64));
    // The ordered-pair sum counts each on-site repulsion once.
    assert_eq!(big.interaction[(0, 1)] + big.interaction[(1, 0)], 4.0);
}

fn check_against_ladder_oracle(h: &FermionHamiltonian) {
    let n = h.num_modes();
    let qubit = operator_matrix(&jordan_wigner(h), n);
    let fermion = fermionic_matrix(h);
    assert!(max_abs_diff(&qubit, &fermion) < 1e-12);
    let (a, b) = (sorted_eigenvalues(&qubit), sorted_eigenvalues(&fermion));
    assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-10));
}

#[test]
fn ladder_oracle_obeys_anticommutation() {
    let a = ladder_annihilators(4);
    let id = CMat::identity(16, 16);
    for p in 0..4 {
        for q in 0..4 {
            let anti = &a[p] * a[q].adjoint() + a[q].adjoint() * &a[p];
            let want = if p == q { id.clone() } else { CMat::zeros(16, 16) };
            assert!(max_abs_diff(&anti, &want) == 0.0);
            assert!(max_abs_diff(&(&a[p] * &a[q] + &a[q] * &a[p]), &CMat::zeros(16, 16)) == 0.0);
        }
    }
}

#[test]
fn jordan_wigner_matches_ladder_oracle() {
    check_against_ladder_oracle(&hubbard(&HubbardSpec { lx: 2, ly: 1, tau: 1.0, u: 4.0, periodic: false }).unwrap());
    check_against_ladder_oracle(&hubbard(&HubbardSpec { lx: 2, ly: 2, tau: 0.7, u: 3.0, periodic: true }).unwrap());
    check_against_ladder_oracle(&jellium(&grid_2d(2, true)).unwrap());
    check_against_ladder_oracle(&jellium(&GridSpec::cubic(1, 5, false, 1.5)).unwrap());
    let nuclei = [Nucleus { position: vec![0.5, 1.5, 0.0], charge: 1.0 }];
    check_against_ladder_oracle(&material(&grid_2d(2, false), &nuclei).unwrap());
    check_against_ladder_oracle(&material(&GridSpec::cubic(1, 3, true, 1.0), &nuclei).unwrap());
}

#[test]
fn two_site_hubbard_spectrum() {
    // Half-filled two-site ring: ground energy (U − √(U² + 16τ²)) / 2 in the two-electron sector.
    let (tau, u) = (1.0, 4.0);
    let h = hubbard(&HubbardSpec { lx: 2, ly: 1, tau, u, periodic: false }).unwrap();
    let m = operator_matrix(&jordan_wigner(&h), 4);
    let mut two_electron: Vec<usize> = (0..16).filter(|b: &usize| b.count_ones() == 2).collect();
    two_electron.sort();
    let block = CMat::from_fn(6, 6, |i, j| m[(two_electron[i], two_electron[j])]);
    let ground = sorted_eigenvalues(&block)[0];
    assert!((ground - (u - (u * u + 16.0 * tau * tau).sqrt()) / 2.0).abs() < 1e-12);
}

#[test]
fn qubit_coefficients_are_real() {
    let hs = [
        jellium(&GridSpec::cubic(3, 2, true, 10.0)).unwrap(),
        hubbard(&HubbardSpec { lx: 4, ly: 4, tau: 1.0, u: 4.0, periodic: true }).unwrap(),
    ];
    for h in &hs {
        assert!(jordan_wigner(h).max_imaginary() < 1e-14);
    }
}

#[test]
fn diagonal_only_hamiltonian_has_only_z_terms() {
    let mut h = jellium(&grid_2d(2, false)).unwrap();
    h.kinetic.fill(0.0);
    let q = jordan_wigner(&h);
    assert!(q.terms().all(|(p, _)| p.factors().all(|(_, a)| a == trotres::pauli::Axis::Z)));
    let m = operator_matrix(&q, 4);
    assert!(max_abs_diff(&m, &CMat::from_diagonal(&m.diagonal())) == 0.0);
}
