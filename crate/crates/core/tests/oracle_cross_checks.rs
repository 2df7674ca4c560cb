//! Cross-module checks against the finite-tree matrix oracle.

use bethe_core::disk::find_zeros_poles;
use bethe_core::green::{m_root, SpectralPoint};
use bethe_core::tree::{reduced_tree_matrix, root_resolvent, root_spectral_weights, Profile, TreePotential};
use bethe_core::{Complex64, BAND_EDGE};

/// Eigenvalues outside `[-2√2 - δ, 2√2 + δ]` that the root actually sees.
fn visible_outliers(p: &TreePotential, extra_depth: u32) -> Vec<f64> {
    let r = p.support_radius().unwrap();
    let h = reduced_tree_matrix(p, r + extra_depth).unwrap();
    root_spectral_weights(&h)
        .unwrap()
        .into_iter()
        .filter(|&(e, w)| e.abs() > BAND_EDGE + 1e-3 && w > 1e-10)
        .map(|(e, _)| e)
        .collect()
}

#[test]
fn single_site_pole_matches_tree_eigenvalue() {
    let data = find_zeros_poles(&TreePotential::single_site(3.0), 1e-12).unwrap();
    let poles = data.pole_energies();
    assert_eq!(poles.len(), 1);
    let oracle = visible_outliers(&TreePotential::single_site(3.0), 12);
    assert_eq!(oracle.len(), 1);
    assert!((poles[0] - oracle[0]).abs() < 1e-6, "{poles:?} vs {oracle:?}");
}

#[test]
fn pole_counts_match_oracle_on_random_potentials() {
    for seed in 0..12u64 {
        let p = TreePotential::random(seed, Profile::Levels(vec![3.0, 2.5, 2.0])).unwrap();
        let data = find_zeros_poles(&p, 1e-11).unwrap();
        assert!(data.interlaces(), "seed {seed}");
        let mut poles: Vec<f64> = data
            .pole_energies()
            .into_iter()
            .filter(|e| e.abs() > BAND_EDGE + 1e-3)
            .collect();
        poles.sort_by(f64::total_cmp);
        // Bound states close to the band edge decay slowly along the tree;
        // at depth R+12 some still sit inside the δ-window, so the count is
        // taken on the deeper oracle.
        let oracle = visible_outliers(&p, 40);
        assert_eq!(poles.len(), oracle.len(), "seed {seed}: {poles:?} vs {oracle:?}");
        for (a, b) in poles.iter().zip(&oracle).filter(|(a, _)| a.abs() > BAND_EDGE + 0.1) {
            assert!((a - b).abs() < 1e-6, "seed {seed}: {a} vs {b}");
        }
    }
}

#[test]
fn recursion_matches_deep_tree_resolvent() {
    for seed in 0..10u64 {
        let depth = (seed % 4) as usize;
        let p = TreePotential::random(seed, Profile::Levels(vec![2.0; depth + 1])).unwrap();
        let r = p.support_radius().unwrap();
        let h = reduced_tree_matrix(&p, r + 40).unwrap();
        for lambda in [Complex64::new(0.0, 1.0), Complex64::new(1.0, 1.0), Complex64::new(0.0, 3.0)] {
            let m = m_root(&p, SpectralPoint::off_band(lambda).unwrap()).unwrap().value;
            let o = root_resolvent(&h, lambda).unwrap();
            assert!((m - o).norm() < 1e-8, "seed {seed} λ={lambda}: {m} vs {o}");
        }
    }
}
