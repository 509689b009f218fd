use std::collections::BTreeMap;

use nalgebra::DMatrix;
use proptest::prelude::*;
use qcert::pauli::{enumerate_paulis, orbit_key, OrbitKey};
use qcert::terwilliger::{
    assemble_blocks, expand_classes, gamma_norm, symmetrize_small, variable_index_set, BlockLayout,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn min_eig(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Random symmetric matrix `V Vᵀ / d + s I` with `s` spread around zero so
/// both verdicts occur.
fn random_symmetric(dim: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let rank = rng.random_range(1..=dim);
    let v = DMatrix::from_fn(dim, rank, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    let shift = rng.random::<f64>() * 0.6 - 0.3;
    &v * v.transpose() / dim as f64 + DMatrix::identity(dim, dim) * shift
}

#[test]
fn orbit_counts_match_gamma() {
    for n in 1..=3 {
        let paulis = enumerate_paulis(n).unwrap();
        let mut counts: BTreeMap<OrbitKey, u128> = BTreeMap::new();
        for a in &paulis {
            for b in &paulis {
                *counts.entry(orbit_key(a, b).unwrap()).or_default() += 1;
            }
        }
        let keys = variable_index_set(n).keys;
        assert_eq!(counts.len(), keys.len());
        for key in keys {
            assert_eq!(counts[&key], gamma_norm(key.i, key.j, key.t, key.p, n), "n={n} {key}");
        }
    }
}

#[test]
fn odd_defect_classes_anticommute() {
    for n in 1..=3 {
        let paulis = enumerate_paulis(n).unwrap();
        for a in &paulis {
            for b in &paulis {
                let key = orbit_key(a, b).unwrap();
                assert_eq!(key.is_anticommuting(), a.anticommutes(b).unwrap());
            }
        }
    }
}

#[test]
fn master_oracle_block_verdict_matches_dense() {
    let mut rng = ChaCha8Rng::seed_from_u64(20240611);
    for n in 1..=3 {
        let dim = 1 << (2 * n);
        let layout = BlockLayout::new(n);
        let (mut agree, mut psd, mut skipped) = (0, 0, 0);
        for _ in 0..200 {
            let g = random_symmetric(dim, &mut rng);
            let x = symmetrize_small(&g, n).unwrap();
            let dense_min = min_eig(&expand_classes(&x, n).unwrap());
            if dense_min.abs() <= 1e-8 {
                skipped += 1;
                continue;
            }
            let blocks_min = layout.assemble_f64(&x).unwrap().iter().map(min_eig).fold(f64::INFINITY, f64::min);
            let dense_ok = dense_min >= -1e-9;
            assert_eq!(dense_ok, blocks_min >= -1e-9, "n={n} dense {dense_min} blocks {blocks_min}");
            agree += 1;
            psd += dense_ok as usize;
        }
        assert!(psd > 20 && agree - psd > 20, "n={n}: {psd} PSD of {agree} (skipped {skipped})");
    }
}

#[test]
fn psd_input_gives_psd_blocks() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 1..=3 {
        let dim = 1 << (2 * n);
        for _ in 0..20 {
            let v = DMatrix::from_fn(dim, 3, |_, _| rng.random::<f64>() - 0.5);
            let x = symmetrize_small(&(&v * v.transpose()), n).unwrap();
            for block in assemble_blocks(&x, n).unwrap() {
                assert!(min_eig(&block) >= -1e-9);
            }
        }
    }
}

#[test]
fn single_qubit_maximally_mixed_moment_matrix() {
    let x = BTreeMap::from([(OrbitKey::new(0, 0, 0, 0), 1.0)]);
    for block in assemble_blocks(&x, 1).unwrap() {
        assert!(min_eig(&block) >= -1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn class_values_symmetric_under_transpose(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_symmetric(16, &mut rng);
        let x = symmetrize_small(&g, 2).unwrap();
        for (key, v) in &x {
            prop_assert!((v - x[&key.transposed()]).abs() < 1e-12);
        }
    }
}
