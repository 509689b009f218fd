use num_complex::Complex64;
use qcert::moment::{build_gamma, check_gamma_constraints, Ensemble};
use qcert::pauli::OrbitKey;
use qcert::terwilliger::{assemble_blocks, expand_classes, symmetrize_small};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn random_ensembles_satisfy_every_constraint() {
    let mut rng = ChaCha8Rng::seed_from_u64(20240611);
    for n in 1..=2 {
        for trial in 0..100 {
            let size = 1 + trial % 5;
            let e = Ensemble::random(n, size, &mut rng).unwrap();
            let g = build_gamma(&e).unwrap();
            let report = check_gamma_constraints(&g, Some(&e)).unwrap();
            assert!(report.max_violation() <= 1e-10, "n={n} trial={trial}: {report:?}");
        }
    }
}

#[test]
fn gamma_is_affine_in_the_ensemble() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = Ensemble::random(2, 3, &mut rng).unwrap();
    let b = Ensemble::random(2, 2, &mut rng).unwrap();
    let w = 0.3;
    let mut terms: Vec<(f64, Vec<Complex64>)> = a.terms().iter().map(|(p, s)| (w * p, s.clone())).collect();
    terms.extend(b.terms().iter().map(|(p, s)| ((1.0 - w) * p, s.clone())));
    let mix = build_gamma(&Ensemble::new(2, terms).unwrap()).unwrap();
    let want = build_gamma(&a).unwrap().entries * Complex64::new(w, 0.0) + build_gamma(&b).unwrap().entries * Complex64::new(1.0 - w, 0.0);
    assert!((mix.entries - want).norm() < 1e-12);
}

#[test]
fn symmetrized_moments_feed_the_block_program() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 1..=2 {
        for _ in 0..25 {
            let e = Ensemble::random(n, 4, &mut rng).unwrap();
            let x = symmetrize_small(&build_gamma(&e).unwrap().real_part(), n).unwrap();
            assert!((x[&OrbitKey::new(0, 0, 0, 0)] - 1.0).abs() < 1e-12);
            for i in 1..=n {
                let (edge, diag) = (x[&OrbitKey::new(i, 0, 0, 0)], x[&OrbitKey::new(i, i, i, i)]);
                assert!((edge - diag).abs() < 1e-10, "n={n} i={i}");
            }
            for (key, v) in &x {
                if key.is_anticommuting() {
                    assert!(v.abs() < 1e-10, "{key}");
                }
            }
            for block in assemble_blocks(&x, n).unwrap() {
                let lmin = block.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
                assert!(lmin > -1e-9, "{lmin}");
            }
            let avg = expand_classes(&x, n).unwrap();
            let lmin = avg.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
            assert!(lmin > -1e-9);
        }
    }
}
