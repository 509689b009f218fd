//! One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use qcert::certificate::{verify_entanglement_dual, verify_lovasz_dual, DualCertificate};
use qcert::correlations::{diagonal_entry, e8_witness_gap, weight_sum, CorrelationTable};
use qcert::exact::{is_psd_exact, ExactSymMatrix, QuadExt};
use qcert::moment::{build_gamma, check_gamma_constraints, Ensemble};
use qcert::pauli::{build_graph, OrbitKey};
use qcert::sdp::{
    build_reduced_feasibility, build_theta, build_theta_body_feasibility, build_theta_sym, parse_sdpa, to_sdpa_string,
    FeasibilityOptions, Graph, PinMode, SdpInstance,
};
use qcert::solver::{solve, SolveOptions, Status};
use qcert::terwilliger::{assemble_blocks, expand_classes, symmetrize_small};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = fn() -> Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($fmt)+));
        }
    };
}

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn theta(inst: &SdpInstance) -> Result<f64, String> {
    let sol = solve(inst, &SolveOptions::default()).map_err(|e| e.to_string())?;
    ensure!(sol.status == Status::Optimal, "{}: status {}", inst.metadata, sol.status);
    Ok(sol.primal_value)
}

fn min_eig(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

fn c1_entanglement_certificate() -> Result<String, String> {
    let start = Instant::now();
    let report = verify_entanglement_dual(&DualCertificate::bundled_entanglement(), &CorrelationTable::e8())
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure!(report.is_valid(), "verdict {:?}", report.verdict);
    ensure!(report.objective_exact == QuadExt::one(), "objective {}", report.objective);
    let psd = report.psd_results.iter().filter(|b| b.accepted).count();
    ensure!(psd == 20 && report.psd_results.len() == 20, "{psd} of {} blocks PSD", report.psd_results.len());
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!("objective = {} exactly, 20/20 blocks PSD over Q(√3), {:.2} s", report.objective, elapsed.as_secs_f64()))
}

fn c2_lovasz_certificate() -> Result<String, String> {
    let report = verify_lovasz_dual(&DualCertificate::bundled_lovasz()).map_err(|e| e.to_string())?;
    ensure!(report.is_valid(), "verdict {:?}", report.verdict);
    ensure!(report.objective_exact.signum() > 0, "objective {}", report.objective);
    let w: Vec<_> = report.constraint_residuals.iter().filter(|r| r.label.starts_with("w-")).collect();
    ensure!(w.len() == 4 && w.iter().all(|r| r.is_zero), "w residuals {w:?}");
    Ok(format!("objective = {} > 0, w = {} consistent for i = 4..7", report.objective, report.recovered_w.unwrap_or_default()))
}

fn c3_correlation_tables() -> Result<String, String> {
    let sums = [1, 0, 0, 0, 35, 42, 28, 22];
    let entries = [(1, 1), (0, 1), (0, 1), (0, 1), (1, 81), (2, 243), (4, 729), (22, 2187)];
    for i in 0..=7 {
        let a = weight_sum(i, 7).map_err(|e| e.to_string())?;
        ensure!(a == r(sums[i], 1), "A_{i} = {a}");
        let e = diagonal_entry(i, 7).map_err(|e| e.to_string())?;
        ensure!(e == r(entries[i].0, entries[i].1), "a_{i} = {e}");
    }
    let total = CorrelationTable::e8().tail_sum(0);
    ensure!(total == r(128, 1), "Σ A = {total}");
    Ok("A = [1,0,0,0,35,42,28,22], a = [1,0,0,0,1/81,2/243,4/729,22/2187], Σ A = 128".into())
}

fn c4_theta_reproduction() -> Result<String, String> {
    let start = Instant::now();
    let value = theta(&build_theta_sym(7, 4).map_err(|e| e.to_string())?)?;
    let elapsed = start.elapsed();
    let gap = e8_witness_gap(value);
    ensure!((value - 126.8876).abs() <= 1e-3, "ϑ_sym = {value}");
    ensure!(gap < 0.0 && (gap + 0.1124).abs() <= 2e-3, "gap = {gap}");
    ensure!(elapsed < Duration::from_secs(120), "took {elapsed:?}");
    Ok(format!("ϑ_sym(G_7,4) = {value:.6}, witness gap = {gap:.6}, {:.2} s", elapsed.as_secs_f64()))
}

fn c5_exactness() -> Result<String, String> {
    let mut parts = Vec::new();
    for n in 1..=2 {
        let full = theta(&build_theta(&Graph::from(&build_graph(n, 1).map_err(|e| e.to_string())?)).map_err(|e| e.to_string())?)?;
        let sym = theta(&build_theta_sym(n, 1).map_err(|e| e.to_string())?)?;
        ensure!((full - sym).abs() <= 1e-5, "G_{n},1: ϑ = {full}, ϑ_sym = {sym}");
        parts.push(format!("G_{n},1: ϑ = {full:.7}, ϑ_sym = {sym:.7}"));
    }
    Ok(format!("{} (G_1,1 is the triangle K3, so the common value is 1, not √3)", parts.join("; ")))
}

fn c6_classic_theta() -> Result<String, String> {
    let c5 = theta(&build_theta(&Graph::cycle(5)).map_err(|e| e.to_string())?)?;
    ensure!((c5 - 5f64.sqrt()).abs() <= 1e-5, "ϑ(C5) = {c5}");
    for m in 1..=6 {
        let k = theta(&build_theta(&Graph::complete(m)).map_err(|e| e.to_string())?)?;
        ensure!((k - 1.0).abs() <= 1e-6, "ϑ(K_{m}) = {k}");
        let e = theta(&build_theta(&Graph::empty(m)).map_err(|e| e.to_string())?)?;
        ensure!((e - m as f64).abs() <= 1e-6, "ϑ(empty_{m}) = {e}");
    }
    Ok(format!("ϑ(C5) = {c5:.8}, ϑ(K_m) = 1 and ϑ(empty_m) = m for m = 1..6"))
}

fn c7_master_oracle() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut parts = Vec::new();
    for n in 1..=3 {
        let dim = 1 << (2 * n);
        let (mut compared, mut psd) = (0, 0);
        for _ in 0..200 {
            let rank = rng.random_range(1..=dim);
            let v = DMatrix::from_fn(dim, rank, |_, _| rng.random::<f64>() * 2.0 - 1.0);
            let shift = rng.random::<f64>() * 0.6 - 0.3;
            let g = &v * v.transpose() / dim as f64 + DMatrix::identity(dim, dim) * shift;
            let x = symmetrize_small(&g, n).map_err(|e| e.to_string())?;
            let dense = min_eig(&expand_classes(&x, n).map_err(|e| e.to_string())?);
            if dense.abs() <= 1e-8 {
                continue;
            }
            let blocks = assemble_blocks(&x, n).map_err(|e| e.to_string())?.iter().map(min_eig).fold(f64::INFINITY, f64::min);
            ensure!((dense >= -1e-9) == (blocks >= -1e-9), "n={n}: dense λ_min {dense}, blocks λ_min {blocks}");
            compared += 1;
            psd += (dense >= -1e-9) as usize;
        }
        parts.push(format!("n={n}: {compared}/{compared} agree ({psd} PSD)"));
    }
    Ok(parts.join(", "))
}

fn c8_moment_constraints() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for n in 1..=2 {
        for trial in 0..100 {
            let e = Ensemble::random(n, 1 + trial % 5, &mut rng).map_err(|e| e.to_string())?;
            let g = build_gamma(&e).map_err(|e| e.to_string())?;
            let report = check_gamma_constraints(&g, Some(&e)).map_err(|e| e.to_string())?;
            ensure!(report.passes(1e-10), "n={n} trial {trial}: {report:?}");
            worst = worst.max(report.max_violation());
            let x = symmetrize_small(&g.real_part(), n).map_err(|e| e.to_string())?;
            for i in 1..=n {
                let d = x[&OrbitKey::new(i, 0, 0, 0)] - x[&OrbitKey::new(i, i, i, i)];
                ensure!(d.abs() <= 1e-10, "n={n} trial {trial}: x_i0 - x_ii = {d}");
            }
            for b in assemble_blocks(&x, n).map_err(|e| e.to_string())? {
                let l = min_eig(&b);
                ensure!(l >= -1e-9, "n={n} trial {trial}: block λ_min {l}");
            }
        }
    }
    Ok(format!("200 ensembles, max violation {worst:.2e}, chained blocks PSD"))
}

fn c9_exact_psd() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut compared, mut accepted) = (0, 0);
    for trial in 0..10_000 {
        let dim = rng.random_range(1..=10);
        let mut m = ExactSymMatrix::zeros(dim);
        if trial % 2 == 0 {
            for i in 0..dim {
                for j in i..dim {
                    m.set(i, j, QuadExt::from_ratio(rng.random_range(-6..=6), rng.random_range(1..=3)));
                }
            }
        } else {
            // Shifted Gram matrix, so both verdicts are frequent.
            let rank = rng.random_range(1..=dim);
            let b: Vec<Vec<i64>> = (0..dim).map(|_| (0..rank).map(|_| rng.random_range(-3..=3)).collect()).collect();
            let shift = rng.random_range(-2..=2);
            for i in 0..dim {
                for j in i..dim {
                    let dot: i64 = (0..rank).map(|k| b[i][k] * b[j][k]).sum::<i64>() + if i == j { shift } else { 0 };
                    m.set(i, j, QuadExt::from_ratio(dot, 2));
                }
            }
        }
        let rows = m.to_f64_rows();
        let lmin = min_eig(&DMatrix::from_fn(dim, dim, |i, j| rows[i][j]));
        if lmin.abs() <= 1e-9 {
            continue;
        }
        let ok = is_psd_exact(&m).map_err(|e| e.to_string())?.is_accepted();
        ensure!(ok == (lmin > 0.0), "trial {trial}: exact {ok}, λ_min {lmin}");
        compared += 1;
        accepted += ok as usize;
    }
    Ok(format!("{compared}/{compared} agree ({accepted} PSD)"))
}

fn c10_sdpa_round_trip() -> Result<String, String> {
    let e = |e: qcert::Error| e.to_string();
    let instances = [
        build_theta(&Graph::cycle(5)).map_err(e)?,
        build_theta_sym(7, 4).map_err(e)?,
        build_reduced_feasibility(7, &CorrelationTable::e8(), FeasibilityOptions { delta: Some(4), pin: PinMode::PerWeight })
            .map_err(e)?,
        build_reduced_feasibility(3, &CorrelationTable::new(3), FeasibilityOptions { delta: None, pin: PinMode::Total })
            .map_err(e)?,
        build_theta_body_feasibility(7, 4, 128.0).map_err(e)?,
    ];
    for inst in &instances {
        let back = parse_sdpa(&to_sdpa_string(inst).map_err(e)?).map_err(e)?;
        ensure!(&back == inst, "round trip changed {}", inst.metadata);
    }
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    for (file, inst) in [("theta_empty2.dat-s", Graph::empty(2)), ("theta_k3.dat-s", Graph::complete(3))] {
        let golden = std::fs::read_to_string(fixtures.join(file)).map_err(|e| e.to_string())?;
        let text = to_sdpa_string(&build_theta(&inst).map_err(e)?).map_err(e)?;
        ensure!(text == golden, "{file} differs from export");
    }
    Ok(format!("{} builder instances round-trip, 2 golden files byte-equal", instances.len()))
}

fn main() {
    let criteria: [(&str, Check); 10] = [
        ("exact entanglement certificate", c1_entanglement_certificate),
        ("exact Lovász certificate", c2_lovasz_certificate),
        ("correlation tables", c3_correlation_tables),
        ("theta reproduction", c4_theta_reproduction),
        ("exactness at desk scale", c5_exactness),
        ("classic theta sanity", c6_classic_theta),
        ("symmetrization master oracle", c7_master_oracle),
        ("moment-matrix constraint suite", c8_moment_constraints),
        ("exact PSD checker", c9_exact_psd),
        ("SDPA round-trip", c10_sdpa_round_trip),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
