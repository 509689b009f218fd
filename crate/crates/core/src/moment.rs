//! Brute-force moment matrices of explicit separable ensembles.
//!
//! For `Φ = Σ_i p_i μ_i ⊗ μ_i` with pure `μ_i = |ψ_i⟩⟨ψ_i|` the moment matrix
//! is `Γ_ab = Σ_i p_i ⟨E_b⟩_i ⟨E_a⟩_i ⟨E_a E_b⟩_i`, indexed by Pauli strings
//! in enumeration order. This is the only module that tracks Pauli phases
//! (`Y = iXZ`); it is limited to `n <= 3`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::pauli::{enumerate_paulis, PauliString};
use crate::terwilliger::MAX_DENSE_QUBITS;

/// `E|ψ⟩` with `E|b⟩ = i^{#Y} (-1)^{popcount(b & z)} |b ⊕ x⟩`; qubit `k` is
/// bit `k` of the basis index.
pub fn apply_pauli(e: &PauliString, psi: &[Complex64]) -> Result<Vec<Complex64>> {
    let dim = 1usize << e.num_qubits();
    if psi.len() != dim {
        return Err(Error::DimensionMismatch(format!("state of length {} for {} qubits", psi.len(), e.num_qubits())));
    }
    let (x, z) = (e.x_bits() as usize, e.z_bits() as usize);
    let phase = match (x & z).count_ones() % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    for (b, amp) in psi.iter().enumerate() {
        let sign = if (b & z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        out[b ^ x] = phase * amp * sign;
    }
    Ok(out)
}

fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// `⟨ψ|E|ψ⟩`; real for every Pauli string.
pub fn pauli_expectation(e: &PauliString, psi: &[Complex64]) -> Result<Complex64> {
    Ok(inner(psi, &apply_pauli(e, psi)?))
}

#[derive(Clone, Debug)]
pub struct Ensemble {
    n: usize,
    terms: Vec<(f64, Vec<Complex64>)>,
}

impl Ensemble {
    /// Validates probabilities (nonnegative, summing to 1) and unit norms
    /// to `1e-12`.
    pub fn new(n: usize, terms: Vec<(f64, Vec<Complex64>)>) -> Result<Self> {
        if !(1..=MAX_DENSE_QUBITS).contains(&n) {
            return Err(Error::OutOfRange(format!("ensemble size n = {n} outside 1..={MAX_DENSE_QUBITS}")));
        }
        if terms.is_empty() {
            return Err(Error::Invalid("empty ensemble".into()));
        }
        let total: f64 = terms.iter().map(|(p, _)| p).sum();
        if terms.iter().any(|(p, _)| *p < 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::Invalid(format!("probabilities must be nonnegative and sum to 1 (sum {total})")));
        }
        for (_, psi) in &terms {
            if psi.len() != 1 << n {
                return Err(Error::DimensionMismatch(format!("state of length {} for {n} qubits", psi.len())));
            }
            let norm = inner(psi, psi).re;
            if (norm - 1.0).abs() > 1e-12 {
                return Err(Error::Invalid(format!("state norm² {norm} is not 1")));
            }
        }
        Ok(Self { n, terms })
    }

    /// Seeded mixture of normalized complex-Gaussian vectors with uniform
    /// random weights.
    pub fn random<R: Rng>(n: usize, size: usize, rng: &mut R) -> Result<Self> {
        let dim = 1usize << n;
        let mut weights: Vec<f64> = (0..size).map(|_| rng.random::<f64>() + 1e-3).collect();
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let terms = weights
            .into_iter()
            .map(|w| {
                let mut psi: Vec<Complex64> = (0..dim)
                    .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                    .collect();
                let norm = inner(&psi, &psi).re.sqrt();
                psi.iter_mut().for_each(|a| *a /= norm);
                (w, psi)
            })
            .collect();
        Self::new(n, terms)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(f64, Vec<Complex64>)] {
        &self.terms
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentMatrix {
    pub n: usize,
    pub entries: DMatrix<Complex64>,
}

impl MomentMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn real_part(&self) -> DMatrix<f64> {
        self.entries.map(|z| z.re)
    }
}

fn term_gamma(n: usize, psi: &[Complex64], paulis: &[PauliString]) -> Result<DMatrix<Complex64>> {
    let images: Vec<Vec<Complex64>> = paulis.iter().map(|e| apply_pauli(e, psi)).collect::<Result<_>>()?;
    let expect: Vec<f64> = images.iter().map(|v| inner(psi, v).re).collect();
    let dim = 1usize << (2 * n);
    Ok(DMatrix::from_fn(dim, dim, |a, b| inner(&images[a], &images[b]) * (expect[a] * expect[b])))
}

pub fn build_gamma(e: &Ensemble) -> Result<MomentMatrix> {
    let paulis = enumerate_paulis(e.n)?;
    let dim = paulis.len();
    let mut acc = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for (p, psi) in &e.terms {
        acc += term_gamma(e.n, psi, &paulis)? * Complex64::new(*p, 0.0);
    }
    Ok(MomentMatrix { n: e.n, entries: acc })
}

/// Largest violation of each structural property of a moment matrix.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ConstraintReport {
    /// `max(0, -λ_min)` of the Hermitian part.
    pub psd: f64,
    /// `|Γ_00 - 1|`.
    pub unit_corner: f64,
    /// `max_a |Γ_aa - Γ_a0|`.
    pub diagonal_first_column: f64,
    /// `max |Re Γ_ab|` over anticommuting pairs.
    pub anticommuting_real_part: f64,
    /// Largest imaginary part or negative real part on the diagonal.
    pub diagonal_real_nonnegative: f64,
    /// `max_a |Γ_aa - Σ_i p_i ⟨E_a⟩_i²|`, when the ensemble is known.
    pub diagonal_correlation: Option<f64>,
}

impl ConstraintReport {
    pub fn max_violation(&self) -> f64 {
        [
            self.psd,
            self.unit_corner,
            self.diagonal_first_column,
            self.anticommuting_real_part,
            self.diagonal_real_nonnegative,
            self.diagonal_correlation.unwrap_or(0.0),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_violation() <= tol
    }
}

pub fn check_gamma_constraints(g: &MomentMatrix, ensemble: Option<&Ensemble>) -> Result<ConstraintReport> {
    let paulis = enumerate_paulis(g.n)?;
    let dim = paulis.len();
    if g.dim() != dim || g.entries.ncols() != dim {
        return Err(Error::DimensionMismatch(format!("moment matrix must be {dim}x{dim}")));
    }
    let m = &g.entries;
    let hermitian = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let lambda_min = hermitian.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);

    let mut report = ConstraintReport {
        psd: (-lambda_min).max(0.0),
        unit_corner: (m[(0, 0)] - Complex64::new(1.0, 0.0)).norm(),
        ..Default::default()
    };
    for a in 0..dim {
        report.diagonal_first_column = report.diagonal_first_column.max((m[(a, a)] - m[(a, 0)]).norm());
        report.diagonal_real_nonnegative =
            report.diagonal_real_nonnegative.max(m[(a, a)].im.abs()).max((-m[(a, a)].re).max(0.0));
        for b in 0..dim {
            if paulis[a].anticommutes_unchecked(&paulis[b]) {
                report.anticommuting_real_part = report.anticommuting_real_part.max(m[(a, b)].re.abs());
            }
        }
    }
    if let Some(e) = ensemble {
        if e.n != g.n {
            return Err(Error::DimensionMismatch("ensemble and moment matrix sizes differ".into()));
        }
        let mut worst: f64 = 0.0;
        for (a, pauli) in paulis.iter().enumerate() {
            let mut target = 0.0;
            for (p, psi) in &e.terms {
                target += p * pauli_expectation(pauli, psi)?.re.powi(2);
            }
            worst = worst.max((m[(a, a)] - Complex64::new(target, 0.0)).norm());
        }
        report.diagonal_correlation = Some(worst);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn expectations() {
        let zero = vec![c(1.0), c(0.0)];
        assert_eq!(pauli_expectation(&p("Z"), &zero).unwrap(), c(1.0));
        assert_eq!(pauli_expectation(&p("X"), &zero).unwrap(), c(0.0));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = vec![c(h), c(0.0), c(0.0), c(h)];
        assert!((pauli_expectation(&p("XX"), &bell).unwrap() - c(1.0)).norm() < 1e-15);
        assert!((pauli_expectation(&p("YY"), &bell).unwrap() - c(-1.0)).norm() < 1e-15);
        assert!(pauli_expectation(&p("XX"), &zero).is_err());
    }

    #[test]
    fn y_phase_convention() {
        let zero = vec![c(1.0), c(0.0)];
        let y0 = apply_pauli(&p("Y"), &zero).unwrap();
        assert_eq!(y0, vec![c(0.0), Complex64::new(0.0, 1.0)]);
    }

    #[test]
    fn pure_zero_state() {
        let e = Ensemble::new(1, vec![(1.0, vec![c(1.0), c(0.0)])]).unwrap();
        let g = build_gamma(&e).unwrap();
        // Order I, X, Z, Y.
        for a in 0..4 {
            for b in 0..4 {
                let expected = if [0, 2].contains(&a) && [0, 2].contains(&b) { 1.0 } else { 0.0 };
                assert!((g.entries[(a, b)] - c(expected)).norm() < 1e-15, "({a},{b})");
            }
        }
        assert!(check_gamma_constraints(&g, Some(&e)).unwrap().passes(1e-12));
    }

    #[test]
    fn classical_mixture() {
        let e = Ensemble::new(1, vec![(0.5, vec![c(1.0), c(0.0)]), (0.5, vec![c(0.0), c(1.0)])]).unwrap();
        let g = build_gamma(&e).unwrap();
        assert!((g.entries[(0, 0)] - c(1.0)).norm() < 1e-15);
        assert!((g.entries[(2, 2)] - c(1.0)).norm() < 1e-15);
        // Γ_IZ = Σ p ⟨Z⟩² = 1, as Γ_ZZ = Γ_Z0 requires.
        assert!((g.entries[(0, 2)] - c(1.0)).norm() < 1e-15);
        assert!((g.entries[(2, 0)] - c(1.0)).norm() < 1e-15);
        assert!(g.entries[(0, 1)].norm() < 1e-15);
        assert!(g.entries[(1, 1)].norm() < 1e-15);
    }

    #[test]
    fn injected_faults() {
        let zero = MomentMatrix { n: 1, entries: DMatrix::from_element(4, 4, c(0.0)) };
        assert_eq!(check_gamma_constraints(&zero, None).unwrap().unit_corner, 1.0);

        let e = Ensemble::new(1, vec![(1.0, vec![c(1.0), c(0.0)])]).unwrap();
        let mut g = build_gamma(&e).unwrap();
        // X (index 1) and Z (index 2) anticommute.
        g.entries[(1, 2)] = c(0.5);
        assert_eq!(check_gamma_constraints(&g, None).unwrap().anticommuting_real_part, 0.5);
    }

    #[test]
    fn invalid_ensembles() {
        assert!(Ensemble::new(1, vec![(0.5, vec![c(1.0), c(0.0)])]).is_err());
        assert!(Ensemble::new(1, vec![(1.0, vec![c(2.0), c(0.0)])]).is_err());
        assert!(Ensemble::new(1, vec![(1.0, vec![c(1.0)])]).is_err());
        assert!(Ensemble::new(4, vec![(1.0, vec![c(1.0); 16])]).is_err());
    }
}
