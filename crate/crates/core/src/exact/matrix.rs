use serde::Serialize;

use super::field::{qsign, QuadExt};
use crate::error::{Error, Result};

/// Symmetric matrix over `Q(√3)`, stored densely in row-major order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactSymMatrix {
    dim: usize,
    entries: Vec<QuadExt>,
}

impl ExactSymMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: vec![QuadExt::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = QuadExt::one();
        }
        m
    }

    /// Rejects ragged or non-symmetric input.
    pub fn from_rows(rows: Vec<Vec<QuadExt>>) -> Result<Self> {
        let dim = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch(format!("row of length {} in {dim}x{dim} matrix", r.len())));
        }
        let entries: Vec<QuadExt> = rows.into_iter().flatten().collect();
        for i in 0..dim {
            for j in i + 1..dim {
                if entries[i * dim + j] != entries[j * dim + i] {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(Self { dim, entries })
    }

    /// Builds from the upper triangle in row-major order (`dim(dim+1)/2` values).
    pub fn from_upper_triangle(dim: usize, upper: Vec<QuadExt>) -> Result<Self> {
        if upper.len() != dim * (dim + 1) / 2 {
            return Err(Error::DimensionMismatch(format!(
                "{} upper-triangle entries for dimension {dim}",
                upper.len()
            )));
        }
        let mut m = Self::zeros(dim);
        let mut it = upper.into_iter();
        for i in 0..dim {
            for j in i..dim {
                m.set(i, j, it.next().expect("length checked"));
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &QuadExt {
        &self.entries[i * self.dim + j]
    }

    /// Sets `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, v: QuadExt) {
        self.entries[j * self.dim + i] = v.clone();
        self.entries[i * self.dim + j] = v;
    }

    pub fn upper_triangle(&self) -> impl Iterator<Item = &QuadExt> + '_ {
        (0..self.dim).flat_map(move |i| (i..self.dim).map(move |j| self.get(i, j)))
    }

    pub fn map(&self, f: impl Fn(&QuadExt) -> QuadExt) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(f).collect() }
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|i| (0..self.dim).map(|j| self.get(i, j).to_f64()).collect()).collect()
    }
}

/// Factors `M = L D Lᵀ` recorded by the elimination; `L` is unit lower
/// triangular, stored row-major with the implicit unit diagonal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ldl {
    pub dim: usize,
    pub lower: Vec<QuadExt>,
    pub pivots: Vec<QuadExt>,
}

impl Ldl {
    pub fn l(&self, i: usize, j: usize) -> QuadExt {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => QuadExt::one(),
            std::cmp::Ordering::Less => QuadExt::zero(),
            std::cmp::Ordering::Greater => self.lower[i * self.dim + j].clone(),
        }
    }

    pub fn reconstruct(&self) -> ExactSymMatrix {
        let mut m = ExactSymMatrix::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..=i {
                let mut acc = QuadExt::zero();
                for k in 0..=j {
                    acc += &(self.l(i, k) * &self.pivots[k] * self.l(j, k));
                }
                m.set(i, j, acc);
            }
        }
        m
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum PsdFailure {
    /// Elimination reached a negative pivot.
    NegativePivot { index: usize, value: String },
    /// A zero pivot with a nonzero entry in its row; `minor` is the
    /// offending 2×2 principal submatrix of the current Schur complement,
    /// which has negative determinant.
    ZeroPivotNonzeroRow { pivot: usize, column: usize, minor: [[String; 2]; 2] },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PsdVerdict {
    Accepted(Ldl),
    Rejected(PsdFailure),
}

impl PsdVerdict {
    pub fn is_accepted(&self) -> bool {
        matches!(self, PsdVerdict::Accepted(_))
    }
}

/// Symmetric Gaussian elimination in diagonal order. A positive pivot is
/// eliminated, a zero pivot requires a zero row, a negative pivot rejects.
pub fn is_psd_exact(m: &ExactSymMatrix) -> Result<PsdVerdict> {
    let n = m.dim();
    for i in 0..n {
        for j in i + 1..n {
            if m.get(i, j) != m.get(j, i) {
                return Err(Error::NotSymmetric { row: i, col: j });
            }
        }
    }
    let mut work = m.entries.clone();
    let mut lower = vec![QuadExt::zero(); n * n];
    let mut pivots = Vec::with_capacity(n);
    for k in 0..n {
        let pivot = work[k * n + k].clone();
        match qsign(&pivot) {
            -1 => {
                return Ok(PsdVerdict::Rejected(PsdFailure::NegativePivot { index: k, value: pivot.to_string() }));
            }
            0 => {
                if let Some(j) = (k + 1..n).find(|&j| !work[k * n + j].is_zero()) {
                    let minor = [
                        [pivot.to_string(), work[k * n + j].to_string()],
                        [work[j * n + k].to_string(), work[j * n + j].to_string()],
                    ];
                    return Ok(PsdVerdict::Rejected(PsdFailure::ZeroPivotNonzeroRow { pivot: k, column: j, minor }));
                }
            }
            _ => {
                let inv = pivot.recip()?;
                for i in k + 1..n {
                    if work[i * n + k].is_zero() {
                        continue;
                    }
                    let l = &work[i * n + k] * &inv;
                    for j in k + 1..=i {
                        let delta = &l * &work[k * n + j];
                        work[i * n + j] -= &delta;
                        if j != i {
                            work[j * n + i] = work[i * n + j].clone();
                        }
                    }
                    lower[i * n + k] = l;
                }
            }
        }
        pivots.push(pivot);
    }
    Ok(PsdVerdict::Accepted(Ldl { dim: n, lower, pivots }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> QuadExt {
        s.parse().unwrap()
    }

    fn mat(rows: &[&[&str]]) -> ExactSymMatrix {
        ExactSymMatrix::from_rows(rows.iter().map(|r| r.iter().map(|s| q(s)).collect()).collect()).unwrap()
    }

    #[test]
    fn identity_accepted() {
        for d in 0..5 {
            assert!(is_psd_exact(&ExactSymMatrix::identity(d)).unwrap().is_accepted());
        }
    }

    #[test]
    fn zero_pivot_with_nonzero_row() {
        let v = is_psd_exact(&mat(&[&["0", "1"], &["1", "0"]])).unwrap();
        match v {
            PsdVerdict::Rejected(PsdFailure::ZeroPivotNonzeroRow { pivot: 0, column: 1, minor }) => {
                assert_eq!(minor[0][1], "1");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sqrt3_off_diagonal() {
        let m = mat(&[&["2", "0+1*z"], &["0+1*z", "2"]]);
        let PsdVerdict::Accepted(ldl) = is_psd_exact(&m).unwrap() else { panic!() };
        assert_eq!(ldl.pivots, vec![q("2"), q("1/2")]);
        assert_eq!(ldl.reconstruct(), m);
    }

    #[test]
    fn negative_pivot() {
        let m = mat(&[&["1", "2"], &["2", "1"]]);
        assert!(matches!(
            is_psd_exact(&m).unwrap(),
            PsdVerdict::Rejected(PsdFailure::NegativePivot { index: 1, .. })
        ));
    }

    #[test]
    fn zero_pivot_with_zero_row_is_skipped() {
        let m = mat(&[&["0", "0", "0"], &["0", "1", "1"], &["0", "1", "1"]]);
        let PsdVerdict::Accepted(ldl) = is_psd_exact(&m).unwrap() else { panic!() };
        assert_eq!(ldl.reconstruct(), m);
    }

    #[test]
    fn non_symmetric_rejected() {
        let rows = vec![vec![q("1"), q("2")], vec![q("3"), q("1")]];
        assert!(matches!(ExactSymMatrix::from_rows(rows), Err(Error::NotSymmetric { .. })));
        assert!(ExactSymMatrix::from_upper_triangle(2, vec![q("1"), q("2")]).is_err());
    }
}
