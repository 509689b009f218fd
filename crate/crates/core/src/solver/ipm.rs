//! Infeasible-start primal-dual path following with HKM directions and
//! Mehrotra predictor-corrector steps.
//!
//! Problem: maximize `cᵀx` s.t. `Σ_b ⟨A_kb, X_b⟩ + (G x)_k = b_k`, `X_b ⪰ 0`.
//! Dual: minimize `bᵀy` s.t. `S_b = Σ_k y_k A_kb ⪰ 0`, `Gᵀy = c`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

#[derive(Clone, Debug)]
pub(crate) struct DenseSdp {
    pub dims: Vec<usize>,
    /// `a[k][b]`, `None` when the block does not occur in row `k`.
    pub a: Vec<Vec<Option<DMatrix<f64>>>>,
    pub g: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: DVector<f64>,
}

impl DenseSdp {
    pub fn rows(&self) -> usize {
        self.b.len()
    }

    pub fn nfree(&self) -> usize {
        self.c.len()
    }

    fn apply(&self, xs: &[DMatrix<f64>]) -> DVector<f64> {
        DVector::from_iterator(
            self.rows(),
            self.a.iter().map(|row| row.iter().zip(xs).map(|(ak, x)| ak.as_ref().map_or(0.0, |ak| ak.dot(x))).sum()),
        )
    }

    fn adjoint(&self, y: &DVector<f64>) -> Vec<DMatrix<f64>> {
        let mut out: Vec<DMatrix<f64>> = self.dims.iter().map(|&d| DMatrix::zeros(d, d)).collect();
        for (k, row) in self.a.iter().enumerate() {
            for (o, ak) in out.iter_mut().zip(row) {
                if let Some(ak) = ak {
                    *o += ak * y[k];
                }
            }
        }
        out
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub(crate) enum Outcome {
    Converged,
    Stalled,
    Diverged,
    IterationLimit,
}

#[derive(Clone, Debug)]
pub(crate) struct IpmResult {
    pub outcome: Outcome,
    pub x: Vec<DMatrix<f64>>,
    pub free: DVector<f64>,
    pub y: DVector<f64>,
    pub iterations: usize,
    pub rel_primal: f64,
    pub rel_dual: f64,
    pub rel_gap: f64,
}

const STEP_FRACTION: f64 = 0.98;
const DIVERGENCE: f64 = 1e13;

fn sym(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// Largest `α` with `X + α dX ⪰ 0`, or `None` if `X` is not positive definite.
fn max_step(x: &DMatrix<f64>, dx: &DMatrix<f64>) -> Option<f64> {
    let l = x.clone().cholesky()?.unpack();
    let linv = l.solve_lower_triangular(&DMatrix::identity(x.nrows(), x.nrows()))?;
    let w = sym(&linv * dx * linv.transpose());
    let lmin = w.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
    Some(if lmin >= 0.0 { f64::INFINITY } else { -1.0 / lmin })
}

fn step_length(xs: &[DMatrix<f64>], dxs: &[DMatrix<f64>]) -> Option<f64> {
    let mut alpha = f64::INFINITY;
    for (x, dx) in xs.iter().zip(dxs) {
        alpha = alpha.min(max_step(x, dx)?);
    }
    Some((STEP_FRACTION * alpha).min(1.0))
}

fn inner(a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn frob(a: &[DMatrix<f64>]) -> f64 {
    a.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt()
}

struct Kkt {
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    m: usize,
}

impl Kkt {
    fn solve(&self, h: &DVector<f64>, rf: &DVector<f64>) -> Option<(DVector<f64>, DVector<f64>)> {
        let rhs = DVector::from_iterator(self.m + rf.len(), h.iter().chain(rf.iter()).copied());
        let sol = self.lu.solve(&rhs)?;
        if sol.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let dy = sol.rows(0, self.m).into_owned();
        let dx = -sol.rows(self.m, rf.len()).into_owned();
        Some((dy, dx))
    }
}

/// Row `k` of `stacked[b]` is `vec(A_kb)` (zero when absent).
fn stack(p: &DenseSdp) -> Vec<DMatrix<f64>> {
    p.dims
        .iter()
        .enumerate()
        .map(|(b, &d)| {
            let mut m = DMatrix::zeros(p.rows(), d * d);
            for (k, row) in p.a.iter().enumerate() {
                if let Some(ak) = &row[b] {
                    m.row_mut(k).copy_from_slice(ak.as_slice());
                }
            }
            m
        })
        .collect()
}

/// `[[M, G], [Gᵀ, -ε I]]` with the HKM Schur complement `M_kl = Σ_b tr(A_kb X_b A_lb S_b⁻¹)`.
fn factor(p: &DenseSdp, stacked: &[DMatrix<f64>], x: &[DMatrix<f64>], sinv: &[DMatrix<f64>], reg: f64) -> Kkt {
    let m = p.rows();
    let nf = p.nfree();
    let mut schur = DMatrix::zeros(m, m);
    for (b, &d) in p.dims.iter().enumerate() {
        let mut products = DMatrix::zeros(m, d * d);
        let rows: Vec<(usize, DMatrix<f64>)> = p
            .a
            .par_iter()
            .enumerate()
            .filter_map(|(k, row)| row[b].as_ref().map(|ak| (k, &x[b] * ak * &sinv[b])))
            .collect();
        if rows.is_empty() {
            continue;
        }
        for (k, pk) in rows {
            products.row_mut(k).copy_from_slice(pk.as_slice());
        }
        schur.gemm(1.0, &stacked[b], &products.transpose(), 1.0);
    }
    let mut k = DMatrix::zeros(m + nf, m + nf);
    k.view_mut((0, 0), (m, m)).copy_from(&((&schur + schur.transpose()) * 0.5));
    k.view_mut((0, m), (m, nf)).copy_from(&p.g);
    k.view_mut((m, 0), (nf, m)).copy_from(&p.g.transpose());
    for i in 0..nf {
        k[(m + i, m + i)] = -reg;
    }
    Kkt { lu: k.lu(), m }
}

/// `(dX, dy, dfree, dS)`.
type Direction = (Vec<DMatrix<f64>>, DVector<f64>, DVector<f64>, Vec<DMatrix<f64>>);

pub(crate) fn solve(p: &DenseSdp, tol: f64, max_iter: usize) -> IpmResult {
    let n_total: usize = p.dims.iter().sum();
    let nt = n_total.max(1) as f64;
    let bmax = p.b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let xi = 10f64.max(nt.sqrt()).max(nt * (1.0 + bmax));
    let eta = 10f64.max(nt.sqrt()).max(1.0 + p.c.norm());
    let mut x: Vec<DMatrix<f64>> = p.dims.iter().map(|&d| DMatrix::identity(d, d) * xi).collect();
    let mut s: Vec<DMatrix<f64>> = p.dims.iter().map(|&d| DMatrix::identity(d, d) * eta).collect();
    let mut free = DVector::zeros(p.nfree());
    let mut y = DVector::zeros(p.rows());
    let bnorm = 1.0 + p.b.norm();
    let cnorm = 1.0 + p.c.norm();

    let result = |outcome, x: Vec<DMatrix<f64>>, free: DVector<f64>, y: DVector<f64>, s: Vec<DMatrix<f64>>, it| {
        let rp = &p.b - p.apply(&x) - &p.g * &free;
        let aty = p.adjoint(&y);
        let rd: Vec<DMatrix<f64>> = aty.iter().zip(&s).map(|(a, s)| a - s).collect();
        let rf = &p.c - p.g.transpose() * &y;
        let primal = p.c.dot(&free);
        let dual = p.b.dot(&y);
        IpmResult {
            outcome,
            rel_primal: rp.norm() / bnorm,
            rel_dual: (frob(&rd) + rf.norm()) / cnorm,
            rel_gap: inner(&x, &s).abs().max((primal - dual).abs()) / (1.0 + primal.abs() + dual.abs()),
            x,
            free,
            y,
            iterations: it,
        }
    };

    let stacked = stack(p);
    let mut reg = 0.0;
    for it in 0..max_iter {
        let rp = &p.b - p.apply(&x) - &p.g * &free;
        let aty = p.adjoint(&y);
        let rd: Vec<DMatrix<f64>> = aty.iter().zip(&s).map(|(a, s)| a - s).collect();
        let rf = &p.c - p.g.transpose() * &y;
        let primal = p.c.dot(&free);
        let dual = p.b.dot(&y);
        let gap = inner(&x, &s);
        let rel_p = rp.norm() / bnorm;
        let rel_d = (frob(&rd) + rf.norm()) / cnorm;
        let rel_gap = gap.max((primal - dual).abs()) / (1.0 + primal.abs() + dual.abs());
        if rel_p <= tol && rel_d <= tol && rel_gap <= tol {
            return result(Outcome::Converged, x, free, y, s, it);
        }
        if frob(&x) > DIVERGENCE || y.norm() > DIVERGENCE {
            return result(Outcome::Diverged, x, free, y, s, it);
        }
        let mu = gap / nt;
        let Some(sinv) = s.iter().map(|s| s.clone().cholesky().map(|c| c.inverse())).collect::<Option<Vec<_>>>() else {
            return result(Outcome::Stalled, x, free, y, s, it);
        };
        let mut kkt = factor(p, &stacked, &x, &sinv, reg);

        // dX = Rc - sym(X dS S⁻¹), dS = A*(dy) + Rd.
        let direction = |kkt: &Kkt, rc: &[DMatrix<f64>]| -> Option<Direction> {
            let t: Vec<DMatrix<f64>> = rc.iter().zip(&x).zip(&rd).zip(&sinv).map(|(((rc, x), rd), si)| rc - x * rd * si).collect();
            let h = p.apply(&t) - &rp;
            let (dy, dfree) = kkt.solve(&h, &rf)?;
            let ds: Vec<DMatrix<f64>> = p.adjoint(&dy).into_iter().zip(&rd).map(|(a, rd)| a + rd).collect();
            let dx: Vec<DMatrix<f64>> = rc.iter().zip(&x).zip(&ds).zip(&sinv).map(|(((rc, x), ds), si)| rc - sym(x * ds * si)).collect();
            Some((dx, dfree, dy, ds))
        };

        let rc_aff: Vec<DMatrix<f64>> = x.iter().map(|x| -x).collect();
        let aff = match direction(&kkt, &rc_aff) {
            Some(d) => d,
            None if reg == 0.0 => {
                reg = 1e-10;
                kkt = factor(p, &stacked, &x, &sinv, reg);
                match direction(&kkt, &rc_aff) {
                    Some(d) => d,
                    None => return result(Outcome::Stalled, x, free, y, s, it),
                }
            }
            None => return result(Outcome::Stalled, x, free, y, s, it),
        };
        let (Some(ap), Some(ad)) = (step_length(&x, &aff.0), step_length(&s, &aff.3)) else {
            return result(Outcome::Stalled, x, free, y, s, it);
        };
        let x_aff: Vec<DMatrix<f64>> = x.iter().zip(&aff.0).map(|(x, d)| x + d * ap).collect();
        let s_aff: Vec<DMatrix<f64>> = s.iter().zip(&aff.3).map(|(s, d)| s + d * ad).collect();
        let mu_aff = inner(&x_aff, &s_aff) / nt;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        let rc: Vec<DMatrix<f64>> = x
            .iter()
            .zip(&sinv)
            .zip(aff.0.iter().zip(&aff.3))
            .map(|((x, si), (dxa, dsa))| si * (sigma * mu) - x - sym(dxa * dsa * si))
            .collect();
        let Some((dx, dfree, dy, ds)) = direction(&kkt, &rc) else {
            return result(Outcome::Stalled, x, free, y, s, it);
        };
        let (Some(ap), Some(ad)) = (step_length(&x, &dx), step_length(&s, &ds)) else {
            return result(Outcome::Stalled, x, free, y, s, it);
        };
        if ap < 1e-10 && ad < 1e-10 {
            return result(Outcome::Stalled, x, free, y, s, it);
        }
        for (x, d) in x.iter_mut().zip(&dx) {
            *x = sym(&*x + d * ap);
        }
        free += dfree * ap;
        y += dy * ad;
        for (s, d) in s.iter_mut().zip(&ds) {
            *s = sym(&*s + d * ad);
        }
    }
    result(Outcome::IterationLimit, x, free, y, s, max_iter)
}
