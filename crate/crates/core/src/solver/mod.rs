//! Dense primal-dual interior point solver for [`SdpInstance`]s.
//!
//! Solving runs in three stages:
//!
//! 1. Presolve. Constraint rows are normalized and re-expressed in an
//!    orthonormal basis of their row space, which drops dependent rows.
//!    Inconsistent systems are rejected. Scalar variables fixed by the
//!    equalities are substituted. Block rows whose diagonal entry is forced
//!    to zero are deleted, since they vanish in every PSD solution.
//! 2. Interior point iterations with HKM directions and Mehrotra
//!    predictor-corrector steps.
//! 3. Phase I, for feasibility instances and failed solves. It substitutes
//!    `X_b = Z_b - s I` and minimizes `s` subject to `s >= -1`. The instance
//!    is flagged `infeasible_suspected` when the optimal shift exceeds
//!    [`SolveOptions::infeasibility_threshold`]. This is a numerical
//!    heuristic, not a proof.
//!
//! Sign conventions: the primal maximizes `cᵀx`. The dual minimizes `bᵀy`
//! with `S_b = Σ_k y_k A_kb ⪰ 0` and `Gᵀy = c`. Weak duality reads
//! `primal_value <= dual_value`.

mod ipm;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sdp::{SdpInstance, Term};
use ipm::{DenseSdp, Outcome};

pub const MAX_BLOCK_DIM: usize = 256;
pub const MAX_CONSTRAINTS: usize = 4000;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    InfeasibleSuspected,
    IterationLimit,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Optimal => "optimal",
            Status::InfeasibleSuspected => "infeasible_suspected",
            Status::IterationLimit => "iteration_limit",
        })
    }
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Phase-I shifts above this value flag the instance as infeasible.
    pub infeasibility_threshold: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 200, infeasibility_threshold: 1e-7 }
    }
}

/// Relative residuals measured on the original (unreduced) instance.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct Residuals {
    /// `‖b - A(X) - Gx‖ / (1 + ‖b‖)`.
    pub primal: f64,
    /// `‖c - Gᵀy‖ / (1 + ‖c‖)` plus the most negative eigenvalue of the dual slack.
    pub dual: f64,
    /// `|primal - dual| / (1 + |primal| + |dual|)`.
    pub gap: f64,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub status: Status,
    pub primal_value: f64,
    pub dual_value: f64,
    /// Scalar variables, indexed like `SdpInstance::variables`.
    pub x: Vec<f64>,
    pub block_matrices: Vec<DMatrix<f64>>,
    /// Multipliers, one per instance constraint.
    pub dual_y: Vec<f64>,
    /// `Σ_k y_k A_kb`; rows removed by presolve are zero.
    pub dual_slacks: Vec<DMatrix<f64>>,
    pub residuals: Residuals,
    pub iterations: usize,
    /// Optimal phase-I shift, when phase I ran.
    pub infeasibility_margin: Option<f64>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolutionSummary {
    pub status: Status,
    pub primal_value: f64,
    pub dual_value: f64,
    pub residuals: Residuals,
    pub iterations: usize,
    pub infeasibility_margin: Option<f64>,
    pub note: Option<String>,
}

impl Solution {
    pub fn summary(&self) -> SolutionSummary {
        SolutionSummary {
            status: self.status,
            primal_value: self.primal_value,
            dual_value: self.dual_value,
            residuals: self.residuals,
            iterations: self.iterations,
            infeasibility_margin: self.infeasibility_margin,
            note: self.note.clone(),
        }
    }
}

/// Symmetric matrix of `Σ coeff · entry` for one block, entries given as `(row, col, coeff)`.
fn entry_matrix(dim: usize, entries: impl IntoIterator<Item = (usize, usize, f64)>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(dim, dim);
    for (i, j, c) in entries {
        if i == j {
            m[(i, i)] += c;
        } else {
            m[(i, j)] += c / 2.0;
            m[(j, i)] += c / 2.0;
        }
    }
    m
}

/// `Σ_k y_k A_kb` for the original constraints.
pub fn dual_slack(inst: &SdpInstance, y: &[f64]) -> Vec<DMatrix<f64>> {
    let mut out: Vec<DMatrix<f64>> = inst.blocks.iter().map(|b| DMatrix::zeros(b.dim, b.dim)).collect();
    for (con, &yk) in inst.constraints.iter().zip(y) {
        for &(term, c) in con.terms() {
            if let Term::Entry { block, row, col } = term {
                let m = &mut out[block];
                if row == col {
                    m[(row, row)] += yk * c;
                } else {
                    m[(row, col)] += yk * c / 2.0;
                    m[(col, row)] += yk * c / 2.0;
                }
            }
        }
    }
    out
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
enum Column {
    Entry { block: usize, row: usize, col: usize },
    Free(usize),
}

/// Dense normalized constraint matrix over all columns.
struct Presolve {
    columns: Vec<Column>,
    /// Row-normalized constraint matrix and right-hand side.
    a: DMatrix<f64>,
    b: DVector<f64>,
    row_scale: DVector<f64>,
    active: Vec<bool>,
    /// Values of substituted scalar variables.
    fixed: Vec<Option<f64>>,
    /// `kept[b][r]` is false for deleted block rows.
    kept: Vec<Vec<bool>>,
}

enum PresolveOutcome {
    Reduced(Box<Reduced>),
    Infeasible(String),
}

struct Reduced {
    pre: Presolve,
    dense: DenseSdp,
    /// Maps reduced `y` to normalized original rows: `y_norm = t · y_red`.
    t: DMatrix<f64>,
    /// Reduced block index -> (original block, kept rows).
    block_map: Vec<(usize, Vec<usize>)>,
    /// Reduced free index -> original variable.
    free_map: Vec<usize>,
}

const RANK_TOL: f64 = 1e-10;
const DETERMINED_TOL: f64 = 1e-9;
const VALUE_TOL: f64 = 1e-9;

struct RowSpace {
    u: DMatrix<f64>,
    sigma: Vec<f64>,
    v: DMatrix<f64>,
}

fn row_space(a: &DMatrix<f64>) -> RowSpace {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return RowSpace { u: DMatrix::zeros(m, 0), sigma: Vec::new(), v: DMatrix::zeros(n, 0) };
    }
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested Vᵀ");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > RANK_TOL * smax.max(1.0)).collect();
    let u_r = DMatrix::from_fn(m, keep.len(), |i, j| u[(i, keep[j])]);
    let v_r = DMatrix::from_fn(n, keep.len(), |i, j| vt[(keep[j], i)]);
    RowSpace { u: u_r, sigma: keep.iter().map(|&i| svd.singular_values[i]).collect(), v: v_r }
}

impl Presolve {
    fn new(inst: &SdpInstance) -> Self {
        let mut columns = Vec::new();
        let mut index = std::collections::HashMap::new();
        for (b, spec) in inst.blocks.iter().enumerate() {
            for row in 0..spec.dim {
                for col in row..spec.dim {
                    index.insert(Term::Entry { block: b, row, col }, columns.len());
                    columns.push(Column::Entry { block: b, row, col });
                }
            }
        }
        for v in 0..inst.variables.len() {
            index.insert(Term::Var(v), columns.len());
            columns.push(Column::Free(v));
        }
        let m = inst.constraints.len();
        let mut a = DMatrix::zeros(m, columns.len());
        let mut b = DVector::zeros(m);
        let mut row_scale = DVector::from_element(m, 1.0);
        for (k, con) in inst.constraints.iter().enumerate() {
            for &(term, c) in con.terms() {
                a[(k, index[&term])] += c;
            }
            let norm = a.row(k).norm();
            if norm > 0.0 {
                row_scale[k] = 1.0 / norm;
                a.row_mut(k).scale_mut(1.0 / norm);
            }
            b[k] = con.rhs * row_scale[k];
        }
        Self {
            active: vec![true; columns.len()],
            fixed: vec![None; inst.variables.len()],
            kept: inst.blocks.iter().map(|s| vec![true; s.dim]).collect(),
            columns,
            a,
            b,
            row_scale,
        }
    }

    fn active_columns(&self) -> Vec<usize> {
        (0..self.columns.len()).filter(|&j| self.active[j]).collect()
    }

    /// Right-hand side after substituting fixed variables.
    fn adjusted_rhs(&self) -> DVector<f64> {
        let mut b = self.b.clone();
        for (j, col) in self.columns.iter().enumerate() {
            if let Column::Free(v) = col {
                if let Some(val) = self.fixed[*v] {
                    b.axpy(-val, &self.a.column(j), 1.0);
                }
            }
        }
        b
    }

    fn run(mut self, inst: &SdpInstance) -> Result<PresolveOutcome> {
        for (k, con) in inst.constraints.iter().enumerate() {
            if con.is_empty() && con.rhs != 0.0 {
                return Ok(PresolveOutcome::Infeasible(format!("constraint {k} reads 0 = {}", con.rhs)));
            }
        }
        for (j, col) in self.columns.iter().enumerate() {
            if let Column::Free(v) = *col {
                if self.a.column(j).iter().all(|&x| x == 0.0) {
                    if inst.objective.get(&v).is_some_and(|&c| c != 0.0) {
                        return Err(Error::Invalid(format!("objective unbounded: {} occurs in no constraint", inst.variables[v])));
                    }
                    self.fixed[v] = Some(0.0);
                    self.active[j] = false;
                }
            }
        }
        loop {
            let cols = self.active_columns();
            let sub = self.a.select_columns(&cols);
            let rhs = self.adjusted_rhs();
            let rs = row_space(&sub);
            let coeffs = DVector::from_iterator(rs.sigma.len(), rs.sigma.iter().enumerate().map(|(i, s)| rs.u.column(i).dot(&rhs) / s));
            let x0 = &rs.v * &coeffs;
            let resid = (&sub * &x0 - &rhs).norm();
            if resid > 1e-8 * (1.0 + rhs.norm()) {
                return Ok(PresolveOutcome::Infeasible(format!("equality constraints are inconsistent (residual {resid:.3e})")));
            }
            let mut changed = false;
            for (pos, &j) in cols.iter().enumerate() {
                if 1.0 - rs.v.row(pos).norm_squared() > DETERMINED_TOL {
                    continue;
                }
                let value = x0[pos];
                match self.columns[j] {
                    Column::Entry { block, row, col } if row == col => {
                        if value < -VALUE_TOL {
                            return Ok(PresolveOutcome::Infeasible(format!(
                                "diagonal entry ({row}, {row}) of block {} is forced to {value:.3e}",
                                inst.blocks[block].label
                            )));
                        }
                        if value.abs() <= VALUE_TOL && self.kept[block][row] {
                            self.kept[block][row] = false;
                            for (jj, c) in self.columns.iter().enumerate() {
                                if let Column::Entry { block: b2, row: r2, col: c2 } = *c {
                                    if b2 == block && (r2 == row || c2 == row) {
                                        self.active[jj] = false;
                                    }
                                }
                            }
                            changed = true;
                        }
                    }
                    Column::Free(v) => {
                        self.fixed[v] = Some(value);
                        self.active[j] = false;
                        changed = true;
                    }
                    Column::Entry { .. } => {}
                }
            }
            if !changed {
                break;
            }
        }
        self.reduce(inst).map(|r| PresolveOutcome::Reduced(Box::new(r)))
    }

    fn reduce(self, inst: &SdpInstance) -> Result<Reduced> {
        let cols = self.active_columns();
        let sub = self.a.select_columns(&cols);
        let rhs = self.adjusted_rhs();
        let rs = row_space(&sub);
        let r = rs.sigma.len();

        let mut block_map = Vec::new();
        let mut new_index = vec![None; inst.blocks.len()];
        for (b, kept) in self.kept.iter().enumerate() {
            let rows: Vec<usize> = (0..kept.len()).filter(|&i| kept[i]).collect();
            if !rows.is_empty() {
                new_index[b] = Some(block_map.len());
                block_map.push((b, rows));
            }
        }
        let position = |b: usize, i: usize| block_map[new_index[b].unwrap()].1.binary_search(&i).unwrap();
        let free_map: Vec<usize> = (0..inst.variables.len()).filter(|&v| self.fixed[v].is_none()).collect();
        let free_pos = |v: usize| free_map.binary_search(&v).unwrap();

        let dims: Vec<usize> = block_map.iter().map(|(_, rows)| rows.len()).collect();
        let mut a = Vec::with_capacity(r);
        let mut g = DMatrix::zeros(r, free_map.len());
        for k in 0..r {
            let mut per_block: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); dims.len()];
            for (pos, &j) in cols.iter().enumerate() {
                let coeff = rs.v[(pos, k)];
                if coeff == 0.0 {
                    continue;
                }
                match self.columns[j] {
                    Column::Entry { block, row, col } => {
                        let nb = new_index[block].unwrap();
                        per_block[nb].push((position(block, row), position(block, col), coeff));
                    }
                    Column::Free(v) => g[(k, free_pos(v))] = coeff,
                }
            }
            a.push(
                per_block
                    .into_iter()
                    .zip(&dims)
                    .map(|(e, &d)| if e.is_empty() { None } else { Some(entry_matrix(d, e)) })
                    .collect(),
            );
        }
        let b = DVector::from_iterator(r, (0..r).map(|k| rs.u.column(k).dot(&rhs) / rs.sigma[k]));
        let c = DVector::from_iterator(free_map.len(), free_map.iter().map(|v| inst.objective.get(v).copied().unwrap_or(0.0)));
        let t = DMatrix::from_fn(rs.u.nrows(), r, |i, k| rs.u[(i, k)] / rs.sigma[k]);
        Ok(Reduced { dense: DenseSdp { dims, a, g, b, c }, pre: self, t, block_map, free_map })
    }
}

impl Reduced {
    fn expand_primal(&self, inst: &SdpInstance, xs: &[DMatrix<f64>], free: &DVector<f64>) -> (Vec<DMatrix<f64>>, Vec<f64>) {
        let mut blocks: Vec<DMatrix<f64>> = inst.blocks.iter().map(|b| DMatrix::zeros(b.dim, b.dim)).collect();
        for ((orig, rows), x) in self.block_map.iter().zip(xs) {
            for (i, &ri) in rows.iter().enumerate() {
                for (j, &rj) in rows.iter().enumerate() {
                    blocks[*orig][(ri, rj)] = x[(i, j)];
                }
            }
        }
        let mut vars: Vec<f64> = self.pre.fixed.iter().map(|v| v.unwrap_or(0.0)).collect();
        for (pos, &v) in self.free_map.iter().enumerate() {
            vars[v] = free[pos];
        }
        (blocks, vars)
    }

    /// Original-row multipliers: `t · y_red`, corrected so that `Gᵀy = c` also
    /// holds on substituted variables.
    fn expand_dual(&self, inst: &SdpInstance, y_red: &DVector<f64>) -> Vec<f64> {
        let mut y_norm = &self.t * y_red;
        let fixed_cols: Vec<(usize, usize)> = self
            .pre
            .columns
            .iter()
            .enumerate()
            .filter_map(|(j, c)| match *c {
                Column::Free(v) if self.pre.fixed[v].is_some() => Some((j, v)),
                _ => None,
            })
            .collect();
        if !fixed_cols.is_empty() && !inst.objective.is_empty() {
            let mut rows: Vec<usize> = self.pre.active_columns();
            rows.extend(fixed_cols.iter().map(|&(j, _)| j));
            let at = self.pre.a.select_columns(&rows).transpose();
            let current = &at * &y_norm;
            let mut target = DVector::zeros(rows.len());
            let nact = rows.len() - fixed_cols.len();
            for (i, &(_, v)) in fixed_cols.iter().enumerate() {
                target[nact + i] = inst.objective.get(&v).copied().unwrap_or(0.0) - current[nact + i];
            }
            let rs = row_space(&at);
            let coeffs = DVector::from_iterator(rs.sigma.len(), rs.sigma.iter().enumerate().map(|(i, s)| rs.u.column(i).dot(&target) / s));
            y_norm += &rs.v * coeffs;
        }
        y_norm.iter().zip(self.pre.row_scale.iter()).map(|(y, s)| y * s).collect()
    }
}

fn check_guards(inst: &SdpInstance) -> Result<()> {
    inst.validate()?;
    if let Some(b) = inst.blocks.iter().find(|b| b.dim > MAX_BLOCK_DIM) {
        return Err(Error::SizeGuard(format!("block {} has dimension {} > {MAX_BLOCK_DIM}", b.label, b.dim)));
    }
    if inst.constraints.len() > MAX_CONSTRAINTS {
        return Err(Error::SizeGuard(format!("{} constraints > {MAX_CONSTRAINTS}", inst.constraints.len())));
    }
    Ok(())
}

/// Phase-I program: blocks `Z_b` plus a `1 × 1` block `u`, free variables plus `s`;
/// rows `⟨A_k, Z⟩ - s Σ_b tr(A_kb) + G x = b_k` and `u - s = 1`; maximize `-s`.
fn phase_one(p: &DenseSdp) -> DenseSdp {
    let m = p.rows();
    let nf = p.nfree();
    let mut dims = p.dims.clone();
    dims.push(1);
    let mut a: Vec<Vec<Option<DMatrix<f64>>>> = p
        .a
        .iter()
        .map(|row| {
            let mut r = row.clone();
            r.push(None);
            r
        })
        .collect();
    let mut extra: Vec<Option<DMatrix<f64>>> = vec![None; p.dims.len()];
    extra.push(Some(DMatrix::from_element(1, 1, 1.0)));
    a.push(extra);
    let mut g = DMatrix::zeros(m + 1, nf + 1);
    g.view_mut((0, 0), (m, nf)).copy_from(&p.g);
    for (k, row) in p.a.iter().enumerate() {
        g[(k, nf)] = -row.iter().flatten().map(|ak| ak.trace()).sum::<f64>();
    }
    g[(m, nf)] = -1.0;
    let mut b = p.b.clone().resize_vertically(m + 1, 0.0);
    b[m] = 1.0;
    let mut c = DVector::zeros(nf + 1);
    c[nf] = -1.0;
    DenseSdp { dims, a, g, b, c }
}

fn residuals(inst: &SdpInstance, blocks: &[DMatrix<f64>], x: &[f64], y: &[f64], slacks: &[DMatrix<f64>], primal: f64, dual: f64) -> Residuals {
    let mut rp = 0.0;
    let mut bn = 0.0;
    for con in &inst.constraints {
        let lhs: f64 = con
            .terms()
            .iter()
            .map(|&(t, c)| match t {
                Term::Var(v) => c * x[v],
                Term::Entry { block, row, col } => c * blocks[block][(row, col)],
            })
            .sum();
        rp += (con.rhs - lhs).powi(2);
        bn += con.rhs * con.rhs;
    }
    let mut gty = vec![0.0; inst.variables.len()];
    for (con, &yk) in inst.constraints.iter().zip(y) {
        for &(t, c) in con.terms() {
            if let Term::Var(v) = t {
                gty[v] += c * yk;
            }
        }
    }
    let cn: f64 = inst.objective.values().map(|c| c * c).sum::<f64>().sqrt();
    let rf: f64 = gty.iter().enumerate().map(|(v, g)| (inst.objective.get(&v).copied().unwrap_or(0.0) - g).powi(2)).sum::<f64>().sqrt();
    let neg = slacks.iter().map(|s| (-min_eigenvalue(s)).max(0.0)).fold(0.0, f64::max);
    Residuals {
        primal: rp.sqrt() / (1.0 + bn.sqrt()),
        dual: rf / (1.0 + cn) + neg,
        gap: (primal - dual).abs() / (1.0 + primal.abs() + dual.abs()),
    }
}

fn infeasible(inst: &SdpInstance, margin: Option<f64>, iterations: usize, note: String) -> Solution {
    Solution {
        status: Status::InfeasibleSuspected,
        primal_value: f64::NAN,
        dual_value: f64::NAN,
        x: vec![f64::NAN; inst.variables.len()],
        block_matrices: inst.blocks.iter().map(|b| DMatrix::from_element(b.dim, b.dim, f64::NAN)).collect(),
        dual_y: vec![f64::NAN; inst.constraints.len()],
        dual_slacks: inst.blocks.iter().map(|b| DMatrix::from_element(b.dim, b.dim, f64::NAN)).collect(),
        residuals: Residuals { primal: f64::NAN, dual: f64::NAN, gap: f64::NAN },
        iterations,
        infeasibility_margin: margin,
        note: Some(note),
    }
}

/// Solves `inst`; deterministic for identical inputs and options.
pub fn solve(inst: &SdpInstance, opts: &SolveOptions) -> Result<Solution> {
    check_guards(inst)?;
    let reduced = match Presolve::new(inst).run(inst)? {
        PresolveOutcome::Infeasible(msg) => return Ok(infeasible(inst, None, 0, msg)),
        PresolveOutcome::Reduced(r) => r,
    };
    let p = &reduced.dense;

    let mut iterations = 0;
    let mut failed = None;
    if !inst.is_feasibility() {
        let res = ipm::solve(p, opts.tol, opts.max_iter);
        iterations = res.iterations;
        if res.outcome == Outcome::Converged {
            let (blocks, x) = reduced.expand_primal(inst, &res.x, &res.free);
            let dual_y = reduced.expand_dual(inst, &res.y);
            let dual_slacks = dual_slack(inst, &dual_y);
            let primal = inst.objective_value(&x);
            let dual: f64 = inst.constraints.iter().zip(&dual_y).map(|(c, y)| c.rhs * y).sum();
            let residuals = residuals(inst, &blocks, &x, &dual_y, &dual_slacks, primal, dual);
            return Ok(Solution {
                status: Status::Optimal,
                primal_value: primal,
                dual_value: dual,
                x,
                block_matrices: blocks,
                dual_y,
                dual_slacks,
                residuals,
                iterations,
                infeasibility_margin: None,
                note: None,
            });
        }
        failed = Some(res);
    }

    let phase = phase_one(p);
    let res = ipm::solve(&phase, opts.tol, opts.max_iter);
    iterations += res.iterations;
    let nf = p.nfree();
    let shift = res.free[nf];
    if shift > opts.infeasibility_threshold && res.outcome != Outcome::Diverged {
        return Ok(infeasible(inst, Some(shift), iterations, format!("phase-I shift {shift:.3e} > {:.1e}", opts.infeasibility_threshold)));
    }
    if let Some(main) = failed {
        let (blocks, x) = reduced.expand_primal(inst, &main.x, &main.free);
        let dual_y = reduced.expand_dual(inst, &main.y);
        let dual_slacks = dual_slack(inst, &dual_y);
        let primal = inst.objective_value(&x);
        let dual: f64 = inst.constraints.iter().zip(&dual_y).map(|(c, y)| c.rhs * y).sum();
        let residuals = residuals(inst, &blocks, &x, &dual_y, &dual_slacks, primal, dual);
        return Ok(Solution {
            status: Status::IterationLimit,
            primal_value: primal,
            dual_value: dual,
            x,
            block_matrices: blocks,
            dual_y,
            dual_slacks,
            residuals,
            iterations,
            infeasibility_margin: Some(shift),
            note: Some(format!(
                "interior point method stopped ({:?}); reduced residuals primal {:.1e}, dual {:.1e}, gap {:.1e}",
                main.outcome, main.rel_primal, main.rel_dual, main.rel_gap
            )),
        });
    }
    let zs: Vec<DMatrix<f64>> = res.x[..p.dims.len()].iter().map(|z| z - DMatrix::identity(z.nrows(), z.nrows()) * shift).collect();
    let free = res.free.rows(0, nf).into_owned();
    let (blocks, x) = reduced.expand_primal(inst, &zs, &free);
    let dual_y = vec![0.0; inst.constraints.len()];
    let dual_slacks = dual_slack(inst, &dual_y);
    let primal = inst.objective_value(&x);
    let residuals = residuals(inst, &blocks, &x, &dual_y, &dual_slacks, primal, 0.0);
    let status = if res.outcome == Outcome::Converged { Status::Optimal } else { Status::IterationLimit };
    Ok(Solution {
        status,
        primal_value: primal,
        dual_value: 0.0,
        x,
        block_matrices: blocks,
        dual_y,
        dual_slacks,
        residuals,
        iterations,
        infeasibility_margin: Some(shift),
        note: Some("feasibility instance solved through phase I".into()),
    })
}
