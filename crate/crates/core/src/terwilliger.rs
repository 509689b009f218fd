//! Symmetry reduction of Pauli-indexed matrices under `S_3 ≀ S_n`.
//!
//! A matrix indexed by n-qubit Pauli strings that is invariant under
//! permuting sites and, independently per site, the three non-identity
//! letters is constant on the orbit classes `(i, j, t, p)` of
//! [`OrbitKey`]. Such a matrix is PSD iff the direct sum of the small blocks
//! `(a, k)`, `0 <= a <= k <= n + a - k`, of dimension `n + a - 2k + 1` is PSD;
//! block `(a, k)` has rows and columns `i, j = k ..= n + a - k` with entries
//! `Σ_{t,p} α(i,j,t,p,a,k) x_{i,j}^{t,p}`.
//!
//! The coefficient tables are computed once per `n` in [`BlockLayout`] and
//! shared by floating assembly, exact assembly and the dual map.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::comb::{binom, multinomial};
use crate::error::{Error, Result};
use crate::exact::{ExactSymMatrix, QuadExt, Rational};
use crate::pauli::{enumerate_paulis, orbit_key_unchecked, OrbitKey};

/// Size of the orbit class `(i, j, t, p)`:
/// `3^(i+j-t) 2^(t-p) n! / (p! (t-p)! (i-t)! (j-t)! (n-i-j+t)!)`.
pub fn gamma_norm(i: usize, j: usize, t: usize, p: usize, n: usize) -> u128 {
    if p > t || t > i.min(j) || i + j - t > n {
        return 0;
    }
    let (i, j, t, p, n) = (i as i64, j as i64, t as i64, p as i64, n as i64);
    let m = multinomial(n, &[p, t - p, i - t, j - t]);
    (3u128.pow((i + j - t) as u32) * 2u128.pow((t - p) as u32)) * m as u128
}

pub fn gamma_of(key: &OrbitKey, n: usize) -> u128 {
    gamma_norm(key.i, key.j, key.t, key.p, n)
}

/// `β^{m,t}_{i,j,k} = Σ_u (-1)^(t-u) C(u,t) C(m-2k, m-k-u) C(m-k-u, i-u) C(m-k-u, j-u)`.
pub fn beta_coeff(i: i64, j: i64, k: i64, m: i64, t: i64) -> i128 {
    (0..=m.max(0))
        .map(|u| {
            let sign = if (t - u).rem_euclid(2) == 0 { 1 } else { -1 };
            let w = m - k - u;
            sign * binom(u, t) * binom(m - 2 * k, w) * binom(w, i - u) * binom(w, j - u)
        })
        .sum()
}

fn rat(v: i128) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

fn pow2(e: i64) -> Rational {
    let v = Rational::from_integer(BigInt::one() << e.unsigned_abs());
    if e >= 0 {
        v
    } else {
        v.recip()
    }
}

/// `3^((i+j)/2 - t)` as an element of `Q(√3)`.
fn pow3_half(e2: i64) -> QuadExt {
    let whole = rat(3i128.pow((e2.div_euclid(2)).unsigned_abs() as u32));
    let whole = if e2 >= 0 { whole } else { whole.recip() };
    if e2.rem_euclid(2) == 0 {
        QuadExt::rational(whole)
    } else {
        QuadExt::new(Rational::zero(), whole)
    }
}

/// `α(i,j,t,p,a,k) = 3^((i+j)/2 - t) β^{n-a,t-a}_{i-a,j-a,k-a}
///   Σ_g 2^(t-a-p+g) (-1)^(a-g) C(a,g) C(t-a,p-g)`.
pub fn alpha_coeff(i: usize, j: usize, t: usize, p: usize, a: usize, k: usize, n: usize) -> QuadExt {
    let (i, j, t, p, a, k, n) = (i as i64, j as i64, t as i64, p as i64, a as i64, k as i64, n as i64);
    let beta = beta_coeff(i - a, j - a, k - a, n - a, t - a);
    if beta == 0 {
        return QuadExt::zero();
    }
    let mut g_sum = Rational::zero();
    for g in 0..=p {
        let c = binom(a, g) * binom(t - a, p - g);
        if c == 0 {
            continue;
        }
        let sign = if (a - g) % 2 == 0 { 1 } else { -1 };
        g_sum += pow2(t - a - p + g) * rat(sign * c);
    }
    pow3_half(i + j - 2 * t).scale(&(g_sum * rat(beta)))
}

/// Admissible orbit keys for `n` qubits, ordered by `(j, i, t, p)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableIndexSet {
    pub n: usize,
    pub keys: Vec<OrbitKey>,
}

impl VariableIndexSet {
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn contains(&self, key: &OrbitKey) -> bool {
        key.is_admissible(self.n)
    }
}

pub fn variable_index_set(n: usize) -> VariableIndexSet {
    let mut keys = Vec::new();
    for j in 0..=n {
        for i in 0..=n {
            for t in 0..=i.min(j) {
                if i + j - t > n {
                    continue;
                }
                for p in 0..=t {
                    keys.push(OrbitKey::new(i, j, t, p));
                }
            }
        }
    }
    VariableIndexSet { n, keys }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockIndex {
    pub a: usize,
    pub k: usize,
    pub dim: usize,
}

impl BlockIndex {
    /// Row/column `r` of the block corresponds to weight `k + r`.
    pub fn weight_of(&self, r: usize) -> usize {
        self.k + r
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockIndexSet {
    pub n: usize,
    pub blocks: Vec<BlockIndex>,
}

impl BlockIndexSet {
    pub fn dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.dim).collect()
    }

    pub fn position(&self, a: usize, k: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.a == a && b.k == k)
    }
}

/// All `(a, k)` with `0 <= a <= k <= n + a - k`, ordered by `a` then `k`.
pub fn block_index_set(n: usize) -> BlockIndexSet {
    let mut blocks = Vec::new();
    for a in 0..=n {
        for k in a..=n {
            if 2 * k <= n + a {
                blocks.push(BlockIndex { a, k, dim: n + a - 2 * k + 1 });
            }
        }
    }
    BlockIndexSet { n, blocks }
}

/// Nonzero `α` coefficients of every block entry.
#[derive(Clone, Debug)]
pub struct BlockLayout {
    pub n: usize,
    pub blocks: BlockIndexSet,
    /// `terms[b][r * dim + c]` lists `(key, α)` for entry `(r, c)` of block `b`.
    terms: Vec<Vec<Vec<(OrbitKey, QuadExt)>>>,
}

impl BlockLayout {
    pub fn new(n: usize) -> Self {
        let blocks = block_index_set(n);
        let terms = blocks
            .blocks
            .iter()
            .map(|b| {
                let mut cells = Vec::with_capacity(b.dim * b.dim);
                for r in 0..b.dim {
                    for c in 0..b.dim {
                        let (i, j) = (b.weight_of(r), b.weight_of(c));
                        let mut cell = Vec::new();
                        for t in 0..=i.min(j) {
                            if i + j - t > n {
                                continue;
                            }
                            for p in 0..=t {
                                let alpha = alpha_coeff(i, j, t, p, b.a, b.k, n);
                                if !alpha.is_zero() {
                                    cell.push((OrbitKey::new(i, j, t, p), alpha));
                                }
                            }
                        }
                        cells.push(cell);
                    }
                }
                cells
            })
            .collect();
        Self { n, blocks, terms }
    }

    pub fn terms(&self, block: usize, r: usize, c: usize) -> &[(OrbitKey, QuadExt)] {
        &self.terms[block][r * self.blocks.blocks[block].dim + c]
    }

    fn check_keys<'a>(&self, keys: impl Iterator<Item = &'a OrbitKey>) -> Result<()> {
        for key in keys {
            if !key.is_admissible(self.n) {
                return Err(Error::OutOfRange(format!("orbit key {key} not admissible for n = {}", self.n)));
            }
        }
        Ok(())
    }

    /// Floating blocks for class values `x`. A key missing in `x` falls back
    /// to its transpose, then to zero.
    pub fn assemble_f64(&self, x: &BTreeMap<OrbitKey, f64>) -> Result<Vec<DMatrix<f64>>> {
        self.check_keys(x.keys())?;
        let lookup = |key: &OrbitKey| x.get(key).or_else(|| x.get(&key.transposed())).copied().unwrap_or(0.0);
        Ok(self
            .blocks
            .blocks
            .iter()
            .enumerate()
            .map(|(b, blk)| {
                DMatrix::from_fn(blk.dim, blk.dim, |r, c| {
                    self.terms(b, r, c).iter().map(|(key, alpha)| alpha.to_f64() * lookup(key)).sum()
                })
            })
            .collect())
    }

    /// Exact blocks for class values `x`, with the same fallback as
    /// [`BlockLayout::assemble_f64`].
    pub fn assemble_exact(&self, x: &BTreeMap<OrbitKey, QuadExt>) -> Result<Vec<ExactSymMatrix>> {
        self.check_keys(x.keys())?;
        let zero = QuadExt::zero();
        let lookup = |key: &OrbitKey| x.get(key).or_else(|| x.get(&key.transposed())).unwrap_or(&zero);
        self.blocks
            .blocks
            .iter()
            .enumerate()
            .map(|(b, blk)| {
                let rows = (0..blk.dim)
                    .map(|r| {
                        (0..blk.dim)
                            .map(|c| {
                                let mut acc = QuadExt::zero();
                                for (key, alpha) in self.terms(b, r, c) {
                                    acc += &(alpha * lookup(key));
                                }
                                acc
                            })
                            .collect()
                    })
                    .collect();
                ExactSymMatrix::from_rows(rows)
            })
            .collect()
    }

    /// Dual map: `y_key = (1/γ_key) Σ α(key, a, k) Y^{(a,k)}_{i-k, j-k}`,
    /// summed over every block entry where the key appears.
    pub fn dual_y_values(&self, y_blocks: &BTreeMap<(usize, usize), ExactSymMatrix>) -> Result<BTreeMap<OrbitKey, QuadExt>> {
        let mut ordered = Vec::with_capacity(self.blocks.blocks.len());
        for blk in &self.blocks.blocks {
            let m = y_blocks
                .get(&(blk.a, blk.k))
                .ok_or_else(|| Error::DimensionMismatch(format!("missing block ({}, {})", blk.a, blk.k)))?;
            if m.dim() != blk.dim {
                return Err(Error::DimensionMismatch(format!(
                    "block ({}, {}) has dimension {}, expected {}",
                    blk.a,
                    blk.k,
                    m.dim(),
                    blk.dim
                )));
            }
            ordered.push(m);
        }
        if let Some((a, k)) = y_blocks.keys().find(|(a, k)| self.blocks.position(*a, *k).is_none()) {
            return Err(Error::DimensionMismatch(format!("unexpected block ({a}, {k})")));
        }
        let mut acc: BTreeMap<OrbitKey, QuadExt> =
            variable_index_set(self.n).keys.into_iter().map(|key| (key, QuadExt::zero())).collect();
        for (b, blk) in self.blocks.blocks.iter().enumerate() {
            for r in 0..blk.dim {
                for c in 0..blk.dim {
                    let entry = ordered[b].get(r, c);
                    if entry.is_zero() {
                        continue;
                    }
                    for (key, alpha) in self.terms(b, r, c) {
                        let slot = acc.get_mut(key).expect("layout keys are admissible");
                        *slot += &(alpha * entry);
                    }
                }
            }
        }
        for (key, value) in acc.iter_mut() {
            let gamma = Rational::from_integer(BigInt::from(gamma_of(key, self.n)));
            *value = value.scale(&gamma.recip());
        }
        Ok(acc)
    }
}

pub fn assemble_blocks(x: &BTreeMap<OrbitKey, f64>, n: usize) -> Result<Vec<DMatrix<f64>>> {
    BlockLayout::new(n).assemble_f64(x)
}

pub fn dual_y_values(y_blocks: &BTreeMap<(usize, usize), ExactSymMatrix>, n: usize) -> Result<BTreeMap<OrbitKey, QuadExt>> {
    BlockLayout::new(n).dual_y_values(y_blocks)
}

/// Largest register accepted by the dense averaging routines.
pub const MAX_DENSE_QUBITS: usize = 3;

/// Orbit class of every entry of a `4^n × 4^n` matrix in Pauli order.
pub fn class_map(n: usize) -> Result<Vec<OrbitKey>> {
    if n > MAX_DENSE_QUBITS {
        return Err(Error::SizeGuard(format!("dense averaging limited to n <= {MAX_DENSE_QUBITS}")));
    }
    let paulis = enumerate_paulis(n)?;
    let mut keys = Vec::with_capacity(paulis.len() * paulis.len());
    for a in &paulis {
        for b in &paulis {
            let prod = a.product(b)?;
            keys.push(orbit_key_unchecked(a, b, &prod));
        }
    }
    Ok(keys)
}

/// Class averages `x_key = (1/γ_key) Σ_{key(a,b) = key} G_ab`.
pub fn symmetrize_small(g: &DMatrix<f64>, n: usize) -> Result<BTreeMap<OrbitKey, f64>> {
    let keys = class_map(n)?;
    let dim = 1usize << (2 * n);
    if g.nrows() != dim || g.ncols() != dim {
        return Err(Error::DimensionMismatch(format!("expected {dim}x{dim}, got {}x{}", g.nrows(), g.ncols())));
    }
    let mut sums: BTreeMap<OrbitKey, f64> = BTreeMap::new();
    for a in 0..dim {
        for b in 0..dim {
            *sums.entry(keys[a * dim + b]).or_insert(0.0) += g[(a, b)];
        }
    }
    for (key, v) in sums.iter_mut() {
        *v /= gamma_of(key, n) as f64;
    }
    Ok(sums)
}

/// Dense class-constant matrix with entry `x_{key(a,b)}`.
pub fn expand_classes(x: &BTreeMap<OrbitKey, f64>, n: usize) -> Result<DMatrix<f64>> {
    let keys = class_map(n)?;
    let dim = 1usize << (2 * n);
    Ok(DMatrix::from_fn(dim, dim, |a, b| x.get(&keys[a * dim + b]).copied().unwrap_or(0.0)))
}
