//! Correlation data of the 7+7 qubit E8 state in closed form.
//!
//! The state enters only through its swap expectations
//! `tr(π_S Φ) = 1 / min(2^|S|, 2^(n-|S|))`. Expanding each swap in the Pauli
//! basis and counting subsets by size gives, per weight `i`, the summed
//! correlations `A[i] = Σ_{wt(E)=i} tr((E ⊗ E†) Φ)` and the per-string value
//! `a[i] = A[i] / (3^i C(n,i))`. No density matrix is ever formed.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::comb::binom;
use crate::error::{Error, Result};
use crate::exact::Rational;

/// Qubits per party of the E8 state.
pub const E8_QUBITS: usize = 7;

fn rat(v: i128) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

fn check(k: usize, n: usize, what: &str) -> Result<()> {
    if k > n {
        return Err(Error::OutOfRange(format!("{what} = {k} exceeds n = {n}")));
    }
    Ok(())
}

/// `1 / min(2^s, 2^(n-s))`.
pub fn swap_expectation(s: usize, n: usize) -> Result<Rational> {
    check(s, n, "s")?;
    let e = s.min(n - s) as u32;
    Ok(Rational::new(BigInt::one(), BigInt::from(2u32).pow(e)))
}

/// `Σ_j (-1)^(i-j) C(i,j) 2^j tr(π_S Φ)|_{|S|=j}` without the `C(n,i)` factor.
fn alternating_sum(i: usize, n: usize) -> Rational {
    let mut acc = Rational::zero();
    for j in 0..=i {
        let term = rat(binom(i as i64, j as i64)) * rat(1i128 << j) * swap_expectation(j, n).expect("j <= i <= n");
        if (i - j).is_multiple_of(2) {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

pub fn weight_sum(i: usize, n: usize) -> Result<Rational> {
    check(i, n, "i")?;
    Ok(rat(binom(n as i64, i as i64)) * alternating_sum(i, n))
}

pub fn diagonal_entry(i: usize, n: usize) -> Result<Rational> {
    check(i, n, "i")?;
    Ok(alternating_sum(i, n) / rat(3i128.pow(i as u32)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorrelationTable {
    pub n: usize,
    /// Per-weight sums.
    pub sums: Vec<Rational>,
    /// Per-string diagonal values.
    pub entries: Vec<Rational>,
}

impl CorrelationTable {
    pub fn new(n: usize) -> Self {
        let sums = (0..=n).map(|i| weight_sum(i, n).expect("i <= n")).collect();
        let entries = (0..=n).map(|i| diagonal_entry(i, n).expect("i <= n")).collect();
        Self { n, sums, entries }
    }

    pub fn e8() -> Self {
        Self::new(E8_QUBITS)
    }

    /// Table with explicit per-weight sums; `entries` follow by division.
    pub fn from_sums(sums: Vec<Rational>) -> Result<Self> {
        if sums.is_empty() {
            return Err(Error::Invalid("empty correlation table".into()));
        }
        let n = sums.len() - 1;
        let entries = sums
            .iter()
            .enumerate()
            .map(|(i, a)| a / rat(3i128.pow(i as u32) * binom(n as i64, i as i64)))
            .collect();
        Ok(Self { n, sums, entries })
    }

    /// `Σ_{i >= from} A[i]`.
    pub fn tail_sum(&self, from: usize) -> Rational {
        self.sums.iter().skip(from).fold(Rational::zero(), |acc, a| acc + a)
    }

    pub fn to_json_value(&self) -> TableJson {
        TableJson {
            n: self.n,
            sums: self.sums.iter().map(fmt_rational).collect(),
            entries: self.entries.iter().map(fmt_rational).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TableJson {
    pub n: usize,
    pub sums: Vec<String>,
    pub entries: Vec<String>,
}

pub fn fmt_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Expectation of the theta-body witness, `theta - Σ_{i>=delta} A[i]`.
/// Negative values detect entanglement.
pub fn witness_gap(theta: f64, table: &CorrelationTable, delta: usize) -> f64 {
    theta - table.tail_sum(delta).to_f64().unwrap_or(f64::NAN)
}

/// [`witness_gap`] for the E8 table with `delta = 4`.
pub fn e8_witness_gap(theta: f64) -> f64 {
    witness_gap(theta, &CorrelationTable::e8(), 4)
}
