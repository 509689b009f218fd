//! Phase-free Pauli strings in symplectic form, orbit invariants of Pauli
//! pairs, and the anti-commutativity graph.
//!
//! Site `k` of a string is encoded by bit `k` of two packed words: `X` iff
//! only the x bit is set, `Z` iff only the z bit is set, `Y` iff both.
//! Products drop the global phase; everything built on top of this module
//! (weights, supports, commutation, orbit keys) is phase-independent.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest register size accepted by the enumeration routines.
pub const MAX_QUBITS: usize = 12;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n: u8,
    x: u64,
    z: u64,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        assert!(n <= 64, "packed Pauli strings hold at most 64 sites");
        Self { n: n as u8, x: 0, z: 0 }
    }

    /// Builds a string from packed bit words. Bits above `n` must be clear.
    pub fn from_bits(n: usize, x_bits: u64, z_bits: u64) -> Result<Self> {
        if n > 64 {
            return Err(Error::OutOfRange(format!("{n} qubits exceeds the packed width")));
        }
        let mask = site_mask(n);
        if x_bits & !mask != 0 || z_bits & !mask != 0 {
            return Err(Error::OutOfRange(format!("bits set above site {n}")));
        }
        Ok(Self { n: n as u8, x: x_bits, z: z_bits })
    }

    /// Position of this string in [`enumerate_paulis`] order.
    pub fn index(&self) -> usize {
        (self.x | (self.z << self.n)) as usize
    }

    /// Inverse of [`PauliString::index`].
    pub fn from_index(n: usize, index: usize) -> Self {
        let mask = site_mask(n);
        Self { n: n as u8, x: index as u64 & mask, z: (index as u64 >> n) & mask }
    }

    pub fn num_qubits(&self) -> usize {
        self.n as usize
    }

    pub fn x_bits(&self) -> u64 {
        self.x
    }

    pub fn z_bits(&self) -> u64 {
        self.z
    }

    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    pub fn weight(&self) -> usize {
        self.support().count_ones() as usize
    }

    pub fn is_identity(&self) -> bool {
        self.support() == 0
    }

    /// Single-site letter at `site`.
    pub fn letter(&self, site: usize) -> char {
        match ((self.x >> site) & 1, (self.z >> site) & 1) {
            (0, 0) => 'I',
            (1, 0) => 'X',
            (0, 1) => 'Z',
            _ => 'Y',
        }
    }

    /// Product up to phase. Pauli strings are self-adjoint up to phase, so
    /// this is also `a† b`.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.check_len(other)?;
        Ok(Self { n: self.n, x: self.x ^ other.x, z: self.z ^ other.z })
    }

    pub fn anticommutes(&self, other: &Self) -> Result<bool> {
        self.check_len(other)?;
        Ok(self.anticommutes_unchecked(other))
    }

    #[inline]
    pub(crate) fn anticommutes_unchecked(&self, other: &Self) -> bool {
        ((self.x & other.z) ^ (self.z & other.x)).count_ones() & 1 == 1
    }

    fn check_len(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::LengthMismatch { left: self.n as usize, right: other.n as usize });
        }
        Ok(())
    }
}

fn site_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for site in 0..self.num_qubits() {
            write!(f, "{}", self.letter(site))?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses strings such as `"XIZY"`; character `k` is site `k`.
    fn from_str(s: &str) -> Result<Self> {
        let n = s.chars().count();
        if n > 64 {
            return Err(Error::Parse(format!("Pauli string longer than 64 sites: {s}")));
        }
        let (mut x, mut z) = (0u64, 0u64);
        for (site, c) in s.chars().enumerate() {
            match c {
                'I' => {}
                'X' => x |= 1 << site,
                'Z' => z |= 1 << site,
                'Y' => {
                    x |= 1 << site;
                    z |= 1 << site;
                }
                other => return Err(Error::Parse(format!("invalid Pauli letter {other:?} in {s}"))),
            }
        }
        Ok(Self { n: n as u8, x, z })
    }
}

pub fn weight(p: &PauliString) -> usize {
    p.weight()
}

pub fn product(a: &PauliString, b: &PauliString) -> Result<PauliString> {
    a.product(b)
}

pub fn anticommutes(a: &PauliString, b: &PauliString) -> Result<bool> {
    a.anticommutes(b)
}

fn check_qubits(n: usize) -> Result<()> {
    if !(1..=MAX_QUBITS).contains(&n) {
        return Err(Error::OutOfRange(format!("n = {n} outside 1..={MAX_QUBITS}")));
    }
    Ok(())
}

/// All `4^n` strings. Index `k` holds x bits `k mod 2^n` and z bits
/// `k div 2^n`, so the identity comes first and `n = 1` gives `I, X, Z, Y`.
pub fn enumerate_paulis(n: usize) -> Result<Vec<PauliString>> {
    check_qubits(n)?;
    Ok((0..1usize << (2 * n)).map(|k| PauliString::from_index(n, k)).collect())
}

/// Invariants `(i, j, t, p)` of a Pauli pair: the two weights, the size of
/// the support overlap, and the defect `p` with `wt(a b) = i + j - t - p`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OrbitKey {
    pub i: usize,
    pub j: usize,
    pub t: usize,
    pub p: usize,
}

impl OrbitKey {
    pub const fn new(i: usize, j: usize, t: usize, p: usize) -> Self {
        Self { i, j, t, p }
    }

    /// `(j, i, t, p)`.
    pub fn transposed(&self) -> Self {
        Self { i: self.j, j: self.i, t: self.t, p: self.p }
    }

    /// Representative of `{self, self.transposed()}` with `i <= j`.
    pub fn canonical(&self) -> Self {
        if self.i <= self.j {
            *self
        } else {
            self.transposed()
        }
    }

    /// Whether the tuple can occur for `n` qubits.
    pub fn is_admissible(&self, n: usize) -> bool {
        self.p <= self.t && self.t <= self.i.min(self.j) && self.i + self.j - self.t <= n
    }

    /// Weight of the product of any pair in this class.
    pub fn product_weight(&self) -> usize {
        self.i + self.j - self.t - self.p
    }

    /// Pairs in a class with odd `t - p` anticommute.
    pub fn is_anticommuting(&self) -> bool {
        (self.t - self.p) % 2 == 1
    }

    /// The diagonal class `(i, i, i, i)` of pairs `a = b` of weight `i`.
    pub fn is_diagonal(&self) -> bool {
        self.i == self.j && self.j == self.t && self.t == self.p
    }
}

impl fmt::Display for OrbitKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{})", self.i, self.j, self.t, self.p)
    }
}

pub fn orbit_key(a: &PauliString, b: &PauliString) -> Result<OrbitKey> {
    let prod = a.product(b)?;
    Ok(orbit_key_unchecked(a, b, &prod))
}

#[inline]
pub(crate) fn orbit_key_unchecked(a: &PauliString, b: &PauliString, prod: &PauliString) -> OrbitKey {
    let i = a.weight();
    let j = b.weight();
    let t = (a.support() & b.support()).count_ones() as usize;
    let p = i + j - t - prod.weight();
    OrbitKey { i, j, t, p }
}

/// Anti-commutativity graph on the non-identity strings of weight at least
/// `delta`. Vertices follow [`enumerate_paulis`] order; adjacency is kept as
/// one packed bit row per vertex.
#[derive(Clone, Debug)]
pub struct AnticommGraph {
    n: usize,
    delta: usize,
    vertices: Vec<PauliString>,
    words_per_row: usize,
    rows: Vec<u64>,
}

impl AnticommGraph {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> usize {
        self.delta
    }

    pub fn vertices(&self) -> &[PauliString] {
        &self.vertices
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_edge(&self, u: usize, v: usize) -> bool {
        (self.rows[u * self.words_per_row + v / 64] >> (v % 64)) & 1 == 1
    }

    pub fn degree(&self, u: usize) -> usize {
        self.row(u).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn num_edges(&self) -> usize {
        (0..self.num_vertices()).into_par_iter().map(|u| self.degree(u)).sum::<usize>() / 2
    }

    /// Neighbours of `u` in increasing order.
    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(u).iter().enumerate().flat_map(|(w, &bits)| {
            (0..64).filter(move |b| (bits >> b) & 1 == 1).map(move |b| w * 64 + b)
        })
    }

    /// Edges `(u, v)` with `u < v`, lexicographically.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.num_vertices()).flat_map(move |u| self.neighbors(u).filter(move |&v| v > u).map(move |v| (u, v)))
    }

    fn row(&self, u: usize) -> &[u64] {
        &self.rows[u * self.words_per_row..(u + 1) * self.words_per_row]
    }

    /// Edge-list text: a `# n=.. delta=.. vertices=..` header, then one
    /// `u v` line per edge with `u < v`, 0-based.
    pub fn write_edge_list<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# n={} delta={} vertices={}", self.n, self.delta, self.num_vertices())?;
        for (u, v) in self.edges() {
            writeln!(out, "{u} {v}")?;
        }
        Ok(())
    }
}

/// Vertices of weight `>= delta` without building the adjacency.
pub fn graph_vertices(n: usize, delta: usize) -> Result<Vec<PauliString>> {
    check_qubits(n)?;
    if !(1..=n).contains(&delta) {
        return Err(Error::OutOfRange(format!("delta = {delta} outside 1..={n}")));
    }
    Ok(enumerate_paulis(n)?.into_iter().filter(|p| p.weight() >= delta).collect())
}

pub fn build_graph(n: usize, delta: usize) -> Result<AnticommGraph> {
    let vertices = graph_vertices(n, delta)?;
    let words_per_row = vertices.len().div_ceil(64);
    let mut rows = vec![0u64; vertices.len() * words_per_row];
    if words_per_row > 0 {
        rows.par_chunks_mut(words_per_row).enumerate().for_each(|(u, row)| {
            let a = vertices[u];
            for (v, b) in vertices.iter().enumerate() {
                if a.anticommutes_unchecked(b) {
                    row[v / 64] |= 1 << (v % 64);
                }
            }
        });
    }
    Ok(AnticommGraph { n, delta, vertices, words_per_row, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn weights() {
        assert_eq!(p("IIIIIII").weight(), 0);
        assert_eq!(p("XIIIIII").weight(), 1);
        assert_eq!(p("YZXIIII").weight(), 3);
    }

    #[test]
    fn products_drop_phase() {
        assert_eq!(p("X").product(&p("X")).unwrap(), p("I"));
        assert_eq!(p("X").product(&p("Z")).unwrap(), p("Y"));
        assert_eq!(p("XZ").product(&p("ZZ")).unwrap(), p("YI"));
        assert!(matches!(p("X").product(&p("XX")), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn commutation() {
        assert!(p("X").anticommutes(&p("Z")).unwrap());
        assert!(!p("XI").anticommutes(&p("IZ")).unwrap());
        assert!(!p("XX").anticommutes(&p("ZZ")).unwrap());
        assert!(p("X").anticommutes(&p("IZ")).is_err());
    }

    #[test]
    fn enumeration_order() {
        let one: Vec<String> = enumerate_paulis(1).unwrap().iter().map(|q| q.to_string()).collect();
        assert_eq!(one, ["I", "X", "Z", "Y"]);
        let two = enumerate_paulis(2).unwrap();
        assert_eq!(two.len(), 16);
        assert_eq!(two[0], p("II"));
        assert_eq!(enumerate_paulis(7).unwrap().len(), 16384);
        for (k, q) in two.iter().enumerate() {
            assert_eq!(q.index(), k);
        }
        assert!(enumerate_paulis(0).is_err());
        assert!(enumerate_paulis(13).is_err());
    }

    #[test]
    fn orbit_keys() {
        assert_eq!(orbit_key(&p("XI"), &p("IZ")).unwrap(), OrbitKey::new(1, 1, 0, 0));
        assert_eq!(orbit_key(&p("XI"), &p("XI")).unwrap(), OrbitKey::new(1, 1, 1, 1));
        assert_eq!(orbit_key(&p("XX"), &p("XZ")).unwrap(), OrbitKey::new(2, 2, 2, 1));
    }

    #[test]
    fn small_graphs() {
        let g = build_graph(1, 1).unwrap();
        assert_eq!(g.num_vertices(), 3);
        assert_eq!(g.num_edges(), 3);
        assert_eq!(build_graph(2, 1).unwrap().num_vertices(), 15);
        assert!(build_graph(2, 0).is_err());
        assert!(build_graph(2, 3).is_err());
    }

    #[test]
    fn edge_list_format() {
        let g = build_graph(1, 1).unwrap();
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "# n=1 delta=1 vertices=3\n0 1\n0 2\n1 2\n");
    }
}
