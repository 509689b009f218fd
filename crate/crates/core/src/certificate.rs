//! Exact verification of dual infeasibility certificates over `Q(√3)`.
//!
//! A certificate is a family of symmetric blocks `Y^(a,k)`, one per block of
//! the symmetry-reduced SDP. The dual map of [`BlockLayout`] turns them into
//! one value `y` per orbit class; weak duality then reduces infeasibility of
//! the primal to finitely many exact checks: every block PSD, every free
//! class value zero, and a strictly positive objective.
//!
//! # File format (`.qcert`)
//!
//! ```text
//! # comments and blank lines are ignored
//! kind=entanglement_dual n=7 delta=4
//! block 0 0 8
//! <36 upper-triangle entries, row-major, whitespace separated>
//! block 0 1 6
//! ...
//! ```
//!
//! Entries use the `QuadExt` text syntax (`p/q`, `p/q+r/s*z`, `p/q-r/s*z`).

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::Serialize;

use crate::correlations::CorrelationTable;
use crate::error::{Error, Result};
use crate::exact::{is_psd_exact, qsign, ExactSymMatrix, PsdFailure, PsdVerdict, QuadExt, Rational};
use crate::pauli::OrbitKey;
use crate::terwilliger::{block_index_set, variable_index_set, BlockLayout};

/// Certificate for the moment-matrix feasibility SDP at `n = 7`.
pub const BUNDLED_ENTANGLEMENT: &str = include_str!("../../../data/cert_entanglement.qcert");
/// Certificate for the theta-body feasibility SDP on `G_{7,4}`.
pub const BUNDLED_LOVASZ: &str = include_str!("../../../data/cert_lovasz.qcert");

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    /// Dual of the moment SDP with per-weight pinned diagonal sums.
    EntanglementDual,
    /// Dual of the theta-body feasibility SDP with `1 + Σ M_aa = 2^n`.
    LovaszDual,
}

impl fmt::Display for CertificateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CertificateKind::EntanglementDual => "entanglement_dual",
            CertificateKind::LovaszDual => "lovasz_dual",
        })
    }
}

impl FromStr for CertificateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "entanglement_dual" => Ok(Self::EntanglementDual),
            "lovasz_dual" => Ok(Self::LovaszDual),
            other => Err(Error::Parse(format!("unknown certificate kind {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualCertificate {
    pub kind: CertificateKind,
    pub n: usize,
    pub delta: usize,
    pub blocks: BTreeMap<(usize, usize), ExactSymMatrix>,
}

impl DualCertificate {
    pub fn bundled_entanglement() -> Self {
        BUNDLED_ENTANGLEMENT.parse().expect("bundled certificate parses")
    }

    pub fn bundled_lovasz() -> Self {
        BUNDLED_LOVASZ.parse().expect("bundled certificate parses")
    }

    pub fn block(&self, a: usize, k: usize) -> Option<&ExactSymMatrix> {
        self.blocks.get(&(a, k))
    }

    /// Serializes in `.qcert` form, blocks in `(a, k)` order.
    pub fn to_qcert_string(&self) -> String {
        let mut out = format!("kind={} n={} delta={}\n", self.kind, self.n, self.delta);
        for ((a, k), m) in &self.blocks {
            out.push_str(&format!("block {a} {k} {}\n", m.dim()));
            for i in 0..m.dim() {
                let row: Vec<String> = (i..m.dim()).map(|j| m.get(i, j).to_string()).collect();
                out.push_str(&row.join(" "));
                out.push('\n');
            }
        }
        out
    }
}

fn parse_header(line: &str, lineno: usize) -> Result<(CertificateKind, usize, usize)> {
    let err = |msg: String| Error::ParseAt { line: lineno, msg };
    let (mut kind, mut n, mut delta) = (None, None, None);
    for field in line.split_whitespace() {
        let (name, value) = field.split_once('=').ok_or_else(|| err(format!("expected key=value, got {field:?}")))?;
        let int = || value.parse::<usize>().map_err(|_| err(format!("invalid integer {value:?}")));
        match name {
            "kind" => kind = Some(value.parse::<CertificateKind>().map_err(|e| err(e.to_string()))?),
            "n" => n = Some(int()?),
            "delta" => delta = Some(int()?),
            other => return Err(err(format!("unknown header field {other:?}"))),
        }
    }
    match (kind, n, delta) {
        (Some(kind), Some(n), Some(delta)) => Ok((kind, n, delta)),
        _ => Err(err("header needs kind, n and delta".into())),
    }
}

impl FromStr for DualCertificate {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (lineno, header) = lines.next().ok_or_else(|| Error::Parse("empty certificate".into()))?;
        let (kind, n, delta) = parse_header(header, lineno)?;
        if n == 0 || n > 12 {
            return Err(Error::ParseAt { line: lineno, msg: format!("n = {n} out of range") });
        }
        let expected = block_index_set(n);
        let mut blocks = BTreeMap::new();
        // (lineno, a, k, dim, tokens so far)
        let mut current: Option<(usize, usize, usize, usize, Vec<QuadExt>)> = None;

        let finish = |cur: (usize, usize, usize, usize, Vec<QuadExt>),
                      blocks: &mut BTreeMap<(usize, usize), ExactSymMatrix>|
         -> Result<()> {
            let (line, a, k, dim, values) = cur;
            let err = |msg: String| Error::ParseAt { line, msg };
            let want = expected
                .blocks
                .iter()
                .find(|b| b.a == a && b.k == k)
                .ok_or_else(|| err(format!("block ({a}, {k}) not in the block index set for n = {n}")))?;
            if want.dim != dim {
                return Err(err(format!("block ({a}, {k}) declared {dim}x{dim}, expected {}", want.dim)));
            }
            if values.len() != dim * (dim + 1) / 2 {
                return Err(err(format!(
                    "block ({a}, {k}) has {} entries, expected {}",
                    values.len(),
                    dim * (dim + 1) / 2
                )));
            }
            let m = ExactSymMatrix::from_upper_triangle(dim, values)?;
            if blocks.insert((a, k), m).is_some() {
                return Err(err(format!("duplicate block ({a}, {k})")));
            }
            Ok(())
        };

        for (lineno, line) in lines {
            if let Some(rest) = line.strip_prefix("block ") {
                if let Some(cur) = current.take() {
                    finish(cur, &mut blocks)?;
                }
                let nums: Vec<usize> = rest
                    .split_whitespace()
                    .map(|t| t.parse::<usize>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::ParseAt { line: lineno, msg: format!("invalid block header {line:?}") })?;
                let [a, k, dim] = nums[..] else {
                    return Err(Error::ParseAt { line: lineno, msg: "block header needs a, k, dim".into() });
                };
                current = Some((lineno, a, k, dim, Vec::with_capacity(dim * (dim + 1) / 2)));
            } else {
                let Some(cur) = current.as_mut() else {
                    return Err(Error::ParseAt { line: lineno, msg: "entries before the first block".into() });
                };
                for token in line.split_whitespace() {
                    let v = token.parse::<QuadExt>().map_err(|e| Error::ParseAt { line: lineno, msg: e.to_string() })?;
                    cur.4.push(v);
                }
            }
        }
        if let Some(cur) = current.take() {
            finish(cur, &mut blocks)?;
        }
        if blocks.len() != expected.blocks.len() {
            let missing: Vec<String> = expected
                .blocks
                .iter()
                .filter(|b| !blocks.contains_key(&(b.a, b.k)))
                .map(|b| format!("({}, {})", b.a, b.k))
                .collect();
            return Err(Error::Parse(format!("missing blocks {}", missing.join(", "))));
        }
        Ok(Self { kind, n, delta, blocks })
    }
}

pub fn parse_certificate(path: impl AsRef<Path>) -> Result<DualCertificate> {
    std::fs::read_to_string(path)?.parse()
}

/// Which orbit classes must carry `y = 0`.
///
/// The free primal classes are those with `i, j != 0` and even `t - p`;
/// classes with odd `t - p` are pinned to zero in the primal, so their dual
/// values are unconstrained. The diagonal classes `(i, i, i, i)` are pinned
/// through the correlation data and appear in the objective instead.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExemptionPolicy {
    /// Exempt `(i, i, i, i)`.
    pub exempt_diagonal: bool,
    /// Exempt every class with `0 < i < w` or `0 < j < w`.
    pub exempt_weight_below: Option<usize>,
}

impl Default for ExemptionPolicy {
    fn default() -> Self {
        Self { exempt_diagonal: true, exempt_weight_below: None }
    }
}

impl ExemptionPolicy {
    pub fn must_vanish(&self, key: &OrbitKey) -> bool {
        if key.i == 0 || key.j == 0 || key.is_anticommuting() {
            return false;
        }
        if self.exempt_diagonal && key.is_diagonal() {
            return false;
        }
        if let Some(w) = self.exempt_weight_below {
            if key.i < w || key.j < w {
                return false;
            }
        }
        true
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockCheck {
    pub a: usize,
    pub k: usize,
    pub dim: usize,
    pub accepted: bool,
    pub failure: Option<PsdFailure>,
}

/// An exact value required to vanish.
#[derive(Clone, Debug, Serialize)]
pub struct Residual {
    pub label: String,
    pub value: String,
    pub is_zero: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    ValidInfeasibilityProof,
    Invalid(String),
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub kind: CertificateKind,
    pub n: usize,
    pub delta: usize,
    pub psd_results: Vec<BlockCheck>,
    pub constraint_residuals: Vec<Residual>,
    pub objective: String,
    pub objective_approx: f64,
    pub recovered_w: Option<String>,
    pub verdict: Verdict,
    #[serde(skip)]
    pub objective_exact: QuadExt,
    #[serde(skip)]
    pub y_values: BTreeMap<OrbitKey, QuadExt>,
}

impl VerificationReport {
    pub fn is_valid(&self) -> bool {
        self.verdict == Verdict::ValidInfeasibilityProof
    }

    pub fn nonzero_residuals(&self) -> impl Iterator<Item = &Residual> {
        self.constraint_residuals.iter().filter(|r| !r.is_zero)
    }
}

fn check_blocks(cert: &DualCertificate) -> Result<Vec<BlockCheck>> {
    let layout_blocks = block_index_set(cert.n);
    layout_blocks
        .blocks
        .iter()
        .map(|b| {
            let m = cert
                .block(b.a, b.k)
                .ok_or_else(|| Error::DimensionMismatch(format!("missing block ({}, {})", b.a, b.k)))?;
            let verdict = is_psd_exact(m)?;
            let failure = match verdict {
                PsdVerdict::Accepted(_) => None,
                PsdVerdict::Rejected(f) => Some(f),
            };
            Ok(BlockCheck { a: b.a, k: b.k, dim: b.dim, accepted: failure.is_none(), failure })
        })
        .collect()
}

fn zero_residuals(y: &BTreeMap<OrbitKey, QuadExt>, policy: &ExemptionPolicy) -> Vec<Residual> {
    y.iter()
        .filter(|(key, _)| policy.must_vanish(key))
        .map(|(key, v)| Residual { label: format!("y{key}"), value: v.to_string(), is_zero: v.is_zero() })
        .collect()
}

fn conclude(
    cert: &DualCertificate,
    psd_results: Vec<BlockCheck>,
    constraint_residuals: Vec<Residual>,
    objective: QuadExt,
    recovered_w: Option<QuadExt>,
    y_values: BTreeMap<OrbitKey, QuadExt>,
) -> VerificationReport {
    let verdict = if let Some(b) = psd_results.iter().find(|b| !b.accepted) {
        Verdict::Invalid(format!("block Y^({},{}) is not PSD: {:?}", b.a, b.k, b.failure))
    } else if let Some(r) = constraint_residuals.iter().find(|r| !r.is_zero) {
        Verdict::Invalid(format!("{} = {} must vanish", r.label, r.value))
    } else if qsign(&objective) != 1 {
        Verdict::Invalid(format!("objective {objective} is not positive"))
    } else {
        Verdict::ValidInfeasibilityProof
    };
    VerificationReport {
        kind: cert.kind,
        n: cert.n,
        delta: cert.delta,
        psd_results,
        constraint_residuals,
        objective: objective.to_string(),
        objective_approx: objective.to_f64(),
        recovered_w: recovered_w.map(|w| w.to_string()),
        verdict,
        objective_exact: objective,
        y_values,
    }
}

fn require_kind(cert: &DualCertificate, kind: CertificateKind) -> Result<()> {
    if cert.kind != kind {
        return Err(Error::Invalid(format!("expected a {kind} certificate, got {}", cert.kind)));
    }
    Ok(())
}

fn y(values: &BTreeMap<OrbitKey, QuadExt>, i: usize, j: usize, t: usize, p: usize) -> &QuadExt {
    &values[&OrbitKey::new(i, j, t, p)]
}

pub fn verify_entanglement_dual(cert: &DualCertificate, table: &CorrelationTable) -> Result<VerificationReport> {
    verify_entanglement_dual_with(cert, table, &ExemptionPolicy::default())
}

/// Objective `-y_{00}^{00} - Σ_i (2 y_{i0}^{00} + y_{ii}^{ii}) A_i`.
pub fn verify_entanglement_dual_with(
    cert: &DualCertificate,
    table: &CorrelationTable,
    policy: &ExemptionPolicy,
) -> Result<VerificationReport> {
    require_kind(cert, CertificateKind::EntanglementDual)?;
    if table.n != cert.n {
        return Err(Error::DimensionMismatch(format!("table for n = {}, certificate for n = {}", table.n, cert.n)));
    }
    let psd_results = check_blocks(cert)?;
    let values = BlockLayout::new(cert.n).dual_y_values(&cert.blocks)?;
    let residuals = zero_residuals(&values, policy);
    let two = QuadExt::from_int(2);
    let mut objective = -y(&values, 0, 0, 0, 0);
    for i in 1..=cert.n {
        let coupling = &two * y(&values, i, 0, 0, 0) + y(&values, i, i, i, i);
        objective -= &coupling.scale(&table.sums[i]);
    }
    Ok(conclude(cert, psd_results, residuals, objective, None, values))
}

pub fn verify_lovasz_dual(cert: &DualCertificate) -> Result<VerificationReport> {
    verify_lovasz_dual_with(cert, &ExemptionPolicy::default())
}

/// Recovers `w` from `y_{δδ}^{δδ} + w + 2 y_{δ0}^{00} = 0`, requires the same
/// relation for every `i` in `δ..=n`, and evaluates `(2^n - 1) w - y_{00}^{00}`.
pub fn verify_lovasz_dual_with(cert: &DualCertificate, policy: &ExemptionPolicy) -> Result<VerificationReport> {
    require_kind(cert, CertificateKind::LovaszDual)?;
    if cert.delta == 0 || cert.delta > cert.n {
        return Err(Error::Invalid(format!("delta = {} outside 1..={}", cert.delta, cert.n)));
    }
    let psd_results = check_blocks(cert)?;
    let values = BlockLayout::new(cert.n).dual_y_values(&cert.blocks)?;
    let two = QuadExt::from_int(2);
    let d = cert.delta;
    let w = -(y(&values, d, d, d, d) + &two * y(&values, d, 0, 0, 0));
    let mut residuals = Vec::new();
    for i in d..=cert.n {
        let r = y(&values, i, i, i, i) + &w + &two * y(&values, i, 0, 0, 0);
        residuals.push(Residual { label: format!("w-consistency[i={i}]"), is_zero: r.is_zero(), value: r.to_string() });
    }
    residuals.extend(zero_residuals(&values, policy));
    let vertices = Rational::from_integer((BigInt::from(1) << cert.n) - 1);
    let objective = w.scale(&vertices) - y(&values, 0, 0, 0, 0);
    Ok(conclude(cert, psd_results, residuals, objective, Some(w), values))
}

/// Dispatches on the certificate kind; the entanglement dual uses `table`.
pub fn verify(cert: &DualCertificate, table: &CorrelationTable) -> Result<VerificationReport> {
    match cert.kind {
        CertificateKind::EntanglementDual => verify_entanglement_dual(cert, table),
        CertificateKind::LovaszDual => verify_lovasz_dual(cert),
    }
}

/// Keys the default policy checks for `n`.
pub fn checked_keys(n: usize) -> Vec<OrbitKey> {
    let policy = ExemptionPolicy::default();
    variable_index_set(n).keys.into_iter().filter(|k| policy.must_vanish(k)).collect()
}
