use std::collections::BTreeMap;

use num_traits::ToPrimitive;

use super::{Graph, SdpInstance, Term};
use crate::correlations::CorrelationTable;
use crate::error::{Error, Result};
use crate::pauli::OrbitKey;
use crate::terwilliger::{gamma_norm, variable_index_set, BlockLayout};

/// Largest vertex count [`build_theta`] accepts; larger graphs are export-only.
pub const THETA_VERTEX_GUARD: usize = 5000;

const MAX_SYM_QUBITS: usize = 10;

/// Lovász theta of `g` as a bordered PSD program:
/// `[[1, xᵀ], [x, M]] ⪰ 0`, `M_aa = x_a`, `M_ab = 0` on edges, maximize `Σ x_a`.
pub fn build_theta(g: &Graph) -> Result<SdpInstance> {
    if g.num_vertices() > THETA_VERTEX_GUARD {
        return Err(Error::SizeGuard(format!(
            "{} vertices exceeds the solvable limit {THETA_VERTEX_GUARD}; use the export-only builder",
            g.num_vertices()
        )));
    }
    Ok(build_theta_unguarded(g))
}

/// [`build_theta`] without the size guard, for export.
pub fn build_theta_unguarded(g: &Graph) -> SdpInstance {
    let v = g.num_vertices();
    let mut inst = SdpInstance::new(format!("lovasz theta; vertices={v} edges={}", g.edges().len()));
    let b = inst.add_block("theta", v + 1);
    for a in 0..v {
        let x = inst.add_variable(format!("x{a}"));
        inst.add_objective(x, 1.0);
    }
    inst.add_constraint([(Term::entry(b, 0, 0), 1.0)], 1.0);
    for a in 0..v {
        inst.add_constraint([(Term::entry(b, a + 1, a + 1), 1.0), (Term::Var(a), -1.0)], 0.0);
        inst.add_constraint([(Term::entry(b, 0, a + 1), 1.0), (Term::Var(a), -1.0)], 0.0);
    }
    for &(u, w) in g.edges() {
        inst.add_constraint([(Term::entry(b, u + 1, w + 1), 1.0)], 0.0);
    }
    inst
}

/// Name of the scalar variable for the class of `key` (`x(i,j,t,p)` with `i <= j`).
pub fn theta_sym_variable(key: &OrbitKey) -> String {
    format!("x{}", key.canonical())
}

/// Blocks, one variable per canonical class, and `X_b[r][c] = Σ α x` for every cell.
struct SymCore {
    inst: SdpInstance,
    vars: BTreeMap<OrbitKey, usize>,
    pinned: BTreeMap<usize, f64>,
}

impl SymCore {
    fn new(n: usize, metadata: String) -> Self {
        let layout = BlockLayout::new(n);
        let mut inst = SdpInstance::new(metadata);
        let mut vars = BTreeMap::new();
        for key in variable_index_set(n).keys {
            if key == key.canonical() {
                let v = inst.add_variable(theta_sym_variable(&key));
                vars.insert(key, v);
            }
        }
        for (b, blk) in layout.blocks.blocks.iter().enumerate() {
            let id = inst.add_block(format!("Y({},{})", blk.a, blk.k), blk.dim);
            for r in 0..blk.dim {
                for c in r..blk.dim {
                    let coupling = layout.terms(b, r, c).iter().map(|(key, alpha)| (Term::Var(vars[&key.canonical()]), -alpha.to_f64()));
                    inst.add_constraint(std::iter::once((Term::entry(id, r, c), 1.0)).chain(coupling), 0.0);
                }
            }
        }
        Self { inst, vars, pinned: BTreeMap::new() }
    }

    fn var(&self, i: usize, j: usize, t: usize, p: usize) -> usize {
        self.vars[&OrbitKey::new(i, j, t, p).canonical()]
    }

    /// `x_v = value`, skipped when the identical pin already exists.
    fn pin(&mut self, v: usize, value: f64) {
        if self.pinned.get(&v) == Some(&value) {
            return;
        }
        self.pinned.entry(v).or_insert(value);
        self.inst.add_constraint([(Term::Var(v), 1.0)], value);
    }

    fn is_pinned_zero(&self, v: usize) -> bool {
        self.pinned.get(&v) == Some(&0.0)
    }

    fn pin_zero_where(&mut self, pred: impl Fn(&OrbitKey) -> bool) {
        let hits: Vec<usize> = self.vars.iter().filter(|(k, _)| pred(k)).map(|(_, &v)| v).collect();
        for v in hits {
            self.pin(v, 0.0);
        }
    }

    /// `x^{00}_{i0} = x^{ii}_{ii}` for `1 <= i <= n`, unless both sides are pinned to zero.
    fn couple_diagonals(&mut self, n: usize) {
        for i in 1..=n {
            let (edge, diag) = (self.var(i, 0, 0, 0), self.var(i, i, i, i));
            if !(self.is_pinned_zero(edge) && self.is_pinned_zero(diag)) {
                self.inst.add_constraint([(Term::Var(edge), 1.0), (Term::Var(diag), -1.0)], 0.0);
            }
        }
    }
}

fn check_sym_range(n: usize, delta: usize) -> Result<()> {
    if n == 0 || n > MAX_SYM_QUBITS || delta == 0 || delta > n {
        return Err(Error::OutOfRange(format!("need 1 <= delta <= n <= {MAX_SYM_QUBITS}, got n={n} delta={delta}")));
    }
    Ok(())
}

fn gamma_diag(i: usize, n: usize) -> f64 {
    gamma_norm(i, i, i, i, n) as f64
}

fn theta_sym_core(n: usize, delta: usize, metadata: String) -> SymCore {
    let mut core = SymCore::new(n, metadata);
    let unit = core.var(0, 0, 0, 0);
    core.pin(unit, 1.0);
    core.pin_zero_where(|k| k.is_anticommuting());
    core.pin_zero_where(|k| (0 < k.i && k.i < delta) || (0 < k.j && k.j < delta));
    core.couple_diagonals(n);
    core
}

/// Symmetry-reduced theta of the graph on Pauli strings of weight `>= delta`:
/// maximize `Σ_i γ^{ii}_{ii} x^{ii}_{ii}`.
pub fn build_theta_sym(n: usize, delta: usize) -> Result<SdpInstance> {
    check_sym_range(n, delta)?;
    let mut core = theta_sym_core(n, delta, format!("theta_sym n={n} delta={delta}"));
    for i in 1..=n {
        let v = core.var(i, i, i, i);
        core.inst.add_objective(v, gamma_diag(i, n));
    }
    Ok(core.inst)
}

/// Theta-body membership: the theta_sym constraints plus `1 + Σ γ x^{ii}_{ii} = target`.
pub fn build_theta_body_feasibility(n: usize, delta: usize, target: f64) -> Result<SdpInstance> {
    check_sym_range(n, delta)?;
    if !(target > 0.0 && target.is_finite()) {
        return Err(Error::OutOfRange(format!("target must be positive, got {target}")));
    }
    let mut core = theta_sym_core(n, delta, format!("theta_body n={n} delta={delta} target={target}"));
    let sum: Vec<(Term, f64)> = (1..=n).map(|i| (Term::Var(core.var(i, i, i, i)), gamma_diag(i, n))).collect();
    core.inst.add_constraint(sum, target - 1.0);
    Ok(core.inst)
}

/// How the diagonal correlation data enters the feasibility program.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub enum PinMode {
    /// `γ^{ii}_{ii} x^{ii}_{ii} = A_i` for every weight.
    #[default]
    PerWeight,
    /// Only `Σ_{i >= 1} γ^{ii}_{ii} x^{ii}_{ii} = Σ_{i >= 1} A_i`.
    Total,
}

impl std::str::FromStr for PinMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-weight" => Ok(Self::PerWeight),
            "total" => Ok(Self::Total),
            other => Err(Error::Parse(format!("unknown pin mode {other:?} (per-weight|total)"))),
        }
    }
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct FeasibilityOptions {
    /// Zero every class with `0 < i < δ`, `0 < j < δ` or `0 < wt(E_a E_b) < δ`.
    pub delta: Option<usize>,
    pub pin: PinMode,
}

/// Feasibility program for a symmetric moment matrix with the diagonal data of `diag`.
pub fn build_reduced_feasibility(n: usize, diag: &CorrelationTable, opts: FeasibilityOptions) -> Result<SdpInstance> {
    if diag.n != n {
        return Err(Error::LengthMismatch { left: diag.n, right: n });
    }
    check_sym_range(n, opts.delta.unwrap_or(1))?;
    let delta_tag = opts.delta.map_or("none".to_string(), |d| d.to_string());
    let pin_tag = match opts.pin {
        PinMode::PerWeight => "per-weight",
        PinMode::Total => "total",
    };
    let mut core = SymCore::new(n, format!("reduced_feasibility n={n} delta={delta_tag} pin={pin_tag}"));
    let unit = core.var(0, 0, 0, 0);
    core.pin(unit, 1.0);
    core.pin_zero_where(|k| k.is_anticommuting());
    if let Some(d) = opts.delta {
        core.pin_zero_where(|k| {
            let wt = k.product_weight();
            (0 < k.i && k.i < d) || (0 < k.j && k.j < d) || (0 < wt && wt < d)
        });
    }
    core.couple_diagonals(n);
    let sums: Vec<f64> = diag.sums.iter().map(|a| a.to_f64().unwrap_or(f64::NAN)).collect();
    match opts.pin {
        PinMode::PerWeight => {
            for (i, &a) in sums.iter().enumerate().skip(1) {
                let v = core.var(i, i, i, i);
                if !(core.is_pinned_zero(v) && a == 0.0) {
                    core.inst.add_constraint([(Term::Var(v), gamma_diag(i, n))], a);
                }
            }
        }
        PinMode::Total => {
            let terms: Vec<(Term, f64)> = (1..=n).map(|i| (Term::Var(core.var(i, i, i, i)), gamma_diag(i, n))).collect();
            core.inst.add_constraint(terms, sums[1..].iter().sum());
        }
    }
    Ok(core.inst)
}
