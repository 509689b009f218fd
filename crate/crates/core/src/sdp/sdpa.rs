//! SDPA sparse (`.dat-s`) reader and writer.
//!
//! Files use the primal form `maximize tr(C X) s.t. tr(A_k X) = b_k, X ⪰ 0`
//! (the CSDP reading of the format). Free variables are written as the
//! difference of two nonnegative diagonal entries in a trailing diagonal
//! block of size `2 · #variables`. Comment lines starting with `*` carry
//! block labels, variable names and metadata so that
//! `parse_sdpa(to_sdpa_string(inst)) == inst`. Files without those comments
//! are read generically: diagonal blocks become `1 × 1` PSD blocks and a
//! nonzero `C` is moved into a scalar variable `obj`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{BlockSpec, Constraint, SdpInstance, Term};
use crate::error::{Error, Result};

pub fn to_sdpa_string(inst: &SdpInstance) -> Result<String> {
    inst.validate()?;
    let nf = inst.variables.len();
    let free_block = inst.blocks.len() + 1;
    let mut s = String::new();
    let w = &mut s;
    let _ = writeln!(w, "* qcert sdpa export");
    let _ = writeln!(w, "* form: maximize tr(C X) s.t. tr(A_k X) = b_k; off-diagonal coefficients are halved");
    if nf > 0 {
        let _ = writeln!(w, "* scalars: x_v = D[v][v] - D[{nf}+v][{nf}+v], D = block {free_block}");
    }
    let _ = writeln!(w, "* metadata {}", inst.metadata);
    let _ = writeln!(w, "* free {nf}");
    for (b, spec) in inst.blocks.iter().enumerate() {
        let _ = writeln!(w, "* block {} {}", b + 1, spec.label);
    }
    for (v, name) in inst.variables.iter().enumerate() {
        let _ = writeln!(w, "* var {} {}", v + 1, name);
    }
    let _ = writeln!(w, "{}", inst.constraints.len());
    let _ = writeln!(w, "{}", inst.blocks.len() + usize::from(nf > 0));
    let mut dims: Vec<String> = inst.blocks.iter().map(|b| b.dim.to_string()).collect();
    if nf > 0 {
        dims.push(format!("-{}", 2 * nf));
    }
    let _ = writeln!(w, "{}", dims.join(" "));
    let rhs: Vec<String> = inst.constraints.iter().map(|c| c.rhs.to_string()).collect();
    let _ = writeln!(w, "{}", rhs.join(" "));
    for (&v, &c) in &inst.objective {
        let _ = writeln!(w, "0 {free_block} {} {} {}", v + 1, v + 1, c);
        let _ = writeln!(w, "0 {free_block} {} {} {}", nf + v + 1, nf + v + 1, -c);
    }
    for (k, con) in inst.constraints.iter().enumerate() {
        for &(term, c) in con.terms() {
            match term {
                Term::Entry { block, row, col } => {
                    let value = if row == col { c } else { c / 2.0 };
                    let _ = writeln!(w, "{} {} {} {} {}", k + 1, block + 1, row + 1, col + 1, value);
                }
                Term::Var(v) => {
                    let _ = writeln!(w, "{} {free_block} {} {} {}", k + 1, v + 1, v + 1, c);
                    let _ = writeln!(w, "{} {free_block} {} {} {}", k + 1, nf + v + 1, nf + v + 1, -c);
                }
            }
        }
    }
    Ok(s)
}

pub fn export_sdpa(inst: &SdpInstance, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_sdpa_string(inst)?)?;
    Ok(())
}

pub fn read_sdpa(path: impl AsRef<Path>) -> Result<SdpInstance> {
    parse_sdpa(&std::fs::read_to_string(path)?)
}

#[derive(Default)]
struct Directives {
    metadata: Option<String>,
    free: Option<usize>,
    labels: BTreeMap<usize, String>,
    names: BTreeMap<usize, String>,
}

impl Directives {
    fn read(&mut self, body: &str, line: usize) -> Result<()> {
        let body = body.trim_start();
        let (key, rest) = body.split_once(' ').unwrap_or((body, ""));
        let indexed = |rest: &str| -> Result<(usize, String)> {
            let (idx, name) = rest.split_once(' ').ok_or(Error::ParseAt { line, msg: "expected `<index> <name>`".into() })?;
            let idx: usize = idx.parse().map_err(|_| Error::ParseAt { line, msg: format!("bad index {idx:?}") })?;
            if idx == 0 {
                return Err(Error::ParseAt { line, msg: "indices start at 1".into() });
            }
            Ok((idx - 1, name.to_string()))
        };
        match key {
            "metadata" => self.metadata = Some(rest.to_string()),
            "free" => {
                self.free = Some(rest.trim().parse().map_err(|_| Error::ParseAt { line, msg: format!("bad free count {rest:?}") })?)
            }
            "block" => {
                let (i, s) = indexed(rest)?;
                self.labels.insert(i, s);
            }
            "var" => {
                let (i, s) = indexed(rest)?;
                self.names.insert(i, s);
            }
            _ => {}
        }
        Ok(())
    }
}

/// Reads numbers from consecutive lines until `count` are collected; the
/// remainder of a line after the first non-numeric token is ignored.
fn numbers<T: std::str::FromStr>(lines: &[(usize, Vec<&str>)], pos: &mut usize, count: usize, what: &str) -> Result<Vec<T>> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let (line, toks) = lines.get(*pos).ok_or(Error::Parse(format!("unexpected end of file, expected {what}")))?;
        *pos += 1;
        let before = out.len();
        for tok in toks {
            if out.len() == count {
                break;
            }
            match tok.parse() {
                Ok(v) => out.push(v),
                Err(_) => break,
            }
        }
        if out.len() == before {
            return Err(Error::ParseAt { line: *line, msg: format!("expected {what}") });
        }
    }
    Ok(out)
}

/// Parses SDPA sparse text; see the module docs for the two reading modes.
pub fn parse_sdpa(text: &str) -> Result<SdpInstance> {
    let mut directives = Directives::default();
    let mut lines = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if lines.is_empty() && (trimmed.starts_with('*') || trimmed.starts_with('"')) {
            if let Some(body) = trimmed.strip_prefix('*') {
                directives.read(body, line)?;
            }
            continue;
        }
        let toks: Vec<&str> = trimmed.split(|c: char| c.is_whitespace() || "{}(),".contains(c)).filter(|t| !t.is_empty()).collect();
        if !toks.is_empty() {
            lines.push((line, toks));
        }
    }
    let mut pos = 0;
    let m = numbers::<usize>(&lines, &mut pos, 1, "constraint count")?[0];
    let nblocks = numbers::<usize>(&lines, &mut pos, 1, "block count")?[0];
    if nblocks == 0 {
        return Err(Error::Parse("no blocks".into()));
    }
    let dims = numbers::<i64>(&lines, &mut pos, nblocks, "block dimensions")?;
    if dims.contains(&0) {
        return Err(Error::Parse("zero block dimension".into()));
    }
    let rhs = numbers::<f64>(&lines, &mut pos, m, "rhs values")?;
    let mut entries = Vec::new();
    for (line, toks) in &lines[pos..] {
        let line = *line;
        if toks.len() < 5 {
            return Err(Error::ParseAt { line, msg: "expected `matno block i j value`".into() });
        }
        let int = |t: &str| t.parse::<usize>().map_err(|_| Error::ParseAt { line, msg: format!("bad index {t:?}") });
        let (matno, blk, i, j) = (int(toks[0])?, int(toks[1])?, int(toks[2])?, int(toks[3])?);
        let v: f64 = toks[4].parse().map_err(|_| Error::ParseAt { line, msg: format!("bad value {:?}", toks[4]) })?;
        if matno > m || blk == 0 || blk > nblocks || i == 0 || j == 0 {
            return Err(Error::ParseAt { line, msg: format!("entry {matno} {blk} {i} {j} out of range") });
        }
        let d = dims[blk - 1].unsigned_abs() as usize;
        if i > d || j > d || (dims[blk - 1] < 0 && i != j) {
            return Err(Error::ParseAt { line, msg: format!("entry ({i}, {j}) outside block {blk}") });
        }
        entries.push((line, matno, blk - 1, i.min(j) - 1, i.max(j) - 1, v));
    }
    match directives.free {
        Some(nf) => structured(directives, nf, &dims, rhs, entries),
        None => generic(&dims, rhs, entries),
    }
}

type RawEntry = (usize, usize, usize, usize, usize, f64);

fn entry_coeff(row: usize, col: usize, v: f64) -> f64 {
    if row == col { v } else { 2.0 * v }
}

fn structured(d: Directives, nf: usize, dims: &[i64], rhs: Vec<f64>, entries: Vec<RawEntry>) -> Result<SdpInstance> {
    let npsd = dims.len() - usize::from(nf > 0);
    if nf > 0 && dims[npsd] != -2 * nf as i64 {
        return Err(Error::Parse(format!("free block has dimension {}, expected -{}", dims[npsd], 2 * nf)));
    }
    if dims[..npsd].iter().any(|&x| x < 0) {
        return Err(Error::Parse("unexpected diagonal block before the free block".into()));
    }
    let mut inst = SdpInstance::new(d.metadata.unwrap_or_default());
    for (b, &dim) in dims[..npsd].iter().enumerate() {
        let label = d.labels.get(&b).cloned().unwrap_or_else(|| format!("B{}", b + 1));
        inst.blocks.push(BlockSpec { label, dim: dim as usize });
    }
    inst.variables = (0..nf).map(|v| d.names.get(&v).cloned().unwrap_or_else(|| format!("x{}", v + 1))).collect();
    let mut rows: Vec<Vec<(Term, f64)>> = vec![Vec::new(); rhs.len()];
    for (line, matno, blk, row, col, v) in entries {
        let term = if blk == npsd {
            if row >= nf {
                continue;
            }
            Term::Var(row)
        } else {
            Term::Entry { block: blk, row, col }
        };
        match (matno, term) {
            (0, Term::Var(x)) => inst.add_objective(x, v),
            (0, _) => return Err(Error::ParseAt { line, msg: "objective entry on a PSD block".into() }),
            (k, Term::Var(x)) => rows[k - 1].push((Term::Var(x), v)),
            (k, t) => rows[k - 1].push((t, entry_coeff(row, col, v))),
        }
    }
    inst.constraints = rows.into_iter().zip(rhs).map(|(t, b)| Constraint::new(t, b)).collect();
    inst.validate()?;
    Ok(inst)
}

fn generic(dims: &[i64], rhs: Vec<f64>, entries: Vec<RawEntry>) -> Result<SdpInstance> {
    let mut inst = SdpInstance::new("imported sdpa");
    // (file block, diagonal position) -> instance block
    let mut map: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (b, &dim) in dims.iter().enumerate() {
        if dim > 0 {
            let id = inst.add_block(format!("B{}", b + 1), dim as usize);
            map.insert((b, usize::MAX), id);
        } else {
            for i in 0..dim.unsigned_abs() as usize {
                let id = inst.add_block(format!("D{}_{}", b + 1, i + 1), 1);
                map.insert((b, i), id);
            }
        }
    }
    let locate = |blk: usize, row: usize, col: usize| -> Term {
        if dims[blk] > 0 {
            Term::Entry { block: map[&(blk, usize::MAX)], row, col }
        } else {
            Term::Entry { block: map[&(blk, row)], row: 0, col: 0 }
        }
    };
    let mut objective = Vec::new();
    let mut rows: Vec<Vec<(Term, f64)>> = vec![Vec::new(); rhs.len()];
    for (_, matno, blk, row, col, v) in entries {
        let term = locate(blk, row, col);
        let c = entry_coeff(row, col, v);
        if matno == 0 {
            objective.push((term, c));
        } else {
            rows[matno - 1].push((term, c));
        }
    }
    inst.constraints = rows.into_iter().zip(rhs).map(|(t, b)| Constraint::new(t, b)).collect();
    let objective = Constraint::new(objective, 0.0);
    if !objective.is_empty() {
        let obj = inst.add_variable("obj");
        inst.add_objective(obj, 1.0);
        let terms = objective.terms().iter().map(|&(t, c)| (t, -c)).chain([(Term::Var(obj), 1.0)]);
        inst.constraints.push(Constraint::new(terms, 0.0));
    }
    inst.validate()?;
    Ok(inst)
}
