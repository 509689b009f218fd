use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use qcert::certificate::{parse_certificate, verify, DualCertificate, VerificationReport};
use qcert::correlations::{fmt_rational, witness_gap, CorrelationTable};
use qcert::moment::{build_gamma, check_gamma_constraints, Ensemble};
use qcert::pauli::{build_graph, graph_vertices};
use qcert::sdp::{
    build_reduced_feasibility, build_theta, build_theta_body_feasibility, build_theta_sym, export_sdpa, read_sdpa,
    FeasibilityOptions, Graph, SdpInstance,
};
use qcert::solver::{solve, SolveOptions, Status};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::{BuildArgs, BuildKind, Cli, Command};

const REPRODUCE_N: usize = 7;
const REPRODUCE_DELTA: usize = 4;
const THETA_SYM_EXPECTED: f64 = 126.8876;
const THETA_SYM_TOLERANCE: f64 = 1e-3;
const ORACLE_TOLERANCE: f64 = 1e-10;
pub const VERDICT_LINE: &str = "PHI_E8: ENTANGLED (exact certificate verified)";

/// Destination of the primary output: `--out` or stdout.
struct Sink {
    json: bool,
    w: Box<dyn Write>,
}

impl Sink {
    fn open(cli: &Cli) -> Result<Self> {
        let w: Box<dyn Write> = match &cli.out {
            Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
            None => Box::new(io::stdout().lock()),
        };
        Ok(Self { json: cli.json, w })
    }

    fn line(&mut self, text: impl AsRef<str>) -> Result<()> {
        writeln!(self.w, "{}", text.as_ref())?;
        Ok(())
    }

    fn record(&mut self, value: serde_json::Value) -> Result<()> {
        self.line(value.to_string())
    }
}

/// Returns the verdict: `Ok(false)` maps to exit code 1.
pub fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Graph { n, delta, count_only } => graph(cli, *n, *delta, *count_only),
        Command::Correlations { n } => correlations(cli, *n),
        Command::Oracle { n, size } => oracle(cli, *n, *size),
        Command::Build(args) => build(cli, args),
        Command::Solve { file, tol, max_iter } => solve_file(cli, file, *tol, *max_iter),
        Command::VerifyCert { path, table } => verify_cert(cli, path, *table),
        Command::Reproduce => reproduce(cli),
    }
}

fn graph(cli: &Cli, n: usize, delta: usize, count_only: bool) -> Result<bool> {
    let mut out = Sink::open(cli)?;
    if count_only {
        let count = graph_vertices(n, delta)?.len();
        if out.json {
            out.record(json!({ "n": n, "delta": delta, "vertices": count }))?;
        } else {
            out.line(count.to_string())?;
        }
        return Ok(true);
    }
    let g = build_graph(n, delta)?;
    if out.json {
        out.record(json!({ "n": n, "delta": delta, "vertices": g.num_vertices(), "edges": g.num_edges() }))?;
    } else {
        g.write_edge_list(&mut out.w)?;
    }
    Ok(true)
}

fn table_for(n: usize) -> Result<CorrelationTable> {
    if n == 0 || n > 64 {
        bail!("n = {n} outside 1..=64");
    }
    Ok(CorrelationTable::new(n))
}

fn correlations(cli: &Cli, n: usize) -> Result<bool> {
    let table = table_for(n)?;
    let mut out = Sink::open(cli)?;
    if out.json {
        out.record(serde_json::to_value(table.to_json_value())?)?;
    } else {
        write_table(&mut out, &table)?;
    }
    Ok(true)
}

fn write_table(out: &mut Sink, table: &CorrelationTable) -> Result<()> {
    out.line(format!("# n={} weight A a", table.n))?;
    for (i, (a, e)) in table.sums.iter().zip(&table.entries).enumerate() {
        out.line(format!("{i} {} {}", fmt_rational(a), fmt_rational(e)))?;
    }
    out.line(format!("# sum A = {}", fmt_rational(&table.tail_sum(0))))
}

fn oracle(cli: &Cli, n: usize, size: usize) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let ensemble = Ensemble::random(n, size, &mut rng)?;
    let gamma = build_gamma(&ensemble)?;
    let report = check_gamma_constraints(&gamma, Some(&ensemble))?;
    let pass = report.passes(ORACLE_TOLERANCE);
    let mut out = Sink::open(cli)?;
    if out.json {
        out.record(json!({ "n": n, "size": size, "seed": cli.seed, "report": report, "max_violation": report.max_violation(), "pass": pass }))?;
    } else {
        out.line(format!("n={n} size={size} seed={} dim={}", cli.seed, gamma.dim()))?;
        out.line(format!("psd                       {:.3e}", report.psd))?;
        out.line(format!("unit_corner               {:.3e}", report.unit_corner))?;
        out.line(format!("diagonal_first_column     {:.3e}", report.diagonal_first_column))?;
        out.line(format!("anticommuting_real_part   {:.3e}", report.anticommuting_real_part))?;
        out.line(format!("diagonal_real_nonnegative {:.3e}", report.diagonal_real_nonnegative))?;
        if let Some(v) = report.diagonal_correlation {
            out.line(format!("diagonal_correlation      {v:.3e}"))?;
        }
        out.line(format!("{} (max violation {:.3e}, tolerance {ORACLE_TOLERANCE:e})", if pass { "PASS" } else { "FAIL" }, report.max_violation()))?;
    }
    Ok(pass)
}

fn build_instance(args: &BuildArgs) -> Result<SdpInstance> {
    let delta = args.delta;
    let need_delta = || delta.context("--delta is required for this instance");
    Ok(match args.kind {
        BuildKind::Theta => {
            let g = build_graph(args.n, need_delta()?)?;
            build_theta(&Graph::from(&g))?
        }
        BuildKind::ThetaSym => build_theta_sym(args.n, need_delta()?)?,
        BuildKind::Feas => {
            let table = table_for(args.n)?;
            build_reduced_feasibility(args.n, &table, FeasibilityOptions { delta, pin: args.pin })?
        }
        BuildKind::ThetaBody => {
            let target = args.target.context("--target is required for theta-body")?;
            build_theta_body_feasibility(args.n, need_delta()?, target)?
        }
    })
}

fn build(cli: &Cli, args: &BuildArgs) -> Result<bool> {
    let Some(path) = &cli.out else { bail!("build writes an SDPA file; pass --out <file.dat-s>") };
    let inst = build_instance(args)?;
    export_sdpa(&inst, path).with_context(|| format!("writing {}", path.display()))?;
    let summary = json!({
        "file": path.display().to_string(),
        "metadata": inst.metadata,
        "blocks": inst.block_dims(),
        "variables": inst.variables.len(),
        "constraints": inst.num_constraints(),
    });
    if cli.json {
        println!("{summary}");
    } else {
        println!(
            "wrote {} ({}; {} blocks, {} variables, {} constraints)",
            path.display(),
            inst.metadata,
            inst.blocks.len(),
            inst.variables.len(),
            inst.num_constraints()
        );
    }
    Ok(true)
}

fn solve_file(cli: &Cli, file: &Path, tol: f64, max_iter: usize) -> Result<bool> {
    if !(tol > 0.0 && tol.is_finite()) {
        bail!("--tol must be positive, got {tol}");
    }
    let inst = read_sdpa(file).with_context(|| format!("reading {}", file.display()))?;
    let sol = solve(&inst, &SolveOptions { tol, max_iter, ..SolveOptions::default() })?;
    let mut out = Sink::open(cli)?;
    if out.json {
        out.record(serde_json::to_value(sol.summary())?)?;
    } else {
        out.line(format!("status      {}", sol.status))?;
        out.line(format!("primal      {:.10}", sol.primal_value))?;
        out.line(format!("dual        {:.10}", sol.dual_value))?;
        out.line(format!(
            "residuals   primal {:.2e}  dual {:.2e}  gap {:.2e}",
            sol.residuals.primal, sol.residuals.dual, sol.residuals.gap
        ))?;
        out.line(format!("iterations  {}", sol.iterations))?;
        if let Some(m) = sol.infeasibility_margin {
            out.line(format!("phase-I     {m:.3e}"))?;
        }
        if let Some(note) = &sol.note {
            out.line(format!("note        {note}"))?;
        }
    }
    Ok(sol.status == Status::Optimal)
}

fn resolve(cli: &Cli, path: &Path) -> PathBuf {
    match &cli.data_dir {
        Some(dir) if path.is_relative() && !path.exists() => dir.join(path),
        _ => path.to_path_buf(),
    }
}

fn write_report(out: &mut Sink, report: &VerificationReport, label: &str) -> Result<()> {
    if out.json {
        let mut value = serde_json::to_value(report)?;
        value["source"] = json!(label);
        value["valid"] = json!(report.is_valid());
        return out.record(value);
    }
    let accepted = report.psd_results.iter().filter(|b| b.accepted).count();
    let zeros = report.constraint_residuals.iter().filter(|r| r.is_zero).count();
    out.line(format!("certificate {label}: kind={} n={} delta={}", report.kind, report.n, report.delta))?;
    out.line(format!("  blocks PSD    {accepted}/{}", report.psd_results.len()))?;
    for b in report.psd_results.iter().filter(|b| !b.accepted) {
        out.line(format!("    Y^({},{}) rejected: {:?}", b.a, b.k, b.failure))?;
    }
    out.line(format!("  residuals     {zeros}/{} exactly zero", report.constraint_residuals.len()))?;
    for r in report.nonzero_residuals() {
        out.line(format!("    {} = {}", r.label, r.value))?;
    }
    if let Some(w) = &report.recovered_w {
        out.line(format!("  w             {w}"))?;
    }
    out.line(format!("  objective     {} (≈ {:.6})", report.objective, report.objective_approx))?;
    match &report.verdict {
        qcert::certificate::Verdict::ValidInfeasibilityProof => out.line("  verdict       VALID infeasibility proof"),
        qcert::certificate::Verdict::Invalid(why) => out.line(format!("  verdict       INVALID: {why}")),
    }
}

fn verify_cert(cli: &Cli, path: &Path, table: Option<usize>) -> Result<bool> {
    let path = resolve(cli, path);
    let cert = parse_certificate(&path).with_context(|| format!("reading {}", path.display()))?;
    let table = table_for(table.unwrap_or(cert.n))?;
    let report = verify(&cert, &table)?;
    let mut out = Sink::open(cli)?;
    write_report(&mut out, &report, &path.display().to_string())?;
    Ok(report.is_valid())
}

fn load_certificate(cli: &Cli, file: &str, bundled: fn() -> DualCertificate) -> Result<(DualCertificate, String)> {
    match &cli.data_dir {
        Some(dir) => {
            let path = dir.join(file);
            let cert = parse_certificate(&path).with_context(|| format!("reading {}", path.display()))?;
            Ok((cert, path.display().to_string()))
        }
        None => Ok((bundled(), format!("bundled {file}"))),
    }
}

fn reproduce(cli: &Cli) -> Result<bool> {
    let mut out = Sink::open(cli)?;
    let mut ok = true;

    let table = CorrelationTable::e8();
    if fmt_rational(&table.tail_sum(0)) != (1u64 << REPRODUCE_N).to_string() {
        bail!("stage tables: Σ A_i != 2^{REPRODUCE_N}");
    }
    if out.json {
        out.record(json!({ "stage": "tables", "table": table.to_json_value() }))?;
    } else {
        out.line("== correlation tables")?;
        write_table(&mut out, &table)?;
    }

    let start = Instant::now();
    let inst = build_theta_sym(REPRODUCE_N, REPRODUCE_DELTA).context("stage theta_sym")?;
    let sol = solve(&inst, &SolveOptions::default()).context("stage theta_sym")?;
    let theta = sol.primal_value;
    let theta_ok = sol.status == Status::Optimal && (theta - THETA_SYM_EXPECTED).abs() <= THETA_SYM_TOLERANCE;
    ok &= theta_ok;
    let gap = witness_gap(theta, &table, REPRODUCE_DELTA);
    let gap_ok = gap < 0.0;
    ok &= gap_ok;
    if out.json {
        out.record(json!({
            "stage": "theta_sym", "n": REPRODUCE_N, "delta": REPRODUCE_DELTA, "status": sol.status,
            "value": theta, "dual_value": sol.dual_value, "seconds": start.elapsed().as_secs_f64(), "pass": theta_ok,
        }))?;
        out.record(json!({ "stage": "witness_gap", "value": gap, "threshold": fmt_rational(&table.tail_sum(REPRODUCE_DELTA)), "pass": gap_ok }))?;
    } else {
        out.line(format!("== theta_sym(G_{{{REPRODUCE_N},{REPRODUCE_DELTA}}})"))?;
        out.line(format!(
            "status {}  value {theta:.6}  dual {:.6}  ({:.2} s)  {}",
            sol.status,
            sol.dual_value,
            start.elapsed().as_secs_f64(),
            pass(theta_ok)
        ))?;
        out.line("== witness gap")?;
        out.line(format!(
            "theta_sym - Σ_{{i>={REPRODUCE_DELTA}}} A_i = {theta:.6} - {} = {gap:.6}  {}",
            fmt_rational(&table.tail_sum(REPRODUCE_DELTA)),
            pass(gap_ok)
        ))?;
    }

    let start = Instant::now();
    let (ent, ent_src) = load_certificate(cli, "cert_entanglement.qcert", DualCertificate::bundled_entanglement)
        .context("stage entanglement certificate")?;
    let report = verify(&ent, &table).context("stage entanglement certificate")?;
    ok &= report.is_valid();
    if !out.json {
        out.line("== entanglement certificate")?;
    }
    write_report(&mut out, &report, &ent_src)?;

    let (lov, lov_src) =
        load_certificate(cli, "cert_lovasz.qcert", DualCertificate::bundled_lovasz).context("stage lovasz certificate")?;
    let report = verify(&lov, &table).context("stage lovasz certificate")?;
    ok &= report.is_valid();
    if out.json {
        write_report(&mut out, &report, &lov_src)?;
        out.record(json!({ "stage": "verdict", "certificates_seconds": start.elapsed().as_secs_f64(), "entangled": ok }))?;
    } else {
        out.line("== theta-body certificate")?;
        write_report(&mut out, &report, &lov_src)?;
        out.line(format!("exact verification took {:.2} s", start.elapsed().as_secs_f64()))?;
        if ok {
            out.line(VERDICT_LINE)?;
        } else {
            out.line("PHI_E8: NOT ESTABLISHED (see failing stages above)")?;
        }
    }
    Ok(ok)
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}
