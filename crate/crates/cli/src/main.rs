//! `dilation`: verification suites, representation-theory tables and matrix
//! dumps for the dilation-core library.
//!
//! Exit codes: 0 when every in-promise check passes, 1 when a check fails,
//! 2 for usage or configuration errors (including budget overruns).

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dilation_core::circuits::verify::{canonical_suite, default_grid, SUITES};
use dilation_core::circuits::{verify, CircuitReport, GridPoint, VerifyOptions};
use dilation_core::combinatorics::{factorial, partitions, sym_dim, unitary_dim, Partition};
use dilation_core::kronecker::{kronecker_table, kronecker_transform};
use dilation_core::linalg::CMat;
use dilation_core::schur::{check_budget, SchurTransform, DEFAULT_BUDGET, ORDERING_VERSION};
use dilation_core::symrep::{fourier_labels, qft_from_group, SymmetricGroup};
use dilation_core::Error;

#[derive(Parser, Debug)]
#[command(name = "dilation", version, about = "Schur-Weyl tables, verification suites and matrix dumps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Irrep dimensions (λ, m_λ, d_λ) for partitions of n.
    Dims(Common),
    /// Kronecker coefficients g(μ, ν, λ) for partitions of n.
    Kronecker(Common),
    /// Run a verification suite.
    Verify {
        /// schur, qft, kronecker, haar, purification, dilation,
        /// dilation-kronecker, petz, comb or all (aliases: thm1, thm2, fig3-vs-fig2a).
        suite: String,
        #[command(flatten)]
        common: Common,
        /// Random samples per grid point (suite default if omitted).
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Write a transform matrix with its row labels.
    Dump {
        /// schur, qft or cg.
        object: String,
        #[command(flatten)]
        common: Common,
        /// First partition for `cg`, e.g. 2,1.
        #[arg(long)]
        mu: Option<String>,
        /// Second partition for `cg`.
        #[arg(long)]
        nu: Option<String>,
    },
}

#[derive(Args, Debug, Clone)]
struct Common {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long = "d-in")]
    d_in: Option<usize>,
    #[arg(long = "d-out")]
    d_out: Option<usize>,
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// Failure modes mapped onto exit codes.
enum Failure {
    Usage(String),
    Checks,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Dims(c) => cmd_dims(&c),
        Command::Kronecker(c) => cmd_kronecker(&c),
        Command::Verify { suite, common, samples } => cmd_verify(&suite, &common, samples),
        Command::Dump { object, common, mu, nu } => cmd_dump(&object, &common, mu.as_deref(), nu.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn validate(c: &Common) -> Result<(), Failure> {
    if c.budget == 0 {
        return Err(Failure::Usage("--budget must be positive".into()));
    }
    if let Some(t) = c.tol {
        if !(t > 0.0) {
            return Err(Failure::Usage("--tol must be positive".into()));
        }
    }
    Ok(())
}

fn require_n(c: &Common) -> Result<usize, Failure> {
    let n = c.n.ok_or_else(|| Failure::Usage("--n is required".into()))?;
    if n == 0 {
        return Err(Failure::Usage("--n must be positive".into()));
    }
    check_budget(&format!("S_{n} register"), factorial(n).min(usize::MAX as u128) as usize, c.budget)?;
    Ok(n)
}

/// Print to stdout, or write to `--out` when given.
fn emit(c: &Common, body: &str) -> Result<(), Failure> {
    match &c.out {
        Some(path) => std::fs::write(path, body)?,
        None => print!("{body}"),
    }
    Ok(())
}

fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let line = |cells: Vec<String>| {
        cells
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let _ = writeln!(out, "{}", line(header.iter().map(|h| h.to_string()).collect()));
    for row in rows {
        let _ = writeln!(out, "{}", line(row.clone()));
    }
    out
}

fn json_line<T: Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| Failure::Usage(e.to_string()))
}

#[derive(Serialize)]
struct DimRow {
    lambda: Vec<usize>,
    m: usize,
    d: usize,
}

fn cmd_dims(c: &Common) -> Result<(), Failure> {
    validate(c)?;
    let n = require_n(c)?;
    let d = c.d.ok_or_else(|| Failure::Usage("--d is required".into()))?;
    let rows: Vec<DimRow> = partitions(n)?
        .iter()
        .map(|p| DimRow {
            lambda: p.parts().to_vec(),
            m: sym_dim(p),
            d: unitary_dim(p, d),
        })
        .collect();
    let body = match c.format {
        Format::Json => json_line(&rows)?,
        Format::Text => table(
            &["lambda", "m_lambda", "d_lambda"],
            &rows
                .iter()
                .map(|r| vec![fmt_parts(&r.lambda), r.m.to_string(), r.d.to_string()])
                .collect::<Vec<_>>(),
        ),
    };
    emit(c, &body)
}

#[derive(Serialize)]
struct KroneckerRow {
    mu: Vec<usize>,
    nu: Vec<usize>,
    lambda: Vec<usize>,
    g: usize,
}

fn cmd_kronecker(c: &Common) -> Result<(), Failure> {
    validate(c)?;
    let n = require_n(c)?;
    let rows: Vec<KroneckerRow> = kronecker_table(n)?
        .into_iter()
        .map(|e| KroneckerRow {
            mu: e.mu.parts().to_vec(),
            nu: e.nu.parts().to_vec(),
            lambda: e.lambda.parts().to_vec(),
            g: e.g,
        })
        .collect();
    let body = match c.format {
        Format::Json => json_line(&rows)?,
        Format::Text => table(
            &["mu", "nu", "lambda", "g"],
            &rows
                .iter()
                .map(|r| vec![fmt_parts(&r.mu), fmt_parts(&r.nu), fmt_parts(&r.lambda), r.g.to_string()])
                .collect::<Vec<_>>(),
        ),
    };
    emit(c, &body)
}

fn fmt_parts(parts: &[usize]) -> String {
    let body: Vec<String> = parts.iter().map(|p| p.to_string()).collect();
    format!("[{}]", body.join(","))
}

#[derive(Serialize)]
struct Check {
    name: String,
    residual: f64,
    tolerance: f64,
    pass: bool,
    note: String,
}

#[derive(Serialize)]
struct RunParams {
    n: Option<usize>,
    d: Option<usize>,
    d_in: Option<usize>,
    d_out: Option<usize>,
    rank: Option<usize>,
    tol: Option<f64>,
    budget: usize,
    samples: Option<usize>,
}

#[derive(Serialize)]
struct Report {
    suite: String,
    params: RunParams,
    seed: u64,
    tool_version: &'static str,
    checks: Vec<Check>,
    total_runtime_ms: u128,
}

/// Default grid of `suite` with every given flag overriding its field.
fn grid_for(suite: &str, c: &Common) -> Option<Vec<GridPoint>> {
    if c.n.is_none() && c.d.is_none() && c.d_in.is_none() && c.d_out.is_none() && c.rank.is_none() {
        return None;
    }
    let base = default_grid(suite);
    let base = if base.is_empty() { vec![GridPoint::new(2, 2, 2, 2)] } else { base };
    let mut grid: Vec<GridPoint> = Vec::new();
    for p in base {
        let q = GridPoint::new(
            c.n.unwrap_or(p.n),
            c.d_in.or(c.d).unwrap_or(p.d_in),
            c.d_out.or(c.d).unwrap_or(p.d_out),
            c.rank.unwrap_or(p.r),
        );
        if !grid.contains(&q) {
            grid.push(q);
        }
    }
    Some(grid)
}

fn check_name(r: &CircuitReport) -> String {
    let p = r.params;
    format!(
        "{}/{} n={} d_in={} d_out={} r={}",
        r.construction, r.name, p.n, p.d_in, p.d_out, p.r
    )
}

fn cmd_verify(suite: &str, c: &Common, samples: Option<usize>) -> Result<(), Failure> {
    validate(c)?;
    let canonical = canonical_suite(suite).ok_or_else(|| {
        Failure::Usage(format!(
            "unknown suite `{suite}`; expected one of {}",
            SUITES.join(", ")
        ))
    })?;
    let start = Instant::now();
    let mut reports = Vec::new();
    let parts: Vec<&str> = if canonical == "all" {
        SUITES.iter().copied().filter(|s| *s != "all").collect()
    } else {
        vec![canonical]
    };
    for part in parts {
        let options = VerifyOptions {
            seed: c.seed,
            tol: c.tol,
            budget: c.budget,
            samples,
            grid: grid_for(part, c),
        };
        reports.extend(verify(part, &options)?);
    }
    let all_ok = reports.iter().all(CircuitReport::ok);
    let report = Report {
        suite: suite.to_string(),
        params: RunParams {
            n: c.n,
            d: c.d,
            d_in: c.d_in,
            d_out: c.d_out,
            rank: c.rank,
            tol: c.tol,
            budget: c.budget,
            samples,
        },
        seed: c.seed,
        tool_version: env!("CARGO_PKG_VERSION"),
        checks: reports
            .iter()
            .map(|r| Check {
                name: check_name(r),
                residual: r.residual,
                tolerance: r.tolerance,
                pass: r.ok(),
                note: r.note.clone(),
            })
            .collect(),
        total_runtime_ms: start.elapsed().as_millis(),
    };
    let json = json_line(&report)?;
    match c.format {
        Format::Json => print!("{json}"),
        Format::Text => {
            for r in &reports {
                let status = match (r.in_promise, r.pass) {
                    (false, _) => "SKIP",
                    (true, true) => "PASS",
                    (true, false) => "FAIL",
                };
                let note = if r.note.is_empty() { String::new() } else { format!("  ({})", r.note) };
                println!(
                    "{status}  {}  residual {:.3e}  tolerance {:.1e}{note}",
                    check_name(r),
                    r.residual,
                    r.tolerance
                );
            }
            let failed = reports.iter().filter(|r| !r.ok()).count();
            println!(
                "{} checks, {} failed, {} ms",
                reports.len(),
                failed,
                report.total_runtime_ms
            );
        }
    }
    if let Some(path) = &c.out {
        std::fs::write(path, &json)?;
    }
    if all_ok {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

/// A dense matrix with one label per row.
struct Dump {
    object: String,
    matrix: CMat,
    labels: Vec<String>,
}

#[derive(Serialize)]
struct DumpJson<'a> {
    object: &'a str,
    dims: [usize; 2],
    ordering: &'static str,
    labels: &'a [String],
    entries: Vec<Vec<[f64; 2]>>,
}

fn parse_partition(flag: &str, value: Option<&str>) -> Result<Partition, Failure> {
    let v = value.ok_or_else(|| Failure::Usage(format!("--{flag} is required")))?;
    v.parse::<Partition>()
        .map_err(|_| Failure::Usage(format!("--{flag} `{v}` is not a partition")))
}

fn cmd_dump(object: &str, c: &Common, mu: Option<&str>, nu: Option<&str>) -> Result<(), Failure> {
    validate(c)?;
    let dump = match object {
        "qft" => {
            let n = require_n(c)?;
            let group = SymmetricGroup::cached(n)?;
            let irreps = group.irreps();
            let labels = fourier_labels(&group)
                .iter()
                .map(|l| format!("lambda={} i={} j={}", irreps[l.irrep].shape, l.i, l.j))
                .collect();
            Dump {
                object: format!("qft n={n}"),
                matrix: qft_from_group(&group),
                labels,
            }
        }
        "schur" => {
            let n = require_n(c)?;
            let d = c.d.ok_or_else(|| Failure::Usage("--d is required".into()))?;
            let schur = SchurTransform::with_budget(n, d, c.budget)?;
            let labels = schur
                .labels()
                .iter()
                .map(|l| format!("lambda={} u={} i={}", schur.blocks()[l.block].shape, l.u, l.i))
                .collect();
            Dump {
                object: format!("schur n={n} d={d}"),
                matrix: schur.unitary().clone(),
                labels,
            }
        }
        "cg" => {
            let mu = parse_partition("mu", mu)?;
            let nu = parse_partition("nu", nu)?;
            if mu.n() != nu.n() {
                return Err(Failure::Usage(format!("{mu} and {nu} partition different n")));
            }
            check_budget(&format!("S_{} register", mu.n()), factorial(mu.n()) as usize, c.budget)?;
            let cg = kronecker_transform(&mu, &nu)?;
            let labels = cg
                .labels()
                .iter()
                .map(|l| format!("lambda={} i={} a={}", cg.blocks()[l.block].shape, l.i, l.a))
                .collect();
            Dump {
                object: format!("cg mu={mu} nu={nu}"),
                matrix: cg.unitary(),
                labels,
            }
        }
        other => {
            return Err(Failure::Usage(format!(
                "unknown dump object `{other}`; expected schur, qft or cg"
            )))
        }
    };
    let body = match c.format {
        Format::Json => json_line(&DumpJson {
            object: &dump.object,
            dims: [dump.matrix.nrows(), dump.matrix.ncols()],
            ordering: ORDERING_VERSION,
            labels: &dump.labels,
            entries: (0..dump.matrix.nrows())
                .map(|i| dump.matrix.row(i).iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        })?,
        Format::Text => dump_text(&dump),
    };
    emit(c, &body)
}

fn dump_text(dump: &Dump) -> String {
    let m = &dump.matrix;
    let mut out = String::new();
    let _ = writeln!(out, "# object: {}", dump.object);
    let _ = writeln!(out, "# dims: {} {}", m.nrows(), m.ncols());
    let _ = writeln!(out, "# ordering: {ORDERING_VERSION}");
    for (i, label) in dump.labels.iter().enumerate() {
        let _ = writeln!(out, "# row {i}: {label}");
    }
    for i in 0..m.nrows() {
        let row: Vec<String> = m.row(i).iter().map(|z| format!("{:.17e} {:.17e}", z.re, z.im)).collect();
        let _ = writeln!(out, "{}", row.join("  "));
    }
    out
}
