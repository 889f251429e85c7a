//! Command-line front end. Every subcommand writes its report to `--out` and
//! prints a one-line summary.
//!
//! Exit codes: 0 when the run completed and every check passed, 1 when a
//! residual or bound check failed, 2 on invalid input or any other error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use triop::opint::HaagerupRep;
use triop::rng::derive_seed;
use triop::search::{escape_probe, run_search, search_counterexample, trend_report, write_trend_csv, SearchConfig, TrendSample};
use triop::symbol::DEFAULT_OVERSAMPLE;
use triop::theorems::{
    bound_case_for_rep, generate_separated_instance, random_bound_case, sweep_dimensions, verify_pair_formula,
    write_ratio_csv, BoundMode, BoundReport, PerturbationInstance,
};
use triop::{Error, SchattenIndex, TrigPoly2};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "triop", version, about = "Double and triple operator integral harness")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the divided-difference perturbation identity on random or loaded instances.
    VerifyIdentity(VerifyIdentityArgs),
    /// Check Schatten-norm bounds for triple operator integrals.
    CheckBounds(CheckBoundsArgs),
    /// Normalized Lipschitz ratios over p and dimension, as CSV.
    LipschitzSweep(SweepArgs),
    /// Hill-climbing search for large Lipschitz ratios at p > 2.
    Search(SearchArgs),
    /// Adjacent-measure triple integrals against the Haagerup-type bound, as CSV.
    EscapeProbe(EscapeArgs),
    /// Besov surrogate norm of a symbol file.
    Besov(BesovArgs),
}

#[derive(Debug, Args)]
pub struct VerifyIdentityArgs {
    /// Dimensions, cycled over samples.
    #[arg(long, value_delimiter = ',', default_value = "4")]
    pub dim: Vec<usize>,
    /// Symbol degrees, cycled over samples after the dimensions.
    #[arg(long, value_delimiter = ',', default_value = "3")]
    pub degree: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Instance file (one instance or an array); replaces random generation.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CheckBoundsArgs {
    /// One of 2.1i, 2.1ii, 2.1iii, 2.2first, 2.2second.
    #[arg(long)]
    pub mode: String,
    #[arg(long)]
    pub p: SchattenIndex,
    /// Second index; required by 2.1iii, 2.2first and 2.2second.
    #[arg(long)]
    pub q: Option<SchattenIndex>,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest random dimension; with --rep, the exact dimension.
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long, default_value_t = 6)]
    pub max_jk: usize,
    /// Representation file; replaces random representations.
    #[arg(long)]
    pub rep: Option<PathBuf>,
    /// Use T = I with --rep.
    #[arg(long)]
    pub t_identity: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_value = "1,1.5,2")]
    pub p: Vec<SchattenIndex>,
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16")]
    pub dim: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    #[arg(long, default_value_t = 3)]
    pub degree: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Configuration file; excludes the individual search flags.
    #[arg(long, conflicts_with_all = ["p", "dim", "degree", "budget", "restarts", "seed", "step_scale"])]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub p: Option<SchattenIndex>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub step_scale: Option<f64>,
    /// Allow p <= 2, for control runs.
    #[arg(long)]
    pub control: bool,
    /// Also write the best instance on its own.
    #[arg(long)]
    pub instance_out: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EscapeArgs {
    #[arg(long, default_value = "1")]
    pub p: SchattenIndex,
    #[arg(long, value_delimiter = ',', default_value = "4,8,16,32")]
    pub dim: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Per-dimension summary of lhs/rhs.
    #[arg(long)]
    pub trend_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BesovArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_OVERSAMPLE)]
    pub oversample: usize,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `argv` (including the program name) and runs the subcommand.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(Outcome { passed, summary }) => {
            println!("{summary}");
            if passed {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INVALID
        }
    }
}

struct Outcome {
    passed: bool,
    summary: String,
}

fn execute(cmd: Command) -> triop::Result<Outcome> {
    match cmd {
        Command::VerifyIdentity(a) => verify_identity(a),
        Command::CheckBounds(a) => check_bounds(a),
        Command::LipschitzSweep(a) => lipschitz_sweep(a),
        Command::Search(a) => search(a),
        Command::EscapeProbe(a) => escape(a),
        Command::Besov(a) => besov(a),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> triop::Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn create(path: &Path) -> triop::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> triop::Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

#[derive(Debug, Serialize)]
struct IdentityRow {
    index: usize,
    dim: usize,
    degree: usize,
    seed: u64,
    residual: f64,
    lhs_norm: f64,
    passed: bool,
}

#[derive(Debug, Serialize)]
struct IdentityReport {
    tol: f64,
    max_residual: f64,
    failures: usize,
    instances: Vec<IdentityRow>,
}

/// Instance `i` uses `dims[i % len]` and cycles through the degrees once per
/// pass over the dimensions.
fn identity_instances(a: &VerifyIdentityArgs) -> triop::Result<Vec<PerturbationInstance>> {
    if let Some(path) = &a.input {
        let value: serde_json::Value = read_json(path)?;
        return Ok(if value.is_array() { serde_json::from_value(value)? } else { vec![serde_json::from_value(value)?] });
    }
    if a.dim.is_empty() || a.degree.is_empty() {
        return Err(Error::Input("need at least one dimension and one degree".into()));
    }
    (0..a.samples)
        .map(|i| {
            let dim = a.dim[i % a.dim.len()];
            let degree = a.degree[(i / a.dim.len()) % a.degree.len()];
            generate_separated_instance(dim, degree, SchattenIndex::TWO, derive_seed(&[a.seed, i as u64]))
        })
        .collect()
}

fn verify_identity(a: VerifyIdentityArgs) -> triop::Result<Outcome> {
    if !(a.tol > 0.0) {
        return Err(Error::Input(format!("--tol must be positive, got {}", a.tol)));
    }
    let mut instances = Vec::new();
    for (index, inst) in identity_instances(&a)?.iter().enumerate() {
        let check = verify_pair_formula(inst, a.tol)?;
        instances.push(IdentityRow {
            index,
            dim: inst.dim(),
            degree: inst.f.degree(),
            seed: inst.seed,
            residual: check.residual,
            lhs_norm: check.lhs_norm,
            passed: check.passed,
        });
    }
    let failures = instances.iter().filter(|r| !r.passed).count();
    let report = IdentityReport { tol: a.tol, max_residual: max_of(instances.iter().map(|r| r.residual)), failures, instances };
    write_json(&a.out, &report)?;
    Ok(Outcome {
        passed: failures == 0,
        summary: format!(
            "verify-identity: {} instances, max residual {:.3e}, {} above tol {:e}",
            report.instances.len(),
            report.max_residual,
            failures,
            a.tol
        ),
    })
}

#[derive(Debug, Serialize)]
struct BoundsReport {
    mode: BoundMode,
    p: SchattenIndex,
    q: Option<SchattenIndex>,
    violations: usize,
    max_ratio: f64,
    reports: Vec<BoundReport>,
}

fn check_bounds(a: CheckBoundsArgs) -> triop::Result<Outcome> {
    let mode = BoundMode::from_tag(&a.mode)?;
    if mode == BoundMode::Adjacent {
        return Err(Error::Input("adjacent probes belong to escape-probe".into()));
    }
    let q = match (mode, a.q) {
        (BoundMode::LeftBounded | BoundMode::RightBounded, q) => q.unwrap_or(SchattenIndex::INFINITY),
        (_, Some(q)) => q,
        (_, None) => return Err(Error::Input(format!("mode {} needs --q", mode.tag()))),
    };
    mode.indices(a.p, q)?;
    let rep: Option<HaagerupRep> = a.rep.as_deref().map(read_json).transpose()?;
    let mut reports = Vec::with_capacity(a.samples);
    for i in 0..a.samples {
        let seed = derive_seed(&[a.seed, i as u64]);
        let case = match &rep {
            Some(rep) => {
                let dim = a.dim.unwrap_or_else(|| rep.grids().iter().map(Vec::len).max().unwrap_or(1));
                bound_case_for_rep(rep.clone(), dim, a.t_identity, seed)?
            }
            None => random_bound_case(mode, a.dim.unwrap_or(12), a.max_jk, seed)?,
        };
        reports.push(case.check(a.p, q, mode)?);
    }
    let violations = reports.iter().filter(|r| !r.passed).count();
    let report = BoundsReport {
        mode,
        p: a.p,
        q: a.q,
        violations,
        max_ratio: max_of(reports.iter().map(BoundReport::ratio).filter(|r| r.is_finite())),
        reports,
    };
    write_json(&a.out, &report)?;
    Ok(Outcome {
        passed: violations == 0,
        summary: format!(
            "check-bounds {}: {} cases, {} violations, max lhs/rhs {:.6}",
            mode.tag(),
            report.reports.len(),
            violations,
            report.max_ratio
        ),
    })
}

fn lipschitz_sweep(a: SweepArgs) -> triop::Result<Outcome> {
    let records = sweep_dimensions(&a.p, &a.dim, a.samples, a.seed, a.degree)?;
    write_ratio_csv(&records, create(&a.out)?)?;
    let max = max_of(records.iter().map(|r| r.normalized_ratio));
    Ok(Outcome { passed: true, summary: format!("lipschitz-sweep: {} records, max normalized_ratio {max:.6}", records.len()) })
}

fn search_config(a: &SearchArgs) -> triop::Result<SearchConfig> {
    if let Some(path) = &a.config {
        return read_json(path);
    }
    let p = a.p.ok_or_else(|| Error::Input("search needs --p or --config".into()))?;
    Ok(SearchConfig {
        p,
        dim: a.dim.unwrap_or(8),
        symbol_degree: a.degree.unwrap_or(3),
        budget: a.budget.unwrap_or(500),
        restarts: a.restarts.unwrap_or(4),
        master_seed: a.seed.unwrap_or(0),
        step_scale: a.step_scale.unwrap_or(0.3),
    })
}

fn search(a: SearchArgs) -> triop::Result<Outcome> {
    let cfg = search_config(&a)?;
    let report = if a.control { run_search(&cfg)? } else { search_counterexample(&cfg)? };
    write_json(&a.out, &report)?;
    if let Some(path) = &a.instance_out {
        write_json(path, &report.best_instance)?;
    }
    Ok(Outcome {
        passed: true,
        summary: format!(
            "search p={} dim={}: best normalized_ratio {:.6} after {} accepted moves (restart {})",
            cfg.p,
            cfg.dim,
            report.best_ratio,
            report.trajectory.len() - 1,
            report.best_restart
        ),
    })
}

#[derive(Debug, Serialize)]
struct EscapeRow {
    dim: usize,
    sample_index: usize,
    seed: u64,
    lhs: f64,
    rhs: f64,
    ratio: f64,
    passed: bool,
}

fn escape(a: EscapeArgs) -> triop::Result<Outcome> {
    let mut rows = Vec::new();
    for &dim in &a.dim {
        for i in 0..a.samples {
            let seed = derive_seed(&[a.seed, dim as u64, i as u64]);
            let r = escape_probe(a.p, dim, seed)?;
            rows.push(EscapeRow { dim, sample_index: i, seed, lhs: r.lhs, rhs: r.rhs, ratio: r.ratio(), passed: r.passed });
        }
    }
    let mut w = csv::Writer::from_writer(create(&a.out)?);
    for r in &rows {
        w.serialize(r).map_err(Error::from)?;
    }
    w.flush()?;
    let max = max_of(rows.iter().map(|r| r.ratio));
    if let Some(path) = &a.trend_out {
        let samples: Vec<TrendSample> = rows.iter().map(|r| TrendSample { group: r.dim, value: r.ratio }).collect();
        write_trend_csv(&trend_report(&samples)?, create(path)?)?;
    }
    Ok(Outcome { passed: true, summary: format!("escape-probe p={}: {} probes, max lhs/rhs {max:.6}", a.p, rows.len()) })
}

fn besov(a: BesovArgs) -> triop::Result<Outcome> {
    let f: TrigPoly2 = read_json(&a.input)?;
    let profile = f.besov_norm(a.oversample)?;
    write_json(&a.out, &profile)?;
    Ok(Outcome {
        passed: true,
        summary: format!("besov: degree {}, {} blocks, norm {:.6}", f.degree(), profile.block_norms.len(), profile.besov_norm),
    })
}
