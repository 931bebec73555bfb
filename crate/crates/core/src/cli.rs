//! Command-line front end.
//!
//! Data goes to stdout (or `--out`), diagnostics to stderr. Exit codes: 0 on
//! success, 1 when `validate` finds a tolerance breach, 2 on usage errors.
//! Every subcommand accepts `--config <file>`: a JSON object whose keys are
//! the flag names in snake case (`m_min`, `beta_max`, …). Flags given on the
//! command line override the file.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::analysis::{AnalysisOptions, Analyzer, DEFAULT_EPSILON};
use crate::error::Error;
use crate::exec::Execution;
use crate::model::SystemParams;
use crate::optimizer::{optimize_beta, OptimizeConfig, Optimum, SlotSearch};
use crate::oracle::{exact_per_with, MAX_ORACLE_CELLS};
use crate::simulator::simulate_with;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "frameless-mud", version, about = "Frameless ALOHA with k-MUD: analysis, simulation, optimization")]
struct Cli {
    /// Run every grid point on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact packet error rate and throughput over a range of m.
    Analyze(AnalyzeArgs),
    /// Monte Carlo estimates with standard errors over a range of m.
    Simulate(SimulateArgs),
    /// Search the access scale beta maximizing peak throughput.
    Optimize(OptimizeArgs),
    /// Cross-check analysis, oracle and simulator on small instances.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchArg {
    Grid,
    Climb,
}

#[derive(Debug, Args, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SweepArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    m_min: Option<usize>,
    #[arg(long)]
    m_max: Option<usize>,
    #[arg(long)]
    m_step: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    sweep: SweepArgs,
    /// Pruning threshold (0 disables pruning).
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct AnalyzeFile {
    #[serde(flatten)]
    sweep: SweepArgs,
    epsilon: Option<f64>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    sweep: SweepArgs,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SimulateFile {
    #[serde(flatten)]
    sweep: SweepArgs,
    runs: Option<usize>,
    seed: Option<u64>,
}

#[derive(Debug, Args, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct OptimizeArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    beta_min: Option<f64>,
    #[arg(long)]
    beta_max: Option<f64>,
    #[arg(long)]
    coarse_step: Option<f64>,
    #[arg(long)]
    refine_step: Option<f64>,
    #[arg(long)]
    m_min: Option<usize>,
    #[arg(long)]
    m_max: Option<usize>,
    /// Starting m for `--search climb`.
    #[arg(long)]
    m_hint: Option<usize>,
    #[arg(long, value_enum)]
    search: Option<SearchArg>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ValidateArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long)]
    max_n: Option<usize>,
    #[arg(long)]
    max_m: Option<usize>,
    #[arg(long)]
    max_k: Option<usize>,
    /// Largest n*m on the grid (oracle budget is 24).
    #[arg(long)]
    max_nm: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Allowed |analysis - oracle| packet error rate gap.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Added to every analytic error rate; exercises the failure path.
    #[arg(long, hide = true)]
    inject_fault: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Usage(String);

impl From<Error> for Usage {
    fn from(e: Error) -> Self {
        Usage(e.to_string())
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T, Usage> {
    Err(Usage(msg.into()))
}

fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, Usage> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(path).map_err(|e| Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Usage(format!("invalid config {}: {e}", path.display())))
}

fn require<T>(value: Option<T>, flag: &str) -> Result<T, Usage> {
    value.ok_or_else(|| Usage(format!("missing required flag --{flag}")))
}

impl SweepArgs {
    fn merge(self, file: SweepArgs) -> SweepArgs {
        SweepArgs {
            n: self.n.or(file.n),
            k: self.k.or(file.k),
            beta: self.beta.or(file.beta),
            m_min: self.m_min.or(file.m_min),
            m_max: self.m_max.or(file.m_max),
            m_step: self.m_step.or(file.m_step),
            format: self.format.or(file.format),
            out: self.out.or(file.out),
        }
    }

    /// Base parameters (at `m_min`) and the list of m values.
    fn resolve(&self) -> Result<(SystemParams, Vec<usize>, Format), Usage> {
        let n = require(self.n, "n")?;
        let k = require(self.k, "k")?;
        let beta = require(self.beta, "beta")?;
        let m_min = self.m_min.unwrap_or(1);
        let m_max = self.m_max.unwrap_or(m_min);
        let step = self.m_step.unwrap_or(1);
        if m_min > m_max {
            return usage(format!("--m-min ({m_min}) exceeds --m-max ({m_max})"));
        }
        if step == 0 {
            return usage("--m-step must be at least 1");
        }
        let format = self.format.unwrap_or(Format::Csv);
        if format == Format::Table {
            return usage("--format table is only available for optimize");
        }
        let params = SystemParams::new(n, m_min, k, beta)?;
        Ok((params, (m_min..=m_max).step_by(step).collect(), format))
    }
}

#[derive(Debug, Serialize)]
struct CurveRow {
    m: usize,
    m_over_n: f64,
    per: f64,
    throughput: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    per_stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    thr_stderr: Option<f64>,
    pruned_mass: f64,
}

#[derive(Debug, Serialize)]
struct ParamsEcho {
    command: &'static str,
    n: usize,
    k: usize,
    beta: f64,
    p: f64,
    m_values: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    runs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Debug, Serialize)]
struct CurveDoc<'a> {
    params: ParamsEcho,
    rows: &'a [CurveRow],
}

fn write_curve(rows: &[CurveRow], params: ParamsEcho, format: Format) -> Result<Vec<u8>, Usage> {
    match format {
        Format::Json => {
            let doc = CurveDoc { params, rows };
            let mut out = serde_json::to_vec_pretty(&doc).expect("curve serializes");
            out.push(b'\n');
            Ok(out)
        }
        _ => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in rows {
                w.serialize(row).map_err(|e| Usage(e.to_string()))?;
            }
            w.into_inner().map_err(|e| Usage(e.to_string()))
        }
    }
}

fn emit(bytes: &[u8], out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), Usage> {
    match out {
        Some(path) => fs::write(path, bytes).map_err(|e| Usage(format!("cannot write {}: {e}", path.display()))),
        None => stdout.write_all(bytes).map_err(|e| Usage(e.to_string())),
    }
}

fn cmd_analyze(args: AnalyzeArgs, exec: Execution, stdout: &mut dyn Write) -> Result<i32, Usage> {
    let file: AnalyzeFile = load_config(args.config.as_deref())?;
    let sweep = args.sweep.merge(file.sweep);
    let epsilon = args.epsilon.or(file.epsilon).unwrap_or(DEFAULT_EPSILON);
    let (params, ms, format) = sweep.resolve()?;
    let analyzer = Analyzer::new(&params, AnalysisOptions::with_epsilon(epsilon))?;
    let n = params.n() as f64;
    let rows: Vec<CurveRow> = exec
        .map_indexed(ms.len(), |i| analyzer.run_slots(ms[i]))
        .into_iter()
        .map(|r| CurveRow {
            m: r.params.m(),
            m_over_n: r.params.m() as f64 / n,
            per: r.per,
            throughput: r.throughput,
            per_stderr: None,
            thr_stderr: None,
            pruned_mass: r.pruned_mass,
        })
        .collect();
    let echo = ParamsEcho {
        command: "analyze",
        n: params.n(),
        k: params.k(),
        beta: params.beta(),
        p: params.p(),
        m_values: ms,
        epsilon: Some(epsilon),
        runs: None,
        seed: None,
    };
    emit(&write_curve(&rows, echo, format)?, sweep.out.as_deref(), stdout)?;
    Ok(EXIT_OK)
}

fn cmd_simulate(args: SimulateArgs, exec: Execution, stdout: &mut dyn Write) -> Result<i32, Usage> {
    let file: SimulateFile = load_config(args.config.as_deref())?;
    let sweep = args.sweep.merge(file.sweep);
    let runs = args.runs.or(file.runs).unwrap_or(10_000);
    let seed = args.seed.or(file.seed).unwrap_or(1);
    if runs == 0 {
        return usage("--runs must be at least 1");
    }
    let (params, ms, format) = sweep.resolve()?;
    let n = params.n() as f64;
    let mut rows = Vec::with_capacity(ms.len());
    for &m in &ms {
        let s = simulate_with(&params.with_m(m), runs, seed, exec)?;
        rows.push(CurveRow {
            m,
            m_over_n: m as f64 / n,
            per: s.per_estimate,
            throughput: s.throughput_estimate,
            per_stderr: Some(s.per_stderr),
            thr_stderr: Some(s.throughput_stderr),
            pruned_mass: 0.0,
        });
    }
    let echo = ParamsEcho {
        command: "simulate",
        n: params.n(),
        k: params.k(),
        beta: params.beta(),
        p: params.p(),
        m_values: ms,
        epsilon: None,
        runs: Some(runs),
        seed: Some(seed),
    };
    emit(&write_curve(&rows, echo, format)?, sweep.out.as_deref(), stdout)?;
    Ok(EXIT_OK)
}

fn table_row(o: &Optimum) -> String {
    format!(
        "| {} | {} | {:.2} | {:.4} | {:.2} |",
        o.n, o.k, o.beta_opt, o.t_max, o.m_over_n
    )
}

fn cmd_optimize(
    args: OptimizeArgs,
    exec: Execution,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, Usage> {
    let file: OptimizeArgs = load_config(args.config.as_deref())?;
    let n = require(args.n.or(file.n), "n")?;
    let k = require(args.k.or(file.k), "k")?;
    let mut cfg = OptimizeConfig::new(n, k);
    cfg.beta_min = args.beta_min.or(file.beta_min).unwrap_or(cfg.beta_min);
    cfg.beta_max = args.beta_max.or(file.beta_max).unwrap_or(cfg.beta_max);
    cfg.coarse_step = args.coarse_step.or(file.coarse_step).unwrap_or(cfg.coarse_step);
    cfg.refine_step = args.refine_step.or(file.refine_step).unwrap_or(cfg.refine_step);
    cfg.m_min = args.m_min.or(file.m_min).unwrap_or(cfg.m_min);
    cfg.m_max = args.m_max.or(file.m_max).unwrap_or(cfg.m_max);
    cfg.m_hint = args.m_hint.or(file.m_hint);
    cfg.epsilon = args.epsilon.or(file.epsilon).unwrap_or(cfg.epsilon);
    cfg.search = match args.search.or(file.search) {
        Some(SearchArg::Climb) => SlotSearch::Climb,
        _ => SlotSearch::Grid,
    };
    cfg.exec = exec;
    if cfg.beta_min > cfg.beta_max {
        return usage(format!("--beta-min ({}) exceeds --beta-max ({})", cfg.beta_min, cfg.beta_max));
    }
    if cfg.m_min > cfg.m_max {
        return usage(format!("--m-min ({}) exceeds --m-max ({})", cfg.m_min, cfg.m_max));
    }
    let format = args.format.or(file.format).unwrap_or(Format::Json);
    let optimum = optimize_beta(&cfg)?;
    let _ = writeln!(stderr, "{}", table_row(&optimum));
    let bytes = match format {
        Format::Table => format!(
            "| n | k | beta_opt | T_max | m/n (T_max) |\n|---|---|---|---|---|\n{}\n",
            table_row(&optimum)
        )
        .into_bytes(),
        Format::Json => {
            let mut v = serde_json::to_vec_pretty(&optimum).expect("optimum serializes");
            v.push(b'\n');
            v
        }
        Format::Csv => return usage("optimize supports --format json or table"),
    };
    emit(&bytes, args.out.or(file.out).as_deref(), stdout)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct ValidationRow {
    n: usize,
    m: usize,
    k: usize,
    beta: f64,
    oracle_per: f64,
    analysis_per: f64,
    analysis_gap: f64,
    sim_per: f64,
    sim_stderr: f64,
    sim_gap_sigmas: f64,
    ok: bool,
}

fn cmd_validate(
    args: ValidateArgs,
    exec: Execution,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, Usage> {
    let file: ValidateArgs = load_config(args.config.as_deref())?;
    let max_n = args.max_n.or(file.max_n).unwrap_or(4);
    let max_m = args.max_m.or(file.max_m).unwrap_or(4);
    let max_k = args.max_k.or(file.max_k).unwrap_or(2);
    let max_nm = args.max_nm.or(file.max_nm).unwrap_or(16);
    let runs = args.runs.or(file.runs).unwrap_or(20_000);
    let seed = args.seed.or(file.seed).unwrap_or(1);
    let tolerance = args.tolerance.or(file.tolerance).unwrap_or(1e-10);
    let fault = args.inject_fault.or(file.inject_fault).unwrap_or(0.0);
    if max_nm > MAX_ORACLE_CELLS {
        return Err(Error::OracleBudget {
            nm: max_nm,
            max: MAX_ORACLE_CELLS,
        }
        .into());
    }
    if runs == 0 || max_n == 0 || max_k == 0 {
        return usage("--runs, --max-n and --max-k must be at least 1");
    }

    let mut rows = Vec::new();
    for n in 1..=max_n {
        for m in 1..=max_m {
            if n * m > max_nm {
                continue;
            }
            for k in 1..=max_k.min(crate::analysis::MAX_K) {
                let mut betas = vec![0.5, 1.0, 2.0, n as f64];
                betas.retain(|&b| b <= n as f64);
                betas.dedup();
                for beta in betas {
                    let params = SystemParams::new(n, m, k, beta)?;
                    let oracle = exact_per_with(&params, exec)?;
                    let analysis = Analyzer::new(&params, AnalysisOptions::exact())?.run().per + fault;
                    let sim = simulate_with(&params, runs, seed, exec)?;
                    let gap = (analysis - oracle).abs();
                    let sigma = sim.per_stderr.max(1.0 / runs as f64);
                    let sigmas = (sim.per_estimate - oracle).abs() / sigma;
                    rows.push(ValidationRow {
                        n,
                        m,
                        k,
                        beta,
                        oracle_per: oracle,
                        analysis_per: analysis,
                        analysis_gap: gap,
                        sim_per: sim.per_estimate,
                        sim_stderr: sim.per_stderr,
                        sim_gap_sigmas: sigmas,
                        ok: gap <= tolerance && sigmas <= 4.0,
                    });
                }
            }
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &rows {
        w.serialize(row).map_err(|e| Usage(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Usage(e.to_string()))?;
    emit(&bytes, args.out.or(file.out).as_deref(), stdout)?;

    let failures = rows.iter().filter(|r| !r.ok).count();
    let worst = rows.iter().map(|r| r.analysis_gap).fold(0.0, f64::max);
    let _ = writeln!(
        stderr,
        "validate: {} points, {} failures, max |analysis - oracle| = {:e}",
        rows.len(),
        failures,
        worst
    );
    Ok(if failures == 0 { EXIT_OK } else { EXIT_VALIDATION })
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
            } else {
                let _ = stdout.write_all(text.as_bytes());
            }
            return code;
        }
    };
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let outcome = match cli.command {
        Command::Analyze(a) => cmd_analyze(a, exec, stdout),
        Command::Simulate(a) => cmd_simulate(a, exec, stdout),
        Command::Optimize(a) => cmd_optimize(a, exec, stdout, stderr),
        Command::Validate(a) => cmd_validate(a, exec, stdout, stderr),
    };
    match outcome {
        Ok(code) => code,
        Err(Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
    }
}
