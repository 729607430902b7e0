//! Command-line front end: `postsim <run|majority|fig1|pp-decide|fantasy|selftest>`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::circuit::{parse_circuit, parse_truth_table, Circuit, MajorityInstance};
use crate::dense::{conditional_accept_prob, run_circuit};
use crate::error::Error;
use crate::fantasy::{bqp_p_histogram, majority_via_bqp_p, majority_via_nonunitary, DEFAULT_Q_POLY};
use crate::majority::{
    decide_majority_analytic, decide_majority_circuit, decide_majority_sampled, exponent_range, fmt_sig6,
    pad_instance, phi_trajectory, trajectory_csv, DecisionMode, DecisionReport, DECISION_THRESHOLD,
    WITNESS_THRESHOLD,
};
use crate::pathsum::{enumerate_ledger, p_power_decide, pp_decide};
use crate::state::{qubit_mask, FantasyRule};

/// Environment variable capping the worker thread count; 0 runs sequentially.
pub const THREADS_ENV: &str = "POSTSIM_THREADS";

pub mod exit {
    pub const OK: i32 = 0;
    pub const INPUT: i32 = 1;
    pub const ZERO_PROBABILITY: i32 = 2;
    pub const RESOURCE: i32 = 3;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    Dense,
    Pathsum,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    JsonLines,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Analytic,
    Circuit,
    Sampled,
}

#[derive(Parser, Debug)]
#[command(name = "postsim", version, about = "Simulator for postselected quantum circuits")]
struct Cli {
    #[command(subcommand)]
    command: CommandArgs,
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    /// Write the report here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Subcommand, Debug)]
enum CommandArgs {
    /// Simulate a circuit file and print the final state or path-sum ledger.
    Run {
        circuit: PathBuf,
        #[arg(long, value_enum, default_value_t = Backend::Dense)]
        backend: Backend,
        /// Basis input index.
        #[arg(long, default_value_t = 0)]
        input: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Decide s < 2^(n-1) for a truth table.
    Majority {
        table: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Analytic)]
        mode: Mode,
        /// Widen the table so that s >= 1 holds.
        #[arg(long)]
        pad: bool,
        #[arg(long, default_value_t = 100)]
        reps: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Restrict the sweep to a single exponent.
        #[arg(long = "i", allow_hyphen_values = true)]
        i_override: Option<i32>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Emit the (i, ratio, amp0, amp1, overlap) trajectory as CSV.
    Fig1 {
        table: PathBuf,
        #[arg(long)]
        pad: bool,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Exact path-sum decision of P(accept | flag) > 1/2, or of the even
    /// p-mass comparison on the accept qubit when --p is given.
    PpDecide {
        circuit: PathBuf,
        #[arg(long, default_value_t = 0)]
        input: usize,
        #[arg(long)]
        p: Option<u32>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run under a |amp|^p measurement rule: a majority decision with
    /// gadget postselection (--table) or repeated sampling of a unitary
    /// circuit (--circuit).
    Fantasy {
        #[arg(long, conflicts_with = "circuit", required_unless_present = "circuit")]
        table: Option<PathBuf>,
        #[arg(long)]
        circuit: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long, default_value_t = DEFAULT_Q_POLY)]
        q_poly: u32,
        #[arg(long, default_value_t = 100)]
        reps: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        pad: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Exhaustive check of the decision dichotomy on every table with n <= 3.
    Selftest,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Run,
    Majority,
    Fig1,
    PpDecide,
    Fantasy,
    Selftest,
}

/// One fully parsed invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub circuit_path: Option<PathBuf>,
    pub table_path: Option<PathBuf>,
    pub backend: Backend,
    pub mode: Mode,
    pub pad: bool,
    pub p: Option<f64>,
    pub q_poly: u32,
    pub reps: u32,
    pub seed: u64,
    pub i_override: Option<i32>,
    pub input_index: usize,
    pub output: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    fn base(command: Command) -> Self {
        RunConfig {
            command,
            circuit_path: None,
            table_path: None,
            backend: Backend::Dense,
            mode: Mode::Analytic,
            pad: false,
            p: None,
            q_poly: DEFAULT_Q_POLY,
            reps: 100,
            seed: 0,
            i_override: None,
            input_index: 0,
            output: None,
            format: Format::Text,
        }
    }

    pub fn parse_from<I, T>(args: I) -> std::result::Result<Self, clap::Error>
    where
        I: IntoIterator<Item = T>,
        T: Into<OsString> + Clone,
    {
        Ok(Cli::try_parse_from(args)?.into())
    }
}

impl From<Cli> for RunConfig {
    fn from(cli: Cli) -> Self {
        match cli.command {
            CommandArgs::Run {
                circuit,
                backend,
                input,
                out,
            } => RunConfig {
                circuit_path: Some(circuit),
                backend,
                input_index: input,
                output: out.output,
                format: out.format,
                ..RunConfig::base(Command::Run)
            },
            CommandArgs::Majority {
                table,
                mode,
                pad,
                reps,
                seed,
                i_override,
                out,
            } => RunConfig {
                table_path: Some(table),
                mode,
                pad,
                reps,
                seed,
                i_override,
                output: out.output,
                format: out.format,
                ..RunConfig::base(Command::Majority)
            },
            CommandArgs::Fig1 { table, pad, output } => RunConfig {
                table_path: Some(table),
                pad,
                output,
                format: Format::Csv,
                ..RunConfig::base(Command::Fig1)
            },
            CommandArgs::PpDecide { circuit, input, p, out } => RunConfig {
                circuit_path: Some(circuit),
                backend: Backend::Pathsum,
                input_index: input,
                p: p.map(f64::from),
                output: out.output,
                format: out.format,
                ..RunConfig::base(Command::PpDecide)
            },
            CommandArgs::Fantasy {
                table,
                circuit,
                p,
                q_poly,
                reps,
                seed,
                pad,
                out,
            } => RunConfig {
                table_path: table,
                circuit_path: circuit,
                mode: Mode::Sampled,
                p: Some(p),
                q_poly,
                reps,
                seed,
                pad,
                output: out.output,
                format: out.format,
                ..RunConfig::base(Command::Fantasy)
            },
            CommandArgs::Selftest => RunConfig::base(Command::Selftest),
        }
    }
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::ZeroProbability | Error::ZeroMass => exit::ZERO_PROBABILITY,
            Error::PathBudgetExceeded { .. } => exit::RESOURCE,
            _ => exit::INPUT,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError {
        code: exit::INPUT,
        message: format!("cannot read {}: {e}", path.display()),
    })
}

fn with_path<T>(path: &Path, r: crate::error::Result<T>) -> CliResult<T> {
    r.map_err(|e| {
        let mut err = CliError::from(e);
        err.message = format!("{}: {}", path.display(), err.message);
        err
    })
}

fn load_circuit(config: &RunConfig) -> CliResult<Circuit> {
    let path = config.circuit_path.as_deref().ok_or_else(|| CliError {
        code: exit::INPUT,
        message: "no circuit file given".into(),
    })?;
    with_path(path, parse_circuit(&read_file(path)?))
}

fn load_table(config: &RunConfig) -> CliResult<MajorityInstance> {
    let path = config.table_path.as_deref().ok_or_else(|| CliError {
        code: exit::INPUT,
        message: "no truth-table file given".into(),
    })?;
    let inst = with_path(path, parse_truth_table(&read_file(path)?))?;
    Ok(if config.pad { pad_instance(&inst) } else { inst })
}

fn basis_label(z: usize, n: usize) -> String {
    (0..n).map(|q| if z & qubit_mask(n, q) != 0 { '1' } else { '0' }).collect()
}

/// Final-state amplitudes (dense) or exact path sums (pathsum).
pub fn cmd_run(config: &RunConfig) -> CliResult<String> {
    let c = load_circuit(config)?;
    let n = c.num_qubits();
    let mut out = String::new();
    match config.backend {
        Backend::Dense => {
            let state = run_circuit(&c, config.input_index)?;
            let rows = state
                .amplitudes()
                .iter()
                .enumerate()
                .filter(|(_, a)| a.norm_sqr() > 0.0);
            match config.format {
                Format::Text => {
                    let _ = writeln!(out, "qubits = {n}");
                    let _ = writeln!(out, "{:<w$}  {:>12}  {:>12}  {:>12}", "basis", "re", "im", "prob", w = n.max(5));
                    for (z, a) in rows {
                        let _ = writeln!(
                            out,
                            "{:<w$}  {:>12}  {:>12}  {:>12}",
                            basis_label(z, n),
                            fmt_sig6(a.re),
                            fmt_sig6(a.im),
                            fmt_sig6(a.norm_sqr()),
                            w = n.max(5)
                        );
                    }
                }
                Format::Csv => {
                    out.push_str("index,basis,re,im,prob\n");
                    for (z, a) in rows {
                        let _ = writeln!(
                            out,
                            "{z},{},{},{},{}",
                            basis_label(z, n),
                            fmt_sig6(a.re),
                            fmt_sig6(a.im),
                            fmt_sig6(a.norm_sqr())
                        );
                    }
                }
                Format::JsonLines => {
                    for (z, a) in rows {
                        let row = json!({"index": z, "basis": basis_label(z, n), "re": a.re, "im": a.im, "prob": a.norm_sqr()});
                        let _ = writeln!(out, "{row}");
                    }
                }
            }
            if config.format == Format::Text && !c.postselections().is_empty() && c.is_normal_form() {
                let p = conditional_accept_prob(&c, config.input_index)?;
                let _ = writeln!(out, "accept_probability = {}", fmt_sig6(p));
            }
        }
        Backend::Pathsum => {
            let ledger = enumerate_ledger(&c, config.input_index)?;
            let h = ledger.hadamard_count();
            match config.format {
                Format::Text => {
                    let _ = writeln!(out, "qubits = {n}");
                    let _ = writeln!(out, "hadamards = {h}");
                    let _ = writeln!(out, "# amplitude = sum / 2^(hadamards/2)");
                    for (z, s) in ledger.sums() {
                        let _ = writeln!(out, "{}  {s}", basis_label(*z, n));
                    }
                }
                Format::Csv => {
                    out.push_str("index,basis,sum,hadamards\n");
                    for (z, s) in ledger.sums() {
                        let _ = writeln!(out, "{z},{},{s},{h}", basis_label(*z, n));
                    }
                }
                Format::JsonLines => {
                    for (z, s) in ledger.sums() {
                        let row = json!({"index": z, "basis": basis_label(*z, n), "sum": s.to_string(), "hadamards": h});
                        let _ = writeln!(out, "{row}");
                    }
                }
            }
        }
    }
    Ok(out)
}

fn render_report(report: &DecisionReport, format: Format) -> String {
    match format {
        Format::Text => report.to_text(),
        Format::Csv => report.to_csv(),
        Format::JsonLines => report.to_json() + "\n",
    }
}

/// Keeps only exponent `i` and recomputes the verdict from it.
fn restrict_report(report: &mut DecisionReport, i: i32) -> CliResult<()> {
    if !exponent_range(report.n).contains(&i) {
        return Err(CliError {
            code: exit::INPUT,
            message: format!("--i {i} outside [-{n}, {n}]", n = report.n),
        });
    }
    report.overlaps.retain(|&k, _| k == i);
    report.plus_fractions.retain(|&k, _| k == i);
    report.verdict = match report.mode {
        DecisionMode::Sampled => report.plus_fractions.values().any(|&f| f >= WITNESS_THRESHOLD),
        _ => report.max_overlap().unwrap_or(0.0) >= DECISION_THRESHOLD,
    };
    Ok(())
}

pub fn cmd_majority(config: &RunConfig) -> CliResult<String> {
    let inst = load_table(config)?;
    let mut report = match config.mode {
        Mode::Analytic => decide_majority_analytic(&inst)?,
        Mode::Circuit => decide_majority_circuit(&inst)?,
        Mode::Sampled => decide_majority_sampled(&inst, config.reps, config.seed)?,
    };
    if let Some(i) = config.i_override {
        restrict_report(&mut report, i)?;
    }
    Ok(render_report(&report, config.format))
}

pub fn cmd_fig1_data(config: &RunConfig) -> CliResult<String> {
    let inst = load_table(config)?;
    Ok(trajectory_csv(&phi_trajectory(&inst)?))
}

pub fn cmd_pp_decide(config: &RunConfig) -> CliResult<String> {
    let c = load_circuit(config)?;
    let (decision, label) = match config.p {
        None => (pp_decide(&c, config.input_index)?, "pp"),
        Some(p) => {
            let n = c.num_qubits();
            let am = qubit_mask(n, c.accept_qubit());
            (p_power_decide(&c, p as u32, |z| z & am != 0, config.input_index)?, "p-power")
        }
    };
    let mut out = String::new();
    match config.format {
        Format::Text => {
            let _ = writeln!(out, "decision = {label}");
            if let Some(p) = config.p {
                let _ = writeln!(out, "p = {p}");
            }
            let _ = writeln!(out, "accepting = {}", decision.accepting);
            let _ = writeln!(out, "rejecting = {}", decision.rejecting);
            let _ = writeln!(out, "tie = {}", decision.tie);
            let _ = writeln!(out, "accept = {}", decision.accept);
        }
        Format::Csv => {
            out.push_str("accepting,rejecting,tie,accept\n");
            let _ = writeln!(
                out,
                "{},{},{},{}",
                decision.accepting, decision.rejecting, decision.tie, decision.accept
            );
        }
        Format::JsonLines => {
            let row = json!({
                "decision": label,
                "p": config.p,
                "accepting": decision.accepting.to_string(),
                "rejecting": decision.rejecting.to_string(),
                "tie": decision.tie,
                "accept": decision.accept,
            });
            let _ = writeln!(out, "{row}");
        }
    }
    Ok(out)
}

pub fn cmd_fantasy(config: &RunConfig) -> CliResult<String> {
    let rule = FantasyRule::new(config.p.unwrap_or(1.0))?;
    if config.circuit_path.is_some() {
        let c = load_circuit(config)?;
        let n = c.num_qubits();
        let counts = bqp_p_histogram(&c, rule, config.reps, config.seed)?;
        let total = f64::from(config.reps.max(1));
        let mut out = String::new();
        let rows = counts.iter().enumerate().filter(|(_, &k)| k > 0);
        match config.format {
            Format::Text => {
                let _ = writeln!(out, "rule_p = {}", fmt_sig6(rule.p()));
                let _ = writeln!(out, "repetitions = {}", config.reps);
                let _ = writeln!(out, "seed = {}", config.seed);
                for (z, k) in rows {
                    let _ = writeln!(out, "{}  {k}  {}", basis_label(z, n), fmt_sig6(*k as f64 / total));
                }
            }
            Format::Csv => {
                out.push_str("index,basis,count,frequency\n");
                for (z, k) in rows {
                    let _ = writeln!(out, "{z},{},{k},{}", basis_label(z, n), fmt_sig6(*k as f64 / total));
                }
            }
            Format::JsonLines => {
                for (z, k) in rows {
                    let row = json!({"index": z, "basis": basis_label(z, n), "count": k});
                    let _ = writeln!(out, "{row}");
                }
            }
        }
        return Ok(out);
    }
    let inst = load_table(config)?;
    let report = if rule.is_born() {
        majority_via_nonunitary(&inst, config.reps, config.seed, config.q_poly)?
    } else {
        majority_via_bqp_p(&inst, rule, config.reps, config.seed, config.q_poly)?
    };
    Ok(render_report(&report, config.format))
}

/// Summary of the exhaustive n <= 3 check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelftestSummary {
    pub checked: usize,
    pub failures: Vec<String>,
}

/// Every table with n <= 3: the analytic verdict (after padding when s = 0)
/// must equal s < 2^(n-1), and the overlaps must respect both bounds.
pub fn selftest() -> SelftestSummary {
    let bound = crate::majority::worst_case_overlap() - 1e-9;
    let mut checked = 0;
    let mut failures = Vec::new();
    for n in 1..=3usize {
        for bits in 0..1u64 << (1 << n) {
            let inst = MajorityInstance::from_index_bits(n, bits).expect("n <= 3");
            let minority = inst.is_minority();
            checked += 1;
            let target = if inst.s() == 0 { pad_instance(&inst) } else { inst.clone() };
            match decide_majority_analytic(&target) {
                Ok(r) => {
                    let max = r.max_overlap().unwrap_or(0.0);
                    let bounds_ok = if target.is_minority() {
                        max >= bound
                    } else {
                        max <= std::f64::consts::FRAC_1_SQRT_2 + 1e-9
                    };
                    if r.verdict != minority || !bounds_ok {
                        failures.push(format!("n = {n}, table bits = {bits:#x}: verdict {} max overlap {max}", r.verdict));
                    }
                }
                Err(e) => failures.push(format!("n = {n}, table bits = {bits:#x}: {e}")),
            }
        }
    }
    SelftestSummary { checked, failures }
}

fn cmd_selftest() -> CliResult<String> {
    let summary = selftest();
    let mut out = String::new();
    for f in &summary.failures {
        let _ = writeln!(out, "FAIL {f}");
    }
    let _ = writeln!(
        out,
        "selftest: {} tables checked, {} failures",
        summary.checked,
        summary.failures.len()
    );
    if summary.failures.is_empty() {
        Ok(out)
    } else {
        Err(CliError {
            code: exit::INPUT,
            message: out,
        })
    }
}

pub fn execute(config: &RunConfig) -> CliResult<String> {
    match config.command {
        Command::Run => cmd_run(config),
        Command::Majority => cmd_majority(config),
        Command::Fig1 => cmd_fig1_data(config),
        Command::PpDecide => cmd_pp_decide(config),
        Command::Fantasy => cmd_fantasy(config),
        Command::Selftest => cmd_selftest(),
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| CliError {
        code: exit::INPUT,
        message: format!("{THREADS_ENV} must be a non-negative integer, got {raw:?}"),
    })?;
    // The pool may already exist when called twice in one process.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    Ok(())
}

/// Parses `args`, runs the command, writes the report and diagnostics, and
/// returns the process exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::INPUT } else { exit::OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(rendered.as_bytes())
            } else {
                stdout.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let result = configure_threads().and_then(|_| execute(&config)).and_then(|text| {
        match &config.output {
            Some(path) => std::fs::write(path, text).map_err(|e| CliError {
                code: exit::INPUT,
                message: format!("cannot write {}: {e}", path.display()),
            }),
            None => stdout.write_all(text.as_bytes()).map_err(|e| CliError {
                code: exit::INPUT,
                message: format!("cannot write output: {e}"),
            }),
        }
    });
    match result {
        Ok(()) => exit::OK,
        Err(e) => {
            let msg = e.message.trim_end();
            let _ = writeln!(stderr, "error: {msg}");
            e.code
        }
    }
}
