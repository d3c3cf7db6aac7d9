//! The `exactlin` command.
//!
//! Exit codes: 0 success, 1 any error, 2 verification failure (verify/bench),
//! 64 usage error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use exactlin_core::solve::project;
use exactlin_core::{
    detect_patterns, oracle_solve, run_fixpoint, solve_milp, verify_equivalence, Order, Solution,
};

use crate::bench::{run_bench, BenchOptions};
use crate::corpus::load_corpus;
use crate::error::{Error, Result};
use crate::gen::{gen_mixed, gen_models, TemplateMix};
use crate::lp::emit_lp;
use crate::report::{detection_report, emit_json_report, to_json, SolutionJson, VerifyJson};
use crate::{load_model, to_nlm};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VERIFY_FAILED: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "exactlin", version, about = "Exact linearization of nonlinear optimization models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OrderArg {
    Fixed,
    Random,
}

impl From<OrderArg> for Order {
    fn from(o: OrderArg) -> Order {
        match o {
            OrderArg::Fixed => Order::FixedPriority,
            OrderArg::Random => Order::SeededRandom,
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct RewriteArgs {
    /// Operator order in the fixpoint loop.
    #[arg(long, value_enum, default_value = "fixed")]
    pub order: OrderArg,
    /// Seed for `--order random`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the detected pattern occurrences as JSON.
    Detect { input: PathBuf },
    /// Rewrite to an LP/MILP and write it in LP format.
    Linearize {
        input: PathBuf,
        #[command(flatten)]
        rewrite: RewriteArgs,
        /// Output LP file (stdout when omitted).
        #[arg(short = 'o')]
        output: Option<PathBuf>,
        /// Write the rewrite trace as JSON.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Solve a model and print the solution in the original variables.
    Solve {
        input: PathBuf,
        #[command(flatten)]
        rewrite: RewriteArgs,
        /// Use the enumeration oracle instead of rewriting.
        #[arg(long)]
        oracle: bool,
    },
    /// Compare the rewritten optimum with the oracle optimum.
    Verify {
        input: PathBuf,
        #[command(flatten)]
        rewrite: RewriteArgs,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        /// Write the full trace and verification report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run the pipeline over a corpus directory and report DSR/RSR/CSR/OSR.
    Bench {
        dir: PathBuf,
        #[command(flatten)]
        rewrite: RewriteArgs,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Include per-instance wall-clock times in the report.
        #[arg(long)]
        timings: bool,
    },
    /// Generate random models with planted patterns.
    Gen {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Planted occurrences per model, e.g. `abs:1,min:2`; random when omitted.
        #[arg(long)]
        mix: Option<String>,
        /// Directory for `<name>.nlm` and `<name>.ann.json` files (stdout when omitted).
        #[arg(short = 'o')]
        output: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn load(path: &Path, err: &mut dyn Write) -> Result<exactlin_core::Model> {
    let parsed = load_model(&read(path)?).map_err(|e| match e {
        Error::Parse(d) => Error::Invalid(
            d.iter().map(|d| format!("{}:{d}", path.display())).collect::<Vec<_>>().join("\n"),
        ),
        e => e,
    })?;
    for w in &parsed.warnings {
        let _ = writeln!(err, "{}:{w}", path.display());
    }
    Ok(parsed.model)
}

/// Runs the command line with explicit output streams; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn execute(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let emit = |out: &mut dyn Write, text: &str| out.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e));
    match cmd {
        Command::Detect { input } => {
            let model = load(&input, err)?;
            let found = detect_patterns(&model)?;
            emit(out, &to_json(&detection_report(&input.display().to_string(), &found)))?;
        }
        Command::Linearize { input, rewrite, output, trace } => {
            let model = load(&input, err)?;
            let (linear, t) = run_fixpoint(&model, rewrite.order.into(), rewrite.seed)?;
            let text = emit_lp(&linear)?;
            match output {
                Some(p) => write(&p, &text)?,
                None => emit(out, &text)?,
            }
            if let Some(p) = trace {
                write(&p, &emit_json_report(&input.display().to_string(), &t, None))?;
            }
        }
        Command::Solve { input, rewrite, oracle } => {
            let model = load(&input, err)?;
            let solution = if oracle {
                oracle_solve(&model)?
            } else {
                let (linear, t) = run_fixpoint(&model, rewrite.order.into(), rewrite.seed)?;
                let s = solve_milp(&linear)?;
                if s.is_optimal() {
                    let assignment = project(&model, &t, &s.assignment)?;
                    let objective = match t.post_solve {
                        Some(p) => p.apply(s.objective).ok_or_else(|| {
                            Error::Invalid(format!("{} undefined at {}", p.func, s.objective))
                        })?,
                        None => s.objective,
                    };
                    Solution { assignment, objective, status: s.status }
                } else {
                    s
                }
            };
            emit(out, &to_json(&SolutionJson::from(&solution)))?;
        }
        Command::Verify { input, rewrite, tol, report } => {
            let model = load(&input, err)?;
            let (linear, t) = run_fixpoint(&model, rewrite.order.into(), rewrite.seed)?;
            let v = verify_equivalence(&model, &linear, &t, tol)?;
            emit(out, &to_json(&VerifyJson::from(&v)))?;
            if let Some(p) = report {
                write(&p, &emit_json_report(&input.display().to_string(), &t, Some(&v)))?;
            }
            return Ok(if v.osr_pass { EXIT_OK } else { EXIT_VERIFY_FAILED });
        }
        Command::Bench { dir, rewrite, tol, report, timings } => {
            let entries = load_corpus(&dir)?;
            let opts = BenchOptions { order: rewrite.order.into(), seed: rewrite.seed, tol, timings };
            let r = run_bench(&entries, &opts)?;
            let json = to_json(&r);
            if let Some(p) = report {
                write(&p, &json)?;
            }
            for i in &r.instances {
                if let Some(e) = &i.error {
                    let _ = writeln!(err, "{}: {e}", i.id);
                }
            }
            emit(out, &to_json(&r.aggregates))?;
            return Ok(if r.aggregates.all_perfect() { EXIT_OK } else { EXIT_VERIFY_FAILED });
        }
        Command::Gen { seed, count, mix, output } => {
            let models = match mix {
                Some(m) => gen_models(seed, count, &TemplateMix::parse(&m)?)?,
                None => {
                    if count == 0 {
                        return Err(Error::Invalid("count must be at least 1".into()));
                    }
                    gen_mixed(seed, count)
                }
            };
            for (i, (m, ann)) in models.iter().enumerate() {
                let name = format!("gen_{seed}_{i:04}");
                match &output {
                    Some(dir) => {
                        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
                        write(&dir.join(format!("{name}.nlm")), &to_nlm(m))?;
                        write(&dir.join(format!("{name}.ann.json")), &ann.to_json())?;
                    }
                    None => emit(out, &format!("# {name}\n{}\n", to_nlm(m)))?,
                }
            }
        }
    }
    Ok(EXIT_OK)
}
