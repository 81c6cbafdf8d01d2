use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use ipdensity::density::{density_report, GridMode};
use ipdensity::group_relaxation::theoretical_bounds;
use ipdensity::ip_core::{Evaluator, FunctionKind};
use ipdensity::lp_core::validate_instance;
use ipdensity::Error;

use crate::instance_file::{self, InstanceFile};
use crate::report;

pub const EXIT_OK: u8 = 0;
pub const EXIT_PARSE: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_RESOURCE: u8 = 3;
pub const EXIT_VIOLATION: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "ipdensity", version, about = "Density bounds for IP sparsity and proximity functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check rank, the recession condition and LP uniqueness; print minors.
    Validate { path: PathBuf },
    /// Residue tables, certified β counts and closed-form floors.
    Analyze {
        path: PathBuf,
        #[arg(long)]
        k_max: Option<u64>,
        #[arg(long, value_enum, default_value = "json")]
        out: OutFormat,
        /// Write here instead of stdout.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Empirical frequencies on a box, compared against the floors.
    Density(DensityArgs),
}

#[derive(clap::Args, Debug)]
pub struct DensityArgs {
    pub path: PathBuf,
    #[arg(long, default_value = "sigma")]
    pub function: FunctionKind,
    #[arg(long, num_args = 1.., required = true, allow_negative_numbers = true, value_parser = parse_alpha)]
    pub alpha: Vec<BigRational>,
    #[arg(long, num_args = 1.., required = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub t: Vec<u64>,
    /// `exhaustive` or `sample:<count>`.
    #[arg(long, default_value = "exhaustive", value_parser = parse_mode)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fixed enumeration radius for optimal solutions.
    #[arg(long)]
    pub box_radius: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub k_max: Option<u64>,
    /// Slack constant `C` in `slack(t) = C/t`.
    #[arg(long, allow_negative_numbers = true, value_parser = parse_alpha)]
    pub slack: Option<BigRational>,
    /// Lexicographically smallest LP vertex when LP optima are not unique.
    #[arg(long)]
    pub tie_break: bool,
    #[arg(long, value_enum, default_value = "json")]
    pub out: OutFormat,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// CSV of `t` against each ratio.
    #[arg(long)]
    pub plot_data: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeArg {
    Exhaustive,
    Sample(u64),
}

fn parse_alpha(s: &str) -> Result<BigRational, String> {
    let bad = || format!("expected an integer or p/q, found {s:?}");
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.parse().map_err(|_| bad())?;
            let q: BigInt = q.parse().map_err(|_| bad())?;
            if q == BigInt::from(0) {
                return Err(bad());
            }
            Ok(BigRational::new(p, q))
        }
        None => s.parse().map(BigRational::from_integer).map_err(|_| bad()),
    }
}

fn parse_mode(s: &str) -> Result<ModeArg, String> {
    if s == "exhaustive" {
        return Ok(ModeArg::Exhaustive);
    }
    match s.strip_prefix("sample:").map(str::parse::<u64>) {
        Some(Ok(n)) if n > 0 => Ok(ModeArg::Sample(n)),
        _ => Err(format!("expected \"exhaustive\" or \"sample:<count>\", found {s:?}")),
    }
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn emit(output: Option<&Path>, contents: &str) -> u8 {
    match output {
        Some(p) => match write_atomic(p, contents) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                eprintln!("error: cannot write {}: {e}", p.display());
                EXIT_PARSE
            }
        },
        None => {
            print!("{contents}");
            EXIT_OK
        }
    }
}

fn load(path: &Path) -> Result<InstanceFile, u8> {
    instance_file::read(path).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_PARSE
    })
}

fn exit_for(e: &Error) -> u8 {
    match e {
        Error::GridTooLarge { .. } | Error::NodeBudget(_) | Error::IncompleteTable { .. } => EXIT_RESOURCE,
        _ => EXIT_INVALID,
    }
}

fn evaluator(file: &InstanceFile) -> Result<Evaluator, u8> {
    let inst = validate_instance(file.a.clone(), file.c.clone()).map_err(|e| {
        eprintln!("invalid instance: {e}");
        EXIT_INVALID
    })?;
    Evaluator::new(&inst).map_err(|e| {
        eprintln!("error: {e}");
        exit_for(&e)
    })
}

fn json(r: &report::Report) -> String {
    let mut s = serde_json::to_string_pretty(r).expect("report serializes");
    s.push('\n');
    s
}

/// `k` range that covers every α the floors could use.
fn default_k_max(eval: &Evaluator, alphas: &[BigRational]) -> u64 {
    let d = eval.minors().normalized_delta().to_u64().unwrap_or(u64::MAX);
    let top = alphas
        .iter()
        .map(|a| a.ceil().to_integer().to_u64().unwrap_or(0))
        .max()
        .unwrap_or(0);
    d.max(top).clamp(2, 256)
}

fn cmd_validate(path: &Path) -> u8 {
    let file = match load(path) {
        Ok(f) => f,
        Err(code) => return code,
    };
    let (m, n) = (file.a.rows(), file.a.cols());
    println!("instance: m={m} n={n}");
    println!("rank: {}", file.a.rank());
    let inst = match validate_instance(file.a.clone(), file.c.clone()) {
        Ok(i) => i,
        Err(e) => {
            println!("status: invalid");
            println!("reason: {e}");
            return EXIT_INVALID;
        }
    };
    let eval = match Evaluator::new(&inst) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_for(&e);
        }
    };
    let s = eval.minors();
    println!("recession condition: satisfied");
    println!("unique LP optima: {}", if inst.unique_lp_optima() { "yes" } else { "no" });
    println!("bounded fibers: {}", if inst.bounded_fibers() { "yes" } else { "no" });
    println!("delta: {}", s.delta);
    println!("gamma: {}", s.gamma);
    println!("eta: {}", s.eta);
    let bases: Vec<String> = eval
        .bases()
        .iter()
        .map(|b| format!("{:?}", b.columns))
        .collect();
    println!("optimal bases: {} {}", bases.len(), bases.join(" "));
    println!("status: valid");
    EXIT_OK
}

fn cmd_analyze(path: &Path, k_max: Option<u64>, out: OutFormat, output: Option<&Path>) -> u8 {
    let file = match load(path) {
        Ok(f) => f,
        Err(code) => return code,
    };
    let eval = match evaluator(&file) {
        Ok(e) => e,
        Err(code) => return code,
    };
    let k_max = k_max.unwrap_or_else(|| default_k_max(&eval, &[]));
    let bounds = match theoretical_bounds(&eval, k_max) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_for(&e);
        }
    };
    let text = match out {
        OutFormat::Json => json(&report::bounds_report(&file, &eval, &bounds, "analyze")),
        OutFormat::Csv => report::bounds_csv(&bounds),
    };
    emit(output, &text)
}

fn cmd_density(args: &DensityArgs) -> u8 {
    let file = match load(&args.path) {
        Ok(f) => f,
        Err(code) => return code,
    };
    let eval = match evaluator(&file) {
        Ok(e) => e
            .with_box_radius(args.box_radius.map(BigInt::from))
            .with_lexicographic_tie_break(args.tie_break),
        Err(code) => return code,
    };
    let mut ts = args.t.clone();
    ts.sort_unstable();
    ts.dedup();
    let mode = match args.mode {
        ModeArg::Exhaustive => GridMode::Exhaustive,
        ModeArg::Sample(count) => GridMode::Sampled { count, seed: args.seed },
    };
    let k_max = args.k_max.unwrap_or_else(|| default_k_max(&eval, &args.alpha));
    let run = || -> Result<_, Error> {
        let bounds = theoretical_bounds(&eval, k_max)?;
        let d = density_report(&eval, &bounds, args.function, &args.alpha, &ts, mode, args.slack.clone());
        Ok((bounds, d))
    };
    let outcome = match args.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(run),
            Err(e) => {
                eprintln!("error: cannot start {n} threads: {e}");
                return EXIT_PARSE;
            }
        },
        None => run(),
    };
    let (bounds, density) = match outcome {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_for(&e);
        }
    };
    let mut rep = report::bounds_report(&file, &eval, &bounds, "density");
    let (code, d) = match density {
        Ok(d) => {
            let code = if !d.errors.is_empty() {
                rep.status = "resource_error";
                EXIT_RESOURCE
            } else if d.passed() {
                EXIT_OK
            } else {
                rep.status = "violation";
                EXIT_VIOLATION
            };
            report::attach_density(&mut rep, &d, mode);
            (code, Some(d))
        }
        Err(e) => {
            let code = exit_for(&e);
            eprintln!("error: {e}");
            rep.status = if code == EXIT_RESOURCE { "resource_error" } else { "invalid" };
            rep.errors.push(report::ErrorOut {
                b: None,
                message: e.to_string(),
            });
            (code, None)
        }
    };
    let text = match (args.out, &d) {
        (OutFormat::Csv, Some(d)) => report::verdicts_csv(d),
        (OutFormat::Csv, None) => report::VERDICT_CSV_HEADER.to_string() + "\n",
        (OutFormat::Json, _) => json(&rep),
    };
    if let (Some(p), Some(d)) = (&args.plot_data, &d) {
        if let Err(e) = write_atomic(p, &report::plot_csv(d)) {
            eprintln!("error: cannot write {}: {e}", p.display());
            return EXIT_PARSE;
        }
    }
    let w = emit(args.output.as_deref(), &text);
    if w != EXIT_OK {
        return w;
    }
    code
}

/// Parses arguments and runs one command; returns the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
        }
    };
    match &cli.command {
        Command::Validate { path } => cmd_validate(path),
        Command::Analyze {
            path,
            k_max,
            out,
            output,
        } => cmd_analyze(path, *k_max, *out, output.as_deref()),
        Command::Density(args) => cmd_density(args),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_and_alpha_parsing() {
        assert_eq!(parse_mode("exhaustive").unwrap(), ModeArg::Exhaustive);
        assert_eq!(parse_mode("sample:500").unwrap(), ModeArg::Sample(500));
        assert!(parse_mode("sample:0").is_err());
        assert!(parse_mode("random").is_err());
        assert_eq!(parse_alpha("3/6").unwrap(), BigRational::new(1.into(), 2.into()));
        assert_eq!(parse_alpha("-2").unwrap(), BigRational::from_integer((-2).into()));
        assert!(parse_alpha("1/0").is_err());
    }

    #[test]
    fn function_names() {
        let cli = Cli::try_parse_from(["ipdensity", "density", "x.inst", "--function", "pi-inf", "--alpha", "1", "--t", "3"]).unwrap();
        match cli.command {
            Command::Density(a) => assert_eq!(a.function, FunctionKind::PiInf),
            _ => panic!("wrong command"),
        }
    }
}
