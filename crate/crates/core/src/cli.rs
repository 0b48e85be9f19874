//! `pseudotest analyze` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Duration;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::engine::{analyze, AnalysisConfig, AnalysisReport};
use crate::error::Error;
use crate::metrics::percent;
use crate::report::{emit_report, Format};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BASELINE: i32 = 3;
pub const EXIT_ANALYSIS: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "pseudotest", version, about = "Find pseudo-tested methods with extreme transformations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analyze a cargo library project.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Root of the cargo project to analyze.
    #[arg(long)]
    project: PathBuf,
    /// Directory the reports are written to.
    #[arg(long, default_value = "pseudotest-report")]
    out: PathBuf,
    /// Report format; repeat for several.
    #[arg(long = "format", value_name = "json|markdown|html")]
    formats: Vec<Format>,
    /// Parallel workers, each with its own project copy.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    jobs: Option<u32>,
    /// Multiplier on the slowest baseline test for the per-test budget.
    #[arg(long, default_value_t = 2.0)]
    timeout_factor: f64,
    /// Run the whole suite for every variant, not only covering tests.
    #[arg(long)]
    full_suite: bool,
    /// Stop at the first detected variant of each method.
    #[arg(long)]
    fast: bool,
    /// Also generate and run conventional mutants.
    #[arg(long)]
    with_mutation_baseline: bool,
    /// Only analyze methods whose id matches one of these globs.
    #[arg(long)]
    include: Vec<String>,
    /// Skip methods whose id matches one of these globs.
    #[arg(long)]
    exclude: Vec<String>,
    /// Record wall-clock timings in the report.
    #[arg(long)]
    timings: bool,
}

/// Everything one `analyze` invocation needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub project_root: PathBuf,
    pub output_dir: PathBuf,
    pub formats: Vec<Format>,
    pub analysis: AnalysisConfig,
}

impl RunConfig {
    fn from_args(args: AnalyzeArgs) -> Result<RunConfig, String> {
        let mut formats = args.formats;
        if formats.is_empty() {
            formats.push(Format::Json);
        }
        formats.sort();
        formats.dedup();
        let analysis = AnalysisConfig {
            jobs: args.jobs.map_or(AnalysisConfig::default().jobs, |j| j as usize),
            timeout_factor: args.timeout_factor,
            timeout_constant: Duration::from_secs(4),
            full_suite: args.full_suite,
            fast: args.fast,
            with_mutation_baseline: args.with_mutation_baseline,
            include: args.include,
            exclude: args.exclude,
            record_timings: args.timings,
            ..AnalysisConfig::default()
        };
        analysis.validate().map_err(|e| e.to_string())?;
        Ok(RunConfig {
            project_root: args.project,
            output_dir: args.out,
            formats,
            analysis,
        })
    }
}

/// Map an analysis error to its exit code.
pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::BaselineFailure { .. } | Error::EmptySuite(_) => EXIT_BASELINE,
        Error::Precondition(_) => EXIT_USAGE,
        _ => EXIT_ANALYSIS,
    }
}

pub fn summary_line(report: &AnalysisReport) -> String {
    let s = &report.summary;
    format!(
        "{}: methods: {}, covered: {}, under analysis: {}, pseudo-tested: {}, PS_RATE: {}",
        report.project,
        s.n_methods,
        s.n_covered,
        s.n_mua,
        s.n_pseudo,
        percent(s.ps_rate)
    )
}

/// Parse `argv` (including the program name), run, and return the exit
/// code. Diagnostics go to standard error, the summary to standard output.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let Command::Analyze(args) = cli.command;
    let config = match RunConfig::from_args(args) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
    };
    match run(&config) {
        Ok(report) => {
            println!("{}", summary_line(&report));
            let _ = std::io::stdout().flush();
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(config: &RunConfig) -> crate::Result<AnalysisReport> {
    let report = analyze(&config.project_root, &config.analysis)?;
    for &format in &config.formats {
        for path in emit_report(&report, format, &config.output_dir)? {
            log::info!("wrote {}", path.display());
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<RunConfig, String> {
        let cli = Cli::try_parse_from(args).map_err(|e| e.to_string())?;
        let Command::Analyze(a) = cli.command;
        RunConfig::from_args(a)
    }

    #[test]
    fn defaults_and_repeated_formats() {
        let c = parse(&["pseudotest", "analyze", "--project", "p"]).unwrap();
        assert_eq!(c.formats, [Format::Json]);
        assert_eq!(c.analysis.timeout_factor, 2.0);
        assert!(c.analysis.jobs >= 1);
        let c = parse(&[
            "pseudotest", "analyze", "--project", "p", "--format", "html", "--format", "json",
            "--format", "html", "--jobs", "3", "--fast", "--include", "a::*",
        ])
        .unwrap();
        assert_eq!(c.formats, [Format::Json, Format::Html]);
        assert_eq!(c.analysis.jobs, 3);
        assert!(c.analysis.fast);
        assert_eq!(c.analysis.include, ["a::*"]);
    }

    #[test]
    fn usage_errors() {
        assert!(parse(&["pseudotest", "analyze", "--project", "p", "--jobs", "0"]).is_err());
        assert!(parse(&["pseudotest", "analyze", "--project", "p", "--timeout-factor", "-1"]).is_err());
        assert!(parse(&["pseudotest", "analyze", "--project", "p", "--format", "pdf"]).is_err());
        assert_eq!(run_cli(["pseudotest", "analyze", "--bogus"]), EXIT_USAGE);
        assert_eq!(run_cli(["pseudotest"]), EXIT_USAGE);
    }

    #[test]
    fn exit_codes_partition_errors() {
        let baseline = Error::BaselineFailure { failing_tests: vec!["t".into()], flaky: false };
        assert_eq!(exit_code(&baseline), EXIT_BASELINE);
        assert_eq!(exit_code(&Error::EmptySuite("p".into())), EXIT_BASELINE);
        assert_eq!(exit_code(&Error::Environment("x".into())), EXIT_ANALYSIS);
        assert_eq!(exit_code(&Error::NotAProject("p".into())), EXIT_ANALYSIS);
    }
}
