use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use atorus_cli::config::DEFAULT_SAMPLES;
use atorus_cli::run::known_targets;
use atorus_cli::{run, Format, RunError, RunReport, Suite, SuiteConfig, TierArg, EXIT_CHECK_FAILED, EXIT_PASS};
use atorus_core::Executor;

#[derive(Parser)]
#[command(name = "atorus", version, about = "Verify curvature identities on torus bundles and zoo charts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites on a target.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Suites to run; all applicable suites when omitted.
        #[arg(long, value_delimiter = ',')]
        suites: Vec<Suite>,
    },
    /// Classify the Ricci tensor of a target.
    Classify {
        #[command(flatten)]
        common: Common,
    },
    /// Run suites and write the structured report to a file.
    Report {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        suites: Vec<Suite>,
        #[arg(long)]
        output: PathBuf,
    },
    /// List the named targets.
    List,
}

#[derive(Args)]
struct Common {
    /// Zoo name, `counterexample:<name>`, or a bundle spec file.
    target: String,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = atorus_core::sampling::DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = TierArg::Exact)]
    tier: TierArg,
    /// Residual tolerance; 1e-8 for the exact tier and 1e-4 for finite differences by default.
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Evaluate sample points on one thread.
    #[arg(long)]
    sequential: bool,
}

impl Common {
    fn config(&self, suites: Vec<Suite>) -> SuiteConfig {
        SuiteConfig {
            target: self.target.clone(),
            suites,
            tier: self.tier,
            samples: self.samples,
            seed: self.seed,
            tolerance: self.tolerance,
            executor: if self.sequential {
                Executor::Sequential
            } else {
                Executor::default()
            },
        }
    }
}

fn emit(report: &RunReport, format: Format) {
    match format {
        Format::Text => print!("{}", report.to_text()),
        Format::Json => print!("{}", report.to_json()),
    }
}

fn execute(cli: Cli) -> Result<i32, RunError> {
    let (common, suites, output) = match cli.command {
        Command::List => {
            for t in known_targets() {
                println!("{t}");
            }
            return Ok(EXIT_PASS);
        }
        Command::Verify { common, suites } => (common, suites, None),
        Command::Classify { common } => (common, vec![Suite::Classify], None),
        Command::Report { common, suites, output } => (common, suites, Some(output)),
    };
    let report = run(&common.config(suites))?;
    if let Some(path) = output {
        std::fs::write(&path, report.to_json()).map_err(|source| RunError::Io {
            path: path.display().to_string(),
            source,
        })?;
    }
    emit(&report, common.format);
    Ok(if report.passed { EXIT_PASS } else { EXIT_CHECK_FAILED })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("atorus: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
