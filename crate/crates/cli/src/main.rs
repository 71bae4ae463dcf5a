use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ratedml::config::{parse_fold_mode, LagSetting, LearnerChoice, Overrides, PipelineConfig};
use ratedml::demo::write_demo_inputs;
use ratedml::error::CliError;
use ratedml::pipeline::{run_pipeline, summary_lines};
use ratedml::plots::emit_plots;
use ratedml::validate::{validate, DEFAULT_SEED};
use ratedml_core::dml::FoldMode;
use ratedml_core::synth::FixtureSpec;

#[derive(Parser)]
#[command(name = "ratedml", version, about = "Effect of interest-rate changes on fund returns by double machine learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        learner: Option<LearnerChoice>,
        /// Lag order, or `auto` for AIC selection.
        #[arg(long)]
        lag: Option<LagSetting>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_parser = parse_fold_mode)]
        fold_mode: Option<FoldMode>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Redraw the SVG figures from a finished run's CSVs.
    Plots {
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the synthetic validation suite.
    Validate {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Replications for the Monte Carlo checks (default: the required count).
        #[arg(long)]
        reps: Option<usize>,
    },
    /// Write a synthetic fund panel and a config that runs on it.
    Fixture {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let mut stdout = std::io::stdout().lock();
    let mut say = |line: &str| {
        let _ = writeln!(stdout, "{line}");
    };
    match cli.command {
        Command::Run { config, learner, lag, k, seed, fold_mode, out } => {
            let mut cfg = PipelineConfig::load(&config)?;
            cfg.apply(&Overrides { learner, lag, k, seed, fold_mode, output_dir: out });
            let outcome = run_pipeline(&cfg)?;
            for line in summary_lines(&outcome) {
                say(&line);
            }
            say(&format!("lag order {}; outputs in {}", outcome.lag_order, outcome.output_dir.display()));
            if outcome.reproducibility.compared {
                let verdict = if outcome.reproducibility.passed() { "all hashes match" } else { "hashes differ" };
                say(&format!("reproducibility audit against previous run: {verdict}"));
            }
        }
        Command::Plots { out } => {
            for path in emit_plots(&out)? {
                say(&path.display().to_string());
            }
        }
        Command::Validate { seed, reps } => {
            let report = validate(seed, reps)?;
            say(report.table().trim_end());
            if !report.all_passed() {
                return Err(CliError::Validation("one or more criteria did not pass".into()));
            }
        }
        Command::Fixture { out, seed } => {
            let spec = FixtureSpec { seed, ..FixtureSpec::default() };
            let path = write_demo_inputs(&out, &spec)?;
            say(&path.display().to_string());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(std::io::stderr().lock(), "{}", e.to_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
