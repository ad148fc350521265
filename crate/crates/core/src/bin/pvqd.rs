use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pvqd::experiment::{
    compare_policies, load_preset, parse_config, preset_names, preset_text, run_experiment, ExperimentSpec,
    RunOptions,
};

/// Projected variational quantum dynamics with blockwise parameter sweeps.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunFlags {
    /// Base seed; run k uses seed + k.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for CSV and JSON output.
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Number of seeded runs.
    #[arg(long)]
    runs: Option<usize>,
    /// Worker threads for independent runs.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment file or a bundled preset.
    Run {
        config: String,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Run several experiments on the same model and print a comparison table.
    Compare {
        #[arg(required = true)]
        configs: Vec<String>,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// List or print bundled presets.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    List,
    Dump { name: String },
}

fn load(arg: &str) -> pvqd::Result<ExperimentSpec> {
    if Path::new(arg).is_file() {
        parse_config(arg)
    } else {
        load_preset(arg)
    }
}

fn options(flags: RunFlags) -> RunOptions {
    RunOptions { out_dir: Some(flags.out_dir), threads: flags.threads, seed: flags.seed, runs: flags.runs }
}

fn execute(cli: Cli, out: &mut impl Write) -> pvqd::Result<()> {
    let io_err = |e| pvqd::Error::Io { path: "<stdout>".into(), source: e };
    match cli.command {
        Command::Run { config, flags } => {
            let spec = load(&config)?;
            let result = run_experiment(&spec, &options(flags))?;
            for s in &result.report.run_summaries {
                let errs: Vec<String> =
                    s.observables.iter().map(|o| format!("{} {:.5}", o.name, o.mean_abs_error)).collect();
                writeln!(out, "{}  infidelity {:.3e}  iterations {}", errs.join("  "), s.mean_infidelity, s.total_iterations)
                    .map_err(io_err)?;
            }
            for f in &result.files {
                writeln!(out, "wrote {}", f.display()).map_err(io_err)?;
            }
        }
        Command::Compare { configs, flags } => {
            let specs = configs.iter().map(|c| load(c)).collect::<pvqd::Result<Vec<_>>>()?;
            let table = compare_policies(&specs, &options(flags))?;
            write!(out, "{table}").map_err(io_err)?;
        }
        Command::Presets { action: PresetAction::List } => {
            for name in preset_names() {
                writeln!(out, "{name}").map_err(io_err)?;
            }
        }
        Command::Presets { action: PresetAction::Dump { name } } => {
            write!(out, "{}", preset_text(&name)?).map_err(io_err)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse(), &mut io::stdout().lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(pvqd::Error::Io { source, .. }) if source.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
