use std::fs::File;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qlif::analysis::{self, ChaosThresholds};
use qlif::config::{preset, ExperimentConfig, Scale};
use qlif::io;
use qlif::runner;
use qlif::spin_model::{velocity_table, HamiltonianSpec};
use qlif::{Error, Result};

/// QLIF and OTOC experiments on the mixed-field Ising chain.
#[derive(Parser)]
#[command(name = "qlif", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config; outputs go under $QLIF_OUTPUT_ROOT.
    Run { config: PathBuf },
    /// Print a figure preset as a config file.
    Preset {
        name: String,
        #[arg(long, default_value = "desk")]
        scale: Scale,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Power-law fit of |T_d(t)| from a trace CSV.
    Fit {
        trace: PathBuf,
        /// Fit window `a,b`; defaults to [t_LR(d), t_max(d)] from the CSV header.
        #[arg(long, value_parser = parse_window)]
        window: Option<(f64, f64)>,
        #[arg(long, default_value_t = 1e-14)]
        floor: f64,
    },
    /// Light-cone velocity from a heatmap CSV.
    Velocity {
        heatmap: PathBuf,
        #[arg(long, default_value_t = analysis::DEFAULT_FRONT_THRESHOLD)]
        threshold: f64,
    },
    /// Late-time chaos verdict from the integral column of a trace CSV.
    Verdict {
        trace: PathBuf,
        /// Scrambling time; defaults to L / v_max from the CSV header.
        #[arg(long)]
        t_scr: Option<f64>,
    },
}

fn parse_window(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected `a,b`")?;
    let a = a.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let b = b.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok((a, b))
}

fn header_spec(meta: &std::collections::BTreeMap<String, String>) -> Result<HamiltonianSpec> {
    let get = |k: &str| -> Result<f64> {
        meta.get(k)
            .ok_or_else(|| Error::Parse(format!("CSV header lacks `# {k}=`; pass the value explicitly")))?
            .parse()
            .map_err(|_| Error::Parse(format!("bad `{k}` in CSV header")))
    };
    HamiltonianSpec::new(get("L")? as usize, get("J")?, get("B")?, get("hz").unwrap_or(0.0))
}

fn header_distance(meta: &std::collections::BTreeMap<String, String>) -> Result<usize> {
    let site = |k: &str| -> Result<usize> {
        meta.get(k)
            .and_then(|v| v.split_whitespace().next())
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::Parse(format!("CSV header lacks `# {k}=`; pass --window")))
    };
    Ok(site("obs")?.abs_diff(site("frozen")?))
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    let s = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    println!("{s}");
    Ok(())
}

fn execute(cli: Cli) -> Result<runner::RunStatus> {
    match cli.command {
        Command::Run { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let outcome = runner::run(&cfg)?;
            for w in &outcome.manifest.warnings {
                eprintln!("warning: {w}");
            }
            println!("{}", outcome.dir.display());
            return Ok(outcome.status());
        }
        Command::Preset { name, scale, out } => {
            let text = preset(&name, scale)?.to_toml()?;
            match out {
                Some(path) => std::fs::write(path, text)?,
                None => print!("{text}"),
            }
        }
        Command::Fit { trace, window, floor } => {
            let table = io::read_trace_csv(File::open(&trace)?)?;
            let window = match window {
                Some(w) => w,
                None => analysis::default_fit_window(&velocity_table(&header_spec(&table.meta)?), header_distance(&table.meta)?),
            };
            print_json(&analysis::powerlaw_fit(&table.times, &table.t_d, window, floor)?)?;
        }
        Command::Velocity { heatmap, threshold } => {
            let (_, data) = io::read_heatmap_csv(File::open(&heatmap)?)?;
            let fit = analysis::light_cone_velocity(&data, threshold)?;
            let sensitivity = analysis::light_cone_sensitivity(&data, &[0.1 * threshold, threshold, 10.0 * threshold]);
            print_json(&serde_json::json!({ "fit": fit, "threshold_sensitivity": sensitivity }))?;
        }
        Command::Verdict { trace, t_scr } => {
            let table = io::read_trace_csv(File::open(&trace)?)?;
            let t_scr = match t_scr {
                Some(t) => t,
                None => {
                    let spec = header_spec(&table.meta)?;
                    velocity_table(&spec).t_scr(spec.sites)
                }
            };
            print_json(&analysis::chaos_metric(&table.times, &table.integral, t_scr, ChaosThresholds::default())?)?;
        }
    }
    Ok(runner::RunStatus::Ok)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(status) => ExitCode::from(status.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
