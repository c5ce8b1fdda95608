use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use onroad_core::config::{parse_origin, RunConfig};
use onroad_core::hotspot::CounterMode;

mod commands;
mod output;

#[derive(Parser, Debug)]
#[command(name = "onroad", version, about = "Road-segment air pollution maps from taxi-mounted sensors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Split road polylines into fixed-length segments.
    Segment(RunArgs),
    /// Generate a synthetic city, taxi fleet and sensor stream.
    Synth(SynthArgs),
    /// QA, snap and reduce observations to hourly segment medians.
    Reduce(RunArgs),
    /// Compare mobile buffer medians with fixed-station hourly values.
    Compare(RunArgs),
    /// Flag segments whose dominant exposure level is high.
    Hotspots(RunArgs),
    /// segment, reduce, hotspots and (with stations) compare in one pass.
    RunAll(RunArgs),
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// key = value config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker threads; 0 uses one per core.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    tz_offset_s: Option<i64>,
    /// Road polylines, CSV (WKT) or GeoJSON.
    #[arg(long)]
    roads: Option<PathBuf>,
    /// Segment file written by `segment`.
    #[arg(long)]
    segments: Option<PathBuf>,
    #[arg(long)]
    observations: Option<PathBuf>,
    #[arg(long)]
    stations: Option<PathBuf>,
    /// Projection origin as `lat,lon`, or `auto`.
    #[arg(long, allow_hyphen_values = true)]
    origin: Option<String>,
    #[arg(long)]
    target_len: Option<f64>,
    #[arg(long)]
    max_snap: Option<f64>,
    #[arg(long)]
    buffer_radius: Option<f64>,
    #[arg(long)]
    gap_s: Option<i64>,
    #[arg(long)]
    vms_days: Option<u32>,
    /// `samples` or `duration`.
    #[arg(long)]
    counter_mode: Option<String>,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Synthetic-world config (key = value).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    tz_offset_s: Option<i64>,
    #[arg(long)]
    seed: Option<u64>,
}

fn positive(name: &str, v: f64) -> Result<f64, commands::Failure> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(commands::Failure::usage(format!("--{name} must be positive")))
    }
}

impl RunArgs {
    fn resolve(self) -> Result<RunConfig, commands::Failure> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| commands::Failure::usage(format!("cannot read config {}: {e}", path.display())))?;
                RunConfig::parse(&text).map_err(|e| commands::Failure::usage(format!("{}: {e}", path.display())))?
            }
            None => RunConfig::default(),
        };
        if let Some(v) = self.out_dir {
            cfg.out_dir = v;
        }
        if let Some(v) = self.workers {
            cfg.workers = v;
        }
        if let Some(v) = self.tz_offset_s {
            cfg.tz_offset_s = v;
        }
        if let Some(v) = self.roads {
            cfg.roads = Some(v);
        }
        if let Some(v) = self.segments {
            cfg.segments = Some(v);
        }
        if let Some(v) = self.observations {
            cfg.observations = Some(v);
        }
        if let Some(v) = self.stations {
            cfg.stations = Some(v);
        }
        if let Some(v) = self.origin {
            cfg.origin = if v == "auto" {
                None
            } else {
                Some(parse_origin(&v).map_err(|e| commands::Failure::usage(format!("--origin: {e}")))?)
            };
        }
        if let Some(v) = self.target_len {
            cfg.target_len_m = positive("target-len", v)?;
        }
        if let Some(v) = self.max_snap {
            cfg.max_snap_m = positive("max-snap", v)?;
        }
        if let Some(v) = self.buffer_radius {
            cfg.buffer_radius_m = positive("buffer-radius", v)?;
        }
        if let Some(v) = self.gap_s {
            if v <= 0 {
                return Err(commands::Failure::usage("--gap-s must be positive"));
            }
            cfg.gap_s = v;
        }
        if let Some(v) = self.vms_days {
            cfg.vms_days = v;
        }
        if let Some(v) = self.counter_mode {
            cfg.counter_mode = match v.as_str() {
                "samples" => CounterMode::Samples,
                "duration" => CounterMode::Duration,
                _ => return Err(commands::Failure::usage("--counter-mode must be `samples` or `duration`")),
            };
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<(), commands::Failure> {
    match cli.command {
        Command::Segment(a) => commands::segment(&a.resolve()?),
        Command::Reduce(a) => commands::reduce(&a.resolve()?),
        Command::Compare(a) => commands::compare(&a.resolve()?),
        Command::Hotspots(a) => commands::hotspots(&a.resolve()?),
        Command::RunAll(a) => commands::run_all(&a.resolve()?),
        Command::Synth(a) => commands::synth(&commands::SynthRequest {
            config: a.config,
            out_dir: a.out_dir.unwrap_or_else(|| PathBuf::from("out")),
            workers: a.workers.unwrap_or(0),
            tz_offset_s: a.tz_offset_s,
            seed: a.seed,
        }),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
