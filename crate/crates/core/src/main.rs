use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vosfuse::harness::{
    evaluate_dataset, fuse_dataset, synth_scenario, write_dataset, Aggregation, Corruption,
    DatasetLayout, DatasetReport, EvalSettings, FlowSchedule, HarnessError, HarnessResult,
    RunConfig, ScorerChoice, ShapeKind, SynthScenario, Table5, Table5Means, TableFormat,
};
use vosfuse::{MetricConfig, MetricId};

/// Evaluate and fuse static / moving-object segmentation predictions.
#[derive(Parser)]
#[command(name = "vosfuse", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score both predictors and every fusion variant against ground truth.
    Eval {
        #[command(flatten)]
        run: RunArgs,
        /// Report path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the soft-fused map of every frame as 8-bit PNG.
    Fuse {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a seeded synthetic dataset.
    Synth {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        frames: usize,
        /// clean, noisy[:level], dropout[:level] or mixed.
        #[arg(long, default_value = "mixed")]
        schedule: FlowSchedule,
        #[arg(long, default_value_t = 4)]
        sequences: usize,
        #[arg(long, default_value_t = 64)]
        width: usize,
        #[arg(long, default_value_t = 48)]
        height: usize,
        /// rectangle, ellipse or alternate.
        #[arg(long, default_value = "alternate")]
        shape: ShapeKind,
        #[arg(long, default_value_t = 1.0)]
        mos_gain: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render the SOS/MOS/APS/APF/Ideal comparison from a report or a means file.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "text")]
        format: TableFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    root: PathBuf,
    #[arg(long)]
    sos: String,
    #[arg(long)]
    mos: String,
    #[arg(long)]
    gt: String,
    #[arg(long)]
    flow: Option<String>,
    #[arg(long)]
    rgb: Option<String>,
    /// oracle[:metric], constant:<w>, heuristic[:a,b,c] or random.
    #[arg(long, default_value = "oracle")]
    scorer: ScorerChoice,
    /// Metric the ideal selector maximises.
    #[arg(long, default_value = "j")]
    ideal: MetricId,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    /// Boundary tolerance in pixels; scales with the image diagonal by default.
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long, default_value_t = vosfuse::metrics::DEFAULT_S_ALPHA)]
    alpha: f64,
    /// Average over frames instead of over sequence means.
    #[arg(long)]
    frame_weighted: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl RunArgs {
    fn config(self) -> RunConfig {
        RunConfig {
            layout: DatasetLayout {
                root: self.root,
                gt: self.gt,
                sos: self.sos,
                mos: self.mos,
                flow: self.flow,
                rgb: self.rgb,
            },
            settings: EvalSettings {
                metrics: MetricConfig {
                    binarize_threshold: self.threshold,
                    boundary_tolerance: self.tolerance,
                    s_alpha: self.alpha,
                },
                scorer: self.scorer,
                ideal_metric: self.ideal,
                aggregation: if self.frame_weighted {
                    Aggregation::FrameWeighted
                } else {
                    Aggregation::SequenceMean
                },
                seed: self.seed,
            },
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> HarnessResult<()> {
    match out {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(parent)
                    .map_err(|e| HarnessError::Config(format!("{}: {e}", parent.display())))?;
            }
            fs::write(p, text).map_err(|e| HarnessError::Config(format!("{}: {e}", p.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> HarnessResult<()> {
    match cli.command {
        Command::Eval { run, out } => {
            let report = evaluate_dataset(&run.config())?;
            emit(out.as_deref(), &report.to_json()?)
        }
        Command::Fuse { run, out } => {
            let written = fuse_dataset(&run.config(), &out)?;
            log::info!("wrote {} fused maps under {}", written.len(), out.display());
            Ok(())
        }
        Command::Synth { seed, frames, schedule, sequences, width, height, shape, mos_gain, out } => {
            let scenario = SynthScenario {
                sequences,
                frames,
                width,
                height,
                shape,
                schedule,
                corruption: Corruption { mos_gain, ..Corruption::default() },
                seed,
            };
            scenario
                .validate()
                .map_err(|e| HarnessError::Config(e.to_string()))?;
            let ds = synth_scenario(&scenario)?;
            write_dataset(&ds, &out)?;
            Ok(())
        }
        Command::Report { input, format, out } => {
            let text = fs::read_to_string(&input)
                .map_err(|e| HarnessError::Config(format!("{}: {e}", input.display())))?;
            let table = match DatasetReport::from_json(&text) {
                Ok(report) => Table5::from_report(&report),
                Err(_) => {
                    let means: Table5Means = serde_json::from_str(&text).map_err(|e| {
                        HarnessError::Data(vosfuse::Error::Shape(format!(
                            "{} is neither a report nor a means file: {e}",
                            input.display()
                        )))
                    })?;
                    Table5::from_means(&means)
                }
            };
            emit(out.as_deref(), &table.render(format))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("vosfuse: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
