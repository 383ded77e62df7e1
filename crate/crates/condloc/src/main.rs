use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use condloc::commands::{self, check_distinct};
use condloc::formats::write_text;
use condloc::{report, Background, CliError, CliResult, OutputFormat, RunConfig, WeightsArg};

#[derive(Parser)]
#[command(name = "condloc", version, about = "Multi-view activity localization with conditional post-processing")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, env = "CONDLOC_CONFIG")]
    config: Option<PathBuf>,
    /// Corpus seed for synthetic data.
    #[arg(long, global = true, env = "CONDLOC_SEED", default_value_t = 1)]
    seed: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, env = "CONDLOC_JOBS", default_value_t = 0)]
    jobs: usize,
    #[arg(long, global = true, env = "CONDLOC_FORMAT", value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
    /// `default` or a JSON file of per-class [dashboard, rearview, rightside] rows.
    #[arg(long, global = true, env = "CONDLOC_WEIGHTS")]
    weights: Option<WeightsArg>,
    /// Background class id, or `none`.
    #[arg(long, global = true, env = "CONDLOC_BACKGROUND_CLASS")]
    background_class: Option<Background>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate ground truth and per-view probability streams.
    Synth {
        #[arg(long, default_value_t = 1)]
        videos: usize,
        /// Ground-truth output (text).
        #[arg(long)]
        gt: PathBuf,
        /// Per-view probability output (JSON Lines).
        #[arg(long)]
        probs: PathBuf,
        #[arg(long)]
        eps_flip: Option<f64>,
        #[arg(long)]
        temperature: Option<f64>,
        /// No confusion flips and near-zero temperature.
        #[arg(long, conflicts_with_all = ["eps_flip", "temperature"])]
        noiseless: bool,
    },
    /// Fuse per-view streams into one stream per video.
    Fuse {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Localize activities from per-view or fused streams.
    Localize {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Keep fractional seconds instead of rounding half-up.
        #[arg(long)]
        fractional: bool,
        /// Restoration notices (JSON Lines); defaults to OUTPUT.notes.jsonl.
        #[arg(long)]
        notes: Option<PathBuf>,
    },
    /// Score a submission against ground truth.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        /// Also write the full report as JSON.
        #[arg(long)]
        report_out: Option<PathBuf>,
    },
    /// Show top-1, top-2 and final timelines per class.
    Report {
        #[arg(short, long)]
        input: PathBuf,
        /// Only this video.
        #[arg(long)]
        video: Option<String>,
        /// Columns per timeline.
        #[arg(long, default_value_t = 48)]
        width: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn emit(output: Option<&Path>, text: &str) -> CliResult<()> {
    match output {
        Some(p) => write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let mut config = RunConfig::load(cli.config.as_deref())?;
    if let Some(bg) = cli.background_class {
        config.background_class = bg;
    }
    if let Some(w) = &cli.weights {
        config.set_weights(w)?;
    }
    if let Command::Synth { eps_flip, temperature, noiseless, .. } = &cli.command {
        let noise = &mut config.synth.noise;
        if *noiseless {
            *noise = condloc_core::synth::NoiseModel::noiseless();
        }
        if let Some(e) = eps_flip {
            noise.eps_flip = *e;
        }
        if let Some(t) = temperature {
            noise.temperature = *t;
        }
    }
    config.validate()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    pool.install(|| match cli.command {
        Command::Synth { videos, gt, probs, .. } => {
            check_distinct(&[], &[&gt, &probs])?;
            let out = commands::synth(&config, cli.seed, videos)?;
            write_text(&gt, &out.ground_truth)?;
            write_text(&probs, &out.probs)
        }
        Command::Fuse { input, output } => {
            check_distinct(&[&input], &[&output])?;
            write_text(&output, &commands::fuse(&config, &input)?)
        }
        Command::Localize { input, output, fractional, notes } => {
            let notes = notes.unwrap_or_else(|| {
                let mut p = output.clone().into_os_string();
                p.push(".notes.jsonl");
                p.into()
            });
            check_distinct(&[&input], &[&output, &notes])?;
            let out = commands::localize(&config, &input, fractional)?;
            write_text(&output, &out.submission)?;
            write_text(&notes, &out.notes)
        }
        Command::Eval { pred, gt, report_out } => {
            if let Some(r) = &report_out {
                check_distinct(&[&pred, &gt], &[r])?;
            }
            let report = commands::eval(&config, &pred, &gt)?;
            print!("{}", commands::render_report(&report, cli.format));
            match report_out {
                Some(p) => write_text(&p, &commands::render_report(&report, OutputFormat::Json)),
                None => Ok(()),
            }
        }
        Command::Report { input, video, width, output } => {
            if let Some(o) = &output {
                check_distinct(&[&input], &[o])?;
            }
            let traces = commands::trace(&config, &input)?;
            let traces: Vec<_> = traces
                .into_iter()
                .filter(|(seq, _)| video.as_deref().is_none_or(|v| v == seq.video_id()))
                .collect();
            if traces.is_empty() {
                return Err(CliError::Invalid(format!("no video {} in input", video.unwrap_or_default())));
            }
            let bg = config.background_class.0;
            let reports: Vec<_> = traces.iter().map(|(seq, t)| report::build(seq, t, bg)).collect();
            let starts: Vec<f64> = traces.iter().map(|(seq, _)| seq.clip_start(0)).collect();
            emit(output.as_deref(), &report::render(&reports, &starts, width.max(1), cli.format))
        }
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
