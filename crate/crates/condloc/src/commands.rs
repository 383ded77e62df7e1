use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use condloc_core::fusion::{align_streams, fuse_views, FusedStream};
use condloc_core::localize::{localize_video_traced, DecodedSequence, StageTrace};
use condloc_core::metrics::{match_and_score, ScoreReport};
use condloc_core::synth::{emit_streams, generate_scenario, video_seed};
use condloc_core::{GroundTruthActivity, Localization, Notice, Segment};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::formats::{self, ProbInput};
use crate::OutputFormat;

/// Fails when an output path would overwrite one of the inputs.
pub fn check_distinct(inputs: &[&Path], outputs: &[&Path]) -> CliResult<()> {
    let key = |p: &Path| std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf());
    let all: Vec<PathBuf> = inputs.iter().chain(outputs).map(|p| key(p)).collect();
    for (i, out) in all.iter().enumerate().skip(inputs.len()) {
        if all[..i].contains(out) {
            return Err(CliError::Invalid(format!("{} is used more than once", out.display())));
        }
    }
    Ok(())
}

fn video_name(index: usize) -> String {
    format!("vid{index:04}")
}

pub struct SynthOutput {
    pub ground_truth: String,
    pub probs: String,
}

/// Generates `videos` scenarios, each from its own seed derived from
/// `seed`, and renders ground truth and per-view streams.
pub fn synth(config: &RunConfig, seed: u64, videos: usize) -> CliResult<SynthOutput> {
    let scenario_config = config.scenario_config();
    let per_video: Vec<_> = (0..videos)
        .into_par_iter()
        .map(|i| {
            let scenario = generate_scenario(video_seed(seed, i as u64), video_name(i), &scenario_config)
                .map_err(|e| CliError::validation("synth", e))?;
            let frames = emit_streams(&scenario);
            Ok((formats::render_labels(&scenario.schedule), formats::render_probs(&frames)))
        })
        .collect::<CliResult<_>>()?;
    let mut out = SynthOutput { ground_truth: String::new(), probs: String::new() };
    for (gt, probs) in per_video {
        out.ground_truth.push_str(&gt);
        out.probs.push_str(&probs);
    }
    Ok(out)
}

fn fuse_all(config: &RunConfig, input: ProbInput) -> CliResult<Vec<FusedStream>> {
    match input {
        ProbInput::Fused(streams) => Ok(streams.into_values().collect()),
        ProbInput::Views(videos) => {
            let weights = config.view_weights()?;
            let videos: Vec<_> = videos.into_iter().collect();
            videos
                .into_par_iter()
                .map(|(video, frames)| {
                    let ctx = |e| CliError::validation(format!("video {video}"), e);
                    let aligned = align_streams(frames).map_err(ctx)?;
                    fuse_views(&aligned, &weights, config.fusion.mode).map_err(ctx)
                })
                .collect()
        }
    }
}

pub fn fuse(config: &RunConfig, input: &Path) -> CliResult<String> {
    let streams = fuse_all(config, formats::read_probs(input, config.num_classes)?)?;
    Ok(formats::render_fused(&streams))
}

/// Runs every post-processing stage on each video of a probability file.
pub fn trace(config: &RunConfig, input: &Path) -> CliResult<Vec<(DecodedSequence, StageTrace)>> {
    let streams = fuse_all(config, formats::read_probs(input, config.num_classes)?)?;
    let params = config.post_params();
    streams
        .into_par_iter()
        .map(|fused| {
            let ctx = |e| CliError::validation(format!("video {}", fused.video_id), e);
            let seq = DecodedSequence::from_fused(&fused, config.clip).map_err(ctx)?;
            let trace = localize_video_traced(&seq, &params).map_err(ctx)?;
            Ok((seq, trace))
        })
        .collect()
}

#[derive(Serialize)]
struct NoteLine<'a> {
    video_id: &'a str,
    notices: &'a [Notice],
}

pub struct LocalizeOutput {
    pub submission: String,
    /// JSON Lines, one record per video with restoration notices.
    pub notes: String,
    pub localizations: Vec<Localization>,
}

pub fn localize(config: &RunConfig, input: &Path, fractional: bool) -> CliResult<LocalizeOutput> {
    let localizations: Vec<Localization> =
        trace(config, input)?.into_iter().map(|(_, t)| t.localization).collect();
    let mut notes = String::new();
    for loc in localizations.iter().filter(|l| !l.notices.is_empty()) {
        for n in &loc.notices {
            log::info!("{}: {}", loc.video_id, describe_notice(n));
        }
        let line = NoteLine { video_id: &loc.video_id, notices: &loc.notices };
        notes.push_str(&serde_json::to_string(&line).expect("notices serialize"));
        notes.push('\n');
    }
    let submission = formats::render_submission(&localizations, fractional);
    Ok(LocalizeOutput { submission, notes, localizations })
}

pub fn describe_notice(n: &Notice) -> String {
    match n {
        Notice::Restored { class_id } => format!("class {class_id} restored from top-2 evidence"),
        Notice::WeakRestore { class_id, clip_index } => {
            format!("class {class_id} never ranked top-2; placed at clip {clip_index}")
        }
    }
}

fn predictions(labels: Vec<formats::TimedLabel>) -> Vec<Localization> {
    let mut by_video: BTreeMap<String, Vec<Segment>> = BTreeMap::new();
    for l in labels {
        by_video.entry(l.video_id).or_default().push(Segment {
            class_id: l.class_id,
            start_s: l.start_s,
            end_s: l.end_s,
            score: 0.0,
        });
    }
    by_video
        .into_iter()
        .map(|(video_id, segments)| Localization { video_id, segments, notices: vec![] })
        .collect()
}

pub fn eval(config: &RunConfig, pred: &Path, gt: &Path) -> CliResult<ScoreReport> {
    let preds = predictions(formats::read_labels(pred, config.num_classes)?);
    let gts: Vec<GroundTruthActivity> =
        formats::read_labels(gt, config.num_classes)?.into_iter().map(Into::into).collect();
    let report = match_and_score(&preds, &gts);
    for w in &report.warnings {
        log::warn!("{w}");
    }
    Ok(report)
}

pub fn render_report(report: &ScoreReport, format: OutputFormat) -> String {
    if format == OutputFormat::Json {
        let mut s = serde_json::to_string_pretty(report).expect("report serializes");
        s.push('\n');
        return s;
    }
    let o = &report.overall;
    let mut out = String::new();
    let _ = writeln!(out, "mean_os {:.4}", o.mean_os);
    let _ = writeln!(
        out,
        "ground truth {}  matched {}  unmatched gt {}  unmatched predictions {}",
        o.gt_count, o.matched_count, o.unmatched_gt, o.unmatched_pred
    );
    let _ = writeln!(out, "{:>5} {:>6} {:>8} {:>8}", "class", "gt", "matched", "mean_os");
    for c in &o.per_class {
        let _ = writeln!(
            out,
            "{:>5} {:>6} {:>8} {:>8.4}",
            c.class_id.index(),
            c.gt_count,
            c.matched_count,
            c.mean_os
        );
    }
    for w in &report.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    out
}
