//! Per-video stage timelines: raw top-1 runs, top-2 support and the final
//! localization, drawn side by side as text bars or emitted as JSON.

use std::fmt::Write as _;

use condloc_core::localize::{DecodedSequence, StageTrace};
use condloc_core::{ClassId, Notice};
use serde::Serialize;

use crate::commands::describe_notice;
use crate::OutputFormat;

#[derive(Debug, Serialize)]
pub struct ClassTimeline {
    pub class_id: ClassId,
    /// Intervals where the class is the top-1 prediction.
    pub top1: Vec<(f64, f64)>,
    /// Intervals where the class ranks first or second.
    pub top2: Vec<(f64, f64)>,
    pub final_segment: Option<(f64, f64)>,
}

#[derive(Debug, Serialize)]
pub struct VideoReport {
    pub video_id: String,
    pub num_clips: usize,
    pub duration_s: f64,
    pub classes: Vec<ClassTimeline>,
    pub notices: Vec<Notice>,
}

fn intervals(seq: &DecodedSequence, hit: impl Fn(usize) -> bool) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut open: Option<usize> = None;
    for pos in 0..=seq.len() {
        let on = pos < seq.len() && hit(pos);
        match (open, on) {
            (None, true) => open = Some(pos),
            (Some(first), false) => {
                out.push((seq.clip_start(first), seq.clip_start(pos - 1) + seq.hop_s()));
                open = None;
            }
            _ => {}
        }
    }
    out
}

pub fn build(seq: &DecodedSequence, trace: &StageTrace, background: Option<ClassId>) -> VideoReport {
    let loc = &trace.localization;
    let classes = (0..seq.num_classes() as u16)
        .map(ClassId::new)
        .filter(|c| Some(*c) != background)
        .map(|c| ClassTimeline {
            class_id: c,
            top1: intervals(seq, |p| seq.top1(p) == c),
            top2: intervals(seq, |p| seq.in_top2(p, c)),
            final_segment: loc.segments.iter().find(|s| s.class_id == c).map(|s| (s.start_s, s.end_s)),
        })
        .collect();
    VideoReport {
        video_id: seq.video_id().to_string(),
        num_clips: seq.len(),
        duration_s: seq.len() as f64 * seq.hop_s(),
        classes,
        notices: loc.notices.clone(),
    }
}

fn bar(spans: &[(f64, f64)], t0: f64, duration: f64, width: usize) -> String {
    (0..width)
        .map(|col| {
            let lo = t0 + duration * col as f64 / width as f64;
            let hi = t0 + duration * (col + 1) as f64 / width as f64;
            if spans.iter().any(|&(s, e)| s < hi && e > lo) { '#' } else { '.' }
        })
        .collect()
}

pub fn render(reports: &[VideoReport], t0: &[f64], width: usize, format: OutputFormat) -> String {
    if format == OutputFormat::Json {
        let mut s = serde_json::to_string_pretty(reports).expect("report serializes");
        s.push('\n');
        return s;
    }
    let mut out = String::new();
    for (r, &start) in reports.iter().zip(t0) {
        let _ = writeln!(out, "video {} ({} clips, {:.1} s)", r.video_id, r.num_clips, r.duration_s);
        let pad = width.saturating_sub(5);
        let _ = writeln!(out, "class  top-1{:pad$} | top-2{:pad$} | final", "", "");
        for c in &r.classes {
            let fin: Vec<(f64, f64)> = c.final_segment.into_iter().collect();
            let _ = writeln!(
                out,
                "{:>5}  {} | {} | {}",
                c.class_id.index(),
                bar(&c.top1, start, r.duration_s, width),
                bar(&c.top2, start, r.duration_s, width),
                bar(&fin, start, r.duration_s, width),
            );
        }
        for n in &r.notices {
            let _ = writeln!(out, "note: {}", describe_notice(n));
        }
        out.push('\n');
    }
    out
}
