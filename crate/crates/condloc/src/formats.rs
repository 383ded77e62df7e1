//! Line-oriented file formats.
//!
//! Probability streams are JSON Lines. A record with a `view` field is one
//! view of one clip; a record without it is an already fused clip.
//! Submissions and ground truth share the text format
//! `video_id class_id start_s end_s`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use condloc_core::fusion::FusedStream;
use condloc_core::{normalize_probs, normalize_vector, ClassId, GroundTruthActivity, Localization, ProbFrame, ViewId};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProbLine {
    video_id: String,
    #[serde(default)]
    view: Option<ViewId>,
    clip_index: u32,
    probs: Vec<f64>,
}

#[derive(Serialize)]
struct FusedLine<'a> {
    video_id: &'a str,
    clip_index: u32,
    probs: &'a [f64],
}

/// Parsed probability input, grouped by video id.
pub enum ProbInput {
    Views(BTreeMap<String, Vec<ProbFrame>>),
    Fused(BTreeMap<String, FusedStream>),
}

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|source| CliError::Write { path: path.into(), source })
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Reads per-view or fused probability records. Every vector is checked
/// and normalized; a file mixing both record kinds is rejected.
pub fn read_probs(path: &Path, num_classes: usize) -> CliResult<ProbInput> {
    let text = read_text(path)?;
    let mut views: BTreeMap<String, Vec<ProbFrame>> = BTreeMap::new();
    let mut fused: BTreeMap<String, Vec<(usize, u32, Vec<f64>)>> = BTreeMap::new();
    for (line, raw) in content_lines(&text) {
        let rec: ProbLine = serde_json::from_str(raw).map_err(|e| CliError::parse(path, line, e))?;
        let context = || format!("{}: line {line}", path.display());
        let ProbLine { video_id, view, clip_index, mut probs } = rec;
        if probs.len() != num_classes {
            return Err(CliError::validation(
                context(),
                condloc_core::Error::LengthMismatch { expected: num_classes, got: probs.len() },
            ));
        }
        match view {
            Some(view) => {
                let frame = normalize_probs(ProbFrame { video_id, view, clip_index, probs })
                    .map_err(|e| CliError::validation(context(), e))?;
                views.entry(frame.video_id.clone()).or_default().push(frame);
            }
            None => {
                normalize_vector(&mut probs).map_err(|e| CliError::validation(context(), e))?;
                fused.entry(video_id).or_default().push((line, clip_index, probs));
            }
        }
        if !views.is_empty() && !fused.is_empty() {
            return Err(CliError::Invalid(format!(
                "{}: mixes per-view and fused records",
                context()
            )));
        }
    }
    if views.is_empty() && fused.is_empty() {
        return Err(CliError::NoRecords { path: path.into() });
    }
    if !views.is_empty() {
        return Ok(ProbInput::Views(views));
    }
    let mut streams = BTreeMap::new();
    for (video_id, mut recs) in fused {
        recs.sort_by_key(|r| r.1);
        let first_clip = recs[0].1;
        for (pos, (line, clip, _)) in recs.iter().enumerate() {
            if *clip != first_clip + pos as u32 {
                let what = if pos > 0 && recs[pos - 1].1 == *clip { "duplicate" } else { "missing clip before" };
                return Err(CliError::Invalid(format!(
                    "{}: line {line}: {what} clip {clip} of video {video_id}",
                    path.display()
                )));
            }
        }
        let vectors = recs.into_iter().map(|r| r.2).collect();
        streams.insert(video_id.clone(), FusedStream { video_id, first_clip, vectors });
    }
    Ok(ProbInput::Fused(streams))
}

pub fn render_probs(frames: &[ProbFrame]) -> String {
    let mut out = String::new();
    for f in frames {
        out.push_str(&serde_json::to_string(f).expect("frames serialize"));
        out.push('\n');
    }
    out
}

pub fn render_fused<'a>(streams: impl IntoIterator<Item = &'a FusedStream>) -> String {
    let mut out = String::new();
    for s in streams {
        for (i, v) in s.vectors.iter().enumerate() {
            let line = FusedLine { video_id: &s.video_id, clip_index: s.first_clip + i as u32, probs: v };
            out.push_str(&serde_json::to_string(&line).expect("fused records serialize"));
            out.push('\n');
        }
    }
    out
}

/// One line of a submission or ground-truth file.
#[derive(Clone, Debug, PartialEq)]
pub struct TimedLabel {
    pub video_id: String,
    pub class_id: ClassId,
    pub start_s: f64,
    pub end_s: f64,
}

impl From<TimedLabel> for GroundTruthActivity {
    fn from(l: TimedLabel) -> Self {
        GroundTruthActivity { video_id: l.video_id, class_id: l.class_id, start_s: l.start_s, end_s: l.end_s }
    }
}

pub fn read_labels(path: &Path, num_classes: usize) -> CliResult<Vec<TimedLabel>> {
    let text = read_text(path)?;
    let mut out = Vec::new();
    for (line, raw) in content_lines(&text) {
        let fields: Vec<&str> = raw.split_whitespace().collect();
        let [video_id, class, start, end] = fields[..] else {
            return Err(CliError::parse(path, line, format!("expected 4 fields, found {}", fields.len())));
        };
        let class: usize = class.parse().map_err(|_| CliError::parse(path, line, format!("bad class id `{class}`")))?;
        let class_id = ClassId::checked(class, num_classes).map_err(|e| CliError::parse(path, line, e))?;
        let time = |s: &str| -> CliResult<f64> {
            match s.parse::<f64>() {
                Ok(t) if t.is_finite() && t >= 0.0 => Ok(t),
                _ => Err(CliError::parse(path, line, format!("bad time `{s}`"))),
            }
        };
        let (start_s, end_s) = (time(start)?, time(end)?);
        if start_s >= end_s {
            return Err(CliError::parse(path, line, format!("start {start_s} not before end {end_s}")));
        }
        out.push(TimedLabel { video_id: video_id.to_string(), class_id, start_s, end_s });
    }
    Ok(out)
}

/// Rounds half-up to whole seconds.
pub fn round_half_up(t: f64) -> i64 {
    (t + 0.5).floor() as i64
}

/// Renders localizations as submission lines sorted by video, class and
/// start. Whole-second output never collapses a segment to zero length.
pub fn render_submission(locs: &[Localization], fractional: bool) -> String {
    let mut rows: Vec<(&str, ClassId, f64, f64)> = locs
        .iter()
        .flat_map(|l| l.segments.iter().map(move |s| (l.video_id.as_str(), s.class_id, s.start_s, s.end_s)))
        .collect();
    rows.sort_by(|a, b| {
        (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.total_cmp(&b.2)).then(a.3.total_cmp(&b.3))
    });
    let mut out = String::new();
    for (video, class, start, end) in rows {
        if fractional {
            let _ = writeln!(out, "{video} {} {start} {end}", class.index());
        } else {
            let s = round_half_up(start);
            let e = round_half_up(end).max(s + 1);
            let _ = writeln!(out, "{video} {} {s} {e}", class.index());
        }
    }
    out
}

pub fn render_labels(labels: &[GroundTruthActivity]) -> String {
    let mut out = String::new();
    for g in labels {
        let _ = writeln!(out, "{} {} {} {}", g.video_id, g.class_id.index(), g.start_s, g.end_s);
    }
    out
}
