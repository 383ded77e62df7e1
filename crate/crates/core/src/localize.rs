//! Conditional post-processing of a fused probability sequence.
//!
//! Top-1 decoding of clip predictions is noisy: a single activity breaks
//! into pieces, short spurious labels appear, and some classes never win a
//! clip at all. Every stage here looks at the top-1 *and* top-2 ranks of
//! each clip:
//!
//! * [`decode_segments`] turns maximal runs of constant top-1 class into runs.
//! * [`conditional_merge`] joins two runs of the same class across a short
//!   gap when every gap clip still ranks that class in its top-2 with enough
//!   probability, absorbing whatever lay in the gap, then drops short
//!   low-confidence runs.
//! * [`conditional_decision`] keeps a single run per class, the one with the
//!   largest top-2 trust score.
//! * [`restore_missing`] emits a run for each required class still absent,
//!   taken from its strongest stretch of top-2 evidence.
//!
//! Runs are expressed in clip positions of a [`DecodedSequence`]; a run over
//! positions `first..=last` spans `[start(first), start(last) + hop)`, so
//! adjacent runs tile the timeline.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::FusedStream;
use crate::types::{topk, validate_vector, ClassId, ClipSpec, Segment, TopK};

/// Slack for comparing durations built from clip counts.
const TIME_EPS: f64 = 1e-9;

/// Thresholds shared by the post-processing stages.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct PostParams {
    /// Longest gap (seconds) two same-class runs may be merged across.
    pub gap_max_s: f64,
    /// Runs shorter than this are noise candidates.
    pub min_dur_s: f64,
    /// Minimum class probability on every gap clip for a merge.
    pub p_merge: f64,
    /// Short runs whose mean class probability is below this are removed.
    pub p_noise: f64,
    /// Class treated as "no activity": never required, dropped from output.
    pub background_class: Option<ClassId>,
    /// Classes the final localization must contain exactly once.
    pub required_classes: Vec<ClassId>,
}

impl Default for PostParams {
    fn default() -> Self {
        PostParams::for_classes(crate::DEFAULT_NUM_CLASSES, Some(ClassId::new(0)))
    }
}

impl PostParams {
    /// Default thresholds; every class except `background` is required.
    pub fn for_classes(num_classes: usize, background: Option<ClassId>) -> Self {
        let required_classes = (0..num_classes as u16)
            .map(ClassId::new)
            .filter(|c| Some(*c) != background)
            .collect();
        PostParams {
            gap_max_s: 2.0,
            min_dur_s: 2.0,
            p_merge: 0.30,
            p_noise: 0.50,
            background_class: background,
            required_classes,
        }
    }

    pub fn validate(&self, num_classes: usize) -> Result<()> {
        for (name, p) in [("p_merge", self.p_merge), ("p_noise", self.p_noise)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParams(format!("{name} = {p} is outside [0, 1]")));
            }
        }
        for (name, d) in [("gap_max_s", self.gap_max_s), ("min_dur_s", self.min_dur_s)] {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(Error::InvalidParams(format!("{name} = {d} must be >= 0")));
            }
        }
        if let Some(bg) = self.background_class {
            ClassId::checked(bg.index(), num_classes)?;
            if self.required_classes.contains(&bg) {
                return Err(Error::InvalidParams(format!(
                    "background class {bg} is also required"
                )));
            }
        }
        let mut seen = BTreeSet::new();
        for c in &self.required_classes {
            ClassId::checked(c.index(), num_classes)?;
            if !seen.insert(*c) {
                return Err(Error::InvalidParams(format!("class {c} is required twice")));
            }
        }
        Ok(())
    }

    pub fn is_background(&self, class: ClassId) -> bool {
        self.background_class == Some(class)
    }
}

/// A fused sequence with its per-clip top-2 ranking and timebase.
#[derive(Clone, Debug, PartialEq)]
pub struct DecodedSequence {
    video_id: String,
    spec: ClipSpec,
    first_clip: u32,
    probs: Vec<Vec<f64>>,
    ranks: Vec<TopK>,
}

impl DecodedSequence {
    pub fn new(
        video_id: impl Into<String>,
        first_clip: u32,
        probs: Vec<Vec<f64>>,
        spec: ClipSpec,
    ) -> Result<Self> {
        spec.validate()?;
        let num_classes = probs.first().ok_or(Error::EmptySequence)?.len();
        if num_classes < 2 {
            return Err(Error::LengthMismatch { expected: 2, got: num_classes });
        }
        for p in &probs {
            validate_vector(p, num_classes)?;
        }
        let ranks = probs.iter().map(|p| topk(p, 2)).collect();
        Ok(DecodedSequence { video_id: video_id.into(), spec, first_clip, probs, ranks })
    }

    pub fn from_fused(fused: &FusedStream, spec: ClipSpec) -> Result<Self> {
        Self::new(fused.video_id.clone(), fused.first_clip, fused.vectors.clone(), spec)
    }

    pub fn video_id(&self) -> &str {
        &self.video_id
    }

    pub fn spec(&self) -> &ClipSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.probs[0].len()
    }

    pub fn first_clip(&self) -> u32 {
        self.first_clip
    }

    pub fn clip_index(&self, pos: usize) -> u32 {
        self.first_clip + pos as u32
    }

    pub fn hop_s(&self) -> f64 {
        self.spec.hop_s()
    }

    pub fn clip_start(&self, pos: usize) -> f64 {
        self.spec.clip_start_s(self.clip_index(pos))
    }

    pub fn probs(&self, pos: usize) -> &[f64] {
        &self.probs[pos]
    }

    pub fn prob(&self, pos: usize, class: ClassId) -> f64 {
        self.probs[pos][class.index()]
    }

    pub fn top2(&self, pos: usize) -> &TopK {
        &self.ranks[pos]
    }

    pub fn top1(&self, pos: usize) -> ClassId {
        self.ranks[pos].ranks[0].0
    }

    /// True when `class` holds rank 1 or 2 at `pos` with nonzero
    /// probability. A zero entry in second place carries no evidence.
    pub fn in_top2(&self, pos: usize, class: ClassId) -> bool {
        self.ranks[pos].prob_of(class).is_some_and(|p| p > 0.0)
    }

    /// Time span of a run.
    pub fn run_segment(&self, run: &ClipRun) -> Segment {
        Segment {
            class_id: run.class_id,
            start_s: self.clip_start(run.first),
            end_s: self.clip_start(run.last) + self.hop_s(),
            score: run.score,
        }
    }
}

/// A candidate segment over clip positions `first..=last`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ClipRun {
    pub class_id: ClassId,
    pub first: usize,
    pub last: usize,
    /// Cumulative class probability over the run's clips.
    pub score: f64,
}

impl ClipRun {
    pub fn clips(&self) -> usize {
        self.last - self.first + 1
    }

    fn start_order(&self, other: &Self) -> Ordering {
        (self.first, self.last, self.class_id).cmp(&(other.first, other.last, other.class_id))
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(tag = "kind", rename_all = "kebab-case"))]
pub enum Notice {
    /// Class missing after decision, rebuilt from a run of top-2 evidence.
    Restored { class_id: ClassId },
    /// Class never ranked in any clip's top-2; placed at its single most
    /// probable clip.
    WeakRestore { class_id: ClassId, clip_index: u32 },
}

/// Final per-video output.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Localization {
    pub video_id: String,
    /// Sorted by start time, then class.
    pub segments: Vec<Segment>,
    pub notices: Vec<Notice>,
}

/// Maximal runs of constant top-1 class. Background runs are kept; the
/// merge stage uses them as gap context.
pub fn decode_segments(seq: &DecodedSequence) -> Vec<ClipRun> {
    let mut runs: Vec<ClipRun> = Vec::new();
    for pos in 0..seq.len() {
        let (class, p) = seq.top2(pos).ranks[0];
        match runs.last_mut() {
            Some(run) if run.class_id == class => {
                run.last = pos;
                run.score += p;
            }
            _ => runs.push(ClipRun { class_id: class, first: pos, last: pos, score: p }),
        }
    }
    runs
}

fn check_runs(runs: &[ClipRun], seq: &DecodedSequence) -> Result<()> {
    for run in runs {
        if run.first > run.last || run.last >= seq.len() {
            return Err(Error::InconsistentInput(format!(
                "class {} run over clips {}..={} does not fit a {}-clip sequence",
                run.class_id,
                run.first,
                run.last,
                seq.len()
            )));
        }
        if run.class_id.index() >= seq.num_classes() {
            return Err(Error::InvalidClass {
                class: run.class_id.index(),
                num_classes: seq.num_classes(),
            });
        }
    }
    Ok(())
}

/// Whether `left` and `right` (same class, `right` after `left`) may merge:
/// the gap is at most `gap_max_s` long and every gap clip ranks the class in
/// its top-2 with probability at least `p_merge`.
fn can_merge(left: &ClipRun, right: &ClipRun, seq: &DecodedSequence, params: &PostParams) -> bool {
    let gap_clips = right.first - left.last - 1;
    if gap_clips as f64 * seq.hop_s() > params.gap_max_s + TIME_EPS {
        return false;
    }
    (left.last + 1..right.first).all(|pos| {
        seq.in_top2(pos, left.class_id) && seq.prob(pos, left.class_id) >= params.p_merge
    })
}

/// Merges supported same-class runs left to right until nothing changes,
/// then removes short low-confidence non-background runs.
///
/// A merged run covers both runs and the gap; its score adds the class's
/// probability over the gap clips. Runs lying entirely inside the gap are
/// absorbed.
pub fn conditional_merge(
    runs: &[ClipRun],
    seq: &DecodedSequence,
    params: &PostParams,
) -> Result<Vec<ClipRun>> {
    check_runs(runs, seq)?;
    let mut runs = runs.to_vec();
    runs.sort_by(ClipRun::start_order);

    loop {
        let mut changed = false;
        let mut i = 0;
        while i < runs.len() {
            let class = runs[i].class_id;
            let end = runs[i].last;
            let next = (i + 1..runs.len()).find(|&j| runs[j].class_id == class && runs[j].first > end);
            if let Some(j) = next {
                if can_merge(&runs[i], &runs[j], seq, params) {
                    let gap_start = end + 1;
                    let gap_end = runs[j].first;
                    let gap_mass: f64 = (gap_start..gap_end).map(|pos| seq.prob(pos, class)).sum();
                    runs[i].score += runs[j].score + gap_mass;
                    runs[i].last = runs[j].last;
                    let mut k = 0;
                    runs.retain(|r| {
                        let keep = k == i || (k != j && !(r.first >= gap_start && r.last < gap_end));
                        k += 1;
                        keep
                    });
                    changed = true;
                    // `i` is unchanged: everything removed lay after it.
                    continue;
                }
            }
            i += 1;
        }
        if !changed {
            break;
        }
    }

    let hop = seq.hop_s();
    runs.retain(|r| {
        if params.is_background(r.class_id) {
            return true;
        }
        let short = (r.clips() as f64) * hop < params.min_dur_s;
        let weak = r.score / (r.clips() as f64) < params.p_noise;
        !(short && weak)
    });
    Ok(runs)
}

/// Sum of the class's probability over the run's clips, counted only where
/// the class is in that clip's top-2.
pub fn trust_score(run: &ClipRun, seq: &DecodedSequence) -> f64 {
    (run.first..=run.last)
        .filter(|&pos| seq.in_top2(pos, run.class_id))
        .map(|pos| seq.prob(pos, run.class_id))
        .fold(0.0, |acc, p| acc + p)
}

/// Ranks candidates: higher evidence, then more clips, then earlier start.
fn better(a_score: f64, a: &ClipRun, b_score: f64, b: &ClipRun) -> bool {
    match a_score.total_cmp(&b_score) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => match a.clips().cmp(&b.clips()) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => a.first < b.first,
        },
    }
}

/// Keeps the most trustworthy run of each class; background runs are
/// dropped.
pub fn conditional_decision(
    runs: &[ClipRun],
    seq: &DecodedSequence,
    params: &PostParams,
) -> Vec<ClipRun> {
    let mut best: Vec<(f64, ClipRun)> = Vec::new();
    for run in runs.iter().filter(|r| !params.is_background(r.class_id)) {
        let t = trust_score(run, seq);
        match best.iter_mut().find(|(_, b)| b.class_id == run.class_id) {
            Some(slot) => {
                if better(t, run, slot.0, &slot.1) {
                    *slot = (t, run.clone());
                }
            }
            None => best.push((t, run.clone())),
        }
    }
    let mut out: Vec<ClipRun> = best.into_iter().map(|(_, r)| r).collect();
    out.sort_by(ClipRun::start_order);
    out
}

/// Strongest maximal run of clips ranking `class` in top-2.
pub fn best_top2_run(seq: &DecodedSequence, class: ClassId) -> Option<ClipRun> {
    let mut best: Option<ClipRun> = None;
    let mut current: Option<ClipRun> = None;
    for pos in 0..=seq.len() {
        if pos < seq.len() && seq.in_top2(pos, class) {
            let p = seq.prob(pos, class);
            match current.as_mut() {
                Some(run) => {
                    run.last = pos;
                    run.score += p;
                }
                None => current = Some(ClipRun { class_id: class, first: pos, last: pos, score: p }),
            }
        } else if let Some(run) = current.take() {
            let replace = match &best {
                Some(b) => better(run.score, &run, b.score, b),
                None => true,
            };
            if replace {
                best = Some(run);
            }
        }
    }
    best
}

/// Adds a segment for every required class absent from `selected`.
pub fn restore_missing(
    selected: &[ClipRun],
    seq: &DecodedSequence,
    params: &PostParams,
) -> Result<Localization> {
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    check_runs(selected, seq)?;
    let present: BTreeSet<ClassId> = selected.iter().map(|r| r.class_id).collect();
    if present.len() != selected.len() {
        return Err(Error::InconsistentInput("more than one run for a class".into()));
    }

    let mut segments: Vec<Segment> = selected.iter().map(|r| seq.run_segment(r)).collect();
    let mut notices = Vec::new();
    for &class in params.required_classes.iter().filter(|c| !present.contains(c)) {
        match best_top2_run(seq, class) {
            Some(run) => {
                segments.push(seq.run_segment(&run));
                notices.push(Notice::Restored { class_id: class });
            }
            None => {
                let mut pos = 0;
                for p in 1..seq.len() {
                    if seq.prob(p, class) > seq.prob(pos, class) {
                        pos = p;
                    }
                }
                let run = ClipRun { class_id: class, first: pos, last: pos, score: seq.prob(pos, class) };
                segments.push(seq.run_segment(&run));
                notices.push(Notice::WeakRestore { class_id: class, clip_index: seq.clip_index(pos) });
            }
        }
    }
    sort_segments(&mut segments);
    Ok(Localization { video_id: seq.video_id().into(), segments, notices })
}

pub fn sort_segments(segments: &mut [Segment]) {
    segments.sort_by(|a, b| {
        a.start_s
            .total_cmp(&b.start_s)
            .then(a.class_id.cmp(&b.class_id))
            .then(a.end_s.total_cmp(&b.end_s))
    });
}

/// Intermediate results of every stage, for reports and debugging.
#[derive(Clone, Debug, PartialEq)]
pub struct StageTrace {
    pub decoded: Vec<ClipRun>,
    pub merged: Vec<ClipRun>,
    pub selected: Vec<ClipRun>,
    pub localization: Localization,
}

pub fn localize_video_traced(seq: &DecodedSequence, params: &PostParams) -> Result<StageTrace> {
    params.validate(seq.num_classes())?;
    let decoded = decode_segments(seq);
    let merged = conditional_merge(&decoded, seq, params)?;
    let selected = conditional_decision(&merged, seq, params);
    let localization = restore_missing(&selected, seq, params)?;
    Ok(StageTrace { decoded, merged, selected, localization })
}

/// Decode, merge, decide and restore.
pub fn localize_video(seq: &DecodedSequence, params: &PostParams) -> Result<Localization> {
    localize_video_traced(seq, params).map(|t| t.localization)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    /// Vector with the given (class, prob) entries and the remaining mass
    /// spread evenly over the other classes.
    pub(crate) fn vector(entries: &[(usize, f64)]) -> Vec<f64> {
        let used: f64 = entries.iter().map(|e| e.1).sum();
        let rest = (1.0 - used) / (16 - entries.len()) as f64;
        let mut v = vec![rest; 16];
        for &(c, p) in entries {
            v[c] = p;
        }
        v
    }

    fn seq(vectors: Vec<Vec<f64>>) -> DecodedSequence {
        DecodedSequence::new("v", 0, vectors, ClipSpec::default()).unwrap()
    }

    fn one_hot(c: usize) -> Vec<f64> {
        let mut v = vec![0.0; 16];
        v[c] = 1.0;
        v
    }

    fn spans(s: &DecodedSequence, runs: &[ClipRun]) -> Vec<(u16, f64, f64)> {
        runs.iter()
            .map(|r| {
                let seg = s.run_segment(r);
                (seg.class_id.index() as u16, seg.start_s, seg.end_s)
            })
            .collect()
    }

    #[test]
    fn decode_run_length() {
        let s = seq([7, 7, 7, 0, 0, 2, 2].iter().map(|&c| one_hot(c)).collect());
        let runs = decode_segments(&s);
        assert_eq!(spans(&s, &runs), vec![(7, 0.0, 3.0), (0, 3.0, 5.0), (2, 5.0, 7.0)]);
        assert_eq!(runs[0].score, 3.0);
    }

    #[test]
    fn decode_singleton() {
        let s = DecodedSequence::new("v", 12, vec![one_hot(4)], ClipSpec::default()).unwrap();
        assert_eq!(spans(&s, &decode_segments(&s)), vec![(4, 12.0, 13.0)]);
    }

    #[test]
    fn decode_alternation() {
        let s = seq([1, 2, 1, 2].iter().map(|&c| one_hot(c)).collect());
        assert_eq!(decode_segments(&s).len(), 4);
    }

    fn gap_example() -> DecodedSequence {
        let strong7 = vector(&[(7, 0.8), (0, 0.1)]);
        seq(vec![
            strong7.clone(),
            strong7.clone(),
            strong7.clone(),
            vector(&[(0, 0.55), (7, 0.40)]),
            strong7.clone(),
            strong7,
        ])
    }

    #[test]
    fn merge_across_supported_gap() {
        let s = gap_example();
        let params = PostParams::default();
        // Clause by clause: one gap clip (1 s <= 2 s), class 7 ranked second
        // there with 0.40 >= 0.30.
        assert_eq!(s.top2(3).ranks[1].0, ClassId::new(7));
        assert!(s.prob(3, ClassId::new(7)) >= params.p_merge);
        let merged = conditional_merge(&decode_segments(&s), &s, &params).unwrap();
        assert_eq!(merged.len(), 1);
        assert_eq!((merged[0].class_id, merged[0].first, merged[0].last), (ClassId::new(7), 0, 5));
        assert!((merged[0].score - (0.8 * 5.0 + 0.40)).abs() < 1e-12);
    }

    #[test]
    fn merge_blocked_by_low_gap_probability() {
        let strong7 = vector(&[(7, 0.8), (0, 0.1)]);
        let s = seq(vec![strong7.clone(), strong7.clone(), vector(&[(0, 0.7), (7, 0.2)]), strong7.clone(), strong7]);
        let merged = conditional_merge(&decode_segments(&s), &s, &PostParams::default()).unwrap();
        assert_eq!(merged.len(), 3);
    }

    #[test]
    fn merge_blocked_by_long_gap() {
        let strong7 = vector(&[(7, 0.8), (0, 0.1)]);
        let gap = vector(&[(0, 0.55), (7, 0.40)]);
        let s = seq(vec![strong7.clone(), strong7.clone(), gap.clone(), gap.clone(), gap, strong7.clone(), strong7]);
        let merged = conditional_merge(&decode_segments(&s), &s, &PostParams::default()).unwrap();
        assert_eq!(merged.iter().filter(|r| r.class_id == ClassId::new(7)).count(), 2);
    }

    #[test]
    fn merge_single_run_unchanged() {
        let s = seq(vec![one_hot(3); 4]);
        let runs = decode_segments(&s);
        assert_eq!(conditional_merge(&runs, &s, &PostParams::default()).unwrap(), runs);
    }

    #[test]
    fn noise_run_deleted() {
        let s = seq(vec![
            one_hot(0),
            one_hot(0),
            vector(&[(9, 0.34), (0, 0.30)]),
            one_hot(0),
            one_hot(0),
        ]);
        let params = PostParams { p_merge: 0.5, ..PostParams::default() };
        let merged = conditional_merge(&decode_segments(&s), &s, &params).unwrap();
        assert!(merged.iter().all(|r| r.class_id != ClassId::new(9)));
    }

    #[test]
    fn merge_rejects_out_of_range_run() {
        let s = seq(vec![one_hot(3); 2]);
        let bad = [ClipRun { class_id: ClassId::new(3), first: 1, last: 4, score: 1.0 }];
        assert!(matches!(
            conditional_merge(&bad, &s, &PostParams::default()),
            Err(Error::InconsistentInput(_))
        ));
    }

    #[test]
    fn decision_keeps_highest_trust() {
        let mut v = vec![one_hot(0); 12];
        for (pos, p) in [(2, 0.9), (3, 0.8), (4, 0.85), (10, 0.6), (11, 0.55)] {
            v[pos] = vector(&[(7, p), (0, (1.0 - p) / 2.0)]);
        }
        let s = seq(v);
        let runs = decode_segments(&s);
        let kept = conditional_decision(&runs, &s, &PostParams::default());
        let sevens: Vec<_> = runs.iter().filter(|r| r.class_id == ClassId::new(7)).collect();
        assert!((trust_score(sevens[0], &s) - 2.55).abs() < 1e-12);
        assert!((trust_score(sevens[1], &s) - 1.15).abs() < 1e-12);
        assert_eq!(kept.len(), 1);
        assert_eq!((kept[0].first, kept[0].last), (2, 4));
    }

    #[test]
    fn decision_passes_single_run() {
        let s = seq(vec![one_hot(0), one_hot(3), one_hot(3), one_hot(0)]);
        let kept = conditional_decision(&decode_segments(&s), &s, &PostParams::default());
        assert_eq!(spans(&s, &kept), vec![(3, 1.0, 3.0)]);
    }

    #[test]
    fn decision_tie_keeps_earlier() {
        let s = seq(vec![one_hot(5), one_hot(5), one_hot(0), one_hot(5), one_hot(5)]);
        let kept = conditional_decision(&decode_segments(&s), &s, &PostParams::default());
        assert_eq!((kept[0].first, kept[0].last), (0, 1));
    }

    #[test]
    fn restore_from_top2_run() {
        let mut v = vec![vector(&[(0, 0.9)]); 10];
        for (pos, p) in [(5, 0.30), (6, 0.35), (7, 0.30)] {
            v[pos] = vector(&[(0, 0.6), (9, p)]);
        }
        let s = seq(v);
        let params = PostParams {
            required_classes: vec![ClassId::new(9)],
            ..PostParams::default()
        };
        let loc = restore_missing(&[], &s, &params).unwrap();
        assert_eq!(loc.segments.len(), 1);
        let seg = &loc.segments[0];
        assert_eq!((seg.class_id, seg.start_s, seg.end_s), (ClassId::new(9), 5.0, 8.0));
        assert!((seg.score - 0.95).abs() < 1e-12);
        assert_eq!(loc.notices, vec![Notice::Restored { class_id: ClassId::new(9) }]);
    }

    #[test]
    fn restore_nothing_missing() {
        let s = seq(vec![one_hot(1), one_hot(2)]);
        let params = PostParams {
            required_classes: vec![ClassId::new(1), ClassId::new(2)],
            ..PostParams::default()
        };
        let selected = conditional_decision(&decode_segments(&s), &s, &params);
        let loc = restore_missing(&selected, &s, &params).unwrap();
        assert!(loc.notices.is_empty());
        assert_eq!(loc.segments.len(), 2);
    }

    #[test]
    fn weak_restore_at_global_max() {
        // Class 12 never reaches the top-2; its largest raw value is 0.08 at clip 40.
        let mut v = vec![vector(&[(0, 0.5), (1, 0.4)]); 50];
        v[40] = vector(&[(0, 0.5), (1, 0.4), (12, 0.08)]);
        let s = seq(v);
        let params = PostParams {
            required_classes: vec![ClassId::new(12)],
            ..PostParams::default()
        };
        let loc = restore_missing(&[], &s, &params).unwrap();
        let seg = &loc.segments[0];
        assert_eq!((seg.start_s, seg.end_s, seg.score), (40.0, 41.0, 0.08));
        assert_eq!(
            loc.notices,
            vec![Notice::WeakRestore { class_id: ClassId::new(12), clip_index: 40 }]
        );
    }

    #[test]
    fn noiseless_recovery_exact() {
        let order = [3usize, 7, 1, 15, 9, 4, 12, 2, 14, 6, 11, 8, 13, 5, 10];
        let mut v = Vec::new();
        let mut bounds = Vec::new();
        for (i, &c) in order.iter().enumerate() {
            v.extend(std::iter::repeat_n(one_hot(0), 2));
            let start = v.len() as f64;
            v.extend(std::iter::repeat_n(one_hot(c), 3 + i % 4));
            bounds.push((c as u16, start, v.len() as f64));
        }
        let s = seq(v);
        let loc = localize_video(&s, &PostParams::default()).unwrap();
        assert!(loc.notices.is_empty());
        let got: Vec<_> = loc.segments.iter().map(|g| (g.class_id.index() as u16, g.start_s, g.end_s)).collect();
        assert_eq!(got, bounds);
    }

    #[test]
    fn params_validation() {
        assert!(PostParams::default().validate(16).is_ok());
        let mut p = PostParams::default();
        p.required_classes.push(ClassId::new(0));
        assert!(p.validate(16).is_err());
        let p = PostParams { p_merge: 1.5, ..PostParams::default() };
        assert!(p.validate(16).is_err());
        let p = PostParams { gap_max_s: -1.0, ..PostParams::default() };
        assert!(p.validate(16).is_err());
        assert!(PostParams::default().validate(8).is_err());
        let none = PostParams::for_classes(16, None);
        assert_eq!(none.required_classes.len(), 16);
    }

    #[test]
    fn empty_sequence_rejected() {
        assert_eq!(
            DecodedSequence::new("v", 0, Vec::new(), ClipSpec::default()),
            Err(Error::EmptySequence)
        );
    }
}
