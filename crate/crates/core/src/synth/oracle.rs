//! Brute-force reference implementations of the localization stages.
//!
//! Each function re-evaluates a stage's rule directly from the fused
//! probabilities: ranks are recomputed by counting, runs by checking every
//! clip range, and choices by pairwise comparison of all candidates. Only
//! the sequence's raw probabilities and timebase are read; none of the
//! stage implementations are called. Quadratic or cubic cost is fine for
//! the short sequences these are meant for.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::localize::{ClipRun, DecodedSequence, Localization, Notice, PostParams};
use crate::types::{ClassId, Segment};

/// Class ranks first or second by probability (ties to the lower id) and
/// has nonzero probability.
pub fn oracle_in_top2(seq: &DecodedSequence, pos: usize, class: ClassId) -> bool {
    let probs = seq.probs(pos);
    let c = class.index();
    let ahead = (0..probs.len())
        .filter(|&d| probs[d] > probs[c] || (probs[d] == probs[c] && d < c))
        .count();
    ahead < 2 && probs[c] > 0.0
}

fn oracle_top1(seq: &DecodedSequence, pos: usize) -> ClassId {
    let probs = seq.probs(pos);
    let winner = (0..probs.len())
        .find(|&c| (0..probs.len()).all(|d| probs[c] > probs[d] || (probs[c] == probs[d] && c <= d)))
        .unwrap_or(0);
    ClassId::new(winner as u16)
}

fn span(seq: &DecodedSequence, first: usize, last: usize) -> (f64, f64) {
    let spec = seq.spec();
    let start = spec.clip_start_s(seq.first_clip() + first as u32);
    let end = spec.clip_start_s(seq.first_clip() + last as u32) + spec.hop_s();
    (start, end)
}

fn class_mass(seq: &DecodedSequence, class: ClassId, first: usize, last: usize) -> f64 {
    let mut acc = 0.0;
    for pos in first..=last {
        acc += seq.prob(pos, class);
    }
    acc
}

fn start_sorted(mut runs: Vec<ClipRun>) -> Vec<ClipRun> {
    runs.sort_by_key(|a| (a.first, a.last, a.class_id));
    runs
}

/// Every clip range `[i, j]` whose top-1 class is constant and which cannot
/// be extended on either side.
pub fn oracle_decode(seq: &DecodedSequence) -> Vec<ClipRun> {
    let n = seq.len();
    let mut runs = Vec::new();
    for i in 0..n {
        for j in i..n {
            let class = oracle_top1(seq, i);
            let constant = (i..=j).all(|p| oracle_top1(seq, p) == class);
            let left_closed = i == 0 || oracle_top1(seq, i - 1) != class;
            let right_closed = j + 1 == n || oracle_top1(seq, j + 1) != class;
            if constant && left_closed && right_closed {
                runs.push(ClipRun { class_id: class, first: i, last: j, score: class_mass(seq, class, i, j) });
            }
        }
    }
    start_sorted(runs)
}

fn merge_allowed(seq: &DecodedSequence, a: &ClipRun, b: &ClipRun, params: &PostParams) -> bool {
    let gap_clips = b.first - a.last - 1;
    let gap_s = gap_clips as f64 * seq.hop_s();
    let short_enough = gap_s <= params.gap_max_s + 1e-9;
    let supported = (a.last + 1..b.first)
        .all(|p| oracle_in_top2(seq, p, a.class_id) && seq.prob(p, a.class_id) >= params.p_merge);
    short_enough && supported
}

/// Repeatedly merges the leftmost mergeable pair of consecutive same-class
/// runs, restarting from scratch after every merge, then applies the noise
/// rule.
pub fn oracle_merge(runs: &[ClipRun], seq: &DecodedSequence, params: &PostParams) -> Result<Vec<ClipRun>> {
    if runs.iter().any(|r| r.first > r.last || r.last >= seq.len()) {
        return Err(Error::InconsistentInput("run outside sequence".into()));
    }
    let mut runs = start_sorted(runs.to_vec());
    loop {
        let mut pick: Option<(usize, usize)> = None;
        'outer: for a in 0..runs.len() {
            for b in 0..runs.len() {
                let (ra, rb) = (&runs[a], &runs[b]);
                if a == b || ra.class_id != rb.class_id || rb.first <= ra.last {
                    continue;
                }
                let nearer = runs.iter().enumerate().any(|(c, rc)| {
                    c != a && c != b && rc.class_id == ra.class_id && rc.first > ra.last && rc.first < rb.first
                });
                if !nearer && merge_allowed(seq, ra, rb, params) {
                    pick = Some((a, b));
                    break 'outer;
                }
            }
        }
        let Some((a, b)) = pick else { break };
        let (ra, rb) = (runs[a].clone(), runs[b].clone());
        let mut gap_mass = 0.0;
        for p in ra.last + 1..rb.first {
            gap_mass += seq.prob(p, ra.class_id);
        }
        let merged = ClipRun {
            class_id: ra.class_id,
            first: ra.first,
            last: rb.last,
            score: ra.score + (rb.score + gap_mass),
        };
        let mut next: Vec<ClipRun> = runs
            .iter()
            .enumerate()
            .filter(|(c, r)| *c != a && *c != b && !(r.first > ra.last && r.last < rb.first))
            .map(|(_, r)| r.clone())
            .collect();
        next.push(merged);
        runs = start_sorted(next);
    }

    let hop = seq.hop_s();
    Ok(runs
        .into_iter()
        .filter(|r| {
            let clips = (r.last - r.first + 1) as f64;
            let noise = clips * hop < params.min_dur_s && r.score / clips < params.p_noise;
            params.background_class == Some(r.class_id) || !noise
        })
        .collect())
}

/// Class probability summed over the clips where the class is in top-2.
pub fn oracle_trust(seq: &DecodedSequence, run: &ClipRun) -> f64 {
    let mut acc = 0.0;
    for p in run.first..=run.last {
        if oracle_in_top2(seq, p, run.class_id) {
            acc += seq.prob(p, run.class_id);
        }
    }
    acc
}

/// `a` beats `b`: larger evidence, then more clips, then earlier start.
fn beats(a: (f64, &ClipRun), b: (f64, &ClipRun)) -> bool {
    let (la, lb) = (a.1.last - a.1.first, b.1.last - b.1.first);
    a.0 > b.0 || (a.0 == b.0 && (la > lb || (la == lb && a.1.first < b.1.first)))
}

/// Keeps every non-background run that no other run of its class beats.
pub fn oracle_decision(runs: &[ClipRun], seq: &DecodedSequence, params: &PostParams) -> Vec<ClipRun> {
    let kept = runs
        .iter()
        .filter(|r| params.background_class != Some(r.class_id))
        .filter(|r| {
            runs.iter().all(|o| {
                core::ptr::eq(*r, o)
                    || o.class_id != r.class_id
                    || !beats((oracle_trust(seq, o), o), (oracle_trust(seq, r), r))
            })
        })
        .cloned()
        .collect();
    start_sorted(kept)
}

/// Best contiguous run of clips ranking `class` in top-2, found by scoring
/// every sub-range.
pub fn oracle_best_run(seq: &DecodedSequence, class: ClassId) -> Result<Segment> {
    best_range(seq, class)
        .map(|r| {
            let (start_s, end_s) = span(seq, r.first, r.last);
            Segment { class_id: class, start_s, end_s, score: r.score }
        })
        .ok_or(Error::NoCandidateRun { class: class.index() })
}

fn best_range(seq: &DecodedSequence, class: ClassId) -> Option<ClipRun> {
    let n = seq.len();
    let mut best: Option<ClipRun> = None;
    for i in 0..n {
        for j in i..n {
            if !(i..=j).all(|p| oracle_in_top2(seq, p, class)) {
                continue;
            }
            let cand = ClipRun { class_id: class, first: i, last: j, score: class_mass(seq, class, i, j) };
            let wins = match &best {
                None => true,
                Some(b) => beats((cand.score, &cand), (b.score, b)),
            };
            if wins {
                best = Some(cand);
            }
        }
    }
    best
}

pub fn oracle_restore(
    selected: &[ClipRun],
    seq: &DecodedSequence,
    params: &PostParams,
) -> Result<Localization> {
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    let mut segments: Vec<Segment> = selected
        .iter()
        .map(|r| {
            let (start_s, end_s) = span(seq, r.first, r.last);
            Segment { class_id: r.class_id, start_s, end_s, score: r.score }
        })
        .collect();
    let mut notices = Vec::new();
    for &class in &params.required_classes {
        if selected.iter().any(|r| r.class_id == class) {
            continue;
        }
        match oracle_best_run(seq, class) {
            Ok(seg) => {
                segments.push(seg);
                notices.push(Notice::Restored { class_id: class });
            }
            Err(_) => {
                let pos = (0..seq.len())
                    .find(|&p| (0..seq.len()).all(|q| seq.prob(p, class) >= seq.prob(q, class)))
                    .unwrap_or(0);
                let (start_s, end_s) = span(seq, pos, pos);
                segments.push(Segment { class_id: class, start_s, end_s, score: seq.prob(pos, class) });
                notices.push(Notice::WeakRestore { class_id: class, clip_index: seq.clip_index(pos) });
            }
        }
    }
    segments.sort_by(|a, b| {
        a.start_s
            .total_cmp(&b.start_s)
            .then(a.class_id.cmp(&b.class_id))
            .then(a.end_s.total_cmp(&b.end_s))
    });
    Ok(Localization { video_id: seq.video_id().into(), segments, notices })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Decode,
    Merge,
    Decision,
    Restore,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StageOutput {
    Runs(Vec<ClipRun>),
    Localization(Localization),
}

/// Runs the brute-force version of `stage` on `input` (ignored for
/// [`Stage::Decode`]).
pub fn oracle_stage_check(
    stage: Stage,
    seq: &DecodedSequence,
    input: &[ClipRun],
    params: &PostParams,
) -> Result<StageOutput> {
    Ok(match stage {
        Stage::Decode => StageOutput::Runs(oracle_decode(seq)),
        Stage::Merge => StageOutput::Runs(oracle_merge(input, seq, params)?),
        Stage::Decision => StageOutput::Runs(oracle_decision(input, seq, params)),
        Stage::Restore => StageOutput::Localization(oracle_restore(input, seq, params)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localize::{conditional_decision, conditional_merge, decode_segments, restore_missing};
    use crate::types::ClipSpec;
    use alloc::vec;

    fn vector(entries: &[(usize, f64)]) -> Vec<f64> {
        let used: f64 = entries.iter().map(|e| e.1).sum();
        let rest = (1.0 - used) / (16 - entries.len()) as f64;
        let mut v = vec![rest; 16];
        for &(c, p) in entries {
            v[c] = p;
        }
        v
    }

    fn seq(v: Vec<Vec<f64>>) -> DecodedSequence {
        DecodedSequence::new("v", 0, v, ClipSpec::default()).unwrap()
    }

    #[test]
    fn best_run_single_candidate() {
        let mut v = vec![vector(&[(0, 0.9)]); 6];
        v[2] = vector(&[(0, 0.5), (4, 0.3)]);
        v[3] = vector(&[(0, 0.5), (4, 0.3)]);
        let s = seq(v);
        let seg = oracle_best_run(&s, ClassId::new(4)).unwrap();
        assert_eq!((seg.start_s, seg.end_s), (2.0, 4.0));
    }

    #[test]
    fn best_run_prefers_larger_mass() {
        let mut v = vec![vector(&[(0, 0.9)]); 12];
        for (p, x) in [(1, 0.30), (2, 0.35), (3, 0.30), (8, 0.3), (9, 0.3)] {
            v[p] = vector(&[(0, 0.6), (9, x)]);
        }
        let s = seq(v);
        let seg = oracle_best_run(&s, ClassId::new(9)).unwrap();
        assert_eq!((seg.start_s, seg.end_s), (1.0, 4.0));
        assert!((seg.score - 0.95).abs() < 1e-12);
    }

    #[test]
    fn best_run_absent_class() {
        let s = seq(vec![vector(&[(0, 0.6), (1, 0.3)]); 4]);
        assert_eq!(
            oracle_best_run(&s, ClassId::new(12)),
            Err(Error::NoCandidateRun { class: 12 })
        );
    }

    #[test]
    fn merge_gap_example_matches_stage() {
        let strong7 = vector(&[(7, 0.8), (0, 0.1)]);
        let s = seq(vec![
            strong7.clone(),
            strong7.clone(),
            strong7.clone(),
            vector(&[(0, 0.55), (7, 0.40)]),
            strong7.clone(),
            strong7,
        ]);
        let params = PostParams::default();
        let decoded = decode_segments(&s);
        assert_eq!(oracle_decode(&s), decoded);
        let merged = conditional_merge(&decoded, &s, &params).unwrap();
        assert_eq!(
            oracle_stage_check(Stage::Merge, &s, &decoded, &params).unwrap(),
            StageOutput::Runs(merged)
        );
    }

    #[test]
    fn decision_identity_with_one_run_per_class() {
        let s = seq(vec![vector(&[(3, 0.9)]), vector(&[(5, 0.9)]), vector(&[(5, 0.9)])]);
        let runs = decode_segments(&s);
        let params = PostParams::default();
        assert_eq!(oracle_decision(&runs, &s, &params), runs);
        assert_eq!(conditional_decision(&runs, &s, &params), runs);
    }

    #[test]
    fn restore_matches_stage() {
        let mut v = vec![vector(&[(0, 0.7), (1, 0.2)]); 10];
        v[4] = vector(&[(0, 0.5), (6, 0.4)]);
        let s = seq(v);
        let params = PostParams::default();
        assert_eq!(
            oracle_restore(&[], &s, &params).unwrap(),
            restore_missing(&[], &s, &params).unwrap()
        );
    }
}
