//! Classification accuracy and temporal overlap scoring.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::localize::Localization;
use crate::types::{ClassId, Segment};

/// Percentage of positions where the two label lists agree.
pub fn accuracy(predicted: &[ClassId], truth: &[ClassId]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::LabelLengthMismatch { predicted: predicted.len(), truth: truth.len() });
    }
    if predicted.is_empty() {
        return Err(Error::EmptyInput);
    }
    let correct = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(100.0 * correct as f64 / predicted.len() as f64)
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct GroundTruthActivity {
    pub video_id: String,
    pub class_id: ClassId,
    pub start_s: f64,
    pub end_s: f64,
}

/// Intersection over union of two half-open intervals. Disjoint or merely
/// touching intervals score 0.
pub fn interval_os(a: (f64, f64), b: (f64, f64)) -> f64 {
    let inter = a.1.min(b.1) - a.0.max(b.0);
    if inter <= 0.0 {
        return 0.0;
    }
    let union = (a.1 - a.0) + (b.1 - b.0) - inter;
    (inter / union).min(1.0)
}

pub fn overlap_os(pred: &Segment, gt: &GroundTruthActivity) -> f64 {
    interval_os((pred.start_s, pred.end_s), (gt.start_s, gt.end_s))
}

/// Overlap score of one ground-truth activity after matching.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ActivityScore {
    pub video_id: String,
    pub class_id: ClassId,
    pub gt_start_s: f64,
    pub gt_end_s: f64,
    /// Matched prediction interval, if any.
    pub matched: Option<(f64, f64)>,
    pub os: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ClassScore {
    pub class_id: ClassId,
    pub gt_count: usize,
    pub matched_count: usize,
    pub mean_os: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ScoreSummary {
    pub mean_os: f64,
    pub gt_count: usize,
    pub matched_count: usize,
    pub unmatched_gt: usize,
    pub unmatched_pred: usize,
    pub per_class: Vec<ClassScore>,
}

#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ScoreReport {
    pub overall: ScoreSummary,
    pub per_video: Vec<(String, ScoreSummary)>,
    pub activities: Vec<ActivityScore>,
    pub warnings: Vec<String>,
}

impl ScoreReport {
    pub fn mean_os(&self) -> f64 {
        self.overall.mean_os
    }
}

#[derive(Default)]
struct Tally {
    os_sum: f64,
    gt_count: usize,
    matched: usize,
    unmatched_pred: usize,
    per_class: BTreeMap<ClassId, (usize, usize, f64)>,
}

impl Tally {
    fn add_group(&mut self, class: ClassId, scores: &[f64], matched: usize, preds: usize) {
        let sum: f64 = scores.iter().sum();
        self.os_sum += sum;
        self.gt_count += scores.len();
        self.matched += matched;
        self.unmatched_pred += preds - matched;
        let entry = self.per_class.entry(class).or_default();
        entry.0 += scores.len();
        entry.1 += matched;
        entry.2 += sum;
    }

    fn summary(&self) -> ScoreSummary {
        let mean = |sum: f64, n: usize| if n == 0 { 0.0 } else { sum / n as f64 };
        ScoreSummary {
            mean_os: mean(self.os_sum, self.gt_count),
            gt_count: self.gt_count,
            matched_count: self.matched,
            unmatched_gt: self.gt_count - self.matched,
            unmatched_pred: self.unmatched_pred,
            per_class: self
                .per_class
                .iter()
                .map(|(&class_id, &(gt_count, matched_count, sum))| ClassScore {
                    class_id,
                    gt_count,
                    matched_count,
                    mean_os: mean(sum, gt_count),
                })
                .collect(),
        }
    }
}

/// Greedy one-to-one matching inside a (video, class) group: pairs are
/// taken by descending overlap, ties by ground-truth then prediction
/// order. Only pairs that actually overlap are matched. Returns the matched
/// prediction index for each ground truth.
fn greedy_match(preds: &[&Segment], gts: &[&GroundTruthActivity]) -> Vec<Option<(usize, f64)>> {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (g, gt) in gts.iter().enumerate() {
        for (p, pred) in preds.iter().enumerate() {
            let os = overlap_os(pred, gt);
            if os > 0.0 {
                pairs.push((os, g, p));
            }
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut gt_match = alloc::vec![None; gts.len()];
    let mut pred_used = alloc::vec![false; preds.len()];
    for (os, g, p) in pairs {
        if gt_match[g].is_none() && !pred_used[p] {
            gt_match[g] = Some((p, os));
            pred_used[p] = true;
        }
    }
    gt_match
}

/// Scores localizations against ground truth. Each ground-truth activity is
/// matched to at most one same-class prediction of its video; unmatched
/// activities score 0 and `mean_os` averages over all ground truth.
pub fn match_and_score(preds: &[Localization], gts: &[GroundTruthActivity]) -> ScoreReport {
    type Groups<'a> = BTreeMap<(&'a str, ClassId), (Vec<&'a Segment>, Vec<&'a GroundTruthActivity>)>;
    let mut groups: Groups<'_> = BTreeMap::new();
    for loc in preds {
        for seg in &loc.segments {
            groups.entry((loc.video_id.as_str(), seg.class_id)).or_default().0.push(seg);
        }
    }
    for gt in gts {
        groups.entry((gt.video_id.as_str(), gt.class_id)).or_default().1.push(gt);
    }

    let mut overall = Tally::default();
    let mut videos: BTreeMap<&str, Tally> = BTreeMap::new();
    let mut activities = Vec::with_capacity(gts.len());
    for (&(video, class), (vpreds, vgts)) in &groups {
        let matches = greedy_match(vpreds, vgts);
        let scores: Vec<f64> = matches.iter().map(|m| m.map_or(0.0, |(_, os)| os)).collect();
        let matched = matches.iter().filter(|m| m.is_some()).count();
        overall.add_group(class, &scores, matched, vpreds.len());
        videos.entry(video).or_default().add_group(class, &scores, matched, vpreds.len());
        for (gt, m) in vgts.iter().zip(&matches) {
            activities.push(ActivityScore {
                video_id: gt.video_id.clone(),
                class_id: class,
                gt_start_s: gt.start_s,
                gt_end_s: gt.end_s,
                matched: m.map(|(p, _)| (vpreds[p].start_s, vpreds[p].end_s)),
                os: m.map_or(0.0, |(_, os)| os),
            });
        }
    }
    activities.sort_by(|a, b| {
        a.video_id
            .cmp(&b.video_id)
            .then(a.gt_start_s.total_cmp(&b.gt_start_s))
            .then(a.class_id.cmp(&b.class_id))
    });

    let mut warnings = Vec::new();
    if gts.is_empty() {
        warnings.push("no ground-truth activities; mean_os reported as 0".into());
    }
    ScoreReport {
        overall: overall.summary(),
        per_video: videos.into_iter().map(|(v, t)| (String::from(v), t.summary())).collect(),
        activities,
        warnings,
    }
}
