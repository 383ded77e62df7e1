//! Seeded synthetic scenarios: an activity schedule per video and the
//! three-view probability streams a recognizer might emit for it.
//!
//! Every clip gets one base logit vector shared by all views (the true
//! class at 1, every class plus uniform noise). With probability
//! `eps_flip` the clip is confused: a class drawn from the confusion row of
//! the true class is lifted just above it, so it wins top-1 while the true
//! class drops to second. Each view then boosts the true class when that
//! view specializes in it.

pub mod oracle;

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::specialist_view;
use crate::localize::{DecodedSequence, PostParams};
use crate::metrics::GroundTruthActivity;
use crate::types::{normalize_vector, rank_order, ClassId, ClipSpec, ProbFrame, ViewId};

const SCHEDULE_STREAM: u64 = 0;
const EMISSION_STREAM: u64 = 1;
const RANDOM_SEQUENCE_STREAM: u64 = 2;
const RANDOM_PARAMS_STREAM: u64 = 3;

/// Groups of activities that look alike to a camera.
pub const CONFUSABLE_GROUPS: [&[u16]; 5] = [
    // phone calls and texting, either hand
    &[2, 3, 5, 6],
    // drinking, eating
    &[1, 4],
    // picking up from the floor, driver or passenger side
    &[9, 10],
    // talking to a passenger
    &[11, 12],
    // yawning, hand on head, singing
    &[13, 14, 15],
];

/// Uniform over the other members of each class's confusable group; classes
/// outside every group confuse uniformly with all other classes.
pub fn default_confusion(num_classes: usize) -> Vec<Vec<f64>> {
    (0..num_classes)
        .map(|c| {
            let group: Vec<usize> = CONFUSABLE_GROUPS
                .iter()
                .find(|g| g.contains(&(c as u16)))
                .map(|g| {
                    g.iter()
                        .map(|&k| k as usize)
                        .filter(|&k| k != c && k < num_classes)
                        .collect()
                })
                .unwrap_or_default();
            let targets: Vec<usize> = if group.is_empty() {
                (0..num_classes).filter(|&k| k != c).collect()
            } else {
                group
            };
            let mut row = vec![0.0; num_classes];
            for &k in &targets {
                row[k] = 1.0 / targets.len() as f64;
            }
            row
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(deny_unknown_fields, default))]
pub struct NoiseModel {
    /// Probability that a clip's top-1 is taken by a confusable class.
    pub eps_flip: f64,
    /// Row-stochastic confusion matrix; `None` uses [`default_confusion`].
    pub confusion: Option<Vec<Vec<f64>>>,
    /// Factor (>= 1) on the true class's probability in its specialist view.
    pub specialist_boost: f64,
    /// Softmax temperature; values near zero give one-hot vectors.
    pub temperature: f64,
    /// Amplitude of the uniform logit noise added to every class.
    pub logit_noise: f64,
    /// Largest logit lead of the confusing class over the true class.
    pub flip_margin: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            eps_flip: 0.2,
            confusion: None,
            specialist_boost: 1.5,
            temperature: 0.25,
            logit_noise: 0.5,
            flip_margin: 0.25,
        }
    }
}

impl NoiseModel {
    /// No confusion and temperature near zero: streams are one-hot.
    pub fn noiseless() -> Self {
        NoiseModel { eps_flip: 0.0, temperature: 1e-6, ..NoiseModel::default() }
    }

    pub fn validate(&self, num_classes: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InfeasibleConfig(msg));
        if !(0.0..=1.0).contains(&self.eps_flip) {
            return bad(format!("eps_flip = {} is outside [0, 1]", self.eps_flip));
        }
        if !(self.specialist_boost >= 1.0 && self.specialist_boost.is_finite()) {
            return bad(format!("specialist_boost = {} must be >= 1", self.specialist_boost));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return bad(format!("temperature = {} must be > 0", self.temperature));
        }
        if !(self.logit_noise >= 0.0 && self.flip_margin >= 0.0) {
            return bad("logit_noise and flip_margin must be >= 0".into());
        }
        if let Some(m) = &self.confusion {
            if m.len() != num_classes || m.iter().any(|r| r.len() != num_classes) {
                return bad(format!("confusion matrix must be {num_classes}x{num_classes}"));
            }
            for (c, row) in m.iter().enumerate() {
                let sum: f64 = row.iter().sum();
                if row.iter().any(|p| !(*p >= 0.0)) || libm::fabs(sum - 1.0) > 1e-9 {
                    return bad(format!("confusion row {c} is not a probability vector"));
                }
            }
        }
        Ok(())
    }

    fn confusion_matrix(&self, num_classes: usize) -> Vec<Vec<f64>> {
        self.confusion.clone().unwrap_or_else(|| default_confusion(num_classes))
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(deny_unknown_fields, default))]
pub struct ScenarioConfig {
    pub num_classes: usize,
    /// Class filling the gaps between activities. With `None` the
    /// activities tile the whole video with no gaps.
    pub background_class: Option<ClassId>,
    pub video_len_s: f64,
    pub min_duration_s: f64,
    pub max_duration_s: f64,
    pub min_gap_s: f64,
    pub max_gap_s: f64,
    /// Schedule boundaries are multiples of `1 / ticks_per_s` seconds.
    pub ticks_per_s: u32,
    pub clip_spec: ClipSpec,
    pub noise: NoiseModel,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            num_classes: crate::DEFAULT_NUM_CLASSES,
            background_class: Some(ClassId::new(0)),
            video_len_s: 480.0,
            min_duration_s: 5.0,
            max_duration_s: 20.0,
            min_gap_s: 2.0,
            max_gap_s: 10.0,
            ticks_per_s: 10,
            clip_spec: ClipSpec::default(),
            noise: NoiseModel::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn required_classes(&self) -> Vec<ClassId> {
        (0..self.num_classes as u16)
            .map(ClassId::new)
            .filter(|c| Some(*c) != self.background_class)
            .collect()
    }
}

/// A ground-truth schedule plus everything needed to emit its streams.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Scenario {
    pub seed: u64,
    pub video_id: String,
    /// Non-overlapping, sorted by start; each required class exactly once.
    pub schedule: Vec<GroundTruthActivity>,
    pub num_classes: usize,
    pub background_class: Option<ClassId>,
    pub clip_spec: ClipSpec,
    pub num_clips: u32,
    pub noise: NoiseModel,
}

/// Independent per-video seed derived from a corpus seed (splitmix64).
pub fn video_seed(corpus_seed: u64, index: u64) -> u64 {
    let mut z = corpus_seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn to_ticks(seconds: f64, ticks_per_s: u32) -> u64 {
    libm::round(seconds * ticks_per_s as f64) as u64
}

/// Spreads `extras` so they sum to at most `slack`, scaling down
/// proportionally when they overshoot.
fn fit_extras(extras: &mut [u64], slack: u64) {
    let total: u64 = extras.iter().sum();
    if total > slack {
        for e in extras.iter_mut() {
            *e = (*e as u128 * slack as u128 / total as u128) as u64;
        }
    }
}

pub fn generate_scenario(
    seed: u64,
    video_id: impl Into<String>,
    config: &ScenarioConfig,
) -> Result<Scenario> {
    config.clip_spec.validate()?;
    config.noise.validate(config.num_classes)?;
    if let Some(bg) = config.background_class {
        ClassId::checked(bg.index(), config.num_classes)?;
    }
    let infeasible = |msg: String| Err(Error::InfeasibleConfig(msg));
    if !(0.0 < config.min_duration_s && config.min_duration_s <= config.max_duration_s) {
        return infeasible("duration range must satisfy 0 < min <= max".into());
    }
    if !(0.0 <= config.min_gap_s && config.min_gap_s <= config.max_gap_s) {
        return infeasible("gap range must satisfy 0 <= min <= max".into());
    }
    if config.ticks_per_s == 0 {
        return infeasible("ticks_per_s must be positive".into());
    }

    let required = config.required_classes();
    let n = required.len() as u64;
    if n == 0 {
        return infeasible("no required classes to schedule".into());
    }
    let tps = config.ticks_per_s;
    let num_clips = config.clip_spec.clips_in(config.video_len_s);
    let horizon_s = num_clips as f64 * config.clip_spec.hop_s();
    let horizon = libm::floor(horizon_s * tps as f64 + 1e-9) as u64;
    let (dmin, dmax) = (to_ticks(config.min_duration_s, tps), to_ticks(config.max_duration_s, tps));
    let (gmin, gmax) = (to_ticks(config.min_gap_s, tps), to_ticks(config.max_gap_s, tps));
    let with_gaps = config.background_class.is_some();
    let min_total = if with_gaps { n * dmin + (n + 1) * gmin } else { n * dmin };
    if min_total > horizon {
        return infeasible(format!(
            "{n} activities need at least {:.1} s but clips cover {horizon_s:.1} s",
            min_total as f64 / tps as f64
        ));
    }
    let slack = horizon - min_total;

    let mut rng = rng_for(seed, SCHEDULE_STREAM);
    let mut order = required;
    order.shuffle(&mut rng);
    let durations: Vec<u64> = (0..n).map(|_| rng.gen_range(0..=dmax - dmin)).collect();
    // Leading gap plus one after every activity but the last; the tail is
    // whatever remains.
    let gaps: Vec<u64> = (0..n).map(|_| rng.gen_range(0..=gmax - gmin)).collect();

    let mut extras: Vec<u64> = durations.iter().copied().chain(gaps.iter().copied()).collect();
    if with_gaps {
        fit_extras(&mut extras, slack);
    } else {
        // No background: durations alone must fill the timeline.
        extras.truncate(n as usize);
        let total: u64 = extras.iter().sum();
        if total == 0 {
            extras[n as usize - 1] = slack;
        } else {
            for e in extras.iter_mut() {
                *e = (*e as u128 * slack as u128 / total as u128) as u64;
            }
            let used: u64 = extras.iter().sum();
            extras[n as usize - 1] += slack - used;
        }
    }

    let seconds = |ticks: u64| ticks as f64 / tps as f64;
    let video_id = video_id.into();
    let mut schedule = Vec::with_capacity(n as usize);
    let mut t = if with_gaps { gmin + extras[n as usize] } else { 0 };
    for (i, class) in order.into_iter().enumerate() {
        let end = t + dmin + extras[i];
        schedule.push(GroundTruthActivity {
            video_id: String::clone(&video_id),
            class_id: class,
            start_s: seconds(t),
            end_s: seconds(end),
        });
        t = end;
        if with_gaps && i + 1 < n as usize {
            t += gmin + extras[n as usize + i + 1];
        }
    }

    Ok(Scenario {
        seed,
        video_id,
        schedule,
        num_classes: config.num_classes,
        background_class: config.background_class,
        clip_spec: config.clip_spec,
        num_clips,
        noise: config.noise.clone(),
    })
}

impl Scenario {
    /// Class occupying most of the clip's cell `[start, start + hop)`; ties
    /// go to whichever piece starts earlier. Time outside every activity
    /// counts for the background class.
    pub fn clip_true_class(&self, clip_index: u32) -> ClassId {
        let hop = self.clip_spec.hop_s();
        let cell_start = self.clip_spec.clip_start_s(clip_index);
        let cell_end = cell_start + hop;

        // (class, first start inside the cell, covered seconds)
        let mut pieces: Vec<(ClassId, f64, f64)> = Vec::new();
        let mut add = |class: ClassId, start: f64, len: f64| {
            if len <= 0.0 {
                return;
            }
            match pieces.iter_mut().find(|p| p.0 == class) {
                Some(p) => p.2 += len,
                None => pieces.push((class, start, len)),
            }
        };
        let mut cursor = cell_start;
        for act in &self.schedule {
            let s = act.start_s.max(cell_start);
            let e = act.end_s.min(cell_end);
            if e <= s {
                continue;
            }
            if let Some(bg) = self.background_class {
                add(bg, cursor, s - cursor);
            }
            add(act.class_id, s, e - s);
            cursor = e;
        }
        if let Some(bg) = self.background_class {
            add(bg, cursor, cell_end - cursor);
        }

        let mut best: Option<(ClassId, f64, f64)> = None;
        for p in pieces {
            let replace = match best {
                None => true,
                Some(b) => p.2 > b.2 || (p.2 == b.2 && p.1 < b.1),
            };
            if replace {
                best = Some(p);
            }
        }
        match best {
            Some((class, _, _)) => class,
            // Unreachable for schedules built by `generate_scenario`.
            None => self.schedule.last().map_or(ClassId::new(0), |a| a.class_id),
        }
    }

    pub fn true_classes(&self) -> Vec<ClassId> {
        (0..self.num_clips).map(|i| self.clip_true_class(i)).collect()
    }
}

fn sample_row(row: &[f64], u: f64) -> Option<usize> {
    let mut acc = 0.0;
    let mut last_positive = None;
    for (k, &p) in row.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last_positive = Some(k);
            if u < acc {
                return Some(k);
            }
        }
    }
    last_positive
}

fn softmax(logits: &[f64], temperature: f64) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|l| libm::exp((l - max) / temperature)).collect();
    let sum: f64 = out.iter().sum();
    out.iter_mut().for_each(|p| *p /= sum);
    out
}

/// Three frames per clip (dashboard, rearview, rightside order), clips in
/// ascending order.
pub fn emit_streams(scenario: &Scenario) -> Vec<ProbFrame> {
    let n = scenario.num_classes;
    let noise = &scenario.noise;
    let confusion = noise.confusion_matrix(n);
    let mut rng = rng_for(scenario.seed, EMISSION_STREAM);
    let mut frames = Vec::with_capacity(scenario.num_clips as usize * 3);

    for clip in 0..scenario.num_clips {
        let truth = scenario.clip_true_class(clip);
        let t = truth.index();
        let mut logits: Vec<f64> = (0..n)
            .map(|c| if c == t { 1.0 } else { 0.0 } + noise.logit_noise * rng.gen::<f64>())
            .collect();
        // Always draw, so streams at different eps_flip share their noise.
        let flip_u: f64 = rng.gen();
        let pick_u: f64 = rng.gen();
        let margin_u: f64 = rng.gen();
        if flip_u < noise.eps_flip {
            if let Some(k) = sample_row(&confusion[t], pick_u).filter(|&k| k != t) {
                // Strictly above the true class, and above everything else.
                let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                logits[k] = top + noise.flip_margin * (1.0 - margin_u) + f64::EPSILON;
                logits[t] = top;
            }
        }
        let base = softmax(&logits, noise.temperature);
        let specialist = specialist_view(truth);
        for view in ViewId::ALL {
            let mut probs = base.clone();
            if specialist == Some(view) {
                probs[t] *= noise.specialist_boost;
            }
            // Softmax output is positive, so this cannot fail.
            let _ = normalize_vector(&mut probs);
            frames.push(ProbFrame {
                video_id: scenario.video_id.clone(),
                view,
                clip_index: clip,
                probs,
            });
        }
    }
    frames
}

/// Short random sequence for stage-equivalence checks: clip vectors are
/// integer weights normalized to one, so exact ties and zero entries occur
/// often. A few classes from a small palette alternate with some
/// persistence, each clip carrying a runner-up class of varying strength.
pub fn random_sequence(seed: u64, clips: usize, num_classes: usize) -> Result<DecodedSequence> {
    let mut rng = rng_for(seed, RANDOM_SEQUENCE_STREAM);
    let palette_len = rng.gen_range(2..=5usize).min(num_classes);
    let mut palette: Vec<usize> = (0..num_classes).collect();
    palette.shuffle(&mut rng);
    palette.truncate(palette_len);
    if rng.gen_bool(0.5) && !palette.contains(&0) {
        palette[0] = 0;
    }
    let mut current = palette[0];
    let mut vectors = Vec::with_capacity(clips);
    for _ in 0..clips {
        if rng.gen_bool(0.35) {
            current = *palette.choose(&mut rng).unwrap_or(&current);
        }
        let runner_up = *palette.choose(&mut rng).unwrap_or(&current);
        let mut weights: Vec<u32> = (0..num_classes).map(|_| rng.gen_range(0..=3)).collect();
        weights[current] += rng.gen_range(8..=24);
        weights[runner_up] += rng.gen_range(0..=20);
        let total: u32 = weights.iter().sum();
        vectors.push(weights.iter().map(|&w| w as f64 / total as f64).collect());
    }
    DecodedSequence::new(format!("rand-{seed}"), 0, vectors, ClipSpec::default())
}

/// Random but valid thresholds around the defaults, with and without a
/// background class.
pub fn random_params(seed: u64, num_classes: usize) -> PostParams {
    let mut rng = rng_for(seed, RANDOM_PARAMS_STREAM);
    let background = if rng.gen_bool(0.7) { Some(ClassId::new(0)) } else { None };
    PostParams {
        gap_max_s: [0.0, 1.0, 2.0, 3.0][rng.gen_range(0..4)],
        min_dur_s: [0.0, 1.0, 2.0, 3.0][rng.gen_range(0..4)],
        p_merge: [0.0, 0.1, 0.2, 0.3][rng.gen_range(0..4)],
        p_noise: [0.3, 0.5, 0.7][rng.gen_range(0..3)],
        ..PostParams::for_classes(num_classes, background)
    }
}

/// Position of `class` in the descending ranking of `probs` (0 = top-1).
pub fn rank_of(probs: &[f64], class: ClassId) -> usize {
    (0..probs.len())
        .filter(|&d| rank_order(probs, d, class.index()) == core::cmp::Ordering::Less)
        .count()
}
