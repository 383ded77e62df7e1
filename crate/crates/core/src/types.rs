//! Shared domain types: class and view identifiers, the clip timebase,
//! probability vectors, top-k ranking, and time segments.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_NUM_CLASSES: usize = 16;

/// Sums within this distance of 1 are treated as already normalized.
const NORMALIZED_SLACK: f64 = 1e-12;

/// Activity class index. The valid range depends on the configured class
/// count, so range checks happen where that count is known.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(transparent))]
pub struct ClassId(u16);

impl ClassId {
    pub const fn new(id: u16) -> Self {
        ClassId(id)
    }

    pub fn checked(id: usize, num_classes: usize) -> Result<Self> {
        if id < num_classes && id <= u16::MAX as usize {
            Ok(ClassId(id as u16))
        } else {
            Err(Error::InvalidClass { class: id, num_classes })
        }
    }

    pub const fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One of the three in-cabin cameras.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "lowercase"))]
pub enum ViewId {
    Dashboard,
    Rearview,
    Rightside,
}

impl ViewId {
    pub const ALL: [ViewId; 3] = [ViewId::Dashboard, ViewId::Rearview, ViewId::Rightside];

    /// Column of this view in a weight row.
    pub const fn index(self) -> usize {
        match self {
            ViewId::Dashboard => 0,
            ViewId::Rearview => 1,
            ViewId::Rightside => 2,
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            ViewId::Dashboard => "dashboard",
            ViewId::Rearview => "rearview",
            ViewId::Rightside => "rightside",
        }
    }
}

impl fmt::Display for ViewId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ViewId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ViewId::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownView(s.into()))
    }
}

/// Clip timebase: the recognizer sees `clip_len_frames`-frame windows taken
/// every `stride_frames` frames of a `fps` video.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(deny_unknown_fields, default))]
pub struct ClipSpec {
    pub fps: f64,
    pub clip_len_frames: u32,
    pub stride_frames: u32,
}

impl Default for ClipSpec {
    fn default() -> Self {
        ClipSpec { fps: 30.0, clip_len_frames: 64, stride_frames: 30 }
    }
}

impl ClipSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return Err(Error::InvalidClipSpec("fps must be positive"));
        }
        if self.clip_len_frames == 0 {
            return Err(Error::InvalidClipSpec("clip_len_frames must be positive"));
        }
        if self.stride_frames == 0 {
            return Err(Error::InvalidClipSpec("stride_frames must be positive"));
        }
        Ok(())
    }

    /// Seconds between consecutive clip starts.
    pub fn hop_s(&self) -> f64 {
        self.stride_frames as f64 / self.fps
    }

    pub fn clip_len_s(&self) -> f64 {
        self.clip_len_frames as f64 / self.fps
    }

    pub fn clip_start_s(&self, clip_index: u32) -> f64 {
        clip_index as f64 * self.stride_frames as f64 / self.fps
    }

    /// Number of whole clips that fit in a video of `duration_s` seconds.
    pub fn clips_in(&self, duration_s: f64) -> u32 {
        let frames = libm::floor(duration_s * self.fps + 1e-9);
        let len = self.clip_len_frames as f64;
        if frames < len {
            return 0;
        }
        (libm::floor((frames - len) / self.stride_frames as f64) as u32) + 1
    }
}

/// Start and end (seconds) of the video window covered by a clip.
pub fn clip_time_bounds(clip_index: u32, spec: &ClipSpec) -> (f64, f64) {
    let start = spec.clip_start_s(clip_index);
    (start, start + spec.clip_len_s())
}

/// One clip's class probabilities for one view of one video.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ProbFrame {
    pub video_id: String,
    pub view: ViewId,
    pub clip_index: u32,
    pub probs: Vec<f64>,
}

impl ProbFrame {
    /// Checks length and that every entry is finite and nonnegative.
    pub fn validate(&self, num_classes: usize) -> Result<()> {
        validate_vector(&self.probs, num_classes)
    }
}

pub(crate) fn validate_vector(probs: &[f64], num_classes: usize) -> Result<()> {
    if probs.len() != num_classes {
        return Err(Error::LengthMismatch { expected: num_classes, got: probs.len() });
    }
    match probs.iter().position(|p| !(p.is_finite() && *p >= 0.0)) {
        Some(index) => Err(Error::InvalidProbability { index }),
        None => Ok(()),
    }
}

/// Scales `probs` in place to sum to one. Vectors already within 1e-12 of
/// unit mass are left untouched, which keeps the operation idempotent.
pub fn normalize_vector(probs: &mut [f64]) -> Result<()> {
    if let Some(index) = probs.iter().position(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::InvalidProbability { index });
    }
    let sum: f64 = probs.iter().sum();
    if sum <= 0.0 {
        return Err(Error::AllZeroVector);
    }
    if libm::fabs(sum - 1.0) <= NORMALIZED_SLACK {
        return Ok(());
    }
    for p in probs.iter_mut() {
        *p /= sum;
    }
    Ok(())
}

pub fn normalize_probs(mut frame: ProbFrame) -> Result<ProbFrame> {
    normalize_vector(&mut frame.probs)?;
    Ok(frame)
}

/// Highest-probability classes in descending order.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct TopK {
    pub ranks: Vec<(ClassId, f64)>,
}

impl TopK {
    pub fn first(&self) -> Option<(ClassId, f64)> {
        self.ranks.first().copied()
    }

    pub fn contains(&self, class: ClassId) -> bool {
        self.ranks.iter().any(|(c, _)| *c == class)
    }

    pub fn prob_of(&self, class: ClassId) -> Option<f64> {
        self.ranks.iter().find(|(c, _)| *c == class).map(|(_, p)| *p)
    }
}

/// Orders class indices by descending probability; equal probabilities go
/// to the lower class id.
pub(crate) fn rank_order(probs: &[f64], a: usize, b: usize) -> Ordering {
    probs[b].partial_cmp(&probs[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b))
}

/// The `k` most probable classes. `k` larger than the vector is clamped.
pub fn topk(probs: &[f64], k: usize) -> TopK {
    let k = k.min(probs.len());
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| rank_order(probs, a, b));
    TopK {
        ranks: order
            .into_iter()
            .take(k)
            .map(|i| (ClassId::new(i as u16), probs[i]))
            .collect(),
    }
}

/// A class-labelled time interval `[start_s, end_s)`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Segment {
    pub class_id: ClassId,
    pub start_s: f64,
    pub end_s: f64,
    /// Cumulative class-probability mass over the clips the segment spans.
    pub score: f64,
}

impl Segment {
    pub fn new(class_id: ClassId, start_s: f64, end_s: f64, score: f64) -> Result<Self> {
        let seg = Segment { class_id, start_s, end_s, score };
        seg.validate()?;
        Ok(seg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start_s >= 0.0 && self.start_s < self.end_s && self.end_s.is_finite()) {
            return Err(Error::InconsistentInput(alloc::format!(
                "segment [{}, {}) is not a valid interval",
                self.start_s, self.end_s
            )));
        }
        if !(self.score >= 0.0) {
            return Err(Error::InconsistentInput("segment score is negative".into()));
        }
        Ok(())
    }

    pub fn duration_s(&self) -> f64 {
        self.end_s - self.start_s
    }
}
