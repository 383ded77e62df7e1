//! Multi-view ensemble.
//!
//! Each camera sees some activities better than others: the dashboard
//! camera faces the driver (drinking, eating, yawning), the rear camera
//! covers the whole cabin (left-hand phone calls, hand on head), and the
//! right-side camera sees hand movements near the console (texting, the
//! control panel, picking things up from the passenger floor). Fusion is a
//! per-class weighted average of the view probabilities, with weights
//! renormalized over the views actually present at each clip.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{normalize_vector, validate_vector, ClassId, ProbFrame, ViewId};

const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Rows further than this from unit sum are reported when normalized.
pub const ROW_WARN_TOLERANCE: f64 = 1e-6;

pub const DASHBOARD_SPECIALTIES: [u16; 3] = [1, 4, 13];
pub const REARVIEW_SPECIALTIES: [u16; 2] = [3, 14];
pub const RIGHTSIDE_SPECIALTIES: [u16; 4] = [5, 6, 8, 10];

/// Weight given to a class's specialist view in the default matrix; the two
/// other views split the remainder.
pub const SPECIALIST_WEIGHT: f64 = 0.5;

/// The view that sees `class` best, if one is singled out.
pub fn specialist_view(class: ClassId) -> Option<ViewId> {
    let id = class.index() as u16;
    if DASHBOARD_SPECIALTIES.contains(&id) {
        Some(ViewId::Dashboard)
    } else if REARVIEW_SPECIALTIES.contains(&id) {
        Some(ViewId::Rearview)
    } else if RIGHTSIDE_SPECIALTIES.contains(&id) {
        Some(ViewId::Rightside)
    } else {
        None
    }
}

/// Per-class fusion weights, one `[dashboard, rearview, rightside]` row per
/// class. Rows are nonnegative and sum to one.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ViewWeights {
    rows: Vec<[f64; 3]>,
}

impl ViewWeights {
    /// Accepts rows that already sum to one within 1e-9.
    pub fn new(rows: Vec<[f64; 3]>) -> Result<Self> {
        for (class, row) in rows.iter().enumerate() {
            check_row(class, row)?;
            let sum: f64 = row.iter().sum();
            if libm::fabs(sum - 1.0) > ROW_SUM_TOLERANCE {
                return Err(Error::InvalidWeights(format!(
                    "row {class} sums to {sum}, expected 1"
                )));
            }
        }
        if rows.is_empty() {
            return Err(Error::InvalidWeights("no rows".into()));
        }
        Ok(ViewWeights { rows })
    }

    /// Normalizes every row to unit sum. Also returns the classes whose
    /// rows were off by more than [`ROW_WARN_TOLERANCE`].
    pub fn normalized(rows: Vec<[f64; 3]>) -> Result<(Self, Vec<usize>)> {
        if rows.is_empty() {
            return Err(Error::InvalidWeights("no rows".into()));
        }
        let mut adjusted = Vec::new();
        let mut out = Vec::with_capacity(rows.len());
        for (class, row) in rows.into_iter().enumerate() {
            check_row(class, &row)?;
            let sum: f64 = row.iter().sum();
            if sum <= 0.0 {
                return Err(Error::InvalidWeights(format!("row {class} is all zeros")));
            }
            if libm::fabs(sum - 1.0) > ROW_WARN_TOLERANCE {
                adjusted.push(class);
            }
            out.push(row.map(|w| w / sum));
        }
        Ok((ViewWeights { rows: out }, adjusted))
    }

    pub fn uniform(num_classes: usize) -> Self {
        ViewWeights { rows: alloc::vec![[1.0 / 3.0; 3]; num_classes] }
    }

    pub fn num_classes(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, class: usize) -> [f64; 3] {
        self.rows[class]
    }

    pub fn rows(&self) -> &[[f64; 3]] {
        &self.rows
    }
}

fn check_row(class: usize, row: &[f64; 3]) -> Result<()> {
    if row.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::InvalidWeights(format!(
            "row {class} has a negative or non-finite weight"
        )));
    }
    Ok(())
}

/// Specialist view gets 0.5 and the others 0.25 for the classes listed in
/// the `*_SPECIALTIES` tables; every other class is weighted uniformly.
pub fn default_view_weights(num_classes: usize) -> ViewWeights {
    let rest = (1.0 - SPECIALIST_WEIGHT) / 2.0;
    let rows = (0..num_classes)
        .map(|c| match specialist_view(ClassId::new(c as u16)) {
            Some(view) => {
                let mut row = [rest; 3];
                row[view.index()] = SPECIALIST_WEIGHT;
                row
            }
            None => [1.0 / 3.0; 3],
        })
        .collect();
    ViewWeights { rows }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "kebab-case"))]
pub enum FusionMode {
    #[default]
    WeightedAverage,
    /// Per-class maximum over the present views, then renormalized.
    MaxConfidence,
}

/// Frames of one video grouped by clip, covering a contiguous clip range.
#[derive(Clone, Debug, PartialEq)]
pub struct AlignedStreams {
    pub video_id: String,
    pub first_clip: u32,
    /// `slots[i][view.index()]` holds the probabilities of clip `first_clip + i`.
    pub slots: Vec<[Option<Vec<f64>>; 3]>,
}

impl AlignedStreams {
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn views_at(&self, i: usize) -> usize {
        self.slots[i].iter().filter(|s| s.is_some()).count()
    }
}

/// Groups one video's frames by clip index. Clips where only some views
/// are present are kept; a clip with no view at all inside the covered
/// range is an error since nothing can be fused there.
pub fn align_streams<I>(frames: I) -> Result<AlignedStreams>
where
    I: IntoIterator<Item = ProbFrame>,
{
    let mut video_id: Option<String> = None;
    let mut num_classes: Option<usize> = None;
    let mut by_clip: BTreeMap<u32, [Option<Vec<f64>>; 3]> = BTreeMap::new();

    for frame in frames {
        match &video_id {
            None => video_id = Some(frame.video_id.clone()),
            Some(v) if *v != frame.video_id => {
                return Err(Error::MixedVideo { expected: v.clone(), found: frame.video_id });
            }
            Some(_) => {}
        }
        let n = *num_classes.get_or_insert(frame.probs.len());
        validate_vector(&frame.probs, n)?;
        let slot = &mut by_clip.entry(frame.clip_index).or_default()[frame.view.index()];
        if slot.is_some() {
            return Err(Error::DuplicateFrame { view: frame.view, clip_index: frame.clip_index });
        }
        *slot = Some(frame.probs);
    }

    let video_id = video_id.ok_or(Error::EmptyStreams)?;
    let first_clip = *by_clip.keys().next().ok_or(Error::EmptyStreams)?;
    let mut slots = Vec::with_capacity(by_clip.len());
    let mut expected = first_clip;
    for (clip, entry) in by_clip {
        if clip != expected {
            return Err(Error::ClipGap { clip_index: expected });
        }
        slots.push(entry);
        expected += 1;
    }
    Ok(AlignedStreams { video_id, first_clip, slots })
}

/// One fused probability vector per clip of a video.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct FusedStream {
    pub video_id: String,
    pub first_clip: u32,
    pub vectors: Vec<Vec<f64>>,
}

pub fn fuse_views(
    streams: &AlignedStreams,
    weights: &ViewWeights,
    mode: FusionMode,
) -> Result<FusedStream> {
    if streams.is_empty() {
        return Err(Error::EmptyStreams);
    }
    let mut vectors = Vec::with_capacity(streams.len());
    for (i, slot) in streams.slots.iter().enumerate() {
        let present: Vec<(usize, &[f64])> = slot
            .iter()
            .enumerate()
            .filter_map(|(v, p)| p.as_deref().map(|p| (v, p)))
            .collect();
        let Some(&(_, first)) = present.first() else {
            return Err(Error::ClipGap { clip_index: streams.first_clip + i as u32 });
        };
        let num_classes = first.len();
        if weights.num_classes() != num_classes {
            return Err(Error::LengthMismatch {
                expected: weights.num_classes(),
                got: num_classes,
            });
        }
        let mut fused: Vec<f64> = (0..num_classes)
            .map(|c| match mode {
                FusionMode::WeightedAverage => weighted_entry(&present, weights.row(c), c),
                FusionMode::MaxConfidence => {
                    present.iter().map(|(_, p)| p[c]).fold(0.0, f64::max)
                }
            })
            .collect();
        normalize_vector(&mut fused)?;
        vectors.push(fused);
    }
    Ok(FusedStream { video_id: streams.video_id.clone(), first_clip: streams.first_clip, vectors })
}

fn weighted_entry(present: &[(usize, &[f64])], row: [f64; 3], class: usize) -> f64 {
    let wsum: f64 = present.iter().map(|(v, _)| row[*v]).sum();
    if wsum > 0.0 {
        present.iter().map(|(v, p)| row[*v] * p[class]).sum::<f64>() / wsum
    } else {
        // Every present view has zero weight for this class: plain mean.
        present.iter().map(|(_, p)| p[class]).sum::<f64>() / present.len() as f64
    }
}
