//! Multi-view score fusion and conditional post-processing for temporal
//! action localization.
//!
//! The pipeline turns per-clip, per-camera class-probability streams into
//! one segment per activity class:
//!
//! 1. [`fusion`] aligns the Dashboard / Rearview / Rightside streams of a
//!    video and combines them with a per-class view-weight matrix.
//! 2. [`localize`] decodes the fused sequence into top-1 runs, merges
//!    same-class runs across short gaps the top-2 evidence supports, removes
//!    short low-confidence noise, keeps the most trustworthy run per class,
//!    and restores required classes that top-1 decoding never produced.
//! 3. [`metrics`] scores localizations against ground truth with the
//!    intersection-over-union overlap score.
//!
//! [`synth`] generates seeded scenarios and probability streams, and holds
//! the brute-force oracles the test suites compare every stage against.
//!
//! The crate is `no_std` (with `alloc`); file formats and the CLI live in the
//! `condloc` crate.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

mod error;
pub mod fusion;
pub mod localize;
pub mod metrics;
pub mod synth;
mod types;

pub use error::{Error, Result};
pub use fusion::{
    align_streams, default_view_weights, fuse_views, AlignedStreams, FusedStream, FusionMode,
    ViewWeights,
};
pub use localize::{
    conditional_decision, conditional_merge, decode_segments, localize_video,
    localize_video_traced, restore_missing, ClipRun, DecodedSequence, Localization, Notice,
    PostParams, StageTrace,
};
pub use metrics::{accuracy, match_and_score, overlap_os, GroundTruthActivity, ScoreReport};
pub use types::{
    clip_time_bounds, normalize_probs, normalize_vector, topk, ClassId, ClipSpec, ProbFrame,
    Segment, TopK, ViewId, DEFAULT_NUM_CLASSES,
};
