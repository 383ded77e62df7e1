use alloc::string::String;

use crate::types::ViewId;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("class id {class} is outside [0, {num_classes})")]
    InvalidClass { class: usize, num_classes: usize },
    #[error("unknown view {0:?}; expected dashboard, rearview or rightside")]
    UnknownView(String),
    #[error("invalid clip spec: {0}")]
    InvalidClipSpec(&'static str),
    #[error("probability vector has {got} entries, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("probability entry {index} is negative or not finite")]
    InvalidProbability { index: usize },
    #[error("probability vector is all zeros")]
    AllZeroVector,
    #[error("invalid view weights: {0}")]
    InvalidWeights(String),
    #[error("duplicate frame for view {view} at clip {clip_index}")]
    DuplicateFrame { view: ViewId, clip_index: u32 },
    #[error("frames mix videos {expected:?} and {found:?}")]
    MixedVideo { expected: String, found: String },
    #[error("no frame from any view at clip {clip_index}")]
    ClipGap { clip_index: u32 },
    #[error("no frames to fuse")]
    EmptyStreams,
    #[error("invalid post-processing parameters: {0}")]
    InvalidParams(String),
    #[error("inconsistent input: {0}")]
    InconsistentInput(String),
    #[error("decoded sequence has no clips")]
    EmptySequence,
    #[error("label lists differ in length ({predicted} predicted, {truth} true)")]
    LabelLengthMismatch { predicted: usize, truth: usize },
    #[error("no labels to score")]
    EmptyInput,
    #[error("infeasible scenario config: {0}")]
    InfeasibleConfig(String),
    #[error("class {class} never appears in any clip's top-2")]
    NoCandidateRun { class: usize },
}
