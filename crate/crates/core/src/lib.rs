//! Perspective rectification of rectangular-button panel images.
//!
//! Button corners come either from a class-label segmentation mask
//! ([`mask::detect_corners`]) or from a corner file. The camera rotation is
//! recovered by an exhaustive grid search that scores each hypothesis by how
//! rectangle-like the moved corners are ([`search::search_pose`]), and the
//! image is then inverse-warped to a fronto-parallel view
//! ([`rectify::warp_image`]).

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod criteria;
pub mod error;
pub mod files;
pub mod geometry;
pub mod mask;
pub mod rectify;
pub mod search;
pub mod synth;

pub use error::{Error, Result};
pub use geometry::{CornerSet, Frame, Homography, Intrinsics, PoseHypothesis};
pub use search::{search_pose, SearchConfig, SearchResult};
