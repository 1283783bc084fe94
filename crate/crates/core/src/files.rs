//! JSON corner, pose and report files.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Button, CornerSet, Frame, Intrinsics, PoseHypothesis};
use crate::mask::is_canonical_convex;
use crate::search::SearchResult;

pub const CORNER_SCHEMA_VERSION: u32 = 1;
pub const POSE_SCHEMA_VERSION: u32 = 1;
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// JSON Schema of [`Report`].
pub const REPORT_SCHEMA: &str = include_str!("../schema/report.schema.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ButtonEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<u8>,
    /// Top-left, top-right, bottom-right, bottom-left.
    pub corners: [[f64; 2]; 4],
}

/// Corners of a panel in pixel coordinates, optionally with the camera's
/// intrinsics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CornerFile {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intrinsics: Option<Intrinsics>,
    pub buttons: Vec<ButtonEntry>,
}

impl CornerFile {
    /// Parses and validates: known version, at least one button, finite
    /// coordinates in canonical convex order, valid intrinsics.
    pub fn from_slice(bytes: &[u8]) -> Result<Self> {
        let file: Self = serde_json::from_slice(bytes)?;
        file.validate()?;
        Ok(file)
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        Self::from_slice(&std::fs::read(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != CORNER_SCHEMA_VERSION {
            return Err(Error::Format(format!(
                "unsupported corner file version {}",
                self.schema_version
            )));
        }
        if self.buttons.is_empty() {
            return Err(Error::EmptyCornerSet);
        }
        for (i, b) in self.buttons.iter().enumerate() {
            if b.corners.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::Format(format!("button {i} has a non-finite corner")));
            }
            if !is_canonical_convex(&b.corners) {
                return Err(Error::Format(format!(
                    "button {i} corners are not a convex quadrilateral in top-left, top-right, \
                     bottom-right, bottom-left order"
                )));
            }
        }
        if let Some(k) = &self.intrinsics {
            k.validate()?;
        }
        Ok(())
    }

    pub fn from_corner_set(corners: &CornerSet, intrinsics: Option<Intrinsics>) -> Result<Self> {
        if corners.frame() != Frame::PixelImage {
            return Err(Error::WrongFrame {
                expected: Frame::PixelImage,
                found: corners.frame(),
            });
        }
        Ok(Self {
            schema_version: CORNER_SCHEMA_VERSION,
            intrinsics,
            buttons: corners
                .quads()
                .into_iter()
                .zip(corners.labels())
                .map(|(corners, label)| ButtonEntry { label, corners })
                .collect(),
        })
    }

    pub fn corner_set(&self) -> Result<CornerSet> {
        CornerSet::new(
            Frame::PixelImage,
            self.buttons
                .iter()
                .map(|b| Button::from_pixels(b.label, b.corners))
                .collect(),
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseFile {
    pub schema_version: u32,
    /// `(θx, θy, θz)` in degrees.
    pub angles_deg: [f64; 3],
    pub translation: [f64; 3],
}

impl PoseFile {
    pub fn from_pose(pose: &PoseHypothesis) -> Self {
        Self {
            schema_version: POSE_SCHEMA_VERSION,
            angles_deg: pose.angles(),
            translation: [pose.t.x, pose.t.y, pose.t.z],
        }
    }

    pub fn pose(&self) -> PoseHypothesis {
        PoseHypothesis::new(self.angles_deg, self.translation.into())
    }

    pub fn from_slice(bytes: &[u8]) -> Result<Self> {
        let file: Self = serde_json::from_slice(bytes)?;
        if file.schema_version != POSE_SCHEMA_VERSION {
            return Err(Error::Format(format!(
                "unsupported pose file version {}",
                file.schema_version
            )));
        }
        if file.angles_deg.iter().chain(&file.translation).any(|v| !v.is_finite()) {
            return Err(Error::Format("pose has a non-finite value".into()));
        }
        Ok(file)
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        Self::from_slice(&std::fs::read(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawScores {
    pub kh_norm: f64,
    pub krv: f64,
    pub cos_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageCounts {
    pub coarse: usize,
    pub fine: usize,
}

/// Summary of one rectification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub schema_version: u32,
    pub angles_deg: [f64; 3],
    pub translation: [f64; 3],
    pub best_final_cr: f64,
    pub raw_scores: RawScores,
    /// Cosine residual of the detected corners.
    pub residual_before: f64,
    /// Cosine residual of the rectified corners.
    pub residual_after: f64,
    pub hypotheses_evaluated: usize,
    pub degenerate_hypotheses: usize,
    pub coarse_to_fine: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage_hypotheses: Option<StageCounts>,
    pub elapsed_seconds: f64,
    pub intrinsics: Intrinsics,
    pub rectified_corners: Vec<ButtonEntry>,
}

impl Report {
    pub fn new(
        result: &SearchResult,
        k: &Intrinsics,
        residual_before: f64,
        residual_after: f64,
        rectified: &CornerSet,
    ) -> Result<Self> {
        let s = &result.raw_scores_best;
        Ok(Self {
            schema_version: REPORT_SCHEMA_VERSION,
            angles_deg: result.best_pose.angles(),
            translation: [result.best_pose.t.x, result.best_pose.t.y, result.best_pose.t.z],
            best_final_cr: result.best_final_cr,
            raw_scores: RawScores {
                kh_norm: s.kh_norm,
                krv: s.krv,
                cos_norm: s.cos_norm,
            },
            residual_before,
            residual_after,
            hypotheses_evaluated: result.hypotheses_evaluated,
            degenerate_hypotheses: result.degenerate_hypotheses,
            coarse_to_fine: result.stage_hypotheses.is_some(),
            stage_hypotheses: result
                .stage_hypotheses
                .map(|(coarse, fine)| StageCounts { coarse, fine }),
            elapsed_seconds: result.elapsed,
            intrinsics: *k,
            rectified_corners: CornerFile::from_corner_set(rectified, None)?.buttons,
        })
    }

    /// The report with the wall time zeroed, for run-to-run comparison.
    pub fn without_timing(&self) -> Self {
        Self {
            elapsed_seconds: 0.0,
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_slice(bytes: &[u8]) -> Result<Self> {
        Ok(serde_json::from_slice(bytes)?)
    }
}
