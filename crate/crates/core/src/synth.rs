//! Standard fronto-parallel panels and known-pose distorted fixtures.

use std::f64::consts::TAU;
use std::path::Path;

use nalgebra::Vector3;

use crate::criteria::cosine_norm;
use crate::error::{Error, Result};
use crate::files::{CornerFile, PoseFile};
use crate::geometry::{
    pixels_to_spatial, pose_to_homography, Button, CornerSet, Frame, Homography, Intrinsics, PoseHypothesis,
};
use crate::mask::LabelMask;
use crate::rectify::{warp_with, Interpolation, RasterImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// Two stacked buttons (up above down).
    VerticalPair,
    SingleColumn(usize),
    Grid {
        rows: usize,
        cols: usize,
    },
}

impl Layout {
    pub fn dims(&self) -> (usize, usize) {
        match *self {
            Layout::VerticalPair => (2, 1),
            Layout::SingleColumn(n) => (n, 1),
            Layout::Grid { rows, cols } => (rows, cols),
        }
    }

    pub fn button_count(&self) -> usize {
        let (r, c) = self.dims();
        r * c
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PanelSpec {
    pub layout: Layout,
    /// Button width and height, pixels.
    pub button_size: (f64, f64),
    /// Gap between neighbouring buttons, pixels.
    pub spacing: f64,
    /// Top-left corner of the first button; `None` centres the panel.
    pub origin: Option<[f64; 2]>,
    pub canvas: (u32, u32),
}

impl Default for PanelSpec {
    fn default() -> Self {
        Self {
            layout: Layout::VerticalPair,
            button_size: (80.0, 80.0),
            spacing: 40.0,
            origin: None,
            canvas: (640, 480),
        }
    }
}

impl PanelSpec {
    pub fn with_layout(layout: Layout) -> Self {
        Self {
            layout,
            ..Self::default()
        }
    }

    /// Width and height of the button block.
    pub fn extent(&self) -> (f64, f64) {
        let (rows, cols) = self.layout.dims();
        let (bw, bh) = self.button_size;
        (
            cols as f64 * bw + (cols as f64 - 1.0) * self.spacing,
            rows as f64 * bh + (rows as f64 - 1.0) * self.spacing,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidPanel(m));
        let (rows, cols) = self.layout.dims();
        if rows == 0 || cols == 0 {
            return bad("layout has no buttons".into());
        }
        if rows * cols > 255 {
            return bad(format!("{} buttons exceed the 255 label ids", rows * cols));
        }
        let (bw, bh) = self.button_size;
        if !(bw > 0.0 && bh > 0.0 && bw.is_finite() && bh.is_finite()) {
            return bad(format!("button size {bw}x{bh} must be positive"));
        }
        if !(self.spacing.is_finite() && self.spacing >= 0.0) {
            return bad(format!("spacing {} must be non-negative", self.spacing));
        }
        if self.spacing == 0.0 && rows * cols > 1 {
            return bad("spacing 0 makes neighbouring buttons touch".into());
        }
        if self.canvas.0 == 0 || self.canvas.1 == 0 {
            return bad("empty canvas".into());
        }
        let (x0, y0) = self.top_left();
        let (w, h) = self.extent();
        if !(x0 >= 0.0 && y0 >= 0.0 && x0 + w <= self.canvas.0 as f64 && y0 + h <= self.canvas.1 as f64) {
            return bad(format!(
                "{w}x{h} panel at ({x0}, {y0}) does not fit the {}x{} canvas",
                self.canvas.0, self.canvas.1
            ));
        }
        Ok(())
    }

    fn top_left(&self) -> (f64, f64) {
        match self.origin {
            Some([x, y]) => (x, y),
            None => {
                let (w, h) = self.extent();
                ((self.canvas.0 as f64 - w) / 2.0, (self.canvas.1 as f64 - h) / 2.0)
            }
        }
    }

    /// Button rectangles in reading order.
    pub fn quads(&self) -> Vec<[[f64; 2]; 4]> {
        let (rows, cols) = self.layout.dims();
        let (bw, bh) = self.button_size;
        let (x0, y0) = self.top_left();
        let mut out = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let x = x0 + c as f64 * (bw + self.spacing);
                let y = y0 + r as f64 * (bh + self.spacing);
                out.push([[x, y], [x + bw, y], [x + bw, y + bh], [x, y + bh]]);
            }
        }
        out
    }
}

/// Standard panel: corners, label mask and a textured gray image.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePanel {
    pub corners: CornerSet,
    pub mask: LabelMask,
    pub image: RasterImage,
}

/// Smooth gray texture with no sharp edges, suitable for interpolation
/// round trips.
pub fn test_pattern(width: u32, height: u32) -> RasterImage {
    let mut data = Vec::with_capacity(width as usize * height as usize);
    for y in 0..height {
        for x in 0..width {
            let (fx, fy) = (x as f64 + 0.5, y as f64 + 0.5);
            let v = 128.0
                + 55.0 * (TAU * fx / 67.0).sin() * (TAU * fy / 53.0).cos()
                + 35.0 * (TAU * (fx + 2.0 * fy) / 151.0).sin();
            data.push(v.round().clamp(0.0, 255.0) as u8);
        }
    }
    RasterImage {
        width,
        height,
        channels: 1,
        data,
    }
}

/// Buttons cover the pixels whose centres lie inside their rectangles.
pub fn generate_reference(spec: &PanelSpec) -> Result<ReferencePanel> {
    spec.validate()?;
    let quads = spec.quads();
    let (w, h) = spec.canvas;
    let mut mask = LabelMask::empty(w, h);
    let mut image = test_pattern(w, h);
    let mut buttons = Vec::with_capacity(quads.len());
    for (i, q) in quads.iter().enumerate() {
        let label = (i + 1) as u8;
        let [x0, y0] = q[0];
        let [x1, y1] = q[2];
        let cols = (x0 - 0.5).ceil().max(0.0) as u32..((x1 - 0.5).ceil().max(0.0) as u32).min(w);
        let rows = (y0 - 0.5).ceil().max(0.0) as u32..((y1 - 0.5).ceil().max(0.0) as u32).min(h);
        for y in rows {
            for x in cols.clone() {
                mask.set(x, y, label);
                let shade = image.get(x, y, 0) / 4 + 170;
                image.set(x, y, 0, shade);
            }
        }
        buttons.push(Button::from_pixels(Some(label), *q));
    }
    Ok(ReferencePanel {
        corners: CornerSet::new(Frame::PixelImage, buttons)?,
        mask,
        image,
    })
}

/// The pose with the given angles that leaves the first reference corner in
/// place. Distorting by it and searching recovers the same translation.
pub fn anchored_pose(angles_deg: [f64; 3], reference: &CornerSet, k: &Intrinsics) -> PoseHypothesis {
    let a = reference.first_corner();
    PoseHypothesis::anchored(angles_deg, [a.x, a.y], [a.x, a.y], k)
}

/// A reference panel seen from the camera pose whose rectification is `pose`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortedPanel {
    pub corners: CornerSet,
    pub mask: LabelMask,
    pub image: RasterImage,
    /// Maps distorted pixels to reference pixels.
    pub homography: Homography,
}

/// Maps every corner through `H⁻¹`, where `H` rectifies with `pose`.
pub fn distort_corners(corners: &CornerSet, pose: &PoseHypothesis, k: &Intrinsics) -> Result<CornerSet> {
    let h = pose_to_homography(pose, k)?;
    let inv = h.inverse()?;
    let r = pose.rotation_matrix();
    let k_inv = k.inverse_matrix();
    let mut buttons = Vec::with_capacity(corners.len());
    for (b, button) in corners.buttons().iter().enumerate() {
        let mut quad = [[0.0; 2]; 4];
        for (c, p) in button.corners.iter().enumerate() {
            let behind = Error::DegenerateDepth {
                button: b,
                corner: c,
                depth: 0.0,
            };
            let q = inv.apply([p.x, p.y]).ok_or(behind)?;
            // The distorted point must sit in front of the camera once moved.
            let d = k_inv * Vector3::new(q[0], q[1], 1.0);
            let depth = (r * d + pose.t).z;
            if !(depth > 0.0) || !q[0].is_finite() || !q[1].is_finite() {
                return Err(Error::DegenerateDepth {
                    button: b,
                    corner: c,
                    depth,
                });
            }
            quad[c] = q;
        }
        buttons.push(Button::from_pixels(button.label, quad));
    }
    CornerSet::new(Frame::PixelImage, buttons)
}

/// Forward model: corners map exactly by `H⁻¹`; the image is resampled
/// bilinearly and the mask by nearest neighbour. Fails when a corner leaves
/// the canvas.
pub fn distort(panel: &ReferencePanel, pose: &PoseHypothesis, k: &Intrinsics) -> Result<DistortedPanel> {
    let h = pose_to_homography(pose, k)?;
    let corners = distort_corners(&panel.corners, pose, k)?;
    let (w, hgt) = (panel.image.width, panel.image.height);
    for [x, y] in corners.xy() {
        if !(x >= 0.0 && y >= 0.0 && x <= w as f64 && y <= hgt as f64) {
            return Err(Error::OutOfFrame {
                x,
                y,
                width: w,
                height: hgt,
            });
        }
    }
    let image = warp_with(&panel.image, &h, (w, hgt), Interpolation::Bilinear);
    let warped_mask = warp_with(&panel.mask.to_raster(), &h, (w, hgt), Interpolation::Nearest);
    Ok(DistortedPanel {
        corners,
        mask: LabelMask::new(w, hgt, warped_mask.data)?,
        image,
        homography: h,
    })
}

/// Cosine residual of pixel corners after back-projection with `k`; smaller
/// is more rectangular.
pub fn evaluate(corners: &CornerSet, k: &Intrinsics) -> Result<f64> {
    cosine_norm(&pixels_to_spatial(corners, k)?)
}

/// Standard panel with the same button count and labels as `detected`: the
/// default vertical pair for two buttons, otherwise a single column sized to
/// fit the canvas.
pub fn matched_reference(detected: &CornerSet, canvas: (u32, u32)) -> Result<CornerSet> {
    let b = detected.len();
    let spec = if b == 2 {
        PanelSpec {
            canvas,
            ..PanelSpec::default()
        }
    } else {
        let size = (0.8 * canvas.1 as f64 / (1.5 * b as f64 - 0.5)).floor().min(80.0);
        PanelSpec {
            layout: Layout::SingleColumn(b),
            button_size: (size, size),
            spacing: (size / 2.0).floor().max(1.0),
            origin: None,
            canvas,
        }
    };
    spec.validate()?;
    let buttons = spec
        .quads()
        .into_iter()
        .zip(detected.labels())
        .map(|(q, label)| Button::from_pixels(label, q))
        .collect();
    CornerSet::new(Frame::PixelImage, buttons)
}

/// Writes `image.png`, `mask.png`, `corners.json` and `pose.json` into `dir`.
pub fn write_bundle(dir: &Path, panel: &DistortedPanel, pose: &PoseHypothesis, k: &Intrinsics) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    panel.image.write_png(&dir.join("image.png"))?;
    panel.mask.write_png(&dir.join("mask.png"))?;
    let corners = CornerFile::from_corner_set(&panel.corners, Some(*k))?;
    std::fs::write(dir.join("corners.json"), corners.to_json()?)?;
    std::fs::write(dir.join("pose.json"), PoseFile::from_pose(pose).to_json()?)?;
    Ok(())
}
