//! From a class-label segmentation mask to ordered button corners: closing,
//! per-button Hough lines, four-edge selection, intersection and ordering.

pub mod hough;
pub mod morphology;
pub mod quad;
pub mod regions;

use std::path::Path;

use image::ColorType;
use rayon::prelude::*;

pub use hough::{hough_lines, hough_peaks, HoughLine, HoughParams};
pub use morphology::{close_mask, close_mask_with, MorphOrder};
pub use quad::{intersect, is_canonical_convex, order_corners, select_four_edges, EdgeQuad};
pub use regions::{extract_button_regions, extract_button_regions_with, BoundingBox, ButtonRegion};

use crate::error::{Error, Result};
use crate::geometry::{Button, CornerSet, Frame};
use crate::rectify::{png_color, RasterImage};

/// Row-major grid of class ids; 0 is background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMask {
    pub width: u32,
    pub height: u32,
    pub labels: Vec<u8>,
}

impl LabelMask {
    pub fn new(width: u32, height: u32, labels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!("empty {width}x{height} mask")));
        }
        if labels.len() != width as usize * height as usize {
            return Err(Error::InvalidImage(format!(
                "{} labels for a {width}x{height} mask",
                labels.len()
            )));
        }
        Ok(Self { width, height, labels })
    }

    pub fn empty(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            labels: vec![0; width as usize * height as usize],
        }
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.labels[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, label: u8) {
        self.labels[y as usize * self.width as usize + x as usize] = label;
    }

    /// Distinct nonzero labels, ascending.
    pub fn classes(&self) -> Vec<u8> {
        let mut present = [false; 256];
        self.labels.iter().for_each(|&l| present[l as usize] = true);
        (1..=255u8).filter(|&l| present[l as usize]).collect()
    }

    /// Largest label present, `K`.
    pub fn class_count(&self) -> u8 {
        self.labels.iter().copied().max().unwrap_or(0)
    }

    /// Decodes an 8-bit single-channel PNG whose pixel values are class ids.
    pub fn from_png_bytes(bytes: &[u8]) -> Result<Self> {
        let color = png_color(bytes)?;
        if color != ColorType::L8 {
            return Err(Error::InvalidImage(format!(
                "label mask must be 8-bit single-channel, got {color:?}"
            )));
        }
        let img = RasterImage::from_png_bytes(bytes)?;
        Self::new(img.width, img.height, img.data)
    }

    pub fn to_png_bytes(&self) -> Result<Vec<u8>> {
        self.to_raster().to_png_bytes()
    }

    pub fn read_png(path: &Path) -> Result<Self> {
        Self::from_png_bytes(&std::fs::read(path)?)
    }

    pub fn write_png(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_png_bytes()?)?)
    }

    pub fn to_raster(&self) -> RasterImage {
        RasterImage {
            width: self.width,
            height: self.height,
            channels: 1,
            data: self.labels.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectParams {
    /// Square structuring element half-size, pixels.
    pub closing_radius: usize,
    pub closing_order: MorphOrder,
    pub min_area: usize,
    pub hough: HoughParams,
    /// Minimum `ρ` gap between the two edges of one orientation class.
    pub min_edge_separation: f64,
    /// Refit the four Hough lines to the boundary pixels.
    pub refine: bool,
    /// Largest accepted relative difference between the quadrilateral's area
    /// and the region's pixel count.
    pub max_area_mismatch: f64,
    /// Peak ratio of a second Hough pass, tried when the first one cannot
    /// produce a quadrilateral. Short edges whose votes straddle two `ρ`
    /// bins can fall below half of a long edge's peak.
    pub fallback_peak_ratio: Option<f64>,
}

impl Default for DetectParams {
    fn default() -> Self {
        Self {
            closing_radius: 2,
            closing_order: MorphOrder::DilateErode,
            min_area: regions::DEFAULT_MIN_AREA,
            hough: HoughParams::default(),
            min_edge_separation: 5.0,
            refine: true,
            max_area_mismatch: 0.15,
            fallback_peak_ratio: Some(0.25),
        }
    }
}

/// Outcome for one button region.
#[derive(Debug)]
pub struct ButtonStatus {
    pub label: u8,
    pub bbox: BoundingBox,
    pub area: usize,
    pub result: Result<[[f64; 2]; 4]>,
}

#[derive(Debug)]
pub struct Detection {
    /// Buttons that succeeded, in reading order.
    pub corners: CornerSet,
    /// Every region, in reading order.
    pub statuses: Vec<ButtonStatus>,
}

impl Detection {
    pub fn failed(&self) -> usize {
        self.statuses.iter().filter(|s| s.result.is_err()).count()
    }

    pub fn is_complete(&self) -> bool {
        self.failed() == 0
    }
}

const REFINE_BAND: f64 = 2.5;
const REFINE_MARGIN: f64 = 3.0;
const REFINE_ROUNDS: usize = 2;

/// Corners of one region: boundary, Hough lines, four edges, refit,
/// intersections and ordering.
pub fn detect_region(region: &ButtonRegion, params: &DetectParams) -> Result<[[f64; 2]; 4]> {
    let boundary = region.boundary();
    let first = fit_quad(region, &boundary, &params.hough, params);
    match (first, params.fallback_peak_ratio) {
        (Err(e), Some(ratio)) if ratio < params.hough.peak_ratio => {
            let hough = HoughParams {
                peak_ratio: ratio,
                ..params.hough
            };
            fit_quad(region, &boundary, &hough, params).map_err(|_| e)
        }
        (first, _) => first,
    }
}

fn fit_quad(
    region: &ButtonRegion,
    boundary: &[[f64; 2]],
    hough: &HoughParams,
    params: &DetectParams,
) -> Result<[[f64; 2]; 4]> {
    let lines = hough_lines(boundary, hough)?;
    let centre = region.centroid();
    let mut edges = select_four_edges(&lines, centre, params.min_edge_separation)?;
    let mut corners = edges.corners()?;
    if params.refine {
        for _ in 0..REFINE_ROUNDS {
            // Each edge runs between two corners of the current estimate.
            let ends = [
                [corners[0], corners[1]],
                [corners[3], corners[2]],
                [corners[0], corners[3]],
                [corners[1], corners[2]],
            ];
            let current = [edges.top, edges.bottom, edges.left, edges.right];
            let mut refined = current;
            for i in 0..4 {
                if let Some(l) = quad::refine_line(&current[i], boundary, ends[i], centre, REFINE_BAND, REFINE_MARGIN) {
                    refined[i] = l;
                }
            }
            edges = EdgeQuad {
                top: refined[0],
                bottom: refined[1],
                left: refined[2],
                right: refined[3],
            };
            corners = edges.corners()?;
        }
    }
    let ordered = order_corners(corners)?;
    let area = quad::polygon_area(&ordered);
    let mismatch = (area - region.area() as f64).abs() / region.area() as f64;
    if !(mismatch <= params.max_area_mismatch) {
        return Err(Error::QuadAssembly(format!(
            "quadrilateral area {area:.0} does not match region area {} ({:.0}% off)",
            region.area(),
            mismatch * 100.0
        )));
    }
    Ok(ordered)
}

/// Runs the full pipeline over every button region. Fails only when no
/// region yields corners.
pub fn detect_corners(mask: &LabelMask, params: &DetectParams) -> Result<Detection> {
    let closed = close_mask_with(mask, params.closing_radius, params.closing_order);
    let regions = extract_button_regions_with(&closed, params.min_area)?;
    let statuses: Vec<ButtonStatus> = regions
        .par_iter()
        .map(|r| ButtonStatus {
            label: r.label,
            bbox: r.bbox,
            area: r.area(),
            result: detect_region(r, params),
        })
        .collect();
    let buttons: Vec<Button> = statuses
        .iter()
        .filter_map(|s| s.result.as_ref().ok().map(|q| Button::from_pixels(Some(s.label), *q)))
        .collect();
    if buttons.is_empty() {
        return Err(Error::AllButtonsFailed(statuses.len()));
    }
    Ok(Detection {
        corners: CornerSet::new(Frame::PixelImage, buttons)?,
        statuses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Rasterizes a convex quad by pixel-centre inclusion.
    fn fill_quad(m: &mut LabelMask, q: [[f64; 2]; 4], label: u8) {
        for y in 0..m.height {
            for x in 0..m.width {
                let p = [x as f64 + 0.5, y as f64 + 0.5];
                let inside = (0..4).all(|i| {
                    let (a, b) = (q[i], q[(i + 1) % 4]);
                    (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) >= 0.0
                });
                if inside {
                    m.set(x, y, label);
                }
            }
        }
    }

    fn max_err(got: &[[f64; 2]; 4], want: &[[f64; 2]; 4]) -> f64 {
        got.iter()
            .zip(want)
            .map(|(a, b)| (a[0] - b[0]).hypot(a[1] - b[1]))
            .fold(0.0, f64::max)
    }

    #[test]
    fn fronto_parallel_pair() {
        let truth = [
            [[280.0, 180.0], [360.0, 180.0], [360.0, 260.0], [280.0, 260.0]],
            [[280.0, 300.0], [360.0, 300.0], [360.0, 380.0], [280.0, 380.0]],
        ];
        let mut m = LabelMask::empty(640, 480);
        fill_quad(&mut m, truth[0], 1);
        fill_quad(&mut m, truth[1], 2);
        let d = detect_corners(&m, &DetectParams::default()).unwrap();
        assert!(d.is_complete());
        assert_eq!(d.corners.len(), 2);
        assert_eq!(d.corners.labels(), vec![Some(1), Some(2)]);
        for (got, want) in d.corners.quads().iter().zip(&truth) {
            assert!(max_err(got, want) <= 1.5, "{got:?}");
        }
    }

    #[test]
    fn skewed_quad() {
        let truth = [[212.3, 141.8], [318.9, 160.2], [305.4, 247.7], [199.1, 221.6]];
        let mut m = LabelMask::empty(400, 300);
        fill_quad(&mut m, truth, 1);
        let d = detect_corners(&m, &DetectParams::default()).unwrap();
        let got = d.corners.quads()[0];
        assert!(max_err(&got, &truth) <= 1.0, "{got:?}");
        assert!(is_canonical_convex(&got));
    }

    #[test]
    fn empty_mask_is_an_empty_panel() {
        let m = LabelMask::empty(64, 64);
        assert!(matches!(
            detect_corners(&m, &DetectParams::default()),
            Err(Error::EmptyPanel)
        ));
    }

    #[test]
    fn disk_is_rejected() {
        let mut m = LabelMask::empty(200, 200);
        for y in 0..200u32 {
            for x in 0..200u32 {
                if (x as f64 - 100.0).hypot(y as f64 - 100.0) < 40.0 {
                    m.set(x, y, 1);
                }
            }
        }
        assert!(matches!(
            detect_corners(&m, &DetectParams::default()),
            Err(Error::AllButtonsFailed(1))
        ));
    }

    #[test]
    fn partial_failure_keeps_good_buttons() {
        let mut m = LabelMask::empty(300, 300);
        fill_quad(&mut m, [[20.0, 20.0], [100.0, 20.0], [100.0, 100.0], [20.0, 100.0]], 1);
        // Triangle: only one near-horizontal edge.
        fill_quad(
            &mut m,
            [[150.0, 200.0], [200.0, 120.0], [250.0, 200.0], [150.0, 200.0]],
            2,
        );
        let d = detect_corners(&m, &DetectParams::default()).unwrap();
        assert_eq!(d.statuses.len(), 2);
        assert_eq!(d.failed(), 1);
        assert_eq!(d.corners.len(), 1);
    }

    #[test]
    fn mask_constructor_checks_size() {
        assert!(LabelMask::new(3, 2, vec![0; 5]).is_err());
        assert!(LabelMask::new(0, 2, vec![]).is_err());
        let m = LabelMask::new(3, 2, vec![0, 1, 3, 0, 0, 1]).unwrap();
        assert_eq!(m.classes(), vec![1, 3]);
        assert_eq!(m.class_count(), 3);
    }

    #[test]
    fn mask_png_round_trip() {
        let m = LabelMask::new(3, 2, vec![0, 1, 3, 0, 0, 1]).unwrap();
        let bytes = m.to_png_bytes().unwrap();
        assert_eq!(LabelMask::from_png_bytes(&bytes).unwrap(), m);
        let rgb = m.to_raster().to_rgb().to_png_bytes().unwrap();
        assert!(matches!(LabelMask::from_png_bytes(&rgb), Err(Error::InvalidImage(_))));
    }
}
