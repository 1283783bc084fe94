//! Connected button regions of a label mask and their boundary pixels.

use super::LabelMask;
use crate::error::{Error, Result};

/// Regions smaller than this many pixels are discarded.
pub const DEFAULT_MIN_AREA: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundingBox {
    pub min_x: u32,
    pub min_y: u32,
    pub max_x: u32,
    pub max_y: u32,
}

impl BoundingBox {
    pub fn width(&self) -> u32 {
        self.max_x - self.min_x + 1
    }

    pub fn height(&self) -> u32 {
        self.max_y - self.min_y + 1
    }
}

/// One 8-connected component of a single class.
#[derive(Debug, Clone, PartialEq)]
pub struct ButtonRegion {
    pub label: u8,
    pub pixels: Vec<(u32, u32)>,
    pub bbox: BoundingBox,
}

impl ButtonRegion {
    pub fn area(&self) -> usize {
        self.pixels.len()
    }

    /// Mean of the pixel centres.
    pub fn centroid(&self) -> [f64; 2] {
        let n = self.pixels.len() as f64;
        let (sx, sy) = self
            .pixels
            .iter()
            .fold((0.0, 0.0), |(sx, sy), &(x, y)| (sx + x as f64, sy + y as f64));
        [sx / n + 0.5, sy / n + 0.5]
    }

    /// Centres of region pixels with at least one 8-neighbour outside the
    /// region. Pixel `(x, y)` has its centre at `(x + 0.5, y + 0.5)`.
    pub fn boundary(&self) -> Vec<[f64; 2]> {
        let b = &self.bbox;
        // Local bitmap with a one-pixel frame of background.
        let w = b.width() as usize + 2;
        let h = b.height() as usize + 2;
        let mut inside = vec![false; w * h];
        let local = |x: u32, y: u32| (y - b.min_y + 1) as usize * w + (x - b.min_x + 1) as usize;
        for &(x, y) in &self.pixels {
            inside[local(x, y)] = true;
        }
        let mut out = Vec::new();
        for &(x, y) in &self.pixels {
            let i = local(x, y);
            let edge = [i - w - 1, i - w, i - w + 1, i - 1, i + 1, i + w - 1, i + w, i + w + 1]
                .iter()
                .any(|&j| !inside[j]);
            if edge {
                out.push([x as f64 + 0.5, y as f64 + 0.5]);
            }
        }
        out
    }
}

/// Regions of at least [`DEFAULT_MIN_AREA`] pixels in reading order.
pub fn extract_button_regions(mask: &LabelMask) -> Result<Vec<ButtonRegion>> {
    extract_button_regions_with(mask, DEFAULT_MIN_AREA)
}

/// 8-connected components of every nonzero class with at least `min_area`
/// pixels, in reading order.
///
/// Reading order groups regions into rows: sorted by the top of their
/// bounding box, a region joins the current row when its top lies above the
/// vertical centre of the row's first region. Rows go top to bottom and each
/// row left to right by bounding-box left edge. For upright layouts this is
/// the plain top-left ordering.
pub fn extract_button_regions_with(mask: &LabelMask, min_area: usize) -> Result<Vec<ButtonRegion>> {
    let (w, h) = (mask.width as usize, mask.height as usize);
    let mut seen = vec![false; w * h];
    let mut regions = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        let label = mask.labels[start];
        if label == 0 || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut pixels = Vec::new();
        let mut bbox = BoundingBox {
            min_x: u32::MAX,
            min_y: u32::MAX,
            max_x: 0,
            max_y: 0,
        };
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            pixels.push((x as u32, y as u32));
            bbox.min_x = bbox.min_x.min(x as u32);
            bbox.min_y = bbox.min_y.min(y as u32);
            bbox.max_x = bbox.max_x.max(x as u32);
            bbox.max_y = bbox.max_y.max(y as u32);
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let j = ny as usize * w + nx as usize;
                    if !seen[j] && mask.labels[j] == label {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        if pixels.len() >= min_area {
            pixels.sort_unstable_by_key(|&(x, y)| (y, x));
            regions.push(ButtonRegion { label, pixels, bbox });
        }
    }
    if regions.is_empty() {
        return Err(Error::EmptyPanel);
    }
    Ok(reading_order(regions))
}

fn reading_order(mut regions: Vec<ButtonRegion>) -> Vec<ButtonRegion> {
    regions.sort_by_key(|r| (r.bbox.min_y, r.bbox.min_x));
    let mut rows: Vec<Vec<ButtonRegion>> = Vec::new();
    for region in regions {
        let joins = rows.last().is_some_and(|row| {
            let lead = &row[0].bbox;
            (region.bbox.min_y as f64) < (lead.min_y as f64 + lead.max_y as f64) / 2.0
        });
        if joins {
            rows.last_mut().unwrap().push(region);
        } else {
            rows.push(vec![region]);
        }
    }
    rows.into_iter()
        .flat_map(|mut row| {
            row.sort_by_key(|r| (r.bbox.min_x, r.bbox.min_y));
            row
        })
        .collect()
}
