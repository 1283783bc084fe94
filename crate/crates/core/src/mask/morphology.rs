//! Per-class binary dilation and erosion with a square structuring element.

use super::LabelMask;

/// Order of the two primitive operations applied by [`close_mask_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MorphOrder {
    /// Dilation then erosion: standard closing, fills cracks and small holes.
    #[default]
    DilateErode,
    /// Erosion then dilation: an opening, kept for comparison.
    ErodeDilate,
}

/// Closing (dilation then erosion) of every nonzero class with a square of
/// side `2·radius + 1`.
pub fn close_mask(mask: &LabelMask, radius: usize) -> LabelMask {
    close_mask_with(mask, radius, MorphOrder::DilateErode)
}

/// Applies the two operations in `order` to each class separately and merges
/// the results. A pixel keeps its own class when that class still covers it;
/// a background pixel claimed by several classes goes to the smallest id.
pub fn close_mask_with(mask: &LabelMask, radius: usize, order: MorphOrder) -> LabelMask {
    if radius == 0 {
        return mask.clone();
    }
    let (w, h) = (mask.width as usize, mask.height as usize);
    let mut out = vec![0u8; w * h];
    for class in mask.classes() {
        let bits: Vec<bool> = mask.labels.iter().map(|&l| l == class).collect();
        let processed = match order {
            MorphOrder::DilateErode => erode(&dilate(&bits, w, h, radius), w, h, radius),
            MorphOrder::ErodeDilate => dilate(&erode(&bits, w, h, radius), w, h, radius),
        };
        for (i, keep) in processed.into_iter().enumerate() {
            if keep && (mask.labels[i] == class || (mask.labels[i] == 0 && out[i] == 0)) {
                out[i] = class;
            }
        }
    }
    LabelMask {
        width: mask.width,
        height: mask.height,
        labels: out,
    }
}

/// Pixels outside the image count as background.
pub fn dilate(bits: &[bool], w: usize, h: usize, radius: usize) -> Vec<bool> {
    sweep(bits, w, h, radius, false)
}

/// Pixels outside the image count as foreground, so shapes touching the
/// border are not eaten away.
pub fn erode(bits: &[bool], w: usize, h: usize, radius: usize) -> Vec<bool> {
    sweep(bits, w, h, radius, true)
}

/// Separable max (dilation) or min (erosion) filter over the square window.
fn sweep(bits: &[bool], w: usize, h: usize, r: usize, erode: bool) -> Vec<bool> {
    fn reduce(mut window: impl Iterator<Item = bool>, erode: bool) -> bool {
        if erode {
            window.all(|b| b)
        } else {
            window.any(|b| b)
        }
    }
    let mut rows = vec![false; w * h];
    for y in 0..h {
        let row = &bits[y * w..(y + 1) * w];
        for x in 0..w {
            let lo = x.saturating_sub(r);
            let hi = (x + r).min(w - 1);
            rows[y * w + x] = reduce(row[lo..=hi].iter().copied(), erode);
        }
    }
    let mut out = vec![false; w * h];
    for x in 0..w {
        for y in 0..h {
            let lo = y.saturating_sub(r);
            let hi = (y + r).min(h - 1);
            out[y * w + x] = reduce((lo..=hi).map(|yy| rows[yy * w + x]), erode);
        }
    }
    out
}
