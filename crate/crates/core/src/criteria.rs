//! Slope and angle criteria that score how close a set of transformed button
//! corners is to a fronto-parallel grid of rectangles, and the min-max
//! normalized sum used to rank pose hypotheses.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::geometry::{CornerSet, Frame};

/// Magnitude every slope is clamped to; a vertical edge has this slope.
pub const SLOPE_SENTINEL: f64 = 1e12;

/// Edge run (`Δx`) at or below which a slope is treated as infinite.
pub const VERTICAL_EPSILON: f64 = 1e-12;

/// Edge length at or below which a button is degenerate.
pub const EDGE_EPSILON: f64 = 1e-12;

/// Population spread below which a criterion carries no ranking information.
pub const FLAT_EPSILON: f64 = 1e-15;

/// Raw criteria of one hypothesis and, once the population is known, their
/// normalized values and the Final CR.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CriterionScores {
    /// `‖K_H‖₂`.
    pub kh_norm: f64,
    /// `1 / ‖K_V‖₂`.
    pub krv: f64,
    /// `‖Cos‖₂`.
    pub cos_norm: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub normalized: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub final_cr: Option<f64>,
}

impl CriterionScores {
    pub fn raw(kh_norm: f64, krv: f64, cos_norm: f64) -> Self {
        Self {
            kh_norm,
            krv,
            cos_norm,
            normalized: None,
            final_cr: None,
        }
    }

    pub fn triple(&self) -> [f64; 3] {
        [self.kh_norm, self.krv, self.cos_norm]
    }
}

#[inline]
pub(crate) fn slope(dy: f64, dx: f64) -> f64 {
    if dx.abs() <= VERTICAL_EPSILON {
        SLOPE_SENTINEL
    } else {
        (dy / dx).clamp(-SLOPE_SENTINEL, SLOPE_SENTINEL)
    }
}

#[inline]
fn kh_sum_sq(quads: &[[Vector3<f64>; 4]]) -> f64 {
    quads
        .iter()
        .map(|c| slope(c[1].y - c[0].y, c[1].x - c[0].x).powi(2))
        .sum()
}

#[inline]
fn krv_from_quads(quads: &[[Vector3<f64>; 4]]) -> f64 {
    let sum: f64 = quads
        .iter()
        .map(|c| slope(c[3].y - c[0].y, c[3].x - c[0].x).powi(2))
        .sum();
    if sum == 0.0 {
        SLOPE_SENTINEL
    } else {
        1.0 / sum.sqrt()
    }
}

/// Per-button `cos` of the angle between the horizontal and vertical edge;
/// `Err(button)` for a zero-length edge.
#[inline]
fn cos_sum_sq(quads: &[[Vector3<f64>; 4]]) -> std::result::Result<f64, usize> {
    let mut sum = 0.0;
    for (i, c) in quads.iter().enumerate() {
        let h = c[1] - c[0];
        let v = c[3] - c[0];
        let (hn, vn) = (h.norm(), v.norm());
        if hn <= EDGE_EPSILON || vn <= EDGE_EPSILON {
            return Err(i);
        }
        let cos = h.dot(&v) / (hn * vn);
        sum += cos * cos;
    }
    Ok(sum)
}

/// Raw `(‖K_H‖₂, K_rV, ‖Cos‖₂)` of a slice of spatial quads.
#[inline]
pub(crate) fn raw_triple(quads: &[[Vector3<f64>; 4]]) -> std::result::Result<[f64; 3], usize> {
    let cos = cos_sum_sq(quads)?.sqrt();
    Ok([kh_sum_sq(quads).sqrt(), krv_from_quads(quads), cos])
}

fn spatial_quads(spatial: &CornerSet) -> Result<Vec<[Vector3<f64>; 4]>> {
    if spatial.frame() != Frame::Spatial {
        return Err(Error::WrongFrame {
            expected: Frame::Spatial,
            found: spatial.frame(),
        });
    }
    Ok(spatial.buttons().iter().map(|b| b.corners).collect())
}

/// `sqrt(Σ k_h²)` with `k_h = (y₂ − y₁)/(x₂ − x₁)` per button.
pub fn horizontal_slope_norm(spatial: &CornerSet) -> Result<f64> {
    Ok(kh_sum_sq(&spatial_quads(spatial)?).sqrt())
}

/// `1 / sqrt(Σ k_v²)` with `k_v = (y₄ − y₁)/(x₄ − x₁)` per button. Returns
/// the sentinel when every vertical edge is level.
pub fn vertical_slope_reciprocal(spatial: &CornerSet) -> Result<f64> {
    Ok(krv_from_quads(&spatial_quads(spatial)?))
}

/// `sqrt(Σ cos_i²)` over the full 3-vector edges `c₂ − c₁` and `c₄ − c₁`.
pub fn cosine_norm(spatial: &CornerSet) -> Result<f64> {
    cos_sum_sq(&spatial_quads(spatial)?)
        .map(f64::sqrt)
        .map_err(|button| Error::DegenerateButton { button })
}

pub fn raw_scores(spatial: &CornerSet) -> Result<CriterionScores> {
    let [kh, krv, cos] = raw_triple(&spatial_quads(spatial)?).map_err(|button| Error::DegenerateButton { button })?;
    Ok(CriterionScores::raw(kh, krv, cos))
}

#[inline]
fn rescale(v: f64, min: f64, max: f64) -> f64 {
    let span = max - min;
    if span.abs() <= FLAT_EPSILON {
        0.0
    } else {
        (v - min) / span
    }
}

/// `(v − min)/(max − min)` over the whole list; a flat list maps to zeros.
pub fn min_max_normalize(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(values.iter().map(|&v| rescale(v, min, max)).collect())
}

pub fn final_cr(normalized: [f64; 3]) -> f64 {
    normalized[0] + normalized[1] + normalized[2]
}

/// Per-criterion population bounds, accumulated one triple at a time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationBounds {
    pub min: [f64; 3],
    pub max: [f64; 3],
    pub count: usize,
}

impl Default for PopulationBounds {
    fn default() -> Self {
        Self {
            min: [f64::INFINITY; 3],
            max: [f64::NEG_INFINITY; 3],
            count: 0,
        }
    }
}

impl PopulationBounds {
    #[inline]
    pub fn push(&mut self, raw: [f64; 3]) {
        for i in 0..3 {
            self.min[i] = self.min[i].min(raw[i]);
            self.max[i] = self.max[i].max(raw[i]);
        }
        self.count += 1;
    }

    pub fn merge(mut self, other: Self) -> Self {
        for i in 0..3 {
            self.min[i] = self.min[i].min(other.min[i]);
            self.max[i] = self.max[i].max(other.max[i]);
        }
        self.count += other.count;
        self
    }

    #[inline]
    pub fn normalize(&self, raw: [f64; 3]) -> [f64; 3] {
        [0, 1, 2].map(|i| rescale(raw[i], self.min[i], self.max[i]))
    }

    /// Fills in the normalized triple and the Final CR.
    pub fn score(&self, raw: [f64; 3]) -> CriterionScores {
        let n = self.normalize(raw);
        CriterionScores {
            kh_norm: raw[0],
            krv: raw[1],
            cos_norm: raw[2],
            normalized: Some(n),
            final_cr: Some(final_cr(n)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Button;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn spatial(quads: Vec<[[f64; 3]; 4]>) -> CornerSet {
        CornerSet::new(
            Frame::Spatial,
            quads
                .into_iter()
                .map(|q| Button {
                    label: None,
                    corners: q.map(|p| Vector3::new(p[0], p[1], p[2])),
                })
                .collect(),
        )
        .unwrap()
    }

    /// Button whose edges 1→2 and 1→4 are the given 2-D vectors.
    fn edges(h: [f64; 2], v: [f64; 2]) -> [[f64; 3]; 4] {
        [
            [0.0, 0.0, 1.0],
            [h[0], h[1], 1.0],
            [h[0] + v[0], h[1] + v[1], 1.0],
            [v[0], v[1], 1.0],
        ]
    }

    #[test]
    fn horizontal_slope_examples() {
        let level = spatial(vec![edges([2.0, 0.0], [0.0, 1.0])]);
        assert_eq!(horizontal_slope_norm(&level).unwrap(), 0.0);
        let half = spatial(vec![edges([4.0, 2.0], [0.0, 1.0])]);
        assert_eq!(horizontal_slope_norm(&half).unwrap(), 0.5);
        let pair = spatial(vec![edges([1.0, 0.3], [0.0, 1.0]), edges([1.0, 0.4], [0.0, 1.0])]);
        assert_abs_diff_eq!(horizontal_slope_norm(&pair).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn vertical_slope_examples() {
        let upright = spatial(vec![edges([1.0, 0.0], [0.0, -2.0])]);
        assert!(vertical_slope_reciprocal(&upright).unwrap() <= 1e-12);
        let diagonal = spatial(vec![edges([1.0, 0.0], [1.0, -1.0])]);
        assert_eq!(vertical_slope_reciprocal(&diagonal).unwrap(), 1.0);
        let pair = spatial(vec![edges([1.0, 0.0], [1.0, 2.0]), edges([1.0, 0.0], [0.5, 1.0])]);
        assert_abs_diff_eq!(
            vertical_slope_reciprocal(&pair).unwrap(),
            1.0 / 8f64.sqrt(),
            epsilon = 1e-15
        );
        let flat = spatial(vec![edges([1.0, 1.0], [1.0, 0.0])]);
        assert_eq!(vertical_slope_reciprocal(&flat).unwrap(), SLOPE_SENTINEL);
    }

    #[test]
    fn vertical_horizontal_edge_scores_terribly() {
        let c = spatial(vec![edges([0.0, 1.0], [1.0, 0.0])]);
        assert_eq!(horizontal_slope_norm(&c).unwrap(), SLOPE_SENTINEL);
    }

    #[test]
    fn cosine_examples() {
        let square = spatial(vec![[
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 0.0],
            [0.0, 1.0, 0.0],
        ]]);
        assert_eq!(cosine_norm(&square).unwrap(), 0.0);
        let skew = spatial(vec![[
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [2.0, 1.0, 0.0],
            [1.0, 1.0, 0.0],
        ]]);
        assert_abs_diff_eq!(cosine_norm(&skew).unwrap(), 0.5f64.sqrt(), epsilon = 1e-15);
        let two = spatial(vec![edges([3.0, 0.0], [0.0, 2.0]), edges([1.0, 1.0], [-1.0, 1.0])]);
        assert_abs_diff_eq!(cosine_norm(&two).unwrap(), 0.0, epsilon = 1e-16);
    }

    #[test]
    fn cosine_uses_depth_differences() {
        // h = (1, 0, 1), v = (0, 1, 1): cos = 1/2 only when z enters.
        let c = spatial(vec![[
            [0.0, 0.0, 1.0],
            [1.0, 0.0, 2.0],
            [1.0, 1.0, 3.0],
            [0.0, 1.0, 2.0],
        ]]);
        assert_abs_diff_eq!(cosine_norm(&c).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn zero_length_edge_is_degenerate() {
        let c = spatial(vec![edges([1.0, 0.0], [0.0, 1.0]), edges([0.0, 0.0], [0.0, 1.0])]);
        assert!(matches!(cosine_norm(&c), Err(Error::DegenerateButton { button: 1 })));
    }

    #[test]
    fn wrong_frame_is_rejected() {
        let px = CornerSet::from_pixels(vec![[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]]).unwrap();
        assert!(matches!(horizontal_slope_norm(&px), Err(Error::WrongFrame { .. })));
    }

    #[test]
    fn normalization_examples() {
        assert_eq!(min_max_normalize(&[5.0]).unwrap(), vec![0.0]);
        assert_eq!(min_max_normalize(&[0.0, 10.0]).unwrap(), vec![0.0, 1.0]);
        let v = min_max_normalize(&[1.0, 2.0, 4.0]).unwrap();
        assert_eq!(v[0], 0.0);
        assert_abs_diff_eq!(v[1], 1.0 / 3.0, epsilon = 1e-16);
        assert_eq!(v[2], 1.0);
        assert!(matches!(min_max_normalize(&[]), Err(Error::EmptyPopulation)));
    }

    #[test]
    fn final_cr_examples() {
        assert_eq!(final_cr([0.0; 3]), 0.0);
        assert_eq!(final_cr([1.0; 3]), 3.0);
        assert_abs_diff_eq!(final_cr([0.2, 0.1, 0.05]), 0.35, epsilon = 1e-15);
    }

    #[test]
    fn bounds_agree_with_list_normalization() {
        let pop = [[0.5, 2.0, 0.1], [0.25, 1.0, 0.3], [1.0, 4.0, 0.2]];
        let mut bounds = PopulationBounds::default();
        pop.iter().for_each(|t| bounds.push(*t));
        for axis in 0..3 {
            let col: Vec<f64> = pop.iter().map(|t| t[axis]).collect();
            let expect = min_max_normalize(&col).unwrap();
            for (t, e) in pop.iter().zip(expect) {
                assert_eq!(bounds.normalize(*t)[axis], e);
            }
        }
        let s = bounds.score(pop[1]);
        assert_eq!(s.normalized.unwrap(), [0.0, 0.0, 1.0]);
        assert_eq!(s.final_cr, Some(1.0));
    }

    fn random_quads() -> impl Strategy<Value = Vec<[[f64; 3]; 4]>> {
        prop::collection::vec(prop::array::uniform4(prop::array::uniform3(-5.0f64..5.0)), 1..4)
    }

    proptest! {
        #[test]
        fn criteria_are_scale_invariant(quads in random_quads(), s in 0.1f64..10.0) {
            let base = spatial(quads.clone());
            let scaled = spatial(quads.iter().map(|q| q.map(|p| p.map(|v| v * s))).collect());
            if let (Ok(a), Ok(b)) = (raw_scores(&base), raw_scores(&scaled)) {
                for (x, y) in a.triple().iter().zip(b.triple()) {
                    let tol = 1e-12 * x.abs().max(1.0);
                    prop_assert!((x - y).abs() <= tol, "{x} vs {y}");
                }
            }
        }

        #[test]
        fn normalization_is_monotone(values in prop::collection::vec(0.0f64..1e6, 1..50)) {
            let n = min_max_normalize(&values).unwrap();
            for i in 0..values.len() {
                prop_assert!((0.0..=1.0).contains(&n[i]));
                for j in 0..values.len() {
                    if values[i] < values[j] {
                        prop_assert!(n[i] <= n[j]);
                    }
                }
            }
        }

        #[test]
        fn argmin_survives_affine_rescaling(
            pop in prop::collection::vec(prop::array::uniform3(0.0f64..10.0), 2..30),
            scale in prop::array::uniform3(0.5f64..4.0),
            shift in prop::array::uniform3(0.0f64..3.0),
        ) {
            let argmin = |p: &[[f64; 3]]| {
                let mut b = PopulationBounds::default();
                p.iter().for_each(|t| b.push(*t));
                p.iter()
                    .map(|t| final_cr(b.normalize(*t)))
                    .enumerate()
                    .fold((usize::MAX, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc })
            };
            let mapped: Vec<[f64; 3]> = pop
                .iter()
                .map(|t| [0, 1, 2].map(|i| t[i] * scale[i] + shift[i]))
                .collect();
            let (a, va) = argmin(&pop);
            let (b, vb) = argmin(&mapped);
            // Ties and last-bit rounding may flip the index; the scores must agree.
            prop_assert!(a == b || (va - vb).abs() < 1e-9);
        }
    }
}
