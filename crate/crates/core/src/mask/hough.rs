//! Standard `ρ–θ` Hough accumulator over a point set.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Line `x·cosθ + y·sinθ = ρ`. A pixel centre lies on it when its distance
/// `|x·cosθ + y·sinθ − ρ|` is at most half a pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoughLine {
    pub rho: f64,
    pub theta: f64,
    pub votes: u32,
}

impl HoughLine {
    pub fn distance(&self, p: [f64; 2]) -> f64 {
        (p[0] * self.theta.cos() + p[1] * self.theta.sin() - self.rho).abs()
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        self.distance(p) <= 0.5
    }

    /// Same line with `θ` shifted by `π` and `ρ` negated.
    pub fn flipped(&self) -> Self {
        Self {
            rho: -self.rho,
            theta: if self.theta >= PI / 2.0 {
                self.theta - PI
            } else {
                self.theta + PI
            },
            votes: self.votes,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoughParams {
    /// Pixels.
    pub rho_step: f64,
    /// Radians.
    pub theta_step: f64,
    /// Peaks need at least this fraction of the strongest cell's votes.
    pub peak_ratio: f64,
    /// Non-maximum suppression half-window in `ρ`, pixels.
    pub nms_rho: f64,
    /// Non-maximum suppression half-window in `θ`, radians.
    pub nms_theta: f64,
}

impl Default for HoughParams {
    fn default() -> Self {
        Self {
            rho_step: 1.0,
            theta_step: 1f64.to_radians(),
            peak_ratio: 0.5,
            nms_rho: 3.0,
            nms_theta: 5f64.to_radians(),
        }
    }
}

/// Peaks of the accumulator, strongest first, with at least four required.
pub fn hough_lines(points: &[[f64; 2]], params: &HoughParams) -> Result<Vec<HoughLine>> {
    let lines = hough_peaks(points, params);
    if lines.len() < 4 {
        return Err(Error::LineDetection { found: lines.len() });
    }
    Ok(lines)
}

/// All non-suppressed peaks, strongest first, as lines in image coordinates
/// with `θ ∈ [0, π)`.
///
/// Votes are accumulated with `ρ` measured from the centroid of the points.
/// Edges of a compact shape then sit symmetrically about the origin, so the
/// off-angle echoes of one edge stay close to it in `(ρ, θ)` and fall inside
/// the suppression window.
pub fn hough_peaks(points: &[[f64; 2]], params: &HoughParams) -> Vec<HoughLine> {
    if points.is_empty()
        || !(params.rho_step > 0.0 && params.theta_step > 0.0)
        || !(params.rho_step.is_finite() && params.theta_step.is_finite())
    {
        return Vec::new();
    }
    let n = points.len() as f64;
    let origin = [
        points.iter().map(|p| p[0]).sum::<f64>() / n,
        points.iter().map(|p| p[1]).sum::<f64>() / n,
    ];
    if !(origin[0].is_finite() && origin[1].is_finite()) {
        return Vec::new();
    }
    let n_theta = ((PI / params.theta_step).round() as usize).max(1);
    let max_r = points
        .iter()
        .map(|p| (p[0] - origin[0]).hypot(p[1] - origin[1]))
        .fold(0.0f64, f64::max);
    if !max_r.is_finite() || max_r / params.rho_step > 1e7 {
        return Vec::new();
    }
    let half = (max_r / params.rho_step).ceil() as usize + 1;
    let n_rho = 2 * half + 1;
    let trig: Vec<(f64, f64)> = (0..n_theta).map(|t| (t as f64 * params.theta_step).sin_cos()).collect();

    let mut acc = vec![0u32; n_theta * n_rho];
    for p in points {
        let (x, y) = (p[0] - origin[0], p[1] - origin[1]);
        for (t, &(s, c)) in trig.iter().enumerate() {
            let rho = x * c + y * s;
            let bin = (rho / params.rho_step).round() as i64 + half as i64;
            acc[t * n_rho + bin as usize] += 1;
        }
    }

    let max_votes = acc.iter().copied().max().unwrap_or(0);
    if max_votes == 0 {
        return Vec::new();
    }
    let threshold = params.peak_ratio * max_votes as f64;
    let mut candidates: Vec<(u32, usize, usize)> = acc
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0 && v as f64 >= threshold)
        .map(|(i, &v)| (v, i / n_rho, i % n_rho))
        .collect();
    candidates.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    // Suppression works on centroid-relative lines.
    let mut local: Vec<HoughLine> = Vec::new();
    for (votes, t, r) in candidates {
        let line = HoughLine {
            rho: (r as f64 - half as f64) * params.rho_step,
            theta: t as f64 * params.theta_step,
            votes,
        };
        if !local.iter().any(|p| near(p, &line, params)) {
            local.push(line);
        }
    }
    local
        .into_iter()
        .map(|l| {
            let (s, c) = l.theta.sin_cos();
            HoughLine {
                rho: l.rho + origin[0] * c + origin[1] * s,
                ..l
            }
        })
        .collect()
}

/// Within the suppression window, treating `(θ, ρ)` and `(θ ± π, −ρ)` as the
/// same line.
fn near(a: &HoughLine, b: &HoughLine, params: &HoughParams) -> bool {
    let eps = 1e-9;
    let dt = (a.theta - b.theta).abs();
    let direct = dt <= params.nms_theta + eps && (a.rho - b.rho).abs() <= params.nms_rho + eps;
    let wrapped = PI - dt <= params.nms_theta + eps && (a.rho + b.rho).abs() <= params.nms_rho + eps;
    direct || wrapped
}
