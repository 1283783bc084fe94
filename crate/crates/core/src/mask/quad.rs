//! Turning four Hough lines into an ordered button quadrilateral.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use super::hough::HoughLine;
use crate::error::{Error, Result};

/// The four edges of one button. Near-vertical lines are stored with
/// `θ ∈ (−π/4, π/4]` so that their `ρ` values are comparable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeQuad {
    pub top: HoughLine,
    pub bottom: HoughLine,
    pub left: HoughLine,
    pub right: HoughLine,
}

impl EdgeQuad {
    /// Corners in canonical order (top-left, top-right, bottom-right,
    /// bottom-left) straight from the edge labels.
    pub fn corners(&self) -> Result<[[f64; 2]; 4]> {
        Ok([
            intersect(&self.top, &self.left)?,
            intersect(&self.top, &self.right)?,
            intersect(&self.bottom, &self.right)?,
            intersect(&self.bottom, &self.left)?,
        ])
    }

    pub fn edges(&self) -> [HoughLine; 4] {
        [self.top, self.right, self.bottom, self.left]
    }
}

fn is_horizontal(l: &HoughLine) -> bool {
    (l.theta - FRAC_PI_2).abs() < FRAC_PI_4
}

/// Brings a near-vertical line to `θ ∈ (−π/4, π/4]`.
fn upright(l: &HoughLine) -> HoughLine {
    if l.theta > FRAC_PI_2 {
        l.flipped()
    } else {
        *l
    }
}

/// `y` of a near-horizontal line at column `x`.
fn y_at(l: &HoughLine, x: f64) -> f64 {
    (l.rho - x * l.theta.cos()) / l.theta.sin()
}

/// `x` of a near-vertical line at row `y`.
fn x_at(l: &HoughLine, y: f64) -> f64 {
    (l.rho - y * l.theta.sin()) / l.theta.cos()
}

/// Strongest line, plus the strongest line on the other side of the centre
/// whose offset from it is at least `min_separation`. `offset` is the signed
/// distance of a line from the centre along the class's cross axis.
fn strongest_pair(
    lines: &[HoughLine],
    offset: impl Fn(&HoughLine) -> f64,
    min_separation: f64,
) -> Option<(HoughLine, HoughLine)> {
    let first = *lines.first()?;
    let o1 = offset(&first);
    let second = lines[1..].iter().find(|l| {
        let o2 = offset(l);
        o1 * o2 < 0.0 && (o2 - o1).abs() >= min_separation
    })?;
    Some((first, *second))
}

/// Splits candidate lines into near-horizontal and near-vertical classes,
/// keeps the two strongest lines of each that lie on opposite sides of
/// `centre` at least `min_separation` apart (measured through the centre),
/// and labels them top/bottom and left/right.
pub fn select_four_edges(lines: &[HoughLine], centre: [f64; 2], min_separation: f64) -> Result<EdgeQuad> {
    if lines.len() < 4 {
        return Err(Error::QuadAssembly(format!(
            "need at least 4 lines, got {}",
            lines.len()
        )));
    }
    let mut sorted = lines.to_vec();
    sorted.sort_by_key(|l| std::cmp::Reverse(l.votes));
    let horizontal: Vec<HoughLine> = sorted.iter().filter(|l| is_horizontal(l)).copied().collect();
    let vertical: Vec<HoughLine> = sorted.iter().filter(|l| !is_horizontal(l)).map(upright).collect();
    let dy = |l: &HoughLine| y_at(l, centre[0]) - centre[1];
    let dx = |l: &HoughLine| x_at(l, centre[1]) - centre[0];
    let (h1, h2) = strongest_pair(&horizontal, dy, min_separation).ok_or_else(|| {
        Error::QuadAssembly(format!(
            "{} near-horizontal lines, need one above and one below the centre",
            horizontal.len()
        ))
    })?;
    let (v1, v2) = strongest_pair(&vertical, dx, min_separation).ok_or_else(|| {
        Error::QuadAssembly(format!(
            "{} near-vertical lines, need one left and one right of the centre",
            vertical.len()
        ))
    })?;
    let (top, bottom) = if dy(&h1) < dy(&h2) { (h1, h2) } else { (h2, h1) };
    let (left, right) = if dx(&v1) < dx(&v2) { (v1, v2) } else { (v2, v1) };
    Ok(EdgeQuad {
        top,
        bottom,
        left,
        right,
    })
}

/// Solves `x·cosθᵢ + y·sinθᵢ = ρᵢ` for the two lines.
pub fn intersect(l1: &HoughLine, l2: &HoughLine) -> Result<[f64; 2]> {
    let (s1, c1) = l1.theta.sin_cos();
    let (s2, c2) = l2.theta.sin_cos();
    let det = c1 * s2 - s1 * c2;
    if det.abs() <= 1e-6 {
        return Err(Error::NoIntersection { sin: det.abs() });
    }
    Ok([(l1.rho * s2 - l2.rho * s1) / det, (c1 * l2.rho - c2 * l1.rho) / det])
}

/// z-component of `(b − a) × (c − b)`.
fn turn(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
}

/// True when the quad is strictly convex and runs top-left, top-right,
/// bottom-right, bottom-left (clockwise on screen, with `y` pointing down).
pub fn is_canonical_convex(q: &[[f64; 2]; 4]) -> bool {
    (0..4).all(|i| {
        let t = turn(q[i], q[(i + 1) % 4], q[(i + 2) % 4]);
        t.is_finite() && t > 0.0
    })
}

/// Sorts four points by angle about their centroid and rotates the cycle to
/// start at the point with the smallest `x + y`.
pub fn order_corners(points: [[f64; 2]; 4]) -> Result<[[f64; 2]; 4]> {
    if points.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::CornerOrdering("non-finite coordinate".into()));
    }
    for i in 0..4 {
        for j in i + 1..4 {
            let d = (points[i][0] - points[j][0]).hypot(points[i][1] - points[j][1]);
            if d <= 1e-9 {
                return Err(Error::CornerOrdering(format!("corners {i} and {j} coincide")));
            }
        }
    }
    let cx = points.iter().map(|p| p[0]).sum::<f64>() / 4.0;
    let cy = points.iter().map(|p| p[1]).sum::<f64>() / 4.0;
    let mut sorted = points;
    sorted.sort_by(|a, b| {
        let ta = (a[1] - cy).atan2(a[0] - cx);
        let tb = (b[1] - cy).atan2(b[0] - cx);
        ta.total_cmp(&tb)
    });
    let start = (0..4)
        .min_by(|&i, &j| {
            let (a, b) = (sorted[i], sorted[j]);
            (a[0] + a[1]).total_cmp(&(b[0] + b[1])).then(a[1].total_cmp(&b[1]))
        })
        .unwrap_or(0);
    sorted.rotate_left(start);
    if !is_canonical_convex(&sorted) {
        return Err(Error::CornerOrdering(
            "points do not form a convex quadrilateral".into(),
        ));
    }
    Ok(sorted)
}

/// Shoelace area of a simple polygon.
pub fn polygon_area(q: &[[f64; 2]]) -> f64 {
    let n = q.len();
    (0..n)
        .map(|i| {
            let (a, b) = (q[i], q[(i + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
        .abs()
        / 2.0
}

/// Total-least-squares refit of `line` to the boundary points within `band`
/// pixels of it whose position along the line lies strictly between `ends`
/// (shrunk by `margin` pixels on each side).
///
/// Boundary pixel centres of a region sit inside the true edge, uniformly
/// spread over a depth of `|cosθ| + |sinθ|` for 8-neighbour boundaries, so
/// the fitted line is pushed away from `interior` by half that depth.
pub fn refine_line(
    line: &HoughLine,
    boundary: &[[f64; 2]],
    ends: [[f64; 2]; 2],
    interior: [f64; 2],
    band: f64,
    margin: f64,
) -> Option<HoughLine> {
    let (s, c) = line.theta.sin_cos();
    let dir = [-s, c];
    let along = |p: [f64; 2]| p[0] * dir[0] + p[1] * dir[1];
    let (a0, a1) = {
        let (a, b) = (along(ends[0]), along(ends[1]));
        (a.min(b) + margin, a.max(b) - margin)
    };
    let support: Vec<[f64; 2]> = boundary
        .iter()
        .copied()
        .filter(|&p| line.distance(p) <= band && (a0..=a1).contains(&along(p)))
        .collect();
    if support.len() < 2 {
        return None;
    }
    let n = support.len() as f64;
    let mx = support.iter().map(|p| p[0]).sum::<f64>() / n;
    let my = support.iter().map(|p| p[1]).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in &support {
        let (dx, dy) = (p[0] - mx, p[1] - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    // Orientation of the major axis; the normal is perpendicular to it.
    let phi = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let mut normal = [-phi.sin(), phi.cos()];
    if normal[0] * c + normal[1] * s < 0.0 {
        normal = [-normal[0], -normal[1]];
    }
    let mut theta = normal[1].atan2(normal[0]);
    // Keep the representation of the input line.
    if theta - line.theta > PI {
        theta -= 2.0 * PI;
    } else if line.theta - theta > PI {
        theta += 2.0 * PI;
    }
    let mut rho = normal[0] * mx + normal[1] * my;
    let depth = normal[0].abs() + normal[1].abs();
    let side = normal[0] * interior[0] + normal[1] * interior[1] - rho;
    rho -= side.signum() * depth / 2.0;
    Some(HoughLine {
        rho,
        theta,
        votes: support.len() as u32,
    })
}
