//! Shared helpers for the integration tests, including a naive reference
//! implementation of the pose sweep written against plain arrays.

#![allow(dead_code)]

use panel_rectify::synth::{self, DistortedPanel, PanelSpec, ReferencePanel};
use panel_rectify::{CornerSet, Intrinsics, PoseHypothesis};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type M3 = [[f64; 3]; 3];
pub type V3 = [f64; 3];

fn mul(a: &M3, b: &M3) -> M3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn apply(a: &M3, v: &V3) -> V3 {
    [0, 1, 2].map(|i| a[i][0] * v[0] + a[i][1] * v[1] + a[i][2] * v[2])
}

pub fn naive_rotation(deg: [f64; 3]) -> M3 {
    let [x, y, z] = deg.map(|d| d * std::f64::consts::PI / 180.0);
    let rx = [[1.0, 0.0, 0.0], [0.0, x.cos(), x.sin()], [0.0, -x.sin(), x.cos()]];
    let ry = [[y.cos(), 0.0, -y.sin()], [0.0, 1.0, 0.0], [y.sin(), 0.0, y.cos()]];
    let rz = [[z.cos(), z.sin(), 0.0], [-z.sin(), z.cos(), 0.0], [0.0, 0.0, 1.0]];
    mul(&mul(&rx, &ry), &rz)
}

/// `M_int⁻¹ · [u, v, 1]ᵀ`.
fn lift(p: [f64; 2], k: &Intrinsics) -> V3 {
    let inv = [
        [1.0 / k.fx, 0.0, -k.ox / k.fx],
        [0.0, 1.0 / k.fy, -k.oy / k.fy],
        [0.0, 0.0, 1.0],
    ];
    apply(&inv, &[p[0], p[1], 1.0])
}

fn slope(a: &V3, b: &V3) -> f64 {
    let dx = b[0] - a[0];
    if dx.abs() <= 1e-12 {
        1e12
    } else {
        ((b[1] - a[1]) / dx).clamp(-1e12, 1e12)
    }
}

/// Raw `(‖K_H‖, 1/‖K_V‖, ‖Cos‖)` of quads already on the `z = 1` plane;
/// `None` for a zero-length edge.
pub fn naive_triple(quads: &[[V3; 4]]) -> Option<[f64; 3]> {
    let mut kh = 0.0;
    let mut kv = 0.0;
    let mut cs = 0.0;
    for q in quads {
        kh += slope(&q[0], &q[1]).powi(2);
        kv += slope(&q[0], &q[3]).powi(2);
        let h: V3 = [0, 1, 2].map(|i| q[1][i] - q[0][i]);
        let v: V3 = [0, 1, 2].map(|i| q[3][i] - q[0][i]);
        let hn = h.iter().map(|a| a * a).sum::<f64>().sqrt();
        let vn = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if hn <= 1e-12 || vn <= 1e-12 {
            return None;
        }
        let c = (h[0] * v[0] + h[1] * v[1] + h[2] * v[2]) / (hn * vn);
        cs += c * c;
    }
    let krv = if kv == 0.0 { 1e12 } else { 1.0 / kv.sqrt() };
    Some([kh.sqrt(), krv, cs.sqrt()])
}

pub struct NaiveSweep {
    pub angles: Vec<f64>,
    /// `θx`-major; `None` marks a degenerate hypothesis.
    pub triples: Vec<Option<[f64; 3]>>,
    pub best: [f64; 3],
    pub best_index: usize,
}

/// Triple loop over the lattice, then min-max normalization and argmin with
/// the first index winning ties.
pub fn naive_sweep(
    detected: &[[[f64; 2]; 4]],
    reference: &[[[f64; 2]; 4]],
    k: &Intrinsics,
    alpha: f64,
    beta: f64,
    gamma: f64,
) -> NaiveSweep {
    let n = ((beta - alpha) / gamma).round() as usize + 1;
    let angles: Vec<f64> = (0..n).map(|i| alpha + i as f64 * gamma).collect();
    let d: Vec<[V3; 4]> = detected.iter().map(|q| q.map(|p| lift(p, k))).collect();
    let e1 = lift(reference[0][0], k);
    let mut triples = Vec::with_capacity(n * n * n);
    for &ax in &angles {
        for &ay in &angles {
            for &az in &angles {
                let r = naive_rotation([ax, ay, az]);
                let rd1 = apply(&r, &d[0][0]);
                let t = [0, 1, 2].map(|i| e1[i] - rd1[i]);
                let mut moved = Vec::with_capacity(d.len());
                let mut ok = true;
                for q in &d {
                    let m = q.map(|p| {
                        let rp = apply(&r, &p);
                        let s = [0, 1, 2].map(|i| rp[i] + t[i]);
                        if s[2].abs() < 1e-9 {
                            ok = false;
                        }
                        [s[0] / s[2], s[1] / s[2], 1.0]
                    });
                    moved.push(m);
                }
                triples.push(if ok { naive_triple(&moved) } else { None });
            }
        }
    }
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for t in triples.iter().flatten() {
        for c in 0..3 {
            lo[c] = lo[c].min(t[c]);
            hi[c] = hi[c].max(t[c]);
        }
    }
    let mut best_index = usize::MAX;
    let mut best_cr = f64::INFINITY;
    for (i, t) in triples.iter().enumerate() {
        let Some(t) = t else { continue };
        let cr: f64 = (0..3)
            .map(|c| {
                let span = hi[c] - lo[c];
                if span <= 1e-15 {
                    0.0
                } else {
                    (t[c] - lo[c]) / span
                }
            })
            .sum();
        if cr < best_cr {
            best_cr = cr;
            best_index = i;
        }
    }
    let best = [best_index / (n * n), (best_index / n) % n, best_index % n].map(|i| angles[i]);
    NaiveSweep {
        angles,
        triples,
        best,
        best_index,
    }
}

/// Roughly rectangular quads jittered by a few pixels, one to four buttons.
pub fn random_quads(rng: &mut ChaCha8Rng) -> Vec<[[f64; 2]; 4]> {
    let n = rng.gen_range(1..=4);
    (0..n)
        .map(|i| {
            let x = rng.gen_range(100.0..450.0);
            let y = 40.0 + 100.0 * i as f64 + rng.gen_range(0.0..20.0);
            let w = rng.gen_range(40.0..90.0);
            let h = rng.gen_range(40.0..70.0);
            let mut j = || rng.gen_range(-6.0..6.0);
            [
                [x + j(), y + j()],
                [x + w + j(), y + j()],
                [x + w + j(), y + h + j()],
                [x + j(), y + h + j()],
            ]
        })
        .collect()
}

pub fn default_pair() -> ReferencePanel {
    synth::generate_reference(&PanelSpec::default()).unwrap()
}

/// Uniform lattice angle in `[-30, 30]` at 0.5° steps.
pub fn lattice_angle(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(-60i32..=60) as f64 * 0.5
}

/// Draws angle triples until the distorted panel stays inside the canvas.
pub fn distort_random(
    panel: &ReferencePanel,
    k: &Intrinsics,
    rng: &mut ChaCha8Rng,
    mut draw: impl FnMut(&mut ChaCha8Rng) -> [f64; 3],
) -> ([f64; 3], PoseHypothesis, DistortedPanel) {
    loop {
        let angles = draw(rng);
        let pose = synth::anchored_pose(angles, &panel.corners, k);
        if let Ok(d) = synth::distort(panel, &pose, k) {
            return (angles, pose, d);
        }
    }
}

/// Largest corner distance between two sets with matching layout.
pub fn max_corner_error(a: &CornerSet, b: &CornerSet) -> f64 {
    assert_eq!(a.len(), b.len());
    a.xy()
        .iter()
        .zip(b.xy())
        .map(|(p, q)| (p[0] - q[0]).hypot(p[1] - q[1]))
        .fold(0.0, f64::max)
}

/// Sets every pixel whose centre lies inside the convex quad to `label`.
pub fn fill_quad(mask: &mut panel_rectify::mask::LabelMask, quad: &[[f64; 2]; 4], label: u8) {
    let inside = |x: f64, y: f64| {
        (0..4).all(|i| {
            let a = quad[i];
            let b = quad[(i + 1) % 4];
            (b[0] - a[0]) * (y - a[1]) - (b[1] - a[1]) * (x - a[0]) >= 0.0
        })
    };
    for y in 0..mask.height {
        for x in 0..mask.width {
            if inside(x as f64 + 0.5, y as f64 + 0.5) {
                mask.set(x, y, label);
            }
        }
    }
}

/// Rectangle of size `w × h` centred on `c`, rotated by `deg` in the image.
pub fn rotated_rect(c: [f64; 2], w: f64, h: f64, deg: f64) -> [[f64; 2]; 4] {
    let (s, co) = deg.to_radians().sin_cos();
    [[-w, -h], [w, -h], [w, h], [-w, h]].map(|[dx, dy]| {
        let (dx, dy) = (dx / 2.0, dy / 2.0);
        [c[0] + dx * co - dy * s, c[1] + dx * s + dy * co]
    })
}
