//! Pinhole camera model, corner frames and the rotation/translation algebra
//! shared by the pose search and the image warp.
//!
//! Points are column vectors and matrices act on the left. A pixel `(x, y)`
//! is lifted to `(x, y, 1)`, back-projected through the inverse intrinsics
//! onto the `z = 1` plane, moved by a pose and divided by its own depth, then
//! projected back to pixels.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// Depth below which a transformed point is treated as lying at infinity.
pub const DEPTH_EPSILON: f64 = 1e-9;

/// Largest condition number accepted for a warp homography.
pub const MAX_HOMOGRAPHY_CONDITION: f64 = 1e12;

pub fn deg_to_rad(angle: f64) -> f64 {
    angle * std::f64::consts::PI / 180.0
}

/// Rotation about the x axis, `+sin` in row 2 column 3.
pub fn rotation_x(theta: f64) -> Matrix3<f64> {
    let (s, c) = theta.sin_cos();
    Matrix3::new(
        1.0, 0.0, 0.0, //
        0.0, c, s, //
        0.0, -s, c,
    )
}

/// Rotation about the y axis, `-sin` in row 1 column 3.
pub fn rotation_y(theta: f64) -> Matrix3<f64> {
    let (s, c) = theta.sin_cos();
    Matrix3::new(
        c, 0.0, -s, //
        0.0, 1.0, 0.0, //
        s, 0.0, c,
    )
}

/// Rotation about the z axis, `+sin` in row 1 column 2.
pub fn rotation_z(theta: f64) -> Matrix3<f64> {
    let (s, c) = theta.sin_cos();
    Matrix3::new(
        c, s, 0.0, //
        -s, c, 0.0, //
        0.0, 0.0, 1.0,
    )
}

/// `R_x(θx) · R_y(θy) · R_z(θz)`, angles taken from the pose in degrees.
pub fn compose_rotation(pose: &PoseHypothesis) -> Matrix3<f64> {
    rotation_x(deg_to_rad(pose.theta_x)) * rotation_y(deg_to_rad(pose.theta_y)) * rotation_z(deg_to_rad(pose.theta_z))
}

/// Pinhole intrinsics: focal ratios `F/s_x`, `F/s_y` and the principal point,
/// all in pixels.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub ox: f64,
    pub oy: f64,
}

impl Default for Intrinsics {
    /// 640x480 camera with unit-aspect focal ratio 320.
    fn default() -> Self {
        Self {
            fx: 320.0,
            fy: 320.0,
            ox: 320.0,
            oy: 240.0,
        }
    }
}

impl Intrinsics {
    pub fn new(fx: f64, fy: f64, ox: f64, oy: f64) -> Result<Self> {
        let k = Self { fx, fy, ox, oy };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fx.is_finite() && self.fx > 0.0 && self.fy.is_finite() && self.fy > 0.0) {
            return Err(Error::InvalidIntrinsics(format!(
                "focal ratios must be positive and finite (fx = {}, fy = {})",
                self.fx, self.fy
            )));
        }
        if !(self.ox.is_finite() && self.oy.is_finite()) {
            return Err(Error::InvalidIntrinsics(format!(
                "principal point must be finite (ox = {}, oy = {})",
                self.ox, self.oy
            )));
        }
        Ok(())
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(
            self.fx, 0.0, self.ox, //
            0.0, self.fy, self.oy, //
            0.0, 0.0, 1.0,
        )
    }

    pub fn inverse_matrix(&self) -> Matrix3<f64> {
        Matrix3::new(
            1.0 / self.fx,
            0.0,
            -self.ox / self.fx,
            0.0,
            1.0 / self.fy,
            -self.oy / self.fy,
            0.0,
            0.0,
            1.0,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Frame {
    /// Pixel coordinates; only `x` and `y` are meaningful and `z` is kept at 0.
    PixelImage,
    /// Pixel coordinates with a third coordinate of exactly 1.
    NormalizedHomogeneous,
    /// Camera-space coordinates.
    Spatial,
}

/// Corners of one rectangular button in canonical order: top-left,
/// top-right, bottom-right, bottom-left. Corner 1 to 2 is the horizontal
/// edge and corner 1 to 4 the vertical edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Button {
    pub label: Option<u8>,
    pub corners: [Vector3<f64>; 4],
}

impl Button {
    pub fn from_pixels(label: Option<u8>, corners: [[f64; 2]; 4]) -> Self {
        Self {
            label,
            corners: corners.map(|[x, y]| Vector3::new(x, y, 0.0)),
        }
    }
}

/// Ordered per-button corner quadruples tagged with the frame they live in.
#[derive(Debug, Clone, PartialEq)]
pub struct CornerSet {
    frame: Frame,
    buttons: Vec<Button>,
}

impl CornerSet {
    pub fn new(frame: Frame, buttons: Vec<Button>) -> Result<Self> {
        if buttons.is_empty() {
            return Err(Error::EmptyCornerSet);
        }
        if frame == Frame::NormalizedHomogeneous {
            for (b, button) in buttons.iter().enumerate() {
                for (c, p) in button.corners.iter().enumerate() {
                    if p.z != 1.0 {
                        return Err(Error::NotHomogeneous {
                            button: b,
                            corner: c,
                            value: p.z,
                        });
                    }
                }
            }
        }
        Ok(Self { frame, buttons })
    }

    /// Unlabeled pixel-frame corner set.
    pub fn from_pixels(quads: Vec<[[f64; 2]; 4]>) -> Result<Self> {
        Self::new(
            Frame::PixelImage,
            quads.into_iter().map(|q| Button::from_pixels(None, q)).collect(),
        )
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn buttons(&self) -> &[Button] {
        &self.buttons
    }

    pub fn len(&self) -> usize {
        self.buttons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buttons.is_empty()
    }

    /// `N = 4·b`.
    pub fn corner_count(&self) -> usize {
        4 * self.buttons.len()
    }

    pub fn first_corner(&self) -> Vector3<f64> {
        self.buttons[0].corners[0]
    }

    /// All corners in button order, as `(x, y)`.
    pub fn xy(&self) -> Vec<[f64; 2]> {
        self.buttons
            .iter()
            .flat_map(|b| b.corners.iter().map(|p| [p.x, p.y]))
            .collect()
    }

    pub fn quads(&self) -> Vec<[[f64; 2]; 4]> {
        self.buttons.iter().map(|b| b.corners.map(|p| [p.x, p.y])).collect()
    }

    pub fn labels(&self) -> Vec<Option<u8>> {
        self.buttons.iter().map(|b| b.label).collect()
    }

    fn expect_frame(&self, expected: Frame) -> Result<()> {
        if self.frame == expected {
            Ok(())
        } else {
            Err(Error::WrongFrame {
                expected,
                found: self.frame,
            })
        }
    }

    fn map_points(&self, frame: Frame, mut f: impl FnMut(&Vector3<f64>) -> Vector3<f64>) -> Self {
        Self {
            frame,
            buttons: self
                .buttons
                .iter()
                .map(|b| Button {
                    label: b.label,
                    corners: b.corners.each_ref().map(&mut f),
                })
                .collect(),
        }
    }
}

/// Lifts pixel corners to homogeneous coordinates by appending a 1.
pub fn to_homogeneous(corners: &CornerSet) -> Result<CornerSet> {
    corners.expect_frame(Frame::PixelImage)?;
    Ok(corners.map_points(Frame::NormalizedHomogeneous, |p| Vector3::new(p.x, p.y, 1.0)))
}

/// Drops the homogeneous coordinate, keeping rows 1 and 2.
pub fn to_pixels(corners: &CornerSet) -> Result<CornerSet> {
    corners.expect_frame(Frame::NormalizedHomogeneous)?;
    Ok(corners.map_points(Frame::PixelImage, |p| Vector3::new(p.x, p.y, 0.0)))
}

/// `D = M_int⁻¹ · Ĉ`.
pub fn back_project(corners: &CornerSet, k: &Intrinsics) -> Result<CornerSet> {
    corners.expect_frame(Frame::NormalizedHomogeneous)?;
    k.validate()?;
    let inv = k.inverse_matrix();
    Ok(corners.map_points(Frame::Spatial, |p| inv * p))
}

/// Shorthand for `back_project(to_homogeneous(c))`.
pub fn pixels_to_spatial(corners: &CornerSet, k: &Intrinsics) -> Result<CornerSet> {
    back_project(&to_homogeneous(corners)?, k)
}

/// `Ĝ = M_int · P`. Points off the `z = 1` plane are divided by their depth
/// so that the result stays homogeneous.
pub fn project(spatial: &CornerSet, k: &Intrinsics) -> Result<CornerSet> {
    spatial.expect_frame(Frame::Spatial)?;
    let m = k.matrix();
    let mut out = Vec::with_capacity(spatial.len());
    for (b, button) in spatial.buttons.iter().enumerate() {
        let mut corners = [Vector3::zeros(); 4];
        for (c, p) in button.corners.iter().enumerate() {
            let g = m * p;
            if g.z.abs() < DEPTH_EPSILON {
                return Err(Error::DegenerateDepth {
                    button: b,
                    corner: c,
                    depth: g.z,
                });
            }
            corners[c] = if g.z == 1.0 {
                g
            } else {
                Vector3::new(g.x / g.z, g.y / g.z, 1.0)
            };
        }
        out.push(Button {
            label: button.label,
            corners,
        });
    }
    CornerSet::new(Frame::NormalizedHomogeneous, out)
}

/// `M = R·D`, `P = M + T`, `P = P / P[3]`.
pub fn apply_pose(spatial: &CornerSet, pose: &PoseHypothesis) -> Result<CornerSet> {
    spatial.expect_frame(Frame::Spatial)?;
    let r = pose.rotation_matrix();
    let mut out = Vec::with_capacity(spatial.len());
    for (b, button) in spatial.buttons.iter().enumerate() {
        let mut corners = [Vector3::zeros(); 4];
        for (c, d) in button.corners.iter().enumerate() {
            corners[c] = move_point(&r, &pose.t, d).ok_or(Error::DegenerateDepth {
                button: b,
                corner: c,
                depth: (r * d + pose.t).z,
            })?;
        }
        out.push(Button {
            label: button.label,
            corners,
        });
    }
    Ok(CornerSet {
        frame: Frame::Spatial,
        buttons: out,
    })
}

/// Rotates, translates and depth-normalizes one point; `None` when the depth
/// is within [`DEPTH_EPSILON`] of zero.
#[inline]
pub(crate) fn move_point(r: &Matrix3<f64>, t: &Vector3<f64>, d: &Vector3<f64>) -> Option<Vector3<f64>> {
    let p = r * d + t;
    if p.z.abs() < DEPTH_EPSILON {
        return None;
    }
    Some(Vector3::new(p.x / p.z, p.y / p.z, 1.0))
}

/// `T = e₁ − R·d₁`: the translation that lands the first detected corner on
/// the first reference corner after rotation.
pub fn translation_align_first_corner(
    spatial_detected: &CornerSet,
    spatial_reference: &CornerSet,
    r: &Matrix3<f64>,
) -> Result<Vector3<f64>> {
    spatial_detected.expect_frame(Frame::Spatial)?;
    spatial_reference.expect_frame(Frame::Spatial)?;
    Ok(spatial_reference.first_corner() - r * spatial_detected.first_corner())
}

/// Three rotation angles in degrees plus a translation in camera units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseHypothesis {
    pub theta_x: f64,
    pub theta_y: f64,
    pub theta_z: f64,
    pub t: Vector3<f64>,
}

impl PoseHypothesis {
    pub fn new(angles_deg: [f64; 3], t: Vector3<f64>) -> Self {
        Self {
            theta_x: angles_deg[0],
            theta_y: angles_deg[1],
            theta_z: angles_deg[2],
            t,
        }
    }

    pub fn identity() -> Self {
        Self::new([0.0; 3], Vector3::zeros())
    }

    pub fn angles(&self) -> [f64; 3] {
        [self.theta_x, self.theta_y, self.theta_z]
    }

    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        compose_rotation(self)
    }

    /// Pose with the given angles whose translation carries the pixel
    /// `from_px` onto the pixel `to_px` exactly (with unit depth).
    pub fn anchored(angles_deg: [f64; 3], from_px: [f64; 2], to_px: [f64; 2], k: &Intrinsics) -> Self {
        let inv = k.inverse_matrix();
        let a = inv * Vector3::new(from_px[0], from_px[1], 1.0);
        let e = inv * Vector3::new(to_px[0], to_px[1], 1.0);
        let mut pose = Self::new(angles_deg, Vector3::zeros());
        pose.t = e - pose.rotation_matrix() * a;
        pose
    }
}

/// Planar projective map acting on pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography(pub Matrix3<f64>);

impl Homography {
    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    /// Ratio of the largest to the smallest singular value.
    pub fn condition_number(&self) -> f64 {
        let sv = self.0.singular_values();
        let max = sv.max();
        let min = sv.min();
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        let condition = self.condition_number();
        if !(condition < MAX_HOMOGRAPHY_CONDITION) {
            return Err(Error::DegeneratePose { condition });
        }
        self.0
            .try_inverse()
            .map(Self)
            .ok_or(Error::DegeneratePose { condition })
    }

    /// Maps a pixel, or `None` when it lands at infinity.
    #[inline]
    pub fn apply(&self, p: [f64; 2]) -> Option<[f64; 2]> {
        let m = &self.0;
        let w = m[(2, 0)] * p[0] + m[(2, 1)] * p[1] + m[(2, 2)];
        if w.abs() < DEPTH_EPSILON {
            return None;
        }
        let x = m[(0, 0)] * p[0] + m[(0, 1)] * p[1] + m[(0, 2)];
        let y = m[(1, 0)] * p[0] + m[(1, 1)] * p[1] + m[(1, 2)];
        Some([x / w, y / w])
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Homography) -> Self {
        Self(self.0 * other.0)
    }
}

/// Closed form of back-project, move and project:
/// `H = M_int · (R + T·[0 0 1]) · M_int⁻¹`.
pub fn pose_to_homography(pose: &PoseHypothesis, k: &Intrinsics) -> Result<Homography> {
    k.validate()?;
    let mut a = pose.rotation_matrix();
    for row in 0..3 {
        a[(row, 2)] += pose.t[row];
    }
    let h = Homography(k.matrix() * a * k.inverse_matrix());
    let condition = h.condition_number();
    if !(condition < MAX_HOMOGRAPHY_CONDITION) {
        return Err(Error::DegeneratePose { condition });
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn px(quads: Vec<[[f64; 2]; 4]>) -> CornerSet {
        CornerSet::from_pixels(quads).unwrap()
    }

    #[test]
    fn degrees_to_radians() {
        assert_eq!(deg_to_rad(0.0), 0.0);
        assert_eq!(deg_to_rad(180.0), std::f64::consts::PI);
        // 0.5·π/180 evaluated with mpmath at 30 digits.
        assert_abs_diff_eq!(deg_to_rad(0.5), 0.008_726_646_259_971_648, epsilon = 1e-17);
    }

    #[test]
    fn axis_rotations_follow_sign_layout() {
        assert_eq!(rotation_x(0.0), Matrix3::identity());
        let half_pi = std::f64::consts::FRAC_PI_2;
        let v = rotation_z(half_pi) * Vector3::new(1.0, 0.0, 0.0);
        assert_abs_diff_eq!(v, Vector3::new(0.0, -1.0, 0.0), epsilon = 1e-15);
        let v = rotation_y(half_pi) * Vector3::new(0.0, 0.0, 1.0);
        assert_abs_diff_eq!(v, Vector3::new(-1.0, 0.0, 0.0), epsilon = 1e-15);
        let rx = rotation_x(0.3);
        assert!(rx[(1, 2)] > 0.0 && rx[(2, 1)] < 0.0);
    }

    #[test]
    fn composition_order_is_x_then_y_then_z() {
        let pose = PoseHypothesis::new([10.0, -5.0, 20.0], Vector3::zeros());
        let r = compose_rotation(&pose);
        let (x, y, z) = (deg_to_rad(10.0), deg_to_rad(-5.0), deg_to_rad(20.0));
        assert_abs_diff_eq!(r, rotation_x(x) * rotation_y(y) * rotation_z(z), epsilon = 0.0);
        let reversed = rotation_z(z) * rotation_y(y) * rotation_x(x);
        assert!((r - reversed).abs().max() > 1e-3);
        assert_abs_diff_eq!(r.transpose() * r, Matrix3::identity(), epsilon = 1e-15);
        assert_abs_diff_eq!(r.determinant(), 1.0, epsilon = 1e-15);

        let only_x = PoseHypothesis::new([33.0, 0.0, 0.0], Vector3::zeros());
        assert_eq!(compose_rotation(&only_x), rotation_x(deg_to_rad(33.0)));
    }

    #[test]
    #[allow(clippy::excessive_precision)]
    fn composed_rotation_matches_extended_precision_product() {
        // R_x(10°)·R_y(-5°)·R_z(20°) multiplied out with mpmath at 30 digits.
        let expected = Matrix3::new(
            0.936116806662859125,
            0.34071865342161009927,
            0.087155742747658173558,
            -0.35104580656971040643,
            0.92024029646219437085,
            0.17298739392508946795,
            -0.021264194627417605876,
            -0.19253206480411868035,
            0.98106026219040690952,
        );
        let r = compose_rotation(&PoseHypothesis::new([10.0, -5.0, 20.0], Vector3::zeros()));
        assert_abs_diff_eq!(r, expected, epsilon = 1e-15);
    }

    #[test]
    fn homogeneous_lift_and_errors() {
        let c = px(vec![[[320.0, 240.0], [1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]]);
        let h = to_homogeneous(&c).unwrap();
        assert_eq!(h.frame(), Frame::NormalizedHomogeneous);
        assert_eq!(h.buttons()[0].corners[0], Vector3::new(320.0, 240.0, 1.0));

        let two = px(vec![[[0.0; 2]; 4], [[1.0; 2]; 4]]);
        let h = to_homogeneous(&two).unwrap();
        assert_eq!(h.corner_count(), 8);
        assert!(h.buttons().iter().all(|b| b.corners.iter().all(|p| p.z == 1.0)));

        assert!(matches!(CornerSet::from_pixels(vec![]), Err(Error::EmptyCornerSet)));
        assert!(matches!(to_homogeneous(&h), Err(Error::WrongFrame { .. })));
    }

    #[test]
    fn back_projection_and_projection() {
        let k = Intrinsics::default();
        let c = px(vec![[[320.0, 240.0], [640.0, 240.0], [0.0, 0.0], [17.5, 99.25]]]);
        let d = pixels_to_spatial(&c, &k).unwrap();
        assert_eq!(d.buttons()[0].corners[0], Vector3::new(0.0, 0.0, 1.0));
        assert_eq!(d.buttons()[0].corners[1], Vector3::new(1.0, 0.0, 1.0));
        let g = project(&d, &k).unwrap();
        assert_eq!(g.buttons()[0].corners[0], Vector3::new(320.0, 240.0, 1.0));
        assert_eq!(g.buttons()[0].corners[1], Vector3::new(640.0, 240.0, 1.0));
        let back = to_pixels(&g).unwrap();
        for (a, b) in back.xy().iter().zip(c.xy()) {
            assert_abs_diff_eq!(a[0], b[0], epsilon = 1e-9);
            assert_abs_diff_eq!(a[1], b[1], epsilon = 1e-9);
        }
    }

    #[test]
    fn intrinsics_reject_bad_values() {
        assert!(Intrinsics::new(0.0, 320.0, 320.0, 240.0).is_err());
        assert!(Intrinsics::new(320.0, -1.0, 320.0, 240.0).is_err());
        assert!(Intrinsics::new(320.0, 320.0, f64::NAN, 240.0).is_err());
        let k = Intrinsics::new(500.0, 450.0, 311.0, 199.0).unwrap();
        assert_abs_diff_eq!(k.matrix() * k.inverse_matrix(), Matrix3::identity(), epsilon = 1e-12);
    }

    #[test]
    fn apply_pose_examples() {
        let d = CornerSet::new(
            Frame::Spatial,
            vec![Button {
                label: None,
                corners: [
                    Vector3::new(0.0, 0.0, 1.0),
                    Vector3::new(0.2, 0.0, 1.0),
                    Vector3::new(0.2, 0.3, 1.0),
                    Vector3::new(0.0, 0.3, 1.0),
                ],
            }],
        )
        .unwrap();
        assert_eq!(apply_pose(&d, &PoseHypothesis::identity()).unwrap(), d);

        let shifted = apply_pose(&d, &PoseHypothesis::new([0.0; 3], Vector3::new(0.1, 0.0, 0.0))).unwrap();
        assert_eq!(shifted.first_corner(), Vector3::new(0.1, 0.0, 1.0));

        let tilted = apply_pose(&d, &PoseHypothesis::new([0.0, 10.0, 0.0], Vector3::zeros())).unwrap();
        let p = tilted.first_corner();
        assert_abs_diff_eq!(p.x, -deg_to_rad(10.0).tan(), epsilon = 1e-15);
        assert_eq!(p.y, 0.0);
        assert_eq!(p.z, 1.0);

        let behind = PoseHypothesis::new([0.0; 3], Vector3::new(0.0, 0.0, -1.0));
        assert!(matches!(apply_pose(&d, &behind), Err(Error::DegenerateDepth { .. })));
    }

    #[test]
    fn first_corner_translation() {
        let mk = |p: [f64; 3]| {
            CornerSet::new(
                Frame::Spatial,
                vec![Button {
                    label: None,
                    corners: [Vector3::new(p[0], p[1], p[2]); 4],
                }],
            )
            .unwrap()
        };
        let i = Matrix3::identity();
        let t = translation_align_first_corner(&mk([0.2, 0.1, 1.0]), &mk([0.2, 0.1, 1.0]), &i);
        assert_eq!(t.unwrap(), Vector3::zeros());
        let t = translation_align_first_corner(&mk([0.2, 0.1, 1.0]), &mk([0.0, 0.0, 1.0]), &i);
        assert_abs_diff_eq!(t.unwrap(), Vector3::new(-0.2, -0.1, 0.0), epsilon = 1e-15);
        let rz = rotation_z(std::f64::consts::FRAC_PI_2);
        let t = translation_align_first_corner(&mk([1.0, 0.0, 1.0]), &mk([0.0, 0.0, 1.0]), &rz);
        assert_abs_diff_eq!(t.unwrap(), Vector3::new(0.0, 1.0, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn identity_pose_gives_identity_homography() {
        let h = pose_to_homography(&PoseHypothesis::identity(), &Intrinsics::default()).unwrap();
        assert_abs_diff_eq!(h.0, Matrix3::identity(), epsilon = 1e-12);
    }

    #[test]
    fn z_rotation_homography_is_similarity_about_principal_point() {
        let k = Intrinsics::default();
        let pose = PoseHypothesis::new([0.0, 0.0, 25.0], Vector3::zeros());
        let h = pose_to_homography(&pose, &k).unwrap();
        let c = h.apply([320.0, 240.0]).unwrap();
        assert_abs_diff_eq!(c[0], 320.0, epsilon = 1e-9);
        assert_abs_diff_eq!(c[1], 240.0, epsilon = 1e-9);
        let m = h.0;
        assert_abs_diff_eq!(m[(2, 0)], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m[(2, 1)], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m[(0, 0)], m[(1, 1)], epsilon = 1e-15);
        assert_abs_diff_eq!(m[(0, 1)], -m[(1, 0)], epsilon = 1e-15);
    }

    #[test]
    fn singular_pose_is_rejected() {
        // R + T·e3ᵀ with T = -R·e3 zeroes the third column.
        let mut pose = PoseHypothesis::new([12.0, 7.0, -3.0], Vector3::zeros());
        pose.t = -(pose.rotation_matrix() * Vector3::z());
        assert!(matches!(
            pose_to_homography(&pose, &Intrinsics::default()),
            Err(Error::DegeneratePose { .. })
        ));
    }

    #[test]
    fn anchored_pose_pins_the_anchor() {
        let k = Intrinsics::default();
        let pose = PoseHypothesis::anchored([12.5, -3.0, 8.0], [100.0, 50.0], [280.0, 180.0], &k);
        let h = pose_to_homography(&pose, &k).unwrap();
        let q = h.apply([100.0, 50.0]).unwrap();
        assert_abs_diff_eq!(q[0], 280.0, epsilon = 1e-9);
        assert_abs_diff_eq!(q[1], 180.0, epsilon = 1e-9);
    }
}
