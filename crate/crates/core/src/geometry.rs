//! SE(3) transforms, Rodrigues conversions, and the pinhole camera model.
//!
//! Rotations are stored as 3×3 matrices. Composition chains drift, so
//! [`RigidTransform::compose`] re-orthonormalizes by polar decomposition
//! whenever `‖RᵀR − I‖∞` exceeds [`ORTHONORMALITY_TOL`].
//!
//! Conventions: a `RigidTransform` named `a_M_b` maps coordinates expressed
//! in frame `b` into frame `a`. Pixel coordinates are continuous; pixel
//! `(u, v)` samples the image plane exactly at `(u, v)`. Depths are
//! camera-space z in meters.

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

/// 3D point or vector, in meters.
pub type Vec3 = Vector3<f64>;
/// 3×3 matrix.
pub type Mat3 = Matrix3<f64>;

/// Orthonormality drift above which rotations are renormalized.
pub const ORTHONORMALITY_TOL: f64 = 1e-9;

/// Below this angle the Rodrigues formulas switch to series expansions, and
/// within this distance of π the log map switches to the symmetric branch.
const SMALL_ANGLE: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    /// A point at or behind the optical center cannot be projected, and a
    /// non-positive depth cannot be back-projected.
    #[error("non-positive depth {0}")]
    NonPositiveDepth(f64),
}

/// Continuous image coordinates in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pixel {
    pub u: f64,
    pub v: f64,
}

impl Pixel {
    pub fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    /// Euclidean distance to another pixel.
    pub fn distance(&self, other: &Pixel) -> f64 {
        ((self.u - other.u).powi(2) + (self.v - other.v).powi(2)).sqrt()
    }
}

/// Pinhole intrinsics: focal lengths in pixels and the principal point.
///
/// The principal point is unconstrained; a projector mounted off-axis can
/// legitimately have a negative `v0`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CameraIntrinsics {
    pub alpha_u: f64,
    pub alpha_v: f64,
    pub u0: f64,
    pub v0: f64,
}

impl CameraIntrinsics {
    /// Panics if either focal length is non-positive; file loaders validate
    /// before constructing.
    pub fn new(alpha_u: f64, alpha_v: f64, u0: f64, v0: f64) -> Self {
        assert!(
            alpha_u > 0.0 && alpha_v > 0.0,
            "focal lengths must be positive"
        );
        Self {
            alpha_u,
            alpha_v,
            u0,
            v0,
        }
    }

    /// Perspective projection of a camera-frame point.
    pub fn project(&self, p: &Vec3) -> Result<Pixel, GeometryError> {
        if p.z <= 0.0 {
            return Err(GeometryError::NonPositiveDepth(p.z));
        }
        Ok(Pixel {
            u: self.alpha_u * p.x / p.z + self.u0,
            v: self.alpha_v * p.y / p.z + self.v0,
        })
    }

    /// Inverse perspective projection of a pixel at a known depth.
    pub fn back_project(&self, px: Pixel, depth: f64) -> Result<Vec3, GeometryError> {
        if depth <= 0.0 {
            return Err(GeometryError::NonPositiveDepth(depth));
        }
        Ok(Vec3::new(
            depth * (px.u - self.u0) / self.alpha_u,
            depth * (px.v - self.v0) / self.alpha_v,
            depth,
        ))
    }
}

/// 6-vector pose representation: translation plus angle-times-axis rotation.
///
/// Internally the translation is meters. Config files store the six numbers
/// as `[tX tY tZ θwX θwY θwZ]` with translation in millimeters; use
/// [`PoseVector::to_config_array`] / [`PoseVector::from_config_array`] at
/// that boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseVector {
    /// Translation, meters.
    pub translation: Vec3,
    /// Rotation as θ·w, radians times unit axis.
    pub theta_w: Vec3,
}

impl PoseVector {
    pub fn new(translation: Vec3, theta_w: Vec3) -> Self {
        Self {
            translation,
            theta_w,
        }
    }

    pub fn zero() -> Self {
        Self::new(Vec3::zeros(), Vec3::zeros())
    }

    /// Rotation angle θ in radians.
    pub fn angle(&self) -> f64 {
        self.theta_w.norm()
    }

    /// Rodrigues exponential: build the rigid transform for this pose.
    pub fn to_transform(&self) -> RigidTransform {
        RigidTransform {
            rotation: rodrigues_exp(&self.theta_w),
            translation: self.translation,
        }
    }

    /// `[tX_mm, tY_mm, tZ_mm, θwX, θwY, θwZ]` — the config-file layout.
    pub fn to_config_array(&self) -> [f64; 6] {
        [
            self.translation.x * 1e3,
            self.translation.y * 1e3,
            self.translation.z * 1e3,
            self.theta_w.x,
            self.theta_w.y,
            self.theta_w.z,
        ]
    }

    /// Parse the config-file layout (translation in millimeters).
    pub fn from_config_array(a: [f64; 6]) -> Self {
        Self {
            translation: Vec3::new(a[0] * 1e-3, a[1] * 1e-3, a[2] * 1e-3),
            theta_w: Vec3::new(a[3], a[4], a[5]),
        }
    }
}

/// A frame change: rotation followed by translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    rotation: Mat3,
    translation: Vec3,
}

impl RigidTransform {
    /// Builds a transform, renormalizing the rotation if it drifted beyond
    /// [`ORTHONORMALITY_TOL`].
    pub fn new(rotation: Mat3, translation: Vec3) -> Self {
        let rotation = if orthonormality_drift(&rotation) > ORTHONORMALITY_TOL {
            orthonormalize(&rotation)
        } else {
            rotation
        };
        Self {
            rotation,
            translation,
        }
    }

    pub fn identity() -> Self {
        Self {
            rotation: Mat3::identity(),
            translation: Vec3::zeros(),
        }
    }

    pub fn from_translation(t: Vec3) -> Self {
        Self {
            rotation: Mat3::identity(),
            translation: t,
        }
    }

    pub fn rotation(&self) -> &Mat3 {
        &self.rotation
    }

    pub fn translation(&self) -> &Vec3 {
        &self.translation
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        RigidTransform::new(
            self.rotation * other.rotation,
            self.rotation * other.translation + self.translation,
        )
    }

    pub fn invert(&self) -> RigidTransform {
        let rt = self.rotation.transpose();
        RigidTransform {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// Apply to a point: `R·p + t`.
    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    /// Rotate a direction vector (no translation).
    pub fn apply_vector(&self, v: &Vec3) -> Vec3 {
        self.rotation * v
    }

    /// Rodrigues logarithm: recover the 6-vector pose.
    pub fn to_pose(&self) -> PoseVector {
        PoseVector {
            translation: self.translation,
            theta_w: rodrigues_log(&self.rotation),
        }
    }

    /// Rotation angle (radians) between this transform and another.
    pub fn rotation_angle_to(&self, other: &RigidTransform) -> f64 {
        let rel = self.rotation.transpose() * other.rotation;
        let c = ((rel.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
        c.acos()
    }
}

fn skew(w: &Vec3) -> Mat3 {
    Mat3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

/// Rotation matrix from an angle-times-axis vector.
fn rodrigues_exp(theta_w: &Vec3) -> Mat3 {
    let theta = theta_w.norm();
    let k = skew(theta_w);
    let (a, b) = if theta < SMALL_ANGLE {
        // sinθ/θ and (1−cosθ)/θ² by series, stable at θ → 0.
        let t2 = theta * theta;
        (1.0 - t2 / 6.0, 0.5 - t2 / 24.0)
    } else {
        let t2 = theta * theta;
        (theta.sin() / theta, (1.0 - theta.cos()) / t2)
    };
    Mat3::identity() + a * k + b * (k * k)
}

/// Angle-times-axis vector from a rotation matrix. θ ∈ [0, π].
fn rodrigues_log(r: &Mat3) -> Vec3 {
    let c = ((r.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
    let theta = c.acos();
    // Antisymmetric part carries sinθ·w.
    let vee = Vec3::new(
        r[(2, 1)] - r[(1, 2)],
        r[(0, 2)] - r[(2, 0)],
        r[(1, 0)] - r[(0, 1)],
    ) * 0.5;

    if theta < SMALL_ANGLE {
        // θw ≈ vee to O(θ³).
        return vee;
    }
    if theta > std::f64::consts::PI - SMALL_ANGLE {
        // Near π the antisymmetric part vanishes; use wwᵀ = (R + I)/2.
        let b = (r + Mat3::identity()) * 0.5;
        let mut k = 0;
        for i in 1..3 {
            if b[(i, i)] > b[(k, k)] {
                k = i;
            }
        }
        let wk = b[(k, k)].max(0.0).sqrt();
        let mut w = Vec3::zeros();
        w[k] = wk;
        for i in 0..3 {
            if i != k {
                w[i] = b[(i, k)] / wk;
            }
        }
        // The vanishing antisymmetric part still fixes the sign when θ < π.
        if vee.dot(&w) < 0.0 {
            w = -w;
        }
        return w.normalize() * theta;
    }
    vee * (theta / theta.sin())
}

/// `‖RᵀR − I‖∞`.
fn orthonormality_drift(r: &Mat3) -> f64 {
    (r.transpose() * r - Mat3::identity()).amax()
}

/// Nearest rotation matrix by polar decomposition (SVD), det forced to +1.
fn orthonormalize(m: &Mat3) -> Mat3 {
    let svd = m.svd(true, true);
    let u = svd.u.expect("svd u");
    let v_t = svd.v_t.expect("svd v_t");
    let d = (u * v_t).determinant();
    let fix = Mat3::from_diagonal(&Vec3::new(1.0, 1.0, d.signum()));
    u * fix * v_t
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn table1_depth() -> CameraIntrinsics {
        CameraIntrinsics::new(359.90, 359.21, 239.80, 208.67)
    }

    fn table1_color() -> CameraIntrinsics {
        CameraIntrinsics::new(1065.92, 1063.69, 944.65, 549.32)
    }

    #[test]
    fn project_on_axis_hits_principal_point() {
        let px = table1_depth().project(&Vec3::new(0.0, 0.0, 1.0)).unwrap();
        assert_relative_eq!(px.u, 239.80, epsilon = 1e-12);
        assert_relative_eq!(px.v, 208.67, epsilon = 1e-12);
    }

    #[test]
    fn project_hand_arithmetic() {
        let px = table1_depth().project(&Vec3::new(0.1, 0.2, 1.0)).unwrap();
        assert_relative_eq!(px.u, 275.79, epsilon = 1e-9);
        assert_relative_eq!(px.v, 280.512, epsilon = 1e-9);
    }

    #[test]
    fn project_behind_camera_fails() {
        let err = table1_depth()
            .project(&Vec3::new(0.0, 0.0, -1.0))
            .unwrap_err();
        assert_eq!(err, GeometryError::NonPositiveDepth(-1.0));
    }

    #[test]
    fn back_project_principal_point_is_on_axis() {
        let p = table1_depth()
            .back_project(Pixel::new(239.80, 208.67), 2.0)
            .unwrap();
        assert_relative_eq!(p.x, 0.0, epsilon = 1e-12);
        assert_relative_eq!(p.y, 0.0, epsilon = 1e-12);
        assert_relative_eq!(p.z, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn back_project_hand_arithmetic() {
        // One focal length to the right of the color principal point at 1 m.
        let p = table1_color()
            .back_project(Pixel::new(944.65 + 1065.92, 549.32), 1.0)
            .unwrap();
        assert_relative_eq!(p.x, 1.0, epsilon = 1e-12);
        assert_relative_eq!(p.y, 0.0, epsilon = 1e-12);
        assert_relative_eq!(p.z, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn back_project_rejects_non_positive_depth() {
        assert!(table1_depth()
            .back_project(Pixel::new(10.0, 10.0), 0.0)
            .is_err());
    }

    #[test]
    fn zero_pose_is_identity() {
        let m = PoseVector::zero().to_transform();
        assert_relative_eq!(*m.rotation(), Mat3::identity(), epsilon = 1e-15);
        assert_relative_eq!(*m.translation(), Vec3::zeros(), epsilon = 1e-15);
    }

    #[test]
    fn quarter_turn_about_z_maps_x_to_y() {
        let m = PoseVector::new(Vec3::zeros(), Vec3::new(0.0, 0.0, PI / 2.0)).to_transform();
        let y = m.apply(&Vec3::new(1.0, 0.0, 0.0));
        assert_relative_eq!(y, Vec3::new(0.0, 1.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn log_near_zero_and_near_pi() {
        for &theta in &[1e-9, 1e-8, 1e-7, PI - 1e-7, PI - 1e-9] {
            let w = Vec3::new(1.0, -2.0, 0.5).normalize() * theta;
            let r = rodrigues_exp(&w);
            let back = rodrigues_log(&r);
            assert_relative_eq!(back, w, epsilon = 1e-7, max_relative = 1e-6);
        }
    }

    #[test]
    fn compose_with_inverse_is_identity() {
        let m = PoseVector::new(Vec3::new(0.1, -0.4, 2.0), Vec3::new(0.3, 0.2, -0.9))
            .to_transform();
        let id = m.compose(&m.invert());
        assert_relative_eq!(*id.rotation(), Mat3::identity(), epsilon = 1e-12);
        assert_relative_eq!(*id.translation(), Vec3::zeros(), epsilon = 1e-12);
    }

    #[test]
    fn apply_identity_is_noop() {
        let p = Vec3::new(0.3, -0.2, 1.7);
        assert_eq!(RigidTransform::identity().apply(&p), p);
    }

    #[test]
    fn composition_matches_pointwise_application() {
        // d_M_o = dstar_M_d0 ∘ d0_M_o checked against applying both in sequence.
        let delta = PoseVector::new(Vec3::new(0.02, -0.01, 0.005), Vec3::new(0.1, 0.0, -0.05))
            .to_transform();
        let prev = PoseVector::new(Vec3::new(0.0, 0.1, 2.0), Vec3::new(0.0, 0.7, 0.0))
            .to_transform();
        let composed = delta.compose(&prev);
        let p = Vec3::new(0.12, -0.33, 0.4);
        assert_relative_eq!(
            composed.apply(&p),
            delta.apply(&prev.apply(&p)),
            epsilon = 1e-12
        );
    }

    #[test]
    fn long_composition_chain_stays_orthonormal() {
        let step = PoseVector::new(Vec3::new(0.001, 0.002, -0.001), Vec3::new(0.02, -0.015, 0.01))
            .to_transform();
        let mut acc = RigidTransform::identity();
        for _ in 0..1000 {
            acc = acc.compose(&step);
        }
        assert!(orthonormality_drift(acc.rotation()) < 1e-6);
        assert_relative_eq!(acc.rotation().determinant(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn orthonormalize_recovers_rotation() {
        let r = rodrigues_exp(&Vec3::new(0.4, -0.2, 0.8));
        let dirty = r * 1.0001; // uniform scale drift
        let clean = orthonormalize(&dirty);
        assert_relative_eq!(clean, r, epsilon = 1e-9);
    }

    #[test]
    fn config_array_uses_millimeters() {
        let pose = PoseVector::from_config_array([-55.64, 0.95, 7.04, -0.02, -0.01, -0.00]);
        assert_relative_eq!(pose.translation.x, -0.05564, epsilon = 1e-12);
        let back = pose.to_config_array();
        assert_relative_eq!(back[0], -55.64, epsilon = 1e-9);
        assert_relative_eq!(back[3], -0.02, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn pose_transform_round_trip(
            wx in -1.0f64..1.0, wy in -1.0f64..1.0, wz in -1.0f64..1.0,
            theta in 1e-6f64..(PI - 1e-6),
            tx in -2.0f64..2.0, ty in -2.0f64..2.0, tz in -2.0f64..2.0,
        ) {
            let axis = Vec3::new(wx, wy, wz);
            prop_assume!(axis.norm() > 1e-3);
            let pose = PoseVector::new(Vec3::new(tx, ty, tz), axis.normalize() * theta);
            let back = pose.to_transform().to_pose();
            prop_assert!((back.theta_w - pose.theta_w).norm() < 1e-9);
            prop_assert!((back.translation - pose.translation).norm() < 1e-12);
        }

        #[test]
        fn project_back_project_round_trip(
            x in -1.0f64..1.0, y in -1.0f64..1.0, z in 0.2f64..5.0,
        ) {
            let gamma = CameraIntrinsics::new(359.90, 359.21, 239.80, 208.67);
            let p = Vec3::new(x, y, z);
            let px = gamma.project(&p).unwrap();
            let back = gamma.back_project(px, z).unwrap();
            prop_assert!((back - p).norm() < 1e-12);
        }

        #[test]
        fn back_project_project_round_trip(
            u in -100.0f64..600.0, v in -100.0f64..500.0, z in 0.2f64..5.0,
        ) {
            let gamma = CameraIntrinsics::new(359.90, 359.21, 239.80, 208.67);
            let p = gamma.back_project(Pixel::new(u, v), z).unwrap();
            let px = gamma.project(&p).unwrap();
            prop_assert!((px.u - u).abs() < 1e-9 && (px.v - v).abs() < 1e-9);
        }
    }
}
