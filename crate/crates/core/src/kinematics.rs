//! Denavit-Hartenberg limb chains: forward geometry, bone frames, and the
//! Jacobian of a bone-frame point with respect to the joint angles.
//!
//! The standard (distal) DH convention is used. The elementary transform for
//! a row `(a, α, d, θ_offset)` at joint angle `q` is
//!
//! ```text
//! A(q) = RotZ(q + θ_offset) · TransZ(d) · TransX(a) · RotX(α)
//! ```
//!
//! Each limb has three revolute joints: two at the shoulder and one at the
//! elbow, with no segment between joints 1 and 2 (row 1 has `a = d = 0`).
//! Bone `B1` is the frame after the first two rows, `B2` after all three, so
//! `m_M_B1` depends on `(q1, q2)` only and `m_M_B2` on `(q1, q2, q3)`.

use crate::geometry::{Mat3, RigidTransform, Vec3};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KinematicsError {
    #[error("joint {joint} value {value} outside limits [{lo}, {hi}]")]
    JointLimitViolation {
        joint: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("invalid chain: {0}")]
    InvalidChain(String),
}

/// One Denavit-Hartenberg row.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DHRow {
    /// Link length, meters.
    pub a: f64,
    /// Link twist, radians.
    pub alpha: f64,
    /// Link offset, meters.
    pub d: f64,
    /// Constant joint-angle offset, radians.
    #[serde(default)]
    pub theta_offset: f64,
}

/// The two sampled bones of a limb: upper segment and lower segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LimbBone {
    B1,
    B2,
}

/// Joint angles of one limb, radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointConfig {
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
}

impl JointConfig {
    pub fn new(q1: f64, q2: f64, q3: f64) -> Self {
        Self { q1, q2, q3 }
    }

    pub fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.q1, self.q2, self.q3]
    }

    pub fn from_array(q: [f64; 3]) -> Self {
        Self::new(q[0], q[1], q[2])
    }

    /// Largest absolute per-joint difference, radians.
    pub fn max_abs_diff(&self, other: &JointConfig) -> f64 {
        let a = self.to_array();
        let b = other.to_array();
        (0..3).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max)
    }
}

/// Default joint limits when a model file omits them.
pub const DEFAULT_JOINT_LIMITS: (f64, f64) =
    (-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2);

/// A three-joint limb chain rooted in the object frame.
#[derive(Debug, Clone, PartialEq)]
pub struct LimbChain {
    /// `o_M_m`: limb base frame expressed in the object frame.
    pub base_in_object: RigidTransform,
    pub rows: [DHRow; 3],
    /// `(lo, hi)` per joint, radians.
    pub joint_limits: [(f64, f64); 3],
}

impl LimbChain {
    pub fn new(base_in_object: RigidTransform, rows: [DHRow; 3]) -> Self {
        Self {
            base_in_object,
            rows,
            joint_limits: [DEFAULT_JOINT_LIMITS; 3],
        }
    }

    pub fn validate(&self) -> Result<(), KinematicsError> {
        for (i, row) in self.rows.iter().enumerate() {
            if !(row.a.is_finite()
                && row.alpha.is_finite()
                && row.d.is_finite()
                && row.theta_offset.is_finite())
            {
                return Err(KinematicsError::InvalidChain(format!(
                    "row {i} has non-finite values"
                )));
            }
            if row.a < 0.0 {
                return Err(KinematicsError::InvalidChain(format!(
                    "row {i} has negative link length"
                )));
            }
        }
        if self.rows[0].a != 0.0 || self.rows[0].d != 0.0 {
            return Err(KinematicsError::InvalidChain(
                "row 1 must have a = d = 0 (no segment between joints 1 and 2)".into(),
            ));
        }
        for (i, (lo, hi)) in self.joint_limits.iter().enumerate() {
            if !(lo < hi) {
                return Err(KinematicsError::InvalidChain(format!(
                    "joint {i} limits [{lo}, {hi}] are not ordered"
                )));
            }
        }
        Ok(())
    }

    pub fn check_limits(&self, q: &JointConfig) -> Result<(), KinematicsError> {
        for (joint, (&value, &(lo, hi))) in
            q.to_array().iter().zip(self.joint_limits.iter()).enumerate()
        {
            if value < lo || value > hi {
                return Err(KinematicsError::JointLimitViolation {
                    joint: joint + 1,
                    value,
                    lo,
                    hi,
                });
            }
        }
        Ok(())
    }

    /// Clamp a configuration to the joint limits; returns which joints moved.
    pub fn clamp(&self, q: &JointConfig) -> (JointConfig, [bool; 3]) {
        let mut out = q.to_array();
        let mut clamped = [false; 3];
        for i in 0..3 {
            let (lo, hi) = self.joint_limits[i];
            let c = out[i].clamp(lo, hi);
            clamped[i] = c != out[i];
            out[i] = c;
        }
        (JointConfig::from_array(out), clamped)
    }
}

/// Elementary DH transform for one row at joint angle `q`.
pub fn dh_transform(row: &DHRow, q: f64) -> RigidTransform {
    let theta = q + row.theta_offset;
    let (st, ct) = theta.sin_cos();
    let (sa, ca) = row.alpha.sin_cos();
    // RotZ(θ)·TransZ(d)·TransX(a)·RotX(α) in closed form.
    let rotation = Mat3::new(
        ct, -st * ca, st * sa, //
        st, ct * ca, -ct * sa, //
        0.0, sa, ca,
    );
    let translation = Vec3::new(row.a * ct, row.a * st, row.d);
    RigidTransform::new(rotation, translation)
}

/// Forward geometry: bone frames `(m_M_B1, m_M_B2)` in the limb base frame.
pub fn forward(
    chain: &LimbChain,
    q: &JointConfig,
) -> Result<(RigidTransform, RigidTransform), KinematicsError> {
    chain.check_limits(q)?;
    Ok(forward_unchecked(chain, q))
}

/// Forward geometry without the joint-limit check (used inside solvers where
/// intermediate iterates may stray before clamping).
pub fn forward_unchecked(chain: &LimbChain, q: &JointConfig) -> (RigidTransform, RigidTransform) {
    let a1 = dh_transform(&chain.rows[0], q.q1);
    let a2 = dh_transform(&chain.rows[1], q.q2);
    let a3 = dh_transform(&chain.rows[2], q.q3);
    let m_b1 = a1.compose(&a2);
    let m_b2 = m_b1.compose(&a3);
    (m_b1, m_b2)
}

/// Transform of a given bone frame in the limb base frame.
pub fn bone_transform(chain: &LimbChain, q: &JointConfig, bone: LimbBone) -> RigidTransform {
    let (b1, b2) = forward_unchecked(chain, q);
    match bone {
        LimbBone::B1 => b1,
        LimbBone::B2 => b2,
    }
}

/// Express a bone-frame point in the limb base frame.
pub fn bone_point_to_base(
    chain: &LimbChain,
    q: &JointConfig,
    bone: LimbBone,
    p_in_bone: &Vec3,
) -> Result<Vec3, KinematicsError> {
    chain.check_limits(q)?;
    Ok(bone_transform(chain, q, bone).apply(p_in_bone))
}

/// ∂(base-frame point)/∂q for a point rigidly attached to `bone`.
///
/// Column k is zero when the bone does not depend on joint k; for `B1` the
/// third column is exactly zero. Computed analytically from the derivative
/// of each elementary DH transform (product rule), not from the geometric
/// axis formula, so tests can check both that formula and finite
/// differences independently.
pub fn jacobian(chain: &LimbChain, q: &JointConfig, bone: LimbBone, p_in_bone: &Vec3) -> Mat3 {
    let n = match bone {
        LimbBone::B1 => 2,
        LimbBone::B2 => 3,
    };
    let qs = q.to_array();
    let transforms: Vec<RigidTransform> = (0..n)
        .map(|i| dh_transform(&chain.rows[i], qs[i]))
        .collect();

    // Suffix points: x_k = A_{k+1}··A_n · p, with x_n = p.
    let mut suffix = vec![*p_in_bone; n + 1];
    for k in (0..n).rev() {
        suffix[k] = transforms[k].apply(&suffix[k + 1]);
    }

    let mut j = Mat3::zeros();
    let mut prefix = RigidTransform::identity();
    for k in 0..n {
        let row = &chain.rows[k];
        let theta = qs[k] + row.theta_offset;
        let (st, ct) = theta.sin_cos();
        let (sa, ca) = row.alpha.sin_cos();
        // d/dθ of RotZ(θ)·TransZ(d)·TransX(a)·RotX(α): rotation and
        // translation parts differentiated in closed form.
        let d_rot = Mat3::new(
            -st, -ct * ca, ct * sa, //
            ct, -st * ca, st * sa, //
            0.0, 0.0, 0.0,
        );
        let d_trans = Vec3::new(-row.a * st, row.a * ct, 0.0);
        // x after the constant tail A_{k+1}..A_n.
        let x_tail = suffix[k + 1];
        let col = prefix.rotation() * (d_rot * x_tail + d_trans);
        j.set_column(k, &col);
        prefix = prefix.compose(&transforms[k]);
    }
    j
}
