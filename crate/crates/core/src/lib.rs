//! puppetmap — marker-less tracking of an articulated puppet in depth images,
//! and the projector-side machinery to video-map a virtual suit onto it.
//!
//! The pipeline stages are:
//!
//! 1. **geometry** – SE(3) transforms, Rodrigues conversions, pinhole projection.
//! 2. **kinematics** – Denavit-Hartenberg limb chains, bone frames, Jacobians.
//! 3. **model** – the articulated puppet description (trunk mesh, four 3-joint
//!    limbs, bone sampling skeleton) and its file format.
//! 4. **render** – software Z-buffer rasterizer and the synthetic depth-sensor
//!    simulator that stands in for real hardware.
//! 5. **silhouette** – silhouette sample extraction from the Z-buffer and
//!    oriented-contour matching into the sensor frame.
//! 6. **registration** – rigid 3D-3D pose estimation (closed-form + robust IRLS).
//! 7. **joints** – per-limb joint-angle estimation by damped Gauss-Newton.
//! 8. **calibration** – projector calibration from 2D-3D correspondences and the
//!    color-coded dot pattern codec used to collect them.
//! 9. **mapping** – projector-frame rendering transform and the mapping
//!    correctness pixel metric.
//! 10. **pipeline** – the closed-loop tracker, scenario scripting and metrics.

pub mod calibration;
pub mod geometry;
pub mod joints;
pub mod kinematics;
pub mod mapping;
pub mod model;
pub mod pipeline;
pub mod registration;
pub mod render;
pub mod silhouette;
