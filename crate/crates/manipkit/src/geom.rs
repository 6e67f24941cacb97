//! SE(3) primitives, Euler conversions, and direction/rotation sampling.
//!
//! Rotations are stored as unit quaternions and renormalized after every
//! construction and composition. The Euler convention is intrinsic
//! roll-pitch-yaw: `R = Rz(yaw) * Ry(pitch) * Rx(roll)` acting on column
//! vectors. Rotation-angle sweeps over a semicircle use the half-open
//! interval `[0, pi)` so the 0 and pi gripper rolls are never both emitted.

use nalgebra::{Quaternion, Unit, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Golden-ratio conjugate used by the Fibonacci lattice.
pub const LATTICE_PHI: f64 = 0.618_033_988_749_894_9; // (sqrt(5) - 1) / 2

/// Rigid transform in SE(3): unit-quaternion rotation plus translation in
/// meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub rotation: UnitQuaternion<f64>,
    pub translation: Vector3<f64>,
}

impl Pose {
    pub fn identity() -> Self {
        Pose {
            rotation: UnitQuaternion::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn new(rotation: UnitQuaternion<f64>, translation: Vector3<f64>) -> Self {
        Pose {
            rotation: renormalize(rotation),
            translation,
        }
    }

    /// From quaternion components `(w, x, y, z)` and a translation; the
    /// quaternion is normalized on entry.
    pub fn from_parts(w: f64, x: f64, y: f64, z: f64, translation: Vector3<f64>) -> Result<Self> {
        let q = Quaternion::new(w, x, y, z);
        if !q.coords.iter().all(|c| c.is_finite()) || !translation.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidArgument("non-finite pose component".into()));
        }
        let norm = q.norm();
        if norm < 1e-9 {
            return Err(Error::InvalidArgument("zero-norm quaternion".into()));
        }
        // Keep already-unit inputs bit-identical so parse/serialize cycles
        // are stable.
        let rotation = if (norm - 1.0).abs() <= 1e-9 {
            Unit::new_unchecked(q)
        } else {
            UnitQuaternion::from_quaternion(q)
        };
        Ok(Pose {
            rotation,
            translation,
        })
    }

    /// `self ∘ other`: apply `other` in the local frame of `self`.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose {
            rotation: renormalize(self.rotation * other.rotation),
            translation: self.translation + self.rotation * other.translation,
        }
    }

    pub fn inverse(&self) -> Pose {
        let inv_rot = self.rotation.inverse();
        Pose {
            rotation: inv_rot,
            translation: -(inv_rot * self.translation),
        }
    }

    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    pub fn transform_vector(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * v
    }

    /// Local +z axis; the approach axis under the grasp/end-effector
    /// convention used throughout this crate.
    pub fn z_axis(&self) -> Vector3<f64> {
        self.rotation * Vector3::z()
    }

    /// Rotation-angle plus translation distance to another pose. Used by
    /// tests asserting two poses agree within a tolerance.
    pub fn distance(&self, other: &Pose) -> (f64, f64) {
        let dq = self.rotation.inverse() * other.rotation;
        (dq.angle(), (self.translation - other.translation).norm())
    }
}

fn renormalize(q: UnitQuaternion<f64>) -> UnitQuaternion<f64> {
    UnitQuaternion::from_quaternion(*q.quaternion())
}

/// Unit-norm 3-vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction(Vector3<f64>);

impl Direction {
    /// Normalizes the input; rejects zero and non-finite vectors.
    pub fn new(v: Vector3<f64>) -> Result<Self> {
        if !v.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidArgument("non-finite direction".into()));
        }
        let n = v.norm();
        if n < 1e-12 {
            return Err(Error::InvalidArgument("zero-norm direction".into()));
        }
        Ok(Direction(v / n))
    }

    /// Wraps a vector already known to be unit norm (within 1e-12).
    fn from_unit_unchecked(v: Vector3<f64>) -> Self {
        debug_assert!((v.norm() - 1.0).abs() < 1e-12);
        Direction(v)
    }

    pub fn as_vector(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn into_vector(self) -> Vector3<f64> {
        self.0
    }
}

/// Roll-pitch-yaw Euler angles in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerRpy {
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

impl EulerRpy {
    pub fn new(roll: f64, pitch: f64, yaw: f64) -> Self {
        EulerRpy { roll, pitch, yaw }
    }
}

/// `Rz(yaw) * Ry(pitch) * Rx(roll)` as a unit quaternion.
pub fn rpy_to_rotation(e: &EulerRpy) -> Result<UnitQuaternion<f64>> {
    if ![e.roll, e.pitch, e.yaw].iter().all(|a| a.is_finite()) {
        return Err(Error::InvalidArgument("non-finite Euler angle".into()));
    }
    let rx = UnitQuaternion::from_axis_angle(&Vector3::x_axis(), e.roll);
    let ry = UnitQuaternion::from_axis_angle(&Vector3::y_axis(), e.pitch);
    let rz = UnitQuaternion::from_axis_angle(&Vector3::z_axis(), e.yaw);
    Ok(renormalize(rz * ry * rx))
}

/// Inverse of [`rpy_to_rotation`]; errors in the gimbal-lock region
/// `|pitch| >= pi/2 - 1e-6`.
pub fn rotation_to_rpy(r: &UnitQuaternion<f64>) -> Result<EulerRpy> {
    let m = r.to_rotation_matrix();
    let m = m.matrix();
    // For R = Rz(y)Ry(p)Rx(r): m20 = -sin(pitch).
    let sin_pitch = -m[(2, 0)];
    let pitch = sin_pitch.clamp(-1.0, 1.0).asin();
    if pitch.abs() >= std::f64::consts::FRAC_PI_2 - 1e-6 {
        return Err(Error::DegenerateOrientation);
    }
    let roll = m[(2, 1)].atan2(m[(2, 2)]);
    let yaw = m[(1, 0)].atan2(m[(0, 0)]);
    Ok(EulerRpy { roll, pitch, yaw })
}

/// `n` near-uniform unit directions from the Fibonacci lattice.
///
/// For k = 1..n: `z_k = (2k-1)/n - 1`, azimuth `2*pi*k*phi` with
/// `phi = (sqrt(5)-1)/2`. The z-coordinates are strictly increasing.
pub fn fibonacci_directions(n: usize) -> Result<Vec<Direction>> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "fibonacci_directions requires n >= 1".into(),
        ));
    }
    let nf = n as f64;
    let mut out = Vec::with_capacity(n);
    for k in 1..=n {
        let z = (2 * k - 1) as f64 / nf - 1.0;
        let r = (1.0 - z * z).sqrt();
        let theta = std::f64::consts::TAU * k as f64 * LATTICE_PHI;
        let v = Vector3::new(r * theta.cos(), r * theta.sin(), z);
        out.push(Direction::from_unit_unchecked(v));
    }
    Ok(out)
}

/// `k` rotations about `axis` with angles `j*pi/k`, `j = 0..k-1`.
pub fn semicircle_rotations(axis: &Direction, k: usize) -> Result<Vec<UnitQuaternion<f64>>> {
    if k == 0 {
        return Err(Error::InvalidArgument(
            "semicircle_rotations requires k >= 1".into(),
        ));
    }
    let unit_axis = Unit::new_unchecked(*axis.as_vector());
    Ok((0..k)
        .map(|j| {
            let angle = j as f64 * std::f64::consts::PI / k as f64;
            UnitQuaternion::from_axis_angle(&unit_axis, angle)
        })
        .collect())
}

/// Deterministic rotation mapping local +z onto `dir`.
///
/// Rotates about the axis `z × dir`; when `dir` is within 1e-9 of ±z the
/// result is the identity or a half-turn about +x respectively.
pub fn align_z_to(dir: &Direction) -> UnitQuaternion<f64> {
    let d = dir.as_vector();
    let z = Vector3::z();
    let dot = z.dot(d).clamp(-1.0, 1.0);
    if dot > 1.0 - 1e-9 {
        return UnitQuaternion::identity();
    }
    if dot < -1.0 + 1e-9 {
        return UnitQuaternion::from_axis_angle(&Vector3::x_axis(), std::f64::consts::PI);
    }
    let axis = Unit::new_normalize(z.cross(d));
    UnitQuaternion::from_axis_angle(&axis, dot.acos())
}

/// Angle in `[0, pi]` between two vectors.
pub fn angle_between(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    use crate::rng::{rng_from_seed, uniform_range};

    /// Independent 3x3 matrix oracle for Rz(yaw)*Ry(pitch)*Rx(roll).
    fn rpy_matrix_oracle(roll: f64, pitch: f64, yaw: f64) -> [[f64; 3]; 3] {
        let (sr, cr) = roll.sin_cos();
        let (sp, cp) = pitch.sin_cos();
        let (sy, cy) = yaw.sin_cos();
        let rx = [[1.0, 0.0, 0.0], [0.0, cr, -sr], [0.0, sr, cr]];
        let ry = [[cp, 0.0, sp], [0.0, 1.0, 0.0], [-sp, 0.0, cp]];
        let rz = [[cy, -sy, 0.0], [sy, cy, 0.0], [0.0, 0.0, 1.0]];
        mat_mul(&rz, &mat_mul(&ry, &rx))
    }

    fn mat_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for (k, bk) in b.iter().enumerate() {
                    out[i][j] += a[i][k] * bk[j];
                }
            }
        }
        out
    }

    #[test]
    fn rpy_identity() {
        let q = rpy_to_rotation(&EulerRpy::new(0.0, 0.0, 0.0)).unwrap();
        assert!(q.angle() < 1e-12);
    }

    #[test]
    fn rpy_quarter_roll_maps_y_to_z() {
        let q = rpy_to_rotation(&EulerRpy::new(std::f64::consts::FRAC_PI_2, 0.0, 0.0)).unwrap();
        let mapped = q * Vector3::y();
        assert_relative_eq!(mapped, Vector3::z(), epsilon = 1e-12);
    }

    #[test]
    fn rpy_matches_matrix_product_oracle() {
        let mut rng = rng_from_seed(17);
        for _ in 0..200 {
            let e = EulerRpy::new(
                uniform_range(&mut rng, -3.0, 3.0),
                uniform_range(&mut rng, -1.4, 1.4),
                uniform_range(&mut rng, -3.0, 3.0),
            );
            let q = rpy_to_rotation(&e).unwrap();
            let m = q.to_rotation_matrix();
            let oracle = rpy_matrix_oracle(e.roll, e.pitch, e.yaw);
            for (i, row) in oracle.iter().enumerate() {
                for (j, expected) in row.iter().enumerate() {
                    assert!(
                        (m.matrix()[(i, j)] - expected).abs() < 1e-9,
                        "mismatch at ({i},{j}) for {e:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn rpy_round_trip() {
        let e = EulerRpy::new(0.1, 0.2, 0.3);
        let q = rpy_to_rotation(&e).unwrap();
        let back = rotation_to_rpy(&q).unwrap();
        assert_relative_eq!(back.roll, 0.1, epsilon = 1e-9);
        assert_relative_eq!(back.pitch, 0.2, epsilon = 1e-9);
        assert_relative_eq!(back.yaw, 0.3, epsilon = 1e-9);
    }

    #[test]
    fn rotation_to_rpy_identity() {
        let e = rotation_to_rpy(&UnitQuaternion::identity()).unwrap();
        assert_eq!((e.roll, e.pitch, e.yaw), (0.0, 0.0, 0.0));
    }

    #[test]
    fn gimbal_lock_is_rejected() {
        let q = rpy_to_rotation(&EulerRpy::new(0.3, std::f64::consts::FRAC_PI_2, 0.1)).unwrap();
        assert!(matches!(
            rotation_to_rpy(&q),
            Err(Error::DegenerateOrientation)
        ));
    }

    #[test]
    fn non_finite_rpy_rejected() {
        assert!(rpy_to_rotation(&EulerRpy::new(f64::NAN, 0.0, 0.0)).is_err());
    }

    #[test]
    fn fibonacci_single_direction_is_equatorial() {
        let dirs = fibonacci_directions(1).unwrap();
        assert_eq!(dirs.len(), 1);
        assert_eq!(dirs[0].as_vector().z, 0.0);
    }

    #[test]
    fn fibonacci_two_directions_have_half_z() {
        let dirs = fibonacci_directions(2).unwrap();
        assert_eq!(dirs[0].as_vector().z, -0.5);
        assert_eq!(dirs[1].as_vector().z, 0.5);
    }

    #[test]
    fn fibonacci_thousand_unit_and_balanced() {
        let dirs = fibonacci_directions(1000).unwrap();
        let mut sum = Vector3::zeros();
        let mut prev_z = f64::NEG_INFINITY;
        for (k, d) in dirs.iter().enumerate() {
            let v = d.as_vector();
            assert!((v.norm() - 1.0).abs() < 1e-12);
            // Direct formula evaluation oracle.
            let expected_z = (2 * (k + 1)) as f64 / 1000.0 - 1.0 / 1000.0 - 1.0;
            assert!((v.z - expected_z).abs() < 1e-12);
            assert!(v.z > prev_z, "z must be strictly increasing");
            prev_z = v.z;
            sum += v;
        }
        assert!(sum.norm() / 1000.0 <= 0.05, "mean resultant {}", sum.norm() / 1000.0);
    }

    #[test]
    fn fibonacci_rejects_zero() {
        assert!(fibonacci_directions(0).is_err());
    }

    #[test]
    fn semicircle_single_rotation_is_identity() {
        let axis = Direction::new(Vector3::z()).unwrap();
        let rots = semicircle_rotations(&axis, 1).unwrap();
        assert_eq!(rots.len(), 1);
        assert!(rots[0].angle() < 1e-12);
    }

    #[test]
    fn semicircle_two_rotations_are_0_and_half_pi() {
        let axis = Direction::new(Vector3::z()).unwrap();
        let rots = semicircle_rotations(&axis, 2).unwrap();
        assert!(rots[0].angle() < 1e-12);
        assert_relative_eq!(rots[1].angle(), std::f64::consts::FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn semicircle_azimuth_oracle() {
        let axis = Direction::new(Vector3::z()).unwrap();
        let rots = semicircle_rotations(&axis, 4).unwrap();
        for (j, r) in rots.iter().enumerate() {
            let v = r * Vector3::x();
            let azimuth = v.y.atan2(v.x);
            let expected = j as f64 * std::f64::consts::FRAC_PI_4;
            assert!((azimuth - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn semicircle_never_reaches_pi() {
        let axis = Direction::new(Vector3::new(0.3, -0.4, 0.5)).unwrap();
        for k in 1..40 {
            for r in semicircle_rotations(&axis, k).unwrap() {
                assert!(r.angle() < std::f64::consts::PI - 1e-9);
            }
        }
    }

    #[test]
    fn align_z_to_points_z_at_target() {
        let mut rng = rng_from_seed(5);
        for _ in 0..500 {
            let v = Vector3::new(
                uniform_range(&mut rng, -1.0, 1.0),
                uniform_range(&mut rng, -1.0, 1.0),
                uniform_range(&mut rng, -1.0, 1.0),
            );
            if v.norm() < 1e-3 {
                continue;
            }
            let dir = Direction::new(v).unwrap();
            let q = align_z_to(&dir);
            assert_relative_eq!(q * Vector3::z(), *dir.as_vector(), epsilon = 1e-9);
        }
        let down = Direction::new(-Vector3::z()).unwrap();
        assert_relative_eq!(
            align_z_to(&down) * Vector3::z(),
            -Vector3::z(),
            epsilon = 1e-12
        );
    }

    proptest! {
        #[test]
        fn compose_is_associative(seed in 0u64..1000) {
            let mut rng = rng_from_seed(seed);
            let mut rand_pose = || {
                let e = EulerRpy::new(
                    uniform_range(&mut rng, -3.0, 3.0),
                    uniform_range(&mut rng, -1.4, 1.4),
                    uniform_range(&mut rng, -3.0, 3.0),
                );
                Pose::new(
                    rpy_to_rotation(&e).unwrap(),
                    Vector3::new(
                        uniform_range(&mut rng, -1.0, 1.0),
                        uniform_range(&mut rng, -1.0, 1.0),
                        uniform_range(&mut rng, -1.0, 1.0),
                    ),
                )
            };
            let (a, b, c) = (rand_pose(), rand_pose(), rand_pose());
            let left = a.compose(&b).compose(&c);
            let right = a.compose(&b.compose(&c));
            let (dr, dt) = left.distance(&right);
            prop_assert!(dr < 1e-9 && dt < 1e-9);
        }

        #[test]
        fn compose_with_inverse_is_identity(seed in 0u64..1000) {
            let mut rng = rng_from_seed(seed);
            let e = EulerRpy::new(
                uniform_range(&mut rng, -3.0, 3.0),
                uniform_range(&mut rng, -1.4, 1.4),
                uniform_range(&mut rng, -3.0, 3.0),
            );
            let p = Pose::new(
                rpy_to_rotation(&e).unwrap(),
                Vector3::new(
                    uniform_range(&mut rng, -1.0, 1.0),
                    uniform_range(&mut rng, -1.0, 1.0),
                    uniform_range(&mut rng, -1.0, 1.0),
                ),
            );
            let id = p.compose(&p.inverse());
            let (dr, dt) = id.distance(&Pose::identity());
            prop_assert!(dr < 1e-9 && dt < 1e-9);
            prop_assert!((p.rotation.quaternion().norm() - 1.0).abs() < 1e-9);
        }

        #[test]
        fn fibonacci_z_strictly_increasing_and_distinct(n in 1usize..3000) {
            let dirs = fibonacci_directions(n).unwrap();
            for w in dirs.windows(2) {
                prop_assert!(w[1].as_vector().z > w[0].as_vector().z);
            }
        }
    }
}
