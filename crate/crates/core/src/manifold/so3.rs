//! Closed-form rotation group formulas under the Frobenius metric.

use crate::error::{Error, Result};
use nalgebra::{Matrix3, Vector3};
use std::f64::consts::PI;

const SMALL_ANGLE: f64 = 1e-6;
/// Rotations closer than this to angle π are outside the principal log domain.
pub const ANTIPODAL_MARGIN: f64 = 1e-9;
pub const ORTHO_DEFECT_TOL: f64 = 1e-10;
pub const VALIDATION_TOL: f64 = 1e-8;

pub fn hat(w: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

pub fn vee(m: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(
        m[(2, 1)] - m[(1, 2)],
        m[(0, 2)] - m[(2, 0)],
        m[(1, 0)] - m[(0, 1)],
    ) * 0.5
}

/// Rotation angle in `[0, π]`.
pub fn angle(r: &Matrix3<f64>) -> f64 {
    let s = vee(r).norm();
    let c = 0.5 * (r.trace() - 1.0);
    s.atan2(c)
}

/// `exp(hat(w))` by the Rodrigues formula.
pub fn exp_axis_angle(w: &Vector3<f64>) -> Matrix3<f64> {
    let theta = w.norm();
    let k = hat(w);
    let (a, b) = if theta < SMALL_ANGLE {
        let t2 = theta * theta;
        (1.0 - t2 / 6.0, 0.5 - t2 / 24.0)
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / (theta * theta))
    };
    Matrix3::identity() + k * a + k * k * b
}

/// Principal logarithm as an axis-angle vector.
pub fn log_axis_angle(r: &Matrix3<f64>) -> Result<Vector3<f64>> {
    let theta = angle(r);
    if PI - theta < ANTIPODAL_MARGIN {
        return Err(Error::OutOfInjectivityRadius {
            layer: None,
            index: None,
            detail: format!("rotation angle {theta} is π within {ANTIPODAL_MARGIN:e}"),
        });
    }
    let s = vee(r);
    if theta < SMALL_ANGLE {
        return Ok(s * (1.0 + theta * theta / 6.0));
    }
    if theta < PI - 1e-3 {
        return Ok(s * (theta / theta.sin()));
    }
    // Near π the skew part is tiny; recover the axis from the symmetric part.
    let b = (r + r.transpose()) * 0.5 - Matrix3::identity() * theta.cos();
    let scale = 1.0 - theta.cos();
    let i = (0..3)
        .max_by(|&a, &c| b[(a, a)].total_cmp(&b[(c, c)]))
        .unwrap();
    let mut axis: Vector3<f64> = b.column(i).into_owned() / (b[(i, i)] * scale).sqrt();
    axis.normalize_mut();
    if axis.dot(&s) < 0.0 {
        axis = -axis;
    }
    Ok(axis * theta)
}

pub fn orthogonality_defect(r: &Matrix3<f64>) -> f64 {
    (r.transpose() * r - Matrix3::identity()).norm()
}

/// Nearest rotation in the Frobenius sense.
pub fn project_to_rotation(r: &Matrix3<f64>) -> Matrix3<f64> {
    let svd = r.svd(true, true);
    let u = svd.u.unwrap();
    let v_t = svd.v_t.unwrap();
    let mut d = Matrix3::identity();
    if (u * v_t).determinant() < 0.0 {
        d[(2, 2)] = -1.0;
    }
    u * d * v_t
}

/// Projects when the orthogonality defect exceeds [`ORTHO_DEFECT_TOL`].
pub fn guard(r: Matrix3<f64>) -> Matrix3<f64> {
    let defect = orthogonality_defect(&r);
    if defect > ORTHO_DEFECT_TOL {
        log::debug!("re-orthonormalizing rotation with defect {defect:e}");
        project_to_rotation(&r)
    } else {
        r
    }
}

pub fn validate(r: &Matrix3<f64>) -> Result<()> {
    let defect = orthogonality_defect(r);
    let det = r.determinant();
    if !(defect <= VALIDATION_TOL) || !((det - 1.0).abs() <= VALIDATION_TOL) {
        return Err(Error::invalid(format!(
            "not a rotation: orthogonality defect {defect:e}, determinant {det}"
        )));
    }
    Ok(())
}
