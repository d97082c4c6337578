//! Points, tangent vectors and the exponential/logarithm maps of the
//! Euclidean space, the rotation group and the rigid-motion group.
//!
//! Rotations use the Frobenius metric, so a rotation by angle `θ` lies at
//! distance `√2·θ` from the identity. Rigid motions carry the product metric of
//! rotations and translations.

mod karcher;
pub mod so3;

pub use karcher::{weighted_mean, weighted_mean_with_stats, MeanSettings, MeanStats};

use crate::error::{Error, Result};
use nalgebra::{DVector, Matrix3, Matrix4, Vector3};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ManifoldKind {
    Euclidean(usize),
    SO3,
    SE3,
}

impl ManifoldKind {
    /// Number of coordinates of a point.
    pub fn point_dim(&self) -> usize {
        match self {
            ManifoldKind::Euclidean(n) => *n,
            ManifoldKind::SO3 => 9,
            ManifoldKind::SE3 => 16,
        }
    }

    /// Number of coordinates of a tangent block.
    pub fn tangent_dim(&self) -> usize {
        match self {
            ManifoldKind::Euclidean(n) => *n,
            ManifoldKind::SO3 => 9,
            ManifoldKind::SE3 => 12,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            ManifoldKind::Euclidean(_) => "Rn",
            ManifoldKind::SO3 => "SO3",
            ManifoldKind::SE3 => "SE3",
        }
    }

    /// Parses `"SO3"`, `"SE3"` or `"Rn"` (the latter needs the dimension).
    pub fn from_tag(tag: &str, dim: Option<usize>) -> Result<Self> {
        match tag {
            "SO3" => Ok(ManifoldKind::SO3),
            "SE3" => Ok(ManifoldKind::SE3),
            "Rn" | "R" | "Euclidean" => dim
                .filter(|&d| d > 0)
                .map(ManifoldKind::Euclidean)
                .ok_or_else(|| Error::invalid("Euclidean points need a positive dimension")),
            other => Err(Error::invalid(format!("unknown manifold tag `{other}`"))),
        }
    }
}

impl fmt::Display for ManifoldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ManifoldKind::Euclidean(n) => write!(f, "R^{n}"),
            other => f.write_str(other.tag()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ManifoldPoint {
    Euclidean(DVector<f64>),
    SO3(Matrix3<f64>),
    SE3 {
        rotation: Matrix3<f64>,
        translation: Vector3<f64>,
    },
}

/// Coordinates of a tangent vector in the ambient matrix or vector space.
#[derive(Clone, Debug, PartialEq)]
pub enum Tangent {
    Euclidean(DVector<f64>),
    SO3(Matrix3<f64>),
    SE3(Matrix3<f64>, Vector3<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    pub base: ManifoldPoint,
    pub vec: Tangent,
}

fn mismatch(a: ManifoldKind, b: ManifoldKind) -> Error {
    Error::TagMismatch(a.to_string(), b.to_string())
}

fn row_major3(m: &Matrix3<f64>) -> impl Iterator<Item = f64> + '_ {
    (0..3).flat_map(move |i| (0..3).map(move |j| m[(i, j)]))
}

fn matrix3_from(c: &[f64]) -> Matrix3<f64> {
    Matrix3::from_row_slice(&c[..9])
}

impl ManifoldPoint {
    pub fn kind(&self) -> ManifoldKind {
        match self {
            ManifoldPoint::Euclidean(v) => ManifoldKind::Euclidean(v.len()),
            ManifoldPoint::SO3(_) => ManifoldKind::SO3,
            ManifoldPoint::SE3 { .. } => ManifoldKind::SE3,
        }
    }

    pub fn identity(kind: ManifoldKind) -> Self {
        match kind {
            ManifoldKind::Euclidean(n) => ManifoldPoint::Euclidean(DVector::zeros(n)),
            ManifoldKind::SO3 => ManifoldPoint::SO3(Matrix3::identity()),
            ManifoldKind::SE3 => ManifoldPoint::SE3 {
                rotation: Matrix3::identity(),
                translation: Vector3::zeros(),
            },
        }
    }

    pub fn se3(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Self {
        ManifoldPoint::SE3 {
            rotation,
            translation,
        }
    }

    pub fn rotation(&self) -> Option<&Matrix3<f64>> {
        match self {
            ManifoldPoint::SO3(r) | ManifoldPoint::SE3 { rotation: r, .. } => Some(r),
            ManifoldPoint::Euclidean(_) => None,
        }
    }

    /// The 4×4 homogeneous matrix of a rigid motion.
    pub fn homogeneous(&self) -> Option<Matrix4<f64>> {
        match self {
            ManifoldPoint::SE3 {
                rotation,
                translation,
            } => {
                let mut m = Matrix4::identity();
                m.fixed_view_mut::<3, 3>(0, 0).copy_from(rotation);
                m.fixed_view_mut::<3, 1>(0, 3).copy_from(translation);
                Some(m)
            }
            _ => None,
        }
    }

    /// Row-major embedding coordinates.
    pub fn to_coords(&self) -> Vec<f64> {
        match self {
            ManifoldPoint::Euclidean(v) => v.iter().copied().collect(),
            ManifoldPoint::SO3(r) => row_major3(r).collect(),
            ManifoldPoint::SE3 { .. } => {
                let m = self.homogeneous().unwrap();
                (0..4)
                    .flat_map(|i| (0..4).map(move |j| m[(i, j)]))
                    .collect()
            }
        }
    }

    /// Builds a point from row-major coordinates and validates it.
    pub fn from_coords(kind: ManifoldKind, c: &[f64]) -> Result<Self> {
        if c.len() != kind.point_dim() {
            return Err(Error::LengthMismatch(format!(
                "{kind} point needs {} coordinates, got {}",
                kind.point_dim(),
                c.len()
            )));
        }
        if c.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("non-finite coordinate"));
        }
        let p = match kind {
            ManifoldKind::Euclidean(_) => ManifoldPoint::Euclidean(DVector::from_column_slice(c)),
            ManifoldKind::SO3 => ManifoldPoint::SO3(matrix3_from(c)),
            ManifoldKind::SE3 => {
                if c[12..] != [0.0, 0.0, 0.0, 1.0] {
                    return Err(Error::invalid(
                        "bottom row of a rigid motion must be (0, 0, 0, 1)",
                    ));
                }
                let rotation = Matrix3::new(c[0], c[1], c[2], c[4], c[5], c[6], c[8], c[9], c[10]);
                ManifoldPoint::se3(rotation, Vector3::new(c[3], c[7], c[11]))
            }
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match self.rotation() {
            Some(r) => so3::validate(r),
            None => Ok(()),
        }
    }

    pub fn zero_tangent(&self) -> TangentVector {
        let vec = match self {
            ManifoldPoint::Euclidean(v) => Tangent::Euclidean(DVector::zeros(v.len())),
            ManifoldPoint::SO3(_) => Tangent::SO3(Matrix3::zeros()),
            ManifoldPoint::SE3 { .. } => Tangent::SE3(Matrix3::zeros(), Vector3::zeros()),
        };
        TangentVector {
            base: self.clone(),
            vec,
        }
    }
}

impl Tangent {
    pub fn kind(&self) -> ManifoldKind {
        match self {
            Tangent::Euclidean(v) => ManifoldKind::Euclidean(v.len()),
            Tangent::SO3(_) => ManifoldKind::SO3,
            Tangent::SE3(..) => ManifoldKind::SE3,
        }
    }

    pub fn norm(&self) -> f64 {
        match self {
            Tangent::Euclidean(v) => v.norm(),
            Tangent::SO3(m) => m.norm(),
            Tangent::SE3(m, t) => (m.norm_squared() + t.norm_squared()).sqrt(),
        }
    }

    pub fn scale(&self, s: f64) -> Tangent {
        match self {
            Tangent::Euclidean(v) => Tangent::Euclidean(v * s),
            Tangent::SO3(m) => Tangent::SO3(m * s),
            Tangent::SE3(m, t) => Tangent::SE3(m * s, t * s),
        }
    }

    /// `self + s·other`; both must be of the same kind.
    pub fn axpy(&self, s: f64, other: &Tangent) -> Result<Tangent> {
        Ok(match (self, other) {
            (Tangent::Euclidean(a), Tangent::Euclidean(b)) if a.len() == b.len() => {
                Tangent::Euclidean(a + b * s)
            }
            (Tangent::SO3(a), Tangent::SO3(b)) => Tangent::SO3(a + b * s),
            (Tangent::SE3(a, u), Tangent::SE3(b, v)) => Tangent::SE3(a + b * s, u + v * s),
            _ => return Err(mismatch(self.kind(), other.kind())),
        })
    }

    pub fn zeros(kind: ManifoldKind) -> Tangent {
        match kind {
            ManifoldKind::Euclidean(n) => Tangent::Euclidean(DVector::zeros(n)),
            ManifoldKind::SO3 => Tangent::SO3(Matrix3::zeros()),
            ManifoldKind::SE3 => Tangent::SE3(Matrix3::zeros(), Vector3::zeros()),
        }
    }

    /// Flat coordinates: `n` entries, 9 row-major entries, or 9 + 3.
    pub fn to_coords(&self) -> Vec<f64> {
        match self {
            Tangent::Euclidean(v) => v.iter().copied().collect(),
            Tangent::SO3(m) => row_major3(m).collect(),
            Tangent::SE3(m, t) => row_major3(m).chain(t.iter().copied()).collect(),
        }
    }

    pub fn from_coords(kind: ManifoldKind, c: &[f64]) -> Result<Tangent> {
        if c.len() != kind.tangent_dim() {
            return Err(Error::LengthMismatch(format!(
                "{kind} tangent block needs {} coordinates, got {}",
                kind.tangent_dim(),
                c.len()
            )));
        }
        Ok(match kind {
            ManifoldKind::Euclidean(_) => Tangent::Euclidean(DVector::from_column_slice(c)),
            ManifoldKind::SO3 => Tangent::SO3(matrix3_from(c)),
            ManifoldKind::SE3 => Tangent::SE3(matrix3_from(c), Vector3::new(c[9], c[10], c[11])),
        })
    }
}

impl TangentVector {
    pub fn norm(&self) -> f64 {
        self.vec.norm()
    }

    /// Skew-symmetry defect `‖Rᵀ V + Vᵀ R‖` of the rotational part.
    pub fn skew_defect(&self) -> f64 {
        match (&self.base, &self.vec) {
            (ManifoldPoint::SO3(r), Tangent::SO3(v))
            | (ManifoldPoint::SE3 { rotation: r, .. }, Tangent::SE3(v, _)) => {
                let a = r.transpose() * v;
                (a + a.transpose()).norm()
            }
            _ => 0.0,
        }
    }
}

fn check_same(p: &ManifoldPoint, q: &ManifoldPoint) -> Result<()> {
    if p.kind() != q.kind() {
        return Err(mismatch(p.kind(), q.kind()));
    }
    Ok(())
}

fn rot_log(r: &Matrix3<f64>, q: &Matrix3<f64>) -> Result<Matrix3<f64>> {
    let w = so3::log_axis_angle(&(r.transpose() * q))?;
    Ok(r * so3::hat(&w))
}

fn rot_exp(r: &Matrix3<f64>, v: &Matrix3<f64>) -> Matrix3<f64> {
    let w = so3::vee(&(r.transpose() * v));
    so3::guard(r * so3::exp_axis_angle(&w))
}

/// `q ⊖ p`.
pub fn log(p: &ManifoldPoint, q: &ManifoldPoint) -> Result<TangentVector> {
    check_same(p, q)?;
    let vec = match (p, q) {
        (ManifoldPoint::Euclidean(a), ManifoldPoint::Euclidean(b)) => Tangent::Euclidean(b - a),
        (ManifoldPoint::SO3(a), ManifoldPoint::SO3(b)) => Tangent::SO3(rot_log(a, b)?),
        (
            ManifoldPoint::SE3 {
                rotation: ra,
                translation: ta,
            },
            ManifoldPoint::SE3 {
                rotation: rb,
                translation: tb,
            },
        ) => Tangent::SE3(rot_log(ra, rb)?, tb - ta),
        _ => unreachable!(),
    };
    Ok(TangentVector {
        base: p.clone(),
        vec,
    })
}

/// `p ⊕ v` for a tangent given by its coordinates at `p`.
pub fn exp_at(p: &ManifoldPoint, v: &Tangent) -> Result<ManifoldPoint> {
    Ok(match (p, v) {
        (ManifoldPoint::Euclidean(a), Tangent::Euclidean(b)) if a.len() == b.len() => {
            ManifoldPoint::Euclidean(a + b)
        }
        (ManifoldPoint::SO3(r), Tangent::SO3(m)) => ManifoldPoint::SO3(rot_exp(r, m)),
        (
            ManifoldPoint::SE3 {
                rotation,
                translation,
            },
            Tangent::SE3(m, t),
        ) => ManifoldPoint::se3(rot_exp(rotation, m), translation + t),
        _ => return Err(mismatch(p.kind(), v.kind())),
    })
}

/// `p ⊕ v`; `v` must be based at `p`.
pub fn exp(p: &ManifoldPoint, v: &TangentVector) -> Result<ManifoldPoint> {
    if v.base != *p {
        return Err(Error::invalid(
            "tangent vector is not based at the given point",
        ));
    }
    exp_at(p, &v.vec)
}

pub fn distance(p: &ManifoldPoint, q: &ManifoldPoint) -> Result<f64> {
    check_same(p, q)?;
    let rot = |a: &Matrix3<f64>, b: &Matrix3<f64>| {
        std::f64::consts::SQRT_2 * so3::angle(&(a.transpose() * b))
    };
    Ok(match (p, q) {
        (ManifoldPoint::Euclidean(a), ManifoldPoint::Euclidean(b)) => (b - a).norm(),
        (ManifoldPoint::SO3(a), ManifoldPoint::SO3(b)) => rot(a, b),
        (
            ManifoldPoint::SE3 {
                rotation: ra,
                translation: ta,
            },
            ManifoldPoint::SE3 {
                rotation: rb,
                translation: tb,
            },
        ) => rot(ra, rb).hypot((tb - ta).norm()),
        _ => unreachable!(),
    })
}

/// `Γ(s) = p ⊕ s·(q ⊖ p)`.
pub fn geodesic(p: &ManifoldPoint, q: &ManifoldPoint, s: f64) -> Result<ManifoldPoint> {
    let v = log(p, q)?;
    exp_at(p, &v.vec.scale(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, SQRT_2};

    fn rot(axis: Vector3<f64>, t: f64) -> Matrix3<f64> {
        so3::exp_axis_angle(&(axis.normalize() * t))
    }

    #[test]
    fn euclidean_maps_are_affine() {
        let p = ManifoldPoint::Euclidean(DVector::from_vec(vec![1.0, 2.0]));
        let q = ManifoldPoint::Euclidean(DVector::from_vec(vec![4.0, 6.0]));
        let v = log(&p, &q).unwrap();
        assert_eq!(v.vec, Tangent::Euclidean(DVector::from_vec(vec![3.0, 4.0])));
        assert_eq!(distance(&p, &q).unwrap(), 5.0);
        assert_eq!(exp(&p, &v).unwrap(), q);
    }

    #[test]
    fn quarter_turn_log() {
        let p = ManifoldPoint::SO3(Matrix3::identity());
        let q = ManifoldPoint::SO3(rot(Vector3::z(), FRAC_PI_2));
        let v = log(&p, &q).unwrap();
        let Tangent::SO3(m) = &v.vec else { panic!() };
        assert!((m[(1, 0)] - FRAC_PI_2).abs() < 1e-14 && (m[(0, 1)] + FRAC_PI_2).abs() < 1e-14);
        assert!((v.norm() - FRAC_PI_2 * SQRT_2).abs() < 1e-14);
        assert!((distance(&p, &q).unwrap() - FRAC_PI_2 * SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn exp_of_skew_generator() {
        let p = ManifoldPoint::SO3(Matrix3::identity());
        let t = 0.8;
        let q = exp_at(&p, &Tangent::SO3(so3::hat(&Vector3::new(0.0, 0.0, t)))).unwrap();
        assert!((q.rotation().unwrap() - rot(Vector3::z(), t)).norm() < 1e-14);
    }

    #[test]
    fn se3_translation_distance() {
        let p = ManifoldPoint::identity(ManifoldKind::SE3);
        let q = ManifoldPoint::se3(Matrix3::identity(), Vector3::new(3.0, 4.0, 0.0));
        assert_eq!(distance(&p, &q).unwrap(), 5.0);
        let mid = geodesic(&p, &q, 0.5).unwrap();
        let ManifoldPoint::SE3 { translation, .. } = mid else {
            panic!()
        };
        assert_eq!(translation, Vector3::new(1.5, 2.0, 0.0));
    }

    #[test]
    fn rotation_midpoint() {
        let p = ManifoldPoint::SO3(Matrix3::identity());
        let q = ManifoldPoint::SO3(rot(Vector3::z(), 1.2));
        let m = geodesic(&p, &q, 0.5).unwrap();
        assert!((m.rotation().unwrap() - rot(Vector3::z(), 0.6)).norm() < 1e-14);
    }

    #[test]
    fn tag_mismatch() {
        let p = ManifoldPoint::identity(ManifoldKind::SO3);
        let q = ManifoldPoint::identity(ManifoldKind::SE3);
        assert!(matches!(log(&p, &q), Err(Error::TagMismatch(..))));
        assert!(matches!(distance(&p, &q), Err(Error::TagMismatch(..))));
    }

    #[test]
    fn antipodal_log_rejected() {
        let p = ManifoldPoint::identity(ManifoldKind::SO3);
        let q = ManifoldPoint::SO3(rot(Vector3::x(), std::f64::consts::PI));
        assert!(matches!(
            log(&p, &q),
            Err(Error::OutOfInjectivityRadius { .. })
        ));
    }

    #[test]
    fn coordinate_round_trip_and_validation() {
        let p = ManifoldPoint::se3(
            rot(Vector3::new(1.0, 2.0, 3.0), 0.9),
            Vector3::new(1.0, -2.0, 0.5),
        );
        let c = p.to_coords();
        assert_eq!(&c[12..], &[0.0, 0.0, 0.0, 1.0]);
        assert_eq!(
            ManifoldPoint::from_coords(ManifoldKind::SE3, &c).unwrap(),
            p
        );
        let mut bad = c.clone();
        bad[15] = 2.0;
        assert!(ManifoldPoint::from_coords(ManifoldKind::SE3, &bad).is_err());
        let mut skewed = *p.rotation().unwrap();
        skewed[(0, 0)] += 1e-3;
        let flat: Vec<f64> = row_major3(&skewed).collect();
        assert!(ManifoldPoint::from_coords(ManifoldKind::SO3, &flat).is_err());
        let v = log(&p, &ManifoldPoint::identity(ManifoldKind::SE3)).unwrap();
        assert_eq!(
            Tangent::from_coords(ManifoldKind::SE3, &v.vec.to_coords()).unwrap(),
            v.vec
        );
    }

    fn arb_axis() -> impl Strategy<Value = Vector3<f64>> {
        (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
            .prop_filter("nonzero", |(x, y, z)| x * x + y * y + z * z > 1e-2)
            .prop_map(|(x, y, z)| Vector3::new(x, y, z).normalize())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn bi_invariance(a in arb_axis(), b in arb_axis(), c in arb_axis(), t in 0.0f64..3.0, s in 0.0f64..3.0, u in 0.0f64..3.0) {
            let r1 = ManifoldPoint::SO3(rot(a, t));
            let r2 = ManifoldPoint::SO3(rot(b, s));
            let q = rot(c, u);
            let d = distance(&r1, &r2).unwrap();
            let l1 = ManifoldPoint::SO3(q * r1.rotation().unwrap());
            let l2 = ManifoldPoint::SO3(q * r2.rotation().unwrap());
            prop_assert!((distance(&l1, &l2).unwrap() - d).abs() < 1e-10);
        }

        #[test]
        fn skew_tangent(a in arb_axis(), b in arb_axis(), t in 0.0f64..3.0, s in 0.0f64..2.5) {
            let p = ManifoldPoint::SO3(rot(a, t));
            let q = exp_at(&p, &Tangent::SO3(p.rotation().unwrap() * so3::hat(&(b * s)))).unwrap();
            let v = log(&p, &q).unwrap();
            prop_assert!(v.skew_defect() < 1e-8);
        }
    }
}
