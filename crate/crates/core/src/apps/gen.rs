use super::config::ConeParams;
use crate::error::{Error, Result};
use crate::linear::RealSequence;
use crate::manifold::{geodesic, ManifoldKind, ManifoldPoint, MeanSettings};
use crate::masks::Mask;
use crate::mpyramid::{t_refine, ManifoldSequence};
use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Normal, StandardNormal};
use std::f64::consts::PI;

/// Frequency of the Morlet carrier.
pub const MORLET_OMEGA: f64 = 5.0;
pub const MORLET_CENTER: f64 = 5.0;
pub const MORLET_DOMAIN: (f64, f64) = (0.0, 10.0);

pub fn morlet(x: f64) -> f64 {
    let t = x - MORLET_CENTER;
    (MORLET_OMEGA * t).cos() * (-0.5 * t * t).exp()
}

/// Samples of the Morlet wavelet on `2^-j ℤ ∩ [0, 10]`.
pub fn gen_morlet(j: u32) -> Result<RealSequence> {
    if j == 0 {
        return Err(Error::invalid("scale must be at least 1"));
    }
    let (a, b) = MORLET_DOMAIN;
    let per_unit = 1usize << j;
    let n = ((b - a) as usize) * per_unit + 1;
    let h = 1.0 / per_unit as f64;
    RealSequence::new(
        (0..n).map(|i| morlet(a + i as f64 * h)).collect(),
        j as i32,
        a,
    )
}

/// Adds seeded Gaussian noise with `σ = sigma_frac · (max − min)`.
pub fn add_noise(c: &RealSequence, sigma_frac: f64, seed: u64) -> Result<RealSequence> {
    if !(sigma_frac >= 0.0) || !sigma_frac.is_finite() {
        return Err(Error::invalid(format!(
            "noise level must be non-negative, got {sigma_frac}"
        )));
    }
    if sigma_frac == 0.0 {
        return Ok(c.clone());
    }
    let (lo, hi) = c
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let normal =
        Normal::new(0.0, sigma_frac * (hi - lo)).map_err(|e| Error::invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = c.values.iter().map(|v| v + rng.sample(normal)).collect();
    RealSequence::new(values, c.scale, c.origin)
}

/// Haar-distributed rotation: QR of a Gaussian matrix with the signs of `R`'s
/// diagonal moved into `Q`, then a column flip if the determinant is negative.
pub fn random_rotation<R: Rng>(rng: &mut R) -> Matrix3<f64> {
    let g = Matrix3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for i in 0..3 {
        if r[(i, i)] < 0.0 {
            q.column_mut(i).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}

/// `n` points evenly spaced in parameter along the piecewise geodesic through `pts`.
pub fn resample_geodesic(pts: &[ManifoldPoint], n: usize) -> Result<Vec<ManifoldPoint>> {
    if pts.len() < 2 || n < 2 {
        return Err(Error::invalid(
            "resampling needs at least two points in and out",
        ));
    }
    let segments = (pts.len() - 1) as f64;
    (0..n)
        .map(|i| {
            let t = segments * i as f64 / (n - 1) as f64;
            let k = (t.floor() as usize).min(pts.len() - 2);
            geodesic(&pts[k], &pts[k + 1], t - k as f64)
        })
        .collect()
}

/// Four seeded random rotations, resampled to 11 along their piecewise
/// geodesic and refined `scale` times with the cubic B-spline mask.
pub fn gen_so3_curve(seed: u64, scale: u32, settings: &MeanSettings) -> Result<ManifoldSequence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let anchors: Vec<ManifoldPoint> = (0..4)
        .map(|_| ManifoldPoint::SO3(random_rotation(&mut rng)))
        .collect();
    let mut curve = ManifoldSequence::new(resample_geodesic(&anchors, 11)?, 0, 0.0)?;
    let cubic = Mask::bspline(3);
    for _ in 0..scale {
        curve = t_refine(&cubic, &curve, settings)?;
    }
    Ok(curve)
}

pub fn cone_point(cone: &ConeParams, t: f64) -> Vector3<f64> {
    let r = cone.r0 * (1.0 - t / cone.period);
    let phase = 2.0 * PI * cone.turns * t;
    Vector3::new(r * phase.cos(), r * phase.sin(), cone.height * t)
}

/// Pairs each rotation with a translation travelling up a cone, `t_j = j/(n−1)`.
pub fn wrap_on_cone(c: &ManifoldSequence, cone: &ConeParams) -> Result<ManifoldSequence> {
    if c.kind != ManifoldKind::SO3 {
        return Err(Error::TagMismatch(
            ManifoldKind::SO3.to_string(),
            c.kind.to_string(),
        ));
    }
    let last = (c.len() - 1).max(1) as f64;
    let points = c
        .points
        .iter()
        .enumerate()
        .map(|(j, p)| ManifoldPoint::se3(*p.rotation().unwrap(), cone_point(cone, j as f64 / last)))
        .collect();
    ManifoldSequence::new(points, c.scale, c.origin)
}
