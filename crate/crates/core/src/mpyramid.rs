//! Intrinsic refinement `T_α`, decimation `Y_γ` and the manifold pyramid.
//!
//! Every output point is a weighted Riemannian mean of its stencil. Boundary
//! handling and the length convention follow the linear transform. Details are
//! stored as tangent coordinates only; during synthesis the base of a detail
//! is the refined point it is added to.

use crate::error::{Error, Result};
use crate::linear::{
    check_length, clamp_index, interior_range, parity_norms, refinement_stencil, PyramidMeta,
    RealSequence,
};
use crate::manifold::{
    distance, exp_at, log, weighted_mean, ManifoldKind, ManifoldPoint, MeanSettings, Tangent,
};
use crate::masks::Mask;
use crate::symbol::DecimationKernel;
use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCurve", into = "RawCurve")]
pub struct ManifoldSequence {
    pub kind: ManifoldKind,
    pub points: Vec<ManifoldPoint>,
    pub scale: i32,
    pub origin: f64,
}

impl ManifoldSequence {
    pub fn new(points: Vec<ManifoldPoint>, scale: i32, origin: f64) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptyInput)?;
        let kind = first.kind();
        for (i, p) in points.iter().enumerate() {
            if p.kind() != kind {
                return Err(Error::TagMismatch(
                    kind.to_string(),
                    format!("{} at index {i}", p.kind()),
                ));
            }
            p.validate()
                .map_err(|e| Error::invalid(format!("point {i}: {e}")))?;
        }
        Ok(ManifoldSequence {
            kind,
            points,
            scale,
            origin,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Scalar samples viewed as points of the real line.
    pub fn from_real(c: &RealSequence) -> Self {
        ManifoldSequence {
            kind: ManifoldKind::Euclidean(1),
            points: c
                .values
                .iter()
                .map(|&v| ManifoldPoint::Euclidean(DVector::from_element(1, v)))
                .collect(),
            scale: c.scale,
            origin: c.origin,
        }
    }

    /// Inverse of [`ManifoldSequence::from_real`].
    pub fn to_real(&self) -> Result<RealSequence> {
        if self.kind != ManifoldKind::Euclidean(1) {
            return Err(Error::TagMismatch(self.kind.to_string(), "R^1".into()));
        }
        Ok(RealSequence {
            values: self.points.iter().map(|p| p.to_coords()[0]).collect(),
            scale: self.scale,
            origin: self.origin,
        })
    }

    /// `Δ_M c`, the largest distance between consecutive points.
    pub fn mesh_size(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| distance(&w[0], &w[1]).unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max)
    }
}

#[derive(Serialize, Deserialize)]
struct Grid {
    scale: i32,
    origin: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawPoint {
    Flat(Vec<f64>),
    Rows(Vec<Vec<f64>>),
}

/// Curve file layout: `{"manifold": "SO3", "points": [[…], …], "grid": {"scale", "origin"}}`.
#[derive(Serialize, Deserialize)]
struct RawCurve {
    manifold: String,
    points: Vec<RawPoint>,
    grid: Grid,
}

impl From<ManifoldSequence> for RawCurve {
    fn from(c: ManifoldSequence) -> Self {
        RawCurve {
            manifold: c.kind.tag().to_string(),
            points: c
                .points
                .iter()
                .map(|p| RawPoint::Flat(p.to_coords()))
                .collect(),
            grid: Grid {
                scale: c.scale,
                origin: c.origin,
            },
        }
    }
}

impl TryFrom<RawCurve> for ManifoldSequence {
    type Error = Error;

    fn try_from(raw: RawCurve) -> Result<Self> {
        let flat: Vec<Vec<f64>> = raw
            .points
            .into_iter()
            .map(|p| match p {
                RawPoint::Flat(v) => v,
                RawPoint::Rows(rows) => rows.concat(),
            })
            .collect();
        let dim = flat.first().map(|p| p.len());
        let kind = ManifoldKind::from_tag(&raw.manifold, dim)?;
        let points = flat
            .iter()
            .enumerate()
            .map(|(i, c)| {
                ManifoldPoint::from_coords(kind, c)
                    .map_err(|e| Error::invalid(format!("point {i}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        ManifoldSequence::new(points, raw.grid.scale, raw.grid.origin)
    }
}

/// Merges weights that land on the same clamped index and drops zero weights.
fn merged(pairs: impl Iterator<Item = (usize, f64)>) -> (Vec<usize>, Vec<f64>) {
    let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
    for (i, w) in pairs {
        *acc.entry(i).or_insert(0.0) += w;
    }
    acc.into_iter().filter(|(_, w)| *w != 0.0).unzip()
}

fn mean_of(
    points: &[ManifoldPoint],
    idx: &[usize],
    w: &[f64],
    settings: &MeanSettings,
) -> Result<ManifoldPoint> {
    if idx.len() == 1 && (w[0] - 1.0).abs() <= 1e-12 {
        return Ok(points[idx[0]].clone());
    }
    let pts: Vec<ManifoldPoint> = idx.iter().map(|&i| points[i].clone()).collect();
    weighted_mean(&pts, w, settings)
}

/// `(T_α c)_j = argmin_x Σ_k α_{j-2k} ρ(x, c_k)²`.
pub fn t_refine(
    mask: &Mask,
    c: &ManifoldSequence,
    settings: &MeanSettings,
) -> Result<ManifoldSequence> {
    let n = c.len();
    let points = (0..2 * n - 1)
        .into_par_iter()
        .map(|j| {
            let (idx, w) = merged(
                refinement_stencil(&mask.alpha, j as i64).map(|(k, a)| (clamp_index(k, n), a)),
            );
            mean_of(&c.points, &idx, &w, settings).map_err(|e| e.at(None, j))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ManifoldSequence {
        kind: c.kind,
        points,
        scale: c.scale + 1,
        origin: c.origin,
    })
}

/// `(Y_γ c)_j = argmin_x Σ_k γ_{j-k} ρ(x, c_{2k})²`.
pub fn y_decimate(
    kernel: &DecimationKernel,
    c: &ManifoldSequence,
    settings: &MeanSettings,
) -> Result<ManifoldSequence> {
    if !kernel.normalized || (kernel.gamma.sum() - 1.0).abs() > 1e-12 {
        return Err(Error::invalid("decimation kernel must be normalized"));
    }
    let even: Vec<ManifoldPoint> = c.points.iter().step_by(2).cloned().collect();
    let n = even.len();
    let points = (0..n)
        .into_par_iter()
        .map(|j| {
            let (idx, w) = merged(
                kernel
                    .gamma
                    .iter()
                    .map(|(g, v)| (clamp_index(j as i64 - g, n), v)),
            );
            mean_of(&even, &idx, &w, settings).map_err(|e| e.at(None, j))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ManifoldSequence {
        kind: c.kind,
        points,
        scale: c.scale - 1,
        origin: c.origin,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetailLayer {
    pub scale: i32,
    /// One tangent coordinate block per fine index.
    pub blocks: Vec<Vec<f64>>,
}

impl DetailLayer {
    pub fn norms(&self, kind: ManifoldKind) -> Result<Vec<f64>> {
        self.blocks
            .iter()
            .map(|b| Tangent::from_coords(kind, b).map(|t| t.norm()))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifoldPyramid {
    pub coarse: ManifoldSequence,
    /// Coarse to fine.
    pub details: Vec<DetailLayer>,
    pub meta: PyramidMeta,
}

pub fn m_analyze(
    mask: &Mask,
    kernel: &DecimationKernel,
    c: &ManifoldSequence,
    m: usize,
    settings: &MeanSettings,
) -> Result<ManifoldPyramid> {
    check_length(c.len(), m)?;
    let mut current = c.clone();
    let mut details = Vec::with_capacity(m);
    for step in 0..m {
        let layer = m - 1 - step;
        let coarse = y_decimate(kernel, &current, settings).map_err(|e| e.at(Some(layer), 0))?;
        let predicted = t_refine(mask, &coarse, settings)?;
        let blocks = current
            .points
            .par_iter()
            .zip(predicted.points.par_iter())
            .enumerate()
            .map(|(j, (fine, base))| {
                log(base, fine)
                    .map(|v| v.vec.to_coords())
                    .map_err(|e| e.at(Some(layer), j))
            })
            .collect::<Result<Vec<_>>>()?;
        details.push(DetailLayer {
            scale: current.scale,
            blocks,
        });
        current = coarse;
    }
    details.reverse();
    let mut meta = PyramidMeta::new(mask, kernel);
    meta.mean = Some(*settings);
    Ok(ManifoldPyramid {
        coarse: current,
        details,
        meta,
    })
}

/// Every level `c^(J-m), …, c^(J)` of the synthesis, coarse to fine.
pub fn m_synthesize_levels(
    mask: &Mask,
    pyr: &ManifoldPyramid,
    settings: &MeanSettings,
) -> Result<Vec<ManifoldSequence>> {
    let mut levels = vec![pyr.coarse.clone()];
    for (layer, d) in pyr.details.iter().enumerate() {
        let refined = t_refine(mask, levels.last().unwrap(), settings)?;
        if refined.len() != d.len() {
            return Err(Error::LengthMismatch(format!(
                "detail layer {layer} has {} blocks, refinement produced {} points",
                d.len(),
                refined.len()
            )));
        }
        let kind = refined.kind;
        let points = refined
            .points
            .par_iter()
            .zip(d.blocks.par_iter())
            .map(|(base, block)| exp_at(base, &Tangent::from_coords(kind, block)?))
            .collect::<Result<Vec<_>>>()?;
        levels.push(ManifoldSequence { points, ..refined });
    }
    Ok(levels)
}

pub fn m_synthesize(
    mask: &Mask,
    pyr: &ManifoldPyramid,
    settings: &MeanSettings,
) -> Result<ManifoldSequence> {
    Ok(m_synthesize_levels(mask, pyr, settings)?.pop().unwrap())
}

/// Copy of the pyramid with every even-indexed detail set to zero.
pub fn zero_even_details(pyr: &ManifoldPyramid) -> ManifoldPyramid {
    let mut out = pyr.clone();
    for layer in &mut out.details {
        for b in layer.blocks.iter_mut().step_by(2) {
            b.iter_mut().for_each(|x| *x = 0.0);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerStats {
    pub scale: i32,
    pub max_norm: f64,
    pub even_max_norm: f64,
    pub odd_max_norm: f64,
    /// `Δ_M` of the synthesized level this layer belongs to.
    pub delta_m: f64,
}

/// Per-layer detail norms split by parity, coarse to fine; `interior` restricts
/// to indices untouched by the boundary extension.
pub fn layer_stats(pyr: &ManifoldPyramid, interior: bool) -> Result<Vec<LayerStats>> {
    let settings = pyr.meta.mean.unwrap_or_default();
    let levels = m_synthesize_levels(&pyr.meta.mask, pyr, &settings)?;
    pyr.details
        .iter()
        .zip(levels.iter().skip(1))
        .map(|(d, level)| {
            let norms = d.norms(pyr.coarse.kind)?;
            let range = if interior {
                interior_range(&pyr.meta.mask.alpha, &pyr.meta.kernel.gamma, norms.len())
            } else {
                0..=norms.len() - 1
            };
            let p = parity_norms(&norms, range);
            Ok(LayerStats {
                scale: d.scale,
                max_norm: p.max_norm,
                even_max_norm: p.even_max_norm,
                odd_max_norm: p.odd_max_norm,
                delta_m: level.mesh_size(),
            })
        })
        .collect()
}

/// Largest pointwise geodesic distance between two sequences of equal length.
pub fn max_distance(a: &ManifoldSequence, b: &ManifoldSequence) -> Result<f64> {
    Ok(pointwise_distances(a, b)?.into_iter().fold(0.0, f64::max))
}

pub fn pointwise_distances(a: &ManifoldSequence, b: &ManifoldSequence) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(format!(
            "{} vs {} points",
            a.len(),
            b.len()
        )));
    }
    a.points
        .iter()
        .zip(&b.points)
        .map(|(p, q)| distance(p, q))
        .collect()
}
