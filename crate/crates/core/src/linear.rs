//! Scalar subdivision, decimation and the pyramid transform built on them.
//!
//! Both operators extend their input by repeating the endpoint values. Sequences
//! analysed over `m` layers must have length `n·2^m + 1`; one decimation step
//! maps length `2k+1` to `k+1` and one refinement step maps `k+1` back to `2k+1`.

use crate::error::{Error, Result};
use crate::manifold::MeanSettings;
use crate::masks::Mask;
use crate::symbol::{DecimationKernel, LaurentPoly};
use serde::{Deserialize, Serialize};
use std::ops::RangeInclusive;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealSequence {
    pub values: Vec<f64>,
    /// Grid spacing is `2^-scale`.
    pub scale: i32,
    /// Parameter value of the first sample.
    pub origin: f64,
}

impl RealSequence {
    pub fn new(values: Vec<f64>, scale: i32, origin: f64) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::LengthMismatch(format!(
                "a sequence needs at least 2 samples, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite sample at index {i}")));
        }
        Ok(RealSequence {
            values,
            scale,
            origin,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        2f64.powi(-self.scale)
    }

    pub fn grid(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.len())
            .map(|i| self.origin + i as f64 * h)
            .collect()
    }

    pub fn sup_norm(&self) -> f64 {
        sup_norm(&self.values)
    }
}

pub(crate) fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `Δc`, the largest consecutive difference.
pub fn max_consecutive_difference(values: &[f64]) -> f64 {
    values
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max)
}

#[inline]
pub(crate) fn clamp_index(k: i64, n: usize) -> usize {
    k.clamp(0, n as i64 - 1) as usize
}

/// Coarse indices `k` and weights `α_{j-2k}` contributing to fine index `j`.
pub(crate) fn refinement_stencil(
    alpha: &LaurentPoly,
    j: i64,
) -> impl Iterator<Item = (i64, f64)> + '_ {
    let lo =
        (j - alpha.max_index()).div_euclid(2) + ((j - alpha.max_index()).rem_euclid(2) != 0) as i64;
    let hi = (j - alpha.min_index()).div_euclid(2);
    (lo..=hi.max(lo - 1)).map(move |k| (k, alpha.coeff(j - 2 * k)))
}

fn refine_values(alpha: &LaurentPoly, c: &[f64]) -> Vec<f64> {
    let n = c.len();
    (0..2 * n as i64 - 1)
        .map(|j| {
            refinement_stencil(alpha, j)
                .map(|(k, w)| w * c[clamp_index(k, n)])
                .sum()
        })
        .collect()
}

fn decimate_values(gamma: &LaurentPoly, c: &[f64]) -> Vec<f64> {
    let even: Vec<f64> = c.iter().step_by(2).copied().collect();
    let n = even.len();
    (0..n as i64)
        .map(|j| {
            gamma
                .iter()
                .map(|(g, w)| w * even[clamp_index(j - g, n)])
                .sum()
        })
        .collect()
}

/// `S_α(c)_j = Σ_k α_{j-2k} c_k`.
pub fn subdivide(mask: &Mask, c: &RealSequence) -> RealSequence {
    RealSequence {
        values: refine_values(&mask.alpha, &c.values),
        scale: c.scale + 1,
        origin: c.origin,
    }
}

/// `D_γ(c)_j = Σ_k γ_{j-k} c_{2k}`.
pub fn decimate(kernel: &DecimationKernel, c: &RealSequence) -> RealSequence {
    RealSequence {
        values: decimate_values(&kernel.gamma, &c.values),
        scale: c.scale - 1,
        origin: c.origin,
    }
}

/// Fine indices of a layer of length `n` whose detail is computed without any
/// boundary extension, for either refinement or decimation.
pub fn interior_range(alpha: &LaurentPoly, gamma: &LaurentPoly, n: usize) -> RangeInclusive<usize> {
    let n = n as i64;
    let lo = (alpha.max_index() + 2 * gamma.max_index().max(0)).max(0);
    let hi = (n - 1 + alpha.min_index() + 2 * gamma.min_index().min(0)).min(n - 1);
    if hi < lo {
        #[allow(clippy::reversed_empty_ranges)]
        return 1..=0;
    }
    lo as usize..=hi as usize
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PyramidMeta {
    pub mask: Mask,
    pub xi: f64,
    pub kernel: DecimationKernel,
    pub kernel_fingerprint: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Mean-solver settings of manifold pyramids.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<MeanSettings>,
    /// Experiment settings that produced this pyramid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

impl PyramidMeta {
    pub fn new(mask: &Mask, kernel: &DecimationKernel) -> Self {
        PyramidMeta {
            mask: mask.clone(),
            xi: kernel.xi,
            kernel: kernel.clone(),
            kernel_fingerprint: kernel.fingerprint(),
            seed: None,
            mean: None,
            config: None,
        }
    }
}

/// `{c^(J-m); d^(J-m+1), …, d^(J)}` with details ordered coarse to fine.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearPyramid {
    pub coarse: RealSequence,
    pub details: Vec<RealSequence>,
    pub meta: PyramidMeta,
}

/// Checks that a sequence of length `len` can be decimated `m` times.
pub fn check_length(len: usize, m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::invalid("number of layers must be at least 1"));
    }
    let block = 1usize
        .checked_shl(m as u32)
        .ok_or_else(|| Error::invalid(format!("too many layers: {m}")))?;
    if len < block + 1 || !(len - 1).is_multiple_of(block) {
        return Err(Error::LengthMismatch(format!(
            "length {len} is not of the form n·2^{m}+1 with n ≥ 1"
        )));
    }
    Ok(())
}

pub fn analyze(
    mask: &Mask,
    kernel: &DecimationKernel,
    c: &RealSequence,
    m: usize,
) -> Result<LinearPyramid> {
    check_length(c.len(), m)?;
    let mut current = c.clone();
    let mut details = Vec::with_capacity(m);
    for _ in 0..m {
        let coarse = decimate(kernel, &current);
        let predicted = refine_values(&mask.alpha, &coarse.values);
        let d = current
            .values
            .iter()
            .zip(&predicted)
            .map(|(a, b)| a - b)
            .collect();
        details.push(RealSequence {
            values: d,
            scale: current.scale,
            origin: current.origin,
        });
        current = coarse;
    }
    details.reverse();
    Ok(LinearPyramid {
        coarse: current,
        details,
        meta: PyramidMeta::new(mask, kernel),
    })
}

pub fn synthesize(mask: &Mask, pyr: &LinearPyramid) -> Result<RealSequence> {
    let mut current = pyr.coarse.clone();
    for (layer, d) in pyr.details.iter().enumerate() {
        let refined = subdivide(mask, &current);
        if refined.len() != d.len() {
            return Err(Error::LengthMismatch(format!(
                "detail layer {layer} has length {}, refinement produced {}",
                d.len(),
                refined.len()
            )));
        }
        current = RealSequence {
            values: refined
                .values
                .iter()
                .zip(&d.values)
                .map(|(a, b)| a + b)
                .collect(),
            scale: refined.scale,
            origin: refined.origin,
        };
    }
    Ok(current)
}

/// `π(c) = [(I − S_α D_γ) c]↓2`.
pub fn pi_apply(mask: &Mask, kernel: &DecimationKernel, c: &RealSequence) -> RealSequence {
    let predicted = refine_values(&mask.alpha, &decimate_values(&kernel.gamma, &c.values));
    RealSequence {
        values: c
            .values
            .iter()
            .zip(&predicted)
            .step_by(2)
            .map(|(a, b)| a - b)
            .collect(),
        scale: c.scale - 1,
        origin: c.origin,
    }
}

/// `‖α − α̃‖₁ · ‖γ‖₁`.
pub fn pi_operator_norm_bound(mask: &Mask, approx_mask: &Mask, kernel: &DecimationKernel) -> f64 {
    mask.alpha.sub(&approx_mask.alpha).l1_norm() * kernel.gamma.l1_norm()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetailBounds {
    /// `L(ξ) = ‖α−α̃‖₁ K_γ + ‖γ‖₁ K_{α−α̃}`.
    pub l_xi: f64,
    /// `P(ξ) = L(ξ) ‖γ‖₁^J ‖f′‖_∞`.
    pub p_xi: f64,
}

impl DetailBounds {
    /// Bound on `‖d^(ℓ)↓2‖_∞` for samples of a function with derivative bounded by the recorded value.
    pub fn decay_bound(&self, kernel: &DecimationKernel, level: i32) -> f64 {
        self.p_xi * (2.0 * kernel.gamma.l1_norm()).powi(-level)
    }
}

pub fn detail_bounds(
    mask: &Mask,
    approx_mask: &Mask,
    kernel: &DecimationKernel,
    scale: i32,
    derivative_sup: f64,
) -> DetailBounds {
    let diff = mask.alpha.sub(&approx_mask.alpha);
    let g1 = kernel.gamma.l1_norm();
    let l_xi =
        diff.l1_norm() * kernel.gamma.first_moment_constant() + g1 * diff.first_moment_constant();
    DetailBounds {
        l_xi,
        p_xi: l_xi * g1.powi(scale) * derivative_sup,
    }
}

/// `max(1, max_{1≤j≤m} ‖S_α^j‖_∞)`.
pub fn synthesis_constant(mask: &Mask, m: usize) -> f64 {
    (1..=m as u32)
        .map(|j| mask.power_norm(j))
        .fold(1.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ThresholdPolicy {
    /// Zero every even-indexed detail.
    ZeroEven,
    /// Keep the `round(q·n)` largest-magnitude details of each layer.
    KeepTopFraction(f64),
    /// Zero details with magnitude below `t`.
    AbsThreshold(f64),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SparsityStats {
    pub per_layer_kept: Vec<usize>,
    pub per_layer_total: Vec<usize>,
    pub kept: usize,
    pub total: usize,
}

/// Number of entries kept from `n` under fraction `q`, rounding halves up.
pub fn kept_count(q: f64, n: usize) -> usize {
    ((q * n as f64 + 0.5).floor() as usize).min(n)
}

/// Indices of the `keep` largest scores; ties go to the lower index.
pub(crate) fn top_indices(scores: &[f64], keep: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    order.truncate(keep);
    order
}

pub fn threshold_details(
    pyr: &LinearPyramid,
    policy: ThresholdPolicy,
) -> Result<(LinearPyramid, SparsityStats)> {
    match policy {
        ThresholdPolicy::KeepTopFraction(q) if !(0.0..=1.0).contains(&q) => {
            return Err(Error::invalid(format!(
                "fraction must lie in [0, 1], got {q}"
            )))
        }
        ThresholdPolicy::AbsThreshold(t) if !(t >= 0.0) => {
            return Err(Error::invalid(format!(
                "threshold must be non-negative, got {t}"
            )))
        }
        _ => {}
    }
    let mut out = pyr.clone();
    let mut stats = SparsityStats::default();
    for layer in &mut out.details {
        let v = &mut layer.values;
        match policy {
            ThresholdPolicy::ZeroEven => v.iter_mut().step_by(2).for_each(|x| *x = 0.0),
            ThresholdPolicy::KeepTopFraction(q) => {
                let scores: Vec<f64> = v.iter().map(|x| x.abs()).collect();
                let keep = top_indices(&scores, kept_count(q, v.len()));
                let mut mask = vec![false; v.len()];
                keep.into_iter().for_each(|i| mask[i] = true);
                v.iter_mut()
                    .zip(mask)
                    .filter(|(_, k)| !k)
                    .for_each(|(x, _)| *x = 0.0);
            }
            ThresholdPolicy::AbsThreshold(t) => {
                v.iter_mut().filter(|x| x.abs() < t).for_each(|x| *x = 0.0)
            }
        }
        let kept = v.iter().filter(|x| **x != 0.0).count();
        stats.per_layer_kept.push(kept);
        stats.per_layer_total.push(v.len());
        stats.kept += kept;
        stats.total += v.len();
    }
    Ok((out, stats))
}

/// Per-layer sup norms of all, even-indexed and odd-indexed details.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerNorms {
    pub max_norm: f64,
    pub even_max_norm: f64,
    pub odd_max_norm: f64,
}

pub fn parity_norms(norms: &[f64], range: RangeInclusive<usize>) -> LayerNorms {
    let mut out = LayerNorms {
        max_norm: 0.0,
        even_max_norm: 0.0,
        odd_max_norm: 0.0,
    };
    for i in range.filter(|&i| i < norms.len()) {
        out.max_norm = out.max_norm.max(norms[i]);
        if i % 2 == 0 {
            out.even_max_norm = out.even_max_norm.max(norms[i]);
        } else {
            out.odd_max_norm = out.odd_max_norm.max(norms[i]);
        }
    }
    out
}

impl LinearPyramid {
    pub fn layers(&self) -> usize {
        self.details.len()
    }

    /// Parity-split norms per layer, coarse to fine; `interior` restricts to
    /// indices untouched by the boundary extension.
    pub fn layer_norms(&self, interior: bool) -> Vec<LayerNorms> {
        self.details
            .iter()
            .map(|d| {
                let abs: Vec<f64> = d.values.iter().map(|x| x.abs()).collect();
                let range = if interior {
                    interior_range(&self.meta.mask.alpha, &self.meta.kernel.gamma, abs.len())
                } else {
                    0..=abs.len() - 1
                };
                parity_norms(&abs, range)
            })
            .collect()
    }
}
