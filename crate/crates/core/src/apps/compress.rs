use crate::error::{Error, Result};
use crate::linear::{kept_count, top_indices};
use crate::manifold::MeanSettings;
use crate::mpyramid::{m_synthesize, pointwise_distances, ManifoldPyramid};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompressionReport {
    pub original_count: usize,
    pub stored_coarse_count: usize,
    pub stored_detail_count: usize,
    pub total_detail_count: usize,
    pub keep_fraction: f64,
    /// `(layer, index)` of every kept detail, layers counted coarse to fine.
    pub kept: Vec<(usize, usize)>,
    /// Geodesic distance between the full and the compressed synthesis.
    pub errors: Vec<f64>,
    pub max_error: f64,
    pub mean_error: f64,
    pub argmax_error: usize,
}

/// Zeroes all but the `round(q·N)` largest-norm details, ranked across all layers.
pub fn threshold_global(
    pyr: &ManifoldPyramid,
    q: f64,
) -> Result<(ManifoldPyramid, Vec<(usize, usize)>)> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::invalid(format!(
            "keep fraction must lie in [0, 1], got {q}"
        )));
    }
    let kind = pyr.coarse.kind;
    let mut slots = Vec::new();
    let mut scores = Vec::new();
    for (l, layer) in pyr.details.iter().enumerate() {
        for (i, n) in layer.norms(kind)?.into_iter().enumerate() {
            slots.push((l, i));
            scores.push(n);
        }
    }
    let mut kept: Vec<(usize, usize)> = top_indices(&scores, kept_count(q, scores.len()))
        .into_iter()
        .map(|k| slots[k])
        .collect();
    kept.sort_unstable();
    let mut out = pyr.clone();
    for (l, layer) in out.details.iter_mut().enumerate() {
        for (i, block) in layer.blocks.iter_mut().enumerate() {
            if kept.binary_search(&(l, i)).is_err() {
                block.iter_mut().for_each(|x| *x = 0.0);
            }
        }
    }
    Ok((out, kept))
}

/// Global thresholding followed by synthesis of both pyramids and a per-index error audit.
pub fn compress(
    pyr: &ManifoldPyramid,
    q: f64,
    settings: &MeanSettings,
) -> Result<(ManifoldPyramid, CompressionReport)> {
    let (out, kept) = threshold_global(pyr, q)?;
    let full = m_synthesize(&pyr.meta.mask, pyr, settings)?;
    let lossy = m_synthesize(&out.meta.mask, &out, settings)?;
    let errors = pointwise_distances(&full, &lossy)?;
    let (argmax_error, max_error) = errors.iter().copied().enumerate().fold(
        (0, 0.0),
        |best, (i, e)| if e > best.1 { (i, e) } else { best },
    );
    let report = CompressionReport {
        original_count: full.len(),
        stored_coarse_count: pyr.coarse.len(),
        stored_detail_count: kept.len(),
        total_detail_count: pyr.details.iter().map(|d| d.len()).sum(),
        keep_fraction: q,
        kept,
        mean_error: errors.iter().sum::<f64>() / errors.len() as f64,
        max_error,
        argmax_error,
        errors,
    };
    Ok((out, report))
}
