use crate::error::{Error, Result};
use crate::linear::{clamp_index, kept_count, refinement_stencil, top_indices};
use crate::manifold::so3::ANTIPODAL_MARGIN;
use crate::manifold::Tangent;
use crate::masks::Mask;
use crate::mpyramid::ManifoldPyramid;
use std::f64::consts::{PI, SQRT_2};

/// Rotation angle carried by a tangent vector; zero for Euclidean tangents.
fn rotation_angle(t: &Tangent) -> f64 {
    match t {
        Tangent::SO3(m) | Tangent::SE3(m, _) => m.norm() / SQRT_2,
        Tangent::Euclidean(_) => 0.0,
    }
}

/// Multiplies the `round(top_fraction·n)` largest-norm details of each layer by
/// `1 + gain`. Returns the enhanced pyramid and the scaled indices per layer.
pub fn enhance(
    pyr: &ManifoldPyramid,
    top_fraction: f64,
    gain: f64,
) -> Result<(ManifoldPyramid, Vec<Vec<usize>>)> {
    if !(0.0..=1.0).contains(&top_fraction) {
        return Err(Error::invalid(format!(
            "top fraction must lie in [0, 1], got {top_fraction}"
        )));
    }
    if !(gain >= 0.0) || !gain.is_finite() {
        return Err(Error::invalid(format!(
            "gain must be non-negative, got {gain}"
        )));
    }
    let kind = pyr.coarse.kind;
    let factor = 1.0 + gain;
    let mut out = pyr.clone();
    let mut scaled = Vec::with_capacity(pyr.details.len());
    let mut violations = Vec::new();
    for (l, layer) in out.details.iter_mut().enumerate() {
        let norms = layer.norms(kind)?;
        let mut chosen = top_indices(&norms, kept_count(top_fraction, norms.len()));
        chosen.sort_unstable();
        if gain > 0.0 {
            for &i in &chosen {
                let t = Tangent::from_coords(kind, &layer.blocks[i])?.scale(factor);
                if rotation_angle(&t) >= PI - ANTIPODAL_MARGIN {
                    violations.push((l, i));
                }
                layer.blocks[i] = t.to_coords();
            }
        } else {
            chosen.clear();
        }
        scaled.push(chosen);
    }
    if !violations.is_empty() {
        return Err(Error::InjectivityViolation(violations));
    }
    Ok((out, scaled))
}

/// Finest-level indices whose value can differ after the given details were changed:
/// a changed detail, or any stencil point that was itself affected one level up.
pub fn affected_indices(mask: &Mask, coarse_len: usize, changed: &[Vec<usize>]) -> Vec<bool> {
    let mut affected = vec![false; coarse_len];
    for layer in changed {
        let n = affected.len();
        let mut next: Vec<bool> = (0..2 * n - 1)
            .map(|j| {
                refinement_stencil(&mask.alpha, j as i64).any(|(k, _)| affected[clamp_index(k, n)])
            })
            .collect();
        for &i in layer {
            next[i] = true;
        }
        affected = next;
    }
    affected
}
