use super::{exp_at, log, ManifoldPoint, Tangent};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanSettings {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for MeanSettings {
    fn default() -> Self {
        MeanSettings {
            tol: 1e-12,
            max_iter: 100,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MeanStats {
    pub iterations: usize,
    pub residual: f64,
}

struct Eval {
    grad: Tangent,
    residual: f64,
    /// `Σ |w_i| ‖log_x c_i‖`, the scale the residual is measured against.
    spread: f64,
    objective: f64,
}

fn evaluate(
    x: &ManifoldPoint,
    points: &[ManifoldPoint],
    weights: &[f64],
    signed: bool,
) -> Result<Eval> {
    let mut grad = Tangent::zeros(x.kind());
    let mut spread = 0.0;
    let mut frechet = 0.0;
    for (c, &w) in points.iter().zip(weights) {
        let v = log(x, c)?.vec;
        let n = v.norm();
        spread += w.abs() * n;
        frechet += w * n * n;
        grad = grad.axpy(w, &v)?;
    }
    let residual = grad.norm();
    Ok(Eval {
        objective: if signed { residual } else { 0.5 * frechet },
        grad,
        residual,
        spread,
    })
}

/// Weighted Riemannian center of mass by damped fixed-point iteration
/// `x ← x ⊕ η Σ w_i (c_i ⊖ x)`.
///
/// Stops once `‖Σ w_i (c_i ⊖ x)‖ ≤ tol · (1 + Σ |w_i| ‖c_i ⊖ x‖)`. Euclidean
/// inputs return the affine combination directly.
pub fn weighted_mean(
    points: &[ManifoldPoint],
    weights: &[f64],
    settings: &MeanSettings,
) -> Result<ManifoldPoint> {
    weighted_mean_with_stats(points, weights, settings).map(|(x, _)| x)
}

pub fn weighted_mean_with_stats(
    points: &[ManifoldPoint],
    weights: &[f64],
    settings: &MeanSettings,
) -> Result<(ManifoldPoint, MeanStats)> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    if points.len() != weights.len() {
        return Err(Error::LengthMismatch(format!(
            "{} points but {} weights",
            points.len(),
            weights.len()
        )));
    }
    let kind = points[0].kind();
    if let Some(p) = points.iter().find(|p| p.kind() != kind) {
        return Err(Error::TagMismatch(kind.to_string(), p.kind().to_string()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(format!(
            "weights must sum to 1, got {total}"
        )));
    }

    if let ManifoldPoint::Euclidean(first) = &points[0] {
        let mut acc = first.clone() * 0.0;
        for (p, &w) in points.iter().zip(weights) {
            if let ManifoldPoint::Euclidean(v) = p {
                acc += v * w;
            }
        }
        return Ok((ManifoldPoint::Euclidean(acc), MeanStats::default()));
    }

    let signed = weights.iter().any(|&w| w < 0.0);
    let start = weights.iter().enumerate().fold(0, |best, (i, w)| {
        if w.abs() > weights[best].abs() {
            i
        } else {
            best
        }
    });
    let mut x = points[start].clone();
    let mut current = evaluate(&x, points, weights, signed)?;

    for iteration in 0..=settings.max_iter {
        if current.residual <= settings.tol * (1.0 + current.spread) {
            return Ok((
                x,
                MeanStats {
                    iterations: iteration,
                    residual: current.residual,
                },
            ));
        }
        if iteration == settings.max_iter {
            break;
        }
        let mut eta = 1.0;
        loop {
            let candidate = exp_at(&x, &current.grad.scale(eta))?;
            let next = evaluate(&candidate, points, weights, signed);
            match next {
                Ok(next)
                    if next.objective <= current.objective || next.residual < current.residual =>
                {
                    x = candidate;
                    current = next;
                    break;
                }
                _ => {
                    eta *= 0.5;
                    if eta < 1e-10 {
                        return Err(Error::NonConvergence {
                            context: "weighted mean (step damping exhausted)".into(),
                            iterations: iteration,
                            residual: current.residual,
                        });
                    }
                }
            }
        }
    }
    Err(Error::NonConvergence {
        context: "weighted mean".into(),
        iterations: settings.max_iter,
        residual: current.residual,
    })
}
