//! Laurent-polynomial symbol calculus.
//!
//! Covers root finding, pseudo-reversing of even sub-symbols, the reversibility
//! condition number and inversion of a symbol into a decimation kernel.

mod kernel;
mod poly;
mod roots;

pub use kernel::{
    decay_envelope, invert_symbol, DecayEnvelope, DecimationKernel, DEFAULT_DFT_SIZE,
    DEFAULT_TRUNCATION_TOL,
};
pub use poly::{convolve, LaurentPoly};
pub use roots::{find_roots, Root, RootSet, CLUSTER_RADIUS, DEFAULT_ROOT_TOL, MAX_ITERATIONS};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

pub const KAPPA_GRID: usize = 1 << 15;
/// Distance from the unit circle under which a root counts as lying on it.
pub const ON_CIRCLE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisplaceMode {
    OnCircle,
    OutsideCircle,
}

impl std::str::FromStr for DisplaceMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "on_circle" | "on-circle" | "on" => Ok(DisplaceMode::OnCircle),
            "outside_circle" | "outside-circle" | "outside" => Ok(DisplaceMode::OutsideCircle),
            _ => Err(Error::invalid(format!("unknown displacement mode `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PseudoReverseResult {
    pub xi: f64,
    pub mode: DisplaceMode,
    pub approx_poly: LaurentPoly,
    pub original_roots: RootSet,
    /// Roots of `approx_poly`, displaced ones included.
    pub displaced_roots: RootSet,
    pub displaced_count: usize,
    pub kappa_before: f64,
    pub kappa_after: f64,
}

/// `(sup |p|, inf |p|)` over the unit circle.
pub fn circle_extrema(p: &LaurentPoly, grid_size: usize) -> (f64, f64) {
    if p.is_zero() {
        return (0.0, 0.0);
    }
    let grid_size = grid_size.max(1);
    let h = TAU / grid_size as f64;
    let abs_at = |t: f64| p.eval_circle(t).norm();
    let (mut imax, mut imin) = (0usize, 0usize);
    let (mut vmax, mut vmin) = (f64::NEG_INFINITY, f64::INFINITY);
    for k in 0..grid_size {
        let v = abs_at(k as f64 * h);
        if v > vmax {
            vmax = v;
            imax = k;
        }
        if v < vmin {
            vmin = v;
            imin = k;
        }
    }
    let centre_max = imax as f64 * h;
    let centre_min = imin as f64 * h;
    let sup = vmax.max(-golden_min(|t| -abs_at(t), centre_max - h, centre_max + h));
    let inf = vmin.min(golden_min(abs_at, centre_min - h, centre_min + h));
    (sup, inf)
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..60 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    f1.min(f2)
}

/// `sup|p| / inf|p|` on the unit circle; infinite when `p` (nearly) vanishes there.
pub fn reversibility_kappa(p: &LaurentPoly, grid_size: usize) -> f64 {
    let (sup, inf) = circle_extrema(p, grid_size);
    if inf <= 1e-14 * sup || sup == 0.0 {
        f64::INFINITY
    } else {
        sup / inf
    }
}

/// Pushes the selected roots of `p` to `(1+ξ)r` and renormalizes at `z = 1`.
pub fn pseudo_reverse_symbol(
    p: &LaurentPoly,
    xi: f64,
    mode: DisplaceMode,
    root_tol: f64,
) -> Result<PseudoReverseResult> {
    if !(xi >= 0.0) || !xi.is_finite() {
        return Err(Error::InvalidXi(xi));
    }
    if p.sum() == 0.0 {
        return Err(Error::invalid("symbol vanishes at z = 1"));
    }
    let original_roots = find_roots(p, DEFAULT_ROOT_TOL)?;
    let selected = |r: &Root| {
        let m = r.value().norm();
        match mode {
            DisplaceMode::OnCircle => (m - 1.0).abs() <= root_tol,
            DisplaceMode::OutsideCircle => m > 1.0 + root_tol,
        }
    };
    let displaced_count: usize = original_roots
        .roots
        .iter()
        .filter(|r| selected(r))
        .map(|r| r.multiplicity)
        .sum();

    let kappa_before = reversibility_kappa(p, KAPPA_GRID);
    if displaced_count == 0 {
        return Ok(PseudoReverseResult {
            xi,
            mode,
            approx_poly: p.clone(),
            displaced_roots: original_roots.clone(),
            original_roots,
            displaced_count,
            kappa_before,
            kappa_after: kappa_before,
        });
    }

    let moved = RootSet {
        roots: original_roots
            .roots
            .iter()
            .map(|r| {
                let f = if selected(r) { 1.0 + xi } else { 1.0 };
                Root {
                    re: r.re * f,
                    im: r.im * f,
                    multiplicity: r.multiplicity,
                }
            })
            .collect(),
        leading_coeff: original_roots.leading_coeff,
    };
    let coeffs: Vec<f64> = moved.reconstruct().iter().map(|c| c.re).collect();
    let raw = LaurentPoly::new(p.min_index(), coeffs);
    let approx_poly = raw.scale(1.0 / raw.sum());
    let kappa_after = reversibility_kappa(&approx_poly, KAPPA_GRID);
    let displaced_roots = RootSet {
        leading_coeff: moved.leading_coeff / raw.sum(),
        roots: moved.roots,
    };
    Ok(PseudoReverseResult {
        xi,
        mode,
        approx_poly,
        original_roots,
        displaced_roots,
        displaced_count,
        kappa_before,
        kappa_after,
    })
}
