//! Plot-ready CSV for the figures: root displacement, decimation coefficients,
//! basic limit functions, convolutional error and detail norms.

use crate::error::{Error, Result};
use crate::io::CsvTable;
use crate::linear::{subdivide, LinearPyramid, RealSequence};
use crate::masks::{Mask, Scheme, SchemeSettings};
use crate::mpyramid::ManifoldPyramid;
use crate::symbol::{convolve, LaurentPoly};

/// `‖δ − γ * p‖₂`.
pub fn convolution_error_l2(gamma: &LaurentPoly, p: &LaurentPoly) -> f64 {
    convolve(gamma, p).sub(&LaurentPoly::delta()).l2_norm()
}

/// Columns `xi, kappa, mask_perturbation_l1, gamma_l1, residual`; the residual is
/// measured against the original even symbol. Values of ξ at which the symbol is not
/// reversible are skipped.
pub fn xi_sweep(mask: &Mask, xis: &[f64], base: &SchemeSettings) -> Result<CsvTable> {
    let mut t = CsvTable::new([
        "xi",
        "kappa",
        "mask_perturbation_l1",
        "gamma_l1",
        "residual",
    ]);
    let even = mask.even_symbol();
    for &xi in xis {
        let s = match Scheme::build(mask.clone(), SchemeSettings { xi, ..base.clone() }) {
            Ok(s) => s,
            Err(Error::NotReversible) => {
                log::warn!("skipping ξ = {xi}: symbol is not reversible");
                continue;
            }
            Err(e) => return Err(e),
        };
        t.push(vec![
            xi,
            s.kappa(),
            s.mask_perturbation(),
            s.kernel.gamma.l1_norm(),
            convolution_error_l2(&s.kernel.gamma, &even),
        ]);
    }
    Ok(t)
}

/// Columns `xi, re, im, multiplicity, displaced`: original roots at ξ = 0 followed
/// by the roots of each approximate symbol.
pub fn root_displacement(mask: &Mask, xis: &[f64], base: &SchemeSettings) -> Result<CsvTable> {
    let mut t = CsvTable::new(["xi", "re", "im", "multiplicity", "displaced"]);
    for &xi in xis {
        let s = Scheme::build(mask.clone(), SchemeSettings { xi, ..base.clone() });
        let pr = match s {
            Ok(s) => s.pseudo_reverse,
            Err(Error::NotReversible) => crate::symbol::pseudo_reverse_symbol(
                &mask.even_symbol(),
                xi,
                base.mode,
                base.root_tol,
            )?,
            Err(e) => return Err(e),
        };
        for (orig, moved) in pr
            .original_roots
            .roots
            .iter()
            .zip(&pr.displaced_roots.roots)
        {
            let displaced = (orig.re - moved.re).abs() + (orig.im - moved.im).abs() > 0.0;
            t.push(vec![
                xi,
                moved.re,
                moved.im,
                moved.multiplicity as f64,
                displaced as u8 as f64,
            ]);
        }
    }
    Ok(t)
}

/// Columns `xi, k, gamma`.
pub fn decimation_coefficients(
    mask: &Mask,
    xis: &[f64],
    base: &SchemeSettings,
) -> Result<CsvTable> {
    let mut t = CsvTable::new(["xi", "k", "gamma"]);
    for &xi in xis {
        let s = Scheme::build(mask.clone(), SchemeSettings { xi, ..base.clone() })?;
        for (k, g) in s.kernel.gamma.iter() {
            t.push(vec![xi, k as f64, g]);
        }
    }
    Ok(t)
}

/// `levels` refinements of δ by the approximate mask: columns `xi, x, value`.
pub fn limit_functions(
    mask: &Mask,
    xis: &[f64],
    levels: u32,
    base: &SchemeSettings,
) -> Result<CsvTable> {
    let mut t = CsvTable::new(["xi", "x", "value"]);
    for &xi in xis {
        let approx = match Scheme::build(mask.clone(), SchemeSettings { xi, ..base.clone() }) {
            Ok(s) => s.approx_mask,
            Err(Error::NotReversible) => mask.clone(),
            Err(e) => return Err(e),
        };
        let half = approx
            .alpha
            .min_index()
            .abs()
            .max(approx.alpha.max_index().abs()) as usize
            + 1;
        let mut values = vec![0.0; 2 * half + 1];
        values[half] = 1.0;
        let mut c = RealSequence::new(values, 0, -(half as f64))?;
        for _ in 0..levels {
            c = subdivide(&approx, &c);
        }
        let h = c.spacing();
        for (i, v) in c.values.iter().enumerate() {
            t.push(vec![xi, c.origin + i as f64 * h, *v]);
        }
    }
    Ok(t)
}

/// Columns `layer, scale, index, abs`, layers coarse to fine.
pub fn linear_detail_magnitudes(pyr: &LinearPyramid) -> CsvTable {
    let mut t = CsvTable::new(["layer", "scale", "index", "abs"]);
    for (l, d) in pyr.details.iter().enumerate() {
        for (i, v) in d.values.iter().enumerate() {
            t.push(vec![l as f64, d.scale as f64, i as f64, v.abs()]);
        }
    }
    t
}

/// Columns `layer, scale, index, norm`, layers coarse to fine.
pub fn manifold_detail_norms(pyr: &ManifoldPyramid) -> Result<CsvTable> {
    let mut t = CsvTable::new(["layer", "scale", "index", "norm"]);
    for (l, d) in pyr.details.iter().enumerate() {
        for (i, n) in d.norms(pyr.coarse.kind)?.into_iter().enumerate() {
            t.push(vec![l as f64, d.scale as f64, i as f64, n]);
        }
    }
    Ok(t)
}
