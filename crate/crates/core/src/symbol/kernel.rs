use super::poly::{convolve, LaurentPoly};
use super::{circle_extrema, reversibility_kappa, KAPPA_GRID};
use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

pub const DEFAULT_DFT_SIZE: usize = 8192;
pub const DEFAULT_TRUNCATION_TOL: f64 = 1e-12;

/// Truncated, sum-normalized reciprocal of an even sub-symbol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecimationKernel {
    pub gamma: LaurentPoly,
    pub xi: f64,
    pub truncation_tol: f64,
    pub dft_size: usize,
    /// `‖δ − γ * symbol‖_∞`.
    pub residual: f64,
    pub normalized: bool,
    /// The symbol that was inverted.
    pub symbol: LaurentPoly,
}

impl DecimationKernel {
    /// `γ = δ`, the kernel of an interpolating scheme.
    pub fn identity() -> Self {
        DecimationKernel {
            gamma: LaurentPoly::delta(),
            xi: 0.0,
            truncation_tol: DEFAULT_TRUNCATION_TOL,
            dft_size: DEFAULT_DFT_SIZE,
            residual: 0.0,
            normalized: true,
            symbol: LaurentPoly::delta(),
        }
    }

    pub fn with_xi(mut self, xi: f64) -> Self {
        self.xi = xi;
        self
    }

    pub fn recompute_residual(&self) -> f64 {
        convolution_residual(&self.gamma, &self.symbol)
    }

    /// Short hexadecimal digest of the coefficients, for labelling outputs.
    pub fn fingerprint(&self) -> String {
        let mut h: u64 = 0xcbf29ce484222325;
        let mut feed = |bytes: [u8; 8]| {
            for b in bytes {
                h ^= b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        feed(self.gamma.min_index().to_le_bytes());
        for c in self.gamma.coeffs() {
            feed(c.to_le_bytes());
        }
        format!("{h:016x}")
    }
}

pub(crate) fn convolution_residual(gamma: &LaurentPoly, symbol: &LaurentPoly) -> f64 {
    convolve(gamma, symbol)
        .sub(&LaurentPoly::delta())
        .sup_norm()
}

fn fourier_coefficients(p: &LaurentPoly, n: usize) -> Vec<f64> {
    let mut buf: Vec<Complex64> = (0..n)
        .map(|k| p.eval_circle(TAU * k as f64 / n as f64).inv())
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf.iter().map(|c| c.re / n as f64).collect()
}

fn signed_index(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

fn coefficient_at(coeffs: &[f64], index: i64) -> f64 {
    let n = coeffs.len() as i64;
    coeffs[index.rem_euclid(n) as usize]
}

/// Inverts `p_tilde` by sampling `1/p_tilde` on the circle and taking its
/// discrete Fourier coefficients, then truncates and normalizes.
pub fn invert_symbol(
    p_tilde: &LaurentPoly,
    dft_size: usize,
    truncation_tol: f64,
) -> Result<DecimationKernel> {
    if !dft_size.is_power_of_two() || dft_size < 4096 {
        return Err(Error::invalid(format!(
            "DFT size must be a power of two of at least 4096, got {dft_size}"
        )));
    }
    if !(truncation_tol >= 0.0) {
        return Err(Error::invalid("truncation tolerance must be non-negative"));
    }
    if reversibility_kappa(p_tilde, KAPPA_GRID).is_infinite() {
        return Err(Error::NotReversible);
    }

    let coarse = fourier_coefficients(p_tilde, dft_size);
    let fine = fourier_coefficients(p_tilde, 2 * dft_size);
    let peak = coarse.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let threshold = truncation_tol * peak;

    let kept: Vec<i64> = (0..dft_size)
        .filter(|&k| coarse[k].abs() >= threshold)
        .map(|k| signed_index(k, dft_size))
        .collect();
    let lo = *kept.iter().min().unwrap();
    let hi = *kept.iter().max().unwrap();

    for index in lo..=hi {
        let change = (coefficient_at(&coarse, index) - coefficient_at(&fine, index)).abs();
        if change > threshold.max(f64::EPSILON * peak) {
            return Err(Error::AliasingDetected { index, change });
        }
    }

    let raw = LaurentPoly::new(lo, (lo..=hi).map(|k| coefficient_at(&coarse, k)).collect());
    let gamma = raw.scale(1.0 / raw.sum());
    let residual = convolution_residual(&gamma, p_tilde);
    log::debug!(
        "inverted symbol: support [{}, {}], residual {residual:e}",
        gamma.min_index(),
        gamma.max_index()
    );
    Ok(DecimationKernel {
        gamma,
        xi: 0.0,
        truncation_tol,
        dft_size,
        residual,
        normalized: true,
        symbol: p_tilde.clone(),
    })
}

/// Constants `(C, λ)` of the geometric decay bound `|b_k| ≤ C λ^|k|` for the
/// reciprocal of a positive `s`-banded symbol.
pub fn decay_envelope(kappa: f64, s: usize, inf_abs: f64) -> (f64, f64) {
    let sq = kappa.sqrt();
    let lambda = ((sq - 1.0) / (sq + 1.0)).powf(1.0 / s.max(1) as f64);
    let c = (1.0 / inf_abs) * f64::max(1.0, (1.0 + sq).powi(2) / (2.0 * kappa));
    (c, lambda)
}

/// Coefficient envelope for `1/p`, obtained by applying [`decay_envelope`] to
/// the positive symbol `|p|²` and multiplying back by `conj(p)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayEnvelope {
    pub scale: f64,
    pub lambda: f64,
    pub lo: i64,
    pub hi: i64,
}

impl DecayEnvelope {
    pub fn for_symbol(p: &LaurentPoly) -> Self {
        let (sup, inf) = circle_extrema(p, KAPPA_GRID);
        let kappa_sq = (sup / inf).powi(2);
        let (c, lambda) = decay_envelope(kappa_sq, p.span().max(1), inf * inf);
        DecayEnvelope {
            scale: p.l1_norm() * c,
            lambda: if p.span() == 0 { 0.0 } else { lambda },
            lo: -p.max_index(),
            hi: -p.min_index(),
        }
    }

    pub fn bound(&self, k: i64) -> f64 {
        let dist = if k < self.lo {
            self.lo - k
        } else if k > self.hi {
            k - self.hi
        } else {
            0
        };
        self.scale * self.lambda.powi(dist as i32)
    }
}
