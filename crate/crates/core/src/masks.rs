//! Subdivision masks and the refinement/decimation pairs built from them.

use crate::error::{Error, Result};
use crate::symbol::{
    invert_symbol, pseudo_reverse_symbol, reversibility_kappa, DecimationKernel, DisplaceMode,
    LaurentPoly, PseudoReverseResult, DEFAULT_DFT_SIZE, DEFAULT_TRUNCATION_TOL, KAPPA_GRID,
    ON_CIRCLE_TOL,
};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mask {
    pub name: String,
    pub alpha: LaurentPoly,
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

impl Mask {
    pub fn new(name: impl Into<String>, alpha: LaurentPoly) -> Self {
        Mask {
            name: name.into(),
            alpha,
        }
    }

    /// The least-squares scheme: `α = (1/4, 1/3, 1/4, 1/3, 1/4, 1/3, 1/4)` on `-3..=3`.
    pub fn least_squares() -> Self {
        let q = 0.25;
        let t = 1.0 / 3.0;
        Mask::new(
            "least-squares",
            LaurentPoly::new(-3, vec![q, t, q, t, q, t, q]),
        )
    }

    /// Centered B-spline mask of degree `n`: `α_k = C(n+1, k + ⌊(n+1)/2⌋) / 2^n`.
    pub fn bspline(n: u32) -> Self {
        let shift = n.div_ceil(2) as i64;
        let coeffs = (0..=n as u64 + 1)
            .map(|j| binomial(n as u64 + 1, j) as f64 / 2f64.powi(n as i32))
            .collect();
        Mask::new(format!("bspline-{n}"), LaurentPoly::new(-shift, coeffs))
    }

    /// The interpolating four-point scheme.
    pub fn four_point() -> Self {
        let a = -1.0 / 16.0;
        let b = 9.0 / 16.0;
        Mask::new(
            "four-point",
            LaurentPoly::new(-3, vec![a, 0.0, b, 1.0, b, 0.0, a]),
        )
    }

    /// Looks up a mask by name: `least-squares`, `four-point`, `linear`,
    /// `cubic` or `bspline-<n>`.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "least-squares" | "ls" => Ok(Self::least_squares()),
            "four-point" | "dd4" => Ok(Self::four_point()),
            "linear" => Ok(Self::bspline(1)),
            "cubic" => Ok(Self::bspline(3)),
            other => other
                .strip_prefix("bspline-")
                .and_then(|n| n.parse::<u32>().ok())
                .filter(|n| (1..=20).contains(n))
                .map(Self::bspline)
                .ok_or_else(|| Error::invalid(format!("unknown mask `{other}`"))),
        }
    }

    /// `α↓2`.
    pub fn even_symbol(&self) -> LaurentPoly {
        self.alpha.even_part()
    }

    pub fn odd_symbol(&self) -> LaurentPoly {
        self.alpha.odd_part()
    }

    /// `α↓2 = δ`.
    pub fn is_interpolating(&self) -> bool {
        self.even_symbol() == LaurentPoly::delta()
    }

    /// A copy whose even-indexed coefficients come from `even` and whose odd
    /// coefficients are unchanged.
    pub fn with_even_symbol(&self, even: &LaurentPoly, name: impl Into<String>) -> Mask {
        let odd = self.odd_symbol();
        let pairs = even
            .iter()
            .map(|(k, v)| (2 * k, v))
            .chain(odd.iter().map(|(k, v)| (2 * k + 1, v)));
        Mask::new(name, LaurentPoly::from_pairs(pairs))
    }

    /// `(Σ α_{2k}, Σ α_{2k+1})`.
    pub fn parity_sums(&self) -> (f64, f64) {
        (self.even_symbol().sum(), self.odd_symbol().sum())
    }

    pub fn check_parity(&self) -> Result<()> {
        let (e, o) = self.parity_sums();
        if (e - 1.0).abs() > 1e-12 || (o - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "mask `{}` violates the parity sum condition: even {e}, odd {o}",
                self.name
            )));
        }
        Ok(())
    }

    /// `‖S_α‖_∞ = max{Σ|α_{2k}|, Σ|α_{2k+1}|}`.
    pub fn subdivision_norm(&self) -> f64 {
        self.even_symbol()
            .l1_norm()
            .max(self.odd_symbol().l1_norm())
    }

    /// The mask of `S_α^j`, i.e. `α(z) α(z²) ⋯ α(z^{2^{j-1}})`.
    pub fn iterated(&self, j: u32) -> LaurentPoly {
        (0..j).fold(LaurentPoly::delta(), |acc, i| {
            crate::symbol::convolve(&acc, &self.alpha.upsample(1 << i))
        })
    }

    /// `‖S_α^j‖_∞`: the largest absolute row sum over the `2^j` cosets.
    pub fn power_norm(&self, j: u32) -> f64 {
        let m = self.iterated(j);
        let stride = 1i64 << j;
        let mut sums = vec![0.0; stride as usize];
        for (k, v) in m.iter() {
            sums[k.rem_euclid(stride) as usize] += v.abs();
        }
        sums.into_iter().fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeSettings {
    pub xi: f64,
    pub mode: DisplaceMode,
    pub dft_size: usize,
    pub truncation_tol: f64,
    pub root_tol: f64,
}

impl Default for SchemeSettings {
    fn default() -> Self {
        SchemeSettings {
            xi: 0.0,
            mode: DisplaceMode::OnCircle,
            dft_size: DEFAULT_DFT_SIZE,
            truncation_tol: DEFAULT_TRUNCATION_TOL,
            root_tol: ON_CIRCLE_TOL,
        }
    }
}

impl SchemeSettings {
    pub fn with_xi(xi: f64) -> Self {
        SchemeSettings {
            xi,
            ..Default::default()
        }
    }
}

/// A refinement mask together with its pseudo-reversed approximation and the
/// decimation kernel obtained by inverting the approximate even symbol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scheme {
    pub mask: Mask,
    pub approx_mask: Mask,
    pub kernel: DecimationKernel,
    pub pseudo_reverse: PseudoReverseResult,
    pub settings: SchemeSettings,
}

impl Scheme {
    pub fn build(mask: Mask, settings: SchemeSettings) -> Result<Self> {
        let even = mask.even_symbol();
        let pr = pseudo_reverse_symbol(&even, settings.xi, settings.mode, settings.root_tol)?;
        let approx_mask = if pr.displaced_count == 0 {
            mask.clone()
        } else {
            mask.with_even_symbol(&pr.approx_poly, format!("{}~", mask.name))
        };
        let kernel = if approx_mask.is_interpolating() {
            DecimationKernel::identity()
        } else {
            if reversibility_kappa(&pr.approx_poly, KAPPA_GRID).is_infinite() {
                return Err(Error::NotReversible);
            }
            invert_symbol(&pr.approx_poly, settings.dft_size, settings.truncation_tol)?
        }
        .with_xi(settings.xi);
        Ok(Scheme {
            mask,
            approx_mask,
            kernel,
            pseudo_reverse: pr,
            settings,
        })
    }

    /// `‖α − α̃‖₁`.
    pub fn mask_perturbation(&self) -> f64 {
        self.mask.alpha.sub(&self.approx_mask.alpha).l1_norm()
    }

    pub fn kappa(&self) -> f64 {
        self.pseudo_reverse.kappa_after
    }
}
