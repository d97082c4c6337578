use crate::error::{Error, Result};
use crate::manifold::MeanSettings;
use crate::masks::{Mask, Scheme, SchemeSettings};
use crate::symbol::{DisplaceMode, DEFAULT_DFT_SIZE, DEFAULT_TRUNCATION_TOL, ON_CIRCLE_TOL};
use serde::{Deserialize, Serialize};

/// Translation path `p(t) = (r(t) cos 2πνt, r(t) sin 2πνt, h t)` with `r(t) = r₀ (1 − t/T)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConeParams {
    pub r0: f64,
    pub height: f64,
    pub turns: f64,
    pub period: f64,
}

impl Default for ConeParams {
    fn default() -> Self {
        ConeParams {
            r0: 1.0,
            height: 2.0,
            turns: 3.0,
            period: 1.0,
        }
    }
}

/// Every knob of an experiment; embedded in each output it produces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mask_name: String,
    pub xi: f64,
    pub mode: DisplaceMode,
    /// Number of pyramid layers.
    pub m: usize,
    /// Scale of generated data; the grid spacing is `2^-scale`.
    pub scale: u32,
    pub seed: u64,
    pub truncation_tol: f64,
    pub dft_size: usize,
    /// Modulus tolerance deciding which roots count as on or outside the circle.
    pub root_tol: f64,
    pub solver: MeanSettings,
    /// Fraction of details kept by compression.
    pub keep_fraction: f64,
    /// Per-layer fraction of details scaled by enhancement.
    pub top_fraction: f64,
    pub gain: f64,
    /// Noise standard deviation relative to the signal's range.
    pub noise_frac: f64,
    /// Number of noise draws, seeded `seed, seed+1, …`.
    pub noise_trials: usize,
    pub cone: ConeParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mask_name: "least-squares".into(),
            xi: 1.4,
            mode: DisplaceMode::OnCircle,
            m: 4,
            scale: 6,
            seed: 0,
            truncation_tol: DEFAULT_TRUNCATION_TOL,
            dft_size: DEFAULT_DFT_SIZE,
            root_tol: ON_CIRCLE_TOL,
            solver: MeanSettings::default(),
            keep_fraction: 0.01,
            top_fraction: 0.2,
            gain: 0.4,
            noise_frac: 0.01,
            noise_trials: 10,
            cone: ConeParams::default(),
        }
    }
}

impl ExperimentConfig {
    /// Settings of the rotation and rigid-motion experiments.
    pub fn manifold() -> Self {
        ExperimentConfig {
            xi: 0.64,
            ..Default::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: ExperimentConfig = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::invalid(format!(
                    "{name} must lie in [0, 1], got {v}"
                )))
            }
        };
        if !(self.xi >= 0.0) || !self.xi.is_finite() {
            return Err(Error::InvalidXi(self.xi));
        }
        if self.m == 0 {
            return Err(Error::invalid("m must be at least 1"));
        }
        unit("keep_fraction", self.keep_fraction)?;
        unit("top_fraction", self.top_fraction)?;
        if !(self.gain >= 0.0) {
            return Err(Error::invalid(format!(
                "gain must be non-negative, got {}",
                self.gain
            )));
        }
        if !(self.noise_frac >= 0.0) {
            return Err(Error::invalid(format!(
                "noise_frac must be non-negative, got {}",
                self.noise_frac
            )));
        }
        if !(self.solver.tol > 0.0) || self.solver.max_iter == 0 {
            return Err(Error::invalid("solver needs tol > 0 and max_iter ≥ 1"));
        }
        if !(self.cone.period > 0.0) {
            return Err(Error::invalid("cone period must be positive"));
        }
        Mask::by_name(&self.mask_name).map(|_| ())
    }

    pub fn mask(&self) -> Result<Mask> {
        Mask::by_name(&self.mask_name)
    }

    pub fn scheme_settings(&self) -> SchemeSettings {
        SchemeSettings {
            xi: self.xi,
            mode: self.mode,
            dft_size: self.dft_size,
            truncation_tol: self.truncation_tol,
            root_tol: self.root_tol,
        }
    }

    pub fn scheme(&self) -> Result<Scheme> {
        self.validate()?;
        Scheme::build(self.mask()?, self.scheme_settings())
    }
}
