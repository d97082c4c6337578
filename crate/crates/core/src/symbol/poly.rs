use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;

/// A finitely supported two-sided sequence, read as the Laurent polynomial
/// `p(z) = Σ_j coeffs[j] · z^(min_index + j)`.
///
/// Stored coefficients are trimmed so the first and last entries are
/// nonzero; the zero polynomial has no coefficients and `min_index == 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "RawPoly", into = "RawPoly")]
pub struct LaurentPoly {
    min_index: i64,
    coeffs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawPoly {
    min_index: i64,
    coeffs: Vec<f64>,
}

impl From<RawPoly> for LaurentPoly {
    fn from(raw: RawPoly) -> Self {
        LaurentPoly::new(raw.min_index, raw.coeffs)
    }
}

impl From<LaurentPoly> for RawPoly {
    fn from(p: LaurentPoly) -> Self {
        RawPoly {
            min_index: p.min_index,
            coeffs: p.coeffs,
        }
    }
}

impl LaurentPoly {
    pub fn new(min_index: i64, coeffs: Vec<f64>) -> Self {
        let first = coeffs.iter().position(|&c| c != 0.0);
        let Some(first) = first else {
            return Self::zero();
        };
        let last = coeffs.iter().rposition(|&c| c != 0.0).unwrap();
        LaurentPoly {
            min_index: min_index + first as i64,
            coeffs: coeffs[first..=last].to_vec(),
        }
    }

    pub fn zero() -> Self {
        LaurentPoly {
            min_index: 0,
            coeffs: Vec::new(),
        }
    }

    /// The Kronecker delta, i.e. the constant symbol 1.
    pub fn delta() -> Self {
        Self::monomial(0, 1.0)
    }

    pub fn monomial(index: i64, value: f64) -> Self {
        Self::new(index, vec![value])
    }

    /// Builds a polynomial from `(index, value)` pairs; repeated indices add up.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (i64, f64)>) -> Self {
        let pairs: Vec<_> = pairs.into_iter().collect();
        if pairs.is_empty() {
            return Self::zero();
        }
        let lo = pairs.iter().map(|p| p.0).min().unwrap();
        let hi = pairs.iter().map(|p| p.0).max().unwrap();
        let mut coeffs = vec![0.0; (hi - lo + 1) as usize];
        for (k, v) in pairs {
            coeffs[(k - lo) as usize] += v;
        }
        Self::new(lo, coeffs)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn min_index(&self) -> i64 {
        self.min_index
    }

    /// Index of the last stored coefficient. Meaningless for the zero polynomial.
    pub fn max_index(&self) -> i64 {
        self.min_index + self.coeffs.len() as i64 - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `max_index - min_index`, the degree once the monomial factor is removed.
    pub fn span(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeff(&self, index: i64) -> f64 {
        let off = index - self.min_index;
        if off < 0 || off >= self.coeffs.len() as i64 {
            0.0
        } else {
            self.coeffs[off as usize]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(j, &c)| (self.min_index + j as i64, c))
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        if self.coeffs.is_empty() {
            return Complex64::new(0.0, 0.0);
        }
        let horner = self
            .coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c);
        horner * z.powi(self.min_index as i32)
    }

    /// `p(e^{iθ})`.
    pub fn eval_circle(&self, theta: f64) -> Complex64 {
        self.eval(Complex64::from_polar(1.0, theta))
    }

    /// `p(1)`, the coefficient sum.
    pub fn sum(&self) -> f64 {
        self.coeffs.iter().sum()
    }

    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, c| acc + c.abs())
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// `K_c = 2 Σ |c_j| |j|`.
    pub fn first_moment_constant(&self) -> f64 {
        2.0 * self
            .iter()
            .map(|(j, c)| c.abs() * j.abs() as f64)
            .sum::<f64>()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::new(
            self.min_index,
            self.coeffs.iter().map(|c| c * factor).collect(),
        )
    }

    pub fn shift(&self, by: i64) -> Self {
        LaurentPoly {
            min_index: if self.is_zero() {
                0
            } else {
                self.min_index + by
            },
            coeffs: self.coeffs.clone(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_pairs(self.iter().chain(other.iter()))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_pairs(self.iter().chain(other.iter().map(|(k, v)| (k, -v))))
    }

    /// `(p↓2)_j = p_{2j}`.
    pub fn even_part(&self) -> Self {
        Self::from_pairs(
            self.iter()
                .filter(|(k, _)| k.rem_euclid(2) == 0)
                .map(|(k, v)| (k.div_euclid(2), v)),
        )
    }

    /// `(p)_{2j+1}` reindexed by `j`.
    pub fn odd_part(&self) -> Self {
        Self::from_pairs(
            self.iter()
                .filter(|(k, _)| k.rem_euclid(2) == 1)
                .map(|(k, v)| (k.div_euclid(2), v)),
        )
    }

    /// `p(z^factor)`: spreads the coefficients onto a sparser lattice.
    pub fn upsample(&self, factor: i64) -> Self {
        Self::from_pairs(self.iter().map(|(k, v)| (k * factor, v)))
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|(k, c)| match k {
                0 => format!("{c}"),
                1 => format!("{c}·z"),
                _ => format!("{c}·z^{k}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// Exact coefficient convolution; offsets add.
pub fn convolve(a: &LaurentPoly, b: &LaurentPoly) -> LaurentPoly {
    if a.is_zero() || b.is_zero() {
        return LaurentPoly::zero();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.coeffs().iter().enumerate() {
        for (j, &y) in b.coeffs().iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    LaurentPoly::new(a.min_index() + b.min_index(), out)
}
