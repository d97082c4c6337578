use super::poly::LaurentPoly;
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub const DEFAULT_ROOT_TOL: f64 = 1e-12;
pub const MAX_ITERATIONS: usize = 500;
pub const CLUSTER_RADIUS: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub re: f64,
    pub im: f64,
    pub multiplicity: usize,
}

impl Root {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Roots of the non-monomial part of a Laurent polynomial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub roots: Vec<Root>,
    pub leading_coeff: Complex64,
}

impl RootSet {
    pub fn degree(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    /// Every root repeated by multiplicity.
    pub fn expanded(&self) -> Vec<Complex64> {
        self.roots
            .iter()
            .flat_map(|r| std::iter::repeat_n(r.value(), r.multiplicity))
            .collect()
    }

    /// Ascending coefficients of `leading_coeff · Π (z − r)`.
    pub fn reconstruct(&self) -> Vec<Complex64> {
        from_roots(&self.expanded(), self.leading_coeff)
    }
}

pub(crate) fn from_roots(roots: &[Complex64], lead: Complex64) -> Vec<Complex64> {
    let mut c = vec![lead];
    for &r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
        for (i, &ci) in c.iter().enumerate() {
            next[i + 1] += ci;
            next[i] -= r * ci;
        }
        c = next;
    }
    c
}

fn horner_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Aberth–Ehrlich simultaneous iteration on the non-monomial part of `p`.
pub fn find_roots(p: &LaurentPoly, tol: f64) -> Result<RootSet> {
    if p.is_zero() {
        return Err(Error::invalid("cannot find roots of the zero polynomial"));
    }
    let coeffs: Vec<Complex64> = p.coeffs().iter().map(|&c| Complex64::new(c, 0.0)).collect();
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    if n == 0 {
        return Ok(RootSet {
            roots: Vec::new(),
            leading_coeff: lead,
        });
    }

    let radius = (coeffs[0].norm() / lead.norm())
        .powf(1.0 / n as f64)
        .max(1e-3);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, std::f64::consts::TAU * k as f64 / n as f64 + 0.4))
        .collect();

    let scale =
        |r: Complex64| tol * (1.0 + lead.norm() * n as f64) * r.norm().max(1.0).powi(n as i32);
    let mut converged = false;
    let mut last_step = f64::INFINITY;
    for _ in 0..MAX_ITERATIONS {
        let mut max_step: f64 = 0.0;
        for k in 0..n {
            let (pv, dpv) = horner_with_derivative(&coeffs, z[k]);
            if pv.norm() == 0.0 {
                continue;
            }
            let ratio = pv / dpv;
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| (z[k] - z[j]).inv())
                .sum();
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if w.is_finite() {
                z[k] -= w;
                max_step = max_step.max(w.norm() / z[k].norm().max(1.0));
            }
        }
        last_step = max_step;
        if max_step <= 1e-15 {
            converged = true;
            break;
        }
    }

    let residual = z
        .iter()
        .map(|&r| horner_with_derivative(&coeffs, r).0.norm() / scale(r))
        .fold(0.0, f64::max);
    if !converged && residual > 1.0 {
        return Err(Error::NonConvergence {
            context: "root finding".into(),
            iterations: MAX_ITERATIONS,
            residual: last_step,
        });
    }
    if residual > 1.0 {
        log::debug!("root residual ratio {residual:e} above tolerance after convergence");
    }

    Ok(RootSet {
        roots: cluster(z),
        leading_coeff: lead,
    })
}

fn cluster(mut z: Vec<Complex64>) -> Vec<Root> {
    z.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut groups: Vec<Vec<Complex64>> = Vec::new();
    for r in z {
        match groups
            .iter_mut()
            .find(|g| g.iter().any(|&q| (q - r).norm() <= CLUSTER_RADIUS))
        {
            Some(g) => g.push(r),
            None => groups.push(vec![r]),
        }
    }
    groups
        .into_iter()
        .map(|g| {
            let mean = g.iter().sum::<Complex64>() / g.len() as f64;
            let im = if mean.im.abs() < 1e-14 { 0.0 } else { mean.im };
            Root {
                re: mean.re,
                im,
                multiplicity: g.len(),
            }
        })
        .collect()
}
