use super::config::ExperimentConfig;
use super::gen::{add_noise, gen_morlet};
use crate::error::{Error, Result};
use crate::io::CsvTable;
use crate::linear::{analyze, synthesize, threshold_details, RealSequence, ThresholdPolicy};
use crate::masks::{Mask, Scheme};
use crate::symbol::{pseudo_reverse_symbol, reversibility_kappa, DisplaceMode, KAPPA_GRID};

/// `ξ = 0, 0.1, …, 1.2`.
pub fn xi_grid() -> Vec<f64> {
    (0..=12).map(|i| i as f64 / 10.0).collect()
}

/// κ of the approximate even symbol and `‖α − α̃‖₁` for one ξ. Returns κ = ∞ at ξ = 0
/// for symbols with zeros on the circle rather than failing.
pub fn kappa_and_perturbation(
    mask: &Mask,
    xi: f64,
    mode: DisplaceMode,
    root_tol: f64,
) -> Result<(f64, f64)> {
    let even = mask.even_symbol();
    let pr = pseudo_reverse_symbol(&even, xi, mode, root_tol)?;
    Ok((pr.kappa_after, even.sub(&pr.approx_poly).l1_norm()))
}

/// Least-squares mask, on-circle displacement: columns `xi, mask_perturbation_l1, kappa`.
pub fn table1(config: &ExperimentConfig) -> Result<CsvTable> {
    let mask = Mask::least_squares();
    let mut t = CsvTable::new(["xi", "mask_perturbation_l1", "kappa"]);
    for xi in xi_grid() {
        let (kappa, pert) =
            kappa_and_perturbation(&mask, xi, DisplaceMode::OnCircle, config.root_tol)?;
        t.push(vec![xi, pert, kappa]);
    }
    Ok(t)
}

/// κ of the even symbols of B-spline masks of orders 2 to 7.
pub fn table2() -> Result<CsvTable> {
    let mut t = CsvTable::new(["order", "kappa"]);
    for n in 2..=7 {
        t.push(vec![
            n as f64,
            reversibility_kappa(&Mask::bspline(n).even_symbol(), KAPPA_GRID),
        ]);
    }
    Ok(t)
}

/// Order-6 B-spline, outside-circle displacement: columns `xi, kappa`.
pub fn table3(config: &ExperimentConfig) -> Result<CsvTable> {
    let mask = Mask::bspline(6);
    let mut t = CsvTable::new(["xi", "kappa"]);
    for xi in xi_grid() {
        let (kappa, _) =
            kappa_and_perturbation(&mask, xi, DisplaceMode::OutsideCircle, config.root_tol)?;
        t.push(vec![xi, kappa]);
    }
    Ok(t)
}

/// `‖c − ζ‖_∞` after analysing `m` layers, zeroing every even detail and synthesizing.
pub fn zero_even_error(scheme: &Scheme, c: &RealSequence, m: usize) -> Result<f64> {
    let pyr = analyze(&scheme.mask, &scheme.kernel, c, m)?;
    let (sparse, _) = threshold_details(&pyr, ThresholdPolicy::ZeroEven)?;
    let z = synthesize(&scheme.mask, &sparse)?;
    Ok(c.values
        .iter()
        .zip(&z.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Zero-even reconstruction errors of the Morlet samples for `m = 1..=6`, smooth and
/// with noise (median over `noise_trials` seeds starting at `seed`).
pub fn table4(config: &ExperimentConfig) -> Result<CsvTable> {
    if config.noise_trials == 0 {
        return Err(Error::invalid("noise_trials must be at least 1"));
    }
    let scheme = config.scheme()?;
    let smooth = gen_morlet(config.scale)?;
    let noisy = (0..config.noise_trials as u64)
        .map(|k| add_noise(&smooth, config.noise_frac, config.seed + k))
        .collect::<Result<Vec<_>>>()?;
    let mut t = CsvTable::new(["m", "smooth", "noisy_median"]);
    for m in 1..=6 {
        let e = zero_even_error(&scheme, &smooth, m)?;
        let en = noisy
            .iter()
            .map(|c| zero_even_error(&scheme, c, m))
            .collect::<Result<Vec<_>>>()?;
        t.push(vec![m as f64, e, median(en)]);
    }
    Ok(t)
}

pub fn run_table(id: u32, config: &ExperimentConfig) -> Result<CsvTable> {
    match id {
        1 => table1(config),
        2 => table2(),
        3 => table3(config),
        4 => table4(config),
        _ => Err(Error::invalid(format!("no table {id}; expected 1 to 4"))),
    }
}
