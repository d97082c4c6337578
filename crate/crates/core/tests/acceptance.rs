//! Acceptance suite. Each test checks one criterion, writes a `[PASS]` or
//! `[FAIL]` line to stderr (bypassing the harness capture) and then asserts.

#![allow(clippy::approx_constant)]

use manipyr::apps::gen::random_rotation;
use manipyr::apps::{compress, gen_morlet, gen_so3_curve, tables, wrap_on_cone, ExperimentConfig};
use manipyr::linear::{
    analyze, decimate, detail_bounds, interior_range, max_consecutive_difference, pi_apply,
    pi_operator_norm_bound, synthesis_constant, synthesize, threshold_details, RealSequence,
    ThresholdPolicy,
};
use manipyr::manifold::{
    distance, exp_at, geodesic, log, so3, ManifoldPoint, MeanSettings, Tangent,
};
use manipyr::masks::{Mask, Scheme, SchemeSettings};
use manipyr::mpyramid::{
    m_analyze, m_synthesize, m_synthesize_levels, max_distance, t_refine, zero_even_details,
    ManifoldPyramid, ManifoldSequence,
};
use manipyr::symbol::{convolve, reversibility_kappa, DisplaceMode, LaurentPoly, KAPPA_GRID};
use nalgebra::{Matrix3, Vector3};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::cell::Cell;
use std::io::Write;
use std::time::{Duration, Instant};

const KAPPA_INTEGER_TOL: f64 = 1e-6;
/// Added before truncating to two decimals so that 7.9999999 reads as 8.
const TRUNCATION_EPS: f64 = 1e-9;
const GAMMA_TOL: f64 = 1e-10;
const TABLE4_FACTOR: f64 = 2.0;
const SCALAR_ROUND_TRIP_TOL: f64 = 1e-10;
const GEODESIC_ROUND_TRIP_TOL: f64 = 1e-8;
const EVEN_NULLITY_TOL: f64 = 1e-12;
const ZERO_EVEN_TOL: f64 = 1e-10;
const EUCLIDEAN_TOL: f64 = 1e-10;
const EXP_LOG_TOL: f64 = 1e-10;
const GEODESIC_SCALING_TOL: f64 = 1e-9;
/// Relative tolerance of the SE3 product identity, a few ulps of `ρ²`.
const PRODUCT_TOL: f64 = 1e-13;
/// Inequalities are checked as `lhs ≤ rhs·(1 + BOUND_REL) + BOUND_ABS`.
const BOUND_REL: f64 = 1e-9;
const BOUND_ABS: f64 = 1e-12;

const CASES: u32 = 50;
const GEOMETRY_CASES: u32 = 1000;
const MAX_TANGENT_NORM: f64 = 0.5;

const LIMIT_TABLE2: Duration = Duration::from_secs(1);
const LIMIT_TABLE1: Duration = Duration::from_secs(5);
const LIMIT_TABLE3: Duration = Duration::from_secs(5);
const LIMIT_TABLE4_SMOOTH: Duration = Duration::from_secs(30);
const LIMIT_COMPRESSION: Duration = Duration::from_secs(120);

const TABLE1_PERTURBATION: [f64; 12] = [
    0.06, 0.12, 0.18, 0.23, 0.28, 0.32, 0.36, 0.40, 0.44, 0.47, 0.50, 0.53,
];
const TABLE1_KAPPA: [f64; 12] = [
    18.19, 9.54, 6.67, 5.24, 4.38, 3.81, 3.41, 3.11, 2.88, 2.69, 2.54, 2.41,
];
const TABLE3_KAPPA: [f64; 13] = [
    8.0, 6.59, 5.69, 5.06, 4.60, 4.25, 3.97, 3.74, 3.55, 3.39, 3.26, 3.14, 3.04,
];
const TABLE4_SMOOTH: [f64; 6] = [0.0007, 0.0059, 0.0371, 0.1896, 0.3860, 0.8816];
const TABLE4_NOISY: [f64; 6] = [0.047, 0.0492, 0.0729, 0.2045, 0.4715, 0.8756];

/// Writes the verdict line and its notes in one piece so parallel tests do not interleave.
fn verdict(id: u32, title: &str, ok: bool, detail: &str, notes: &[String]) {
    let tag = if ok { "PASS" } else { "FAIL" };
    let mut text = format!("[{tag}] criterion {id:>2}: {title} | {detail}\n");
    for n in notes {
        text.push_str(&format!("        {n}\n"));
    }
    let _ = std::io::stderr().lock().write_all(text.as_bytes());
}

fn truncate2(v: f64) -> f64 {
    ((v + TRUNCATION_EPS) * 100.0).floor() / 100.0
}

fn same2(ours: f64, reference: f64) -> bool {
    (truncate2(ours) - reference).abs() < 1e-9
}

fn within_factor(ours: f64, reference: f64, factor: f64) -> bool {
    ours >= reference / factor && ours <= reference * factor
}

fn holds(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs * (1.0 + BOUND_REL) + BOUND_ABS
}

fn sup_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn runner(cases: u32, tag: u8) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::from_seed(RngAlgorithm::ChaCha, &[tag; 32]))
}

fn scheme(mask: Mask, xi: f64, mode: DisplaceMode) -> Scheme {
    let settings = SchemeSettings {
        mode,
        ..SchemeSettings::with_xi(xi)
    };
    Scheme::build(mask, settings).expect("corpus scheme builds")
}

/// Every mask/kernel pair the suite exercises.
fn corpus() -> Vec<(&'static str, Scheme)> {
    vec![
        (
            "least-squares ξ=0.64",
            scheme(Mask::least_squares(), 0.64, DisplaceMode::OnCircle),
        ),
        (
            "least-squares ξ=1.4",
            scheme(Mask::least_squares(), 1.4, DisplaceMode::OnCircle),
        ),
        (
            "bspline-3",
            scheme(Mask::bspline(3), 0.0, DisplaceMode::OnCircle),
        ),
        (
            "bspline-6 outside ξ=0.5",
            scheme(Mask::bspline(6), 0.5, DisplaceMode::OutsideCircle),
        ),
        (
            "four-point",
            scheme(Mask::four_point(), 0.0, DisplaceMode::OnCircle),
        ),
        (
            "linear",
            scheme(Mask::bspline(1), 0.0, DisplaceMode::OnCircle),
        ),
    ]
}

fn random_values(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn small_rotation(rng: &mut ChaCha8Rng, step: f64) -> Matrix3<f64> {
    so3::exp_axis_angle(&Vector3::from_fn(|_, _| rng.random_range(-step..step)))
}

fn so3_walk(rng: &mut ChaCha8Rng, n: usize, step: f64) -> ManifoldSequence {
    let mut r = random_rotation(rng);
    let points = (0..n)
        .map(|_| {
            let p = ManifoldPoint::SO3(r);
            r *= small_rotation(rng, step);
            p
        })
        .collect();
    ManifoldSequence::new(points, 0, 0.0).unwrap()
}

fn se3_walk(rng: &mut ChaCha8Rng, n: usize, step: f64) -> ManifoldSequence {
    let mut r = random_rotation(rng);
    let mut t = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0));
    let points = (0..n)
        .map(|_| {
            let p = ManifoldPoint::se3(r, t);
            r *= small_rotation(rng, step);
            t += Vector3::from_fn(|_, _| rng.random_range(-step..step));
            p
        })
        .collect();
    ManifoldSequence::new(points, 0, 0.0).unwrap()
}

/// Tangent at `p` with ambient norm at most `bound`.
fn random_tangent(rng: &mut ChaCha8Rng, p: &ManifoldPoint, bound: f64) -> Tangent {
    let w = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0));
    let t = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0));
    let raw = match p {
        ManifoldPoint::SO3(r) => Tangent::SO3(r * so3::hat(&w)),
        ManifoldPoint::SE3 { rotation, .. } => Tangent::SE3(rotation * so3::hat(&w), t),
        ManifoldPoint::Euclidean(v) => {
            Tangent::Euclidean(nalgebra::DVector::from_fn(v.len(), |i, _| t[i % 3]))
        }
    };
    let target = bound * rng.random_range(0.0..=1.0);
    raw.scale(target / raw.norm().max(f64::MIN_POSITIVE))
}

fn random_point(rng: &mut ChaCha8Rng, se3: bool) -> ManifoldPoint {
    let r = random_rotation(rng);
    if se3 {
        ManifoldPoint::se3(r, Vector3::from_fn(|_, _| rng.random_range(-2.0..2.0)))
    } else {
        ManifoldPoint::SO3(r)
    }
}

fn even_interior_max(values: impl Fn(usize) -> f64, range: std::ops::RangeInclusive<usize>) -> f64 {
    range.filter(|i| i % 2 == 0).map(values).fold(0.0, f64::max)
}

#[test]
fn criterion_01_bspline_kappa() {
    let start = Instant::now();
    let kappas: Vec<f64> = (2..=7)
        .map(|n| reversibility_kappa(&Mask::bspline(n).even_symbol(), KAPPA_GRID))
        .collect();
    let elapsed = start.elapsed();
    let expected = [2.0, 2.0, 4.0, 4.0, 8.0, 8.0];
    let exact = kappas
        .iter()
        .zip(expected)
        .all(|(k, e)| (k - e).abs() <= KAPPA_INTEGER_TOL);
    let ok = exact && elapsed < LIMIT_TABLE2;
    verdict(
        1,
        "B-spline κ, orders 2..7",
        ok,
        &format!("κ = {kappas:.9?}, {elapsed:.2?} (limit {LIMIT_TABLE2:?})"),
        &[],
    );
    assert!(ok);
}

#[test]
fn criterion_02_least_squares_table() {
    let mut notes = Vec::new();
    let start = Instant::now();
    let table = tables::table1(&ExperimentConfig::default()).unwrap();
    let elapsed = start.elapsed();
    let kappa = table.column("kappa").unwrap();
    let pert = table.column("mask_perturbation_l1").unwrap();
    let xi = table.column("xi").unwrap();
    let mut mismatches = Vec::new();
    for i in 1..=12 {
        if !same2(kappa[i], TABLE1_KAPPA[i - 1]) {
            mismatches.push(format!(
                "κ(ξ={:.1}) = {:.4} vs {}",
                xi[i],
                kappa[i],
                TABLE1_KAPPA[i - 1]
            ));
        }
        if !same2(pert[i], TABLE1_PERTURBATION[i - 1]) {
            mismatches.push(format!(
                "‖α−α̃‖₁(ξ={:.1}) = {:.4} vs {}",
                xi[i],
                pert[i],
                TABLE1_PERTURBATION[i - 1]
            ));
        }
    }
    notes.push(format!("κ: {:.4?}", &kappa[1..]));
    notes.push(format!("‖α−α̃‖₁: {:.4?}", &pert[1..]));
    let ok = mismatches.is_empty() && elapsed < LIMIT_TABLE1;
    let detail = if mismatches.is_empty() {
        format!("24 entries match, {elapsed:.2?}")
    } else {
        format!(
            "{} mismatches: {}; {elapsed:.2?}",
            mismatches.len(),
            mismatches.join("; ")
        )
    };
    verdict(2, "least-squares κ and perturbation", ok, &detail, &notes);
    assert!(ok, "{detail}");
}

#[test]
fn criterion_03_outside_circle_table() {
    let mut notes = Vec::new();
    let start = Instant::now();
    let table = tables::table3(&ExperimentConfig::default()).unwrap();
    let elapsed = start.elapsed();
    let kappa = table.column("kappa").unwrap();
    let mismatches: Vec<String> = kappa
        .iter()
        .zip(TABLE3_KAPPA)
        .enumerate()
        .filter(|(_, (k, p))| !same2(**k, *p))
        .map(|(i, (k, p))| format!("ξ={:.1}: {k:.4} vs {p}", i as f64 / 10.0))
        .collect();
    notes.push(format!("κ: {kappa:.4?}"));
    let ok = mismatches.is_empty() && elapsed < LIMIT_TABLE3;
    verdict(
        3,
        "order-6 B-spline outside-circle κ",
        ok,
        &format!("{} of 13 match, {elapsed:.2?}", 13 - mismatches.len()),
        &notes,
    );
    assert!(ok, "{mismatches:?}");
}

/// Power-series coefficients of `c/(z² + a z + b)` from `b g_k + a g_{k-1} + g_{k-2} = c δ_k`.
fn recurrence_oracle(xi: f64, count: usize) -> Vec<f64> {
    let a = 1.0 + xi;
    let b = a * a;
    let c = 3.0 + 3.0 * xi + xi * xi;
    let mut g: Vec<f64> = Vec::with_capacity(count);
    for k in 0..count {
        let g1 = if k >= 1 { g[k - 1] } else { 0.0 };
        let g2 = if k >= 2 { g[k - 2] } else { 0.0 };
        let rhs = if k == 0 { c } else { 0.0 };
        g.push((rhs - a * g1 - g2) / b);
    }
    g
}

#[test]
fn criterion_04_closed_form_kernel() {
    let mut worst: f64 = 0.0;
    for xi in [0.3, 0.7, 1.4] {
        let s = scheme(Mask::least_squares(), xi, DisplaceMode::OnCircle);
        let oracle = recurrence_oracle(xi, 40);
        // γ_{k+1} = g_k; the 21 central indices are taken around the leading coefficient.
        for j in -9i64..=11 {
            let want = if j >= 1 {
                oracle[(j - 1) as usize]
            } else {
                0.0
            };
            worst = worst.max((s.kernel.gamma.coeff(j) - want).abs());
        }
    }
    let ok = worst <= GAMMA_TOL;
    verdict(
        4,
        "kernel matches the rational closed form",
        ok,
        &format!("max |γ − oracle| = {worst:.2e} (tol {GAMMA_TOL:e})"),
        &[],
    );
    assert!(ok);
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

#[test]
fn criterion_05_smooth_zero_even_errors() {
    let mut notes = Vec::new();
    let config = ExperimentConfig::default();
    let start = Instant::now();
    let s = config.scheme().unwrap();
    let c = gen_morlet(6).unwrap();
    let errors: Vec<f64> = (1..=6)
        .map(|m| tables::zero_even_error(&s, &c, m).unwrap())
        .collect();
    let elapsed = start.elapsed();
    let increasing = strictly_increasing(&errors);
    let misses: Vec<usize> = (0..6)
        .filter(|&i| !within_factor(errors[i], TABLE4_SMOOTH[i], TABLE4_FACTOR))
        .map(|i| i + 1)
        .collect();
    notes.push(format!("smooth errors m=1..6: {errors:.4?}"));
    notes.push(format!(
        "ratio to reference: {:.2?}",
        errors
            .iter()
            .zip(TABLE4_SMOOTH)
            .map(|(a, b)| a / b)
            .collect::<Vec<_>>()
    ));
    let ok = increasing && misses.is_empty() && elapsed < LIMIT_TABLE4_SMOOTH;
    verdict(
        5,
        "smooth zero-even errors",
        ok,
        &format!("strictly increasing: {increasing}; outside factor {TABLE4_FACTOR} at m = {misses:?}; {elapsed:.2?}"),
        &notes,
    );
    assert!(ok);
}

#[test]
fn criterion_06_noisy_zero_even_errors() {
    let mut notes = Vec::new();
    let config = ExperimentConfig::default();
    let table = tables::table4(&config).unwrap();
    let smooth = table.column("smooth").unwrap();
    let noisy = table.column("noisy_median").unwrap();
    let not_dominating: Vec<usize> = (0..6)
        .filter(|&i| noisy[i] <= smooth[i])
        .map(|i| i + 1)
        .collect();
    let misses: Vec<usize> = (0..6)
        .filter(|&i| !within_factor(noisy[i], TABLE4_NOISY[i], TABLE4_FACTOR))
        .map(|i| i + 1)
        .collect();
    notes.push(format!(
        "noisy medians m=1..6 ({} seeds from {}): {noisy:.4?}",
        config.noise_trials, config.seed
    ));
    let ok = not_dominating.is_empty() && misses.is_empty();
    verdict(
        6,
        "noisy zero-even medians",
        ok,
        &format!("median ≤ smooth at m = {not_dominating:?}; outside factor {TABLE4_FACTOR} at m = {misses:?}"),
        &notes,
    );
    assert!(ok);
}

#[test]
fn criterion_07_perfect_reconstruction() {
    let solver = MeanSettings::default();
    let mut failures = Vec::new();
    let (scalar_worst, geodesic_worst) = (Cell::new(0.0f64), Cell::new(0.0f64));
    for (label, s) in corpus() {
        for m in 1..=4usize {
            let outcome = runner(CASES, 7).run(&(any::<u64>(), 1usize..=4), |(seed, n)| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let len = n * (1 << m) + 1;
                let c = RealSequence::new(random_values(&mut rng, len), 0, 0.0).unwrap();
                let pyr = analyze(&s.mask, &s.kernel, &c, m).unwrap();
                let err = sup_gap(&synthesize(&s.mask, &pyr).unwrap().values, &c.values);
                scalar_worst.set(scalar_worst.get().max(err));
                prop_assert!(err <= SCALAR_ROUND_TRIP_TOL, "scalar error {err:e}");
                Ok(())
            });
            if let Err(e) = outcome {
                failures.push(format!("{label}, m={m}, scalar: {e}"));
            }
        }
        for se3 in [false, true] {
            let outcome =
                runner(CASES, 70 + se3 as u8).run(&(any::<u64>(), 1usize..=4), |(seed, m)| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let len = 2 * (1 << m) + 1;
                    let c = if se3 {
                        se3_walk(&mut rng, len, 0.05)
                    } else {
                        so3_walk(&mut rng, len, 0.05)
                    };
                    let pyr = m_analyze(&s.mask, &s.kernel, &c, m, &solver)
                        .map_err(|e| TestCaseError::fail(format!("analysis: {e}")))?;
                    let back = m_synthesize(&s.mask, &pyr, &solver)
                        .map_err(|e| TestCaseError::fail(format!("synthesis: {e}")))?;
                    let err = max_distance(&back, &c).unwrap();
                    geodesic_worst.set(geodesic_worst.get().max(err));
                    prop_assert!(err <= GEODESIC_ROUND_TRIP_TOL, "geodesic error {err:e}");
                    Ok(())
                });
            if let Err(e) = outcome {
                failures.push(format!("{label}, {}: {e}", if se3 { "SE3" } else { "SO3" }));
            }
        }
    }
    let ok = failures.is_empty();
    verdict(
        7,
        "perfect reconstruction",
        ok,
        &format!(
            "{} schemes, max scalar error {:.2e}, max geodesic error {:.2e}",
            corpus().len(),
            scalar_worst.get(),
            geodesic_worst.get()
        ),
        &[],
    );
    assert!(ok, "{failures:#?}");
}

#[test]
fn criterion_08_interpolating_nullity() {
    let (even_worst, zero_even_worst) = (Cell::new(0.0f64), Cell::new(0.0f64));
    let mut failures = Vec::new();
    for mask in [Mask::four_point(), Mask::bspline(1)] {
        let s = scheme(mask, 0.0, DisplaceMode::OnCircle);
        let outcome = runner(CASES, 8).run(&(any::<u64>(), 1usize..=4), |(seed, m)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = RealSequence::new(random_values(&mut rng, 4 * (1 << m) + 1), 0, 0.0).unwrap();
            let pyr = analyze(&s.mask, &s.kernel, &c, m).unwrap();
            for d in &pyr.details {
                let range = interior_range(&s.mask.alpha, &s.kernel.gamma, d.len());
                let e = even_interior_max(|i| d.values[i].abs(), range);
                even_worst.set(even_worst.get().max(e));
                prop_assert!(e <= EVEN_NULLITY_TOL);
            }
            let (sparse, _) = threshold_details(&pyr, ThresholdPolicy::ZeroEven).unwrap();
            let err = sup_gap(&synthesize(&s.mask, &sparse).unwrap().values, &c.values);
            zero_even_worst.set(zero_even_worst.get().max(err));
            prop_assert!(err <= ZERO_EVEN_TOL);
            Ok(())
        });
        if let Err(e) = outcome {
            failures.push(format!("{}: {e}", s.mask.name));
        }
    }
    let ok = failures.is_empty();
    verdict(
        8,
        "interpolating masks have null even details",
        ok,
        &format!(
            "max interior even detail {:.2e}, zero-even error {:.2e}",
            even_worst.get(),
            zero_even_worst.get()
        ),
        &[],
    );
    assert!(ok, "{failures:#?}");
}

/// `sup |f′|` of the Morlet wavelet from its analytic derivative on a dense grid.
fn morlet_derivative_sup() -> f64 {
    let n = 1_000_000;
    (0..=n)
        .map(|i| {
            let t = 10.0 * i as f64 / n as f64 - 5.0;
            let e = (-0.5 * t * t).exp();
            (-5.0 * (5.0 * t).sin() * e - t * (5.0 * t).cos() * e).abs()
        })
        .fold(0.0, f64::max)
}

struct Tally {
    checks: usize,
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Tally {
    fn check(&mut self, what: &str, lhs: f64, rhs: f64) {
        self.checks += 1;
        if !holds(lhs, rhs) {
            self.failures.push(format!("{what}: {lhs:.3e} > {rhs:.3e}"));
        }
    }
}

fn linear_bounds(tally: &mut Tally) {
    let j = 6;
    let sine = RealSequence::new(
        (0..641).map(|i| (3.0 * i as f64 / 64.0).sin()).collect(),
        j,
        0.0,
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let noise = RealSequence::new(random_values(&mut rng, 641), j, 0.0).unwrap();
    let signals = [
        (
            "morlet",
            gen_morlet(j as u32).unwrap(),
            Some(morlet_derivative_sup()),
        ),
        ("sin 3x", sine, Some(3.0)),
        ("noise", noise, None),
    ];
    let m = 4;
    for (label, s) in corpus() {
        let b = detail_bounds(&s.mask, &s.approx_mask, &s.kernel, j, 1.0);
        let pi_norm = pi_operator_norm_bound(&s.mask, &s.approx_mask, &s.kernel);
        let c_syn = synthesis_constant(&s.mask, m);
        // The bounds assume an exact inverse; a truncated kernel adds ε_γ‖c‖_∞ to every even detail.
        let eps = LaurentPoly::delta()
            .sub(&convolve(&s.kernel.gamma, &s.approx_mask.even_symbol()))
            .l1_norm();
        tally.notes.push(format!(
            "{label}: ‖π‖ ≤ {pi_norm:.4}, L(ξ) = {:.4}, C = {c_syn:.4}, ε_γ = {eps:.2e}",
            b.l_xi
        ));
        for (name, c, fsup) in &signals {
            let pyr = analyze(&s.mask, &s.kernel, c, m).unwrap();
            let mut level = c.clone();
            let mut even_sum = 0.0;
            for d in pyr.details.iter().rev() {
                let range = interior_range(&s.mask.alpha, &s.kernel.gamma, d.len());
                let trunc = eps * level.sup_norm();
                let p = pi_apply(&s.mask, &s.kernel, &level);
                let pi_lhs = even_interior_max(|i| p.values[i / 2].abs(), range.clone());
                tally.check(
                    &format!("{label}/{name} π-bound at scale {}", d.scale),
                    pi_lhs,
                    pi_norm * level.sup_norm() + trunc,
                );
                let d_lhs = even_interior_max(|i| d.values[i].abs(), range);
                let delta = max_consecutive_difference(&level.values);
                tally.check(
                    &format!("{label}/{name} L-bound at scale {}", d.scale),
                    d_lhs,
                    b.l_xi * delta + trunc,
                );
                if let Some(fsup) = fsup {
                    let decay = detail_bounds(&s.mask, &s.approx_mask, &s.kernel, j, *fsup)
                        .decay_bound(&s.kernel, d.scale);
                    tally.check(
                        &format!("{label}/{name} P-decay at scale {}", d.scale),
                        d_lhs,
                        decay + trunc,
                    );
                }
                even_sum += d
                    .values
                    .iter()
                    .step_by(2)
                    .map(|v| v.abs())
                    .fold(0.0, f64::max);
                level = decimate(&s.kernel, &level);
            }
            let (sparse, _) = threshold_details(&pyr, ThresholdPolicy::ZeroEven).unwrap();
            let err = sup_gap(&synthesize(&s.mask, &sparse).unwrap().values, &c.values);
            tally.check(
                &format!("{label}/{name} synthesis bound"),
                err,
                c_syn * even_sum,
            );
        }
    }
}

fn even_norm_max(pyr: &ManifoldPyramid, layer: usize, interior: bool) -> f64 {
    let norms = pyr.details[layer].norms(pyr.coarse.kind).unwrap();
    let range = if interior {
        interior_range(&pyr.meta.mask.alpha, &pyr.meta.kernel.gamma, norms.len())
    } else {
        0..=norms.len() - 1
    };
    even_interior_max(|i| norms[i], range)
}

fn manifold_bounds(tally: &mut Tally) {
    let solver = MeanSettings::default();
    let m = 3;
    let curves: Vec<(String, ManifoldSequence)> = (0..3u64)
        .flat_map(|seed| {
            let c = gen_so3_curve(seed, 5, &solver).unwrap();
            let se3 = wrap_on_cone(&c, &Default::default()).unwrap();
            [
                (format!("SO3 seed {seed}"), c),
                (format!("SE3 seed {seed}"), se3),
            ]
        })
        .collect();
    let schemes = [
        (
            "least-squares ξ=0.64",
            scheme(Mask::least_squares(), 0.64, DisplaceMode::OnCircle),
        ),
        (
            "least-squares ξ=1.4",
            scheme(Mask::least_squares(), 1.4, DisplaceMode::OnCircle),
        ),
    ];
    for (label, s) in &schemes {
        let pyramids: Vec<(String, ManifoldPyramid, Vec<ManifoldSequence>)> = curves
            .iter()
            .map(|(name, c)| {
                let pyr = m_analyze(&s.mask, &s.kernel, c, m, &solver).unwrap();
                let levels = m_synthesize_levels(&s.mask, &pyr, &solver).unwrap();
                (name.clone(), pyr, levels)
            })
            .collect();

        // Decimation safety: Δ_M(Y c) ≤ F_Y Δ_M(c) over every analysed level.
        let f_y = pyramids
            .iter()
            .flat_map(|(_, _, levels)| {
                levels
                    .windows(2)
                    .map(|w| w[0].mesh_size() / w[1].mesh_size())
            })
            .fold(0.0, f64::max);
        let sigma = s.mask.alpha.len() as f64;
        let l_m = f_y * sigma * sigma * s.mask_perturbation();

        // Stability: μ(T c, T m) ≤ S_T μ(c, m) on zero-even pairs and random perturbations.
        let mut s_t: f64 = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(91);
        for (_, pyr, levels) in &pyramids {
            let zeta = m_synthesize_levels(&s.mask, &zero_even_details(pyr), &solver).unwrap();
            for (a, b) in levels.iter().zip(&zeta).take(m) {
                let mu = max_distance(a, b).unwrap();
                if mu > 1e-12 {
                    let ta = t_refine(&s.mask, a, &solver).unwrap();
                    let tb = t_refine(&s.mask, b, &solver).unwrap();
                    s_t = s_t.max(max_distance(&ta, &tb).unwrap() / mu);
                }
            }
            for a in levels.iter().take(m) {
                let points = a
                    .points
                    .iter()
                    .map(|p| exp_at(p, &random_tangent(&mut rng, p, 1e-3)).unwrap())
                    .collect();
                let b = ManifoldSequence::new(points, a.scale, a.origin).unwrap();
                let mu = max_distance(a, &b).unwrap();
                let ta = t_refine(&s.mask, a, &solver).unwrap();
                let tb = t_refine(&s.mask, &b, &solver).unwrap();
                s_t = s_t.max(max_distance(&ta, &tb).unwrap() / mu);
            }
        }
        let c_m = s_t.powi(m as i32).max(1.0);
        tally.notes.push(format!(
            "{label}: F_Y = {f_y:.4}, σ = {sigma}, L_M = {l_m:.4}, S_T = {s_t:.4}, C_M = {c_m:.4}"
        ));

        for (name, pyr, levels) in &pyramids {
            let mut even_sum = 0.0;
            for layer in 0..m {
                let lhs = even_norm_max(pyr, layer, true);
                let rhs = l_m * levels[layer + 1].mesh_size();
                tally.check(
                    &format!("{label}/{name} manifold detail bound, layer {layer}"),
                    lhs,
                    rhs,
                );
                even_sum += even_norm_max(pyr, layer, false);
            }
            let zeta = m_synthesize(&s.mask, &zero_even_details(pyr), &solver).unwrap();
            let err = max_distance(levels.last().unwrap(), &zeta).unwrap();
            tally.check(
                &format!("{label}/{name} manifold synthesis bound"),
                err,
                c_m * even_sum,
            );
        }
    }
}

#[test]
fn criterion_09_bound_suite() {
    let mut tally = Tally {
        checks: 0,
        failures: Vec::new(),
        notes: Vec::new(),
    };
    linear_bounds(&mut tally);
    manifold_bounds(&mut tally);
    let mut notes = tally.notes.clone();
    notes.extend(tally.failures.iter().cloned());
    let ok = tally.failures.is_empty();
    verdict(
        9,
        "detail, decay and synthesis bounds",
        ok,
        &format!(
            "{} of {} inequalities hold",
            tally.checks - tally.failures.len(),
            tally.checks
        ),
        &notes,
    );
    assert!(ok);
}

#[test]
fn criterion_10_euclidean_equivalence() {
    let schemes = corpus();
    let solver = MeanSettings::default();
    let worst = Cell::new(0.0f64);
    let outcome = runner(CASES, 10).run(
        &(0..schemes.len(), any::<u64>(), 1usize..=4),
        |(k, seed, m)| {
            let s = &schemes[k].1;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = RealSequence::new(random_values(&mut rng, 3 * (1 << m) + 1), 0, 0.0).unwrap();
            let lp = analyze(&s.mask, &s.kernel, &c, m).unwrap();
            let mp = m_analyze(
                &s.mask,
                &s.kernel,
                &ManifoldSequence::from_real(&c),
                m,
                &solver,
            )
            .unwrap();
            let mut gap = sup_gap(&mp.coarse.to_real().unwrap().values, &lp.coarse.values);
            for (ld, md) in lp.details.iter().zip(&mp.details) {
                let flat: Vec<f64> = md.blocks.iter().map(|b| b[0]).collect();
                gap = gap.max(sup_gap(&flat, &ld.values));
            }
            worst.set(worst.get().max(gap));
            prop_assert!(gap <= EUCLIDEAN_TOL, "{}: gap {gap:e}", schemes[k].0);
            Ok(())
        },
    );
    let ok = outcome.is_ok();
    verdict(
        10,
        "Euclidean manifold pyramid equals the linear pyramid",
        ok,
        &format!("{CASES} instances, max gap {:.2e}", worst.get()),
        &[],
    );
    outcome.unwrap();
}

#[test]
fn criterion_11_se3_compression() {
    let mut notes = Vec::new();
    let config = ExperimentConfig::manifold();
    let start = Instant::now();
    let so3_curve = gen_so3_curve(config.seed, config.scale, &config.solver).unwrap();
    let curve = wrap_on_cone(&so3_curve, &config.cone).unwrap();
    let s = config.scheme().unwrap();
    let pyr = m_analyze(&s.mask, &s.kernel, &curve, config.m, &config.solver).unwrap();
    let (_, report) = compress(&pyr, config.keep_fraction, &config.solver).unwrap();
    let elapsed = start.elapsed();
    let finite = report.errors.iter().all(|e| e.is_finite());
    let n = report.original_count;
    let edge = (report.argmax_error).min(n - 1 - report.argmax_error);
    notes.push(format!(
        "largest error {:.3e} at index {} of {n} ({edge} from the nearest endpoint), mean {:.3e}",
        report.max_error, report.argmax_error, report.mean_error
    ));
    let ok = n == 641
        && report.stored_coarse_count == 41
        && report.stored_detail_count == 12
        && finite
        && report.errors.len() == n
        && elapsed < LIMIT_COMPRESSION;
    verdict(
        11,
        "SE3 compression counts",
        ok,
        &format!(
            "{n} points -> {} coarse + {} details, finite errors: {finite}, {elapsed:.2?}",
            report.stored_coarse_count, report.stored_detail_count
        ),
        &notes,
    );
    assert!(ok);
}

#[test]
fn criterion_12_geometry() {
    let mut failures = Vec::new();
    let worst = [Cell::new(0.0f64), Cell::new(0.0f64), Cell::new(0.0f64)];
    for se3 in [false, true] {
        let kind = if se3 { "SE3" } else { "SO3" };
        let outcome = runner(GEOMETRY_CASES, 12).run(&any::<u64>(), |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_point(&mut rng, se3);
            let v = random_tangent(&mut rng, &p, MAX_TANGENT_NORM);
            let back = log(&p, &exp_at(&p, &v).unwrap()).unwrap().vec;
            let err = back.axpy(-1.0, &v).unwrap().norm();
            worst[0].set(worst[0].get().max(err));
            prop_assert!(err <= EXP_LOG_TOL, "exp/log error {err:e}");
            Ok(())
        });
        if let Err(e) = outcome {
            failures.push(format!("{kind} exp/log: {e}"));
        }
        let outcome = runner(GEOMETRY_CASES, 13).run(&(any::<u64>(), 0.0f64..=1.0), |(seed, s)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_point(&mut rng, se3);
            let q = exp_at(&p, &random_tangent(&mut rng, &p, 3.0)).unwrap();
            let g = geodesic(&p, &q, s).unwrap();
            let err = (distance(&p, &g).unwrap() - s * distance(&p, &q).unwrap()).abs();
            worst[1].set(worst[1].get().max(err));
            prop_assert!(
                err <= GEODESIC_SCALING_TOL,
                "scaling error {err:e} at s = {s}"
            );
            Ok(())
        });
        if let Err(e) = outcome {
            failures.push(format!("{kind} geodesic scaling: {e}"));
        }
    }
    let outcome = runner(GEOMETRY_CASES, 14).run(&any::<u64>(), |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (p, q) = (random_point(&mut rng, true), random_point(&mut rng, true));
        let (
            ManifoldPoint::SE3 {
                rotation: ra,
                translation: ta,
            },
            ManifoldPoint::SE3 {
                rotation: rb,
                translation: tb,
            },
        ) = (&p, &q)
        else {
            unreachable!()
        };
        let d2 = distance(&p, &q).unwrap().powi(2);
        let rot = distance(&ManifoldPoint::SO3(*ra), &ManifoldPoint::SO3(*rb)).unwrap();
        let want = rot * rot + (tb - ta).norm_squared();
        let rel = (d2 - want).abs() / want.max(f64::MIN_POSITIVE);
        worst[2].set(worst[2].get().max(rel));
        prop_assert!(rel <= PRODUCT_TOL, "relative gap {rel:e}");
        Ok(())
    });
    if let Err(e) = outcome {
        failures.push(format!("SE3 product distance: {e}"));
    }
    let ok = failures.is_empty();
    verdict(
        12,
        "exp/log, geodesic scaling and SE3 product distance",
        ok,
        &format!(
            "{GEOMETRY_CASES} cases each; max errors {:.2e} (exp/log), {:.2e} (scaling), {:.2e} (product, relative)",
            worst[0].get(),
            worst[1].get(),
            worst[2].get()
        ),
        &[],
    );
    assert!(ok, "{failures:#?}");
}
