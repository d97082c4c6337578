use crate::output::{config_header, csv_report, json_with_config, Sink};
use crate::{Command, FigureKind, GenKind, Global, SweepRange};
use manipyr::apps::{self, figures, tables, ExperimentConfig};
use manipyr::io::{sequence_from_csv, sequence_to_csv, CsvTable};
use manipyr::linear::{
    analyze, synthesize, threshold_details, LinearPyramid, RealSequence, ThresholdPolicy,
};
use manipyr::mpyramid::{
    m_analyze, m_synthesize, zero_even_details, ManifoldPyramid, ManifoldSequence,
};
use manipyr::symbol::{reversibility_kappa, DisplaceMode, KAPPA_GRID};
use manipyr::Error;
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    File(PathBuf, std::io::Error),
    Usage(String),
}

impl CliError {
    /// 3 for numerical non-convergence, 2 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::NonConvergence { .. }) => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => e.fmt(f),
            CliError::File(p, e) => write!(f, "{}: {e}", p.display()),
            CliError::Usage(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(Error::Json(e))
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::File(path.to_path_buf(), e))
}

/// Config from `--config` (or the command's preset) with flag overrides applied.
fn resolve_config(g: &Global, manifold: bool) -> Result<ExperimentConfig> {
    let mut c = match &g.config {
        Some(p) => ExperimentConfig::from_json(&read(p)?)?,
        None if manifold => ExperimentConfig::manifold(),
        None => ExperimentConfig::default(),
    };
    if let Some(s) = g.seed {
        c.seed = s;
    }
    if let Some(x) = g.xi {
        c.xi = x;
    }
    if let Some(m) = g.layers {
        c.m = m;
    }
    if let Some(m) = &g.mask {
        c.mask_name = m.clone();
    }
    if let Some(m) = &g.mode {
        c.mode = m.parse::<DisplaceMode>()?;
    }
    c.validate()?;
    Ok(c)
}

fn uses_manifold_preset(cmd: &Command) -> bool {
    match cmd {
        Command::MAnalyze { .. }
        | Command::MSynthesize { .. }
        | Command::Compress { .. }
        | Command::Enhance { .. } => true,
        Command::Gen { kind } => matches!(kind, GenKind::So3 | GenKind::Se3),
        Command::Figure { kind, .. } => matches!(kind, FigureKind::ManifoldDetails),
        _ => false,
    }
}

pub fn run(g: &Global, cmd: &Command) -> Result<()> {
    let config = resolve_config(g, uses_manifold_preset(cmd))?;
    let sink = Sink {
        path: g.out.clone(),
    };
    log::info!("running with config {}", serde_json::to_string(&config)?);
    let text = match cmd {
        Command::Symbol(range) => symbol(&config, range)?,
        Command::SweepXi(range) => {
            let t = figures::xi_sweep(
                &config.mask()?,
                &xi_range(range)?,
                &config.scheme_settings(),
            )?;
            csv_report(&config, &[("sweep", &t)])
        }
        Command::Analyze { input } => {
            let c = read_sequence(input, &config)?;
            let s = config.scheme()?;
            let mut pyr = analyze(&s.mask, &s.kernel, &c, config.m)?;
            stamp(&mut pyr.meta, &config)?;
            pretty(&pyr)?
        }
        Command::Synthesize { input, policy } => {
            let pyr: LinearPyramid = serde_json::from_str(&read(input)?)?;
            let pyr = match parse_policy(policy)? {
                Some(p) => threshold_details(&pyr, p)?.0,
                None => pyr,
            };
            let c = synthesize(&pyr.meta.mask, &pyr)?;
            write_sequence(&c, &config, &sink)?
        }
        Command::MAnalyze { input } => {
            let c: ManifoldSequence = serde_json::from_str(&read(input)?)?;
            pretty(&manifold_pyramid(&c, &config)?)?
        }
        Command::MSynthesize { input, zero_even } => {
            let pyr: ManifoldPyramid = serde_json::from_str(&read(input)?)?;
            let pyr = if *zero_even {
                zero_even_details(&pyr)
            } else {
                pyr
            };
            let settings = pyr.meta.mean.unwrap_or(config.solver);
            json_with_config(&m_synthesize(&pyr.meta.mask, &pyr, &settings)?, &config)?
        }
        Command::Compress {
            input,
            keep,
            pyramid_out,
        } => {
            let mut config = config;
            if let Some(q) = keep {
                config.keep_fraction = *q;
                config.validate()?;
            }
            let c: ManifoldSequence = serde_json::from_str(&read(input)?)?;
            let pyr = manifold_pyramid(&c, &config)?;
            let (out, report) = apps::compress(&pyr, config.keep_fraction, &config.solver)?;
            if let Some(p) = pyramid_out {
                Sink {
                    path: Some(p.clone()),
                }
                .write(&pretty(&out)?)
                .map_err(|e| CliError::File(p.clone(), e))?;
            }
            log::info!(
                "kept {} of {} details, {} coarse points; max error {:e} at index {}",
                report.stored_detail_count,
                report.total_detail_count,
                report.stored_coarse_count,
                report.max_error,
                report.argmax_error
            );
            json_with_config(&report, &config)?
        }
        Command::Enhance { input, top, gain } => {
            let mut config = config;
            if let Some(t) = top {
                config.top_fraction = *t;
            }
            if let Some(gn) = gain {
                config.gain = *gn;
            }
            config.validate()?;
            let c: ManifoldSequence = serde_json::from_str(&read(input)?)?;
            let pyr = manifold_pyramid(&c, &config)?;
            let (enhanced, scaled) = apps::enhance(&pyr, config.top_fraction, config.gain)?;
            log::info!(
                "scaled details per layer: {:?}",
                scaled.iter().map(Vec::len).collect::<Vec<_>>()
            );
            json_with_config(
                &m_synthesize(&enhanced.meta.mask, &enhanced, &config.solver)?,
                &config,
            )?
        }
        Command::Gen { kind } => generate(*kind, &config, &sink)?,
        Command::Table { id } => {
            csv_report(&config, &[("table", &tables::run_table(*id, &config)?)])
        }
        Command::Figure { kind, input } => figure(*kind, input.as_deref(), &config)?,
    };
    sink.write(&text)
        .map_err(|e| CliError::File(sink.path.clone().unwrap_or_else(|| "<stdout>".into()), e))
}

fn pretty<T: serde::Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn stamp(meta: &mut manipyr::linear::PyramidMeta, config: &ExperimentConfig) -> Result<()> {
    meta.seed = Some(config.seed);
    meta.config = Some(serde_json::to_value(config)?);
    Ok(())
}

fn manifold_pyramid(c: &ManifoldSequence, config: &ExperimentConfig) -> Result<ManifoldPyramid> {
    let s = config.scheme()?;
    let mut pyr = m_analyze(&s.mask, &s.kernel, c, config.m, &config.solver)?;
    stamp(&mut pyr.meta, config)?;
    Ok(pyr)
}

fn xi_range(r: &SweepRange) -> Result<Vec<f64>> {
    if !(r.step > 0.0) || !(r.from >= 0.0) || !(r.to >= r.from) {
        return Err(CliError::Usage(
            "sweep needs 0 ≤ from ≤ to and step > 0".into(),
        ));
    }
    let n = ((r.to - r.from) / r.step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| r.from + i as f64 * r.step).collect())
}

fn parse_policy(s: &str) -> Result<Option<ThresholdPolicy>> {
    let value = |v: &str| {
        v.parse::<f64>()
            .map_err(|_| CliError::Usage(format!("cannot parse `{v}` in policy `{s}`")))
    };
    match s.split_once(':') {
        None if s == "full" => Ok(None),
        None if s == "zero-even" => Ok(Some(ThresholdPolicy::ZeroEven)),
        Some(("keep", q)) => Ok(Some(ThresholdPolicy::KeepTopFraction(value(q)?))),
        Some(("abs", t)) => Ok(Some(ThresholdPolicy::AbsThreshold(value(t)?))),
        _ => Err(CliError::Usage(format!(
            "unknown policy `{s}`; expected full, zero-even, keep:<q> or abs:<t>"
        ))),
    }
}

fn read_sequence(path: &Path, config: &ExperimentConfig) -> Result<RealSequence> {
    let text = read(path)?;
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        Ok(sequence_from_csv(&text, config.scale as i32, 0.0)?)
    } else {
        Ok(serde_json::from_str(&text)?)
    }
}

fn write_sequence(c: &RealSequence, config: &ExperimentConfig, sink: &Sink) -> Result<String> {
    if sink.is_csv() {
        Ok(config_header(config) + &sequence_to_csv(c))
    } else {
        Ok(json_with_config(c, config)?)
    }
}

fn generate(kind: GenKind, config: &ExperimentConfig, sink: &Sink) -> Result<String> {
    match kind {
        GenKind::Morlet => write_sequence(&apps::gen_morlet(config.scale)?, config, sink),
        GenKind::NoisyMorlet => {
            let c = apps::add_noise(
                &apps::gen_morlet(config.scale)?,
                config.noise_frac,
                config.seed,
            )?;
            write_sequence(&c, config, sink)
        }
        GenKind::So3 => Ok(json_with_config(
            &apps::gen_so3_curve(config.seed, config.scale, &config.solver)?,
            config,
        )?),
        GenKind::Se3 => {
            let c = apps::gen_so3_curve(config.seed, config.scale, &config.solver)?;
            Ok(json_with_config(
                &apps::wrap_on_cone(&c, &config.cone)?,
                config,
            )?)
        }
    }
}

fn symbol(config: &ExperimentConfig, range: &SweepRange) -> Result<String> {
    let mask = config.mask()?;
    let settings = config.scheme_settings();
    let sweep = figures::xi_sweep(&mask, &xi_range(range)?, &settings)?;
    let pr = manipyr::symbol::pseudo_reverse_symbol(
        &mask.even_symbol(),
        config.xi,
        config.mode,
        config.root_tol,
    )?;

    let mut roots = CsvTable::new([
        "re",
        "im",
        "multiplicity",
        "modulus",
        "displaced_re",
        "displaced_im",
    ]);
    for (r, d) in pr
        .original_roots
        .roots
        .iter()
        .zip(&pr.displaced_roots.roots)
    {
        roots.push(vec![
            r.re,
            r.im,
            r.multiplicity as f64,
            r.re.hypot(r.im),
            d.re,
            d.im,
        ]);
    }
    let mut summary = CsvTable::new([
        "xi",
        "kappa_before",
        "kappa_after",
        "mask_perturbation_l1",
        "gamma_min_index",
        "gamma_len",
        "gamma_l1",
        "residual",
    ]);
    let mut gamma = CsvTable::new(["k", "gamma"]);
    let perturbation = mask.even_symbol().sub(&pr.approx_poly).l1_norm();
    match config.scheme() {
        Ok(s) => {
            summary.push(vec![
                config.xi,
                pr.kappa_before,
                s.kappa(),
                perturbation,
                s.kernel.gamma.min_index() as f64,
                s.kernel.gamma.len() as f64,
                s.kernel.gamma.l1_norm(),
                s.kernel.residual,
            ]);
            for (k, g) in s.kernel.gamma.iter() {
                gamma.push(vec![k as f64, g]);
            }
        }
        Err(Error::NotReversible) => {
            log::warn!("symbol is not reversible at ξ = {}; no kernel", config.xi);
            let kappa = reversibility_kappa(&pr.approx_poly, KAPPA_GRID);
            summary.push(vec![
                config.xi,
                pr.kappa_before,
                kappa,
                perturbation,
                0.0,
                0.0,
                f64::INFINITY,
                f64::INFINITY,
            ]);
        }
        Err(e) => return Err(e.into()),
    }
    Ok(csv_report(
        config,
        &[
            ("roots", &roots),
            ("summary", &summary),
            ("gamma", &gamma),
            ("sweep", &sweep),
        ],
    ))
}

fn figure(kind: FigureKind, input: Option<&Path>, config: &ExperimentConfig) -> Result<String> {
    let mask = config.mask()?;
    let settings = config.scheme_settings();
    let xis = [0.2, 0.4, 0.6, 0.8, 1.0, 1.4];
    let need_input =
        || input.ok_or_else(|| CliError::Usage("this figure needs --input <pyramid.json>".into()));
    let table = match kind {
        FigureKind::Roots => {
            let mut all = vec![0.0];
            all.extend(xis);
            figures::root_displacement(&mask, &all, &settings)?
        }
        FigureKind::Gamma => figures::decimation_coefficients(&mask, &xis, &settings)?,
        FigureKind::Limits => {
            let mut all = vec![0.0];
            all.extend(xis);
            figures::limit_functions(&mask, &all, 6, &settings)?
        }
        FigureKind::Residual => {
            let fine: Vec<f64> = (1..=30).map(|i| i as f64 * 0.05).collect();
            figures::xi_sweep(&mask, &fine, &settings)?
        }
        FigureKind::LinearDetails => {
            let pyr: LinearPyramid = serde_json::from_str(&read(need_input()?)?)?;
            figures::linear_detail_magnitudes(&pyr)
        }
        FigureKind::ManifoldDetails => {
            let pyr: ManifoldPyramid = serde_json::from_str(&read(need_input()?)?)?;
            figures::manifold_detail_norms(&pyr)?
        }
    };
    Ok(csv_report(config, &[("figure", &table)]))
}
