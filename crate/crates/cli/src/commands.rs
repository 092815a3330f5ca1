//! One function per subcommand, each producing a [`Report`].

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;

use darkport::darkport::{self as dp, DELTA_LIMIT};
use darkport::disentangle;
use darkport::fockoracle::{self, OracleOptions};
use darkport::gaussian;
use darkport::{CoherentParams, Moments, Port, SqueezeParams};

use crate::config::{alpha_from_signal, check_physical, CommandKind, Physical, RunConfig, Splitter, SweepParam};
use crate::error::CliError;
use crate::output::{format_number, Cell, Report, Table};

/// The oracle joins `moments` and `validate` automatically up to this per-mode cutoff.
pub const ORACLE_AUTO_CUTOFF: usize = 160;

pub const FIG1_R: [f64; 6] = [0.0, 0.3, 0.6, 0.9, 1.2, 1.5];

/// A report plus, for `validate`, the reason the run should exit non-zero.
#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub failure: Option<CliError>,
}

impl From<Report> for Outcome {
    fn from(report: Report) -> Self {
        Self { report, failure: None }
    }
}

pub fn execute(config: &RunConfig) -> Result<Outcome, CliError> {
    match config.command {
        CommandKind::Distribution => distribution(config).map(Into::into),
        CommandKind::Moments => moments(config).map(Into::into),
        CommandKind::Sweep => sweep(config).map(Into::into),
        CommandKind::Disentangle => disentangle_cmd(config).map(Into::into),
        CommandKind::Validate => validate(config),
        CommandKind::Fig1 => fig1(config).map(Into::into),
    }
}

fn states(p: &Physical) -> Result<(CoherentParams, SqueezeParams), CliError> {
    Ok((CoherentParams::new(p.alpha_mag, p.alpha_phase)?, SqueezeParams::new(p.r, p.theta)?))
}

fn param_block(config: &RunConfig, p: &Physical) -> Vec<(String, Cell)> {
    let mut params = vec![
        ("command".to_string(), Cell::from(command_name(config.command))),
        ("alpha_mag".into(), p.alpha_mag.into()),
        ("alpha_phase".into(), p.alpha_phase.into()),
        ("r".into(), p.r.into()),
        ("theta".into(), p.theta.into()),
        ("delta".into(), p.splitter.delta().into()),
        ("gamma".into(), p.splitter.gamma().into()),
        ("delta_alpha_sq".into(), (p.alpha_mag * p.splitter.delta()).powi(2).into()),
    ];
    params.push(("target_residual".into(), config.target_residual.into()));
    params
}

fn command_name(c: CommandKind) -> &'static str {
    match c {
        CommandKind::Distribution => "distribution",
        CommandKind::Moments => "moments",
        CommandKind::Sweep => "sweep",
        CommandKind::Disentangle => "disentangle",
        CommandKind::Validate => "validate",
        CommandKind::Fig1 => "fig1",
    }
}

fn distribution(config: &RunConfig) -> Result<Report, CliError> {
    let p = &config.physical;
    let (alpha, zeta) = states(p)?;
    let limit = config.cutoff.unwrap_or(dp::DEFAULT_MAX_CUTOFF);
    let d = dp::distribution_with_limit(&alpha, &zeta, p.splitter.delta(), config.target_residual, limit)?;

    let mut series = Table::new(["n", "P_n"]);
    for (n, &prob) in d.probabilities().iter().enumerate() {
        series.push(vec![n.into(), prob.into()]);
    }
    let mut params = param_block(config, p);
    params.push(("cutoff".into(), d.cutoff().into()));
    params.push(("normalization_residual".into(), d.normalization_residual().into()));
    Ok(Report { params, series, summary: None })
}

/// Per-mode cutoff for the oracle, if it should run.
fn oracle_cutoff(config: &RunConfig, alpha: &CoherentParams, zeta: &SqueezeParams) -> Option<usize> {
    config.cutoff.or_else(|| {
        let c = fockoracle::required_cutoff(alpha.magnitude(), zeta.r());
        (c <= ORACLE_AUTO_CUTOFF).then_some(c)
    })
}

fn oracle_moments(alpha: &CoherentParams, zeta: &SqueezeParams, gamma: f64, cutoff: usize) -> Result<Moments, CliError> {
    let state = fockoracle::output_state(alpha, zeta, gamma, &OracleOptions::with_cutoff(cutoff))?;
    Ok(fockoracle::marginal_moments(&state, Port::One))
}

fn moments(config: &RunConfig) -> Result<Report, CliError> {
    let p = &config.physical;
    let (alpha, zeta) = states(p)?;
    let delta = p.splitter.delta();
    let gamma = p.splitter.gamma();

    let exact = gaussian::exact_dark_port_moments(&alpha, &zeta, gamma);
    let mut engines: Vec<(&str, Moments)> = Vec::new();
    if delta <= DELTA_LIMIT {
        engines.push(("closed_form", dp::analytic_moments(&alpha, &zeta, delta)));
    }
    engines.push(("gaussian", exact));
    if let Some(cutoff) = oracle_cutoff(config, &alpha, &zeta) {
        engines.push(("fock_oracle", oracle_moments(&alpha, &zeta, gamma, cutoff)?));
    }

    let mut series = Table::new(["engine", "mean", "variance", "abs_diff_mean", "abs_diff_variance"]);
    for (name, m) in &engines {
        series.push(vec![
            (*name).into(),
            m.mean.into(),
            m.variance.into(),
            (m.mean - exact.mean).abs().into(),
            (m.variance - exact.variance).abs().into(),
        ]);
    }
    Ok(Report {
        params: param_block(config, p),
        series,
        summary: None,
    })
}

fn apply_sweep_value(config: &RunConfig, param: SweepParam, v: f64) -> Result<Physical, CliError> {
    let mut p = config.physical;
    let signal = config.delta_alpha_sq;
    match param {
        SweepParam::AlphaMag => p.alpha_mag = v,
        SweepParam::AlphaPhase => p.alpha_phase = v,
        SweepParam::R => p.r = v,
        SweepParam::Theta => p.theta = v,
        SweepParam::Delta | SweepParam::Gamma => {
            p.splitter = if param == SweepParam::Delta { Splitter::Delta(v) } else { Splitter::Gamma(v) };
            let d = p.splitter.delta();
            if !(0.0..=FRAC_PI_2).contains(&d) {
                return Err(CliError::usage(format!("sweep value {v} puts delta = {d} outside [0, pi/2]")));
            }
            if let Some(n) = signal {
                p.alpha_mag = alpha_from_signal(n, d)?;
            }
        }
        SweepParam::DeltaAlphaSq => p.alpha_mag = alpha_from_signal(v, p.splitter.delta())?,
    }
    check_physical(&p)?;
    Ok(p)
}

fn sweep(config: &RunConfig) -> Result<Report, CliError> {
    let spec = config.sweep.expect("sweep settings are validated with the command");
    let values = spec.values();
    let rows: Vec<Result<Vec<Cell>, CliError>> = values
        .par_iter()
        .map(|&v| {
            let p = apply_sweep_value(config, spec.param, v)?;
            let (alpha, zeta) = states(&p)?;
            let delta = p.splitter.delta();
            let exact = gaussian::exact_dark_port_moments(&alpha, &zeta, p.splitter.gamma());
            let closed = (delta <= DELTA_LIMIT).then(|| dp::analytic_moments(&alpha, &zeta, delta));
            let shown = if config.degrees && spec.param.is_angle() { v.to_degrees() } else { v };
            let na = || Cell::from("n/a");
            Ok(vec![
                shown.into(),
                closed.map_or_else(na, |m| m.mean.into()),
                closed.map_or_else(na, |m| m.variance.into()),
                exact.mean.into(),
                exact.variance.into(),
            ])
        })
        .collect();

    let mut series = Table::new([spec.param.name(), "mean_closed_form", "variance_closed_form", "mean_exact", "variance_exact"]);
    for row in rows {
        series.push(row?);
    }
    let mut params = param_block(config, &config.physical);
    params.push(("sweep_param".into(), spec.param.name().into()));
    params.push(("steps".into(), spec.steps.into()));
    Ok(Report { params, series, summary: None })
}

fn disentangle_cmd(config: &RunConfig) -> Result<Report, CliError> {
    let p = &config.physical;
    let (_, zeta) = states(p)?;
    let gamma = p.splitter.gamma();
    let sol = disentangle::disentangle(&zeta, gamma)?;
    let c = sol.coeffs;
    let mut series = Table::new(["r", "gamma", "sigma_T", "sigma_S", "sigma_1", "sigma_2", "residual"]);
    series.push(vec![
        p.r.into(),
        gamma.into(),
        c.sigma_t.into(),
        c.sigma_s.into(),
        c.sigma_1.into(),
        c.sigma_2.into(),
        sol.residual.into(),
    ]);
    Ok(Report {
        params: param_block(config, p),
        series,
        summary: None,
    })
}

/// One line of the validation report; passes when `achieved <= tolerance`.
struct Check {
    name: &'static str,
    achieved: f64,
    tolerance: f64,
}

impl Check {
    fn below(name: &'static str, achieved: f64, tolerance: f64) -> Self {
        Self { name, achieved, tolerance }
    }

    fn passed(&self) -> bool {
        self.achieved <= self.tolerance
    }
}

fn validate(config: &RunConfig) -> Result<Outcome, CliError> {
    let p = &config.physical;
    let (alpha, zeta) = states(p)?;
    let delta = p.splitter.delta();
    let gamma = p.splitter.gamma();
    let mut checks = Vec::new();

    checks.push(Check::below(
        "beam_splitter_mode_transformation",
        fockoracle::beam_splitter_convention_error(0.7, 16)?,
        1e-10,
    ));
    let swapped = fockoracle::beam_splitter_unitary_apply(&fockoracle::FockStateVector::basis(1, 0, (4, 4)), FRAC_PI_2)?;
    checks.push(Check::below("port1_routed_to_port2", (1.0 - swapped.amplitude(0, 1).norm_sqr()).abs(), 1e-12));

    if delta <= DELTA_LIMIT {
        let d = dp::distribution(&alpha, &zeta, delta, config.target_residual)?;
        checks.push(Check::below("darkport_normalization", d.normalization_residual(), config.target_residual));
        let closed = dp::analytic_moments(&alpha, &zeta, delta);
        let sums = d.moments();
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
        checks.push(Check::below("darkport_sum_vs_closed_form_mean", rel(sums.mean, closed.mean), 1e-6));
        checks.push(Check::below("darkport_sum_vs_closed_form_variance", rel(sums.variance, closed.variance), 1e-6));

        // the closed form is a small-delta expansion of the exact moments
        let exact = gaussian::exact_dark_port_moments(&alpha, &zeta, gamma);
        let expansion_tol = expansion_tolerance(delta, p.r);
        checks.push(Check::below("closed_form_vs_gaussian_mean", rel(closed.mean, exact.mean), expansion_tol));
        checks.push(Check::below("closed_form_vs_gaussian_variance", rel(closed.variance, exact.variance), expansion_tol));
    }

    // squeezed vacuum from both Fock constructions
    let sv_cut = fockoracle::required_cutoff(0.0, p.r.min(1.5));
    let sv_zeta = SqueezeParams::new(p.r.min(1.5), p.theta)?;
    let oracle_sv = fockoracle::squeezed_vacuum_fock(&sv_zeta, sv_cut);
    let series = dp::fock_amplitudes(&sv_zeta, &dp::EffectiveDisplacement::from_alpha_tilde(Default::default()), sv_cut);
    let worst = oracle_sv
        .amplitudes
        .iter()
        .zip(series.terms())
        .map(|(a, b)| (a - b.to_complex()).norm())
        .fold(0.0, f64::max);
    checks.push(Check::below("squeezed_vacuum_amplitudes_agree", worst, 1e-12));

    // oracle against the Gaussian model, at the requested point when it is small enough
    let (o_alpha, o_zeta, o_gamma) = if oracle_cutoff(config, &alpha, &zeta).is_some() {
        (alpha, zeta, gamma)
    } else {
        (CoherentParams::new(1.5, 0.4)?, SqueezeParams::new(0.7, 0.8)?, 1.2)
    };
    let o_cut = oracle_cutoff(config, &o_alpha, &o_zeta).unwrap_or_else(|| fockoracle::required_cutoff(1.5, 0.7));
    let opts = OracleOptions::with_cutoff(o_cut);
    let state = fockoracle::output_state(&o_alpha, &o_zeta, o_gamma, &opts)?;
    let fock = fockoracle::marginal_moments(&state, Port::One);
    let gauss = gaussian::exact_dark_port_moments(&o_alpha, &o_zeta, o_gamma);
    checks.push(Check::below("oracle_vs_gaussian_mean", (fock.mean - gauss.mean).abs(), 1e-6));
    checks.push(Check::below("oracle_vs_gaussian_variance", (fock.variance - gauss.variance).abs(), 1e-6));
    let direct = fockoracle::output_state_direct(&o_alpha, &o_zeta, o_gamma, &opts)?;
    checks.push(Check::below("oracle_construction_infidelity", 1.0 - state.fidelity(&direct), 1e-9));

    if zeta.r() <= disentangle::MAX_R {
        let sol = disentangle::disentangle(&zeta, gamma)?;
        checks.push(Check::below("disentangle_round_trip", sol.residual, 1e-10));
    }

    let mut series = Table::new(["check", "achieved", "tolerance", "status"]);
    let mut failed = Vec::new();
    for c in &checks {
        let ok = c.passed();
        if !ok {
            failed.push(c.name);
        }
        series.push(vec![c.name.into(), c.achieved.into(), c.tolerance.into(), if ok { "PASS" } else { "FAIL" }.into()]);
    }
    let report = Report {
        params: param_block(config, p),
        series,
        summary: None,
    };
    let failure = (!failed.is_empty()).then(|| CliError::Validation(failed.join(", ")));
    Ok(Outcome { report, failure })
}

/// Relative gap allowed between the closed-form and exact dark-port moments.
///
/// The exact port mixes `sin^2 delta` of unsqueezed vacuum into the squeezed
/// quadrature, so the variance moves by about `delta^2 (e^{2r} - 1)` relative.
pub fn expansion_tolerance(delta: f64, r: f64) -> f64 {
    2.0 * delta * delta * (2.0 * r).exp() + 1e-9
}

fn fig1(config: &RunConfig) -> Result<Report, CliError> {
    let p = config.physical;
    let alpha = CoherentParams::new(p.alpha_mag, p.alpha_phase)?;
    let delta = p.splitter.delta();
    let results: Vec<Result<(f64, darkport::PhotonDistribution, Moments), CliError>> = FIG1_R
        .par_iter()
        .map(|&r| {
            let zeta = SqueezeParams::new(r, p.theta)?;
            let limit = config.cutoff.unwrap_or(dp::DEFAULT_MAX_CUTOFF);
            let d = dp::distribution_with_limit(&alpha, &zeta, delta, config.target_residual, limit)?;
            Ok((r, d, dp::analytic_moments(&alpha, &zeta, delta)))
        })
        .collect();
    let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    // plotting window: mean +- 12 sigma over the whole grid
    let lo = results
        .iter()
        .map(|(_, _, m)| m.mean - 12.0 * m.std_dev())
        .fold(f64::INFINITY, f64::min)
        .floor()
        .max(0.0) as usize;
    let hi = results
        .iter()
        .map(|(_, _, m)| m.mean + 12.0 * m.std_dev())
        .fold(0.0, f64::max)
        .ceil() as usize;

    let mut columns = vec!["n".to_string()];
    columns.extend(results.iter().map(|(r, _, _)| format!("P_r{}", format_number(*r))));
    let mut series = Table::new(columns);
    for n in lo..=hi {
        let mut row = vec![Cell::from(n)];
        row.extend(results.iter().map(|(_, d, _)| Cell::from(d.get(n))));
        series.push(row);
    }

    let mut summary = Table::new([
        "r",
        "mean",
        "variance",
        "mean_closed_form",
        "variance_closed_form",
        "normalization_residual",
        "cutoff",
    ]);
    for (r, d, m) in &results {
        let sums = d.moments();
        summary.push(vec![
            (*r).into(),
            sums.mean.into(),
            sums.variance.into(),
            m.mean.into(),
            m.variance.into(),
            d.normalization_residual().into(),
            d.cutoff().into(),
        ]);
    }
    Ok(Report {
        params: param_block(config, &p),
        series,
        summary: Some(summary),
    })
}
