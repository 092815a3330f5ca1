//! Acceptance checks. One line per criterion; the process fails if any line is FAIL.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use darkport::darkport::{analytic_moments, distribution};
use darkport::disentangle::disentangle;
use darkport::fockoracle::{marginal_distribution, marginal_moments, output_state, OracleOptions};
use darkport::gaussian::{apply_beam_splitter, exact_dark_port_moments, input_state, photon_moments};
use darkport::{CoherentParams, PhotonDistribution, Port, SqueezeParams};
use darkport_cli::commands::execute;
use darkport_cli::config::{CommandKind, Flags, RunConfig};
use darkport_cli::output::Format;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FIG1_R: [f64; 6] = [0.0, 0.3, 0.6, 0.9, 1.2, 1.5];
const SIGNAL: f64 = 500.0;
const DELTA: f64 = 0.01;
const TARGET_RESIDUAL: f64 = 1e-10;

struct Line {
    id: &'static str,
    pass: bool,
}

fn line(id: &'static str, pass: bool, detail: String) -> Line {
    println!("{} {id}: {detail}", if pass { "PASS" } else { "FAIL" });
    Line { id, pass }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Coherent amplitude with `|delta alpha|^2 = signal` and phase `phi`.
fn signal_alpha(signal: f64, delta: f64, phi: f64) -> CoherentParams {
    CoherentParams::new(signal.sqrt() / delta, phi).unwrap()
}

fn fig1_distribution(r: f64) -> PhotonDistribution {
    // theta = 2 phi with phi = 0
    let zeta = SqueezeParams::new(r, 0.0).unwrap();
    distribution(&signal_alpha(SIGNAL, DELTA, 0.0), &zeta, DELTA, TARGET_RESIDUAL).unwrap()
}

fn fig1_mean(r: f64) -> f64 {
    SIGNAL + r.sinh().powi(2)
}

fn fig1_variance(r: f64) -> f64 {
    SIGNAL * (-2.0 * r).exp() + 2.0 * (r.sinh() * r.cosh()).powi(2)
}

fn criterion_1() -> Line {
    let start = Instant::now();
    let cli_ok = RunConfig::from_flags(CommandKind::Fig1, &Flags::default())
        .and_then(|config| execute(&config))
        .map(|outcome| outcome.failure.is_none() && !outcome.report.render(Format::Csv).is_empty())
        .unwrap_or(false);
    let cli_seconds = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let dists: Vec<PhotonDistribution> = FIG1_R.iter().map(|&r| fig1_distribution(r)).collect();
    let lib_seconds = start.elapsed().as_secs_f64();

    let alpha = signal_alpha(SIGNAL, DELTA, 0.0);
    let (mut worst_norm, mut worst_closed, mut worst_sum) = (0.0_f64, 0.0_f64, 0.0_f64);
    for (&r, d) in FIG1_R.iter().zip(&dists) {
        let closed = analytic_moments(&alpha, &SqueezeParams::new(r, 0.0).unwrap(), DELTA);
        let sums = d.moments();
        worst_norm = worst_norm.max(d.normalization_residual().abs());
        worst_closed = worst_closed.max(rel(closed.mean, fig1_mean(r))).max(rel(closed.variance, fig1_variance(r)));
        worst_sum = worst_sum.max(rel(sums.mean, fig1_mean(r))).max(rel(sums.variance, fig1_variance(r)));
    }
    let seconds = cli_seconds.max(lib_seconds);
    line(
        "1 fig1 reproduction",
        cli_ok && worst_norm <= 1e-9 && worst_closed <= 1e-6 && worst_sum <= 1e-6 && seconds <= 10.0,
        format!(
            "residual {worst_norm:.2e} (<= 1e-9), closed-form rel {worst_closed:.2e}, sum rel {worst_sum:.2e} (<= 1e-6), \
             cli {cli_seconds:.3}s, library {lib_seconds:.3}s (<= 10s)"
        ),
    )
}

fn criterion_2() -> Line {
    let closed = fig1_variance(1.0).sqrt() / fig1_variance(0.0).sqrt();
    let sums = fig1_distribution(1.0).moments().std_dev() / fig1_distribution(0.0).moments().std_dev();
    let worst = (closed - 0.3854).abs().max((sums - 0.3854).abs());
    line(
        "2 noise reduction",
        worst <= 1e-3 && closed < 0.5 && sums < 0.5,
        format!("std ratio closed form {closed:.10}, from sums {sums:.10} (0.3854 +- 0.001)"),
    )
}

fn criterion_3() -> Line {
    let base = fig1_distribution(0.0).moments().mean;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_change: f64 = 0.0;
    for k in 0..=15 {
        let r = 0.1 * k as f64;
        let zeta = SqueezeParams::new(r, 0.0).unwrap();
        let alpha = signal_alpha(SIGNAL, DELTA, 0.0);
        let change = distribution(&alpha, &zeta, DELTA, TARGET_RESIDUAL).unwrap().moments().mean - base;
        let closed_change = analytic_moments(&alpha, &zeta, DELTA).mean - SIGNAL;
        worst_excess = worst_excess.max(change - r.sinh().powi(2)).max(closed_change - r.sinh().powi(2));
        worst_change = worst_change.max(change.abs() / SIGNAL).max(closed_change.abs() / SIGNAL);
    }

    let zeta0 = SqueezeParams::new(1.0, 0.0).unwrap();
    let alpha0 = signal_alpha(SIGNAL, DELTA, 0.0);
    let closed_ref = analytic_moments(&alpha0, &zeta0, DELTA).mean;
    let exact_ref = exact_dark_port_moments(&alpha0, &zeta0, FRAC_PI_2 - DELTA).mean;
    let mut worst_phase: f64 = 0.0;
    for i in 0..5 {
        for j in 0..5 {
            let alpha = signal_alpha(SIGNAL, DELTA, 2.0 * PI * i as f64 / 5.0);
            let zeta = SqueezeParams::new(1.0, 2.0 * PI * j as f64 / 5.0).unwrap();
            worst_phase = worst_phase
                .max(rel(analytic_moments(&alpha, &zeta, DELTA).mean, closed_ref))
                .max(rel(exact_dark_port_moments(&alpha, &zeta, FRAC_PI_2 - DELTA).mean, exact_ref));
        }
    }
    line(
        "3 no amplification",
        worst_excess <= 1e-6 && worst_change < 0.01 && worst_phase <= 1e-12,
        format!(
            "mean change - sinh^2 r at most {worst_excess:.2e} (<= 1e-6, truncation), largest change {:.4}% (< 1%), \
             phase spread rel {worst_phase:.2e} (<= 1e-12)",
            100.0 * worst_change
        ),
    )
}

struct Instance {
    alpha: CoherentParams,
    zeta: SqueezeParams,
    gamma: f64,
}

fn random_instances() -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    (0..20)
        .map(|_| Instance {
            alpha: CoherentParams::new(rng.random_range(0.0..=2.0), rng.random_range(-PI..PI)).unwrap(),
            zeta: SqueezeParams::new(rng.random_range(0.0..=1.0), rng.random_range(0.0..2.0 * PI)).unwrap(),
            gamma: rng.random_range(0.0..=FRAC_PI_2),
        })
        .collect()
}

/// Largest |gaussian - oracle| over both ports, means and variances.
fn oracle_moment_gap(inst: &Instance, options: &OracleOptions) -> (f64, f64) {
    let state = output_state(&inst.alpha, &inst.zeta, inst.gamma, options).unwrap();
    let gaussian = apply_beam_splitter(&input_state(&inst.alpha, &inst.zeta), inst.gamma);
    let mut gap: f64 = 0.0;
    for port in [Port::One, Port::Two] {
        let g = photon_moments(&gaussian, port);
        let f = marginal_moments(&state, port);
        gap = gap.max((g.mean - f.mean).abs()).max((g.variance - f.variance).abs());
    }
    (gap, state.norm_deficit())
}

fn criterion_4() -> Vec<Line> {
    let instances = random_instances();
    let start = Instant::now();
    // cutoff 40 as stated; leakage is reported, not used to reject the run
    let fixed = OracleOptions {
        cutoffs: (40, 40),
        leakage_threshold: 1.0,
    };
    let mut worst: f64 = 0.0;
    let mut worst_r = 0.0;
    let mut worst_leak: f64 = 0.0;
    let mut failing = 0;
    for inst in &instances {
        let (gap, leak) = oracle_moment_gap(inst, &fixed);
        if gap > 1e-6 {
            failing += 1;
        }
        if gap > worst {
            worst = gap;
            worst_r = inst.zeta.r();
        }
        worst_leak = worst_leak.max(leak);
    }
    let seconds = start.elapsed().as_secs_f64();
    let literal = line(
        "4 oracle moments (cutoff 40)",
        worst <= 1e-6 && seconds <= 60.0,
        format!(
            "max abs gap {worst:.2e} (<= 1e-6) at r = {worst_r:.3}, {failing}/20 instances over, \
             max truncation loss {worst_leak:.2e}, {seconds:.2}s (<= 60s)"
        ),
    );

    // the same instances with the library's own cutoff rule
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut largest_cutoff = 0;
    for inst in &instances {
        let options = OracleOptions::for_params(&inst.alpha, &inst.zeta);
        largest_cutoff = largest_cutoff.max(options.cutoffs.0);
        worst = worst.max(oracle_moment_gap(inst, &options).0);
    }
    let seconds = start.elapsed().as_secs_f64();
    let policy = line(
        "4' oracle moments (automatic cutoff, supplementary)",
        worst <= 1e-6,
        format!("max abs gap {worst:.2e} (<= 1e-6), cutoffs up to {largest_cutoff}, {seconds:.2}s"),
    );
    vec![literal, policy]
}

fn criterion_5() -> Line {
    // delta |alpha| = 1, theta = 2 phi = 0
    let r = 0.8;
    let cutoff = 120;
    let zeta = SqueezeParams::new(r, 0.0).unwrap();
    let start = Instant::now();
    let mut tv = Vec::new();
    let mut worst_leak: f64 = 0.0;
    for mag in [3.0, 6.0] {
        let delta = 1.0 / mag;
        let alpha = CoherentParams::new(mag, 0.0).unwrap();
        let analytic = distribution(&alpha, &zeta, delta, TARGET_RESIDUAL).unwrap();
        let options = OracleOptions {
            cutoffs: (cutoff, cutoff),
            leakage_threshold: 1e-6,
        };
        let state = output_state(&alpha, &zeta, FRAC_PI_2 - delta, &options).unwrap();
        worst_leak = worst_leak.max(state.norm_deficit());
        tv.push(analytic.total_variation(&marginal_distribution(&state, Port::One)));
    }
    let seconds = start.elapsed().as_secs_f64();
    line(
        "5 oracle distribution shape",
        tv[1] <= 0.02 && tv[1] < tv[0] && seconds <= 300.0,
        format!(
            "TV at |alpha|=3: {:.4e}, at |alpha|=6: {:.4e} (<= 0.02 and decreasing), cutoff {cutoff}, \
             truncation loss {worst_leak:.2e}, {seconds:.2}s (<= 300s)",
            tv[0], tv[1]
        ),
    )
}

fn criterion_6() -> Vec<Line> {
    let delta: f64 = 1e-3;
    let tol = 10.0 * delta * delta;
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    for r in [0.5, 1.0, 1.5] {
        let zeta = SqueezeParams::new(r, 0.0).unwrap();
        let c = disentangle(&zeta, FRAC_PI_2 - delta).unwrap().coeffs;
        let es = (c.sigma_s - (-delta * r.sinh())).abs();
        let et = (c.sigma_t - delta * (1.0 - r.cosh())).abs();
        worst = worst.max(es).max(et);
        detail.push(format!("r={r}: sigma_S {:.6e} sigma_T {:.6e}", c.sigma_s, c.sigma_t));
    }
    let first_order = line(
        "6 disentangling first-order law",
        worst <= tol,
        format!(
            "max |solved - (-delta sinh r, delta(1 - cosh r))| = {worst:.3e} (<= {tol:.0e}); {}",
            detail.join(", ")
        ),
    );

    let mut worst_end: f64 = 0.0;
    for r in [0.5, 1.0, 1.5] {
        let zeta = SqueezeParams::new(r, 0.7).unwrap();
        let at0 = disentangle(&zeta, 0.0).unwrap().coeffs;
        let at90 = disentangle(&zeta, FRAC_PI_2).unwrap().coeffs;
        worst_end = worst_end
            .max(at0.sigma_t.abs())
            .max(at0.sigma_s.abs())
            .max(at0.sigma_1.abs())
            .max((at0.sigma_2 - r).abs())
            .max(at90.sigma_t.abs())
            .max(at90.sigma_s.abs())
            .max((at90.sigma_1 - r).abs())
            .max(at90.sigma_2.abs());
    }
    let endpoints = line(
        "6 disentangling endpoints",
        worst_end <= 1e-10,
        format!("max deviation {worst_end:.2e} (<= 1e-10)"),
    );
    vec![first_order, endpoints]
}

fn criterion_7() -> Line {
    let mut bad = Vec::new();
    for &r in &FIG1_R {
        let zeta = SqueezeParams::new(r, 0.0).unwrap();
        let closed: Vec<f64> = (0..101)
            .map(|k| {
                // mismatch theta - 2 phi runs over [-pi, pi]
                let mismatch = -PI + 2.0 * PI * k as f64 / 100.0;
                let alpha = signal_alpha(SIGNAL, DELTA, -mismatch / 2.0);
                analytic_moments(&alpha, &zeta, DELTA).variance
            })
            .collect();
        let exact: Vec<f64> = (0..101)
            .map(|k| {
                let mismatch = -PI + 2.0 * PI * k as f64 / 100.0;
                let alpha = signal_alpha(SIGNAL, DELTA, -mismatch / 2.0);
                exact_dark_port_moments(&alpha, &zeta, FRAC_PI_2 - DELTA).variance
            })
            .collect();
        for v in [&closed, &exact] {
            let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
            // at r = 0 every point ties
            if v[50] > min * (1.0 + 1e-12) {
                bad.push(r);
            }
        }
    }
    line(
        "7 variance optimum",
        bad.is_empty(),
        if bad.is_empty() {
            "minimum at theta - 2 phi = 0 for every r, closed form and exact".into()
        } else {
            format!("minimum elsewhere for r in {bad:?}")
        },
    )
}

fn criterion_8() -> Line {
    let squeezed = fig1_distribution(1.5).local_maxima(1e-12);
    let coherent = fig1_distribution(0.0).local_maxima(1e-12);
    line(
        "8 oscillations",
        squeezed >= 3 && coherent == 1,
        format!("local maxima at r=1.5: {squeezed} (>= 3), at r=0: {coherent} (== 1)"),
    )
}

fn main() {
    let mut lines = vec![criterion_1(), criterion_2(), criterion_3()];
    lines.extend(criterion_4());
    lines.push(criterion_5());
    lines.extend(criterion_6());
    lines.push(criterion_7());
    lines.push(criterion_8());
    let failed: Vec<&str> = lines.iter().filter(|l| !l.pass).map(|l| l.id).collect();
    println!("\n{} of {} acceptance lines pass", lines.len() - failed.len(), lines.len());
    if !failed.is_empty() {
        println!("failing: {}", failed.join("; "));
        std::process::exit(1);
    }
}
