//! End-to-end acceptance checks. Runs every criterion in sequence (so the
//! timing check is not competing with the Monte Carlo work), prints one line
//! per criterion and exits non-zero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use rssloc::report::{report_to_string, Format};
use rssloc::{
    run_experiment, time_scaling, EstimatorKind, ExperimentConfig, ScenarioSource, Sweep,
    TimingConfig, TrialReport,
};
use rssloc_core::inference::fisher_for_sensors;
use rssloc_core::model::noise_free_raw_db;
use rssloc_core::rng::trial_rng;
use rssloc_core::scenarios::{self, ScenarioId, SignalParams, FIXED_2D_SENSORS, FIXED_2D_SOURCE};
use rssloc_core::stats::{log_log_slope, median};
use rssloc_core::{
    fisher_information, generate_measurements, generate_measurements_with_rng, localizability,
    ls_known_variance, ls_unknown_variance, ml_reference, two_step, GnConfig, MeasurementSet,
    NoiseModel, Point, Verdict,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn fixed_2d(sigma: f64, rounds: u32) -> rssloc_core::Scenario {
    let params = SignalParams {
        sigma_db: sigma,
        rounds,
        ..Default::default()
    };
    scenarios::build(ScenarioId::TwoDFixed, &params, None).unwrap()
}

fn zero_noise_exactness() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for id in ScenarioId::ALL {
        let params = SignalParams {
            sigma_db: 0.0,
            ..Default::default()
        };
        let sc = scenarios::build(id, &params, Some((100, 5))).unwrap();
        let ms = generate_measurements(&sc, 0).unwrap();
        let noise = sc.noise();
        let estimates = [
            ls_known_variance(&ms, noise.bias_b()),
            ls_unknown_variance(&ms),
            two_step(&ms, Some(&noise)),
        ];
        for e in estimates {
            let p = e.unwrap().p_hat;
            let err = (0..p.dim())
                .map(|k| (p[k] - sc.source()[k]).abs())
                .fold(0.0, f64::max);
            worst = worst.max(err);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst < 1e-9 && secs < 1.0,
        format!("max abs error {worst:.2e} m, {secs:.3} s"),
    )
}

fn rounds_sweep() -> TrialReport {
    let mut cfg = ExperimentConfig::new(
        ScenarioSource::Registry(ScenarioId::TwoDFixed),
        Sweep::Rounds(vec![3, 30, 100, 200, 400]),
        1000,
        20_240_101,
    );
    cfg.estimators = vec![
        EstimatorKind::Ls,
        EstimatorKind::LsGn,
        EstimatorKind::LsUnknownGn,
    ];
    run_experiment(&cfg).unwrap()
}

fn rmse(r: &TrialReport, e: EstimatorKind, t: f64) -> f64 {
    r.row(e, t).unwrap().rmse_m.unwrap()
}

fn consistency(r: &TrialReport) -> Outcome {
    let slope = |e| {
        let pts: Vec<(f64, f64)> = [30.0, 100.0, 200.0, 400.0]
            .iter()
            .map(|&t| (10.0 * t, rmse(r, e, t)))
            .collect();
        log_log_slope(&pts)
    };
    let (ls, gn) = (slope(EstimatorKind::Ls), slope(EstimatorKind::LsGn));
    let ok = |s: f64| (-0.6..=-0.4).contains(&s);
    outcome(
        ok(ls) && ok(gn),
        format!("slope LS {ls:.4}, LS+GN {gn:.4} (want [-0.6, -0.4])"),
    )
}

fn efficiency(r: &TrialReport) -> Outcome {
    let bound = r.row(EstimatorKind::LsGn, 400.0).unwrap().rcrlb_m.unwrap();
    let gn = rmse(r, EstimatorKind::LsGn, 400.0);
    let ls = rmse(r, EstimatorKind::Ls, 400.0);
    let unknown = rmse(r, EstimatorKind::LsUnknownGn, 400.0);
    let (q, qu) = (gn / bound, unknown / bound);
    outcome(
        q <= 1.10 && gn <= ls && qu <= 1.12,
        format!(
            "RCRLB {bound:.4} m; LS+GN/RCRLB {q:.4} (<= 1.10), LS {ls:.4} >= LS+GN {gn:.4}, \
             unknown-σ+GN/RCRLB {qu:.4} (<= 1.12)"
        ),
    )
}

fn noise_sweep() -> Outcome {
    let sigmas = vec![0.1, 0.3, 0.5, 1.0, 2.0];
    let mut cfg = ExperimentConfig::new(
        ScenarioSource::Registry(ScenarioId::TwoDFixed),
        Sweep::Sigma(sigmas.clone()),
        1000,
        7_000_003,
    );
    cfg.params.rounds = 200;
    cfg.estimators = vec![EstimatorKind::LsGn];
    let r = run_experiment(&cfg).unwrap();
    let ratios: Vec<f64> = r
        .rows
        .iter()
        .map(|row| row.rmse_m.unwrap() / row.rcrlb_m.unwrap())
        .collect();
    let worst = ratios.iter().cloned().fold(0.0, f64::max);
    let listed: Vec<String> = sigmas
        .iter()
        .zip(&ratios)
        .map(|(s, q)| format!("σ={s}: {q:.4}"))
        .collect();
    outcome(
        worst <= 1.15,
        format!("RMSE/RCRLB {} (<= 1.15)", listed.join(", ")),
    )
}

fn bias_convergence(r: &TrialReport) -> Outcome {
    let b3 = r.row(EstimatorKind::LsGn, 3.0).unwrap().bias_m.unwrap();
    let b400 = r.row(EstimatorKind::LsGn, 400.0).unwrap().bias_m.unwrap();
    outcome(
        b400 < 0.25 * b3 && b400 < 0.1,
        format!(
            "bias T=3 {b3:.4} m, T=400 {b400:.4} m (ratio {:.3})",
            b400 / b3
        ),
    )
}

fn lognormal_moments() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst = (0.0f64, 0.0f64);
    for (sigma, alpha) in [(1.0, 2.0), (2.0, 2.0), (4.0, 3.0)] {
        let nm = NoiseModel::new(sigma, alpha).unwrap();
        let draws = 1_000_000;
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..draws {
            let eps: f64 = sigma * rng.sample::<f64, _>(StandardNormal);
            let omega = -eps / (10.0 * alpha);
            let x = 10f64.powf(2.0 * omega);
            s1 += x;
            s2 += x * x;
        }
        let mean = s1 / draws as f64;
        let var = s2 / draws as f64 - mean * mean;
        // closed forms written out independently of the library
        let k = std::f64::consts::LN_10.powi(2) * sigma * sigma / (50.0 * alpha * alpha);
        let b = k.exp();
        let v = b * b * (b * b - 1.0);
        assert!((nm.bias_b() - b).abs() < 1e-12 * b);
        worst.0 = worst.0.max((mean / b - 1.0).abs());
        worst.1 = worst.1.max((var / v - 1.0).abs());
    }
    outcome(
        worst.0 <= 0.005 && worst.1 <= 0.02,
        format!(
            "worst rel. error mean {:.3e} (<= 5e-3), variance {:.3e} (<= 2e-2)",
            worst.0, worst.1
        ),
    )
}

fn fisher_correctness() -> Outcome {
    let sigma = 2.0;
    let alpha = 2.0;
    let sc = fixed_2d(sigma, 1);
    let f = fisher_information(&sc, &sc.source()).unwrap();
    let p = FIXED_2D_SOURCE;
    // d mu_i / dp for mu_i = 10 log10 P0 - 10 alpha log10 |p - p_i|
    let grads: Vec<[f64; 2]> = FIXED_2D_SENSORS
        .iter()
        .map(|s| {
            let d = p - *s;
            let c = -10.0 * alpha / (d.norm_sq() * std::f64::consts::LN_10);
            [c * d[0], c * d[1]]
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let draws = 1_000_000;
    let mut cov = [[0.0; 2]; 2];
    for _ in 0..draws {
        let mut score = [0.0; 2];
        for g in &grads {
            let eps: f64 = sigma * rng.sample::<f64, _>(StandardNormal);
            score[0] += eps / (sigma * sigma) * g[0];
            score[1] += eps / (sigma * sigma) * g[1];
        }
        for a in 0..2 {
            for b in 0..2 {
                cov[a][b] += score[a] * score[b] / draws as f64;
            }
        }
    }
    let mut worst: f64 = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            worst = worst.max((cov[a][b] / f.fisher.get(a, b) - 1.0).abs());
        }
    }

    let r = 50.0;
    let square = [
        Point::new2(r, 0.0),
        Point::new2(-r, 0.0),
        Point::new2(0.0, r),
        Point::new2(0.0, -r),
    ];
    let sym = fisher_for_sensors(&square, 1, alpha, sigma, &Point::new2(0.0, 0.0)).unwrap();
    // each axis collects two sensors with |g|^2 = 1 / (r ln 10)^2, so every
    // diagonal entry of F^-1 is sigma^2 (r ln 10)^2 / (200 alpha^2)
    let hand = (sigma * r * std::f64::consts::LN_10).powi(2) / (100.0 * alpha * alpha);
    let rel = (sym.crlb / hand - 1.0).abs();
    outcome(
        worst <= 0.02 && rel <= 1e-9,
        format!("score covariance worst entry rel. error {worst:.4} (<= 0.02); symmetric CRLB {:.6} vs hand {hand:.6}, rel {rel:.1e}", sym.crlb),
    )
}

fn one_step_vs_ml() -> Outcome {
    let sc = fixed_2d(2.0, 400);
    let noise = sc.noise();
    let cfg = GnConfig::default();
    let (mut gap, mut err) = (Vec::new(), Vec::new());
    for j in 0..500 {
        let mut rng = trial_rng(808, 0, j);
        let ms = generate_measurements_with_rng(&sc, &mut rng).unwrap();
        let gn = two_step(&ms, Some(&noise)).unwrap().p_hat;
        let init = ls_known_variance(&ms, noise.bias_b()).unwrap().p_hat;
        let ml = ml_reference(&ms, &init, &cfg).unwrap().p_hat;
        gap.push((gn - ml).norm());
        err.push((ml - sc.source()).norm());
    }
    let (g, e) = (median(&gap), median(&err));
    outcome(
        g <= 0.2 * e,
        format!(
            "median |GN1 - ML| {g:.3e} m vs 0.2 * median |ML - p0| = {:.3e} m",
            0.2 * e
        ),
    )
}

fn timing_linearity() -> Outcome {
    let t = time_scaling(&TimingConfig {
        ns: vec![1000, 4000],
        runs: 200,
        batches: 10,
        seed: 909,
        ..Default::default()
    })
    .unwrap();
    let ratio = t[1].mean_seconds / t[0].mean_seconds;
    outcome(
        ratio <= 6.0 && t.iter().all(|p| p.runs >= 100),
        format!(
            "n=1000 {:.3e} s, n=4000 {:.3e} s, ratio {ratio:.2} (<= 6)",
            t[0].mean_seconds, t[1].mean_seconds
        ),
    )
}

fn noise_free(sensors: &[Point], source: Point) -> MeasurementSet {
    let raw = sensors
        .iter()
        .map(|s| noise_free_raw_db(s.distance(&source), 1.0, 2.0))
        .collect();
    MeasurementSet::from_raw_db(sensors.to_vec(), raw, 1.0, 2.0).unwrap()
}

fn geometry_gates() -> Outcome {
    let line: Vec<Point> = (0..6).map(|i| Point::new2(10.0 * i as f64, 0.0)).collect();
    let collinear_rejected =
        ls_known_variance(&noise_free(&line, Point::new2(20.0, 30.0)), 1.0).is_err();

    let square = [
        Point::new2(0.0, 0.0),
        Point::new2(1.0, 0.0),
        Point::new2(1.0, 1.0),
        Point::new2(0.0, 1.0),
    ];
    let ms = noise_free(&square, Point::new2(3.0, 2.0));
    let concyclic_rejected = ls_unknown_variance(&ms).is_err();
    let known_ok = ls_known_variance(&ms, 1.0)
        .map(|e| (e.p_hat - Point::new2(3.0, 2.0)).norm() < 1e-6)
        .unwrap_or(false);

    let layouts_ok = [ScenarioId::TwoDFixed, ScenarioId::ThreeDFixed]
        .iter()
        .all(|id| {
            let r = localizability(id.fixed_sensors().unwrap(), true).unwrap();
            r.hyperplane_ok && r.hypersphere_ok && r.verdict == Verdict::FullyLocalizable
        });
    outcome(
        collinear_rejected && concyclic_rejected && known_ok && layouts_ok,
        format!(
            "collinear rejected {collinear_rejected}, concyclic rejected {concyclic_rejected}, \
             known-σ on square ok {known_ok}, fixed layouts pass {layouts_ok}"
        ),
    )
}

fn determinism() -> Outcome {
    let mut all_same = true;
    for (scenario, sweep) in [
        (ScenarioId::TwoDFixed, Sweep::Rounds(vec![3, 30])),
        (ScenarioId::TwoDRandom, Sweep::NRandom(vec![50, 200])),
    ] {
        let mut cfg = ExperimentConfig::new(ScenarioSource::Registry(scenario), sweep, 200, 1111);
        cfg.estimators = EstimatorKind::ALL.to_vec();
        let a = report_to_string(&run_experiment(&cfg).unwrap(), Format::Csv);
        let b = report_to_string(&run_experiment(&cfg).unwrap(), Format::Csv);
        cfg.threads = Some(1);
        let one = report_to_string(&run_experiment(&cfg).unwrap(), Format::Csv);
        cfg.threads = Some(8);
        let many = report_to_string(&run_experiment(&cfg).unwrap(), Format::Csv);
        all_same &= a == b && a == one && a == many;
    }
    outcome(
        all_same,
        format!("byte-identical CSV across runs and 1/8 threads: {all_same}"),
    )
}

fn main() -> ExitCode {
    // `cargo test -- --list` and friends probe harness-less targets
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let mut failed = 0;
    let mut report = |id: &str, name: &str, o: Outcome| {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {id} {name}: {}", o.detail);
        failed += !o.pass as u32;
    };
    report("C1", "zero-noise exactness", zero_noise_exactness());
    let sweep = rounds_sweep();
    report("C2", "sqrt(n) consistency", consistency(&sweep));
    report("C3", "asymptotic efficiency", efficiency(&sweep));
    report("C4", "noise sweep", noise_sweep());
    report("C5", "bias convergence", bias_convergence(&sweep));
    report("C6", "lognormal moments", lognormal_moments());
    report("C7", "Fisher correctness", fisher_correctness());
    report("C8", "one-step GN vs ML", one_step_vs_ml());
    report("C9", "timing linearity", timing_linearity());
    report("C10", "geometry gates", geometry_gates());
    report("C11", "determinism", determinism());
    if failed == 0 {
        println!("acceptance: all 11 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
