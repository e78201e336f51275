//! Monte Carlo harness for bias/RMSE/RCRLB sweeps and timing runs.
//!
//! Every trial draws from its own ChaCha stream keyed by
//! `(master_seed, sweep point, trial index)` and results are reduced in trial
//! order, so a report does not depend on how many threads produced it.

use std::hint::black_box;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use rssloc_core::inference::fisher_for_sensors;
use rssloc_core::rng::{substream, trial_rng, trial_stream};
use rssloc_core::scenarios::{self, random_sensors, ScenarioId, SignalParams};
use rssloc_core::stats::ErrorStats;
use rssloc_core::{
    generate_measurements_with_rng, ls_known_variance, ls_unknown_variance, ml_reference, two_step,
    GnConfig, MeasurementSet, NoiseModel, Point, Scenario,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] rssloc_core::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EstimatorKind {
    #[serde(rename = "ls")]
    Ls,
    #[serde(rename = "ls-gn")]
    LsGn,
    #[serde(rename = "ls-unknown")]
    LsUnknown,
    #[serde(rename = "ls-unknown-gn")]
    LsUnknownGn,
    #[serde(rename = "ml")]
    MlReference,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 5] = [
        EstimatorKind::Ls,
        EstimatorKind::LsGn,
        EstimatorKind::LsUnknown,
        EstimatorKind::LsUnknownGn,
        EstimatorKind::MlReference,
    ];

    pub fn key(&self) -> &'static str {
        match self {
            EstimatorKind::Ls => "ls",
            EstimatorKind::LsGn => "ls-gn",
            EstimatorKind::LsUnknown => "ls-unknown",
            EstimatorKind::LsUnknownGn => "ls-unknown-gn",
            EstimatorKind::MlReference => "ml",
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            EstimatorKind::Ls => "LS",
            EstimatorKind::LsGn => "LS+GN",
            EstimatorKind::LsUnknown => "LS(unknown σ)",
            EstimatorKind::LsUnknownGn => "LS(unknown σ)+GN",
            EstimatorKind::MlReference => "ML-reference",
        }
    }
}

impl FromStr for EstimatorKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        EstimatorKind::ALL
            .into_iter()
            .find(|k| k.key() == s)
            .ok_or_else(|| ConfigError::Invalid(format!("unknown estimator `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sweep {
    Rounds(Vec<u32>),
    Sigma(Vec<f64>),
    NRandom(Vec<usize>),
}

impl Sweep {
    pub fn param_name(&self) -> &'static str {
        match self {
            Sweep::Rounds(_) => "rounds",
            Sweep::Sigma(_) => "sigma",
            Sweep::NRandom(_) => "n_random",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Sweep::Rounds(v) => v.len(),
            Sweep::Sigma(v) => v.len(),
            Sweep::NRandom(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn value(&self, k: usize) -> f64 {
        match self {
            Sweep::Rounds(v) => v[k] as f64,
            Sweep::Sigma(v) => v[k],
            Sweep::NRandom(v) => v[k] as f64,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ScenarioSource {
    Registry(ScenarioId),
    Inline(Scenario),
}

impl ScenarioSource {
    pub fn name(&self) -> String {
        match self {
            ScenarioSource::Registry(id) => id.name().to_string(),
            ScenarioSource::Inline(_) => "inline".to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: ScenarioSource,
    /// Base signal parameters for registry scenarios; swept fields are
    /// overridden per sweep point.
    pub params: SignalParams,
    pub estimators: Vec<EstimatorKind>,
    pub sweep: Sweep,
    pub trials: u32,
    pub master_seed: u64,
    /// Sensor count of the random family when the sweep is not over `n`.
    pub random_sensors: usize,
    /// Random family only: draw one geometry per sweep point instead of one
    /// per trial.
    pub fixed_geometry: bool,
    /// Measure per-trial estimator wall time. Off by default because wall
    /// times make reports non-reproducible.
    pub record_timing: bool,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
    pub ml: GnConfig,
}

impl ExperimentConfig {
    pub fn new(scenario: ScenarioSource, sweep: Sweep, trials: u32, master_seed: u64) -> Self {
        Self {
            scenario,
            params: SignalParams::default(),
            estimators: vec![EstimatorKind::Ls, EstimatorKind::LsGn],
            sweep,
            trials,
            master_seed,
            random_sensors: 100,
            fixed_geometry: false,
            record_timing: false,
            threads: None,
            ml: GnConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.trials < 1 || self.trials == u32::MAX {
            return bad("trials must be between 1 and 2^32 - 2");
        }
        if self.sweep.is_empty() {
            return bad("sweep is empty");
        }
        if self.estimators.is_empty() {
            return bad("no estimators selected");
        }
        if self.sweep.len() > u32::MAX as usize {
            return bad("too many sweep points");
        }
        self.ml.validate()?;
        let random = matches!(
            self.scenario,
            ScenarioSource::Registry(ScenarioId::TwoDRandom)
        );
        if let Sweep::NRandom(ns) = &self.sweep {
            if !random {
                return bad("an n_random sweep needs the 2d-random scenario");
            }
            if ns.iter().any(|&n| n < 4) {
                return bad("random scenarios need at least 4 sensors");
            }
        }
        if random && self.random_sensors < 4 {
            return bad("random scenarios need at least 4 sensors");
        }
        if let Some(0) = self.threads {
            return bad("threads must be positive");
        }
        // Instantiating every sweep point surfaces invalid signal parameters.
        for k in 0..self.sweep.len() {
            self.point_template(k)?;
        }
        Ok(())
    }

    /// Sensors (if fixed) and signal parameters at sweep point `k`.
    fn point_template(&self, k: usize) -> Result<PointTemplate, ConfigError> {
        let (mut params, sensors, source, random_n) = match &self.scenario {
            ScenarioSource::Registry(id) => (
                self.params,
                id.fixed_sensors().map(<[Point]>::to_vec),
                id.source(),
                self.random_sensors,
            ),
            ScenarioSource::Inline(s) => (
                SignalParams {
                    alpha: s.alpha(),
                    p0: s.p0(),
                    sigma_db: s.sigma_db(),
                    rounds: s.rounds(),
                },
                Some(s.sensors().to_vec()),
                s.source(),
                0,
            ),
        };
        let mut n_random = random_n;
        match &self.sweep {
            Sweep::Rounds(v) => params.rounds = v[k],
            Sweep::Sigma(v) => params.sigma_db = v[k],
            Sweep::NRandom(v) => n_random = v[k],
        }
        let sensors = match sensors {
            Some(s) => Some(s),
            None if self.fixed_geometry => {
                let mut rng = substream(self.master_seed, trial_stream(k as u32, u32::MAX));
                Some(random_sensors(n_random, 2, &mut rng))
            }
            None => None,
        };
        // validates parameters even when the geometry is drawn per trial
        let probe = sensors
            .clone()
            .unwrap_or_else(|| vec![Point::new2(0.0, 0.0); 1]);
        Scenario::new(
            probe,
            source,
            params.alpha,
            params.p0,
            params.sigma_db,
            params.rounds,
        )?;
        Ok(PointTemplate {
            params,
            sensors,
            source,
            n_random,
        })
    }
}

struct PointTemplate {
    params: SignalParams,
    sensors: Option<Vec<Point>>,
    source: Point,
    n_random: usize,
}

impl PointTemplate {
    fn scenario(&self, sensors: Vec<Point>) -> rssloc_core::Result<Scenario> {
        let p = &self.params;
        Scenario::new(sensors, self.source, p.alpha, p.p0, p.sigma_db, p.rounds)
    }

    fn n_effective(&self) -> usize {
        let ns = self.sensors.as_ref().map_or(self.n_random, Vec::len);
        ns * self.params.rounds as usize
    }
}

/// Statistics for one (estimator, sweep point) pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub estimator: String,
    pub sweep_param: String,
    pub sweep_value: f64,
    pub n: usize,
    pub trials_ok: u32,
    pub trials_failed: u32,
    /// Two-step runs whose Gauss-Newton step failed (LS estimate kept).
    pub trials_degraded: u32,
    pub bias_m: Option<f64>,
    pub rmse_m: Option<f64>,
    pub rcrlb_m: Option<f64>,
    pub mean_time_s: Option<f64>,
    pub master_seed: u64,
    pub sweep_index: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub scenario: String,
    pub alpha: f64,
    pub p0: f64,
    pub trials: u32,
    pub master_seed: u64,
    /// How per-trial seeds are derived.
    pub seed_scheme: String,
    pub rows: Vec<ReportRow>,
}

impl TrialReport {
    pub fn row(&self, estimator: EstimatorKind, sweep_value: f64) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.estimator == estimator.key() && r.sweep_value == sweep_value)
    }
}

#[derive(Clone, Copy, Debug)]
struct EstimatorOutcome {
    estimate: Option<Point>,
    degraded: bool,
    seconds: f64,
}

struct TrialOutcome {
    outcomes: Vec<EstimatorOutcome>,
    crlb: Option<f64>,
}

fn timed<T>(record: bool, f: impl FnOnce() -> T) -> (T, f64) {
    if record {
        let start = Instant::now();
        let out = f();
        (out, start.elapsed().as_secs_f64())
    } else {
        (f(), 0.0)
    }
}

fn run_estimator(
    kind: EstimatorKind,
    ms: &MeasurementSet,
    noise: &NoiseModel,
    ml: &GnConfig,
) -> (Option<Point>, bool) {
    let result = match kind {
        EstimatorKind::Ls => ls_known_variance(ms, noise.bias_b()),
        EstimatorKind::LsGn => two_step(ms, Some(noise)),
        EstimatorKind::LsUnknown => ls_unknown_variance(ms),
        EstimatorKind::LsUnknownGn => two_step(ms, None),
        EstimatorKind::MlReference => {
            ls_known_variance(ms, noise.bias_b()).and_then(|init| ml_reference(ms, &init.p_hat, ml))
        }
    };
    match result {
        Ok(e) if e.p_hat.is_finite() => (Some(e.p_hat), e.degraded_refinement),
        _ => (None, false),
    }
}

fn run_trial(cfg: &ExperimentConfig, tpl: &PointTemplate, k: u32, trial: u32) -> TrialOutcome {
    let failed = || TrialOutcome {
        outcomes: vec![
            EstimatorOutcome {
                estimate: None,
                degraded: false,
                seconds: 0.0,
            };
            cfg.estimators.len()
        ],
        crlb: None,
    };
    let mut rng = trial_rng(cfg.master_seed, k, trial);
    let redrawn = tpl.sensors.is_none();
    let sensors = match &tpl.sensors {
        Some(s) => s.clone(),
        None => random_sensors(tpl.n_random, 2, &mut rng),
    };
    let Ok(scenario) = tpl.scenario(sensors) else {
        return failed();
    };
    let Ok(ms) = generate_measurements_with_rng(&scenario, &mut rng) else {
        return failed();
    };
    let noise = scenario.noise();
    let outcomes = cfg
        .estimators
        .iter()
        .map(|&kind| {
            let ((estimate, degraded), seconds) = timed(cfg.record_timing, || {
                run_estimator(kind, &ms, &noise, &cfg.ml)
            });
            EstimatorOutcome {
                estimate,
                degraded,
                seconds,
            }
        })
        .collect();
    let crlb = redrawn
        .then(|| {
            let s = &scenario;
            fisher_for_sensors(
                s.sensors(),
                s.rounds(),
                s.alpha(),
                s.sigma_db(),
                &s.source(),
            )
            .ok()
            .map(|f| f.crlb)
        })
        .flatten();
    TrialOutcome { outcomes, crlb }
}

fn run_point(cfg: &ExperimentConfig, k: usize) -> Result<Vec<ReportRow>, ConfigError> {
    let tpl = cfg.point_template(k)?;
    let k32 = k as u32;
    let trials: Vec<TrialOutcome> = (0..cfg.trials)
        .into_par_iter()
        .map(|j| run_trial(cfg, &tpl, k32, j))
        .collect();

    let rcrlb = match &tpl.sensors {
        Some(sensors) if tpl.params.sigma_db > 0.0 => {
            let p = &tpl.params;
            fisher_for_sensors(sensors, p.rounds, p.alpha, p.sigma_db, &tpl.source)
                .ok()
                .map(|f| f.rcrlb)
        }
        Some(_) => Some(0.0),
        None if tpl.params.sigma_db == 0.0 => Some(0.0),
        None => {
            // geometry redrawn per trial: root of the mean bound
            let bounds: Vec<f64> = trials.iter().filter_map(|t| t.crlb).collect();
            (!bounds.is_empty()).then(|| (bounds.iter().sum::<f64>() / bounds.len() as f64).sqrt())
        }
    };

    let rows = cfg
        .estimators
        .iter()
        .enumerate()
        .map(|(e, kind)| {
            let mut stats = ErrorStats::new(tpl.source);
            let (mut failed, mut degraded, mut seconds) = (0u32, 0u32, 0.0);
            for t in &trials {
                let o = &t.outcomes[e];
                match o.estimate {
                    Some(p) => {
                        stats.push(&p);
                        seconds += o.seconds;
                        degraded += o.degraded as u32;
                    }
                    None => failed += 1,
                }
            }
            let ok = stats.count() as u32;
            ReportRow {
                estimator: kind.key().to_string(),
                sweep_param: cfg.sweep.param_name().to_string(),
                sweep_value: cfg.sweep.value(k),
                n: tpl.n_effective(),
                trials_ok: ok,
                trials_failed: failed,
                trials_degraded: degraded,
                bias_m: stats.bias(),
                rmse_m: stats.rmse(),
                rcrlb_m: rcrlb,
                mean_time_s: (cfg.record_timing && ok > 0).then(|| seconds / ok as f64),
                master_seed: cfg.master_seed,
                sweep_index: k32,
            }
        })
        .collect();
    Ok(rows)
}

/// Runs every sweep point; failed trials are excluded from the statistics
/// and counted per estimator.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<TrialReport, ConfigError> {
    cfg.validate()?;
    let body = || -> Result<Vec<ReportRow>, ConfigError> {
        let mut rows = Vec::new();
        for k in 0..cfg.sweep.len() {
            rows.extend(run_point(cfg, k)?);
        }
        Ok(rows)
    };
    let rows = match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?
            .install(body)?,
        None => body()?,
    };
    let (alpha, p0) = match &cfg.scenario {
        ScenarioSource::Registry(_) => (cfg.params.alpha, cfg.params.p0),
        ScenarioSource::Inline(s) => (s.alpha(), s.p0()),
    };
    Ok(TrialReport {
        scenario: cfg.scenario.name(),
        alpha,
        p0,
        trials: cfg.trials,
        master_seed: cfg.master_seed,
        seed_scheme: "chacha8(master_seed) stream (sweep_index << 32 | trial)".to_string(),
        rows,
    })
}

/// Wall-clock measurement of the two-step estimator at several sizes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingConfig {
    pub ns: Vec<usize>,
    /// Estimator calls per size, at least 100.
    pub runs: u32,
    /// Runs are split into this many batches; the reported value is the
    /// median of the batch means.
    pub batches: u32,
    pub seed: u64,
    pub sigma_db: f64,
    pub known_variance: bool,
}

impl Default for TimingConfig {
    fn default() -> Self {
        Self {
            ns: vec![30, 100, 300, 1000, 2000, 4000],
            runs: 200,
            batches: 10,
            seed: 0,
            sigma_db: 2.0,
            known_variance: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingPoint {
    pub n: usize,
    pub mean_seconds: f64,
    pub runs: u32,
}

/// Times the two-step estimator on random 2-D layouts with `n` sensors.
/// Measurement generation is excluded from the timed region.
pub fn time_scaling(cfg: &TimingConfig) -> Result<Vec<TimingPoint>, ConfigError> {
    if cfg.runs < 100 {
        return Err(ConfigError::Invalid(
            "timing needs at least 100 runs".into(),
        ));
    }
    if cfg.batches == 0 || cfg.batches > cfg.runs {
        return Err(ConfigError::Invalid("batches must be in 1..=runs".into()));
    }
    if cfg.ns.is_empty() || cfg.ns.iter().any(|&n| n < 4) {
        return Err(ConfigError::Invalid("sizes must be at least 4".into()));
    }
    let params = SignalParams {
        sigma_db: cfg.sigma_db,
        ..SignalParams::default()
    };
    let noise = NoiseModel::new(params.sigma_db, params.alpha)?;
    let per_batch = (cfg.runs / cfg.batches) as usize;
    cfg.ns
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let sets: Vec<MeasurementSet> = (0..per_batch)
                .map(|j| {
                    let mut rng = trial_rng(cfg.seed, k as u32, j as u32);
                    let sensors = random_sensors(n, 2, &mut rng);
                    let sc =
                        scenarios::build_with_sensors(ScenarioId::TwoDRandom, &params, sensors)?;
                    generate_measurements_with_rng(&sc, &mut rng)
                })
                .collect::<rssloc_core::Result<_>>()?;
            let noise = cfg.known_variance.then_some(&noise);
            let means: Vec<f64> = (0..cfg.batches).map(|_| batch_mean(&sets, noise)).collect();
            Ok(TimingPoint {
                n,
                mean_seconds: rssloc_core::stats::median(&means),
                runs: per_batch as u32 * cfg.batches,
            })
        })
        .collect()
}

fn batch_mean(sets: &[MeasurementSet], noise: Option<&NoiseModel>) -> f64 {
    // repeat the batch until the clock registers it
    let mut repeats = 1u32;
    loop {
        let start = Instant::now();
        for _ in 0..repeats {
            for ms in sets {
                black_box(two_step(black_box(ms), noise).ok());
            }
        }
        let elapsed = start.elapsed().as_secs_f64();
        if elapsed > 0.0 {
            return elapsed / (repeats as f64 * sets.len() as f64);
        }
        repeats *= 2;
    }
}
