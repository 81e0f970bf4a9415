//! Stochastic training on freshly drawn distributions and MSE tracking.
//!
//! Every iteration draws `M` new bin distributions, `N` samples from each,
//! extracts features and labels, and takes one ADAM step on the mean squared
//! error. Every `eval_every` iterations the MSE is estimated on `eval_count`
//! further fresh distributions.
//!
//! Streams are split from the master seed as
//! `phase -> iteration -> distribution -> purpose`, so the training
//! trajectory does not depend on the evaluation settings.

use std::fmt;
use std::time::{Duration, Instant};

use crate::distgen::{BinDistribution, BinGrid, Interval, SampleBatch};
use crate::error::{Error, Result};
use crate::features::{extract, FeatureScheme};
use crate::nn::{Activation, AdamState, CylinderNet, Mlp, Model};
use crate::rng::{Stream, StreamKey};
use crate::targets::{label, LabelPolicy, TestCase};

const DIST: u64 = 0;
const SAMPLES: u64 = 1;
const LABEL: u64 = 2;

/// A functional `V` to learn.
pub trait Target {
    fn dim(&self) -> usize;
    fn value(&self, dist: &BinDistribution, rng: &mut Stream) -> Result<f64>;
}

/// One of the built-in test cases under a label policy.
#[derive(Clone, Debug, PartialEq)]
pub struct CaseTarget {
    pub case: TestCase,
    pub policy: LabelPolicy,
}

impl Target for CaseTarget {
    fn dim(&self) -> usize {
        self.case.dim()
    }

    fn value(&self, dist: &BinDistribution, rng: &mut Stream) -> Result<f64> {
        label(&self.case, dist, &self.policy, rng)
    }
}

/// `V(µ) = c` for every `µ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantTarget {
    pub dim: usize,
    pub value: f64,
}

impl Target for ConstantTarget {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, _: &BinDistribution, _: &mut Stream) -> Result<f64> {
        Ok(self.value)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Paper,
    Desk,
}

impl std::str::FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "paper" => Ok(Preset::Paper),
            "desk" => Ok(Preset::Desk),
            other => Err(format!("unknown preset `{other}` (expected paper or desk)")),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::Paper => "paper",
            Preset::Desk => "desk",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub scheme: FeatureScheme,
    pub case: TestCase,
    /// Distributions per step, `M`.
    pub batch: usize,
    /// Samples per distribution, `N`.
    pub samples: usize,
    pub grid: BinGrid,
    pub iterations: usize,
    pub eval_every: usize,
    pub eval_count: usize,
    pub window: usize,
    pub label: LabelPolicy,
    pub lr: f64,
    pub activation: Activation,
    /// Hidden widths of the feature network.
    pub hidden: Vec<usize>,
    pub cylinder_inner: Vec<usize>,
    pub cylinder_latent: usize,
    pub cylinder_outer: Vec<usize>,
    pub seed: u64,
}

impl TrainConfig {
    pub fn preset(preset: Preset, case: TestCase, scheme: FeatureScheme) -> Self {
        let d = case.dim();
        let (samples, bins, iterations, eval_count) = match (preset, d) {
            (Preset::Paper, 1) => (200_000, vec![400], 10_000, 1000),
            (Preset::Paper, _) => (400_000, vec![200, 200], 10_000, 1000),
            (Preset::Desk, 1) => (20_000, vec![100], 2000, 200),
            (Preset::Desk, _) => (20_000, vec![50, 50], 2000, 200),
        };
        let n_label = match preset {
            Preset::Paper => 400_000,
            Preset::Desk => samples,
        };
        let grid = BinGrid::new(vec![Interval::new(-2.0, 2.0); d], bins).expect("preset grid is valid");
        TrainConfig {
            scheme,
            label: LabelPolicy::default_for(&case, n_label),
            case,
            batch: 20,
            samples,
            grid,
            iterations,
            eval_every: 100,
            eval_count,
            window: 20,
            lr: 5e-3,
            activation: Activation::Relu,
            hidden: vec![20, 20],
            cylinder_inner: vec![20, 20, 20],
            cylinder_latent: 20,
            cylinder_outer: vec![20, 20],
            seed: 0,
        }
    }

    pub fn desk(case: TestCase, scheme: FeatureScheme) -> Self {
        TrainConfig::preset(Preset::Desk, case, scheme)
    }

    pub fn paper(case: TestCase, scheme: FeatureScheme) -> Self {
        TrainConfig::preset(Preset::Paper, case, scheme)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.case.dim();
        if self.grid.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: self.grid.dim(),
            });
        }
        self.scheme.check(d)?;
        self.label.check()?;
        for (name, v) in [
            ("batch size", self.batch),
            ("samples", self.samples),
            ("eval_every", self.eval_every),
            ("eval_count", self.eval_count),
            ("window", self.window),
        ] {
            if v == 0 {
                return Err(Error::InvalidArgument(format!("{name} must be at least 1")));
            }
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::InvalidArgument(format!("learning rate {} must be positive", self.lr)));
        }
        let widths = if self.scheme.is_cylinder() {
            [&self.cylinder_inner[..], &self.cylinder_outer[..], &[self.cylinder_latent]].concat()
        } else {
            self.hidden.clone()
        };
        if widths.is_empty() || widths.contains(&0) || (!self.scheme.is_cylinder() && self.hidden.is_empty()) {
            return Err(Error::InvalidArgument("every network needs nonzero hidden widths".into()));
        }
        if self.scheme.is_cylinder() && (self.cylinder_inner.is_empty() || self.cylinder_outer.is_empty()) {
            return Err(Error::InvalidArgument("both cylinder networks need a hidden layer".into()));
        }
        Ok(())
    }

    /// Length of one network input.
    pub fn input_len(&self) -> usize {
        self.scheme.len(self.case.dim(), self.samples)
    }

    pub fn root(&self) -> StreamKey {
        StreamKey::new(self.seed)
    }

    /// The untrained model for this configuration.
    pub fn init_model(&self) -> Result<Model> {
        let mut rng = self.root().named("init").named(&self.scheme.to_string()).rng();
        if self.scheme.is_cylinder() {
            let net = CylinderNet::init(
                self.case.dim(),
                &self.cylinder_inner,
                self.cylinder_latent,
                &self.cylinder_outer,
                1,
                self.activation,
                &mut rng,
            )?;
            Ok(Model::Cylinder(net))
        } else {
            let sizes = [&[self.input_len()][..], &self.hidden, &[1]].concat();
            Ok(Model::Mlp(Mlp::init(sizes, self.activation, &mut rng)?))
        }
    }

    pub fn target(&self) -> CaseTarget {
        CaseTarget {
            case: self.case,
            policy: self.label,
        }
    }
}

/// Wall-clock time spent per phase.
#[derive(Clone, Copy, Debug, Default)]
pub struct PhaseTimings {
    pub sampling: Duration,
    pub features: Duration,
    pub labels: Duration,
    pub optimizer: Duration,
    pub evaluation: Duration,
}

impl PhaseTimings {
    pub fn total(&self) -> Duration {
        self.sampling + self.features + self.labels + self.optimizer + self.evaluation
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalPoint {
    pub iteration: usize,
    pub mse: f64,
    pub mse_windowed: f64,
    /// Training loss on the frozen probe batch.
    pub probe_loss: f64,
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub config: TrainConfig,
    pub series: Vec<EvalPoint>,
    pub model: Model,
    pub timings: PhaseTimings,
}

impl ExperimentResult {
    pub fn final_windowed(&self) -> Option<f64> {
        self.series.last().map(|p| p.mse_windowed)
    }
}

/// Trailing mean over the last `w` values (fewer at the start).
pub fn window_average(series: &[f64], w: usize) -> Vec<f64> {
    assert!(w >= 1, "window must be at least 1");
    let mut out = Vec::with_capacity(series.len());
    for i in 0..series.len() {
        let start = (i + 1).saturating_sub(w);
        let part = &series[start..=i];
        out.push(part.iter().sum::<f64>() / part.len() as f64);
    }
    out
}

/// Draws one distribution from `key` and returns its network input and label.
pub fn draw_instance(
    config: &TrainConfig,
    target: &dyn Target,
    key: StreamKey,
    timings: &mut PhaseTimings,
) -> Result<(Vec<f64>, f64)> {
    let t0 = Instant::now();
    let dist = BinDistribution::sample(&config.grid, &mut key.child(DIST).rng());
    let n = config.scheme.samples_used(config.samples);
    let batch = dist.sample_points(n, &mut key.child(SAMPLES).rng())?;
    let t1 = Instant::now();
    let input = extract(&config.scheme, &batch, config.grid.support())?.values;
    let t2 = Instant::now();
    let y = target.value(&dist, &mut key.child(LABEL).rng())?;
    let t3 = Instant::now();
    timings.sampling += t1 - t0;
    timings.features += t2 - t1;
    timings.labels += t3 - t2;
    Ok((input, y))
}

/// Mean over `count` fresh distributions (from `key`) of the squared residual.
pub fn evaluate_mse(model: &Model, config: &TrainConfig, target: &dyn Target, count: usize, key: StreamKey) -> Result<f64> {
    if count == 0 {
        return Err(Error::InvalidArgument("count must be at least 1".into()));
    }
    let mut timings = PhaseTimings::default();
    let mut total = 0.0;
    for i in 0..count {
        let (x, y) = draw_instance(config, target, key.child(i as u64), &mut timings)?;
        let r = model.predict(&x)?[0] - y;
        total += r * r;
    }
    Ok(total / count as f64)
}

/// The stream behind the `index`-th evaluation (1-based) of a run.
pub fn eval_key(config: &TrainConfig, index: usize) -> StreamKey {
    config.root().named("eval").child(index as u64)
}

/// MSE of the untrained model on the first evaluation set of the run.
pub fn initial_mse(config: &TrainConfig) -> Result<f64> {
    let model = config.init_model()?;
    evaluate_mse(&model, config, &config.target(), config.eval_count, eval_key(config, 1))
}

pub fn train(config: &TrainConfig) -> Result<ExperimentResult> {
    train_with_target(config, &config.target())
}

pub fn train_with_target(config: &TrainConfig, target: &dyn Target) -> Result<ExperimentResult> {
    train_observed(config, target, &mut |_| {})
}

/// [`train_with_target`], calling `on_eval` with every new point of the series
/// as soon as it is computed.
pub fn train_observed(config: &TrainConfig, target: &dyn Target, on_eval: &mut dyn FnMut(&EvalPoint)) -> Result<ExperimentResult> {
    let mut results = train_many(std::slice::from_ref(config), target, &mut |_, p| on_eval(p))?;
    results.pop().expect("one result per configuration")
}

/// Whether two configurations draw the same distributions, samples and labels.
pub fn shares_data(a: &TrainConfig, b: &TrainConfig) -> bool {
    a.case == b.case
        && a.grid == b.grid
        && a.samples == b.samples
        && a.batch == b.batch
        && a.iterations == b.iterations
        && a.eval_every == b.eval_every
        && a.eval_count == b.eval_count
        && a.label == b.label
        && a.seed == b.seed
}

struct Lane<'a> {
    config: &'a TrainConfig,
    model: Model,
    adam: AdamState,
    timings: PhaseTimings,
    probe: Vec<Vec<f64>>,
    raw: Vec<f64>,
    series: Vec<EvalPoint>,
    failed: Option<Error>,
}

/// One distribution from `key`: its samples (as many as the hungriest lane
/// reads) and its label. Fewer samples are a prefix of more.
fn draw_shared(lanes: &mut [Lane], target: &dyn Target, key: StreamKey, n_max: usize) -> Result<(SampleBatch, f64)> {
    let config = lanes[0].config;
    let t0 = Instant::now();
    let dist = BinDistribution::sample(&config.grid, &mut key.child(DIST).rng());
    let batch = dist.sample_points(n_max, &mut key.child(SAMPLES).rng())?;
    let t1 = Instant::now();
    let y = target.value(&dist, &mut key.child(LABEL).rng())?;
    let t2 = Instant::now();
    for lane in lanes.iter_mut() {
        lane.timings.sampling += t1 - t0;
        lane.timings.labels += t2 - t1;
    }
    Ok((batch, y))
}

fn lane_input(lane: &mut Lane, batch: &SampleBatch) -> Result<Vec<f64>> {
    let t0 = Instant::now();
    let config = lane.config;
    let n = config.scheme.samples_used(config.samples);
    let input = if n == batch.len() {
        extract(&config.scheme, batch, config.grid.support())?
    } else {
        let d = batch.dim();
        let prefix = SampleBatch::new(d, batch.as_flat()[..n * d].to_vec())?;
        extract(&config.scheme, &prefix, config.grid.support())?
    };
    lane.timings.features += t0.elapsed();
    Ok(input.values)
}

/// Trains one model per configuration on shared data. All configurations
/// must satisfy [`shares_data`] pairwise; each result is exactly what
/// [`train_with_target`] returns for that configuration alone. A diverging
/// model is dropped and reported, the others carry on. `on_eval` receives
/// the configuration index and each new series point.
pub fn train_many(
    configs: &[TrainConfig],
    target: &dyn Target,
    on_eval: &mut dyn FnMut(usize, &EvalPoint),
) -> Result<Vec<Result<ExperimentResult>>> {
    let Some(first) = configs.first() else {
        return Ok(Vec::new());
    };
    for config in configs {
        config.validate()?;
        if !shares_data(first, config) {
            return Err(Error::InvalidArgument(format!(
                "{} and {} do not share their data settings",
                first.scheme, config.scheme
            )));
        }
    }
    if target.dim() != first.grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: first.grid.dim(),
            got: target.dim(),
        });
    }
    let mut lanes = configs
        .iter()
        .map(|config| {
            let model = config.init_model()?;
            Ok(Lane {
                config,
                adam: AdamState::new(model.num_params(), config.lr),
                model,
                timings: PhaseTimings::default(),
                probe: Vec::with_capacity(config.batch),
                raw: Vec::new(),
                series: Vec::new(),
                failed: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let n_max = configs.iter().map(|c| c.scheme.samples_used(c.samples)).max().unwrap();
    let root = first.root();
    let mut probe_y = Vec::with_capacity(first.batch);
    for m in 0..first.batch {
        let (batch, y) = draw_shared(&mut lanes, target, root.named("probe").child(m as u64), n_max)?;
        for lane in lanes.iter_mut() {
            let x = lane_input(lane, &batch)?;
            lane.probe.push(x);
        }
        probe_y.push(y);
    }
    let train_root = root.named("train");
    let mut inputs: Vec<Vec<Vec<f64>>> = vec![Vec::with_capacity(first.batch); lanes.len()];
    let mut labels = Vec::with_capacity(first.batch);
    for it in 1..=first.iterations {
        if lanes.iter().all(|l| l.failed.is_some()) {
            break;
        }
        labels.clear();
        inputs.iter_mut().for_each(Vec::clear);
        for m in 0..first.batch {
            let (batch, y) = draw_shared(&mut lanes, target, train_root.child(it as u64).child(m as u64), n_max)?;
            for (lane, xs) in lanes.iter_mut().zip(inputs.iter_mut()) {
                if lane.failed.is_none() {
                    xs.push(lane_input(lane, &batch)?);
                }
            }
            labels.push(y);
        }
        for (lane, xs) in lanes.iter_mut().zip(&inputs) {
            if lane.failed.is_some() {
                continue;
            }
            let t0 = Instant::now();
            let (loss, grad) = lane.model.loss_and_grad(xs, &labels)?;
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                lane.failed = Some(Error::Diverged { iteration: it, loss });
                continue;
            }
            lane.model.adam_step(&mut lane.adam, &grad);
            lane.timings.optimizer += t0.elapsed();
        }
        if it % first.eval_every == 0 {
            let t0 = Instant::now();
            let key = eval_key(first, it / first.eval_every);
            let mut totals = vec![0.0; lanes.len()];
            for i in 0..first.eval_count {
                let (batch, y) = draw_shared(&mut lanes, target, key.child(i as u64), n_max)?;
                for (lane, total) in lanes.iter_mut().zip(totals.iter_mut()) {
                    if lane.failed.is_none() {
                        let x = lane_input(lane, &batch)?;
                        let r = lane.model.predict(&x)?[0] - y;
                        *total += r * r;
                    }
                }
            }
            for (index, (lane, total)) in lanes.iter_mut().zip(totals).enumerate() {
                if lane.failed.is_some() {
                    continue;
                }
                let mse = total / first.eval_count as f64;
                let probe_loss = lane.model.loss(&lane.probe, &probe_y)?;
                if !probe_loss.is_finite() || !mse.is_finite() {
                    lane.failed = Some(Error::Diverged {
                        iteration: it,
                        loss: probe_loss,
                    });
                    continue;
                }
                lane.raw.push(mse);
                let windowed = window_average(&lane.raw, lane.config.window);
                let point = EvalPoint {
                    iteration: it,
                    mse,
                    mse_windowed: *windowed.last().unwrap(),
                    probe_loss,
                };
                on_eval(index, &point);
                lane.series.push(point);
            }
            let spent = t0.elapsed();
            for lane in lanes.iter_mut() {
                lane.timings.evaluation += spent;
            }
        }
    }
    Ok(lanes
        .into_iter()
        .map(|lane| match lane.failed {
            Some(e) => Err(e),
            None => Ok(ExperimentResult {
                config: lane.config.clone(),
                series: lane.series,
                model: lane.model,
                timings: lane.timings,
            }),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_examples() {
        assert_eq!(window_average(&[1.0, 2.0, 3.0], 2), vec![1.0, 1.5, 2.5]);
        assert_eq!(window_average(&[4.0, 1.0, 7.0], 1), vec![4.0, 1.0, 7.0]);
        assert_eq!(window_average(&[2.5; 5], 3), vec![2.5; 5]);
        assert!(window_average(&[], 4).is_empty());
    }

    fn tiny(case: TestCase, scheme: FeatureScheme) -> TrainConfig {
        let mut c = TrainConfig::desk(case, scheme);
        c.samples = 500;
        c.grid = BinGrid::cube(case.dim(), -2.0, 2.0, 10).unwrap();
        c.iterations = 20;
        c.eval_every = 5;
        c.eval_count = 8;
        c.batch = 4;
        c
    }

    #[test]
    fn zero_iterations() {
        let c = TrainConfig {
            iterations: 0,
            ..tiny(TestCase::UNI_A, FeatureScheme::Moment { k: 4 })
        };
        let r = train(&c).unwrap();
        assert!(r.series.is_empty());
        assert_eq!(r.model, c.init_model().unwrap());
    }

    #[test]
    fn deterministic() {
        let c = tiny(TestCase::UNI_B, FeatureScheme::Quantile { k: 10 });
        let a = train(&c).unwrap();
        let b = train(&c).unwrap();
        assert_eq!(a.series, b.series);
        assert_eq!(a.model, b.model);
        let iters: Vec<usize> = a.series.iter().map(|p| p.iteration).collect();
        assert_eq!(iters, vec![5, 10, 15, 20]);
        let other = train(&TrainConfig { seed: 1, ..c }).unwrap();
        assert_ne!(a.series, other.series);
    }

    #[test]
    fn shared_training_matches_separate_runs() {
        let base = tiny(TestCase::BI_F, FeatureScheme::Moment { k: 3 });
        let configs = vec![
            base.clone(),
            TrainConfig {
                scheme: FeatureScheme::CylinderRaw { keep: Some(40) },
                cylinder_inner: vec![5],
                cylinder_latent: 3,
                cylinder_outer: vec![5],
                ..base.clone()
            },
            TrainConfig {
                scheme: FeatureScheme::BinHistogram { bins: vec![4] },
                lr: 1e-2,
                ..base.clone()
            },
        ];
        let mut seen = vec![0; 3];
        let together = train_many(&configs, &base.target(), &mut |i, _| seen[i] += 1).unwrap();
        assert_eq!(seen, vec![4, 4, 4]);
        for (c, r) in configs.iter().zip(together) {
            let r = r.unwrap();
            let alone = train(c).unwrap();
            assert_eq!(r.series, alone.series);
            assert_eq!(r.model, alone.model);
        }
        let other = TrainConfig { samples: 400, ..base.clone() };
        assert!(train_many(&[base.clone(), other], &base.target(), &mut |_, _| {}).is_err());
    }

    #[test]
    fn eval_count_does_not_change_training() {
        let c = tiny(TestCase::UNI_A, FeatureScheme::Moment { k: 4 });
        let a = train(&c).unwrap();
        let b = train(&TrainConfig { eval_count: 3, ..c }).unwrap();
        assert_eq!(a.model, b.model);
    }

    #[test]
    fn windowed_column_matches_raw() {
        let c = TrainConfig {
            window: 2,
            ..tiny(TestCase::UNI_A, FeatureScheme::Moment { k: 4 })
        };
        let r = train(&c).unwrap();
        let raw: Vec<f64> = r.series.iter().map(|p| p.mse).collect();
        let w: Vec<f64> = r.series.iter().map(|p| p.mse_windowed).collect();
        assert_eq!(w, window_average(&raw, 2));
        assert!(r.series.iter().all(|p| p.probe_loss.is_finite()));
    }

    #[test]
    fn constant_target_is_learned() {
        let mut c = TrainConfig::desk(TestCase::UNI_A, FeatureScheme::Moment { k: 1 });
        c.samples = 2000;
        c.iterations = 500;
        c.eval_count = 50;
        let r = train_with_target(&c, &ConstantTarget { dim: 1, value: 0.75 }).unwrap();
        let last = r.final_windowed().unwrap();
        assert!(last < 1e-4, "{last}");
    }

    #[test]
    fn cylinder_trains() {
        let mut c = tiny(TestCase::BI_F, FeatureScheme::CylinderRaw { keep: Some(50) });
        c.cylinder_inner = vec![6];
        c.cylinder_latent = 4;
        c.cylinder_outer = vec![6];
        let r = train(&c).unwrap();
        assert_eq!(r.series.len(), 4);
        assert!(matches!(r.model, Model::Cylinder(_)));
    }

    #[test]
    fn oracle_model_has_zero_mse() {
        let c = tiny(TestCase::UNI_A, FeatureScheme::Moment { k: 1 });
        let target = ConstantTarget { dim: 1, value: 2.0 };
        // moment K=1 gives (1, mean); output = 2 * first feature
        let m = Model::Mlp(Mlp::from_params(vec![2, 1, 1], Activation::Relu, vec![1.0, 0.0, 0.0, 2.0, 0.0]).unwrap());
        let mse = evaluate_mse(&m, &c, &target, 5, StreamKey::new(3)).unwrap();
        assert_eq!(mse, 0.0);
        let single = evaluate_mse(&Model::Mlp(Mlp::zeros(vec![2, 1, 1], Activation::Relu).unwrap()), &c, &target, 1, StreamKey::new(3)).unwrap();
        assert_eq!(single, 4.0);
        assert!(evaluate_mse(&m, &c, &target, 0, StreamKey::new(3)).is_err());
    }

    #[test]
    fn rejects_bad_configs() {
        let c = tiny(TestCase::BI_A, FeatureScheme::Quantile { k: 10 });
        assert!(train(&c).is_err());
        let c = TrainConfig {
            eval_every: 0,
            ..tiny(TestCase::UNI_A, FeatureScheme::Moment { k: 2 })
        };
        assert!(train(&c).is_err());
        let c = tiny(TestCase::UNI_A, FeatureScheme::Moment { k: 2 });
        assert!(train_with_target(&c, &ConstantTarget { dim: 2, value: 0.0 }).is_err());
    }

    #[test]
    fn presets() {
        let p = TrainConfig::paper(TestCase::BI_B, FeatureScheme::Moment { k: 7 });
        assert_eq!((p.batch, p.samples, p.grid.bins()), (20, 400_000, &[200, 200][..]));
        assert_eq!(p.label, LabelPolicy::MonteCarlo { n_label: 400_000 });
        let d = TrainConfig::desk(TestCase::UNI_B, FeatureScheme::Quantile { k: 200 });
        assert_eq!((d.samples, d.grid.bins(), d.iterations, d.eval_count), (20_000, &[100][..], 2000, 200));
        assert_eq!(d.label, LabelPolicy::Exact);
        assert_eq!((d.eval_every, d.window, d.lr), (100, 20, 5e-3));
    }
}
