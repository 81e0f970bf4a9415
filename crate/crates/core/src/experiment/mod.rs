//! Spec files, batch runs, run artifacts and the verify suite.
//!
//! A run writes, under `<out>/<name>/`:
//!
//! - `<scheme>.csv` with header `iteration,mse,mse_windowed`;
//! - `<scheme>.model`, the final network (missing if training diverged);
//! - `manifest`, the fully resolved configuration in spec syntax, with the
//!   outcome of every scheme as a comment.
//!
//! and `<out>/<name>.svg` when the spec sets `svg = true`.

pub mod checks;
pub mod spec;
pub mod svg;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

pub use spec::ExperimentSpec;

use crate::distgen::BinGrid;
use crate::error::{Error, Result};
use crate::features::FeatureScheme;
use crate::rng::StreamKey;
use crate::targets::TestCase;
use crate::theory::{convergence_study, ConvergenceRow};
use crate::trainer::{shares_data, train_many, train_observed, EvalPoint, PhaseTimings, Preset, TrainConfig};

pub const DEFAULT_OUT: &str = "results";

/// Command-line overrides; `None` keeps the value from the spec file.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub preset: Option<Preset>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Status {
    Completed,
    Diverged { iteration: usize, loss: f64 },
}

#[derive(Clone, Debug)]
pub struct SchemeOutcome {
    pub config: TrainConfig,
    pub series: Vec<EvalPoint>,
    pub status: Status,
    pub timings: PhaseTimings,
    pub csv: PathBuf,
    pub model: Option<PathBuf>,
}

impl SchemeOutcome {
    pub fn final_windowed(&self) -> Option<f64> {
        self.series.last().map(|p| p.mse_windowed)
    }
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub name: String,
    pub dir: PathBuf,
    pub manifest: PathBuf,
    pub svg: Option<PathBuf>,
    pub outcomes: Vec<SchemeOutcome>,
}

/// The CSV body for a series; 17 significant digits, `\n` line endings.
pub fn csv_text(series: &[EvalPoint]) -> String {
    let mut out = String::from("iteration,mse,mse_windowed\n");
    for p in series {
        let _ = writeln!(out, "{},{:.16e},{:.16e}", p.iteration, p.mse, p.mse_windowed);
    }
    out
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn out_dir(spec: &ExperimentSpec, opts: &RunOptions) -> PathBuf {
    opts.out
        .clone()
        .or_else(|| spec.out.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// Resolved configuration in spec syntax; running it reproduces the run.
pub fn manifest_text(spec: &ExperimentSpec, preset: Preset, configs: &[TrainConfig], outcomes: &[SchemeOutcome]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# resolved from {}", spec.origin);
    let _ = writeln!(out, "name = {}", spec.name);
    let _ = writeln!(out, "case = {}", spec.case);
    let _ = writeln!(out, "preset = {preset}");
    let _ = writeln!(out, "svg = {}", spec.svg);
    if let Some(c) = configs.first() {
        let _ = writeln!(out, "seed = {}", c.seed);
    }
    for (i, config) in configs.iter().enumerate() {
        let _ = writeln!(out, "\n[scheme {}]", config.scheme);
        if let Some(o) = outcomes.get(i) {
            match o.status {
                Status::Completed => {
                    let _ = writeln!(out, "# status: completed, {} evaluations", o.series.len());
                }
                Status::Diverged { iteration, loss } => {
                    let _ = writeln!(out, "# status: diverged at iteration {iteration} (loss = {loss}), run aborted");
                }
            }
        }
        for (k, v) in spec::settings_of(config) {
            let _ = writeln!(out, "{k} = {v}");
        }
    }
    out
}

/// Trains every scheme of `spec` and writes the artifacts. Schemes that
/// share their data settings are trained side by side on the same draws.
/// `progress` receives one line per scheme and a summary line.
pub fn run(spec: &ExperimentSpec, opts: &RunOptions, progress: &mut dyn FnMut(&str)) -> Result<RunReport> {
    let preset = opts.preset.unwrap_or(spec.preset);
    let configs = spec.resolve(opts.preset, opts.seed)?;
    let root = out_dir(spec, opts);
    let dir = root.join(&spec.name);
    std::fs::create_dir_all(&dir)?;
    let manifest = dir.join("manifest");
    let start = Instant::now();
    let target = configs[0].target();
    let mut series: Vec<Vec<EvalPoint>> = vec![Vec::new(); configs.len()];
    let results = if configs.iter().all(|c| shares_data(&configs[0], c)) {
        train_many(&configs, &target, &mut |i, p| series[i].push(p.clone()))?
    } else {
        configs
            .iter()
            .zip(series.iter_mut())
            .map(|(c, s)| train_observed(c, &c.target(), &mut |p| s.push(p.clone())))
            .collect()
    };
    let mut outcomes = Vec::with_capacity(configs.len());
    for ((config, result), series) in configs.iter().zip(results).zip(series) {
        let (status, model, timings) = match result {
            Ok(r) => (Status::Completed, Some(r.model), r.timings),
            Err(Error::Diverged { iteration, loss }) => (Status::Diverged { iteration, loss }, None, PhaseTimings::default()),
            Err(e) => return Err(e),
        };
        let slug = config.scheme.slug();
        let csv = dir.join(format!("{slug}.csv"));
        write(&csv, &csv_text(&series))?;
        let model_path = match model {
            Some(m) => {
                let path = dir.join(format!("{slug}.model"));
                m.save(&path)?;
                Some(path)
            }
            None => None,
        };
        let outcome = SchemeOutcome {
            config: config.clone(),
            series,
            status,
            timings,
            csv,
            model: model_path,
        };
        progress(&progress_line(&spec.name, &outcome));
        outcomes.push(outcome);
    }
    progress(&format!("{}: {} schemes in {:.1} s", spec.name, configs.len(), start.elapsed().as_secs_f64()));
    write(&manifest, &manifest_text(spec, preset, &configs, &outcomes))?;
    let svg = if spec.svg {
        let path = root.join(format!("{}.svg", spec.name));
        let labels: Vec<String> = outcomes.iter().map(|o| o.config.scheme.to_string()).collect();
        let series: Vec<svg::Series> = outcomes
            .iter()
            .zip(&labels)
            .map(|(o, label)| svg::Series {
                label,
                points: o.series.iter().map(|p| (p.iteration as f64, p.mse_windowed)).collect(),
            })
            .collect();
        let title = format!("{} ({})", spec.name, spec.case);
        write(&path, &svg::log_chart(&title, "iteration", "windowed MSE", &series))?;
        Some(path)
    } else {
        None
    };
    Ok(RunReport {
        name: spec.name.clone(),
        dir,
        manifest,
        svg,
        outcomes,
    })
}

fn progress_line(run: &str, o: &SchemeOutcome) -> String {
    let status = match o.status {
        Status::Completed => match o.final_windowed() {
            Some(m) => format!("final windowed MSE {m:.4e}"),
            None => "no evaluations".to_string(),
        },
        Status::Diverged { iteration, .. } => format!("DIVERGED at iteration {iteration}"),
    };
    let t = &o.timings;
    format!(
        "{run}/{}: {status} (seconds: sampling {:.1}, features {:.1}, labels {:.1}, optimizer {:.1}, evaluation {:.1})",
        o.config.scheme,
        t.sampling.as_secs_f64(),
        t.features.as_secs_f64(),
        t.labels.as_secs_f64(),
        t.optimizer.as_secs_f64(),
        t.evaluation.as_secs_f64()
    )
}

/// Runs several specs; run names must be unique, checked before any training.
pub fn run_batch(specs: &[ExperimentSpec], opts: &RunOptions, progress: &mut dyn FnMut(&str)) -> Result<Vec<RunReport>> {
    for (i, s) in specs.iter().enumerate() {
        if let Some(prev) = specs[..i].iter().find(|p| p.name == s.name) {
            return Err(Error::InvalidArgument(format!(
                "run name `{}` is used by both {} and {}",
                s.name, prev.origin, s.origin
            )));
        }
    }
    specs.iter().map(|s| run(s, opts, progress)).collect()
}

/// Spec for `convergence-study`: `name`, `n_dists`, `bins`, `k` (comma
/// separated, increasing), `seed` and `out`, all but `name` optional.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceSpec {
    pub name: String,
    pub n_dists: usize,
    pub bins: Option<usize>,
    pub k_list: Vec<usize>,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

const CONVERGENCE_KEYS: &[&str] = &["name", "n_dists", "bins", "k", "seed", "out"];

impl ConvergenceSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        ConvergenceSpec::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let (settings, _) = spec::parse_lines(text, origin, CONVERGENCE_KEYS, &[])?;
        let p = spec::Pos { origin };
        let mut c = ConvergenceSpec {
            name: String::new(),
            n_dists: 50,
            bins: None,
            k_list: vec![10, 25, 50, 100, 200],
            seed: 0,
            out: None,
        };
        for s in &settings {
            let at = |e: String| p.err(s.line, s.column, e);
            match s.key.as_str() {
                "name" => c.name = s.value.clone(),
                "n_dists" => c.n_dists = spec::parse_num(&s.value).map_err(at)?,
                "bins" => c.bins = Some(spec::parse_num(&s.value).map_err(at)?),
                "k" => c.k_list = spec::parse_list(&s.value).map_err(at)?,
                "seed" => c.seed = spec::parse_num(&s.value).map_err(at)?,
                "out" => c.out = Some(PathBuf::from(&s.value)),
                _ => unreachable!("key list is checked by the parser"),
            }
        }
        if c.name.is_empty() || c.name.contains(['/', '\\']) {
            return Err(p.err(1, 1, "missing or invalid `name`"));
        }
        if c.n_dists == 0 || c.bins == Some(0) || c.k_list.is_empty() || c.k_list.windows(2).any(|w| w[0] >= w[1]) || c.k_list[0] == 0 {
            let line = settings.iter().find(|s| s.key != "name").map_or(1, |s| s.line);
            return Err(p.err(line, 1, "need n_dists >= 1, bins >= 1 and increasing positive K values"));
        }
        Ok(c)
    }

    /// Bin count: the file's, else 400 at paper scale and 100 at desk scale.
    pub fn resolved_bins(&self, preset: Preset) -> usize {
        self.bins.unwrap_or(match preset {
            Preset::Paper => 400,
            Preset::Desk => 100,
        })
    }
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from("K,max_w1,mean_w1,w2_bound\n");
    for r in rows {
        let _ = writeln!(out, "{},{:.16e},{:.16e},{:.16e}", r.k, r.max_w1, r.mean_w1, r.w2_bound);
    }
    out
}

/// Runs the study and writes `<out>/<name>.csv`; returns the rows and path.
pub fn run_convergence(spec: &ConvergenceSpec, opts: &RunOptions) -> Result<(Vec<ConvergenceRow>, PathBuf)> {
    let bins = spec.resolved_bins(opts.preset.unwrap_or(Preset::Desk));
    let grid = BinGrid::cube(1, -2.0, 2.0, bins)?;
    let seed = opts.seed.unwrap_or(spec.seed);
    let rows = convergence_study(spec.n_dists, &spec.k_list, &grid, StreamKey::new(seed).named("convergence"))?;
    let root = opts.out.clone().or_else(|| spec.out.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    std::fs::create_dir_all(&root)?;
    let path = root.join(format!("{}.csv", spec.name));
    write(&path, &convergence_csv(&rows))?;
    Ok((rows, path))
}

#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    pub quick: bool,
    /// Negative control: perturbs analytic gradients so the gradient check fails.
    pub corrupt_gradient: bool,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

fn timed(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> CheckOutcome {
    let start = Instant::now();
    let (passed, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
    CheckOutcome {
        name,
        passed,
        detail,
        elapsed: start.elapsed(),
    }
}

/// The fast invariant suite.
pub fn verify(opts: &VerifyOptions) -> Vec<CheckOutcome> {
    let root = StreamKey::new(opts.seed).named("verify");
    let q = opts.quick;
    vec![
        timed("gradients", || {
            let r = checks::gradient_checks(if q { 20 } else { 100 }, root.named("gradients"), opts.corrupt_gradient)?;
            let ok = r.worst_relu < 1e-4 && r.worst_tanh < 1e-6 && r.worst_cylinder < 1e-6;
            Ok((
                ok,
                format!(
                    "{} models, worst relative error relu {:.1e}, tanh {:.1e}, cylinder {:.1e}",
                    r.models, r.worst_relu, r.worst_tanh, r.worst_cylinder
                ),
            ))
        }),
        timed("estimators", || {
            let grid = BinGrid::cube(1, -2.0, 2.0, 100)?;
            let (n_dists, resamples) = if q { (5, 50) } else { (20, 200) };
            let r = checks::estimator_consistency(n_dists, 10_000, resamples, &grid, 5.0, root.named("estimators"))?;
            Ok((
                r.fraction() >= 0.95,
                format!("{}/{} features within 5 bootstrap SE at N=10^4", r.within, r.pairs),
            ))
        }),
        timed("w1 metric", || {
            let r = checks::w1_metric_properties(if q { 200 } else { 1000 }, root.named("w1"));
            Ok((
                r.max_asymmetry == 0.0 && r.max_triangle_excess <= 1e-10 && r.min_self_distance == 0.0,
                format!(
                    "{} triples, asymmetry {:.1e}, triangle excess {:.1e}",
                    r.triples, r.max_asymmetry, r.max_triangle_excess
                ),
            ))
        }),
        timed("oracles", || {
            let grid = BinGrid::cube(2, -2.0, 2.0, 50)?;
            let (n_dists, n_mc) = if q { (2, 100_000) } else { (10, 1_000_000) };
            let r = checks::oracle_equivalence(n_dists, n_mc, 50, &grid, 3.0, root.named("oracles"))?;
            Ok((
                r.within == r.comparisons,
                format!("{}/{} exact vs Monte-Carlo within 3 SE (worst {:.2})", r.within, r.comparisons, r.worst_z),
            ))
        }),
        timed("quantile reconstruction", || {
            let grid = BinGrid::cube(1, -2.0, 2.0, 100)?;
            let rows = convergence_study(if q { 10 } else { 50 }, &[10, 50, 200], &grid, root.named("reconstruction"))?;
            let monotone = rows.windows(2).all(|w| w[1].max_w1 <= w[0].max_w1);
            let last = rows.last().map_or(f64::NAN, |r| r.max_w1);
            Ok((monotone && last < 0.08, format!("max W1 at K=200: {last:.4}, nonincreasing: {monotone}")))
        }),
        timed("determinism", || {
            let mut c = TrainConfig::desk(TestCase::UNI_B, FeatureScheme::Quantile { k: 20 });
            c.samples = 1000;
            c.grid = BinGrid::cube(1, -2.0, 2.0, 20)?;
            c.iterations = 30;
            c.eval_every = 10;
            c.eval_count = 10;
            c.batch = 5;
            c.seed = opts.seed;
            let once = || -> Result<String> {
                let r = train_observed(&c, &c.target(), &mut |_| {})?;
                Ok(csv_text(&r.series) + &r.model.to_text())
            };
            let (a, b) = (once()?, once()?);
            Ok((a == b, "two identical short runs give identical series and models".to_string()))
        }),
    ]
}

pub fn format_table(outcomes: &[CheckOutcome]) -> String {
    let width = outcomes.iter().map(|o| o.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for o in outcomes {
        let _ = writeln!(
            out,
            "{:<width$}  {}  {:>7.2} s  {}",
            o.name,
            if o.passed { "PASS" } else { "FAIL" },
            o.elapsed.as_secs_f64(),
            o.detail
        );
    }
    out
}
