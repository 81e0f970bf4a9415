//! Numerical self-checks shared by `verify` and the acceptance suite.

use rand::Rng;

use crate::distgen::{BinDistribution, BinGrid, SampleBatch};
use crate::error::Result;
use crate::features::{empirical_moments, quantiles_of, superquantiles_from_sorted};
use crate::nn::{grad_check_against, Activation, CylinderNet, Mlp, Model};
use crate::rng::{Stream, StreamKey};
use crate::targets::{bivariate_value, exact_moment, exact_quantile_1d, exact_superquantile_1d, TestCase};
use crate::theory::{w1_1d, StepDensity1D};

pub const GRAD_EPS: f64 = 1e-5;
/// Inputs closer than this to a ReLU kink are redrawn.
pub const KINK_MARGIN: f64 = 1e-3;

#[derive(Clone, Debug, Default)]
pub struct GradientReport {
    pub models: usize,
    pub worst_relu: f64,
    pub worst_tanh: f64,
    pub worst_cylinder: f64,
}

fn random_mlp(activation: Activation, rng: &mut Stream) -> Result<Mlp> {
    let depth = rng.random_range(1..=3);
    let mut sizes = vec![rng.random_range(1..=6)];
    sizes.extend((0..depth).map(|_| rng.random_range(2..=10)));
    sizes.push(rng.random_range(1..=2));
    Mlp::init(sizes, activation, rng)
}

fn uniform_vec(n: usize, lo: f64, hi: f64, rng: &mut Stream) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

/// Worst finite-difference error of the analytic gradient for `count` random
/// networks per activation, plus `count / 10` (at least one) cylinder
/// networks. `corrupt` perturbs the largest analytic entry before comparing.
pub fn gradient_checks(count: usize, key: StreamKey, corrupt: bool) -> Result<GradientReport> {
    let check = |model: &Model, x: &[f64], y: &[f64]| -> Result<f64> {
        let (_, mut g) = model.loss_and_grad(&[x], y)?;
        if corrupt {
            let i = (0..g.len()).max_by(|&a, &b| g[a].abs().total_cmp(&g[b].abs())).unwrap_or(0);
            g[i] = 1.5 * g[i] + 1e-3;
        }
        grad_check_against(model, x, y, GRAD_EPS, &g)
    };
    let mut report = GradientReport::default();
    for i in 0..count {
        for activation in [Activation::Relu, Activation::Tanh] {
            let mut rng = key.named(activation.name()).child(i as u64).rng();
            let (mlp, x) = loop {
                let mlp = random_mlp(activation, &mut rng)?;
                let x = uniform_vec(mlp.input_size(), -2.0, 2.0, &mut rng);
                if activation == Activation::Tanh || mlp.min_abs_preactivation(&x) > KINK_MARGIN {
                    break (mlp, x);
                }
            };
            let y = uniform_vec(mlp.output_size(), -1.0, 1.0, &mut rng);
            let err = check(&Model::Mlp(mlp), &x, &y)?;
            let slot = match activation {
                Activation::Relu => &mut report.worst_relu,
                Activation::Tanh => &mut report.worst_tanh,
            };
            *slot = slot.max(err);
            report.models += 1;
        }
    }
    for i in 0..(count / 10).max(1) {
        let mut rng = key.named("cylinder").child(i as u64).rng();
        let dim = rng.random_range(1..=2);
        let net = CylinderNet::init(dim, &[6, 6], 4, &[6], 1, Activation::Tanh, &mut rng)?;
        let n = rng.random_range(1..=8);
        let x = uniform_vec(n * dim, -2.0, 2.0, &mut rng);
        let y = uniform_vec(1, -1.0, 1.0, &mut rng);
        report.worst_cylinder = report.worst_cylinder.max(check(&Model::Cylinder(net), &x, &y)?);
        report.models += 1;
    }
    Ok(report)
}

#[derive(Clone, Debug, Default)]
pub struct EstimatorReport {
    pub pairs: usize,
    pub within: usize,
    /// Largest `|estimate - exact| / SE` seen.
    pub worst_z: f64,
}

impl EstimatorReport {
    pub fn fraction(&self) -> f64 {
        self.within as f64 / self.pairs.max(1) as f64
    }
}

/// Levels of the quantile and superquantile features compared in
/// [`estimator_consistency`].
pub const ESTIMATOR_K: usize = 9;
pub const ESTIMATOR_MOMENTS: usize = 4;

// quantiles, moments of degree 1.., superquantiles
fn feature_values(values: &[f64]) -> Result<Vec<f64>> {
    let mut out = quantiles_of(values, ESTIMATOR_K);
    let batch = SampleBatch::from_values(values.to_vec())?;
    out.extend(&empirical_moments(&batch, ESTIMATOR_MOMENTS)?.values[1..]);
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    out.extend(superquantiles_from_sorted(&sorted, ESTIMATOR_K));
    Ok(out)
}

fn exact_values(dist: &BinDistribution) -> Result<Vec<f64>> {
    let levels = |k: usize| (1..=k).map(move |j| j as f64 / (k + 1) as f64);
    let mut out = levels(ESTIMATOR_K).map(|p| exact_quantile_1d(dist, p)).collect::<Result<Vec<_>>>()?;
    out.extend((1..=ESTIMATOR_MOMENTS).map(|e| exact_moment(dist, &[e])));
    for j in 0..=ESTIMATOR_K {
        out.push(exact_superquantile_1d(dist, j as f64 / (ESTIMATOR_K + 1) as f64)?);
    }
    Ok(out)
}

/// Empirical quantile, moment and superquantile features of `n` samples
/// against their exact values, for `n_dists` random 1-D distributions on
/// `grid`. A pair counts as within when the error is at most `z_max`
/// bootstrap standard errors (`resamples` resamples).
pub fn estimator_consistency(
    n_dists: usize,
    n: usize,
    resamples: usize,
    grid: &BinGrid,
    z_max: f64,
    key: StreamKey,
) -> Result<EstimatorReport> {
    let mut report = EstimatorReport::default();
    for i in 0..n_dists {
        let k = key.child(i as u64);
        let dist = BinDistribution::sample(grid, &mut k.child(0).rng());
        let batch = dist.sample_points(n, &mut k.child(1).rng())?;
        let x = batch.as_flat();
        let est = feature_values(x)?;
        let exact = exact_values(&dist)?;
        let mut boot_rng = k.child(2).rng();
        let mut sum = vec![0.0; est.len()];
        let mut sum_sq = vec![0.0; est.len()];
        let mut resample = vec![0.0; n];
        for _ in 0..resamples {
            for r in resample.iter_mut() {
                *r = x[boot_rng.random_range(0..n)];
            }
            for ((s, q), v) in sum.iter_mut().zip(sum_sq.iter_mut()).zip(feature_values(&resample)?) {
                *s += v;
                *q += v * v;
            }
        }
        let b = resamples as f64;
        for j in 0..est.len() {
            let mean = sum[j] / b;
            let se = ((sum_sq[j] / b - mean * mean).max(0.0) * b / (b - 1.0)).sqrt();
            let err = (est[j] - exact[j]).abs();
            let z = if se > 0.0 { err / se } else if err == 0.0 { 0.0 } else { f64::INFINITY };
            report.pairs += 1;
            if z <= z_max {
                report.within += 1;
            }
            report.worst_z = report.worst_z.max(z);
        }
    }
    Ok(report)
}

pub const ORACLE_CASES: [TestCase; 4] = [TestCase::BI_A, TestCase::BI_D, TestCase::BI_E, TestCase::BI_F];

#[derive(Clone, Debug, Default)]
pub struct OracleReport {
    pub comparisons: usize,
    pub within: usize,
    pub worst_z: f64,
}

/// Exact bivariate labels against `n_mc`-sample Monte-Carlo estimates for
/// cases A, D, E and F on `n_dists` random distributions. The standard error
/// comes from `batches` batch means; a comparison passes within `z_max` SE.
pub fn oracle_equivalence(
    n_dists: usize,
    n_mc: usize,
    batches: usize,
    grid: &BinGrid,
    z_max: f64,
    key: StreamKey,
) -> Result<OracleReport> {
    let mut report = OracleReport::default();
    let per = n_mc / batches;
    for i in 0..n_dists {
        let k = key.child(i as u64);
        let dist = BinDistribution::sample(grid, &mut k.child(0).rng());
        for (c, case) in ORACLE_CASES.iter().enumerate() {
            let TestCase::Bi(bi) = case else { unreachable!() };
            let samples = dist.sample_points(n_mc, &mut k.child(1 + c as u64).rng())?;
            let exact = bivariate_value(bi, &dist, None)?;
            let mc = bivariate_value(bi, &dist, Some(&samples))?;
            let flat = samples.as_flat();
            let means = (0..batches)
                .map(|b| {
                    let part = SampleBatch::new(2, flat[2 * b * per..2 * (b + 1) * per].to_vec())?;
                    bivariate_value(bi, &dist, Some(&part))
                })
                .collect::<Result<Vec<f64>>>()?;
            let m = means.iter().sum::<f64>() / batches as f64;
            let var = means.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (batches - 1) as f64;
            let se = (var / batches as f64).sqrt();
            let z = (mc - exact).abs() / se;
            report.comparisons += 1;
            if z <= z_max {
                report.within += 1;
            }
            report.worst_z = report.worst_z.max(z);
        }
    }
    Ok(report)
}

/// Random step density with 1 to 12 pieces on a random interval inside [-3, 3].
pub fn random_step_density(rng: &mut Stream) -> StepDensity1D {
    let pieces = rng.random_range(1..=12);
    let lo = rng.random_range(-3.0..0.0);
    let hi = rng.random_range(0.5..3.0);
    let mut breaks: Vec<f64> = (0..pieces - 1).map(|_| rng.random_range(lo..hi)).collect();
    breaks.push(lo);
    breaks.push(hi);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let weights: Vec<f64> = (0..breaks.len() - 1)
        .map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.0..1.0) })
        .collect();
    let total: f64 = weights.iter().sum();
    let masses: Vec<f64> = if total > 0.0 {
        weights.iter().map(|w| w / total).collect()
    } else {
        let n = weights.len() as f64;
        vec![1.0 / n; weights.len()]
    };
    let density = breaks.windows(2).zip(&masses).map(|(w, m)| m / (w[1] - w[0])).collect();
    StepDensity1D::new(breaks, density).expect("masses sum to one")
}

#[derive(Clone, Debug, Default)]
pub struct MetricReport {
    pub triples: usize,
    /// Largest `|W(a,b) - W(b,a)|`; symmetry is exact when zero.
    pub max_asymmetry: f64,
    /// Largest `W(a,c) - W(a,b) - W(b,c)`.
    pub max_triangle_excess: f64,
    pub min_self_distance: f64,
}

pub fn w1_metric_properties(triples: usize, key: StreamKey) -> MetricReport {
    let mut report = MetricReport::default();
    let mut rng = key.rng();
    for _ in 0..triples {
        let [a, b, c] = [(); 3].map(|_| random_step_density(&mut rng));
        for (p, q) in [(&a, &b), (&b, &c), (&a, &c)] {
            report.max_asymmetry = report.max_asymmetry.max((w1_1d(p, q) - w1_1d(q, p)).abs());
        }
        let excess = [
            w1_1d(&a, &c) - w1_1d(&a, &b) - w1_1d(&b, &c),
            w1_1d(&a, &b) - w1_1d(&a, &c) - w1_1d(&c, &b),
            w1_1d(&b, &c) - w1_1d(&b, &a) - w1_1d(&a, &c),
        ];
        for e in excess {
            report.max_triangle_excess = report.max_triangle_excess.max(e);
        }
        report.min_self_distance = report.min_self_distance.max(w1_1d(&a, &a));
        report.triples += 1;
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradients_pass_and_corruption_fails() {
        let ok = gradient_checks(10, StreamKey::new(1), false).unwrap();
        assert_eq!(ok.models, 21);
        assert!(ok.worst_relu < 1e-4, "{ok:?}");
        assert!(ok.worst_tanh < 1e-6, "{ok:?}");
        assert!(ok.worst_cylinder < 1e-6, "{ok:?}");
        let bad = gradient_checks(3, StreamKey::new(1), true).unwrap();
        assert!(bad.worst_tanh > 1e-2 && bad.worst_relu > 1e-2, "{bad:?}");
    }

    #[test]
    fn small_estimator_run() {
        let grid = BinGrid::cube(1, -2.0, 2.0, 20).unwrap();
        let r = estimator_consistency(2, 5000, 40, &grid, 5.0, StreamKey::new(2)).unwrap();
        assert_eq!(r.pairs, 2 * (ESTIMATOR_K + ESTIMATOR_MOMENTS + ESTIMATOR_K + 1));
        assert!(r.fraction() >= 0.9, "{r:?}");
    }

    #[test]
    fn small_oracle_run() {
        let grid = BinGrid::cube(2, -2.0, 2.0, 8).unwrap();
        let r = oracle_equivalence(1, 40_000, 20, &grid, 4.0, StreamKey::new(3)).unwrap();
        assert_eq!(r.comparisons, 4);
        assert!(r.worst_z.is_finite());
    }

    #[test]
    fn random_densities_are_valid() {
        let mut rng = StreamKey::new(4).rng();
        for _ in 0..200 {
            let d = random_step_density(&mut rng);
            assert!((d.cdf(d.support().hi) - 1.0).abs() < 1e-12);
        }
        let m = w1_metric_properties(50, StreamKey::new(5));
        assert_eq!(m.max_asymmetry, 0.0);
        assert!(m.max_triangle_excess <= 1e-10);
        assert_eq!(m.min_self_distance, 0.0);
    }
}
