//! Quantile step-density reconstruction and exact 1-D Wasserstein distances.
//!
//! Given `K` quantiles `Q_1 <= ... <= Q_K` of a law on `[lo, hi]`, the step
//! density puts mass `1/(K+1)` uniformly on each of `[lo, Q_1], [Q_1, Q_2],
//! ..., [Q_K, hi]`. Its distance to the true law shrinks like `1/K`, which
//! [`convergence_study`] measures on random bin distributions.

use crate::distgen::{BinDistribution, BinGrid, Interval};
use crate::error::{Error, Result};
use crate::rng::StreamKey;
use crate::targets::exact_quantile_1d;

const MASS_TOL: f64 = 1e-12;

/// Piecewise-constant density on `x_0 < x_1 < ... < x_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepDensity1D {
    breaks: Vec<f64>,
    density: Vec<f64>,
    // cum[i] = mass of [x_0, x_i]
    cum: Vec<f64>,
}

impl StepDensity1D {
    pub fn new(breaks: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        if breaks.len() < 2 || density.len() + 1 != breaks.len() {
            return Err(Error::Shape(format!(
                "{} breakpoints need {} density values, got {}",
                breaks.len(),
                breaks.len().saturating_sub(1),
                density.len()
            )));
        }
        if breaks.iter().any(|x| !x.is_finite()) || breaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidDistribution("breakpoints must be finite and strictly increasing".into()));
        }
        if density.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(Error::InvalidDistribution("densities must be finite and nonnegative".into()));
        }
        let mut cum = Vec::with_capacity(breaks.len());
        cum.push(0.0);
        let mut acc = 0.0;
        for (w, d) in breaks.windows(2).zip(&density) {
            acc += d * (w[1] - w[0]);
            cum.push(acc);
        }
        if (acc - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidDistribution(format!("total mass {acc} is not 1")));
        }
        Ok(StepDensity1D { breaks, density, cum })
    }

    /// The density of a one-dimensional bin distribution.
    pub fn from_bin_distribution(dist: &BinDistribution) -> Result<Self> {
        if dist.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: dist.dim(),
            });
        }
        let grid = dist.grid();
        let n = grid.bins()[0];
        let mut breaks: Vec<f64> = (0..n).map(|j| grid.bin_bounds(0, j).0).collect();
        breaks.push(grid.support()[0].hi);
        let density = dist
            .probs()
            .iter()
            .enumerate()
            .map(|(j, p)| {
                let (a, b) = grid.bin_bounds(0, j);
                p / (b - a)
            })
            .collect();
        StepDensity1D::new(breaks, density)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    pub fn densities(&self) -> &[f64] {
        &self.density
    }

    pub fn support(&self) -> Interval {
        Interval::new(self.breaks[0], *self.breaks.last().unwrap())
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let n = self.density.len();
        if x <= self.breaks[0] {
            return 0.0;
        }
        if x >= self.breaks[n] {
            return 1.0;
        }
        let i = self.breaks.partition_point(|&b| b <= x) - 1;
        (self.cum[i] + self.density[i] * (x - self.breaks[i])).min(1.0)
    }

    /// `inf { x : F(x) >= p }`, with `p <= 0` mapped to the left end.
    pub fn quantile(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return self.breaks[0];
        }
        let n = self.density.len();
        let last = (0..n).rposition(|i| self.density[i] > 0.0).unwrap_or(n - 1);
        let i = (self.cum[1..].partition_point(|&c| c < p)).min(last);
        let (a, b) = (self.breaks[i], self.breaks[i + 1]);
        if self.density[i] == 0.0 {
            return a;
        }
        (a + (p - self.cum[i]) / self.density[i]).clamp(a, b)
    }
}

/// Step density carrying `1/(K+1)` on each interval between consecutive
/// points of `lo, Q_1, ..., Q_K, hi`.
///
/// A zero-width interval (tied quantiles) passes its mass to the next
/// interval; one at the right end passes it to the previous one.
pub fn quantile_step_density(quantiles: &[f64], support: Interval) -> Result<StepDensity1D> {
    if let Some(q) = quantiles.iter().find(|q| !(support.lo..=support.hi).contains(*q)) {
        return Err(Error::OutOfSupport { point: vec![*q] });
    }
    if quantiles.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("quantiles must be nondecreasing".into()));
    }
    let mass = 1.0 / (quantiles.len() + 1) as f64;
    let points: Vec<f64> = std::iter::once(support.lo)
        .chain(quantiles.iter().copied())
        .chain(std::iter::once(support.hi))
        .collect();
    let mut breaks = vec![support.lo];
    let mut masses: Vec<f64> = Vec::new();
    let mut carry = 0.0;
    for w in points.windows(2) {
        if w[1] > w[0] {
            breaks.push(w[1]);
            masses.push(mass + carry);
            carry = 0.0;
        } else {
            carry += mass;
        }
    }
    match masses.last_mut() {
        Some(m) => *m += carry,
        None => return Err(Error::InvalidArgument("support has zero width".into())),
    }
    let density = breaks.windows(2).zip(&masses).map(|(w, m)| m / (w[1] - w[0])).collect();
    StepDensity1D::new(breaks, density)
}

/// Exact `W1(a, b) = ∫ |F_a(x) - F_b(x)| dx`.
///
/// Both CDFs are linear between merged breakpoints, so each segment is
/// integrated in closed form, splitting at the sign change if there is one.
pub fn w1_1d(a: &StepDensity1D, b: &StepDensity1D) -> f64 {
    let mut xs: Vec<f64> = a.breaks.iter().chain(&b.breaks).copied().collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut total = 0.0;
    let mut prev_x = xs[0];
    let mut prev_d = a.cdf(prev_x) - b.cdf(prev_x);
    for &x in &xs[1..] {
        let d = a.cdf(x) - b.cdf(x);
        let w = x - prev_x;
        let (u, v) = (prev_d.abs(), d.abs());
        total += if (prev_d >= 0.0) == (d >= 0.0) || u == 0.0 || v == 0.0 {
            0.5 * (u + v) * w
        } else {
            0.5 * (u * u + v * v) / (u + v) * w
        };
        prev_x = x;
        prev_d = d;
    }
    total
}

/// One line of the convergence table.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub k: usize,
    pub max_w1: f64,
    pub mean_w1: f64,
    /// `sqrt(diam * max_w1)`, which bounds `W2` from above.
    pub w2_bound: f64,
}

/// `W1(µ, µ̂^K)` for `n_dists` random bin distributions on `grid` and every
/// `K` in `k_list`, where `µ̂^K` is rebuilt from the exact quantiles of `µ`
/// at levels `k/(K+1)`. Distribution `i` is drawn from `key.child(i)`.
pub fn convergence_study(n_dists: usize, k_list: &[usize], grid: &BinGrid, key: StreamKey) -> Result<Vec<ConvergenceRow>> {
    if grid.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: grid.dim(),
        });
    }
    if n_dists == 0 {
        return Err(Error::InvalidArgument("need at least one distribution".into()));
    }
    if k_list.is_empty() || k_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("K values must be increasing".into()));
    }
    let dists: Vec<BinDistribution> = (0..n_dists)
        .map(|i| BinDistribution::sample(grid, &mut key.child(i as u64).rng()))
        .collect();
    convergence_on(&dists, k_list)
}

/// [`convergence_study`] on a fixed set of one-dimensional distributions.
pub fn convergence_on(dists: &[BinDistribution], k_list: &[usize]) -> Result<Vec<ConvergenceRow>> {
    let truths = dists
        .iter()
        .map(StepDensity1D::from_bin_distribution)
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(k_list.len());
    for &k in k_list {
        let mut max_w1: f64 = 0.0;
        let mut sum = 0.0;
        for (dist, truth) in dists.iter().zip(&truths) {
            let qs = (1..=k)
                .map(|j| exact_quantile_1d(dist, j as f64 / (k + 1) as f64))
                .collect::<Result<Vec<_>>>()?;
            let approx = quantile_step_density(&qs, truth.support())?;
            let w = w1_1d(truth, &approx);
            max_w1 = max_w1.max(w);
            sum += w;
        }
        let diam = truths[0].support().width();
        rows.push(ConvergenceRow {
            k,
            max_w1,
            mean_w1: sum / dists.len() as f64,
            w2_bound: (diam * max_w1).sqrt(),
        });
    }
    Ok(rows)
}
