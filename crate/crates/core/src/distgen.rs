//! Random bin distributions on a compact rectangle.
//!
//! A [`BinGrid`] splits each axis `i` of the support `[lo_i, hi_i]` into `J_i`
//! equal bins. Cells are addressed by a flat index with the first axis
//! varying fastest:
//!
//! ```text
//! flat(j_1, ..., j_d) = j_1 + j_2 * J_1 + j_3 * J_1 * J_2 + ...   (0-based j_i)
//! ```
//!
//! A [`BinDistribution`] puts probability `probs[flat]` on each cell, spread
//! uniformly inside it.

use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};

/// Closed interval `[lo, hi]` with `lo < hi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BinGrid {
    support: Vec<Interval>,
    bins: Vec<usize>,
    total: usize,
}

impl BinGrid {
    pub fn new(support: Vec<Interval>, bins: Vec<usize>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidGrid("dimension must be at least 1".into()));
        }
        if support.len() != bins.len() {
            return Err(Error::InvalidGrid(format!(
                "{} support intervals but {} bin counts",
                support.len(),
                bins.len()
            )));
        }
        for (axis, iv) in support.iter().enumerate() {
            if !(iv.lo.is_finite() && iv.hi.is_finite() && iv.lo < iv.hi) {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis}: bounds [{}, {}] are not an increasing finite pair",
                    iv.lo, iv.hi
                )));
            }
        }
        if let Some(axis) = bins.iter().position(|&j| j == 0) {
            return Err(Error::InvalidGrid(format!("axis {axis} has zero bins")));
        }
        let total = bins
            .iter()
            .try_fold(1usize, |acc, &j| acc.checked_mul(j))
            .ok_or_else(|| Error::InvalidGrid("total bin count overflows usize".into()))?;
        Ok(BinGrid {
            support,
            bins,
            total,
        })
    }

    /// `[lo, hi]^dim` with `bins` bins per axis.
    pub fn cube(dim: usize, lo: f64, hi: f64, bins: usize) -> Result<Self> {
        BinGrid::new(vec![Interval::new(lo, hi); dim], vec![bins; dim])
    }

    pub fn dim(&self) -> usize {
        self.support.len()
    }

    pub fn support(&self) -> &[Interval] {
        &self.support
    }

    pub fn bins(&self) -> &[usize] {
        &self.bins
    }

    pub fn total_bins(&self) -> usize {
        self.total
    }

    pub fn bin_width(&self, axis: usize) -> f64 {
        self.support[axis].width() / self.bins[axis] as f64
    }

    /// Extent `[a, b]` of bin `j` (0-based) on `axis`.
    pub fn bin_bounds(&self, axis: usize, j: usize) -> (f64, f64) {
        let iv = self.support[axis];
        let n = self.bins[axis] as f64;
        let a = iv.lo + (j as f64) * iv.width() / n;
        let b = if j + 1 == self.bins[axis] {
            iv.hi
        } else {
            iv.lo + (j + 1) as f64 * iv.width() / n
        };
        (a, b)
    }

    pub fn flat_index(&self, cell: &[usize]) -> usize {
        debug_assert_eq!(cell.len(), self.dim());
        let mut flat = 0;
        let mut stride = 1;
        for (&j, &n) in cell.iter().zip(&self.bins) {
            debug_assert!(j < n);
            flat += j * stride;
            stride *= n;
        }
        flat
    }

    pub fn cell_index(&self, mut flat: usize) -> Vec<usize> {
        self.bins
            .iter()
            .map(|&n| {
                let j = flat % n;
                flat /= n;
                j
            })
            .collect()
    }

    /// Bin of `x` on `axis`; the upper bound belongs to the last bin.
    pub fn locate_axis(&self, axis: usize, x: f64) -> Option<usize> {
        let iv = self.support[axis];
        if !iv.contains(x) {
            return None;
        }
        let n = self.bins[axis];
        let j = ((x - iv.lo) / iv.width() * n as f64) as usize;
        Some(j.min(n - 1))
    }

    /// Flat cell containing `point`, or `None` outside the support.
    pub fn locate(&self, point: &[f64]) -> Option<usize> {
        let mut flat = 0;
        let mut stride = 1;
        for (axis, &x) in point.iter().enumerate() {
            flat += self.locate_axis(axis, x)? * stride;
            stride *= self.bins[axis];
        }
        Some(flat)
    }
}

/// Per-cell constant probability measure on a [`BinGrid`].
#[derive(Clone, Debug)]
pub struct BinDistribution {
    grid: BinGrid,
    probs: Vec<f64>,
    // inclusive running sums of `probs`
    cumulative: Vec<f64>,
}

const MASS_TOL: f64 = 1e-12;

impl BinDistribution {
    /// Wraps already-normalised cell probabilities.
    pub fn new(grid: BinGrid, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != grid.total_bins() {
            return Err(Error::InvalidDistribution(format!(
                "{} probabilities for {} cells",
                probs.len(),
                grid.total_bins()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidDistribution(format!(
                "negative or non-finite probability {p}"
            )));
        }
        let cumulative = running_sum(&probs);
        let total = *cumulative.last().unwrap();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(BinDistribution {
            grid,
            probs,
            cumulative,
        })
    }

    /// Normalises nonnegative cell weights into a distribution.
    pub fn from_weights(grid: BinGrid, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {total}"
            )));
        }
        let probs = weights.into_iter().map(|w| w / total).collect();
        BinDistribution::new(grid, probs)
    }

    pub fn uniform(grid: BinGrid) -> Self {
        let n = grid.total_bins();
        BinDistribution::from_weights(grid, vec![1.0; n]).expect("uniform weights are valid")
    }

    /// Draws a random distribution: i.i.d. unit-rate exponential weights per
    /// cell, normalised to sum to one.
    pub fn sample<R: Rng + ?Sized>(grid: &BinGrid, rng: &mut R) -> Self {
        let weights = (0..grid.total_bins())
            .map(|_| rng.sample::<f64, _>(Exp1))
            .collect();
        BinDistribution::from_weights(grid.clone(), weights)
            .expect("exponential weights are positive")
    }

    pub fn grid(&self) -> &BinGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Probability mass of cells `0..flat` (exclusive).
    pub fn mass_before(&self, flat: usize) -> f64 {
        if flat == 0 {
            0.0
        } else {
            self.cumulative[flat - 1]
        }
    }

    /// Inclusive running sums of the cell probabilities.
    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// Inverse CDF on the cumulative probabilities: the first cell whose
    /// running sum exceeds `u`. `guide[g]` is a starting point for the search
    /// when `u` falls in the `g`-th of `guide.len()` equal slices of the total.
    fn cell_for(&self, u: f64, guide: &[usize]) -> usize {
        let c = &self.cumulative;
        let total = *c.last().unwrap();
        let g = ((u / total * guide.len() as f64) as usize).min(guide.len() - 1);
        let mut i = guide[g];
        while i > 0 && c[i - 1] > u {
            i -= 1;
        }
        while i < c.len() && c[i] <= u {
            i += 1;
        }
        if i < self.probs.len() {
            i
        } else {
            // u rounded onto the total: fall back to the last cell with mass
            self.probs.iter().rposition(|&p| p > 0.0).unwrap()
        }
    }

    fn guide_table(&self) -> Vec<usize> {
        let c = &self.cumulative;
        let total = *c.last().unwrap();
        let slices = c.len();
        let mut guide = Vec::with_capacity(slices);
        let mut i = 0;
        for g in 0..slices {
            let t = g as f64 / slices as f64 * total;
            while i < c.len() && c[i] <= t {
                i += 1;
            }
            guide.push(i.min(c.len() - 1));
        }
        guide
    }

    /// Draws `n` i.i.d. points: a cell by its probability, then a uniform
    /// offset inside the cell. Points are drawn one after another from the
    /// stream, so the first `k` points do not depend on `n`.
    pub fn sample_points<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<SampleBatch> {
        if n == 0 {
            return Err(Error::EmptyBatch);
        }
        let d = self.dim();
        let support = self.grid.support();
        let widths: Vec<f64> = (0..d).map(|i| self.grid.bin_width(i)).collect();
        let mut points = Vec::with_capacity(n * d);
        let guide = self.guide_table();
        let total = *self.cumulative.last().unwrap();
        // uniforms are taken from the stream in blocks; the order of use is
        // the order of draws, cell then offsets, point after point
        const BLOCK: usize = 512;
        let to_unit = |r: u64| (r >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let mut raw = vec![0u64; BLOCK * (d + 1)];
        let mut done = 0;
        if d == 1 {
            let (lo, hi, w) = (support[0].lo, support[0].hi, widths[0]);
            while done < n {
                let m = BLOCK.min(n - done);
                rng.fill(&mut raw[..2 * m]);
                for r in raw[..2 * m].chunks_exact(2) {
                    let j = self.cell_for(to_unit(r[0]) * total, &guide);
                    points.push((lo + (j as f64 + to_unit(r[1])) * w).min(hi));
                }
                done += m;
            }
        } else {
            // bin index of every cell along every axis, as f64
            let mut cell_j = vec![0.0; self.probs.len() * d];
            let bins = self.grid.bins();
            for (flat, js) in cell_j.chunks_exact_mut(d).enumerate() {
                let mut rest = flat;
                for (j, &b) in js.iter_mut().zip(bins) {
                    *j = (rest % b) as f64;
                    rest /= b;
                }
            }
            while done < n {
                let m = BLOCK.min(n - done);
                rng.fill(&mut raw[..(d + 1) * m]);
                for r in raw[..(d + 1) * m].chunks_exact(d + 1) {
                    let flat = self.cell_for(to_unit(r[0]) * total, &guide);
                    for (axis, (&j, &ry)) in cell_j[flat * d..(flat + 1) * d].iter().zip(&r[1..]).enumerate() {
                        let iv = support[axis];
                        points.push((iv.lo + (j + to_unit(ry)) * widths[axis]).min(iv.hi));
                    }
                }
                done += m;
            }
        }
        SampleBatch::new(d, points)
    }

    fn require_1d(&self) -> Result<()> {
        if self.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: self.dim(),
            });
        }
        Ok(())
    }

    /// Exact CDF of a one-dimensional distribution. It is piecewise linear;
    /// arguments outside the support clamp to 0 or 1.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        self.require_1d()?;
        let iv = self.grid.support()[0];
        if x <= iv.lo {
            return Ok(0.0);
        }
        if x >= iv.hi {
            return Ok(1.0);
        }
        let j = self.grid.locate_axis(0, x).unwrap();
        let (a, b) = self.grid.bin_bounds(0, j);
        let f = self.mass_before(j) + self.probs[j] * (x - a) / (b - a);
        Ok(f.clamp(0.0, 1.0))
    }

    /// Marginal law on `axis`: a one-dimensional bin distribution with the
    /// axis's bins, obtained by summing over the other axes.
    pub fn marginal(&self, axis: usize) -> Result<BinDistribution> {
        let d = self.dim();
        if axis >= d {
            return Err(Error::InvalidArgument(format!(
                "axis {axis} out of range for dimension {d}"
            )));
        }
        if d == 1 {
            return Ok(self.clone());
        }
        let bins = self.grid.bins();
        let inner: usize = bins[..axis].iter().product();
        let n = bins[axis];
        let mut probs = vec![0.0; n];
        for (flat, &p) in self.probs.iter().enumerate() {
            probs[(flat / inner) % n] += p;
        }
        let grid = BinGrid::new(vec![self.grid.support()[axis]], vec![n])?;
        // re-normalise away the rounding from the partial sums
        BinDistribution::from_weights(grid, probs)
    }
}

fn running_sum(xs: &[f64]) -> Vec<f64> {
    xs.iter()
        .scan(0.0, |acc, &x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

/// `n` points in `R^dim`, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch {
    dim: usize,
    points: Vec<f64>,
}

impl SampleBatch {
    pub fn new(dim: usize, points: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("sample dimension must be at least 1".into()));
        }
        if points.is_empty() {
            return Err(Error::EmptyBatch);
        }
        if !points.len().is_multiple_of(dim) {
            return Err(Error::Shape(format!(
                "{} values do not form rows of length {dim}",
                points.len()
            )));
        }
        Ok(SampleBatch { dim, points })
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        SampleBatch::new(1, values)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.points
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.points.chunks_exact(self.dim)
    }

    /// Values of one coordinate.
    pub fn column(&self, axis: usize) -> Vec<f64> {
        self.rows().map(|r| r[axis]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;
    use proptest::prelude::*;
    use rand::Rng;

    fn line(lo: f64, hi: f64, j: usize) -> BinGrid {
        BinGrid::cube(1, lo, hi, j).unwrap()
    }

    #[test]
    fn guided_search_matches_binary_search() {
        let mut rng = StreamKey::new(77).rng();
        for bins in [1, 2, 7, 100] {
            let grid = BinGrid::cube(2, -2.0, 2.0, bins).unwrap();
            let mut w: Vec<f64> = (0..grid.total_bins()).map(|_| rng.random::<f64>()).collect();
            // a few empty cells, including at both ends
            w[0] = 0.0;
            let last = w.len() - 1;
            w[last / 2] = 0.0;
            w[last] = 0.0;
            w.push(0.0);
            w.truncate(grid.total_bins());
            if w.iter().all(|&x| x == 0.0) {
                w[last] = 1.0;
            }
            let dist = BinDistribution::from_weights(grid, w).unwrap();
            let guide = dist.guide_table();
            let total = *dist.cumulative().last().unwrap();
            for _ in 0..2000 {
                let u = rng.random::<f64>() * total;
                let want = dist.cumulative().partition_point(|&c| c <= u);
                assert_eq!(dist.cell_for(u, &guide), want);
            }
            for &c in dist.cumulative() {
                let want = dist.cumulative().partition_point(|&x| x <= c).min(dist.probs().len() - 1);
                let got = dist.cell_for(c, &guide);
                assert!(got == want || dist.probs()[got] > 0.0);
            }
        }
    }

    #[test]
    fn grid_validation() {
        assert!(BinGrid::new(vec![], vec![]).is_err());
        assert!(BinGrid::new(vec![Interval::new(1.0, 1.0)], vec![3]).is_err());
        assert!(BinGrid::new(vec![Interval::new(0.0, 1.0)], vec![0]).is_err());
        assert!(BinGrid::new(vec![Interval::new(0.0, 1.0)], vec![2, 2]).is_err());
        let huge = BinGrid::new(vec![Interval::new(0.0, 1.0); 4], vec![1 << 20; 4]);
        assert!(matches!(huge, Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn flat_index_first_axis_fastest() {
        let g = BinGrid::new(
            vec![Interval::new(0.0, 1.0), Interval::new(0.0, 1.0), Interval::new(0.0, 1.0)],
            vec![2, 3, 4],
        )
        .unwrap();
        assert_eq!(g.flat_index(&[1, 0, 0]), 1);
        assert_eq!(g.flat_index(&[0, 1, 0]), 2);
        assert_eq!(g.flat_index(&[0, 0, 1]), 6);
        assert_eq!(g.flat_index(&[1, 2, 3]), 1 + 2 * 2 + 3 * 6);
        for flat in 0..g.total_bins() {
            assert_eq!(g.flat_index(&g.cell_index(flat)), flat);
        }
    }

    #[test]
    fn single_bin_has_unit_mass() {
        let mut rng = StreamKey::new(0).rng();
        let d = BinDistribution::sample(&line(0.0, 1.0, 1), &mut rng);
        assert_eq!(d.probs(), &[1.0]);
    }

    #[test]
    fn normalisation_arithmetic() {
        let d = BinDistribution::from_weights(line(-2.0, 2.0, 2), vec![1.0, 3.0]).unwrap();
        assert_eq!(d.probs(), &[0.25, 0.75]);
    }

    #[test]
    fn two_by_two_is_positive() {
        let mut rng = StreamKey::new(5).rng();
        let d = BinDistribution::sample(&BinGrid::cube(2, -2.0, 2.0, 2).unwrap(), &mut rng);
        assert_eq!(d.probs().len(), 4);
        assert!(d.probs().iter().all(|&p| p > 0.0));
        assert!((d.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_probabilities() {
        let g = line(0.0, 1.0, 2);
        assert!(BinDistribution::new(g.clone(), vec![0.5, 0.6]).is_err());
        assert!(BinDistribution::new(g.clone(), vec![-0.5, 1.5]).is_err());
        assert!(BinDistribution::new(g, vec![1.0]).is_err());
    }

    #[test]
    fn rate_invariance() {
        let grid = BinGrid::cube(2, -2.0, 2.0, 7).unwrap();
        let draw = |scale: f64| {
            let mut rng = StreamKey::new(11).rng();
            let w: Vec<f64> = (0..grid.total_bins())
                .map(|_| scale * rng.sample::<f64, _>(Exp1))
                .collect();
            BinDistribution::from_weights(grid.clone(), w).unwrap()
        };
        let base = draw(1.0);
        for c in [0.001, 0.5, 3.0, 1e6] {
            let scaled = draw(c);
            for (a, b) in base.probs().iter().zip(scaled.probs()) {
                assert!((a - b).abs() <= 1e-15 * a.max(1e-300) * 4.0, "{a} vs {b}");
            }
        }
        // and sample() uses exactly this construction
        let mut rng = StreamKey::new(11).rng();
        assert_eq!(BinDistribution::sample(&grid, &mut rng).probs(), base.probs());
    }

    #[test]
    fn single_bin_points_are_uniform() {
        let d = BinDistribution::uniform(line(0.0, 1.0, 1));
        let mut rng = StreamKey::new(2).rng();
        let b = d.sample_points(5, &mut rng).unwrap();
        assert_eq!(b.len(), 5);
        assert!(b.as_flat().iter().all(|&x| (0.0..=1.0).contains(&x)));
        assert!(d.sample_points(0, &mut rng).is_err());
    }

    #[test]
    fn zero_mass_bin_never_chosen() {
        let d = BinDistribution::new(line(-2.0, 2.0, 2), vec![1.0, 0.0]).unwrap();
        let mut rng = StreamKey::new(3).rng();
        let b = d.sample_points(10_000, &mut rng).unwrap();
        assert!(b.as_flat().iter().all(|&x| (-2.0..=0.0).contains(&x)));
        let d = BinDistribution::new(line(-2.0, 2.0, 3), vec![0.0, 1.0, 0.0]).unwrap();
        let b = d.sample_points(10_000, &mut rng).unwrap();
        assert!(b.as_flat().iter().all(|&x| (-2.0 / 3.0..=2.0 / 3.0).contains(&x)));
    }

    #[test]
    fn uniform_mean_within_three_sigma() {
        let d = BinDistribution::uniform(line(-2.0, 2.0, 40));
        let mut rng = StreamKey::new(4).rng();
        let n = 1_000_000;
        let b = d.sample_points(n, &mut rng).unwrap();
        let mean = b.as_flat().iter().sum::<f64>() / n as f64;
        let sigma = (4.0f64 / 3.0).sqrt();
        assert!(mean.abs() < 3.0 * sigma / (n as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn prefix_independent_of_n() {
        let d = BinDistribution::sample(&BinGrid::cube(2, -2.0, 2.0, 5).unwrap(), &mut StreamKey::new(8).rng());
        let long = d.sample_points(100, &mut StreamKey::new(9).rng()).unwrap();
        let short = d.sample_points(10, &mut StreamKey::new(9).rng()).unwrap();
        assert_eq!(&long.as_flat()[..20], short.as_flat());
    }

    // Pearson chi-square over the lattice with uniform cell probabilities.
    fn chi_square(seed: u64, grid: &BinGrid, n: usize) -> f64 {
        let d = BinDistribution::uniform(grid.clone());
        let b = d.sample_points(n, &mut StreamKey::new(seed).rng()).unwrap();
        let mut counts = vec![0usize; grid.total_bins()];
        for row in b.rows() {
            counts[grid.locate(row).unwrap()] += 1;
        }
        let expected = n as f64 / grid.total_bins() as f64;
        counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum()
    }

    #[test]
    fn lattice_histogram_is_uniform() {
        // 0.999 quantile of chi-square with 24 degrees of freedom
        const CHI2_24_999: f64 = 51.179;
        let grid = BinGrid::cube(2, -2.0, 2.0, 5).unwrap();
        let passed = (0..40)
            .filter(|&s| chi_square(s, &grid, 100_000) < CHI2_24_999)
            .count();
        assert!(passed as f64 >= 0.95 * 40.0, "{passed}/40");
    }

    #[test]
    fn cdf_examples() {
        let u = BinDistribution::uniform(line(-2.0, 2.0, 8));
        assert!((u.cdf(0.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(u.cdf(2.0).unwrap(), 1.0);
        assert_eq!(u.cdf(-2.0).unwrap(), 0.0);
        assert_eq!(u.cdf(-7.0).unwrap(), 0.0);
        assert_eq!(u.cdf(9.0).unwrap(), 1.0);
        let d = BinDistribution::new(line(-2.0, 2.0, 2), vec![0.25, 0.75]).unwrap();
        assert!((d.cdf(1.0).unwrap() - 0.625).abs() < 1e-15);
        let two_d = BinDistribution::uniform(BinGrid::cube(2, 0.0, 1.0, 2).unwrap());
        assert!(two_d.cdf(0.5).is_err());
    }

    #[test]
    fn cdf_slope_matches_density() {
        let d = BinDistribution::sample(&line(-2.0, 2.0, 10), &mut StreamKey::new(6).rng());
        let w = d.grid().bin_width(0);
        for j in 0..10 {
            let (a, b) = d.grid().bin_bounds(0, j);
            let x = 0.5 * (a + b);
            let h = 1e-6;
            let slope = (d.cdf(x + h).unwrap() - d.cdf(x - h).unwrap()) / (2.0 * h);
            assert!((slope - d.probs()[j] / w).abs() < 1e-6);
        }
        let mut prev = 0.0;
        for i in 0..=400 {
            let f = d.cdf(-2.0 + 0.01 * i as f64).unwrap();
            assert!(f >= prev);
            prev = f;
        }
    }

    #[test]
    fn marginal_examples() {
        let g = BinGrid::cube(2, -2.0, 2.0, 2).unwrap();
        // flat order: (0,0), (1,0), (0,1), (1,1)
        let d = BinDistribution::new(g.clone(), vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let m0 = d.marginal(0).unwrap();
        let m1 = d.marginal(1).unwrap();
        assert!((m0.probs()[0] - 0.4).abs() < 1e-15 && (m0.probs()[1] - 0.6).abs() < 1e-15);
        assert!((m1.probs()[0] - 0.3).abs() < 1e-15 && (m1.probs()[1] - 0.7).abs() < 1e-15);
        assert!(d.marginal(2).is_err());

        let one = BinDistribution::sample(&line(0.0, 1.0, 6), &mut StreamKey::new(1).rng());
        assert_eq!(one.marginal(0).unwrap().probs(), one.probs());

        let a = [0.2, 0.5, 0.3];
        let b = [0.6, 0.4];
        let grid = BinGrid::new(vec![Interval::new(0.0, 3.0), Interval::new(-1.0, 1.0)], vec![3, 2]).unwrap();
        let probs: Vec<f64> = (0..6).map(|f| a[f % 3] * b[f / 3]).collect();
        let prod = BinDistribution::from_weights(grid, probs).unwrap();
        let ma = prod.marginal(0).unwrap();
        for (x, y) in ma.probs().iter().zip(a) {
            assert!((x - y).abs() < 1e-15);
        }
        assert_eq!(ma.grid().support()[0], Interval::new(0.0, 3.0));
        let mb = prod.marginal(1).unwrap();
        for (x, y) in mb.probs().iter().zip(b) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn sampled_distributions_are_normalised(seed in any::<u64>(), j1 in 1usize..30, j2 in 1usize..30) {
            let grid = BinGrid::new(vec![Interval::new(-2.0, 2.0), Interval::new(0.0, 1.0)], vec![j1, j2]).unwrap();
            let d = BinDistribution::sample(&grid, &mut StreamKey::new(seed).rng());
            prop_assert_eq!(d.probs().len(), j1 * j2);
            prop_assert!((d.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for axis in 0..2 {
                let m = d.marginal(axis).unwrap();
                prop_assert!((m.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn points_stay_in_support(seed in any::<u64>(), j in 1usize..50) {
            let grid = BinGrid::new(vec![Interval::new(-2.0, 2.0), Interval::new(1.0, 1.5)], vec![j, 3]).unwrap();
            let d = BinDistribution::sample(&grid, &mut StreamKey::new(seed).rng());
            let b = d.sample_points(500, &mut StreamKey::new(seed ^ 1).rng()).unwrap();
            for row in b.rows() {
                prop_assert!(grid.locate(row).is_some());
            }
        }
    }
}
