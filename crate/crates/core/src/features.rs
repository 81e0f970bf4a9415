//! Empirical distribution features `R^{K,N}(µ)` estimated from a sample batch.
//!
//! Quantiles use the nearest-rank rule: the level `k/(K+1)` quantile of `N`
//! sorted values is the order statistic of 1-based rank `ceil(k N / (K+1))`,
//! clamped to `[1, N]`. Superquantiles average every sample at or above that
//! order statistic. Mixed moments are indexed by a [`MultiIndexSet`] ordered
//! by total degree, then lexicographically.

use std::fmt;
use std::str::FromStr;

use crate::distgen::{BinGrid, Interval, SampleBatch};
use crate::error::{Error, Result};

/// Multi-indices `(k_1, ..., k_d)` of total degree at most `max_degree`,
/// ordered by increasing degree and then lexicographically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiIndexSet {
    dim: usize,
    max_degree: usize,
    indices: Vec<Vec<usize>>,
}

impl MultiIndexSet {
    pub fn new(max_degree: usize, dim: usize) -> Self {
        assert!(dim >= 1, "multi-indices need at least one axis");
        let mut indices = Vec::new();
        for degree in 0..=max_degree {
            let mut current = Vec::with_capacity(dim);
            push_with_degree(dim, degree, &mut current, &mut indices);
        }
        MultiIndexSet {
            dim,
            max_degree,
            indices,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> {
        self.indices.iter().map(|v| v.as_slice())
    }

    /// Every index except the degree-zero one.
    pub fn nonzero(&self) -> impl Iterator<Item = &[usize]> {
        self.iter().skip(1)
    }
}

fn push_with_degree(dim: usize, remaining: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if current.len() + 1 == dim {
        current.push(remaining);
        out.push(current.clone());
        current.pop();
        return;
    }
    for k in 0..=remaining {
        current.push(k);
        push_with_degree(dim, remaining - k, current, out);
        current.pop();
    }
}

/// `C(K + d, d)`: the number of multi-indices of degree at most `K` in `d` axes.
pub fn multi_index_count(max_degree: usize, dim: usize) -> usize {
    let mut c: usize = 1;
    for i in 1..=dim {
        c = c * (max_degree + i) / i;
    }
    c
}

/// Which features to extract.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FeatureScheme {
    Quantile { k: usize },
    Moment { k: usize },
    MomentAndQuantile { moments: usize, quantiles: usize },
    QuantileOfMoments { moments: usize, quantiles: usize },
    Superquantile { k: usize },
    SuperquantileOfMoments { moments: usize, quantiles: usize },
    /// Normalised histogram; one entry per axis, or a single entry shared by all axes.
    BinHistogram { bins: Vec<usize> },
    /// Raw samples for the cylinder network; `None` keeps all of them.
    CylinderRaw { keep: Option<usize> },
}

impl FeatureScheme {
    pub fn check(&self, dim: usize) -> Result<()> {
        use FeatureScheme::*;
        let positive = |name: &str, v: usize| {
            if v == 0 {
                Err(Error::InvalidArgument(format!("{name} must be at least 1 in {self}")))
            } else {
                Ok(())
            }
        };
        match self {
            Quantile { k } | Superquantile { k } => {
                positive("K", *k)?;
                if dim != 1 {
                    return Err(Error::DimensionMismatch {
                        expected: 1,
                        got: dim,
                    });
                }
            }
            Moment { .. } => {}
            MomentAndQuantile { quantiles, .. } => {
                positive("KQ", *quantiles)?;
                if dim != 1 {
                    return Err(Error::DimensionMismatch {
                        expected: 1,
                        got: dim,
                    });
                }
            }
            QuantileOfMoments { moments, quantiles } => {
                positive("KM", *moments)?;
                positive("KQ", *quantiles)?;
            }
            SuperquantileOfMoments { moments, .. } => positive("KM", *moments)?,
            BinHistogram { bins } => {
                if bins.is_empty() || bins.contains(&0) {
                    return Err(Error::InvalidArgument(format!("bad bin counts in {self}")));
                }
                if bins.len() != 1 && bins.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: bins.len(),
                    });
                }
            }
            CylinderRaw { keep } => {
                if *keep == Some(0) {
                    return Err(Error::InvalidArgument("cylinder must keep at least one sample".into()));
                }
            }
        }
        Ok(())
    }

    /// Number of features produced for `dim`-dimensional batches of `n` samples.
    pub fn len(&self, dim: usize, n: usize) -> usize {
        use FeatureScheme::*;
        match self {
            Quantile { k } => *k,
            Moment { k } => multi_index_count(*k, dim),
            MomentAndQuantile { moments, quantiles } => multi_index_count(*moments, dim) + quantiles,
            QuantileOfMoments { moments, quantiles } => (multi_index_count(*moments, dim) - 1) * quantiles,
            Superquantile { k } => k + 1,
            SuperquantileOfMoments { moments, quantiles } => {
                (multi_index_count(*moments, dim) - 1) * (quantiles + 1)
            }
            BinHistogram { bins } => {
                if bins.len() == 1 {
                    bins[0].pow(dim as u32)
                } else {
                    bins.iter().product()
                }
            }
            CylinderRaw { keep } => keep.map_or(n, |k| k.min(n)) * dim,
        }
    }

    /// How many samples the scheme actually reads out of `n`.
    pub fn samples_used(&self, n: usize) -> usize {
        match self {
            FeatureScheme::CylinderRaw { keep: Some(k) } => (*k).min(n),
            _ => n,
        }
    }

    pub fn is_cylinder(&self) -> bool {
        matches!(self, FeatureScheme::CylinderRaw { .. })
    }

    /// File-name friendly form, e.g. `momquant_KM7_KQ200`.
    pub fn slug(&self) -> String {
        self.to_string()
            .chars()
            .filter_map(|c| match c {
                ':' | ',' => Some('_'),
                '=' => None,
                c => Some(c),
            })
            .collect()
    }

    pub fn bin_grid(&self, support: &[Interval]) -> Result<BinGrid> {
        match self {
            FeatureScheme::BinHistogram { bins } => {
                let bins = if bins.len() == 1 {
                    vec![bins[0]; support.len()]
                } else {
                    bins.clone()
                };
                BinGrid::new(support.to_vec(), bins)
            }
            _ => Err(Error::InvalidArgument(format!("{self} has no bin grid"))),
        }
    }
}

impl fmt::Display for FeatureScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use FeatureScheme::*;
        match self {
            Quantile { k } => write!(f, "quantile:K={k}"),
            Moment { k } => write!(f, "moment:K={k}"),
            MomentAndQuantile { moments, quantiles } => write!(f, "momquant:KM={moments},KQ={quantiles}"),
            QuantileOfMoments { moments, quantiles } => write!(f, "quantmom:KM={moments},KQ={quantiles}"),
            Superquantile { k } => write!(f, "superquant:K={k}"),
            SuperquantileOfMoments { moments, quantiles } => write!(f, "supermom:KM={moments},KQ={quantiles}"),
            BinHistogram { bins } => {
                let js: Vec<String> = bins.iter().map(|j| j.to_string()).collect();
                write!(f, "bin:J={}", js.join("x"))
            }
            CylinderRaw { keep: None } => write!(f, "cylinder"),
            CylinderRaw { keep: Some(n) } => write!(f, "cylinder:n={n}"),
        }
    }
}

impl FromStr for FeatureScheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        let (kind, args) = match s.split_once(':') {
            Some((k, a)) => (k.trim(), a.trim()),
            None => (s, ""),
        };
        let mut params: Vec<(String, String)> = Vec::new();
        if !args.is_empty() {
            for part in args.split(',') {
                let (k, v) = part
                    .split_once('=')
                    .ok_or_else(|| format!("expected key=value, found `{part}`"))?;
                params.push((k.trim().to_string(), v.trim().to_string()));
            }
        }
        let take = |name: &str| -> std::result::Result<usize, String> {
            let v = params
                .iter()
                .find(|(k, _)| k == name)
                .map(|(_, v)| v)
                .ok_or_else(|| format!("`{kind}` needs {name}=..."))?;
            v.parse::<usize>().map_err(|e| format!("{name}={v}: {e}"))
        };
        let allow = |names: &[&str]| -> std::result::Result<(), String> {
            match params.iter().find(|(k, _)| !names.contains(&k.as_str())) {
                Some((k, _)) => Err(format!("unknown parameter `{k}` for `{kind}`")),
                None => Ok(()),
            }
        };
        let scheme = match kind {
            "quantile" => {
                allow(&["K"])?;
                FeatureScheme::Quantile { k: take("K")? }
            }
            "moment" => {
                allow(&["K"])?;
                FeatureScheme::Moment { k: take("K")? }
            }
            "superquant" => {
                allow(&["K"])?;
                FeatureScheme::Superquantile { k: take("K")? }
            }
            "momquant" | "quantmom" | "supermom" => {
                allow(&["KM", "KQ"])?;
                let (moments, quantiles) = (take("KM")?, take("KQ")?);
                match kind {
                    "momquant" => FeatureScheme::MomentAndQuantile { moments, quantiles },
                    "quantmom" => FeatureScheme::QuantileOfMoments { moments, quantiles },
                    _ => FeatureScheme::SuperquantileOfMoments { moments, quantiles },
                }
            }
            "bin" => {
                allow(&["J"])?;
                let v = &params
                    .iter()
                    .find(|(k, _)| k == "J")
                    .ok_or("`bin` needs J=...")?
                    .1;
                let bins = v
                    .split('x')
                    .map(|j| j.trim().parse::<usize>().map_err(|e| format!("J={v}: {e}")))
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                FeatureScheme::BinHistogram { bins }
            }
            "cylinder" => {
                allow(&["n"])?;
                let keep = if params.is_empty() { None } else { Some(take("n")?) };
                FeatureScheme::CylinderRaw { keep }
            }
            other => return Err(format!("unknown feature scheme `{other}`")),
        };
        Ok(scheme)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    pub scheme: FeatureScheme,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// 1-based nearest rank for level `num/den` among `n` values, as a 0-based index.
fn nearest_rank_index(num: usize, den: usize, n: usize) -> usize {
    let rank = (num * n).div_ceil(den);
    rank.clamp(1, n) - 1
}

fn sorted(mut values: Vec<f64>) -> Vec<f64> {
    values.sort_unstable_by(f64::total_cmp);
    values
}

/// Quantiles at levels `k/(count+1)`, `k = 1..=count`, of sorted values.
pub fn quantiles_from_sorted(sorted: &[f64], count: usize) -> Vec<f64> {
    let n = sorted.len();
    (1..=count)
        .map(|k| sorted[nearest_rank_index(k, count + 1, n)])
        .collect()
}

/// Quantiles at levels `k/(count+1)`, `k = 1..=count`, of unsorted values.
/// Same result as sorting and calling [`quantiles_from_sorted`].
pub fn quantiles_of(values: &[f64], count: usize) -> Vec<f64> {
    let n = values.len();
    let ranks: Vec<usize> = (1..=count).map(|k| nearest_rank_index(k, count + 1, n)).collect();
    order_statistics(values, &ranks)
}

/// `sorted(values)[r]` for every `r` in the nondecreasing list `ranks`,
/// without sorting everything.
///
/// Values are spread over equal-width buckets between their min and max, or,
/// for columns crowded near zero such as `x^5`, on a scale that is
/// logarithmic across binades. Either bucket map is monotone, so only
/// buckets holding a requested rank are looked into, recursively.
pub fn order_statistics(values: &[f64], ranks: &[usize]) -> Vec<f64> {
    debug_assert!(ranks.windows(2).all(|w| w[0] <= w[1]));
    debug_assert!(ranks.last().is_none_or(|&r| r < values.len()));
    let mut out = Vec::with_capacity(ranks.len());
    select_into(values, ranks, &mut out, 0);
    out
}

fn select_into(values: &[f64], ranks: &[usize], out: &mut Vec<f64>, depth: usize) {
    if ranks.is_empty() {
        return;
    }
    let n = values.len();
    if n <= 256 || depth > 3 {
        let s = sorted(values.to_vec());
        out.extend(ranks.iter().map(|&r| s[r]));
        return;
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    if lo == hi {
        out.extend(ranks.iter().map(|_| lo));
        return;
    }
    if !(hi - lo).is_finite() {
        let s = sorted(values.to_vec());
        out.extend(ranks.iter().map(|&r| s[r]));
        return;
    }
    let buckets = n / 2;
    let last = buckets as u32 - 1;
    // the median magnitude of a strided sample tells spread-out columns from
    // ones crowded near zero
    let mut probe: Vec<f64> = values.iter().step_by(n / 63).map(|x| x.abs()).collect();
    let mid = probe.len() / 2;
    let median = *probe.select_nth_unstable_by(mid, f64::total_cmp).1;
    let crowded = median < lo.abs().max(hi.abs()) / 16.0;
    let ids: Vec<u32> = if !crowded {
        let scale = buckets as f64 / (hi - lo);
        values.iter().map(|&x| (((x - lo) * scale) as u32).min(last)).collect()
    } else {
        // sign * (bits of |x|) is linear inside a binade and
        // logarithmic across binades, magnitudes more than BINADES binades
        // below the largest collapse to zero
        const BINADES: u64 = 40;
        let floor = lo.abs().max(hi.abs()).to_bits().saturating_sub(BINADES << 52);
        let g = |x: f64| {
            let m = x.abs().to_bits().saturating_sub(floor) as f64;
            if x < 0.0 {
                -m
            } else {
                m
            }
        };
        let (g_lo, g_hi) = (g(lo), g(hi));
        let scale = buckets as f64 / (g_hi - g_lo);
        values.iter().map(|&x| (((g(x) - g_lo) * scale) as u32).min(last)).collect()
    };
    let mut counts = vec![0u32; buckets + 1];
    for &b in &ids {
        counts[b as usize + 1] += 1;
    }
    for b in 1..=buckets {
        counts[b] += counts[b - 1];
    }
    // slot of each bucket among those holding a requested rank
    const NONE: u32 = u32::MAX;
    let mut slot_of = vec![NONE; buckets];
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for &r in ranks {
        let b = counts.partition_point(|&c| c as usize <= r) - 1;
        if slot_of[b] == NONE {
            slot_of[b] = groups.len() as u32;
            groups.push((b, Vec::new()));
        }
        groups[slot_of[b] as usize].1.push(r - counts[b] as usize);
    }
    // gather the requested buckets into one buffer, group after group
    let mut start = Vec::with_capacity(groups.len() + 1);
    let mut acc = 0;
    for (b, _) in &groups {
        start.push(acc);
        acc += (counts[b + 1] - counts[*b]) as usize;
    }
    start.push(acc);
    let mut fill = start.clone();
    let mut buf = vec![0.0; acc];
    for (&x, &b) in values.iter().zip(&ids) {
        let slot = slot_of[b as usize];
        if slot != NONE {
            let f = &mut fill[slot as usize];
            buf[*f] = x;
            *f += 1;
        }
    }
    for (g, (_, local)) in groups.iter().enumerate() {
        let part = &mut buf[start[g]..start[g + 1]];
        if part.len() <= 32 {
            part.sort_unstable_by(f64::total_cmp);
            out.extend(local.iter().map(|&r| part[r]));
        } else {
            select_into(part, local, out, depth + 1);
        }
    }
}

/// Mean of the values at or above `threshold`, for sorted values.
pub fn upper_mean_from_sorted(sorted: &[f64], threshold: f64) -> f64 {
    let start = sorted.partition_point(|&x| x < threshold);
    let tail = &sorted[start..];
    tail.iter().sum::<f64>() / tail.len() as f64
}

/// Superquantiles at levels `k/(count+1)`, `k = 0..=count`, of sorted values.
pub fn superquantiles_from_sorted(sorted: &[f64], count: usize) -> Vec<f64> {
    let n = sorted.len();
    // suffix[i] = sum of sorted[i..], accumulated from the top end
    let mut suffix = vec![0.0; n + 1];
    for i in (0..n).rev() {
        suffix[i] = suffix[i + 1] + sorted[i];
    }
    (0..=count)
        .map(|k| {
            let threshold = sorted[nearest_rank_index(k, count + 1, n)];
            let start = sorted.partition_point(|&x| x < threshold);
            suffix[start] / (n - start) as f64
        })
        .collect()
}

fn require_1d(batch: &SampleBatch) -> Result<()> {
    if batch.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: batch.dim(),
        });
    }
    Ok(())
}

pub fn empirical_quantiles(batch: &SampleBatch, k: usize) -> Result<FeatureVector> {
    require_1d(batch)?;
    Ok(FeatureVector {
        scheme: FeatureScheme::Quantile { k },
        values: quantiles_of(batch.as_flat(), k),
    })
}

/// Values of the monomial `prod_i x_i^{k_i}` at every sample.
pub fn monomial_values(batch: &SampleBatch, index: &[usize]) -> Vec<f64> {
    debug_assert_eq!(index.len(), batch.dim());
    batch
        .rows()
        .map(|row| {
            row.iter()
                .zip(index)
                .fold(1.0, |acc, (&x, &e)| acc * x.powi(e as i32))
        })
        .collect()
}

// pows[a][e][n] = x_{n,a}^e, by repeated multiplication
fn power_columns(batch: &SampleBatch, k: usize) -> Vec<Vec<Vec<f64>>> {
    (0..batch.dim())
        .map(|a| {
            let col = batch.column(a);
            let mut cols = vec![vec![1.0; col.len()]];
            for e in 1..=k {
                let next = cols[e - 1].iter().zip(&col).map(|(p, x)| p * x).collect();
                cols.push(next);
            }
            cols
        })
        .collect()
}

fn monomial_column(pows: &[Vec<Vec<f64>>], idx: &[usize]) -> Vec<f64> {
    let mut prod = pows[0][idx[0]].clone();
    for (a, &e) in idx.iter().enumerate().skip(1) {
        for (p, v) in prod.iter_mut().zip(&pows[a][e]) {
            *p *= v;
        }
    }
    prod
}

// four independent partial sums, combined at the end
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for i in 0..4 {
            acc[i] += x[i] * y[i];
        }
    }
    let tail: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn raw_moments(batch: &SampleBatch, set: &MultiIndexSet) -> Vec<f64> {
    let n = batch.len() as f64;
    let k = set.max_degree();
    let mut sums = vec![0.0; set.len()];
    if batch.dim() == 1 {
        // degree-ordered set in 1-D is just 0..=K
        for &x in batch.as_flat() {
            let mut p = 1.0;
            for s in sums.iter_mut() {
                *s += p;
                p *= x;
            }
        }
    } else {
        // columns of x_a^e, then one dot product per multi-index
        let pows = power_columns(batch, k);
        let last = batch.dim() - 1;
        for (s, idx) in sums.iter_mut().zip(set.iter()) {
            *s = if last == 1 {
                dot(&pows[0][idx[0]], &pows[1][idx[1]])
            } else {
                let head = monomial_column(&pows[..last], &idx[..last]);
                dot(&head, &pows[last][idx[last]])
            };
        }
    }
    // degree-0 moment is exactly one
    sums[0] = n;
    sums.into_iter().map(|s| s / n).collect()
}

pub fn empirical_moments(batch: &SampleBatch, k: usize) -> Result<FeatureVector> {
    let set = MultiIndexSet::new(k, batch.dim());
    Ok(FeatureVector {
        scheme: FeatureScheme::Moment { k },
        values: raw_moments(batch, &set),
    })
}

/// Sorted monomial samples for every nonzero multi-index of degree ≤ `moments`.
fn sorted_monomials(batch: &SampleBatch, moments: usize) -> Vec<Vec<f64>> {
    let set = MultiIndexSet::new(moments, batch.dim());
    if batch.dim() == 1 {
        // sort once; odd powers keep the order, even powers come from a merge
        let base = sorted(batch.as_flat().to_vec());
        return (1..=moments).map(|e| sorted_power(&base, e)).collect();
    }
    set.nonzero().map(|idx| sorted(monomial_values(batch, idx))).collect()
}

// x^e for sorted x, returned sorted.
fn sorted_power(sorted_x: &[f64], e: usize) -> Vec<f64> {
    let e = e as i32;
    if e % 2 == 1 {
        return sorted_x.iter().map(|x| x.powi(e)).collect();
    }
    let split = sorted_x.partition_point(|&x| x < 0.0);
    let (neg, pos) = sorted_x.split_at(split);
    let mut out = Vec::with_capacity(sorted_x.len());
    let (mut i, mut j) = (neg.len(), 0);
    while i > 0 && j < pos.len() {
        let a = neg[i - 1].powi(e);
        let b = pos[j].powi(e);
        if a <= b {
            out.push(a);
            i -= 1;
        } else {
            out.push(b);
            j += 1;
        }
    }
    out.extend(neg[..i].iter().rev().map(|x| x.powi(e)));
    out.extend(pos[j..].iter().map(|x| x.powi(e)));
    out
}

pub fn quantiles_of_moments(batch: &SampleBatch, moments: usize, quantiles: usize) -> Result<FeatureVector> {
    if moments == 0 {
        return Err(Error::InvalidArgument("KM must be at least 1".into()));
    }
    let set = MultiIndexSet::new(moments, batch.dim());
    let pows = power_columns(batch, moments);
    let values = set
        .nonzero()
        .flat_map(|idx| quantiles_of(&monomial_column(&pows, idx), quantiles))
        .collect();
    Ok(FeatureVector {
        scheme: FeatureScheme::QuantileOfMoments { moments, quantiles },
        values,
    })
}

pub fn superquantiles(batch: &SampleBatch, k: usize) -> Result<FeatureVector> {
    require_1d(batch)?;
    let s = sorted(batch.as_flat().to_vec());
    Ok(FeatureVector {
        scheme: FeatureScheme::Superquantile { k },
        values: superquantiles_from_sorted(&s, k),
    })
}

pub fn superquantiles_of_moments(batch: &SampleBatch, moments: usize, quantiles: usize) -> Result<FeatureVector> {
    if moments == 0 {
        return Err(Error::InvalidArgument("KM must be at least 1".into()));
    }
    let values = sorted_monomials(batch, moments)
        .iter()
        .flat_map(|s| superquantiles_from_sorted(s, quantiles))
        .collect();
    Ok(FeatureVector {
        scheme: FeatureScheme::SuperquantileOfMoments { moments, quantiles },
        values,
    })
}

pub fn bin_histogram(batch: &SampleBatch, grid: &BinGrid) -> Result<FeatureVector> {
    if batch.dim() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            got: batch.dim(),
        });
    }
    let mut counts = vec![0usize; grid.total_bins()];
    for row in batch.rows() {
        let cell = grid
            .locate(row)
            .ok_or_else(|| Error::OutOfSupport { point: row.to_vec() })?;
        counts[cell] += 1;
    }
    let n = batch.len() as f64;
    Ok(FeatureVector {
        scheme: FeatureScheme::BinHistogram {
            bins: grid.bins().to_vec(),
        },
        values: counts.into_iter().map(|c| c as f64 / n).collect(),
    })
}

/// Extracts `scheme`'s features from `batch`. `support` is only consulted by
/// the bin histogram.
pub fn extract(scheme: &FeatureScheme, batch: &SampleBatch, support: &[Interval]) -> Result<FeatureVector> {
    scheme.check(batch.dim())?;
    let mut fv = match scheme {
        FeatureScheme::Quantile { k } => empirical_quantiles(batch, *k)?,
        FeatureScheme::Moment { k } => empirical_moments(batch, *k)?,
        FeatureScheme::MomentAndQuantile { moments, quantiles } => {
            let mut values = empirical_moments(batch, *moments)?.values;
            values.extend(empirical_quantiles(batch, *quantiles)?.values);
            FeatureVector {
                scheme: scheme.clone(),
                values,
            }
        }
        FeatureScheme::QuantileOfMoments { moments, quantiles } => {
            quantiles_of_moments(batch, *moments, *quantiles)?
        }
        FeatureScheme::Superquantile { k } => superquantiles(batch, *k)?,
        FeatureScheme::SuperquantileOfMoments { moments, quantiles } => {
            superquantiles_of_moments(batch, *moments, *quantiles)?
        }
        FeatureScheme::BinHistogram { .. } => {
            if support.len() != batch.dim() {
                return Err(Error::DimensionMismatch {
                    expected: batch.dim(),
                    got: support.len(),
                });
            }
            bin_histogram(batch, &scheme.bin_grid(support)?)?
        }
        FeatureScheme::CylinderRaw { .. } => {
            let keep = scheme.samples_used(batch.len());
            FeatureVector {
                scheme: scheme.clone(),
                values: batch.as_flat()[..keep * batch.dim()].to_vec(),
            }
        }
    };
    fv.scheme = scheme.clone();
    debug_assert_eq!(fv.values.len(), scheme.len(batch.dim(), batch.len()));
    Ok(fv)
}
