//! Ground-truth functionals `V(µ)` for the univariate and bivariate test cases.
//!
//! Everything that has a closed form on a bin distribution is evaluated
//! exactly: the density is constant per cell, so moments, the CDF and its
//! inverse, and tail means all reduce to sums over bins. The bivariate cases
//! B and C involve quantiles of products `X_1^j X_2^m`, which are estimated
//! by Monte-Carlo.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::distgen::{BinDistribution, SampleBatch};
use crate::error::{Error, Result};
use crate::features::{monomial_values, upper_mean_from_sorted};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum UniCase {
    /// `E[X] E[X^4] - E[X^2]`
    A,
    /// `Q(q)`
    B { q: f64 },
    /// `E[X^3] (1 + Q(q))`
    C { q: f64 },
    /// `E[X | X > Q(q)] + Q(q)`
    D { q: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BiCase {
    A,
    B { q: f64 },
    C { q: f64 },
    D { q1: f64, q2: f64 },
    E { q: f64 },
    F { q: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TestCase {
    Uni(UniCase),
    Bi(BiCase),
}

impl TestCase {
    pub const UNI_A: TestCase = TestCase::Uni(UniCase::A);
    pub const UNI_B: TestCase = TestCase::Uni(UniCase::B { q: 0.7 });
    pub const UNI_C: TestCase = TestCase::Uni(UniCase::C { q: 0.9 });
    pub const UNI_D: TestCase = TestCase::Uni(UniCase::D { q: 0.3 });
    pub const BI_A: TestCase = TestCase::Bi(BiCase::A);
    pub const BI_B: TestCase = TestCase::Bi(BiCase::B { q: 0.7 });
    pub const BI_C: TestCase = TestCase::Bi(BiCase::C { q: 0.9 });
    pub const BI_D: TestCase = TestCase::Bi(BiCase::D { q1: 0.6, q2: 0.3 });
    pub const BI_E: TestCase = TestCase::Bi(BiCase::E { q: 0.2 });
    pub const BI_F: TestCase = TestCase::Bi(BiCase::F { q: 0.8 });

    pub fn dim(&self) -> usize {
        match self {
            TestCase::Uni(_) => 1,
            TestCase::Bi(_) => 2,
        }
    }

    /// Short name, e.g. `uni-b`.
    pub fn name(&self) -> &'static str {
        match self {
            TestCase::Uni(UniCase::A) => "uni-a",
            TestCase::Uni(UniCase::B { .. }) => "uni-b",
            TestCase::Uni(UniCase::C { .. }) => "uni-c",
            TestCase::Uni(UniCase::D { .. }) => "uni-d",
            TestCase::Bi(BiCase::A) => "bi-a",
            TestCase::Bi(BiCase::B { .. }) => "bi-b",
            TestCase::Bi(BiCase::C { .. }) => "bi-c",
            TestCase::Bi(BiCase::D { .. }) => "bi-d",
            TestCase::Bi(BiCase::E { .. }) => "bi-e",
            TestCase::Bi(BiCase::F { .. }) => "bi-f",
        }
    }

    pub fn has_closed_form(&self) -> bool {
        !matches!(self, TestCase::Bi(BiCase::B { .. }) | TestCase::Bi(BiCase::C { .. }))
    }

    fn levels(&self) -> Vec<f64> {
        match *self {
            TestCase::Uni(UniCase::A) | TestCase::Bi(BiCase::A) => vec![],
            TestCase::Uni(UniCase::B { q } | UniCase::C { q } | UniCase::D { q }) => vec![q],
            TestCase::Bi(BiCase::B { q } | BiCase::C { q } | BiCase::E { q } | BiCase::F { q }) => vec![q],
            TestCase::Bi(BiCase::D { q1, q2 }) => vec![q1, q2],
        }
    }

    fn check(&self) -> Result<()> {
        match self.levels().into_iter().find(|q| !(*q > 0.0 && *q < 1.0)) {
            Some(q) => Err(Error::InvalidArgument(format!("level {q} of {} is not in (0, 1)", self.name()))),
            None => Ok(()),
        }
    }
}

impl fmt::Display for TestCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let default: TestCase = self.name().parse().expect("own name parses");
        if default == *self {
            return f.write_str(self.name());
        }
        match *self {
            TestCase::Bi(BiCase::D { q1, q2 }) => write!(f, "{}:q1={q1},q2={q2}", self.name()),
            _ => write!(f, "{}:q={}", self.name(), self.levels()[0]),
        }
    }
}

impl FromStr for TestCase {
    type Err = String;

    /// `uni-a` ... `bi-f`, optionally with levels: `uni-b:q=0.6`, `bi-d:q1=0.5,q2=0.2`.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (name, args) = match s.trim().split_once(':') {
            Some((n, a)) => (n.trim(), Some(a)),
            None => (s.trim(), None),
        };
        let mut case = match name {
            "uni-a" => TestCase::UNI_A,
            "uni-b" => TestCase::UNI_B,
            "uni-c" => TestCase::UNI_C,
            "uni-d" => TestCase::UNI_D,
            "bi-a" => TestCase::BI_A,
            "bi-b" => TestCase::BI_B,
            "bi-c" => TestCase::BI_C,
            "bi-d" => TestCase::BI_D,
            "bi-e" => TestCase::BI_E,
            "bi-f" => TestCase::BI_F,
            other => return Err(format!("unknown test case `{other}`")),
        };
        for part in args.into_iter().flat_map(|a| a.split(',')) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| format!("expected key=value, found `{part}`"))?;
            let v: f64 = value.trim().parse().map_err(|e| format!("{part}: {e}"))?;
            let slot = match (&mut case, key.trim()) {
                (TestCase::Uni(UniCase::B { q } | UniCase::C { q } | UniCase::D { q }), "q") => q,
                (TestCase::Bi(BiCase::B { q } | BiCase::C { q } | BiCase::E { q } | BiCase::F { q }), "q") => q,
                (TestCase::Bi(BiCase::D { q1, .. }), "q1") => q1,
                (TestCase::Bi(BiCase::D { q2, .. }), "q2") => q2,
                (_, k) => return Err(format!("`{name}` has no parameter `{k}`")),
            };
            *slot = v;
        }
        case.check().map_err(|e| e.to_string())?;
        Ok(case)
    }
}

/// How training labels `V(µ)` are computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LabelPolicy {
    Exact,
    /// Estimate from `n_label` fresh samples of `µ`.
    MonteCarlo { n_label: usize },
}

impl LabelPolicy {
    pub const MIN_MONTE_CARLO: usize = 10_000;

    /// Exact where a closed form exists, Monte-Carlo with `n_label` samples otherwise.
    pub fn default_for(case: &TestCase, n_label: usize) -> Self {
        if case.has_closed_form() {
            LabelPolicy::Exact
        } else {
            LabelPolicy::MonteCarlo { n_label }
        }
    }

    pub fn check(&self) -> Result<()> {
        match self {
            LabelPolicy::MonteCarlo { n_label } if *n_label < Self::MIN_MONTE_CARLO => Err(Error::InvalidArgument(
                format!("n_label = {n_label} is below {}", Self::MIN_MONTE_CARLO),
            )),
            _ => Ok(()),
        }
    }
}

/// `E[prod_i X_i^{k_i}]`, integrating the per-cell uniform density in closed form.
pub fn exact_moment(dist: &BinDistribution, k: &[usize]) -> f64 {
    let grid = dist.grid();
    assert_eq!(k.len(), grid.dim(), "multi-index length must match the dimension");
    // mean of x^e over each bin: (b^{e+1} - a^{e+1}) / ((e+1)(b-a)) = sum_i a^i b^{e-i} / (e+1)
    let factors: Vec<Vec<f64>> = k
        .iter()
        .enumerate()
        .map(|(axis, &e)| {
            (0..grid.bins()[axis])
                .map(|j| {
                    let (a, b) = grid.bin_bounds(axis, j);
                    let s: f64 = (0..=e).map(|i| a.powi(i as i32) * b.powi((e - i) as i32)).sum();
                    s / (e + 1) as f64
                })
                .collect()
        })
        .collect();
    let bins = grid.bins();
    let mut total = 0.0;
    for (flat, &p) in dist.probs().iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let mut rest = flat;
        let mut prod = p;
        for (axis, &n) in bins.iter().enumerate() {
            prod *= factors[axis][rest % n];
            rest /= n;
        }
        total += prod;
    }
    total
}

fn require_1d(dist: &BinDistribution) -> Result<()> {
    if dist.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: dist.dim(),
        });
    }
    Ok(())
}

/// `Q(p) = inf { x : F(x) >= p }`, inverting the piecewise-linear CDF.
pub fn exact_quantile_1d(dist: &BinDistribution, p: f64) -> Result<f64> {
    require_1d(dist)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("level {p} is not in [0, 1]")));
    }
    let grid = dist.grid();
    if p == 0.0 {
        return Ok(grid.support()[0].lo);
    }
    let probs = dist.probs();
    let cum = dist.cumulative();
    let last = probs.iter().rposition(|&m| m > 0.0).unwrap();
    let j = cum.partition_point(|&c| c < p).min(last);
    let (a, b) = grid.bin_bounds(0, j);
    let x = a + (p - dist.mass_before(j)) / probs[j] * (b - a);
    Ok(x.clamp(a, b))
}

/// Mass and first moment of the part of a 1-D distribution above `t`.
fn upper_partial(dist: &BinDistribution, t: f64) -> (f64, f64) {
    let grid = dist.grid();
    let iv = grid.support()[0];
    let t = t.clamp(iv.lo, iv.hi);
    let j0 = grid.locate_axis(0, t).unwrap();
    let mut mass = 0.0;
    let mut first = 0.0;
    for (j, &p) in dist.probs().iter().enumerate().skip(j0) {
        if p == 0.0 {
            continue;
        }
        let (a, b) = grid.bin_bounds(0, j);
        let lo = a.max(t);
        if lo >= b {
            continue;
        }
        let density = p / (b - a);
        mass += density * (b - lo);
        first += density * 0.5 * (b - lo) * (b + lo);
    }
    (mass, first)
}

/// Conditional mean `E[X | X > t]` of a 1-D distribution.
pub fn exact_tail_mean_1d(dist: &BinDistribution, t: f64) -> Result<f64> {
    require_1d(dist)?;
    let (mass, first) = upper_partial(dist, t);
    if mass <= 0.0 {
        return Err(Error::InvalidArgument(format!("no mass above {t}")));
    }
    Ok(first / mass)
}

/// Superquantile `E[X | X > Q(p)] = (1/(1-p)) ∫_{Q(p)} x µ(dx)`.
pub fn exact_superquantile_1d(dist: &BinDistribution, p: f64) -> Result<f64> {
    require_1d(dist)?;
    if !(0.0..1.0).contains(&p) || 1.0 - p <= f64::EPSILON {
        return Err(Error::InvalidArgument(format!("superquantile level {p} must lie in [0, 1)")));
    }
    let t = exact_quantile_1d(dist, p)?;
    let (_, first) = upper_partial(dist, t);
    Ok(first / (1.0 - p))
}

fn exact_uni_a(dist: &BinDistribution) -> f64 {
    exact_moment(dist, &[1]) * exact_moment(dist, &[4]) - exact_moment(dist, &[2])
}

fn exact_quantile_superquantile(dist: &BinDistribution, q: f64) -> Result<f64> {
    Ok(exact_superquantile_1d(dist, q)? + exact_quantile_1d(dist, q)?)
}

pub fn evaluate_uni(case: &UniCase, dist: &BinDistribution) -> Result<f64> {
    require_1d(dist)?;
    Ok(match *case {
        UniCase::A => exact_uni_a(dist),
        UniCase::B { q } => exact_quantile_1d(dist, q)?,
        UniCase::C { q } => exact_moment(dist, &[3]) * (1.0 + exact_quantile_1d(dist, q)?),
        UniCase::D { q } => exact_quantile_superquantile(dist, q)?,
    })
}

/// Nearest-rank empirical quantile at an arbitrary level `p`.
pub fn quantile_at_level(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let rank = (p * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_unstable_by(f64::total_cmp);
    v
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn empirical_moment_1d(values: &[f64], k: i32) -> f64 {
    values.iter().map(|x| x.powi(k)).sum::<f64>() / values.len() as f64
}

/// `E[X | X >= Q̂(q)] + Q̂(q)` from sorted samples.
fn empirical_quantile_superquantile(sorted: &[f64], q: f64) -> f64 {
    let t = quantile_at_level(sorted, q);
    upper_mean_from_sorted(sorted, t) + t
}

/// Univariate functional estimated from samples with the empirical estimators.
pub fn empirical_uni(case: &UniCase, batch: &SampleBatch) -> Result<f64> {
    if batch.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: batch.dim(),
        });
    }
    let x = batch.as_flat();
    Ok(match *case {
        UniCase::A => mean(x) * empirical_moment_1d(x, 4) - empirical_moment_1d(x, 2),
        UniCase::B { q } => quantile_at_level(&sorted(x.to_vec()), q),
        UniCase::C { q } => empirical_moment_1d(x, 3) * (1.0 + quantile_at_level(&sorted(x.to_vec()), q)),
        UniCase::D { q } => empirical_quantile_superquantile(&sorted(x.to_vec()), q),
    })
}

/// Bivariate functional. Without samples everything is exact (cases B and C
/// fail). With samples, cases A, D, E and F are estimated entirely from them,
/// while B and C keep their closed-form marginal terms and only estimate the
/// product-variable terms.
pub fn bivariate_value(case: &BiCase, dist: &BinDistribution, samples: Option<&SampleBatch>) -> Result<f64> {
    if dist.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: dist.dim(),
        });
    }
    if let Some(b) = samples {
        if b.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: b.dim(),
            });
        }
    }
    let marginals = [dist.marginal(0)?, dist.marginal(1)?];
    let columns = samples.map(|b| [b.column(0), b.column(1)]);
    let value = match (*case, &columns) {
        (BiCase::A, None) => marginals.iter().map(exact_uni_a).sum(),
        (BiCase::A, Some(cols)) => cols
            .iter()
            .map(|x| mean(x) * empirical_moment_1d(x, 4) - empirical_moment_1d(x, 2))
            .sum(),
        (BiCase::D { q1, q2 }, None) => {
            exact_quantile_superquantile(&marginals[0], q1)? + exact_quantile_superquantile(&marginals[1], q2)?
        }
        (BiCase::D { q1, q2 }, Some([x1, x2])) => {
            empirical_quantile_superquantile(&sorted(x1.clone()), q1)
                + empirical_quantile_superquantile(&sorted(x2.clone()), q2)
        }
        (BiCase::E { q }, None) => {
            let t = exact_quantile_1d(&marginals[0], q)?;
            exact_tail_mean_1d(&marginals[1], t)? + t
        }
        (BiCase::E { q }, Some([x1, x2])) => {
            let t = quantile_at_level(&sorted(x1.clone()), q);
            upper_mean_from_sorted(&sorted(x2.clone()), t) + t
        }
        (BiCase::F { q }, None) => exact_quantile_1d(&marginals[0], q)? + exact_quantile_1d(&marginals[1], q)?,
        (BiCase::F { q }, Some([x1, x2])) => {
            quantile_at_level(&sorted(x1.clone()), q) + quantile_at_level(&sorted(x2.clone()), q)
        }
        (BiCase::B { .. } | BiCase::C { .. }, None) => {
            return Err(Error::UnsupportedExact(TestCase::Bi(*case).name().into()))
        }
        (BiCase::B { q }, Some(_)) => {
            let b = samples.unwrap();
            let marg = exact_quantile_superquantile(&marginals[0], q)? + exact_quantile_superquantile(&marginals[1], q)?;
            let prod = sorted(monomial_values(b, &[1, 1]));
            let t = quantile_at_level(&prod, q);
            marg + upper_mean_from_sorted(&prod, t)
        }
        (BiCase::C { q }, Some(_)) => {
            let b = samples.unwrap();
            let exact = (1.0 + exact_quantile_1d(&marginals[0], q)?) * exact_moment(&marginals[0], &[3])
                + exact_moment(&marginals[1], &[3]);
            let q21 = quantile_at_level(&sorted(monomial_values(b, &[2, 1])), q);
            let q12 = quantile_at_level(&sorted(monomial_values(b, &[1, 2])), q);
            exact + q21 + q12
        }
    };
    Ok(value)
}

pub fn evaluate_bi<R: Rng + ?Sized>(
    case: &BiCase,
    dist: &BinDistribution,
    policy: &LabelPolicy,
    rng: &mut R,
) -> Result<f64> {
    match policy {
        LabelPolicy::Exact => bivariate_value(case, dist, None),
        LabelPolicy::MonteCarlo { n_label } => {
            let batch = dist.sample_points(*n_label, rng)?;
            bivariate_value(case, dist, Some(&batch))
        }
    }
}

/// Training label for `case` on `dist`. `rng` is only drawn from under a
/// Monte-Carlo policy and should be dedicated to labelling.
pub fn label<R: Rng + ?Sized>(case: &TestCase, dist: &BinDistribution, policy: &LabelPolicy, rng: &mut R) -> Result<f64> {
    policy.check()?;
    match (case, policy) {
        (TestCase::Uni(c), LabelPolicy::Exact) => evaluate_uni(c, dist),
        (TestCase::Uni(c), LabelPolicy::MonteCarlo { n_label }) => {
            require_1d(dist)?;
            empirical_uni(c, &dist.sample_points(*n_label, rng)?)
        }
        (TestCase::Bi(c), _) => evaluate_bi(c, dist, policy, rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distgen::{BinGrid, Interval};
    use crate::rng::StreamKey;

    fn uniform_1d() -> BinDistribution {
        BinDistribution::uniform(BinGrid::cube(1, -2.0, 2.0, 20).unwrap())
    }

    fn uniform_2d() -> BinDistribution {
        BinDistribution::uniform(BinGrid::cube(2, -2.0, 2.0, 10).unwrap())
    }

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn moments_of_uniform() {
        let u = uniform_1d();
        close(exact_moment(&u, &[0]), 1.0, 1e-15);
        close(exact_moment(&u, &[2]), 4.0 / 3.0, 1e-14);
        close(exact_moment(&u, &[4]), 16.0 / 5.0, 1e-14);
        close(exact_moment(&u, &[3]), 0.0, 1e-14);
    }

    #[test]
    fn moment_matches_hand_integral() {
        // probs (0.25, 0.75) on [-2,0], [0,2]: E[X^2] = 0.25 * 4/3 + 0.75 * 4/3
        let d = BinDistribution::new(BinGrid::cube(1, -2.0, 2.0, 2).unwrap(), vec![0.25, 0.75]).unwrap();
        close(exact_moment(&d, &[1]), -0.25 + 0.75 * 1.0, 1e-15);
        close(exact_moment(&d, &[2]), 4.0 / 3.0, 1e-15);
    }

    #[test]
    fn quantile_examples() {
        let u = uniform_1d();
        close(exact_quantile_1d(&u, 0.7).unwrap(), 0.8, 1e-14);
        assert_eq!(exact_quantile_1d(&u, 0.0).unwrap(), -2.0);
        close(exact_quantile_1d(&u, 1.0).unwrap(), 2.0, 1e-14);
        let d = BinDistribution::new(BinGrid::cube(1, -2.0, 2.0, 2).unwrap(), vec![0.25, 0.75]).unwrap();
        close(exact_quantile_1d(&d, 0.625).unwrap(), 1.0, 1e-15);
        assert!(exact_quantile_1d(&d, 1.5).is_err());
    }

    #[test]
    fn quantile_takes_infimum_over_gaps() {
        let d = BinDistribution::new(BinGrid::cube(1, 0.0, 3.0, 3).unwrap(), vec![0.5, 0.0, 0.5]).unwrap();
        close(exact_quantile_1d(&d, 0.5).unwrap(), 1.0, 1e-15);
        close(exact_quantile_1d(&d, 0.5 + 1e-12).unwrap(), 2.0, 1e-9);
    }

    #[test]
    fn superquantile_examples() {
        let u = uniform_1d();
        close(exact_superquantile_1d(&u, 0.3).unwrap(), 0.6, 1e-14);
        close(exact_superquantile_1d(&u, 0.5).unwrap(), 1.0, 1e-14);
        close(exact_superquantile_1d(&u, 0.0).unwrap(), exact_moment(&u, &[1]), 1e-14);
        assert!(exact_superquantile_1d(&u, 1.0).is_err());
    }

    #[test]
    fn univariate_cases() {
        let u = uniform_1d();
        close(evaluate_uni(&UniCase::A, &u).unwrap(), -4.0 / 3.0, 1e-13);
        close(evaluate_uni(&UniCase::C { q: 0.9 }, &u).unwrap(), 0.0, 1e-13);
        close(evaluate_uni(&UniCase::D { q: 0.3 }, &u).unwrap(), -0.2, 1e-13);
        close(evaluate_uni(&UniCase::B { q: 0.7 }, &u).unwrap(), 0.8, 1e-13);
        // symmetric but not uniform
        let d = BinDistribution::new(BinGrid::cube(1, -2.0, 2.0, 4).unwrap(), vec![0.1, 0.4, 0.4, 0.1]).unwrap();
        close(evaluate_uni(&UniCase::C { q: 0.9 }, &d).unwrap(), 0.0, 1e-13);
    }

    #[test]
    fn bivariate_cases() {
        let u = uniform_2d();
        let mut rng = StreamKey::new(0).rng();
        let exact = LabelPolicy::Exact;
        close(evaluate_bi(&BiCase::F { q: 0.8 }, &u, &exact, &mut rng).unwrap(), 2.4, 1e-13);
        close(evaluate_bi(&BiCase::A, &u, &exact, &mut rng).unwrap(), -8.0 / 3.0, 1e-13);
        close(evaluate_bi(&BiCase::E { q: 0.2 }, &u, &exact, &mut rng).unwrap(), -0.8, 1e-13);
        close(evaluate_bi(&BiCase::D { q1: 0.6, q2: 0.3 }, &u, &exact, &mut rng).unwrap(), 1.2 + 0.4 + 0.6 - 0.8, 1e-13);
        assert!(matches!(
            evaluate_bi(&BiCase::B { q: 0.7 }, &u, &exact, &mut rng),
            Err(Error::UnsupportedExact(_))
        ));
        assert!(evaluate_bi(&BiCase::C { q: 0.9 }, &u, &exact, &mut rng).is_err());
    }

    #[test]
    fn bivariate_c_exact_part_vanishes_for_symmetric_product() {
        // product of symmetric factors: odd marginal moments vanish, only the
        // Monte-Carlo product-quantile terms remain
        let a = [0.1, 0.4, 0.4, 0.1];
        let grid = BinGrid::cube(2, -2.0, 2.0, 4).unwrap();
        let probs: Vec<f64> = (0..16).map(|f| a[f % 4] * a[f / 4]).collect();
        let d = BinDistribution::from_weights(grid, probs).unwrap();
        let b = d.sample_points(50_000, &mut StreamKey::new(1).rng()).unwrap();
        let full = bivariate_value(&BiCase::C { q: 0.9 }, &d, Some(&b)).unwrap();
        let q21 = quantile_at_level(&sorted(monomial_values(&b, &[2, 1])), 0.9);
        let q12 = quantile_at_level(&sorted(monomial_values(&b, &[1, 2])), 0.9);
        close(full, q21 + q12, 1e-12);
    }

    #[test]
    fn monte_carlo_repeatability() {
        let d = BinDistribution::sample(&BinGrid::cube(2, -2.0, 2.0, 20).unwrap(), &mut StreamKey::new(3).rng());
        let policy = LabelPolicy::MonteCarlo { n_label: 400_000 };
        let case = TestCase::BI_B;
        let a = label(&case, &d, &policy, &mut StreamKey::new(10).rng()).unwrap();
        let b = label(&case, &d, &policy, &mut StreamKey::new(11).rng()).unwrap();
        close(a, b, 0.02);
        let f = TestCase::BI_F;
        let exact = label(&f, &d, &LabelPolicy::Exact, &mut StreamKey::new(0).rng()).unwrap();
        let mc = label(&f, &d, &LabelPolicy::MonteCarlo { n_label: 1_000_000 }, &mut StreamKey::new(12).rng()).unwrap();
        close(exact, mc, 0.01);
    }

    #[test]
    fn uni_label_dispatch() {
        let d = BinDistribution::sample(&BinGrid::cube(1, -2.0, 2.0, 30).unwrap(), &mut StreamKey::new(4).rng());
        let mut rng = StreamKey::new(0).rng();
        assert_eq!(
            label(&TestCase::UNI_A, &d, &LabelPolicy::Exact, &mut rng).unwrap(),
            evaluate_uni(&UniCase::A, &d).unwrap()
        );
        assert!(label(&TestCase::UNI_A, &d, &LabelPolicy::MonteCarlo { n_label: 10 }, &mut rng).is_err());
    }

    #[test]
    fn quantile_inverts_cdf() {
        let d = BinDistribution::sample(&BinGrid::cube(1, -2.0, 2.0, 37).unwrap(), &mut StreamKey::new(5).rng());
        for i in 1..100 {
            let p = i as f64 / 100.0;
            let q = exact_quantile_1d(&d, p).unwrap();
            let f = d.cdf(q).unwrap();
            close(f, p, 1e-12);
            assert!(exact_superquantile_1d(&d, p).unwrap() >= q);
        }
    }

    #[test]
    fn marginal_moments_commute() {
        let d = BinDistribution::sample(
            &BinGrid::new(vec![Interval::new(-2.0, 2.0), Interval::new(-1.0, 3.0)], vec![6, 9]).unwrap(),
            &mut StreamKey::new(6).rng(),
        );
        for k in 0..6 {
            close(exact_moment(&d.marginal(0).unwrap(), &[k]), exact_moment(&d, &[k, 0]), 1e-12);
            close(exact_moment(&d.marginal(1).unwrap(), &[k]), exact_moment(&d, &[0, k]), 1e-12);
        }
    }

    #[test]
    fn case_names_parse() {
        for name in ["uni-a", "uni-b", "uni-c", "uni-d", "bi-a", "bi-b", "bi-c", "bi-d", "bi-e", "bi-f"] {
            let c: TestCase = name.parse().unwrap();
            assert_eq!(c.to_string(), name);
        }
        let c: TestCase = "uni-b:q=0.6".parse().unwrap();
        assert_eq!(c, TestCase::Uni(UniCase::B { q: 0.6 }));
        assert_eq!(c.to_string(), "uni-b:q=0.6");
        let c: TestCase = "bi-d:q2=0.5".parse().unwrap();
        assert_eq!(c, TestCase::Bi(BiCase::D { q1: 0.6, q2: 0.5 }));
        assert!("uni-a:q=0.5".parse::<TestCase>().is_err());
        assert!("uni-b:q=1.5".parse::<TestCase>().is_err());
        assert!("tri-a".parse::<TestCase>().is_err());
    }

    #[test]
    fn default_policy() {
        assert_eq!(LabelPolicy::default_for(&TestCase::BI_A, 400_000), LabelPolicy::Exact);
        assert_eq!(
            LabelPolicy::default_for(&TestCase::BI_C, 400_000),
            LabelPolicy::MonteCarlo { n_label: 400_000 }
        );
    }
}
