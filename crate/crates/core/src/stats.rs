//! Statistical primitives: two-sample t (raw and summary form), 2x2
//! chi-square, bias-corrected Hedge's g, Benjamini-Hochberg FDR, one-way
//! ANOVA, Pearson correlation, and a seeded permutation-test engine.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, FisherSnedecor, StudentsT};

use crate::error::{Error, Result};
use crate::exec;

/// Which test produced a [`TestResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestKind {
    T,
    Chi2,
    F,
    R,
    Permutation,
}

/// Statistic, two-sided p-value, and degrees of freedom of one test.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub df: f64,
    pub kind: TestKind,
}

/// Bias-corrected standardized mean difference with its ingredients.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EffectSize {
    pub g: f64,
    pub m1: f64,
    pub m2: f64,
    /// Pooled standard deviation.
    pub s: f64,
    pub n1: usize,
    pub n2: usize,
}

/// Benjamini-Hochberg step-up output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FdrResult {
    pub reject: Vec<bool>,
    pub adjusted_p: Vec<f64>,
    pub q: f64,
}

/// Test statistic used by [`permutation_test`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PermStatistic {
    MeanDiff,
    T,
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance (n-1 denominator).
pub(crate) fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

fn t_p_value(t: f64, df: f64) -> f64 {
    if !t.is_finite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
    (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0)
}

/// Pooled-variance two-sample Student's t-test.
///
/// df = n1 + n2 - 2, two-sided p from the t distribution.
pub fn student_t(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::invalid("student_t requires at least 2 values per group"));
    }
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let (m1, m2) = (mean(a), mean(b));
    let sp2 = ((n1 - 1.0) * variance(a) + (n2 - 1.0) * variance(b)) / (n1 + n2 - 2.0);
    if sp2 <= 0.0 {
        return Err(Error::numerical("zero pooled variance in student_t"));
    }
    let df = n1 + n2 - 2.0;
    let t = (m1 - m2) / (sp2 * (1.0 / n1 + 1.0 / n2)).sqrt();
    Ok(TestResult { statistic: t, p_value: t_p_value(t, df), df, kind: TestKind::T })
}

/// Pooled two-sample t-test from summary statistics (means, sds, sizes).
pub fn student_t_summary(
    m1: f64,
    s1: f64,
    n1: usize,
    m2: f64,
    s2: f64,
    n2: usize,
) -> Result<TestResult> {
    if n1 < 2 || n2 < 2 {
        return Err(Error::invalid("student_t_summary requires n >= 2 per group"));
    }
    if s1 < 0.0 || s2 < 0.0 || (s1 == 0.0 && s2 == 0.0) {
        return Err(Error::numerical("degenerate standard deviations in student_t_summary"));
    }
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let sp2 = ((n1f - 1.0) * s1 * s1 + (n2f - 1.0) * s2 * s2) / (n1f + n2f - 2.0);
    let df = n1f + n2f - 2.0;
    let t = (m1 - m2) / (sp2 * (1.0 / n1f + 1.0 / n2f)).sqrt();
    Ok(TestResult { statistic: t, p_value: t_p_value(t, df), df, kind: TestKind::T })
}

/// Pearson chi-square on a 2x2 contingency table, without continuity
/// correction, df = 1.
pub fn chi_square_2x2(counts: [[f64; 2]; 2]) -> Result<TestResult> {
    let row = [counts[0][0] + counts[0][1], counts[1][0] + counts[1][1]];
    let col = [counts[0][0] + counts[1][0], counts[0][1] + counts[1][1]];
    let n = row[0] + row[1];
    if row.iter().chain(col.iter()).any(|&m| m <= 0.0) {
        return Err(Error::invalid("chi_square_2x2: zero marginal"));
    }
    let mut chi2 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let expected = row[i] * col[j] / n;
            let d = counts[i][j] - expected;
            chi2 += d * d / expected;
        }
    }
    let dist = ChiSquared::new(1.0).expect("df 1");
    Ok(TestResult { statistic: chi2, p_value: dist.sf(chi2).clamp(0.0, 1.0), df: 1.0, kind: TestKind::Chi2 })
}

/// Bias-corrected Hedge's g: ((m1-m2)/s) * (1 - 3/(4(n1+n2)-9)) with s the
/// pooled standard deviation.
pub fn hedges_g(a: &[f64], b: &[f64]) -> Result<EffectSize> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::invalid("hedges_g requires at least 2 values per group"));
    }
    let (n1, n2) = (a.len(), b.len());
    let (m1, m2) = (mean(a), mean(b));
    let sp2 = ((n1 - 1) as f64 * variance(a) + (n2 - 1) as f64 * variance(b))
        / (n1 + n2 - 2) as f64;
    if sp2 <= 0.0 {
        return Err(Error::numerical("zero pooled standard deviation in hedges_g"));
    }
    let s = sp2.sqrt();
    let correction = 1.0 - 3.0 / (4.0 * (n1 + n2) as f64 - 9.0);
    Ok(EffectSize { g: (m1 - m2) / s * correction, m1, m2, s, n1, n2 })
}

/// Benjamini-Hochberg step-up control at level `q`.
///
/// Rejects all hypotheses with sorted rank <= max{i : p(i) <= i*q/m};
/// adjusted p-values are the right-to-left cumulative minimum of m*p(i)/i,
/// capped at 1. Ties are ordered by original index.
pub fn fdr_bh(p_values: &[f64], q: f64) -> Result<FdrResult> {
    if !(0.0 < q && q < 1.0) {
        return Err(Error::invalid(format!("fdr_bh: q must be in (0,1), got {q}")));
    }
    if let Some(bad) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::invalid(format!("fdr_bh: p-value {bad} outside [0,1]")));
    }
    let m = p_values.len();
    if m == 0 {
        return Ok(FdrResult { reject: vec![], adjusted_p: vec![], q });
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| p_values[i].partial_cmp(&p_values[j]).unwrap().then(i.cmp(&j)));

    let mut cutoff_rank = 0; // 1-based rank of the largest p under the line
    for (rank0, &idx) in order.iter().enumerate() {
        if p_values[idx] <= (rank0 + 1) as f64 * q / m as f64 {
            cutoff_rank = rank0 + 1;
        }
    }

    let mut adjusted_sorted = vec![0.0; m];
    let mut running_min = 1.0f64;
    for rank0 in (0..m).rev() {
        let scaled = p_values[order[rank0]] * m as f64 / (rank0 + 1) as f64;
        running_min = running_min.min(scaled);
        adjusted_sorted[rank0] = running_min;
    }

    let mut reject = vec![false; m];
    let mut adjusted_p = vec![0.0; m];
    for (rank0, &idx) in order.iter().enumerate() {
        reject[idx] = rank0 < cutoff_rank;
        adjusted_p[idx] = adjusted_sorted[rank0];
    }
    Ok(FdrResult { reject, adjusted_p, q })
}

/// One-way fixed-effects ANOVA: F = MS_between / MS_within.
pub fn one_way_anova(groups: &[&[f64]]) -> Result<TestResult> {
    if groups.len() < 2 {
        return Err(Error::invalid("one_way_anova requires at least 2 groups"));
    }
    if groups.iter().any(|g| g.len() < 2) {
        return Err(Error::invalid("one_way_anova requires at least 2 values per group"));
    }
    let k = groups.len() as f64;
    let n: usize = groups.iter().map(|g| g.len()).sum();
    let grand = groups.iter().flat_map(|g| g.iter()).sum::<f64>() / n as f64;

    let ss_between: f64 = groups
        .iter()
        .map(|g| g.len() as f64 * (mean(g) - grand).powi(2))
        .sum();
    let ss_within: f64 = groups
        .iter()
        .map(|g| {
            let m = mean(g);
            g.iter().map(|x| (x - m) * (x - m)).sum::<f64>()
        })
        .sum();

    let df1 = k - 1.0;
    let df2 = n as f64 - k;
    let ms_within = ss_within / df2;
    if ms_within <= 0.0 {
        return Err(Error::numerical("zero within-group variance in one_way_anova"));
    }
    let f = (ss_between / df1) / ms_within;
    let dist = FisherSnedecor::new(df1, df2).expect("valid dfs");
    Ok(TestResult { statistic: f, p_value: dist.sf(f).clamp(0.0, 1.0), df: df2, kind: TestKind::F })
}

/// Pearson correlation with a two-sided p-value via the t transform
/// t = r * sqrt((n-2)/(1-r^2)).
pub fn pearson(x: &[f64], y: &[f64]) -> Result<TestResult> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "pearson: length mismatch ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(Error::invalid("pearson requires at least 3 paired values"));
    }
    let r = pearson_r(x, y)?;
    let n = x.len() as f64;
    let p = if r.abs() >= 1.0 {
        0.0
    } else {
        let t = r * ((n - 2.0) / (1.0 - r * r)).sqrt();
        t_p_value(t, n - 2.0)
    };
    Ok(TestResult { statistic: r, p_value: p, df: n - 2.0, kind: TestKind::R })
}

/// Plain Pearson r without a p-value; errors on zero variance.
pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64> {
    debug_assert_eq!(x.len(), y.len());
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(Error::numerical("pearson: zero variance"));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

fn perm_statistic(stat: PermStatistic, a: &[f64], b: &[f64]) -> f64 {
    match stat {
        PermStatistic::MeanDiff => mean(a) - mean(b),
        // Degenerate permutations (zero pooled variance) get t = 0 rather
        // than an error; they cannot exceed any nonzero observed statistic.
        PermStatistic::T => student_t(a, b).map(|r| r.statistic).unwrap_or(0.0),
    }
}

/// Two-sided label-permutation test with the add-one convention
/// p = (1 + #{ |stat_perm| >= |stat_obs| }) / (n_perm + 1).
///
/// Each permutation draws from its own counter-derived RNG stream, so the
/// p-value is identical regardless of worker count. The pooled sample is
/// canonicalized (sorted, smaller group first) before shuffling, making the
/// result invariant under swapping the two groups.
pub fn permutation_test(
    a: &[f64],
    b: &[f64],
    stat: PermStatistic,
    n_perm: usize,
    seed: u64,
) -> Result<TestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("permutation_test: empty group"));
    }
    if n_perm == 0 {
        return Err(Error::invalid("permutation_test: n_perm must be >= 1"));
    }
    let observed = perm_statistic(stat, a, b).abs();

    let mut pool: Vec<f64> = a.iter().chain(b.iter()).copied().collect();
    pool.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let n_first = a.len().min(b.len());

    let exceed: Vec<u64> = exec::map_indexed(n_perm, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64 + 1);
        let mut shuffled = pool.clone();
        shuffled.shuffle(&mut rng);
        let s = perm_statistic(stat, &shuffled[..n_first], &shuffled[n_first..]).abs();
        u64::from(s >= observed)
    });
    let count: u64 = exceed.iter().sum();

    let p = (1 + count) as f64 / (n_perm + 1) as f64;
    Ok(TestResult {
        statistic: perm_statistic(stat, a, b),
        p_value: p,
        df: f64::NAN,
        kind: TestKind::Permutation,
    })
}
