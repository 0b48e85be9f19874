//! Correlation, rank tests and effect size over per-project measurements.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::error::{Error, Result};

/// Combined sample size at or below which rank tests enumerate the exact
/// null distribution.
pub const EXACT_LIMIT: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatMethod {
    Pearson,
    RankSum,
    SignedRank,
    CohenD,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatResult {
    pub statistic: f64,
    pub p_value: f64,
    pub effect_size: Option<f64>,
    pub method_tag: StatMethod,
    /// Whether the p-value comes from the exact null distribution.
    pub exact: bool,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn student_two_sided(t: f64, df: f64) -> f64 {
    if !t.is_finite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0)
}

fn normal_two_sided(z: f64) -> f64 {
    let dist = Normal::standard();
    (2.0 * dist.sf(z.abs())).clamp(0.0, 1.0)
}

/// Sample Pearson correlation with a two-sided p-value from the
/// t transform on n - 2 degrees of freedom.
pub fn pearson(pairs: &[(f64, f64)]) -> Result<StatResult> {
    if pairs.len() < 3 {
        return Err(Error::UndefinedCorrelation(format!(
            "need at least 3 pairs, got {}",
            pairs.len()
        )));
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in pairs {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation(
            "one coordinate has zero variance".into(),
        ));
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let p = if r.abs() == 1.0 {
        0.0
    } else {
        let df = n - 2.0;
        student_two_sided(r * (df / (1.0 - r * r)).sqrt(), df)
    };
    Ok(StatResult {
        statistic: r,
        p_value: p,
        effect_size: None,
        method_tag: StatMethod::Pearson,
        exact: false,
    })
}

/// Mid-ranks (1-based) of `values`, ties sharing the average of the ranks
/// they span.
pub fn mid_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Sizes of the tie groups in `values`.
fn tie_sizes(values: &[f64]) -> Vec<usize> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .chunk_by(|a, b| a == b)
        .map(<[f64]>::len)
        .collect()
}

/// Wilcoxon rank-sum test of `a` against `b`. The statistic is the sum of
/// the mid-ranks of `a` in the pooled sample.
pub fn rank_sum_test(a: &[f64], b: &[f64]) -> Result<StatResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Precondition("rank-sum test needs two non-empty samples".into()));
    }
    let exact = a.len() + b.len() <= EXACT_LIMIT;
    let (w, p) = if exact {
        rank_sum_exact(a, b)
    } else {
        rank_sum_normal(a, b)
    };
    Ok(StatResult {
        statistic: w,
        p_value: p,
        effect_size: None,
        method_tag: StatMethod::RankSum,
        exact,
    })
}

/// Exact two-sided p-value: the share of all size-|a| subsets of the
/// pooled mid-ranks whose sum lies at least as far from its mean as the
/// observed one.
pub fn rank_sum_exact(a: &[f64], b: &[f64]) -> (f64, f64) {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = mid_ranks(&pooled);
    // Doubled mid-ranks are integers, which keeps the sums exact.
    let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
    let n1 = a.len();
    let n = pooled.len();
    let observed: usize = doubled[..n1].iter().sum();
    let max_sum: usize = doubled.iter().sum();

    // counts[k][s]: number of k-subsets whose doubled rank sum is s.
    let mut counts = vec![vec![0f64; max_sum + 1]; n1 + 1];
    counts[0][0] = 1.0;
    for &r in &doubled {
        for k in (1..=n1).rev() {
            for s in (r..=max_sum).rev() {
                counts[k][s] += counts[k - 1][s - r];
            }
        }
    }
    // In doubled units the mean rank sum is n1 * (n + 1).
    let centre = (n1 * (n + 1)) as i64;
    let dev = |s: usize| (s as i64 - centre).abs();
    let observed_dev = dev(observed);
    let total: f64 = counts[n1].iter().sum();
    let extreme: f64 = counts[n1]
        .iter()
        .enumerate()
        .filter(|&(s, _)| dev(s) >= observed_dev)
        .map(|(_, c)| c)
        .sum();
    (observed as f64 / 2.0, (extreme / total).clamp(0.0, 1.0))
}

/// Normal approximation with tie-corrected variance and a continuity
/// correction of one half.
pub fn rank_sum_normal(a: &[f64], b: &[f64]) -> (f64, f64) {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = mid_ranks(&pooled);
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let n = n1 + n2;
    let w: f64 = ranks[..a.len()].iter().sum();
    let expected = n1 * (n + 1.0) / 2.0;
    let ties: f64 = tie_sizes(&pooled)
        .into_iter()
        .map(|t| (t * t * t - t) as f64)
        .sum();
    let var = n1 * n2 / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
    if var <= 0.0 {
        return (w, 1.0);
    }
    let z = ((w - expected).abs() - 0.5).max(0.0) / var.sqrt();
    (w, normal_two_sided(z))
}

/// Wilcoxon signed-rank test on paired samples. Zero differences are
/// dropped; the statistic is the rank sum of the positive differences.
pub fn signed_rank_test(a: &[f64], b: &[f64]) -> Result<StatResult> {
    if a.len() != b.len() {
        return Err(Error::Precondition(format!(
            "signed-rank test needs paired samples, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    if diffs.is_empty() {
        return Ok(StatResult {
            statistic: 0.0,
            p_value: 1.0,
            effect_size: None,
            method_tag: StatMethod::SignedRank,
            exact: true,
        });
    }
    let magnitudes: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = mid_ranks(&magnitudes);
    let w_plus: f64 = ranks.iter().zip(&diffs).filter(|(_, d)| **d > 0.0).map(|(r, _)| r).sum();
    let n = diffs.len();
    let exact = n <= EXACT_LIMIT;

    let p = if exact {
        let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
        let max_sum: usize = doubled.iter().sum();
        let mut counts = vec![0f64; max_sum + 1];
        counts[0] = 1.0;
        for &r in &doubled {
            for s in (r..=max_sum).rev() {
                counts[s] += counts[s - r];
            }
        }
        let centre = max_sum as i64;
        let dev = |s: usize| (2 * s as i64 - centre).abs();
        let observed = dev((w_plus * 2.0).round() as usize);
        let total: f64 = counts.iter().sum();
        let extreme: f64 = counts
            .iter()
            .enumerate()
            .filter(|&(s, _)| dev(s) >= observed)
            .map(|(_, c)| c)
            .sum();
        (extreme / total).clamp(0.0, 1.0)
    } else {
        let nf = n as f64;
        let expected = nf * (nf + 1.0) / 4.0;
        let ties: f64 = tie_sizes(&magnitudes)
            .into_iter()
            .map(|t| (t * t * t - t) as f64)
            .sum();
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - ties / 48.0;
        if var <= 0.0 {
            1.0
        } else {
            normal_two_sided(((w_plus - expected).abs() - 0.5).max(0.0) / var.sqrt())
        }
    };
    Ok(StatResult {
        statistic: w_plus,
        p_value: p,
        effect_size: None,
        method_tag: StatMethod::SignedRank,
        exact,
    })
}

/// Cohen's d with pooled standard deviation. The p-value is that of the
/// pooled-variance two-sample t-test.
pub fn effect_size(a: &[f64], b: &[f64]) -> Result<StatResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::Precondition("effect size needs two samples of size at least 2".into()));
    }
    let (ma, mb) = (mean(a), mean(b));
    let ss = |xs: &[f64], m: f64| xs.iter().map(|x| (x - m).powi(2)).sum::<f64>();
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let pooled_var = (ss(a, ma) + ss(b, mb)) / (n1 + n2 - 2.0);
    if pooled_var == 0.0 {
        return Err(Error::UndefinedEffect("pooled standard deviation is zero".into()));
    }
    let sd = pooled_var.sqrt();
    let d = (ma - mb) / sd;
    let t = (ma - mb) / (sd * (1.0 / n1 + 1.0 / n2).sqrt());
    Ok(StatResult {
        statistic: d,
        p_value: student_two_sided(t, n1 + n2 - 2.0),
        effect_size: Some(d),
        method_tag: StatMethod::CohenD,
        exact: false,
    })
}

/// Detected and generated mutant counts for one project and one class of
/// methods.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub detected: u64,
    pub generated: u64,
}

impl Tally {
    pub fn score(self) -> Option<f64> {
        (self.generated > 0).then(|| self.detected as f64 / self.generated as f64)
    }
}

/// How far required methods' mutation scores sit above pseudo-tested ones'.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreGap {
    /// Mean over projects of `ms_req - ms_pseudo`, for projects where both
    /// are defined.
    pub macro_gap: Option<f64>,
    /// `ms_req - ms_pseudo` with mutants pooled across all projects.
    pub micro_gap: Option<f64>,
    /// Projects contributing to `macro_gap`.
    pub projects: usize,
}

/// `per_project` holds (pseudo-tested tally, required tally) pairs.
pub fn score_gap(per_project: &[(Tally, Tally)]) -> ScoreGap {
    let gaps: Vec<f64> = per_project
        .iter()
        .filter_map(|(p, r)| Some(r.score()? - p.score()?))
        .collect();
    let macro_gap = (!gaps.is_empty()).then(|| mean(&gaps));
    let pool = |pick: fn(&(Tally, Tally)) -> Tally| {
        per_project.iter().map(pick).fold(Tally::default(), |acc, t| Tally {
            detected: acc.detected + t.detected,
            generated: acc.generated + t.generated,
        })
    };
    let micro_gap = match (pool(|x| x.1).score(), pool(|x| x.0).score()) {
        (Some(r), Some(p)) => Some(r - p),
        _ => None,
    };
    ScoreGap {
        macro_gap,
        micro_gap,
        projects: gaps.len(),
    }
}
