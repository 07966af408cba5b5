//! Replicate statistics: rank tests, multiplicity correction, bootstrap
//! intervals and convergence summaries.

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::seed::Rng;

/// Optimization direction of a metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Maximize,
    Minimize,
}

impl Sense {
    /// `true` when `a` is strictly better than `b`.
    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            Sense::Maximize => a > b,
            Sense::Minimize => a < b,
        }
    }

    /// Sign that turns the metric into something to maximize.
    pub fn sign(self) -> f64 {
        match self {
            Sense::Maximize => 1.0,
            Sense::Minimize => -1.0,
        }
    }
}

/// Exact enumeration is used when the smaller sample has at most this many values.
pub const EXACT_MWU_MAX_N: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Alternative {
    TwoSided,
    /// First sample tends to be larger.
    Greater,
    /// First sample tends to be smaller.
    Less,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney {
    /// `U` of the first sample: pairs with `a > b` plus half the ties.
    pub u: f64,
    pub u_other: f64,
    pub p_value: f64,
    pub exact: bool,
}

/// Midranks (1-based) of the pooled sample, plus the tie groups' sizes.
fn midranks(pooled: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&i, &j| pooled[i].total_cmp(&pooled[j]));
    let mut ranks = vec![0.0; pooled.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && pooled[order[j + 1]] == pooled[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        ties.push(j - i + 1);
        i = j + 1;
    }
    (ranks, ties)
}

fn check_samples(a: &[f64], b: &[f64]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::input("Mann-Whitney needs two non-empty samples"));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(Error::input("Mann-Whitney sample contains NaN"));
    }
    Ok(())
}

fn u_statistic(a: &[f64], b: &[f64]) -> (f64, Vec<f64>, Vec<usize>) {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, ties) = midranks(&pooled);
    let na = a.len() as f64;
    let ra: f64 = ranks[..a.len()].iter().sum();
    (ra - na * (na + 1.0) / 2.0, ranks, ties)
}

/// Two-sided Mann–Whitney U test.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitney> {
    mann_whitney_u_with(a, b, Alternative::TwoSided)
}

pub fn mann_whitney_u_with(a: &[f64], b: &[f64], alt: Alternative) -> Result<MannWhitney> {
    check_samples(a, b)?;
    let (u, _, _) = u_statistic(a, b);
    let exact = a.len().min(b.len()) <= EXACT_MWU_MAX_N;
    let p_value = if exact {
        mwu_exact_p(a, b, alt)?
    } else {
        mwu_normal_p(a, b, alt)?
    };
    Ok(MannWhitney {
        u,
        u_other: (a.len() * b.len()) as f64 - u,
        p_value,
        exact,
    })
}

/// Normal approximation with tie-corrected variance and continuity correction.
pub fn mwu_normal_p(a: &[f64], b: &[f64], alt: Alternative) -> Result<f64> {
    check_samples(a, b)?;
    let (u, _, ties) = u_statistic(a, b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let n = na + nb;
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum();
    let var = na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if !(var > 0.0) {
        return Ok(1.0);
    }
    let sd = var.sqrt();
    let mu = na * nb / 2.0;
    let norm = Normal::standard();
    let p = match alt {
        Alternative::TwoSided => {
            let z = ((u - mu).abs() - 0.5).max(0.0) / sd;
            2.0 * (1.0 - norm.cdf(z))
        }
        Alternative::Greater => 1.0 - norm.cdf((u - mu - 0.5) / sd),
        Alternative::Less => norm.cdf((u - mu + 0.5) / sd),
    };
    Ok(p.clamp(0.0, 1.0))
}

/// Exact permutation p-value, enumerating the null distribution of the
/// (midrank) rank sum with a subset-sum recursion.
pub fn mwu_exact_p(a: &[f64], b: &[f64], alt: Alternative) -> Result<f64> {
    check_samples(a, b)?;
    let (u, ranks, _) = u_statistic(a, b);
    let na = a.len();
    // Doubled midranks are integers.
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let max_sum: usize = {
        let mut d = doubled.clone();
        d.sort_unstable_by(|x, y| y.cmp(x));
        d[..na].iter().sum()
    };
    // ways[k][s]: number of k-subsets with doubled rank sum s.
    let mut ways = vec![vec![0f64; max_sum + 1]; na + 1];
    ways[0][0] = 1.0;
    for &r in &doubled {
        for k in (1..=na).rev() {
            let (lo, hi) = ways.split_at_mut(k);
            let prev = &lo[k - 1];
            let cur = &mut hi[0];
            for s in (r..=max_sum).rev() {
                if prev[s - r] != 0.0 {
                    cur[s] += prev[s - r];
                }
            }
        }
    }
    let total: f64 = ways[na].iter().sum();
    let offset = na * (na + 1); // doubled n_a (n_a + 1) / 2
    let mu2 = (a.len() * b.len()) as f64; // doubled mean of U
    let u2 = 2.0 * u;
    let eps = 1e-7;
    let mut p = 0.0;
    for (s, &w) in ways[na].iter().enumerate() {
        if w == 0.0 || s < offset {
            continue;
        }
        let us = (s - offset) as f64;
        let hit = match alt {
            Alternative::TwoSided => (us - mu2).abs() >= (u2 - mu2).abs() - eps,
            Alternative::Greater => us >= u2 - eps,
            Alternative::Less => us <= u2 + eps,
        };
        if hit {
            p += w;
        }
    }
    Ok((p / total).clamp(0.0, 1.0))
}

/// `min(1, p·m)` per entry.
pub fn bonferroni(p_values: &[f64], m: usize) -> Result<Vec<f64>> {
    if m == 0 || m < p_values.len() {
        return Err(Error::input(format!(
            "Bonferroni family size {m} smaller than {} tests",
            p_values.len()
        )));
    }
    Ok(p_values.iter().map(|p| (p * m as f64).min(1.0)).collect())
}

/// Type-7 (linear interpolation) quantile of an already sorted slice.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn quantile(sample: &[f64], q: f64) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    quantile_sorted(&s, q)
}

pub fn median(sample: &[f64]) -> f64 {
    quantile(sample, 0.5)
}

pub fn mean(sample: &[f64]) -> f64 {
    sample.iter().sum::<f64>() / sample.len() as f64
}

/// Sample standard deviation (n − 1 denominator).
pub fn std_dev(sample: &[f64]) -> f64 {
    if sample.len() < 2 {
        return 0.0;
    }
    let m = mean(sample);
    (sample.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (sample.len() - 1) as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
}

impl Summary {
    pub fn of(sample: &[f64]) -> Summary {
        let mut s = sample.to_vec();
        s.sort_by(f64::total_cmp);
        Summary {
            n: s.len(),
            mean: mean(&s),
            std: std_dev(&s),
            median: quantile_sorted(&s, 0.5),
            q25: quantile_sorted(&s, 0.25),
            q75: quantile_sorted(&s, 0.75),
        }
    }

    pub fn iqr(&self) -> f64 {
        self.q75 - self.q25
    }
}

/// Percentile bootstrap interval for the mean.
pub fn bootstrap_ci(sample: &[f64], level: f64, resamples: usize, rng: &mut Rng) -> Result<(f64, f64)> {
    if sample.len() < 2 {
        return Err(Error::input("bootstrap needs at least two values"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::input(format!("confidence level {level} outside (0, 1)")));
    }
    if resamples < 100 {
        return Err(Error::input("bootstrap needs at least 100 resamples"));
    }
    let n = sample.len();
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| sample[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    Ok((quantile_sorted(&means, tail), quantile_sorted(&means, 1.0 - tail)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceFit {
    /// Decay rate of the gap `A − f(t)`.
    pub lambda: f64,
    /// `ln C` of the fitted gap model.
    pub log_scale: f64,
    pub r_squared: f64,
    pub points_used: usize,
}

/// Log-linear least squares of `ln(A − f(t))` on `t` (1-based), using the
/// points with a positive gap.
pub fn fit_convergence_rate(trajectory: &[f64], asymptote: f64) -> Result<ConvergenceFit> {
    let pts: Vec<(f64, f64)> = trajectory
        .iter()
        .enumerate()
        .filter(|(_, &f)| asymptote - f > 0.0)
        .map(|(i, &f)| ((i + 1) as f64, (asymptote - f).ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::numerical(format!(
            "convergence fit needs 3 points below the asymptote, found {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mt;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if ss_tot <= 1e-300 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(ConvergenceFit {
        lambda: -slope,
        log_scale: intercept,
        r_squared,
        points_used: pts.len(),
    })
}

/// First (1-based) index at which the trajectory reaches `threshold`.
pub fn evaluations_to_threshold(trajectory: &[f64], threshold: f64, sense: Sense) -> Option<usize> {
    trajectory
        .iter()
        .position(|&v| match sense {
            Sense::Maximize => v >= threshold,
            Sense::Minimize => v <= threshold,
        })
        .map(|i| i + 1)
}

/// Spearman rank correlation (midranks).
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::input("Spearman needs two samples of equal length >= 2"));
    }
    let (ra, _) = midranks(a);
    let (rb, _) = midranks(b);
    let ma = mean(&ra);
    let mb = mean(&rb);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    if va == 0.0 || vb == 0.0 {
        return Ok(0.0);
    }
    Ok(cov / (va * vb).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from;

    #[test]
    fn identical_samples() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let r = mann_whitney_u(&a, &a).unwrap();
        assert_eq!(r.u, 8.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);
        let big: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let r = mann_whitney_u(&big, &big).unwrap();
        assert!(!r.exact);
        assert_eq!(r.u, 450.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn separated_triplets() {
        // All C(6,3) = 20 rank assignments are equally likely; U = 0 is the
        // single most extreme one on each side.
        let r = mann_whitney_u(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert_eq!(r.u, 0.0);
        assert!(r.exact);
        assert!((r.p_value - 0.1).abs() < 1e-12);
        let less = mann_whitney_u_with(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], Alternative::Less).unwrap();
        assert!((less.p_value - 0.05).abs() < 1e-12);
        let greater = mann_whitney_u_with(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], Alternative::Greater).unwrap();
        assert!((greater.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_sample_rejected() {
        assert!(mann_whitney_u(&[], &[1.0]).is_err());
    }

    #[test]
    fn bonferroni_examples() {
        assert_eq!(bonferroni(&[0.2, 0.03], 2).unwrap()[0], 0.4);
        assert_eq!(bonferroni(&[0.03], 1).unwrap(), vec![0.03]);
        assert!((bonferroni(&[0.03], 5).unwrap()[0] - 0.15).abs() < 1e-15);
        assert_eq!(bonferroni(&[0.5], 5).unwrap(), vec![1.0]);
        assert!(bonferroni(&[0.1, 0.2], 1).is_err());
    }

    #[test]
    fn bootstrap_constant_sample() {
        let (lo, hi) = bootstrap_ci(&[2.5; 10], 0.95, 200, &mut rng_from(1)).unwrap();
        assert_eq!((lo, hi), (2.5, 2.5));
        assert!(bootstrap_ci(&[1.0], 0.95, 200, &mut rng_from(1)).is_err());
        assert!(bootstrap_ci(&[1.0, 2.0], 1.0, 200, &mut rng_from(1)).is_err());
        assert!(bootstrap_ci(&[1.0, 2.0], 0.9, 10, &mut rng_from(1)).is_err());
    }

    #[test]
    fn convergence_fit_edge_cases() {
        let flat = vec![0.5; 10];
        let fit = fit_convergence_rate(&flat, 1.0).unwrap();
        assert!(fit.lambda.abs() < 1e-12);
        assert!(fit_convergence_rate(&flat, 0.5).is_err());
        let curve = |lam: f64| -> Vec<f64> { (1..=60).map(|t| 0.95 - 0.2 * (-lam * t as f64).exp()).collect() };
        let a = fit_convergence_rate(&curve(0.02), 0.95).unwrap().lambda;
        let b = fit_convergence_rate(&curve(0.04), 0.95).unwrap().lambda;
        assert!((b / a - 2.0).abs() < 1e-9);
    }

    #[test]
    fn thresholds() {
        let t = [0.5, 0.7, 0.9, 0.95];
        assert_eq!(evaluations_to_threshold(&t, 0.4, Sense::Maximize), Some(1));
        assert_eq!(evaluations_to_threshold(&t, 0.9, Sense::Maximize), Some(3));
        assert_eq!(evaluations_to_threshold(&t, 0.99, Sense::Maximize), None);
        assert_eq!(evaluations_to_threshold(&[0.3, 0.2, 0.1], 0.11, Sense::Minimize), Some(3));
    }

    #[test]
    fn summary_quantiles() {
        let s = Summary::of(&[4.0, 1.0, 3.0, 2.0, 5.0]);
        assert_eq!((s.median, s.q25, s.q75), (3.0, 2.0, 4.0));
        assert_eq!(s.iqr(), 2.0);
        assert!((spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap() - 1.0).abs() < 1e-12);
    }
}
