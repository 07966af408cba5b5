use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::spd_logdet;
use crate::seed::Rng;

use super::oracles::logistic;

/// Coarse sub-lattice of a full lattice with at most `budget` points.
///
/// Levels are added one axis at a time, round robin, while the product fits.
/// Returns pool indices (last axis fastest) in lattice order.
pub fn grid_order(levels: &[usize], budget: usize) -> Result<Vec<usize>> {
    if levels.is_empty() || levels.contains(&0) {
        return Err(Error::input("grid needs at least one level per axis"));
    }
    let mut m = vec![1usize; levels.len()];
    let mut grew = true;
    while grew {
        grew = false;
        for j in 0..levels.len() {
            if m[j] < levels[j] {
                m[j] += 1;
                if m.iter().product::<usize>() <= budget.max(1) {
                    grew = true;
                } else {
                    m[j] -= 1;
                }
            }
        }
    }
    // Cell-centred picks along each axis.
    let picks: Vec<Vec<usize>> = levels
        .iter()
        .zip(&m)
        .map(|(&l, &mj)| (0..mj).map(|i| ((i as f64 + 0.5) * l as f64 / mj as f64) as usize).collect())
        .collect();
    let mut out = vec![0usize];
    for (j, axis) in picks.iter().enumerate() {
        out = out.into_iter().flat_map(|base| axis.iter().map(move |&p| base * levels[j] + p)).collect();
    }
    Ok(out)
}

/// Latin hypercube of `n` points in `[0, 1]^d`, each snapped to its nearest candidate.
pub fn latin_hypercube(candidates: &[Vec<f64>], n: usize, rng: &mut Rng) -> Result<Vec<usize>> {
    let d = candidates.first().ok_or_else(|| Error::input("empty candidate set"))?.len();
    let strata: Vec<Vec<usize>> = (0..d)
        .map(|_| {
            let mut p: Vec<usize> = (0..n).collect();
            p.shuffle(rng);
            p
        })
        .collect();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let x: Vec<f64> = (0..d).map(|j| (strata[j][i] as f64 + rng.random::<f64>()) / n as f64).collect();
        let nearest = candidates
            .iter()
            .enumerate()
            .map(|(k, c)| (k, c.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum::<f64>()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(k, _)| k)
            .expect("non-empty");
        out.push(nearest);
    }
    Ok(out)
}

pub const DOPT_RIDGE: f64 = 1e-6;
pub const DOPT_MAX_ITER: usize = 50;
pub const DOPT_TOL: f64 = 1e-8;
/// Prior scale of the coefficients used when the likelihood has no finite maximum.
pub const DOPT_PRIOR_SD: f64 = 2.5;
const SEPARATION_BOUND: f64 = 50.0;

/// Fits `logit p = a + b·x` by damped Newton. `prior_sd` adds a zero-mean
/// Gaussian penalty; `None` is plain maximum likelihood, which fails under
/// separation.
pub fn logistic_fit(xs: &[f64], ys: &[bool], prior_sd: Option<f64>) -> Option<(f64, f64)> {
    let pen = prior_sd.map_or(0.0, |s| 1.0 / (s * s));
    let objective = |a: f64, b: f64| -> f64 {
        let ll: f64 = xs
            .iter()
            .zip(ys)
            .map(|(&x, &y)| {
                let z = a + b * x;
                let log1pexp = if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() };
                (y as u8 as f64) * z - log1pexp
            })
            .sum();
        ll - 0.5 * pen * (a * a + b * b)
    };
    let (mut a, mut b) = (0.0, 0.0);
    for _ in 0..DOPT_MAX_ITER {
        let (mut g0, mut g1, mut h00, mut h01, mut h11) = (-pen * a, -pen * b, pen, 0.0, pen);
        for (&x, &y) in xs.iter().zip(ys) {
            let p = logistic(a + b * x);
            let r = y as u8 as f64 - p;
            let w = p * (1.0 - p);
            g0 += r;
            g1 += r * x;
            h00 += w;
            h01 += w * x;
            h11 += w * x * x;
        }
        let det = h00 * h11 - h01 * h01;
        if !(det > 1e-300) {
            return None;
        }
        let s0 = (h11 * g0 - h01 * g1) / det;
        let s1 = (h00 * g1 - h01 * g0) / det;
        let base = objective(a, b);
        let mut t = 1.0;
        while objective(a + t * s0, b + t * s1) < base - 1e-12 && t > 1e-4 {
            t *= 0.5;
        }
        a += t * s0;
        b += t * s1;
        if a.abs().max(b.abs()) > SEPARATION_BOUND {
            return None;
        }
        if (t * s0).abs().max((t * s1).abs()) < DOPT_TOL {
            return Some((a, b));
        }
    }
    None
}

/// Sequential D-optimal design for independent efficacy and toxicity logistic curves.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DOptimal {
    doses: Vec<f64>,
    efficacy: Vec<bool>,
    toxicity: Vec<bool>,
}

impl DOptimal {
    pub fn record(&mut self, dose: f64, efficacy: bool, toxicity: bool) {
        self.doses.push(dose);
        self.efficacy.push(efficacy);
        self.toxicity.push(toxicity);
    }

    pub fn len(&self) -> usize {
        self.doses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doses.is_empty()
    }

    /// Maximum-likelihood coefficients, or the shrunken fit when the data separate.
    pub fn estimates(&self) -> [(f64, f64); 2] {
        let est = |ys: &[bool]| {
            if ys.is_empty() {
                return (0.0, 0.0);
            }
            logistic_fit(&self.doses, ys, None)
                .or_else(|| logistic_fit(&self.doses, ys, Some(DOPT_PRIOR_SD)))
                .unwrap_or((0.0, 0.0))
        };
        [est(&self.efficacy), est(&self.toxicity)]
    }

    /// Combined log-determinant of the two 2×2 information blocks.
    pub fn log_det(doses: &[f64], estimates: &[(f64, f64); 2]) -> f64 {
        estimates
            .iter()
            .map(|&(a, b)| {
                let mut m = vec![vec![DOPT_RIDGE, 0.0], vec![0.0, DOPT_RIDGE]];
                for &x in doses {
                    let p = logistic(a + b * x);
                    let w = p * (1.0 - p);
                    m[0][0] += w;
                    m[0][1] += w * x;
                    m[1][0] += w * x;
                    m[1][1] += w * x * x;
                }
                spd_logdet(&m).unwrap_or(f64::NEG_INFINITY)
            })
            .sum()
    }

    /// Candidate with the largest log-det gain; ties go to the lowest index.
    pub fn next(&self, candidates: &[f64], pending: &[f64]) -> Result<usize> {
        if candidates.is_empty() {
            return Err(Error::input("empty candidate set"));
        }
        let est = self.estimates();
        let mut doses: Vec<f64> = self.doses.iter().chain(pending).copied().collect();
        let mut best = (0, f64::NEG_INFINITY);
        for (i, &c) in candidates.iter().enumerate() {
            doses.push(c);
            let v = Self::log_det(&doses, &est);
            doses.pop();
            if v > best.1 + 1e-12 {
                best = (i, v);
            }
        }
        Ok(best.0)
    }
}
