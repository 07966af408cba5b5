use rand_distr::{Bernoulli, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky_dense, quad_form, spd_inverse};
use crate::seed::Rng;
use crate::surrogate::KernelSpec;

fn gaussian(rng: &mut Rng, sd: f64) -> f64 {
    if sd == 0.0 {
        return 0.0;
    }
    let z: f64 = StandardNormal.sample(rng);
    sd * z
}

fn check_noise(sd: f64) -> Result<()> {
    if !(sd >= 0.0 && sd.is_finite()) {
        return Err(Error::config(format!("noise level {sd} must be finite and >= 0")));
    }
    Ok(())
}

pub fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

/// Gaussian-bump mixture reward over a finite arm grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MixtureConfig", into = "MixtureConfig")]
pub struct MixtureSpec {
    components: Vec<MixtureComponent>,
    precisions: Vec<Vec<Vec<f64>>>,
    noise_std: f64,
    arms: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MixtureConfig {
    pub components: Vec<MixtureComponent>,
    pub noise_std: f64,
    pub arms: Vec<Vec<f64>>,
}

impl TryFrom<MixtureConfig> for MixtureSpec {
    type Error = Error;
    fn try_from(c: MixtureConfig) -> Result<Self> {
        MixtureSpec::new(c.components, c.noise_std, c.arms)
    }
}

impl From<MixtureSpec> for MixtureConfig {
    fn from(s: MixtureSpec) -> Self {
        MixtureConfig {
            components: s.components,
            noise_std: s.noise_std,
            arms: s.arms,
        }
    }
}

impl MixtureSpec {
    pub fn new(components: Vec<MixtureComponent>, noise_std: f64, arms: Vec<Vec<f64>>) -> Result<Self> {
        check_noise(noise_std)?;
        if components.is_empty() {
            return Err(Error::config("mixture needs at least one component"));
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if components.iter().any(|c| c.weight < 0.0) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::config(format!("mixture weights must be >= 0 and sum to 1, got {total}")));
        }
        let dim = components[0].mean.len();
        let mut precisions = Vec::with_capacity(components.len());
        for (i, c) in components.iter().enumerate() {
            if c.mean.len() != dim || c.cov.len() != dim || c.cov.iter().any(|r| r.len() != dim) {
                return Err(Error::config(format!("component {i} has inconsistent dimensions")));
            }
            let p = spd_inverse(&c.cov).ok_or_else(|| Error::config(format!("component {i} covariance is singular")))?;
            precisions.push(p);
        }
        if arms.iter().any(|a| a.len() != dim) {
            return Err(Error::config("arm dimension differs from the mixture dimension"));
        }
        Ok(MixtureSpec {
            components,
            precisions,
            noise_std,
            arms,
        })
    }

    /// Three bumps on `[0, 1]` read on a 15-arm grid.
    pub fn demo(noise_std: f64) -> Result<Self> {
        let comp = |w: f64, m: f64, v: f64| MixtureComponent {
            weight: w,
            mean: vec![m],
            cov: vec![vec![v]],
        };
        let arms = (0..15).map(|i| vec![i as f64 / 14.0]).collect();
        MixtureSpec::new(
            vec![comp(0.55, 0.72, 0.012), comp(0.3, 0.22, 0.02), comp(0.15, 0.45, 0.01)],
            noise_std,
            arms,
        )
    }

    pub fn dim(&self) -> usize {
        self.components[0].mean.len()
    }

    pub fn noise_std(&self) -> f64 {
        self.noise_std
    }

    pub fn arms(&self) -> &[Vec<f64>] {
        &self.arms
    }

    pub fn with_noise(&self, noise_std: f64) -> Result<Self> {
        check_noise(noise_std)?;
        Ok(MixtureSpec {
            noise_std,
            ..self.clone()
        })
    }

    /// Noise-free reward.
    pub fn mean_reward(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::input(format!("point has dimension {}, mixture has {}", x.len(), self.dim())));
        }
        Ok(self
            .components
            .iter()
            .zip(&self.precisions)
            .map(|(c, p)| {
                let d: Vec<f64> = x.iter().zip(&c.mean).map(|(a, b)| a - b).collect();
                c.weight * (-0.5 * quad_form(p, &d)).exp()
            })
            .sum())
    }

    pub fn arm_means(&self) -> Vec<f64> {
        self.arms.iter().map(|a| self.mean_reward(a).expect("arm dims checked")).collect()
    }
}

pub fn mixture_reward(spec: &MixtureSpec, x: &[f64], rng: &mut Rng) -> Result<f64> {
    Ok(spec.mean_reward(x)? + gaussian(rng, spec.noise_std))
}

/// Efficacy/toxicity dose-response pair with a toxicity penalty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoseSpec {
    pub levels: Vec<f64>,
    /// Intercept and slope of the efficacy logit.
    pub efficacy: (f64, f64),
    pub toxicity: (f64, f64),
    pub penalty: f64,
}

impl Default for DoseSpec {
    fn default() -> Self {
        DoseSpec {
            levels: (0..33).map(|i| i as f64 * 0.25).collect(),
            efficacy: (-1.5, 0.9),
            toxicity: (-5.0, 1.2),
            penalty: 0.5,
        }
    }
}

impl DoseSpec {
    pub fn level_index(&self, x: f64) -> Result<usize> {
        self.levels
            .iter()
            .position(|&l| (l - x).abs() < 1e-9)
            .ok_or_else(|| Error::input(format!("dose {x} is not on the grid")))
    }

    pub fn p_efficacy(&self, x: f64) -> f64 {
        logistic(self.efficacy.0 + self.efficacy.1 * x)
    }

    pub fn p_toxicity(&self, x: f64) -> f64 {
        logistic(self.toxicity.0 + self.toxicity.1 * x)
    }

    pub fn utilities(&self) -> Vec<f64> {
        self.levels.iter().map(|&x| self.p_efficacy(x) - self.penalty * self.p_toxicity(x)).collect()
    }

    pub fn reward(&self, efficacy: bool, toxicity: bool) -> f64 {
        efficacy as u8 as f64 - self.penalty * toxicity as u8 as f64
    }
}

pub fn dose_utility(spec: &DoseSpec, x: f64) -> Result<f64> {
    spec.level_index(x)?;
    Ok(spec.p_efficacy(x) - spec.penalty * spec.p_toxicity(x))
}

/// One cohort: independent efficacy and toxicity outcomes.
pub fn dose_sample(spec: &DoseSpec, x: f64, rng: &mut Rng) -> Result<(bool, bool)> {
    spec.level_index(x)?;
    let eff = Bernoulli::new(spec.p_efficacy(x)).map_err(|e| Error::numerical(e.to_string()))?;
    let tox = Bernoulli::new(spec.p_toxicity(x)).map_err(|e| Error::numerical(e.to_string()))?;
    Ok((eff.sample(rng), tox.sample(rng)))
}

/// Zero-mean Matérn field on a cell-centred square grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialSpec {
    pub side: usize,
    pub kernel: KernelSpec,
    pub noise_std: f64,
}

impl Default for SpatialSpec {
    fn default() -> Self {
        SpatialSpec {
            side: 8,
            kernel: KernelSpec::matern32(0.35, 1.0).expect("valid kernel"),
            noise_std: 0.2,
        }
    }
}

impl SpatialSpec {
    /// Cell centres `((i + 0.5)/side, (j + 0.5)/side)`, row-major in `i`.
    pub fn cells(&self) -> Vec<Vec<f64>> {
        let s = self.side as f64;
        (0..self.side)
            .flat_map(|i| (0..self.side).map(move |j| vec![(i as f64 + 0.5) / s, (j as f64 + 0.5) / s]))
            .collect()
    }

    pub fn cell_index(&self, i: usize, j: usize) -> usize {
        i * self.side + j
    }

    pub fn corners(&self) -> Vec<usize> {
        let e = self.side - 1;
        vec![self.cell_index(0, 0), self.cell_index(0, e), self.cell_index(e, 0), self.cell_index(e, e)]
    }
}

/// Exact joint draw of the field at every cell.
pub fn spatial_field_draw(spec: &SpatialSpec, rng: &mut Rng) -> Result<Vec<f64>> {
    spec.kernel.validate()?;
    check_noise(spec.noise_std)?;
    let cells = spec.cells();
    let jitter = 1e-10 * spec.kernel.signal_variance;
    let gram: Vec<Vec<f64>> = cells
        .iter()
        .enumerate()
        .map(|(i, a)| {
            cells
                .iter()
                .enumerate()
                .map(|(j, b)| spec.kernel.eval(a, b) + if i == j { jitter } else { 0.0 })
                .collect()
        })
        .collect();
    let l = cholesky_dense(&gram).ok_or_else(|| Error::numerical("field covariance is not positive definite"))?;
    let z: Vec<f64> = (0..cells.len()).map(|_| StandardNormal.sample(rng)).collect();
    Ok(l.iter().map(|row| row.iter().zip(&z).map(|(a, b)| a * b).sum()).collect())
}

/// Noisy reading of a drawn field at one cell.
pub fn spatial_observe(spec: &SpatialSpec, field: &[f64], cell: usize, rng: &mut Rng) -> Result<f64> {
    let v = field
        .get(cell)
        .ok_or_else(|| Error::input(format!("cell {cell} outside the {}-cell grid", field.len())))?;
    Ok(v + gaussian(rng, spec.noise_std))
}

/// `A·(1 − exp(−q(x)))` on the unit box with `q = max(0, q_max − (x−x*)ᵀH(x−x*))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaturationSpec {
    pub amplitude: f64,
    pub q_max: f64,
    pub optimum: Vec<f64>,
    pub curvature: Vec<Vec<f64>>,
    pub levels: Vec<usize>,
    pub noise_std: f64,
}

impl SaturationSpec {
    /// Five hyperparameters on a 5×4×5×5×5 lattice; peak 0.9342.
    pub fn case1() -> Self {
        SaturationSpec {
            amplitude: 0.95,
            q_max: 4.0965,
            optimum: vec![0.75, 2.0 / 3.0, 0.5, 0.25, 0.75],
            curvature: diag(&[10.0, 6.0, 8.0, 12.0, 9.0]),
            levels: vec![5, 4, 5, 5, 5],
            noise_std: 0.0025,
        }
    }

    /// Six hyperparameters on a 4⁶ lattice; peak 9700.
    pub fn case3() -> Self {
        SaturationSpec {
            amplitude: 10000.0,
            q_max: 3.5066,
            optimum: vec![0.0, 2.0 / 3.0, 1.0 / 3.0, 1.0, 2.0 / 3.0, 2.0 / 3.0],
            curvature: diag(&[8.0, 6.4, 9.6, 4.8, 8.0, 6.4]),
            levels: vec![4; 6],
            noise_std: 100.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_noise(self.noise_std)?;
        let d = self.optimum.len();
        if self.levels.len() != d || self.curvature.len() != d || self.curvature.iter().any(|r| r.len() != d) {
            return Err(Error::config("saturation spec has inconsistent dimensions"));
        }
        if cholesky_dense(&self.curvature).is_none() {
            return Err(Error::config("saturation curvature must be positive definite"));
        }
        if !(self.amplitude > 0.0 && self.q_max > 0.0) {
            return Err(Error::config("saturation amplitude and q_max must be positive"));
        }
        Ok(())
    }

    pub fn peak(&self) -> f64 {
        self.amplitude * (1.0 - (-self.q_max).exp())
    }

    /// Every lattice point, last coordinate fastest.
    pub fn lattice(&self) -> Vec<Vec<f64>> {
        lattice(&self.levels)
    }

    pub fn mean_value(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.optimum.len() || x.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::input("point outside the unit search box"));
        }
        let d: Vec<f64> = x.iter().zip(&self.optimum).map(|(a, b)| a - b).collect();
        let q = (self.q_max - quad_form(&self.curvature, &d)).max(0.0);
        Ok(self.amplitude * (1.0 - (-q).exp()))
    }
}

pub fn saturation_oracle(spec: &SaturationSpec, x: &[f64], rng: &mut Rng) -> Result<f64> {
    Ok(spec.mean_value(x)? + gaussian(rng, spec.noise_std))
}

/// Convex drag bowl `C_min + a·(√(1 + uᵀHu) − 1)` in box-normalized coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DragSpec {
    pub camber: (f64, f64),
    pub thickness: (f64, f64),
    pub minimum: f64,
    pub optimum: (f64, f64),
    pub scale: f64,
    pub curvature: Vec<Vec<f64>>,
    pub noise_std: f64,
    pub levels: usize,
}

impl Default for DragSpec {
    fn default() -> Self {
        // Narrow valley rotated 35 degrees off the camber axis.
        let (c, s) = (35f64.to_radians().cos(), 35f64.to_radians().sin());
        let (h1, h2) = (1200.0, 60.0);
        DragSpec {
            camber: (0.01, 0.10),
            thickness: (0.05, 0.20),
            minimum: 0.0587,
            optimum: (0.0325, 0.14),
            scale: 0.02,
            curvature: vec![
                vec![h1 * c * c + h2 * s * s, (h1 - h2) * c * s],
                vec![(h1 - h2) * c * s, h1 * s * s + h2 * c * c],
            ],
            noise_std: 0.0011,
            levels: 21,
        }
    }
}

impl DragSpec {
    pub fn normalize(&self, camber: f64, thickness: f64) -> Result<[f64; 2]> {
        let inside = |v: f64, (lo, hi): (f64, f64)| v >= lo - 1e-12 && v <= hi + 1e-12;
        if !inside(camber, self.camber) || !inside(thickness, self.thickness) {
            return Err(Error::input(format!("design ({camber}, {thickness}) outside the airfoil box")));
        }
        Ok([
            (camber - self.camber.0) / (self.camber.1 - self.camber.0),
            (thickness - self.thickness.0) / (self.thickness.1 - self.thickness.0),
        ])
    }

    pub fn denormalize(&self, u: &[f64]) -> (f64, f64) {
        (
            self.camber.0 + u[0] * (self.camber.1 - self.camber.0),
            self.thickness.0 + u[1] * (self.thickness.1 - self.thickness.0),
        )
    }

    pub fn lattice(&self) -> Vec<Vec<f64>> {
        lattice(&[self.levels, self.levels])
    }

    pub fn mean_drag(&self, camber: f64, thickness: f64) -> Result<f64> {
        let u = self.normalize(camber, thickness)?;
        let o = self.normalize(self.optimum.0, self.optimum.1)?;
        let d = [u[0] - o[0], u[1] - o[1]];
        Ok(self.minimum + self.scale * ((1.0 + quad_form(&self.curvature, &d)).sqrt() - 1.0))
    }
}

pub fn drag_oracle(spec: &DragSpec, camber: f64, thickness: f64, rng: &mut Rng) -> Result<f64> {
    Ok(spec.mean_drag(camber, thickness)? + gaussian(rng, spec.noise_std))
}

fn diag(v: &[f64]) -> Vec<Vec<f64>> {
    (0..v.len())
        .map(|i| (0..v.len()).map(|j| if i == j { v[i] } else { 0.0 }).collect())
        .collect()
}

/// Full tensor lattice on `[0, 1]^d`, last coordinate fastest.
pub fn lattice(levels: &[usize]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for &l in levels {
        let axis: Vec<f64> = (0..l).map(|i| if l == 1 { 0.5 } else { i as f64 / (l - 1) as f64 }).collect();
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}
