use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub serial_fraction: f64,
    pub base_efficiency: f64,
    pub comm_alpha: f64,
    pub comm_beta: f64,
}

impl Default for ScalingParams {
    fn default() -> Self {
        ScalingParams {
            serial_fraction: 0.08,
            base_efficiency: 1.0,
            comm_alpha: 0.0,
            comm_beta: 1.0,
        }
    }
}

impl ScalingParams {
    pub fn amdahl(serial_fraction: f64) -> Self {
        ScalingParams {
            serial_fraction,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.serial_fraction;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::config(format!("serial fraction {p} outside [0, 1]")));
        }
        if !(self.base_efficiency > 0.0 && self.base_efficiency <= 1.0) {
            return Err(Error::config(format!("efficiency {} outside (0, 1]", self.base_efficiency)));
        }
        check_comm(self.comm_alpha, self.comm_beta).map_err(|e| Error::config(e.to_string()))
    }
}

fn check_comm(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::input(format!("communication alpha {alpha} must be finite and >= 0")));
    }
    if !(0.5..=1.0).contains(&beta) {
        return Err(Error::input(format!("communication beta {beta} outside [0.5, 1]")));
    }
    Ok(())
}

fn check_agents(k: usize) -> Result<()> {
    if k < 1 {
        return Err(Error::input("agent count must be >= 1"));
    }
    Ok(())
}

/// Parallel time `(1−p)·W/(η·K) + p·W`.
pub fn amdahl_time(params: &ScalingParams, k: usize, total_cost: f64) -> Result<f64> {
    check_agents(k)?;
    params.validate()?;
    if !(total_cost >= 0.0) {
        return Err(Error::input(format!("total cost {total_cost} must be >= 0")));
    }
    let p = params.serial_fraction;
    Ok((1.0 - p) * total_cost / (params.base_efficiency * k as f64) + p * total_cost)
}

pub fn amdahl_speedup(params: &ScalingParams, k: usize) -> Result<f64> {
    check_agents(k)?;
    params.validate()?;
    let p = params.serial_fraction;
    Ok(1.0 / (p + (1.0 - p) / (params.base_efficiency * k as f64)))
}

pub fn gustafson_speedup(p: f64, k: usize) -> Result<f64> {
    check_agents(k)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::input(format!("serial fraction {p} outside [0, 1]")));
    }
    Ok(p + (1.0 - p) * k as f64)
}

/// `1 / (1 + α·K^β)`.
pub fn parallel_efficiency(alpha: f64, beta: f64, k: usize) -> Result<f64> {
    check_agents(k)?;
    check_comm(alpha, beta)?;
    Ok(1.0 / (1.0 + alpha * (k as f64).powf(beta)))
}

/// Interior optimum `((1−p)/(α·β·p))^(1/(1+β))` of the communication-penalized speedup.
pub fn optimal_agents(params: &ScalingParams) -> Result<f64> {
    let p = params.serial_fraction;
    let (a, b) = (params.comm_alpha, params.comm_beta);
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::input(format!("serial fraction {p} has no interior optimum")));
    }
    check_comm(a, b)?;
    if a == 0.0 {
        return Err(Error::input("zero communication cost has no interior optimum"));
    }
    Ok(((1.0 - p) / (a * b * p)).powf(1.0 / (1.0 + b)))
}

/// Least-squares `p` for `1/S = p + (1−p)/K` with η fixed at 1, clamped to `[0, 1]`.
pub fn fit_serial_fraction(speedups: &[(usize, f64)]) -> Result<f64> {
    if speedups.len() < 2 {
        return Err(Error::input("serial fraction fit needs at least two points"));
    }
    let mut saa = 0.0;
    let mut sab = 0.0;
    for &(k, s) in speedups {
        check_agents(k)?;
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::input(format!("speedup {s} must be positive")));
        }
        let a = 1.0 - 1.0 / k as f64;
        let b = 1.0 / s - 1.0 / k as f64;
        saa += a * a;
        sab += a * b;
    }
    if saa == 0.0 {
        return Err(Error::input("serial fraction fit needs a point with K > 1"));
    }
    Ok((sab / saa).clamp(0.0, 1.0))
}
