//! Classical fourth-order Runge-Kutta integration of autonomous systems.

use serde::{Deserialize, Serialize};

/// Integration parameters for flows whose accuracy matters: a fixed base
/// step, refined by halving until two successive results agree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RkParams {
    pub step: f64,
    pub refine_tol: f64,
    /// Refinement stops once the step count would exceed this many steps
    /// per unit of integration time.
    pub max_steps_per_unit: usize,
}

impl Default for RkParams {
    fn default() -> Self {
        RkParams {
            step: 1e-3,
            refine_tol: 1e-10,
            max_steps_per_unit: 1 << 14,
        }
    }
}

/// The state at which `check` rejected the trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFailure {
    pub sample: Vec<f64>,
    pub time: f64,
}

/// `steps` fixed RK4 steps covering `duration` (which may be negative).
/// `observe` sees every accepted state and returns `false` to abort.
pub fn rk4_fixed<F, O>(
    field: &mut F,
    y0: &[f64],
    duration: f64,
    steps: usize,
    observe: &mut O,
) -> Result<Vec<f64>, StepFailure>
where
    F: FnMut(&[f64], &mut [f64]),
    O: FnMut(&[f64]) -> bool,
{
    let dim = y0.len();
    let mut y = y0.to_vec();
    if steps == 0 || duration == 0.0 {
        return Ok(y);
    }
    let h = duration / steps as f64;
    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut tmp = vec![0.0; dim];
    for step in 0..steps {
        field(&y, &mut k1);
        for i in 0..dim {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        field(&tmp, &mut k2);
        for i in 0..dim {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        field(&tmp, &mut k3);
        for i in 0..dim {
            tmp[i] = y[i] + h * k3[i];
        }
        field(&tmp, &mut k4);
        for i in 0..dim {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if !observe(&y) {
            return Err(StepFailure {
                sample: y,
                time: h * (step + 1) as f64,
            });
        }
    }
    Ok(y)
}

/// Integrates with step halving: start from `ceil(|t| / step)` steps and
/// double until two successive results agree within `refine_tol` in the
/// max norm, or the step cap is reached (the finest result is returned).
pub fn integrate<F, C>(
    field: &mut F,
    y0: &[f64],
    duration: f64,
    params: &RkParams,
    check: &mut C,
) -> Result<Vec<f64>, StepFailure>
where
    F: FnMut(&[f64], &mut [f64]),
    C: FnMut(&[f64]) -> bool,
{
    if duration == 0.0 {
        return Ok(y0.to_vec());
    }
    let span = duration.abs();
    let mut steps = ((span / params.step).ceil() as usize).max(1);
    let cap = params.max_steps_per_unit * (span.ceil() as usize).max(1);
    let mut coarse = rk4_fixed(field, y0, duration, steps, check)?;
    loop {
        steps *= 2;
        let fine = rk4_fixed(field, y0, duration, steps, check)?;
        let diff = coarse
            .iter()
            .zip(&fine)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if diff <= params.refine_tol || steps * 2 > cap {
            return Ok(fine);
        }
        coarse = fine;
    }
}
