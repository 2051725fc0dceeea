use crate::interp;
use crate::{Error, Result};

use super::relative::ResponseCurve;

const MAX_ITER: usize = 50;
const TOL: f64 = 1e-4 * 1e-9;

/// Centered finite-difference derivative on a (possibly non-uniform) grid,
/// one-sided at the ends.
pub fn derivative(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    (0..n)
        .map(|i| {
            let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
            (ys[b] - ys[a]) / (xs[b] - xs[a])
        })
        .collect()
}

/// Shift Λ = λ̃ − λ_PM of the peak of R(λ)·exp(−(λ − λ_PM)²/2σ²), from the
/// stationarity condition λ̃ = λ_PM + σ² R'(λ̃)/R(λ̃) solved by fixed-point
/// iteration.
pub fn peak_shift_estimate(response: &ResponseCurve, sigma_lambda: f64, lambda_pm: f64) -> Result<f64> {
    peak_shift_on(&response.wavelength_grid, &response.response, sigma_lambda, lambda_pm)
}

pub fn peak_shift_on(grid: &[f64], r: &[f64], sigma_lambda: f64, lambda_pm: f64) -> Result<f64> {
    if grid.len() < 3 {
        return Err(Error::Size { needed: 3, got: grid.len() });
    }
    let dr = derivative(grid, r);
    let log_slope = |x: f64| -> Result<f64> {
        let rv = interp::linear(grid, r, x)
            .ok_or_else(|| Error::Domain(format!("{x:e} m outside the response grid")))?;
        if !(rv > 0.0) {
            return Err(Error::Domain(format!("R({x:e} m) = {rv} is not positive")));
        }
        Ok(interp::linear(grid, &dr, x).unwrap() / rv)
    };
    let s2 = sigma_lambda * sigma_lambda;
    let mut x = lambda_pm;
    let mut trace = Vec::with_capacity(MAX_ITER);
    for _ in 0..MAX_ITER {
        let next = lambda_pm + s2 * log_slope(x)?;
        let step = (next - x).abs();
        trace.push(next - lambda_pm);
        x = next;
        if step < TOL {
            return Ok(x - lambda_pm);
        }
    }
    Err(Error::NoConvergence {
        what: "peak-shift fixed point",
        iterations: MAX_ITER,
        residual: (trace[MAX_ITER - 1] - trace[MAX_ITER - 2]).abs(),
        trace,
    })
}
