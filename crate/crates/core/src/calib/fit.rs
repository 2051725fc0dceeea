//! Small dense Levenberg–Marquardt solver.

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Stop when an accepted step changes the cost by less than this
    /// fraction.
    pub ftol: f64,
    /// Stop when max_k |cos(J_k, r)| falls below this.
    pub gtol: f64,
    /// Stop when an accepted step is shorter than this fraction of ‖p‖.
    pub xtol: f64,
    pub initial_damping: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions {
            max_iterations: 500,
            ftol: 1e-10,
            gtol: 1e-10,
            xtol: 1e-12,
            initial_damping: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LmReport {
    pub params: Vec<f64>,
    /// ½ Σ r²
    pub cost: f64,
    /// Cost after each accepted iteration, starting with the initial cost.
    pub cost_trace: Vec<f64>,
    pub iterations: usize,
    /// Scaled gradient max_k |J_kᵀ r| / (‖J_k‖ ‖r‖) at the optimum.
    pub gradient_norm: f64,
    /// JᵀJ at the optimum, row-major.
    pub jtj: Vec<f64>,
    pub residuals: Vec<f64>,
}

/// Solves `a x = b` for a small symmetric positive-definite `a` (row-major)
/// by Cholesky factorization.
pub fn solve_spd(a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > 0.0) {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i * n + k] * y[k]).sum();
        y[i] = (b[i] - s) / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| l[k * n + i] * x[k]).sum();
        x[i] = (y[i] - s) / l[i * n + i];
    }
    Some(x)
}

/// Inverse of a small SPD matrix.
pub fn invert_spd(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut inv = vec![0.0; n * n];
    for c in 0..n {
        let mut e = vec![0.0; n];
        e[c] = 1.0;
        let col = solve_spd(a, &e)?;
        for r in 0..n {
            inv[r * n + c] = col[r];
        }
    }
    Some(inv)
}

fn normal_equations(jac: &[f64], r: &[f64], np: usize) -> (Vec<f64>, Vec<f64>) {
    let mut jtj = vec![0.0; np * np];
    let mut jtr = vec![0.0; np];
    for (i, ri) in r.iter().enumerate() {
        let row = &jac[i * np..(i + 1) * np];
        for a in 0..np {
            jtr[a] += row[a] * ri;
            for b in 0..=a {
                jtj[a * np + b] += row[a] * row[b];
            }
        }
    }
    for a in 0..np {
        for b in 0..a {
            jtj[b * np + a] = jtj[a * np + b];
        }
    }
    (jtj, jtr)
}

fn scaled_gradient(jtj: &[f64], jtr: &[f64], cost: f64) -> f64 {
    let np = jtr.len();
    let rn = (2.0 * cost).sqrt();
    (0..np)
        .map(|k| {
            let d = (jtj[k * np + k]).sqrt() * rn;
            if d > 0.0 {
                (jtr[k] / d).abs()
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max)
}

/// Minimizes ½‖r(p)‖². `model(p, r, jac)` fills the residuals and the
/// row-major Jacobian ∂r_i/∂p_k.
pub fn levenberg_marquardt(
    p0: &[f64],
    n_residuals: usize,
    mut model: impl FnMut(&[f64], &mut [f64], &mut [f64]),
    options: &LmOptions,
) -> Result<LmReport> {
    let np = p0.len();
    if n_residuals < np {
        return Err(Error::Size {
            needed: np,
            got: n_residuals,
        });
    }
    let mut p = p0.to_vec();
    let mut r = vec![0.0; n_residuals];
    let mut jac = vec![0.0; n_residuals * np];
    let mut r_try = r.clone();
    let mut jac_try = jac.clone();
    let cost_of = |r: &[f64]| 0.5 * r.iter().map(|x| x * x).sum::<f64>();

    model(&p, &mut r, &mut jac);
    let mut cost = cost_of(&r);
    if !cost.is_finite() {
        return Err(Error::Fit {
            reason: "non-finite cost at the starting point".into(),
            trace: vec![cost],
        });
    }
    let mut trace = vec![cost];
    let (mut jtj, mut jtr) = normal_equations(&jac, &r, np);
    let mut lambda = options.initial_damping;
    let mut iterations = 0;
    let mut converged = cost == 0.0 || scaled_gradient(&jtj, &jtr, cost) < options.gtol;

    while !converged && iterations < options.max_iterations {
        iterations += 1;
        let mut a = jtj.clone();
        for k in 0..np {
            a[k * np + k] += lambda * jtj[k * np + k].max(1e-300);
        }
        let neg: Vec<f64> = jtr.iter().map(|g| -g).collect();
        let Some(step) = solve_spd(&a, &neg) else {
            lambda *= 10.0;
            if lambda > 1e16 {
                break;
            }
            continue;
        };
        let p_try: Vec<f64> = p.iter().zip(&step).map(|(a, b)| a + b).collect();
        model(&p_try, &mut r_try, &mut jac_try);
        let c_try = cost_of(&r_try);
        if c_try.is_finite() && c_try < cost {
            let rel = (cost - c_try) / cost;
            let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let small_step = norm(&step) <= options.xtol * norm(&p_try);
            p = p_try;
            std::mem::swap(&mut r, &mut r_try);
            std::mem::swap(&mut jac, &mut jac_try);
            cost = c_try;
            trace.push(cost);
            (jtj, jtr) = normal_equations(&jac, &r, np);
            lambda = (lambda / 10.0).max(1e-12);
            converged = rel < options.ftol
                || small_step
                || cost == 0.0
                || scaled_gradient(&jtj, &jtr, cost) < options.gtol;
        } else {
            lambda *= 10.0;
            if lambda > 1e16 {
                // No descent direction left at machine precision.
                converged = true;
            }
        }
    }
    if !converged {
        return Err(Error::Fit {
            reason: format!("Levenberg–Marquardt did not converge in {iterations} iterations"),
            trace,
        });
    }
    Ok(LmReport {
        params: p,
        cost,
        cost_trace: trace,
        iterations,
        gradient_norm: scaled_gradient(&jtj, &jtr, cost.max(1e-300)),
        jtj,
        residuals: r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_solves() {
        let a = [4.0, 1.0, 1.0, 3.0];
        let x = solve_spd(&a, &[1.0, 2.0]).unwrap();
        assert!((4.0 * x[0] + x[1] - 1.0).abs() < 1e-14);
        assert!((x[0] + 3.0 * x[1] - 2.0).abs() < 1e-14);
        assert!(solve_spd(&[1.0, 2.0, 2.0, 1.0], &[1.0, 1.0]).is_none());
        let inv = invert_spd(&a, 2).unwrap();
        assert!((inv[0] - 3.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn fits_exponential_decay() {
        let xs: Vec<f64> = (0..40).map(|i| i as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * (-1.3 * x).exp()).collect();
        let rep = levenberg_marquardt(
            &[1.0, 0.5],
            xs.len(),
            |p, r, j| {
                for (i, (&x, &y)) in xs.iter().zip(&ys).enumerate() {
                    let e = (-p[1] * x).exp();
                    r[i] = p[0] * e - y;
                    j[2 * i] = e;
                    j[2 * i + 1] = -p[0] * x * e;
                }
            },
            &LmOptions::default(),
        )
        .unwrap();
        assert!((rep.params[0] - 2.5).abs() < 1e-8);
        assert!((rep.params[1] - 1.3).abs() < 1e-8);
        assert!(rep.cost_trace.windows(2).all(|w| w[1] < w[0]));
    }
}
