//! Derivative-free minimization (Nelder-Mead with restarts) and the
//! finite-difference Hessian used for observed-information standard errors.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Settings for [`minimize`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadOptions {
    /// Edge length of the initial simplex, relative to `max(1, |x_j|)`.
    pub initial_step: f64,
    /// A run stops once the simplex diameter falls below this, relative to
    /// `max(1, ‖x_best‖∞)`.
    pub xtol_rel: f64,
    /// A run also stops once the spread of function values falls below
    /// `ftol_rel * (|f_best| + ftol_rel)`.
    pub ftol_rel: f64,
    /// Evaluation budget for a single run.
    pub max_evals_per_run: usize,
    /// Restarts from the incumbent with a re-expanded simplex.
    pub max_restarts: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            initial_step: 0.5,
            xtol_rel: 1e-8,
            ftol_rel: 1e-12,
            max_evals_per_run: 4000,
            max_restarts: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub n_evals: usize,
    /// True when a restart from the incumbent could not improve on it.
    pub converged: bool,
    pub n_restarts_used: usize,
    /// Relative diameter of the last simplex.
    pub final_simplex_size: f64,
}

struct RunOutcome {
    x: Vec<f64>,
    fx: f64,
    evals: usize,
    size: f64,
    exhausted: bool,
}

fn eval<F: FnMut(&[f64]) -> f64>(f: &mut F, x: &[f64]) -> f64 {
    let v = f(x);
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

fn relative_diameter(simplex: &[Vec<f64>], best: usize) -> f64 {
    let scale = simplex[best].iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let mut diam = 0.0_f64;
    for (i, p) in simplex.iter().enumerate() {
        if i == best {
            continue;
        }
        for (a, b) in p.iter().zip(&simplex[best]) {
            diam = diam.max((a - b).abs());
        }
    }
    diam / scale
}

/// One Nelder-Mead run with standard coefficients (reflection 1, expansion
/// 2, contraction 1/2, shrink 1/2).
fn run<F: FnMut(&[f64]) -> f64>(f: &mut F, x0: &[f64], fx0: f64, opts: &NelderMeadOptions) -> RunOutcome {
    let dim = x0.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    let mut values: Vec<f64> = Vec::with_capacity(dim + 1);
    simplex.push(x0.to_vec());
    values.push(fx0);
    let mut evals = 0;
    for j in 0..dim {
        let mut p = x0.to_vec();
        p[j] += opts.initial_step * x0[j].abs().max(1.0);
        values.push(eval(f, &p));
        evals += 1;
        simplex.push(p);
    }

    let mut order: Vec<usize> = (0..=dim).collect();
    let mut centroid = vec![0.0; dim];
    let mut trial = vec![0.0; dim];
    let mut trial2 = vec![0.0; dim];

    loop {
        // Stable sort keeps ties deterministic.
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        let best = order[0];
        let worst = order[dim];
        let second = order[dim - 1];

        let size = relative_diameter(&simplex, best);
        let fbest = values[best];
        let spread = values[worst] - fbest;
        let converged_x = size < opts.xtol_rel;
        let converged_f =
            fbest.is_finite() && spread.abs() <= opts.ftol_rel * (fbest.abs() + opts.ftol_rel);
        if converged_x || converged_f || evals >= opts.max_evals_per_run {
            return RunOutcome {
                x: simplex[best].clone(),
                fx: fbest,
                evals,
                size,
                exhausted: !(converged_x || converged_f),
            };
        }

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &i in &order[..dim] {
            for (c, v) in centroid.iter_mut().zip(&simplex[i]) {
                *c += v;
            }
        }
        centroid.iter_mut().for_each(|c| *c /= dim as f64);

        for k in 0..dim {
            trial[k] = centroid[k] + (centroid[k] - simplex[worst][k]);
        }
        let fr = eval(f, &trial);
        evals += 1;

        if fr < values[best] {
            for k in 0..dim {
                trial2[k] = centroid[k] + 2.0 * (centroid[k] - simplex[worst][k]);
            }
            let fe = eval(f, &trial2);
            evals += 1;
            if fe < fr {
                simplex[worst].copy_from_slice(&trial2);
                values[worst] = fe;
            } else {
                simplex[worst].copy_from_slice(&trial);
                values[worst] = fr;
            }
            continue;
        }
        if fr < values[second] {
            simplex[worst].copy_from_slice(&trial);
            values[worst] = fr;
            continue;
        }
        // Contraction, outside when the reflected point beats the worst.
        let outside = fr < values[worst];
        for k in 0..dim {
            trial2[k] = if outside {
                centroid[k] + 0.5 * (trial[k] - centroid[k])
            } else {
                centroid[k] + 0.5 * (simplex[worst][k] - centroid[k])
            };
        }
        let fc = eval(f, &trial2);
        evals += 1;
        let accept = if outside { fc <= fr } else { fc < values[worst] };
        if accept {
            simplex[worst].copy_from_slice(&trial2);
            values[worst] = fc;
            continue;
        }
        // Shrink towards the best vertex.
        let anchor = simplex[best].clone();
        for &i in &order[1..] {
            for k in 0..dim {
                simplex[i][k] = anchor[k] + 0.5 * (simplex[i][k] - anchor[k]);
            }
            values[i] = eval(f, &simplex[i]);
            evals += 1;
        }
    }
}

/// Minimizes `f` from `x0`.
///
/// After the first run, the search is restarted from the incumbent with a
/// fresh simplex up to `max_restarts` times; the result counts as converged
/// once a restart fails to improve the objective by more than the run
/// tolerance. Deterministic for a deterministic `f`.
pub fn minimize<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opts: &NelderMeadOptions) -> OptimResult {
    assert!(!x0.is_empty(), "cannot minimize over an empty parameter vector");
    let mut fx = eval(&mut f, x0);
    let mut total = 1;
    let first = run(&mut f, x0, fx, opts);
    total += first.evals;
    let mut x = first.x;
    fx = first.fx;
    let mut size = first.size;
    let mut exhausted = first.exhausted;
    let mut converged = false;
    let mut restarts = 0;

    while restarts < opts.max_restarts {
        restarts += 1;
        let out = run(&mut f, &x, fx, opts);
        total += out.evals;
        let improvement = fx - out.fx;
        let tol = opts.ftol_rel.max(1e-14) * 10.0 * (fx.abs() + 1.0);
        let stalled = !(improvement > tol);
        if out.fx < fx {
            x = out.x;
            fx = out.fx;
        }
        size = out.size;
        exhausted = out.exhausted;
        if stalled && !exhausted {
            converged = true;
            break;
        }
    }
    if opts.max_restarts == 0 {
        converged = !exhausted;
    }

    OptimResult {
        x,
        fx,
        n_evals: total,
        converged: converged && fx.is_finite(),
        n_restarts_used: restarts,
        final_simplex_size: size,
    }
}

/// Central-difference Hessian of `f` at `point`, with step
/// `h_j = cbrt(eps) * max(1, |x_j|)`, symmetrized as `(H + Hᵀ)/2`.
pub fn information_matrix<F: FnMut(&[f64]) -> f64>(mut f: F, point: &[f64]) -> Result<DMatrix<f64>> {
    let raw = hessian_raw(&mut f, point);
    let sym = (&raw + raw.transpose()) * 0.5;
    if sym.iter().any(|v| !v.is_finite()) {
        return Err(Error::numeric("information matrix has non-finite entries"));
    }
    Ok(sym)
}

/// Unsymmetrized finite-difference Hessian (entry `(j, k)` is computed from
/// steps ordered `j` then `k`).
pub fn hessian_raw<F: FnMut(&[f64]) -> f64>(f: &mut F, point: &[f64]) -> DMatrix<f64> {
    let d = point.len();
    let cbrt_eps = f64::EPSILON.cbrt();
    let h: Vec<f64> = point
        .iter()
        .map(|&x| {
            let step = cbrt_eps * x.abs().max(1.0);
            // Use the step that is actually representable at x.
            (x + step) - x
        })
        .collect();
    let f0 = f(point);
    let mut x = point.to_vec();
    let eval_at = |x: &mut Vec<f64>, shifts: &[(usize, f64)], f: &mut F| {
        for &(j, s) in shifts {
            x[j] += s;
        }
        let v = f(x);
        for &(j, s) in shifts {
            x[j] -= s;
        }
        x.copy_from_slice(point);
        v
    };
    let mut hm = DMatrix::zeros(d, d);
    for j in 0..d {
        let fp = eval_at(&mut x, &[(j, h[j])], f);
        let fm = eval_at(&mut x, &[(j, -h[j])], f);
        hm[(j, j)] = (fp - 2.0 * f0 + fm) / (h[j] * h[j]);
    }
    for j in 0..d {
        for k in 0..d {
            if j == k {
                continue;
            }
            let fpp = eval_at(&mut x, &[(j, h[j]), (k, h[k])], f);
            let fpm = eval_at(&mut x, &[(j, h[j]), (k, -h[k])], f);
            let fmp = eval_at(&mut x, &[(j, -h[j]), (k, h[k])], f);
            let fmm = eval_at(&mut x, &[(j, -h[j]), (k, -h[k])], f);
            hm[(j, k)] = (fpp - fpm - fmp + fmm) / (4.0 * h[j] * h[k]);
        }
    }
    hm
}

/// Inverse of a positive definite matrix, or `None` if the Cholesky
/// factorization fails.
pub fn invert_spd(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let chol = m.clone().cholesky()?;
    let inv = chol.inverse();
    if inv.iter().all(|v| v.is_finite()) {
        Some(inv)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = minimize(f, &[-1.2, 1.0], &NelderMeadOptions::default());
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-5 && (r.x[1] - 1.0).abs() < 1e-5, "{:?}", r.x);
    }

    #[test]
    fn deterministic() {
        let f = |x: &[f64]| (x[0] - 3.0).powi(2) + (x[1] + 1.0).powi(4) + x[2].abs();
        let a = minimize(f, &[0.0, 0.0, 1.0], &NelderMeadOptions::default());
        let b = minimize(f, &[0.0, 0.0, 1.0], &NelderMeadOptions::default());
        assert_eq!(a, b);
    }

    #[test]
    fn one_dimensional_problem() {
        let r = minimize(|x: &[f64]| (x[0] - 2.5).powi(2), &[0.0], &NelderMeadOptions::default());
        assert!((r.x[0] - 2.5).abs() < 1e-7);
    }

    #[test]
    fn nan_is_treated_as_infeasible() {
        let f = |x: &[f64]| if x[0] < 0.0 { f64::NAN } else { (x[0] - 1.0).powi(2) };
        let r = minimize(f, &[0.5], &NelderMeadOptions::default());
        assert!((r.x[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn hessian_of_quadratic() {
        let a = [[4.0, 1.0, 0.5], [1.0, 3.0, -0.2], [0.5, -0.2, 2.0]];
        let f = |x: &[f64]| {
            let mut s = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    s += 0.5 * x[i] * a[i][j] * x[j];
                }
            }
            s
        };
        let h = information_matrix(f, &[0.0, 0.0, 0.0]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((h[(i, j)] - a[i][j]).abs() < 1e-6);
            }
        }
        let mut g = f;
        let raw = hessian_raw(&mut g, &[0.3, -0.2, 0.1]);
        let asym = (&raw - raw.transpose()).abs().max();
        assert!(asym < 1e-6);
    }

    #[test]
    fn hessian_of_exponential_likelihood() {
        // -LL(λ) = -n ln λ + λ S has second derivative n / λ².
        let (n, s) = (50.0, 20.0);
        let lam = n / s;
        let h = information_matrix(|x: &[f64]| -n * x[0].ln() + x[0] * s, &[lam]).unwrap();
        let want = n / (lam * lam);
        assert!(((h[(0, 0)] - want) / want).abs() < 1e-5);
    }

    #[test]
    fn spd_inverse() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let inv = invert_spd(&m).unwrap();
        let id = &m * &inv;
        assert!((id[(0, 0)] - 1.0).abs() < 1e-12 && id[(0, 1)].abs() < 1e-12);
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(invert_spd(&bad).is_none());
    }
}
