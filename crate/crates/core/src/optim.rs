//! Quasi-Newton minimization and finite-difference derivatives.

use nalgebra::{DMatrix, DVector};

/// Stopping rules for [`bfgs`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfgsOptions {
    pub max_iter: usize,
    /// Converged once `max |∇f| <` this.
    pub grad_tol: f64,
    /// ...or once `QUIET_STEPS` accepted steps in a row each change `f` by
    /// less than `rel_tol · |f|`.
    pub rel_tol: f64,
}

const QUIET_STEPS: usize = 3;

impl Default for BfgsOptions {
    fn default() -> Self {
        BfgsOptions {
            max_iter: 500,
            grad_tol: 1e-5,
            rel_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BfgsOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub grad: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub message: String,
    /// Objective after each accepted step, starting with `f(x0)`.
    pub trace: Vec<f64>,
}

impl BfgsOutcome {
    pub fn grad_max_norm(&self) -> f64 {
        max_abs(&self.grad)
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// BFGS on the inverse Hessian with a backtracking Armijo line search.
///
/// `f` may return `+∞` for infeasible points; the line search treats those as
/// failed trials. After a failed line search the metric is reset once.
pub fn bfgs<F, G>(mut f: F, mut grad: G, x0: &[f64], opts: &BfgsOptions) -> BfgsOutcome
where
    F: FnMut(&[f64]) -> f64,
    G: FnMut(&[f64]) -> Vec<f64>,
{
    let n = x0.len();
    let mut x = DVector::from_column_slice(x0);
    let mut fx = f(x.as_slice());
    let mut g = DVector::from_vec(grad(x.as_slice()));
    let mut trace = vec![fx];
    let finish = |x: &DVector<f64>, fx, g: &DVector<f64>, it, converged, message: &str, trace: Vec<f64>| BfgsOutcome {
        x: x.as_slice().to_vec(),
        f: fx,
        grad: g.as_slice().to_vec(),
        iterations: it,
        converged,
        message: message.to_string(),
        trace,
    };
    if !fx.is_finite() {
        return finish(
            &x,
            fx,
            &g,
            0,
            false,
            "objective not finite at the starting point",
            trace,
        );
    }
    if g.iter().any(|v| !v.is_finite()) {
        return finish(&x, fx, &g, 0, false, "gradient not finite at the starting point", trace);
    }
    // First step is scaled so that it moves at most one unit.
    let initial_metric = |g: &DVector<f64>| DMatrix::identity(n, n) / g.amax().max(1.0);
    let mut h = initial_metric(&g);
    let mut fresh = true;
    let mut quiet = 0;

    for it in 1..=opts.max_iter {
        if g.amax() < opts.grad_tol {
            return finish(&x, fx, &g, it - 1, true, "gradient below tolerance", trace);
        }
        let mut d = -(&h * &g);
        let mut slope = g.dot(&d);
        if !(slope < 0.0) {
            h = initial_metric(&g);
            fresh = true;
            d = -(&h * &g);
            slope = g.dot(&d);
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial = &x + step * &d;
            let ft = f(trial.as_slice());
            if ft.is_finite() && ft <= fx + 1e-4 * step * slope {
                accepted = Some((trial, ft));
                break;
            }
            step *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            if fresh {
                return finish(&x, fx, &g, it, false, "line search failed", trace);
            }
            h = initial_metric(&g);
            fresh = true;
            continue;
        };
        let g_new = DVector::from_vec(grad(x_new.as_slice()));
        if g_new.iter().any(|v| !v.is_finite()) {
            return finish(&x, fx, &g, it, false, "gradient became non-finite", trace);
        }
        let s = &x_new - &x;
        let y = &g_new - &g;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            if fresh {
                // Shanno–Phua scaling of the first metric.
                h = DMatrix::identity(n, n) * (sy / y.dot(&y));
            }
            let rho = 1.0 / sy;
            let hy = &h * &y;
            let yhy = y.dot(&hy);
            h += ((1.0 + rho * yhy) * rho) * (&s * s.transpose()) - rho * (&hy * s.transpose() + &s * hy.transpose());
            fresh = false;
        }
        let df = fx - f_new;
        x = x_new;
        fx = f_new;
        g = g_new;
        trace.push(fx);
        if g.amax() < opts.grad_tol {
            return finish(&x, fx, &g, it, true, "gradient below tolerance", trace);
        }
        // One short step can be a line-search artefact, so insist on a run.
        if df.abs() <= opts.rel_tol * fx.abs() {
            quiet += 1;
        } else {
            quiet = 0;
        }
        if quiet >= QUIET_STEPS {
            return finish(&x, fx, &g, it, true, "relative objective change below tolerance", trace);
        }
    }
    finish(&x, fx, &g, opts.max_iter, false, "iteration limit reached", trace)
}

/// Central-difference gradient with step `rel_step · max(1, |x_j|)`.
pub fn central_gradient<F: FnMut(&[f64]) -> f64>(mut f: F, x: &[f64], rel_step: f64) -> Vec<f64> {
    let mut work = x.to_vec();
    (0..x.len())
        .map(|j| {
            let h = rel_step * x[j].abs().max(1.0);
            work[j] = x[j] + h;
            let fp = f(&work);
            work[j] = x[j] - h;
            let fm = f(&work);
            work[j] = x[j];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

/// Hessian as the central-difference Jacobian of `grad`.
///
/// Returns the symmetrized matrix together with the max-abs asymmetry of the
/// raw Jacobian, which measures finite-difference noise.
pub fn hessian_from_gradient<G: FnMut(&[f64]) -> Vec<f64>>(
    mut grad: G,
    x: &[f64],
    rel_step: f64,
) -> (DMatrix<f64>, f64) {
    let k = x.len();
    let mut raw = DMatrix::zeros(k, k);
    let mut work = x.to_vec();
    for j in 0..k {
        let h = rel_step * x[j].abs().max(1.0);
        work[j] = x[j] + h;
        let gp = grad(&work);
        work[j] = x[j] - h;
        let gm = grad(&work);
        work[j] = x[j];
        for i in 0..k {
            raw[(i, j)] = (gp[i] - gm[i]) / (2.0 * h);
        }
    }
    let asym = (&raw - raw.transpose()).amax();
    ((&raw + raw.transpose()) * 0.5, asym)
}
