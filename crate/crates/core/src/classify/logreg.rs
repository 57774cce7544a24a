//! Penalized logistic regression fitted by accelerated proximal gradient
//! (FISTA) with backtracking and gradient-based momentum restart.
//!
//! Objective, for `S` training subjects, labels `y` in {0, 1}:
//!
//! ```text
//! mean_i [softplus(z_i) - y_i z_i]  +  R(w) / (strength * S),   z = X w + b
//! R(w) = |w|_1  (L1)   or   |w|^2 / 2  (L2)
//! ```
//!
//! i.e. `strength` is an inverse regularization parameter: multiplying the
//! objective by `strength * S` gives `strength * sum(loss) + R(w)`. The
//! intercept is not penalized.

use ndarray::{Array1, ArrayView1, ArrayView2};

use super::{Dataset, Penalty};
use crate::error::{Error, Result};
use crate::model::Label;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Stop once the largest parameter change in one step is below this.
    pub tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iter: 2000,
            tol: 1e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogRegModel {
    pub weights: Array1<f64>,
    pub intercept: f64,
    pub penalty: Penalty,
    pub strength: f64,
    /// False when `max_iter` was reached first.
    pub converged: bool,
    pub iterations: usize,
}

impl LogRegModel {
    pub fn decision(&self, x: ArrayView2<'_, f64>) -> Array1<f64> {
        x.dot(&self.weights) + self.intercept
    }

    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Vec<Label> {
        self.decision(x)
            .iter()
            .map(|&z| if z > 0.0 { Label::Case } else { Label::Control })
            .collect()
    }

    /// Fraction of rows classified correctly; `y` holds 0/1 targets.
    pub fn accuracy(&self, x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>) -> f64 {
        let z = self.decision(x);
        let hits = z.iter().zip(y.iter()).filter(|(&z, &t)| (z > 0.0) == (t > 0.5)).count();
        hits as f64 / y.len().max(1) as f64
    }

    /// Weights that are exactly zero.
    pub fn sparsity(&self) -> usize {
        self.weights.iter().filter(|&&w| w == 0.0).count()
    }
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn penalty_weight(strength: f64, n: usize) -> f64 {
    1.0 / (strength * n as f64)
}

/// Smooth part: mean logistic loss plus the L2 term when applicable.
fn smooth(x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>, w: &Array1<f64>, b: f64, penalty: Penalty, lambda: f64) -> f64 {
    let z = x.dot(w) + b;
    let loss = z.iter().zip(y.iter()).map(|(&z, &t)| softplus(z) - t * z).sum::<f64>() / y.len() as f64;
    match penalty {
        Penalty::L2 => loss + 0.5 * lambda * w.dot(w),
        Penalty::L1 => loss,
    }
}

fn smooth_grad(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    w: &Array1<f64>,
    b: f64,
    penalty: Penalty,
    lambda: f64,
) -> (Array1<f64>, f64) {
    let n = y.len() as f64;
    let z = x.dot(w) + b;
    let r: Array1<f64> = z.iter().zip(y.iter()).map(|(&z, &t)| (sigmoid(z) - t) / n).collect();
    let mut gw = x.t().dot(&r);
    if penalty == Penalty::L2 {
        gw.scaled_add(lambda, w);
    }
    (gw, r.sum())
}

/// Full penalized objective at `(w, b)`.
pub fn objective(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    w: &Array1<f64>,
    b: f64,
    penalty: Penalty,
    strength: f64,
) -> f64 {
    let lambda = penalty_weight(strength, y.len());
    let s = smooth(x, y, w, b, penalty, lambda);
    match penalty {
        Penalty::L1 => s + lambda * w.iter().map(|v| v.abs()).sum::<f64>(),
        Penalty::L2 => s,
    }
}

/// Analytic gradient of [`objective`]; for L1 it is the gradient wherever no
/// weight is exactly zero.
pub fn objective_gradient(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    w: &Array1<f64>,
    b: f64,
    penalty: Penalty,
    strength: f64,
) -> (Array1<f64>, f64) {
    let lambda = penalty_weight(strength, y.len());
    let (mut gw, gb) = smooth_grad(x, y, w, b, penalty, lambda);
    if penalty == Penalty::L1 {
        gw.zip_mut_with(w, |g, &v| *g += lambda * v.signum() * f64::from(u8::from(v != 0.0)));
    }
    (gw, gb)
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

pub fn fit_logreg(d: &Dataset, penalty: Penalty, strength: f64, opts: &FitOptions) -> Result<LogRegModel> {
    let rows: Vec<usize> = (0..d.n_subjects()).collect();
    fit_arrays(d.features(), d.targets(&rows).view(), penalty, strength, opts)
}

pub(crate) fn fit_arrays(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    penalty: Penalty,
    strength: f64,
    opts: &FitOptions,
) -> Result<LogRegModel> {
    fit_arrays_from(x, y, penalty, strength, opts, None)
}

/// [`fit_arrays`] started from `init` instead of zero. Used to walk a grid of
/// strengths, where the previous solution is close to the next one.
pub(crate) fn fit_arrays_from(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    penalty: Penalty,
    strength: f64,
    opts: &FitOptions,
    init: Option<&LogRegModel>,
) -> Result<LogRegModel> {
    if !(strength > 0.0 && strength.is_finite()) {
        return Err(Error::InvalidArgument(format!("strength = {strength}, need > 0")));
    }
    if x.nrows() != y.len() || y.is_empty() {
        return Err(Error::Shape(format!("{} rows, {} targets", x.nrows(), y.len())));
    }
    let lambda = penalty_weight(strength, y.len());
    let f = x.ncols();
    let prox = |w: Array1<f64>, step: f64| match penalty {
        Penalty::L1 => w.mapv(|v| soft_threshold(v, lambda * step)),
        Penalty::L2 => w,
    };

    let (mut w, mut b) = match init {
        Some(m) if m.weights.len() == f => (m.weights.clone(), m.intercept),
        _ => (Array1::<f64>::zeros(f), 0.0),
    };
    let mut w_prev = w.clone();
    let mut b_prev = b;
    let mut momentum = 1.0_f64;
    let mut lipschitz = 1.0_f64;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        let next_momentum = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
        let beta = (momentum - 1.0) / next_momentum;
        let yw = &w + &((&w - &w_prev) * beta);
        let yb = b + beta * (b - b_prev);

        let fy = smooth(x, y, &yw, yb, penalty, lambda);
        let (gw, gb) = smooth_grad(x, y, &yw, yb, penalty, lambda);
        if !fy.is_finite() {
            return Err(Error::Solver("logistic loss is not finite".into()));
        }
        let (cw, cb) = loop {
            let step = 1.0 / lipschitz;
            let cw = prox(&yw - &(&gw * step), step);
            let cb = yb - gb * step;
            let dw = &cw - &yw;
            let db = cb - yb;
            let model = fy + gw.dot(&dw) + gb * db + 0.5 * lipschitz * (dw.dot(&dw) + db * db);
            if smooth(x, y, &cw, cb, penalty, lambda) <= model + 1e-12 * fy.abs() || lipschitz > 1e12 {
                break (cw, cb);
            }
            lipschitz *= 2.0;
        };

        // Restart momentum when the step points against the last move.
        let along = (&yw - &cw).dot(&(&cw - &w)) + (yb - cb) * (cb - b);
        momentum = if along > 0.0 { 1.0 } else { next_momentum };

        let change = (&cw - &w).iter().fold((cb - b).abs(), |m, v| m.max(v.abs()));
        w_prev = std::mem::replace(&mut w, cw);
        b_prev = std::mem::replace(&mut b, cb);
        if !change.is_finite() {
            return Err(Error::Solver("parameters diverged".into()));
        }
        if change < opts.tol {
            converged = true;
            break;
        }
    }
    Ok(LogRegModel {
        weights: w,
        intercept: b,
        penalty,
        strength,
        converged,
        iterations,
    })
}
