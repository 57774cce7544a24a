use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use super::{check_problem, frobenius, CostMatrix, TransportPlan};
use crate::error::{Error, Result};

/// Log-domain updates are used when `min(M) / epsilon` exceeds this.
pub const LOG_DOMAIN_THRESHOLD: f64 = 30.0;

/// Beyond this `max(M) / epsilon` some kernel entries underflow to zero.
const KERNEL_UNDERFLOW: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SinkhornOptions {
    /// Entropic regularization strength, in the units of the cost matrix.
    pub epsilon: f64,
    /// Stop once the l1 violation of the row marginals falls below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SinkhornOptions {
    fn default() -> Self {
        SinkhornOptions {
            epsilon: 0.05,
            tol: 1e-9,
            max_iter: 10_000,
        }
    }
}

/// Entropy-regularized transport by alternating row/column scaling.
///
/// Hitting `max_iter` is reported through `converged = false`, not as an
/// error. Kernel underflow is avoided by switching to log-domain potentials.
pub fn solve_sinkhorn(
    a: ArrayView1<'_, f64>,
    b: ArrayView1<'_, f64>,
    m: &CostMatrix,
    opts: &SinkhornOptions,
) -> Result<TransportPlan> {
    check_problem(a, b, m)?;
    if !(opts.epsilon > 0.0 && opts.epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!("epsilon = {}, need > 0", opts.epsilon)));
    }
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tol = {}, need > 0", opts.tol)));
    }
    let min = m.entries.iter().fold(f64::INFINITY, |acc, &v| acc.min(v));
    let max = m.max_entry();
    if min / opts.epsilon > LOG_DOMAIN_THRESHOLD || max / opts.epsilon > KERNEL_UNDERFLOW {
        return Ok(log_domain(a, b, m, opts));
    }
    Ok(scaling(a, b, m, opts).unwrap_or_else(|| log_domain(a, b, m, opts)))
}

/// Plain kernel scaling; `None` when the iterates stop being finite.
fn scaling(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>, m: &CostMatrix, opts: &SinkhornOptions) -> Option<TransportPlan> {
    let kernel = m.entries.mapv(|c| (-c / opts.epsilon).exp());
    let (n, k) = kernel.dim();
    let mut u = Array1::<f64>::ones(n);
    let mut v = Array1::<f64>::ones(k);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let kv = kernel.dot(&v);
        u = &a / &kv;
        let ktu = kernel.t().dot(&u);
        v = &b / &ktu;
        if !u.iter().chain(v.iter()).all(|x| x.is_finite()) {
            return None;
        }
        let rows = &u * &kernel.dot(&v);
        let err: f64 = rows.iter().zip(a).map(|(r, w)| (r - w).abs()).sum();
        if err < opts.tol {
            converged = true;
            break;
        }
    }
    let coupling = Array2::from_shape_fn((n, k), |(i, j)| u[i] * kernel[[i, j]] * v[j]);
    if !coupling.iter().all(|x| x.is_finite()) {
        return None;
    }
    let objective = frobenius(&coupling, &m.entries);
    Some(TransportPlan {
        coupling,
        objective,
        converged,
        iterations,
        log_domain: false,
    })
}

fn log_sum_exp(it: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = it.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + it.map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Scaling on dual potentials `f`, `g`, with plan `exp((f_i + g_j - M_ij) / eps)`.
fn log_domain(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>, m: &CostMatrix, opts: &SinkhornOptions) -> TransportPlan {
    let eps = opts.epsilon;
    let cost = &m.entries;
    let (n, k) = cost.dim();
    let log_a = a.mapv(f64::ln);
    let log_b = b.mapv(f64::ln);
    let mut f = Array1::<f64>::zeros(n);
    let mut g = Array1::<f64>::zeros(k);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        for i in 0..n {
            let lse = log_sum_exp((0..k).map(|j| (g[j] - cost[[i, j]]) / eps));
            f[i] = eps * (log_a[i] - lse);
        }
        for j in 0..k {
            let lse = log_sum_exp((0..n).map(|i| (f[i] - cost[[i, j]]) / eps));
            g[j] = eps * (log_b[j] - lse);
        }
        let err: f64 = (0..n)
            .map(|i| {
                let row: f64 = (0..k).map(|j| ((f[i] + g[j] - cost[[i, j]]) / eps).exp()).sum();
                (row - a[i]).abs()
            })
            .sum();
        if err < opts.tol {
            converged = true;
            break;
        }
    }
    let coupling = Array2::from_shape_fn((n, k), |(i, j)| ((f[i] + g[j] - cost[[i, j]]) / eps).exp());
    let objective = frobenius(&coupling, cost);
    TransportPlan {
        coupling,
        objective,
        converged,
        iterations,
        log_domain: true,
    }
}
