//! Discrete optimal transport between uniform empirical measures whose atoms
//! are voxel time series, and the Wasserstein connectivity value built on it.

mod brute;
mod cost;
mod exact;
mod pca;
mod sinkhorn;

use std::cmp::Ordering;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::RoiMatrix;

pub use brute::{solve_bruteforce, BRUTEFORCE_MAX_ATOMS};
pub use cost::{build_cost_matrix, ground_costs};
pub use exact::solve_exact;
pub use pca::{pca_time_reduce, retained_components, PcaBasis};
pub use sinkhorn::{solve_sinkhorn, SinkhornOptions, LOG_DOMAIN_THRESHOLD};

/// Uniformly weighted point cloud in R^t.
#[derive(Debug, Clone)]
pub struct DiscreteMeasure<'a> {
    points: ArrayView2<'a, f64>,
    weights: Array1<f64>,
}

impl<'a> DiscreteMeasure<'a> {
    pub fn uniform(roi: &'a RoiMatrix) -> Self {
        let n = roi.n_voxels();
        DiscreteMeasure {
            points: roi.data(),
            weights: uniform_weights(n),
        }
    }

    pub fn points(&self) -> ArrayView2<'a, f64> {
        self.points
    }

    pub fn weights(&self) -> ArrayView1<'_, f64> {
        self.weights.view()
    }
}

pub fn uniform_weights(n: usize) -> Array1<f64> {
    Array1::from_elem(n, 1.0 / n as f64)
}

/// Pairwise ground costs `d(x_i, y_j)^p` with `d` the l^p metric.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    pub entries: Array2<f64>,
    pub ground_p: f64,
}

impl CostMatrix {
    /// Wraps an arbitrary nonnegative finite cost table (used directly by the
    /// solvers and in tests); `ground_p` is informational.
    pub fn from_entries(entries: Array2<f64>, ground_p: f64) -> Result<Self> {
        if let Some(((row, col), _)) = entries.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { row, col });
        }
        if entries.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidArgument("cost entries must be nonnegative".into()));
        }
        Ok(CostMatrix { entries, ground_p })
    }

    pub fn dim(&self) -> (usize, usize) {
        self.entries.dim()
    }

    pub fn max_entry(&self) -> f64 {
        self.entries.iter().fold(0.0_f64, |a, &v| a.max(v))
    }
}

/// A coupling in the transportation polytope with its transport cost.
#[derive(Debug, Clone)]
pub struct TransportPlan {
    pub coupling: Array2<f64>,
    pub objective: f64,
    /// False only when an iterative solver hit its iteration cap.
    pub converged: bool,
    pub iterations: usize,
    /// Sinkhorn ran with log-domain updates.
    pub log_domain: bool,
}

impl TransportPlan {
    /// Largest absolute deviation of the row and column sums from `a`, `b`.
    pub fn marginal_residual(&self, a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
        let rows = self.coupling.sum_axis(Axis(1));
        let cols = self.coupling.sum_axis(Axis(0));
        let r = rows.iter().zip(a).map(|(x, y)| (x - y).abs());
        let c = cols.iter().zip(b).map(|(x, y)| (x - y).abs());
        r.chain(c).fold(0.0, f64::max)
    }

    pub fn support_size(&self) -> usize {
        self.coupling.iter().filter(|&&v| v != 0.0).count()
    }
}

fn frobenius(coupling: &Array2<f64>, cost: &Array2<f64>) -> f64 {
    coupling.iter().zip(cost.iter()).map(|(t, c)| t * c).sum()
}

/// Checks that `a` and `b` are probability vectors of matching total mass and
/// that the cost table has shape `len(a) x len(b)`.
pub(crate) fn check_problem(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>, m: &CostMatrix) -> Result<()> {
    let (n, k) = m.dim();
    if a.len() != n || b.len() != k {
        return Err(Error::Shape(format!(
            "weights of length {} and {} do not match a {n}x{k} cost matrix",
            a.len(),
            b.len()
        )));
    }
    if n == 0 || k == 0 {
        return Err(Error::Shape("empty measure".into()));
    }
    for w in [a, b] {
        if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidArgument("weights must be finite and nonnegative".into()));
        }
        if (w.sum() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("weights sum to {}, expected 1", w.sum())));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WfcSolver {
    Exact,
    Sinkhorn(SinkhornOptions),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WfcOptions {
    /// Ground metric exponent, p >= 1.
    pub p: f64,
    pub solver: WfcSolver,
    /// Report W_p rather than W_p^p.
    pub root: bool,
}

impl Default for WfcOptions {
    fn default() -> Self {
        WfcOptions {
            p: 2.0,
            solver: WfcSolver::Exact,
            root: true,
        }
    }
}

/// Wasserstein functional connectivity between two ROIs: the optimal
/// transport cost between their uniform voxel-series measures.
///
/// ```
/// use mvconn::model::RoiMatrix;
/// use mvconn::ot::{wfc, WfcOptions};
///
/// let x = RoiMatrix::from_rows(0, &[vec![0.0, 0.0]]).unwrap();
/// let y = RoiMatrix::from_rows(1, &[vec![3.0, 4.0]]).unwrap();
/// assert_eq!(wfc(&x, &y, &WfcOptions::default()).unwrap(), 5.0);
/// ```
pub fn wfc(x: &RoiMatrix, y: &RoiMatrix, opts: &WfcOptions) -> Result<f64> {
    // Solve in a content-defined argument order so the value is bitwise
    // symmetric in (x, y).
    let (x, y) = if content_order(x, y) == Ordering::Greater { (y, x) } else { (x, y) };
    let cost = build_cost_matrix(x, y, opts.p)?;
    let a = uniform_weights(x.n_voxels());
    let b = uniform_weights(y.n_voxels());
    let plan = match opts.solver {
        WfcSolver::Exact => solve_exact(a.view(), b.view(), &cost)?,
        WfcSolver::Sinkhorn(s) => solve_sinkhorn(a.view(), b.view(), &cost, &s)?,
    };
    let value = plan.objective.max(0.0);
    Ok(if opts.root { value.powf(1.0 / opts.p) } else { value })
}

fn content_order(x: &RoiMatrix, y: &RoiMatrix) -> Ordering {
    let (dx, dy) = (x.data(), y.data());
    dx.dim().cmp(&dy.dim()).then_with(|| {
        dx.iter()
            .zip(dy.iter())
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_roi(rng: &mut ChaCha8Rng, n: usize, t: usize) -> RoiMatrix {
        RoiMatrix::new(0, Array2::from_shape_fn((n, t), |_| rng.random_range(-1.0..1.0))).unwrap()
    }

    #[test]
    fn wfc_of_identical_rois_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_roi(&mut rng, 5, 7);
        for p in [1.0, 2.0, 3.0] {
            let opts = WfcOptions { p, ..Default::default() };
            assert_eq!(wfc(&x, &x, &opts).unwrap(), 0.0);
        }
    }

    #[test]
    fn wfc_between_diracs_is_ground_distance() {
        let x = RoiMatrix::from_rows(0, &[vec![0.0, 0.0]]).unwrap();
        let y = RoiMatrix::from_rows(1, &[vec![3.0, 4.0]]).unwrap();
        let squared = WfcOptions { root: false, ..Default::default() };
        assert_eq!(wfc(&x, &y, &squared).unwrap(), 25.0);
        assert_eq!(wfc(&x, &y, &WfcOptions::default()).unwrap(), 5.0);
    }

    #[test]
    fn wfc_matches_permutation_oracle_for_two_by_three() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let x = random_roi(&mut rng, 2, 4);
            let y = random_roi(&mut rng, 3, 4);
            let cost = build_cost_matrix(&x, &y, 2.0).unwrap();
            let oracle = solve_bruteforce(uniform_weights(2).view(), uniform_weights(3).view(), &cost).unwrap();
            let got = wfc(&x, &y, &WfcOptions::default()).unwrap();
            assert!((got - oracle.objective.sqrt()).abs() < 1e-9);
        }
    }

    #[test]
    fn wfc_is_bitwise_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let (n, m) = (rng.random_range(1..8), rng.random_range(1..8));
            let x = random_roi(&mut rng, n, 5);
            let y = random_roi(&mut rng, m, 5);
            let o = WfcOptions::default();
            assert_eq!(wfc(&x, &y, &o).unwrap().to_bits(), wfc(&y, &x, &o).unwrap().to_bits());
        }
    }

    #[test]
    fn wfc_scales_homogeneously() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_roi(&mut rng, 4, 6);
        let y = random_roi(&mut rng, 3, 6);
        for p in [1.0, 1.5, 2.0, 3.0] {
            let opts = WfcOptions { p, ..Default::default() };
            let base = wfc(&x, &y, &opts).unwrap();
            let s = 2.75;
            let xs = RoiMatrix::new(0, x.data().mapv(|v| v * s)).unwrap();
            let ys = RoiMatrix::new(1, y.data().mapv(|v| v * s)).unwrap();
            let scaled = wfc(&xs, &ys, &opts).unwrap();
            assert!((scaled - s * base).abs() <= 1e-9 * scaled.max(1.0), "p={p}");
        }
    }

    #[test]
    fn wfc_ignores_voxel_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = random_roi(&mut rng, 6, 5);
        let y = random_roi(&mut rng, 4, 5);
        let base = wfc(&x, &y, &WfcOptions::default()).unwrap();
        let order = [3, 0, 5, 1, 4, 2];
        let shuffled = RoiMatrix::new(0, x.data().select(Axis(0), &order)).unwrap();
        let got = wfc(&shuffled, &y, &WfcOptions::default()).unwrap();
        assert!((got - base).abs() < 1e-9);
    }

    #[test]
    fn sinkhorn_wfc_approaches_exact() {
        let x = RoiMatrix::new(0, array![[0.0, 0.1], [0.5, 0.2]]).unwrap();
        let y = RoiMatrix::new(1, array![[0.3, 0.0], [0.4, 0.4], [0.1, 0.9]]).unwrap();
        let exact = wfc(&x, &y, &WfcOptions { root: false, ..Default::default() }).unwrap();
        let opts = WfcOptions {
            root: false,
            solver: WfcSolver::Sinkhorn(SinkhornOptions {
                epsilon: 1e-3,
                tol: 1e-12,
                max_iter: 200_000,
            }),
            ..Default::default()
        };
        let approx = wfc(&x, &y, &opts).unwrap();
        assert!((approx - exact).abs() < 1e-2, "{approx} vs {exact}");
    }

    #[test]
    fn options_round_trip_through_json() {
        let opts = WfcOptions {
            p: 1.0,
            solver: WfcSolver::Sinkhorn(SinkhornOptions::default()),
            root: false,
        };
        let s = serde_json::to_string(&opts).unwrap();
        assert_eq!(serde_json::from_str::<WfcOptions>(&s).unwrap(), opts);
        assert_eq!(serde_json::from_str::<WfcOptions>("{}").unwrap(), WfcOptions::default());
    }
}
