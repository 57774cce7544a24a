use ndarray::{Array2, ArrayView2};

use super::CostMatrix;
use crate::error::{Error, Result};
use crate::model::RoiMatrix;

/// Entry `(i, j)` is `sum_k |x_ik - y_jk|^p`, the p-th power of the l^p
/// distance between voxel series `i` of `x` and `j` of `y`.
pub fn build_cost_matrix(x: &RoiMatrix, y: &RoiMatrix, p: f64) -> Result<CostMatrix> {
    ground_costs(x.data(), y.data(), p)
}

/// [`build_cost_matrix`] over raw point clouds (one point per row).
pub fn ground_costs(xd: ArrayView2<'_, f64>, yd: ArrayView2<'_, f64>, p: f64) -> Result<CostMatrix> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!("ground exponent p = {p}, need p >= 1")));
    }
    if xd.ncols() != yd.ncols() {
        return Err(Error::Shape(format!("point dimensions {} and {} differ", xd.ncols(), yd.ncols())));
    }
    let entries = Array2::from_shape_fn((xd.nrows(), yd.nrows()), |(i, j)| {
        let (xi, yj) = (xd.row(i), yd.row(j));
        let diffs = xi.iter().zip(yj.iter()).map(|(a, b)| (a - b).abs());
        if p == 1.0 {
            diffs.sum::<f64>()
        } else if p == 2.0 {
            diffs.map(|d| d * d).sum()
        } else {
            diffs.map(|d| d.powf(p)).sum()
        }
    });
    if let Some(((row, col), _)) = entries.indexed_iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::Solver(format!("cost overflow at ({row}, {col})")));
    }
    Ok(CostMatrix { entries, ground_p: p })
}
