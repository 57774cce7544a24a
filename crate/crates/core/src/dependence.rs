//! Univariate path (ROI representative series compared by Pearson
//! correlation) and empirical distance correlation between whole ROIs.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::RoiMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RepresentativeMethod {
    Mean,
    FirstPc,
}

/// One time series summarizing a ROI.
#[derive(Debug, Clone, PartialEq)]
pub struct Representative {
    pub series: Array1<f64>,
    pub method: RepresentativeMethod,
    /// Set when the ROI carried no variance to summarize (first-pc only); the
    /// series is then all zeros.
    pub degenerate: bool,
}

pub fn representative(x: &RoiMatrix, method: RepresentativeMethod) -> Result<Representative> {
    if x.n_voxels() == 0 || x.n_timepoints() < 2 {
        return Err(Error::Shape(format!("ROI shape {:?} cannot be summarized", x.data().dim())));
    }
    let mean = x.data().mean_axis(Axis(0)).expect("n >= 1");
    match method {
        RepresentativeMethod::Mean => Ok(Representative {
            series: mean,
            method,
            degenerate: false,
        }),
        RepresentativeMethod::FirstPc => {
            let Some(w) = leading_direction(x.data()) else {
                return Ok(Representative {
                    series: Array1::zeros(x.n_timepoints()),
                    method,
                    degenerate: true,
                });
            };
            let mut series = x.data().t().dot(&w);
            // Eigenvectors are defined up to sign; orient along the mean.
            if pearson(series.view(), mean.view())? < 0.0 {
                series.mapv_inplace(|v| -v);
            }
            Ok(Representative {
                series,
                method,
                degenerate: false,
            })
        }
    }
}

/// Unit direction over voxels of maximal variance across time, or `None` if
/// the ROI has no temporal variance at all.
fn leading_direction(data: ArrayView2<'_, f64>) -> Option<Array1<f64>> {
    let (n, t) = data.dim();
    let time_mean = data.mean_axis(Axis(1)).expect("t >= 2");
    let centered = &data - &time_mean.insert_axis(Axis(1));
    let scale = centered.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    // Eigen-decompose whichever Gram matrix is smaller.
    let w = if n <= t {
        let gram = centered.dot(&centered.t());
        top_eigenvector(&gram)
    } else {
        let gram = centered.t().dot(&centered);
        let u = top_eigenvector(&gram);
        centered.dot(&u)
    };
    let norm = w.dot(&w).sqrt();
    (norm > 1e-12 * scale).then(|| w / norm)
}

fn top_eigenvector(sym: &Array2<f64>) -> Array1<f64> {
    let d = sym.nrows();
    let m = DMatrix::from_fn(d, d, |i, j| sym[[i, j]]);
    let eig = SymmetricEigen::new(m);
    let (best, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    Array1::from_iter(eig.eigenvectors.column(best).iter().copied())
}

/// Empirical Pearson correlation with centered numerator and denominator.
/// Returns 0 when either input is constant.
///
/// ```
/// use mvconn::dependence::pearson;
/// use ndarray::array;
///
/// let x = array![1.0, 2.0, 3.0];
/// assert!((pearson(x.view(), x.view()).unwrap() - 1.0).abs() < 1e-15);
/// assert!((pearson(x.view(), (-&x).view()).unwrap() + 1.0).abs() < 1e-15);
/// ```
pub fn pearson(x: ArrayView1<'_, f64>, y: ArrayView1<'_, f64>) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!("series lengths {} and {} differ", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::Shape("pearson needs at least 2 samples".into()));
    }
    let n = x.len() as f64;
    let (mx, my) = (x.sum() / n, y.sum() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y.iter()) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if is_flat(sxx, x) || is_flat(syy, y) {
        return Ok(0.0);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

fn is_flat(ss: f64, v: ArrayView1<'_, f64>) -> bool {
    let scale = v.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    scale == 0.0 || ss.sqrt() <= 1e-10 * scale * (v.len() as f64).sqrt()
}

/// `<x, y> / (|x| |y|)`; equals [`pearson`] when both inputs are z-scored.
pub fn normalized_inner_product(x: ArrayView1<'_, f64>, y: ArrayView1<'_, f64>) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!("series lengths {} and {} differ", x.len(), y.len())));
    }
    let (nx, ny) = (x.dot(&x).sqrt(), y.dot(&y).sqrt());
    if nx == 0.0 || ny == 0.0 {
        return Ok(0.0);
    }
    Ok(x.dot(&y) / (nx * ny))
}

/// Double-centered pairwise distance matrix: every row and column sums to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredDistanceMatrix {
    pub entries: Array2<f64>,
}

/// `A_kl = a_kl - mean_l(a_kl) - mean_k(a_kl) + mean(a)`.
pub fn double_center(d: ArrayView2<'_, f64>) -> Result<CenteredDistanceMatrix> {
    let (r, c) = d.dim();
    if r != c {
        return Err(Error::Shape(format!("distance matrix is {r}x{c}")));
    }
    for i in 0..r {
        for j in (i + 1)..r {
            if d[[i, j]] != d[[j, i]] {
                return Err(Error::Asymmetric { row: i, col: j });
            }
        }
    }
    let row_means = d.mean_axis(Axis(1)).unwrap_or_default();
    let col_means = d.mean_axis(Axis(0)).unwrap_or_default();
    let grand = d.mean().unwrap_or(0.0);
    let entries = Array2::from_shape_fn((r, r), |(k, l)| d[[k, l]] - row_means[k] - col_means[l] + grand);
    Ok(CenteredDistanceMatrix { entries })
}

/// Euclidean distances between the time samples (columns) of a ROI.
pub fn sample_distances(x: ArrayView2<'_, f64>) -> Array2<f64> {
    let t = x.ncols();
    let mut d = Array2::zeros((t, t));
    for k in 0..t {
        for l in (k + 1)..t {
            let s: f64 = x.column(k).iter().zip(x.column(l).iter()).map(|(a, b)| (a - b) * (a - b)).sum();
            d[[k, l]] = s.sqrt();
            d[[l, k]] = d[[k, l]];
        }
    }
    d
}

/// Empirical distance covariance and variances of two ROIs whose paired
/// observations are the `t` time samples (vectors over voxels).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceStats {
    pub dcov2: f64,
    pub dvar2_x: f64,
    pub dvar2_y: f64,
}

impl DistanceStats {
    /// `dCov^2 / sqrt(dVar^2(X) dVar^2(Y))`, or 0 when the denominator vanishes.
    pub fn dcor(&self) -> f64 {
        let denom = self.dvar2_x * self.dvar2_y;
        if denom <= 0.0 {
            return 0.0;
        }
        (self.dcov2 / denom.sqrt()).clamp(0.0, 1.0)
    }
}

pub fn distance_stats(x: &RoiMatrix, y: &RoiMatrix) -> Result<DistanceStats> {
    if x.n_timepoints() != y.n_timepoints() {
        return Err(Error::Shape(format!(
            "ROIs have {} and {} time points",
            x.n_timepoints(),
            y.n_timepoints()
        )));
    }
    let a = double_center(sample_distances(x.data()).view())?.entries;
    let b = double_center(sample_distances(y.data()).view())?.entries;
    let t2 = (x.n_timepoints() * x.n_timepoints()) as f64;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (p, q) in a.iter().zip(b.iter()) {
        cov += p * q;
        vx += p * p;
        vy += q * q;
    }
    Ok(DistanceStats {
        dcov2: cov / t2,
        dvar2_x: vx / t2,
        dvar2_y: vy / t2,
    })
}

/// Distance correlation between two ROIs, in `[0, 1]`.
///
/// This is the ratio `dCov^2 / sqrt(dVar^2 dVar^2)` itself (no square root),
/// and is 0 when either ROI is constant over time.
pub fn dcor(x: &RoiMatrix, y: &RoiMatrix) -> Result<f64> {
    Ok(distance_stats(x, y)?.dcor())
}
