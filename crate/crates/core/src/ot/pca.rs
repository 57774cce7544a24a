//! Time-domain PCA: voxel series are points in R^t; they are projected onto
//! the leading principal directions of their covariance over voxels.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2, Axis};

use crate::error::{Error, Result};
use crate::model::RoiMatrix;

/// Number of components kept for a fraction of `t`: `ceil(fraction * t)`.
pub fn retained_components(fraction: f64, t: usize) -> Result<usize> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!("PCA fraction {fraction} outside (0, 1]")));
    }
    // Guard against products like 0.1 * 30 = 3.0000000000000004.
    let k = (fraction * t as f64 - 1e-9).ceil() as usize;
    Ok(k.clamp(1, t))
}

/// Shared orthonormal basis fitted on a set of ROIs. Projecting every ROI of
/// a subject through one basis keeps cross-ROI ground distances comparable.
#[derive(Debug, Clone)]
pub struct PcaBasis {
    center: Array1<f64>,
    /// `k x t`, rows ordered by decreasing explained variance.
    components: Array2<f64>,
    explained: Vec<f64>,
}

impl PcaBasis {
    pub fn fit<'a>(rois: impl IntoIterator<Item = &'a RoiMatrix>, fraction: f64) -> Result<Self> {
        let rois: Vec<&RoiMatrix> = rois.into_iter().collect();
        let t = rois
            .first()
            .map(|r| r.n_timepoints())
            .ok_or_else(|| Error::InvalidArgument("PCA needs at least one ROI".into()))?;
        if t < 2 {
            return Err(Error::Shape("PCA needs t >= 2".into()));
        }
        if rois.iter().any(|r| r.n_timepoints() != t) {
            return Err(Error::Shape("ROIs disagree on t".into()));
        }
        let k = retained_components(fraction, t)?;

        let total: usize = rois.iter().map(|r| r.n_voxels()).sum();
        let mut center = Array1::<f64>::zeros(t);
        for r in &rois {
            center += &r.data().sum_axis(Axis(0));
        }
        center /= total as f64;

        let mut cov = DMatrix::<f64>::zeros(t, t);
        for r in &rois {
            for row in r.data().rows() {
                let d: Vec<f64> = row.iter().zip(center.iter()).map(|(x, c)| x - c).collect();
                for p in 0..t {
                    for q in p..t {
                        cov[(p, q)] += d[p] * d[q];
                    }
                }
            }
        }
        for p in 0..t {
            for q in 0..p {
                cov[(p, q)] = cov[(q, p)];
            }
        }
        cov /= total as f64;

        let eig = SymmetricEigen::new(cov);
        let mut order: Vec<usize> = (0..t).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]).then(i.cmp(&j)));
        let mut components = Array2::zeros((k, t));
        for (row, &idx) in order.iter().take(k).enumerate() {
            for q in 0..t {
                components[[row, q]] = eig.eigenvectors[(q, idx)];
            }
        }
        let explained = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
        Ok(PcaBasis {
            center,
            components,
            explained,
        })
    }

    pub fn n_components(&self) -> usize {
        self.components.nrows()
    }

    /// Eigenvalues of the fitted covariance, descending, for all `t` directions.
    pub fn spectrum(&self) -> &[f64] {
        &self.explained
    }

    /// Scores of `roi` in this basis: an `n x k` matrix.
    pub fn reduce(&self, roi: &RoiMatrix) -> Result<RoiMatrix> {
        if roi.n_timepoints() != self.center.len() {
            return Err(Error::Shape(format!(
                "basis fitted for t = {}, ROI has t = {}",
                self.center.len(),
                roi.n_timepoints()
            )));
        }
        let centered = &roi.data() - &self.center;
        // With k = 1 the result has a single column; transport costs accept
        // that even though it is below the usual t >= 2 for raw scans.
        Ok(RoiMatrix::from_raw(roi.roi_id(), centered.dot(&self.components.t())))
    }
}

/// Projects one ROI onto the top `ceil(fraction * t)` principal directions of
/// its own time-domain covariance.
pub fn pca_time_reduce(x: &RoiMatrix, fraction: f64) -> Result<RoiMatrix> {
    PcaBasis::fit([x], fraction)?.reduce(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ot::{wfc, WfcOptions};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_roi(rng: &mut ChaCha8Rng, id: usize, n: usize, t: usize) -> RoiMatrix {
        RoiMatrix::new(id, Array2::from_shape_fn((n, t), |_| rng.random_range(-1.0..1.0))).unwrap()
    }

    #[test]
    fn component_counts() {
        assert_eq!(retained_components(0.25, 40).unwrap(), 10);
        assert_eq!(retained_components(0.1, 30).unwrap(), 3);
        assert_eq!(retained_components(0.26, 10).unwrap(), 3);
        assert_eq!(retained_components(1.0, 7).unwrap(), 7);
        assert_eq!(retained_components(1e-6, 7).unwrap(), 1);
        assert!(retained_components(0.0, 7).is_err());
        assert!(retained_components(1.5, 7).is_err());
    }

    #[test]
    fn full_fraction_is_an_isometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let x = random_roi(&mut rng, 0, 6, 9);
            let y = random_roi(&mut rng, 1, 4, 9);
            let basis = PcaBasis::fit([&x, &y], 1.0).unwrap();
            let (xr, yr) = (basis.reduce(&x).unwrap(), basis.reduce(&y).unwrap());
            let before = wfc(&x, &y, &WfcOptions::default()).unwrap();
            let after = wfc(&xr, &yr, &WfcOptions::default()).unwrap();
            assert!((before - after).abs() < 1e-9);
        }
    }

    #[test]
    fn rank_one_data_survives_one_component() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let t = 12;
        let v: Vec<f64> = (0..t).map(|_| rng.random_range(-1.0..1.0)).collect();
        let make = |id, cs: &[f64]| RoiMatrix::new(id, Array2::from_shape_fn((cs.len(), t), |(i, q)| cs[i] * v[q])).unwrap();
        let x = make(0, &[0.5, -1.0, 2.0]);
        let y = make(1, &[1.5, 0.2]);
        let basis = PcaBasis::fit([&x, &y], 1.0 / t as f64).unwrap();
        assert_eq!(basis.n_components(), 1);
        let before = wfc(&x, &y, &WfcOptions::default()).unwrap();
        let after = wfc(&basis.reduce(&x).unwrap(), &basis.reduce(&y).unwrap(), &WfcOptions::default()).unwrap();
        assert!((before - after).abs() < 1e-9);
    }

    #[test]
    fn single_roi_reduction_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let x = random_roi(&mut rng, 3, 7, 20);
        let r = pca_time_reduce(&x, 0.25).unwrap();
        assert_eq!(r.data().dim(), (7, 5));
        assert_eq!(r.roi_id(), 3);
        assert!(pca_time_reduce(&x, 0.0).is_err());
    }
}
