//! Per-subject N x N connectivity matrices.
//!
//! Each unordered ROI pair is one work unit. Pairs are enumerated in a fixed
//! row-major order over the strict upper triangle, evaluated independently and
//! written back to disjoint cells, so the result does not depend on the
//! number of threads or on scheduling.

use ndarray::{Array1, Array2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dependence::{dcor, pearson, representative, RepresentativeMethod};
use crate::error::{Error, Result};
use crate::model::{validate_scan, zscore_rows, ConnectivityMatrix, Measure, RoiMatrix, SubjectScan};
use crate::ot::{wfc, PcaBasis, SinkhornOptions, WfcOptions, WfcSolver};

/// Everything needed to turn a scan into a connectivity matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MeasureConfig {
    pub measure: Measure,
    /// z-score every voxel series before the measure is applied.
    pub standardize: bool,
    /// Ground metric exponent for the Wasserstein measures.
    pub p: f64,
    /// Report W_p (true) or W_p^p (false).
    pub root: bool,
    pub sinkhorn: SinkhornOptions,
    /// Time-domain PCA before transport, as a fraction of t.
    pub pca_fraction: Option<f64>,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        MeasureConfig {
            measure: Measure::WfcExact,
            standardize: true,
            p: 2.0,
            root: true,
            sinkhorn: SinkhornOptions::default(),
            pca_fraction: None,
        }
    }
}

impl MeasureConfig {
    pub fn new(measure: Measure) -> Self {
        MeasureConfig {
            measure,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.measure.is_distance() {
            if !(self.p >= 1.0 && self.p.is_finite()) {
                return Err(Error::InvalidArgument(format!("p = {}, need p >= 1", self.p)));
            }
            if let Some(f) = self.pca_fraction {
                crate::ot::retained_components(f, 2)?;
            }
            if self.measure == Measure::WfcSinkhorn && !(self.sinkhorn.epsilon > 0.0 && self.sinkhorn.tol > 0.0) {
                return Err(Error::InvalidArgument("sinkhorn epsilon and tol must be positive".into()));
            }
        } else if self.pca_fraction.is_some() {
            return Err(Error::InvalidArgument(format!(
                "pca fraction only applies to Wasserstein measures, not {}",
                self.measure
            )));
        }
        Ok(())
    }

    pub fn wfc_options(&self) -> WfcOptions {
        let solver = match self.measure {
            Measure::WfcSinkhorn => WfcSolver::Sinkhorn(self.sinkhorn),
            _ => WfcSolver::Exact,
        };
        WfcOptions {
            p: self.p,
            solver,
            root: self.root,
        }
    }

    pub fn representative_method(&self) -> Option<RepresentativeMethod> {
        match self.measure {
            Measure::PearsonMean => Some(RepresentativeMethod::Mean),
            Measure::PearsonFirstPc => Some(RepresentativeMethod::FirstPc),
            _ => None,
        }
    }
}

/// Per-ROI inputs after standardization and any per-ROI preprocessing.
enum Prepared {
    Series(Vec<Array1<f64>>),
    Rois(Vec<RoiMatrix>),
}

fn prepare(rois: &[RoiMatrix], cfg: &MeasureConfig) -> Result<Prepared> {
    let rois: Vec<RoiMatrix> = if cfg.standardize {
        rois.iter().map(|r| zscore_rows(r).map(|z| z.roi)).collect::<Result<_>>()?
    } else {
        rois.to_vec()
    };
    if let Some(method) = cfg.representative_method() {
        let series = rois
            .iter()
            .map(|r| representative(r, method).map(|rep| rep.series))
            .collect::<Result<_>>()?;
        return Ok(Prepared::Series(series));
    }
    match cfg.pca_fraction {
        Some(fraction) if cfg.measure.is_distance() => {
            let basis = PcaBasis::fit(&rois, fraction)?;
            let reduced = rois.iter().map(|r| basis.reduce(r)).collect::<Result<_>>()?;
            Ok(Prepared::Rois(reduced))
        }
        _ => Ok(Prepared::Rois(rois)),
    }
}

fn pair_value(prepared: &Prepared, cfg: &MeasureConfig, i: usize, j: usize) -> Result<f64> {
    match prepared {
        Prepared::Series(s) => pearson(s[i].view(), s[j].view()),
        Prepared::Rois(r) => match cfg.measure {
            Measure::Dcor => dcor(&r[i], &r[j]),
            _ => wfc(&r[i], &r[j], &cfg.wfc_options()),
        },
    }
}

/// The configured measure for a single ROI pair, computed exactly as the
/// engine computes one off-diagonal entry.
pub fn measure_pair(x: &RoiMatrix, y: &RoiMatrix, cfg: &MeasureConfig) -> Result<f64> {
    cfg.validate()?;
    let prepared = prepare(&[x.clone(), y.clone()], cfg)?;
    pair_value(&prepared, cfg, 0, 1)
}

/// Strict upper-triangle pairs `(i, j)`, `i < j`, in row-major order.
pub fn upper_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect()
}

/// Computes the connectivity matrix on the current rayon pool.
pub fn compute_connectivity(s: &SubjectScan, cfg: &MeasureConfig) -> Result<ConnectivityMatrix> {
    cfg.validate()?;
    validate_scan(s).into_result()?;
    let prepared = prepare(&s.rois, cfg)?;
    let n = s.n_rois();
    let pairs = upper_pairs(n);
    let values: Vec<Result<f64>> = pairs.par_iter().map(|&(i, j)| pair_value(&prepared, cfg, i, j)).collect();

    let mut m = Array2::from_elem((n, n), cfg.measure.diagonal_convention().value());
    for (&(i, j), v) in pairs.iter().zip(values) {
        let v = v.map_err(|e| Error::Pair {
            i,
            j,
            source: Box::new(e),
        })?;
        m[[i, j]] = v;
        m[[j, i]] = v;
    }
    ConnectivityMatrix::new(m, cfg.measure, cfg.measure.diagonal_convention())
}

/// [`compute_connectivity`] on a dedicated pool of `threads` workers.
pub fn compute_connectivity_with_threads(
    s: &SubjectScan,
    cfg: &MeasureConfig,
    threads: usize,
) -> Result<ConnectivityMatrix> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| compute_connectivity(s, cfg))
}

/// Connectivity matrices for many subjects, in input order.
pub fn compute_all(scans: &[SubjectScan], cfg: &MeasureConfig) -> Result<Vec<ConnectivityMatrix>> {
    scans
        .par_iter()
        .map(|s| {
            compute_connectivity(s, cfg).map_err(|e| Error::InvalidScan(format!("subject '{}': {e}", s.subject_id)))
        })
        .collect()
}
