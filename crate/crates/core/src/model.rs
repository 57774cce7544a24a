//! Shared data types: ROI signals, subject scans, connectivity matrices and
//! their feature-vector form, plus row standardization and scan validation.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One region's multivariate signal: rows are voxels, columns are time points.
#[derive(Debug, Clone, PartialEq)]
pub struct RoiMatrix {
    roi_id: usize,
    data: Array2<f64>,
}

impl RoiMatrix {
    /// Builds a checked ROI: at least one voxel, at least two time points,
    /// every entry finite.
    pub fn new(roi_id: usize, data: Array2<f64>) -> Result<Self> {
        let roi = Self::from_raw(roi_id, data);
        roi.check()?;
        Ok(roi)
    }

    /// Wraps a matrix without any checks. Use [`validate_scan`] afterwards
    /// when the data comes from outside.
    pub fn from_raw(roi_id: usize, data: Array2<f64>) -> Self {
        RoiMatrix { roi_id, data }
    }

    pub fn from_rows(roi_id: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let t = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != t) {
            return Err(Error::Shape("ragged rows".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let data = Array2::from_shape_vec((rows.len(), t), flat)
            .map_err(|e| Error::Shape(e.to_string()))?;
        Self::new(roi_id, data)
    }

    fn check(&self) -> Result<()> {
        let (n, t) = self.data.dim();
        if n == 0 {
            return Err(Error::Shape("ROI has no voxels".into()));
        }
        if t < 2 {
            return Err(Error::Shape(format!("ROI has {t} time points, need at least 2")));
        }
        if let Some(((row, col), _)) = self.data.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { row, col });
        }
        Ok(())
    }

    pub fn roi_id(&self) -> usize {
        self.roi_id
    }

    pub fn n_voxels(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_timepoints(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> ArrayView2<'_, f64> {
        self.data.view()
    }

    pub fn voxel(&self, i: usize) -> ArrayView1<'_, f64> {
        self.data.row(i)
    }

    pub fn into_data(self) -> Array2<f64> {
        self.data
    }
}

/// Diagnostic class of a subject.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Control,
    Case,
}

impl Label {
    pub fn as_index(self) -> usize {
        match self {
            Label::Control => 0,
            Label::Case => 1,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        match i {
            0 => Some(Label::Control),
            1 => Some(Label::Case),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubjectScan {
    pub subject_id: String,
    pub label: Label,
    pub rois: Vec<RoiMatrix>,
}

impl SubjectScan {
    pub fn n_rois(&self) -> usize {
        self.rois.len()
    }

    pub fn n_timepoints(&self) -> Option<usize> {
        self.rois.first().map(RoiMatrix::n_timepoints)
    }
}

/// Which connectivity measure produced a matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Measure {
    #[serde(rename = "pearson-mean")]
    PearsonMean,
    #[serde(rename = "pearson-1pc")]
    PearsonFirstPc,
    #[serde(rename = "dcor")]
    Dcor,
    #[serde(rename = "wfc-exact")]
    WfcExact,
    #[serde(rename = "wfc-sinkhorn")]
    WfcSinkhorn,
}

impl Measure {
    pub const ALL: [Measure; 5] = [
        Measure::PearsonMean,
        Measure::PearsonFirstPc,
        Measure::Dcor,
        Measure::WfcExact,
        Measure::WfcSinkhorn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::PearsonMean => "pearson-mean",
            Measure::PearsonFirstPc => "pearson-1pc",
            Measure::Dcor => "dcor",
            Measure::WfcExact => "wfc-exact",
            Measure::WfcSinkhorn => "wfc-sinkhorn",
        }
    }

    pub fn is_distance(self) -> bool {
        matches!(self, Measure::WfcExact | Measure::WfcSinkhorn)
    }

    pub fn diagonal_convention(self) -> DiagonalConvention {
        if self.is_distance() {
            DiagonalConvention::DistanceZero
        } else {
            DiagonalConvention::SimilarityOne
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Measure::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown measure '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagonalConvention {
    SimilarityOne,
    DistanceZero,
}

impl DiagonalConvention {
    pub fn value(self) -> f64 {
        match self {
            DiagonalConvention::SimilarityOne => 1.0,
            DiagonalConvention::DistanceZero => 0.0,
        }
    }
}

/// Square symmetric matrix of pairwise ROI connectivity values.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectivityMatrix {
    values: Array2<f64>,
    measure: Measure,
    diagonal: DiagonalConvention,
}

impl ConnectivityMatrix {
    /// Wraps `values`, which must be square, at least 2x2, finite and exactly
    /// symmetric.
    pub fn new(values: Array2<f64>, measure: Measure, diagonal: DiagonalConvention) -> Result<Self> {
        let (r, c) = values.dim();
        if r != c || r < 2 {
            return Err(Error::Shape(format!("connectivity matrix must be square with N >= 2, got {r}x{c}")));
        }
        if let Some(((row, col), _)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { row, col });
        }
        check_symmetric(values.view())?;
        Ok(ConnectivityMatrix {
            values,
            measure,
            diagonal,
        })
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[[i, j]]
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn diagonal(&self) -> DiagonalConvention {
        self.diagonal
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }
}

fn check_symmetric(values: ArrayView2<'_, f64>) -> Result<()> {
    let n = values.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            // Exact mirror expected, no tolerance.
            if values[[i, j]] != values[[j, i]] {
                return Err(Error::Asymmetric { row: i, col: j });
            }
        }
    }
    Ok(())
}

/// Strict upper triangle of a connectivity matrix, row-major over `i < j`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub measure: Measure,
}

/// Number of unordered ROI pairs for `n` ROIs.
pub fn n_pairs(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Inverse of [`n_pairs`], if `len` is a triangular number with N >= 2.
pub fn n_from_pairs(len: usize) -> Option<usize> {
    let n = ((1.0 + (1.0 + 8.0 * len as f64).sqrt()) / 2.0).round() as usize;
    (n >= 2 && n_pairs(n) == len).then_some(n)
}

pub fn vectorize_upper(c: &ConnectivityMatrix) -> Result<FeatureVector> {
    let values = c.values();
    check_symmetric(values)?;
    let n = c.n();
    let mut out = Vec::with_capacity(n_pairs(n));
    for i in 0..n {
        for j in (i + 1)..n {
            out.push(values[[i, j]]);
        }
    }
    Ok(FeatureVector {
        values: out,
        measure: c.measure(),
    })
}

/// Rebuilds the symmetric matrix from its upper-triangle vectorization.
pub fn unvectorize_upper(f: &FeatureVector, diagonal: DiagonalConvention) -> Result<ConnectivityMatrix> {
    let n = n_from_pairs(f.values.len())
        .ok_or_else(|| Error::Shape(format!("{} is not a pair count N(N-1)/2 with N >= 2", f.values.len())))?;
    let mut m = Array2::from_elem((n, n), diagonal.value());
    let mut k = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            m[[i, j]] = f.values[k];
            m[[j, i]] = f.values[k];
            k += 1;
        }
    }
    ConnectivityMatrix::new(m, f.measure, diagonal)
}

/// Result of [`zscore_rows`]: the standardized ROI and the rows that had zero
/// variance and were mapped to zeros.
#[derive(Debug, Clone)]
pub struct Standardized {
    pub roi: RoiMatrix,
    pub constant_rows: Vec<usize>,
}

/// Standardizes every voxel series to mean 0 and population variance 1.
pub fn zscore_rows(m: &RoiMatrix) -> Result<Standardized> {
    let mut data = m.data().to_owned();
    let mut constant_rows = Vec::new();
    for (i, mut row) in data.rows_mut().into_iter().enumerate() {
        if let Some(col) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: i, col });
        }
        if !zscore_in_place(row.as_slice_mut().expect("standard layout")) {
            constant_rows.push(i);
        }
    }
    Ok(Standardized {
        roi: RoiMatrix::from_raw(m.roi_id(), data),
        constant_rows,
    })
}

/// Returns false (and zeroes the row) when the row is constant.
pub(crate) fn zscore_in_place(row: &mut [f64]) -> bool {
    let t = row.len() as f64;
    let mean = row.iter().sum::<f64>() / t;
    let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / t;
    let sd = var.sqrt();
    let scale = row.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if scale == 0.0 || sd <= 1e-10 * scale {
        row.iter_mut().for_each(|v| *v = 0.0);
        return false;
    }
    row.iter_mut().for_each(|v| *v = (*v - mean) / sd);
    true
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScanFailure {
    TooFewRois(usize),
    EmptyRoi { roi: usize },
    TooFewTimepoints { roi: usize, t: usize },
    InconsistentTimepoints { roi: usize, expected: usize, found: usize },
    NonFinite { roi: usize, row: usize, col: usize },
}

impl fmt::Display for ScanFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScanFailure::TooFewRois(n) => write!(f, "{n} ROIs, need at least 2"),
            ScanFailure::EmptyRoi { roi } => write!(f, "ROI {roi} has no voxels"),
            ScanFailure::TooFewTimepoints { roi, t } => write!(f, "ROI {roi} has {t} time points, need at least 2"),
            ScanFailure::InconsistentTimepoints { roi, expected, found } => {
                write!(f, "inconsistent t: ROI {roi} has {found} time points, expected {expected}")
            }
            ScanFailure::NonFinite { roi, row, col } => write!(f, "non-finite data in ROI {roi} at ({row}, {col})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    /// (voxels, time points) for every ROI, in scan order.
    pub roi_shapes: Vec<(usize, usize)>,
    pub n_rois: usize,
    pub n_timepoints: Option<usize>,
    pub failures: Vec<ScanFailure>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn into_result(self) -> Result<Self> {
        if self.is_ok() {
            Ok(self)
        } else {
            let msg = self.failures.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ");
            Err(Error::InvalidScan(msg))
        }
    }
}

pub fn validate_scan(s: &SubjectScan) -> ValidationReport {
    let roi_shapes: Vec<(usize, usize)> = s.rois.iter().map(|r| r.data().dim()).collect();
    let mut failures = Vec::new();
    if s.rois.len() < 2 {
        failures.push(ScanFailure::TooFewRois(s.rois.len()));
    }
    let expected = roi_shapes.first().map(|&(_, t)| t);
    for (k, (roi, &(n, t))) in s.rois.iter().zip(&roi_shapes).enumerate() {
        if n == 0 {
            failures.push(ScanFailure::EmptyRoi { roi: k });
        }
        if t < 2 {
            failures.push(ScanFailure::TooFewTimepoints { roi: k, t });
        }
        if let Some(e) = expected.filter(|&e| e != t) {
            failures.push(ScanFailure::InconsistentTimepoints {
                roi: k,
                expected: e,
                found: t,
            });
        }
        if let Some(((row, col), _)) = roi.data().indexed_iter().find(|(_, v)| !v.is_finite()) {
            failures.push(ScanFailure::NonFinite { roi: k, row, col });
        }
    }
    ValidationReport {
        roi_shapes,
        n_rois: s.rois.len(),
        n_timepoints: expected,
        failures,
    }
}
