//! Case/control screening from connectivity features: penalized logistic
//! regression, class balancing, stratified resampling and grid search.

mod eval;
mod logreg;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{vectorize_upper, ConnectivityMatrix, Label, Measure};

pub use eval::{
    downsample_balanced, grid_search_eval, stratified_folds, stratified_split, EvalOptions, EvalReport, GridPoint,
    Protocol, GRID_STRENGTHS,
};
pub use logreg::{fit_logreg, objective, objective_gradient, FitOptions, LogRegModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Penalty {
    L1,
    L2,
}

/// Subjects-by-features design matrix with binary labels.
#[derive(Debug, Clone)]
pub struct Dataset {
    features: Array2<f64>,
    labels: Vec<Label>,
    measure: Option<Measure>,
}

impl Dataset {
    pub fn new(features: Array2<f64>, labels: Vec<Label>, measure: Option<Measure>) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::InvalidDataset(format!(
                "{} feature rows but {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        if let Some(((row, col), _)) = features.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!("non-finite feature at ({row}, {col})")));
        }
        if !labels.contains(&Label::Case) || !labels.contains(&Label::Control) {
            return Err(Error::InvalidDataset("both classes must be present".into()));
        }
        Ok(Dataset {
            features,
            labels,
            measure,
        })
    }

    /// Stacks the upper-triangle vectorizations of per-subject matrices.
    pub fn from_matrices(matrices: &[ConnectivityMatrix], labels: Vec<Label>) -> Result<Self> {
        let first = matrices
            .first()
            .ok_or_else(|| Error::InvalidDataset("no matrices".into()))?;
        let measure = first.measure();
        let rows = matrices
            .iter()
            .map(|m| {
                if m.measure() != measure || m.n() != first.n() {
                    return Err(Error::Mixed("matrices differ in measure or size".into()));
                }
                vectorize_upper(m).map(|f| f.values)
            })
            .collect::<Result<Vec<_>>>()?;
        let width = rows[0].len();
        let features = Array2::from_shape_vec((rows.len(), width), rows.concat())
            .map_err(|e| Error::Shape(e.to_string()))?;
        Self::new(features, labels, Some(measure))
    }

    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.features.view()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn measure(&self) -> Option<Measure> {
        self.measure
    }

    pub fn n_subjects(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub(crate) fn targets(&self, rows: &[usize]) -> Array1<f64> {
        rows.iter().map(|&r| self.labels[r].as_index() as f64).collect()
    }

    pub(crate) fn rows(&self, rows: &[usize]) -> Array2<f64> {
        self.features.select(Axis(0), rows)
    }

    pub fn class_indices(&self, label: Label) -> Vec<usize> {
        (0..self.labels.len()).filter(|&i| self.labels[i] == label).collect()
    }
}

/// Per-feature z-scoring fitted on training rows only.
#[derive(Debug, Clone)]
pub struct Standardizer {
    mean: Array1<f64>,
    scale: Array1<f64>,
}

impl Standardizer {
    pub fn fit(x: ArrayView2<'_, f64>) -> Self {
        let mean = x.mean_axis(Axis(0)).unwrap_or_else(|| Array1::zeros(x.ncols()));
        let scale = x.std_axis(Axis(0), 0.0).mapv(|s| if s > 0.0 { s } else { 1.0 });
        Standardizer { mean, scale }
    }

    pub fn transform(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        (&x - &self.mean) / &self.scale
    }
}
