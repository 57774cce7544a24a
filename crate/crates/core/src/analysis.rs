//! Group-level summaries: mean matrices, case/control differences and
//! correlations between measures.

use ndarray::{Array1, Array2, Zip};
use serde::Serialize;

use crate::dependence::pearson;
use crate::error::{Error, Result};
use crate::model::{vectorize_upper, ConnectivityMatrix, DiagonalConvention, Label, Measure};

fn check_compatible(ms: &[ConnectivityMatrix]) -> Result<&ConnectivityMatrix> {
    let first = ms.first().ok_or_else(|| Error::InvalidArgument("empty matrix list".into()))?;
    for (k, m) in ms.iter().enumerate() {
        if m.measure() != first.measure() {
            return Err(Error::Mixed(format!(
                "matrix {k} is {} but matrix 0 is {}",
                m.measure(),
                first.measure()
            )));
        }
        if m.n() != first.n() {
            return Err(Error::Shape(format!("matrix {k} is {0}x{0}, expected {1}x{1}", m.n(), first.n())));
        }
    }
    Ok(first)
}

/// Entrywise mean over matrices that share size and measure.
pub fn mean_matrix(ms: &[ConnectivityMatrix]) -> Result<ConnectivityMatrix> {
    let first = check_compatible(ms)?;
    let mut sum = Array2::<f64>::zeros((first.n(), first.n()));
    for m in ms {
        sum += &m.values();
    }
    sum /= ms.len() as f64;
    ConnectivityMatrix::new(sum, first.measure(), first.diagonal())
}

/// `|mean(case) - mean(control)|`. The result carries the distance diagonal
/// convention since its diagonal is zero.
pub fn group_difference(case: &[ConnectivityMatrix], control: &[ConnectivityMatrix]) -> Result<ConnectivityMatrix> {
    let a = mean_matrix(case)?;
    let b = mean_matrix(control)?;
    check_compatible(&[a.clone(), b.clone()])?;
    let mut diff = Array2::zeros((a.n(), a.n()));
    Zip::from(&mut diff)
        .and(a.values())
        .and(b.values())
        .for_each(|d, &x, &y| *d = (x - y).abs());
    ConnectivityMatrix::new(diff, a.measure(), DiagonalConvention::DistanceZero)
}

/// Pearson correlation of the strict upper triangles. `None` when either
/// vectorization is constant and the correlation is undefined.
pub fn inter_measure_correlation(a: &ConnectivityMatrix, b: &ConnectivityMatrix) -> Result<Option<f64>> {
    if a.n() != b.n() {
        return Err(Error::Shape(format!("{0}x{0} vs {1}x{1}", a.n(), b.n())));
    }
    let x = Array1::from(vectorize_upper(a)?.values);
    let y = Array1::from(vectorize_upper(b)?.values);
    let flat = |v: &Array1<f64>| v.iter().all(|&e| e == v[0]);
    if flat(&x) || flat(&y) {
        return Ok(None);
    }
    pearson(x.view(), y.view()).map(Some)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisplayMatrix {
    pub matrix: ConnectivityMatrix,
    /// Set when a distance matrix was identically zero and mapped to all ones.
    pub degenerate: bool,
}

/// Display transform with a unit diagonal: distance-type matrices become
/// `1 - C / max(C)`, everything else passes through. For rendering only.
pub fn unit_diagonal_transform(c: &ConnectivityMatrix) -> DisplayMatrix {
    if c.diagonal() != DiagonalConvention::DistanceZero {
        return DisplayMatrix {
            matrix: c.clone(),
            degenerate: false,
        };
    }
    let max = c.values().iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let (values, degenerate) = if max > 0.0 {
        (c.values().mapv(|v| 1.0 - v / max), false)
    } else {
        (Array2::ones((c.n(), c.n())), true)
    };
    let matrix = ConnectivityMatrix::new(values, c.measure(), DiagonalConvention::SimilarityOne)
        .expect("elementwise map of a symmetric finite matrix");
    DisplayMatrix { matrix, degenerate }
}

/// One column of the cross-measure table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasurePairCorrelation {
    pub first: Measure,
    pub second: Measure,
    /// Correlation of the all-subject mean matrices.
    pub mean: Option<f64>,
    /// Correlation of the absolute case/control difference matrices.
    pub difference: Option<f64>,
}

/// Cross-measure correlations for every pair of measures, in input order.
/// `sets[k]` holds one measure's matrices in the same subject order as `labels`.
pub fn correlation_table(sets: &[Vec<ConnectivityMatrix>], labels: &[Label]) -> Result<Vec<MeasurePairCorrelation>> {
    if sets.len() < 2 {
        return Err(Error::InvalidArgument("need at least two measures".into()));
    }
    let mut summaries = Vec::with_capacity(sets.len());
    for set in sets {
        if set.len() != labels.len() {
            return Err(Error::InvalidDataset(format!(
                "{} matrices but {} labels",
                set.len(),
                labels.len()
            )));
        }
        let pick = |l: Label| -> Vec<ConnectivityMatrix> {
            set.iter().zip(labels).filter(|(_, &x)| x == l).map(|(m, _)| m.clone()).collect()
        };
        let mean = mean_matrix(set)?;
        let diff = group_difference(&pick(Label::Case), &pick(Label::Control))?;
        summaries.push((mean, diff));
    }
    let mut out = Vec::new();
    for i in 0..summaries.len() {
        for j in (i + 1)..summaries.len() {
            let (mi, di) = &summaries[i];
            let (mj, dj) = &summaries[j];
            out.push(MeasurePairCorrelation {
                first: mi.measure(),
                second: mj.measure(),
                mean: inter_measure_correlation(mi, mj)?,
                difference: inter_measure_correlation(di, dj)?,
            });
        }
    }
    Ok(out)
}
