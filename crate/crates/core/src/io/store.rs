//! On-disk layout for computed matrices: `DIR/<measure>/<subject>.<ext>` plus
//! an `index.json` listing subjects, labels and files in order.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::formats::{load_connectivity, save_matrix, DataFormat};
use crate::error::{Error, Result};
use crate::model::{ConnectivityMatrix, Label, Measure};

pub const INDEX_NAME: &str = "index.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredSubject {
    pub subject_id: String,
    pub label: Label,
    pub file: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreIndex {
    pub measure: Measure,
    pub format: DataFormat,
    pub subjects: Vec<StoredSubject>,
}

/// Matrices of one measure with their subjects, in index order.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSet {
    pub measure: Measure,
    pub subject_ids: Vec<String>,
    pub labels: Vec<Label>,
    pub matrices: Vec<ConnectivityMatrix>,
}

pub fn write_measure_set(root: &Path, set: &MeasureSet, format: DataFormat) -> Result<PathBuf> {
    if set.subject_ids.len() != set.matrices.len() || set.labels.len() != set.matrices.len() {
        return Err(Error::InvalidArgument("subject ids, labels and matrices differ in length".into()));
    }
    let dir = root.join(set.measure.name());
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut subjects = Vec::with_capacity(set.matrices.len());
    for ((id, &label), m) in set.subject_ids.iter().zip(&set.labels).zip(&set.matrices) {
        let file = PathBuf::from(format!("{id}.{}", format.extension()));
        save_matrix(m, &dir.join(&file), format.into())?;
        subjects.push(StoredSubject {
            subject_id: id.clone(),
            label,
            file,
        });
    }
    let index = StoreIndex {
        measure: set.measure,
        format,
        subjects,
    };
    let path = dir.join(INDEX_NAME);
    fs::write(&path, serde_json::to_string_pretty(&index)?).map_err(|e| Error::io(&path, e))?;
    Ok(dir)
}

pub fn read_measure_set(root: &Path, measure: Measure) -> Result<MeasureSet> {
    let dir = root.join(measure.name());
    let path = dir.join(INDEX_NAME);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let index: StoreIndex = serde_json::from_str(&text).map_err(|e| Error::format(&path, e.to_string()))?;
    if index.measure != measure {
        return Err(Error::format(&path, format!("index is for {}, expected {measure}", index.measure)));
    }
    let matrices = index
        .subjects
        .iter()
        .map(|s| load_connectivity(&dir.join(&s.file), index.format, measure))
        .collect::<Result<Vec<_>>>()?;
    Ok(MeasureSet {
        measure,
        subject_ids: index.subjects.iter().map(|s| s.subject_id.clone()).collect(),
        labels: index.subjects.iter().map(|s| s.label).collect(),
        matrices,
    })
}

/// Measures with an index under `root`, in [`Measure::ALL`] order.
pub fn stored_measures(root: &Path) -> Vec<Measure> {
    Measure::ALL
        .into_iter()
        .filter(|m| root.join(m.name()).join(INDEX_NAME).is_file())
        .collect()
}
