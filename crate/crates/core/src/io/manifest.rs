use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::formats::{read_matrix, DataFormat};
use crate::error::{Error, Result};
use crate::model::{validate_scan, Label, RoiMatrix, SubjectScan};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub subject_id: String,
    pub label: Label,
    /// ROI files relative to the manifest directory, in ROI order.
    pub rois: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Manifest {
    pub subjects: Vec<ManifestEntry>,
}

/// A dataset directory described by its manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectFileSet {
    pub root: PathBuf,
    pub manifest: Manifest,
}

impl SubjectFileSet {
    /// Opens `path`, either a manifest file or a directory holding
    /// `manifest.json`, and checks that every listed file exists and that all
    /// subjects have the same ROI count.
    pub fn open(path: &Path) -> Result<Self> {
        let file = if path.is_dir() { path.join(MANIFEST_NAME) } else { path.to_path_buf() };
        let text = fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
        let manifest: Manifest =
            serde_json::from_str(&text).map_err(|e| Error::format(&file, e.to_string()))?;
        let root = file.parent().map(Path::to_path_buf).unwrap_or_default();
        let set = SubjectFileSet { root, manifest };
        set.check(&file)?;
        Ok(set)
    }

    fn check(&self, file: &Path) -> Result<()> {
        let subjects = &self.manifest.subjects;
        let first = subjects
            .first()
            .ok_or_else(|| Error::format(file, "manifest lists no subjects"))?;
        for s in subjects {
            if s.rois.len() != first.rois.len() {
                return Err(Error::format(
                    file,
                    format!(
                        "subject {} has {} ROIs, subject {} has {}",
                        s.subject_id,
                        s.rois.len(),
                        first.subject_id,
                        first.rois.len()
                    ),
                ));
            }
            for r in &s.rois {
                let p = self.root.join(r);
                if !p.is_file() {
                    return Err(Error::io(p, std::io::Error::from(std::io::ErrorKind::NotFound)));
                }
            }
        }
        Ok(())
    }

    pub fn labels(&self) -> Vec<Label> {
        self.manifest.subjects.iter().map(|s| s.label).collect()
    }

    pub fn subject_ids(&self) -> Vec<String> {
        self.manifest.subjects.iter().map(|s| s.subject_id.clone()).collect()
    }

    /// Loads every subject (in parallel, manifest order) and validates it.
    pub fn load(&self, format: DataFormat) -> Result<Vec<SubjectScan>> {
        self.manifest
            .subjects
            .par_iter()
            .map(|entry| {
                let rois = entry
                    .rois
                    .iter()
                    .enumerate()
                    .map(|(k, r)| Ok(RoiMatrix::from_raw(k, read_matrix(&self.root.join(r), format)?)))
                    .collect::<Result<Vec<_>>>()?;
                let scan = SubjectScan {
                    subject_id: entry.subject_id.clone(),
                    label: entry.label,
                    rois,
                };
                validate_scan(&scan)
                    .into_result()
                    .map_err(|e| Error::InvalidScan(format!("subject {}: {e}", entry.subject_id)))?;
                Ok(scan)
            })
            .collect()
    }
}

pub fn load_subjects(path: &Path, format: DataFormat) -> Result<Vec<SubjectScan>> {
    SubjectFileSet::open(path)?.load(format)
}
