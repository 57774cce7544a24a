//! Synthetic case/control populations with a planted group effect.
//!
//! Every subject starts from the same recipe: one smooth unit-variance latent
//! series per ROI plus voxel noise that is centered across the voxels of the
//! ROI, so the raw ROI mean series equals the latent exactly. ROI latents mix a
//! few shared AR(1) factors through population-wide loadings with a private
//! AR(1) part, which gives every population a stable connectivity pattern.
//! Case subjects then receive the effect on a fixed set of ROI pairs. A
//! subject's base draws depend only on `(seed, subject index)`, never on
//! its label, so a case subject can be compared with its own effect-free
//! counterfactual.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::formats::{write_bin, write_csv, DataFormat};
use super::manifest::{Manifest, ManifestEntry, SubjectFileSet, MANIFEST_NAME};
use crate::engine::upper_pairs;
use crate::error::{Error, Result};
use crate::model::{n_pairs, Label, RoiMatrix, SubjectScan};
use crate::seed::stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Effect {
    /// Affected pairs share an extra latent added to every voxel, so the ROI
    /// mean series become more correlated.
    MeanShift,
    /// Affected pairs share an extra latent added with balanced opposite signs
    /// across voxels: voxel-level structure changes, ROI means do not.
    DistributionShift,
    /// One ROI of each affected pair carries a latent `z`, the other
    /// `(z^2 - 1) / sqrt(2)`: dependent but linearly uncorrelated.
    NonlinearCoupling,
    Null,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorSpec {
    pub subjects_per_class: usize,
    pub n_rois: usize,
    pub voxels_min: usize,
    pub voxels_max: usize,
    pub timepoints: usize,
    pub effect: Effect,
    pub affected_pairs: usize,
    /// Amplitude of the planted latent relative to the unit-variance ROI signal.
    pub effect_size: f64,
    /// Standard deviation of voxel noise.
    pub noise: f64,
    /// AR(1) coefficient of every latent series, in [0, 1).
    pub smoothness: f64,
    /// Share of each ROI latent's variance that comes from the shared factors.
    pub network_strength: f64,
    pub format: DataFormat,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        GeneratorSpec {
            subjects_per_class: 60,
            n_rois: 10,
            voxels_min: 8,
            voxels_max: 16,
            timepoints: 60,
            effect: Effect::DistributionShift,
            affected_pairs: 3,
            effect_size: 1.0,
            noise: 1.0,
            smoothness: 0.7,
            network_strength: 0.5,
            format: DataFormat::Csv,
        }
    }
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.subjects_per_class == 0 {
            return bad("subjects_per_class must be positive".into());
        }
        if self.n_rois < 2 {
            return bad(format!("n_rois = {}, need at least 2", self.n_rois));
        }
        if self.voxels_min < 2 || self.voxels_min > self.voxels_max {
            return bad(format!(
                "voxel range [{}, {}] must satisfy 2 <= min <= max",
                self.voxels_min, self.voxels_max
            ));
        }
        if self.timepoints < 2 {
            return bad(format!("timepoints = {}, need at least 2", self.timepoints));
        }
        if self.affected_pairs > n_pairs(self.n_rois) {
            return bad(format!(
                "{} affected pairs but only {} ROI pairs",
                self.affected_pairs,
                n_pairs(self.n_rois)
            ));
        }
        if !(self.effect_size.is_finite() && self.effect_size >= 0.0) {
            return bad("effect_size must be finite and nonnegative".into());
        }
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return bad("noise must be finite and nonnegative".into());
        }
        if !(0.0..1.0).contains(&self.smoothness) {
            return bad("smoothness must lie in [0, 1)".into());
        }
        if !(0.0..=1.0).contains(&self.network_strength) {
            return bad("network_strength must lie in [0, 1]".into());
        }
        Ok(())
    }
}

/// Population-wide structure shared by all subjects of one seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthLayout {
    pub voxels: Vec<usize>,
    pub affected: Vec<(usize, usize)>,
    /// Unit-norm nonnegative factor loadings, one row per ROI.
    pub loadings: Array2<f64>,
}

const LAYOUT_STREAM: u64 = u64::MAX;
const FACTORS: usize = 3;

pub fn synth_layout(spec: &GeneratorSpec, seed: u64) -> Result<SynthLayout> {
    spec.validate()?;
    let mut rng = stream(seed, LAYOUT_STREAM, 0);
    let voxels = (0..spec.n_rois)
        .map(|_| rng.random_range(spec.voxels_min..=spec.voxels_max))
        .collect();
    let mut pairs = upper_pairs(spec.n_rois);
    pairs.shuffle(&mut rng);
    pairs.truncate(spec.affected_pairs);
    pairs.sort_unstable();
    // Nonnegative loadings: ROI couplings are mostly positive, as in resting-state data.
    let mut loadings = Array2::from_shape_fn((spec.n_rois, FACTORS), |_| {
        let v: f64 = StandardNormal.sample(&mut rng);
        v.abs()
    });
    for mut row in loadings.rows_mut() {
        let norm = row.dot(&row).sqrt();
        row /= norm;
    }
    Ok(SynthLayout {
        voxels,
        affected: pairs,
        loadings,
    })
}

fn latent(rng: &mut ChaCha8Rng, t: usize, phi: f64) -> Array1<f64> {
    let innovation = (1.0 - phi * phi).sqrt();
    let mut x: f64 = StandardNormal.sample(rng);
    let mut out = Array1::zeros(t);
    for v in out.iter_mut() {
        *v = x;
        let e: f64 = StandardNormal.sample(rng);
        x = phi * x + innovation * e;
    }
    out
}

/// +1 for the first half of the voxels, -1 for the second half, 0 for an odd
/// leftover, so the signed sum is zero.
fn balanced_signs(n: usize) -> Vec<f64> {
    let half = n / 2;
    (0..n)
        .map(|v| if v < half { 1.0 } else if v < 2 * half { -1.0 } else { 0.0 })
        .collect()
}

fn subject_id(index: usize) -> String {
    format!("sub-{:04}", index + 1)
}

/// Generates subject `index` as if it had `label`.
pub fn synth_subject(spec: &GeneratorSpec, layout: &SynthLayout, seed: u64, index: usize, label: Label) -> SubjectScan {
    let t = spec.timepoints;
    let mut rng = stream(seed, index as u64, 0);
    let factors: Vec<Array1<f64>> = (0..FACTORS).map(|_| latent(&mut rng, t, spec.smoothness)).collect();
    let (shared, private) = (spec.network_strength.sqrt(), (1.0 - spec.network_strength).sqrt());
    let mut rois: Vec<Array2<f64>> = layout
        .voxels
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let mut s = latent(&mut rng, t, spec.smoothness) * private;
            for (f, &l) in factors.iter().zip(layout.loadings.row(i)) {
                s.scaled_add(shared * l, f);
            }
            let mut noise = Array2::from_shape_fn((n, t), |_| {
                let e: f64 = StandardNormal.sample(&mut rng);
                spec.noise * e
            });
            let centre = noise.mean_axis(Axis(0)).expect("n >= 2");
            noise -= &centre;
            noise + &s
        })
        .collect();

    if label == Label::Case {
        let mut rng = stream(seed, index as u64, 1);
        let a = spec.effect_size;
        for &(i, j) in &layout.affected {
            let z = latent(&mut rng, t, spec.smoothness);
            match spec.effect {
                Effect::MeanShift => {
                    rois[i] += &(&z * a);
                    rois[j] += &(&z * a);
                }
                Effect::DistributionShift => {
                    for k in [i, j] {
                        for (mut row, sign) in rois[k].rows_mut().into_iter().zip(balanced_signs(layout.voxels[k])) {
                            row.scaled_add(a * sign, &z);
                        }
                    }
                }
                Effect::NonlinearCoupling => {
                    let sq = z.mapv(|v| (v * v - 1.0) / std::f64::consts::SQRT_2);
                    rois[i] += &(&z * a);
                    rois[j] += &(&sq * a);
                }
                Effect::Null => {}
            }
        }
    }

    SubjectScan {
        subject_id: subject_id(index),
        label,
        rois: rois.into_iter().enumerate().map(|(k, d)| RoiMatrix::from_raw(k, d)).collect(),
    }
}

fn label_of(spec: &GeneratorSpec, index: usize) -> Label {
    if index < spec.subjects_per_class {
        Label::Control
    } else {
        Label::Case
    }
}

/// In-memory population: controls first, then cases.
pub fn synth_scans(spec: &GeneratorSpec, seed: u64) -> Result<Vec<SubjectScan>> {
    let layout = synth_layout(spec, seed)?;
    Ok((0..2 * spec.subjects_per_class)
        .into_par_iter()
        .map(|k| synth_subject(spec, &layout, seed, k, label_of(spec, k)))
        .collect())
}

/// Writes the population under `out` with a manifest and returns it.
pub fn synth_generate(spec: &GeneratorSpec, seed: u64, out: &Path) -> Result<SubjectFileSet> {
    let scans = synth_scans(spec, seed)?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let ext = spec.format.extension();
    let subjects = scans
        .par_iter()
        .map(|scan| {
            let dir = PathBuf::from(&scan.subject_id);
            fs::create_dir_all(out.join(&dir)).map_err(|e| Error::io(out.join(&dir), e))?;
            let rois = scan
                .rois
                .iter()
                .map(|roi| {
                    let rel = dir.join(format!("roi-{:03}.{ext}", roi.roi_id()));
                    let path = out.join(&rel);
                    match spec.format {
                        DataFormat::Csv => write_csv(&path, roi.data())?,
                        DataFormat::Bin => write_bin(&path, roi.data())?,
                    }
                    Ok(rel)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ManifestEntry {
                subject_id: scan.subject_id.clone(),
                label: scan.label,
                rois,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest_path = out.join(MANIFEST_NAME);
    let text = serde_json::to_string_pretty(&Manifest { subjects })?;
    fs::write(&manifest_path, text).map_err(|e| Error::io(&manifest_path, e))?;
    SubjectFileSet::open(out)
}
