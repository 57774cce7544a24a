//! File formats, manifests, the matrix store and the synthetic generator.

mod formats;
mod manifest;
mod store;
mod synth;

pub use formats::{
    load_connectivity, parse_bin, parse_csv, read_bin, read_csv, read_matrix, save_matrix, write_bin, write_csv,
    write_pgm, DataFormat, MatrixFormat,
};
pub use manifest::{load_subjects, Manifest, ManifestEntry, SubjectFileSet, MANIFEST_NAME};
pub use store::{read_measure_set, stored_measures, write_measure_set, MeasureSet, StoreIndex, StoredSubject, INDEX_NAME};
pub use synth::{synth_generate, synth_layout, synth_scans, synth_subject, Effect, GeneratorSpec, SynthLayout};
