use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use mvconn::analysis::{correlation_table, mean_matrix};
use mvconn::classify::{grid_search_eval, Dataset, EvalOptions, Protocol};
use mvconn::engine::{compute_all, MeasureConfig};
use mvconn::io::{
    read_measure_set, save_matrix, stored_measures, synth_generate, write_measure_set, DataFormat, GeneratorSpec,
    MatrixFormat, MeasureSet, SubjectFileSet,
};
use mvconn::model::Measure;

#[derive(Parser)]
#[command(name = "mvconn", version, about = "Multivariate functional connectivity from ROI voxel time series")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute one connectivity matrix per subject.
    Compute(ComputeArgs),
    /// Repeated grid-search classification of stored matrices.
    Classify(ClassifyArgs),
    /// Correlations between the group matrices of several measures.
    Compare(CompareArgs),
    /// Generate a synthetic case/control dataset.
    Synth(SynthArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureArg {
    PearsonMean,
    #[value(name = "pearson-1pc")]
    PearsonFirstPc,
    Dcor,
    Wfc,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Exact,
    Sinkhorn,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Bin,
}

impl From<FormatArg> for DataFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => DataFormat::Csv,
            FormatArg::Bin => DataFormat::Bin,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ProtocolArg {
    Split,
    Kfold,
}

#[derive(Args)]
struct ComputeArgs {
    #[arg(long)]
    measure: Option<MeasureArg>,
    /// Ground metric exponent for Wasserstein.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    solver: Option<SolverArg>,
    /// Sinkhorn regularization.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Keep this fraction of time-domain principal components before transport.
    #[arg(long)]
    pca_fraction: Option<f64>,
    /// Report W_p^p instead of W_p.
    #[arg(long)]
    no_root: bool,
    /// Skip per-voxel z-scoring.
    #[arg(long)]
    no_standardize: bool,
    /// JSON measure configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset directory or manifest file.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Format of the ROI files (default: from the file extension).
    #[arg(long)]
    input_format: Option<FormatArg>,
    /// Format of the written matrices.
    #[arg(long, default_value = "csv")]
    format: FormatArg,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Directory written by `compute`.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value = "kfold")]
    protocol: ProtocolArg,
    #[arg(long, default_value_t = 20)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Search the default L1/L2 x [0.2, 5] grid (the only grid offered).
    #[arg(long)]
    grid_default: bool,
    /// Measures to evaluate (default: every stored measure).
    #[arg(long, value_delimiter = ',')]
    measures: Vec<String>,
    /// Accuracy table as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    measures: Vec<String>,
    #[arg(long)]
    out: PathBuf,
    /// Also write each measure's mean matrix as a PGM heatmap here.
    #[arg(long)]
    heatmaps: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// JSON generator spec (default: built-in spec).
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    format: Option<FormatArg>,
}

fn read_config<T>(path: &Path, parse: impl FnOnce(&str) -> serde_json::Result<T>) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn compute(args: ComputeArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(p) => read_config(p, |t| serde_json::from_str::<MeasureConfig>(t))?,
        None => MeasureConfig::default(),
    };
    match args.measure {
        Some(MeasureArg::PearsonMean) => cfg.measure = Measure::PearsonMean,
        Some(MeasureArg::PearsonFirstPc) => cfg.measure = Measure::PearsonFirstPc,
        Some(MeasureArg::Dcor) => cfg.measure = Measure::Dcor,
        // Keep a Sinkhorn choice made in the config file.
        Some(MeasureArg::Wfc) if !cfg.measure.is_distance() => cfg.measure = Measure::WfcExact,
        Some(MeasureArg::Wfc) => {}
        None if args.config.is_none() => bail!("--measure is required without --config"),
        None => {}
    }
    if let Some(solver) = args.solver {
        if !cfg.measure.is_distance() {
            bail!("--solver only applies to --measure wfc");
        }
        cfg.measure = match solver {
            SolverArg::Exact => Measure::WfcExact,
            SolverArg::Sinkhorn => Measure::WfcSinkhorn,
        };
    }
    if let Some(p) = args.p {
        cfg.p = p;
    }
    if let Some(e) = args.epsilon {
        cfg.sinkhorn.epsilon = e;
    }
    if args.pca_fraction.is_some() {
        cfg.pca_fraction = args.pca_fraction;
    }
    if args.no_root {
        cfg.root = false;
    }
    if args.no_standardize {
        cfg.standardize = false;
    }
    cfg.validate()?;

    let set = SubjectFileSet::open(&args.input)?;
    let format = match args.input_format {
        Some(f) => f.into(),
        None => set
            .manifest
            .subjects
            .first()
            .and_then(|s| s.rois.first())
            .map_or(DataFormat::Csv, |p| DataFormat::from_path(p)),
    };
    let scans = set.load(format)?;
    let matrices = compute_all(&scans, &cfg)?;
    let dir = write_measure_set(
        &args.out,
        &MeasureSet {
            measure: cfg.measure,
            subject_ids: set.subject_ids(),
            labels: set.labels(),
            matrices,
        },
        args.format.into(),
    )?;
    fs::write(dir.join("config.json"), serde_json::to_string_pretty(&cfg)?)?;
    println!("{} matrices ({}) written to {}", scans.len(), cfg.measure, dir.display());
    Ok(())
}

/// Accepts measure names and the `wfc` shorthand for whichever Wasserstein
/// variant is stored (exact first).
fn resolve_measures(root: &Path, names: &[String]) -> Result<Vec<Measure>> {
    let stored = stored_measures(root);
    if names.is_empty() {
        if stored.is_empty() {
            bail!("no computed measures under {}", root.display());
        }
        return Ok(stored);
    }
    names
        .iter()
        .map(|n| {
            if n == "wfc" {
                stored
                    .iter()
                    .copied()
                    .find(|m| m.is_distance())
                    .with_context(|| format!("no Wasserstein matrices under {}", root.display()))
            } else {
                Ok(n.parse::<Measure>()?)
            }
        })
        .collect()
}

fn classify(args: ClassifyArgs) -> Result<()> {
    let _ = args.grid_default;
    let opts = EvalOptions {
        protocol: match args.protocol {
            ProtocolArg::Split => Protocol::Split8020,
            ProtocolArg::Kfold => Protocol::KFold5,
        },
        runs: args.runs,
        seed: args.seed,
        ..Default::default()
    };
    let mut table = String::from("measure,protocol,runs,mean_accuracy,std_accuracy,best_penalty,best_strength\n");
    for measure in resolve_measures(&args.input, &args.measures)? {
        let set = read_measure_set(&args.input, measure)?;
        let data = Dataset::from_matrices(&set.matrices, set.labels)?;
        let r = grid_search_eval(&data, &opts)?;
        let penalty = serde_json::to_value(r.best.penalty)?;
        let penalty = penalty.as_str().unwrap_or_default();
        println!(
            "{measure}: {:.2} +- {:.2} % (best {penalty}, C = {})",
            r.mean_accuracy, r.std_accuracy, r.best.strength
        );
        table.push_str(&format!(
            "{measure},{},{},{:.2},{:.2},{penalty},{}\n",
            opts.protocol.name(),
            opts.runs,
            r.mean_accuracy,
            r.std_accuracy,
            r.best.strength
        ));
    }
    if let Some(out) = &args.out {
        fs::write(out, table).with_context(|| format!("writing {}", out.display()))?;
    }
    Ok(())
}

fn compare(args: CompareArgs) -> Result<()> {
    let measures = resolve_measures(&args.input, &args.measures)?;
    if measures.len() < 2 {
        bail!("--measures needs at least two entries");
    }
    let sets = measures
        .iter()
        .map(|&m| read_measure_set(&args.input, m))
        .collect::<mvconn::Result<Vec<_>>>()?;
    let labels = sets[0].labels.clone();
    for s in &sets[1..] {
        if s.subject_ids != sets[0].subject_ids || s.labels != labels {
            bail!("{} and {} were computed on different subjects", s.measure, sets[0].measure);
        }
    }
    if let Some(dir) = &args.heatmaps {
        fs::create_dir_all(dir)?;
        for s in &sets {
            let path = dir.join(format!("{}-mean.pgm", s.measure));
            save_matrix(&mean_matrix(&s.matrices)?, &path, MatrixFormat::Pgm)?;
        }
    }
    let rows = correlation_table(&sets.into_iter().map(|s| s.matrices).collect::<Vec<_>>(), &labels)?;
    let cell = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| format!("{x:.3}"));
    let header: Vec<String> = rows.iter().map(|c| format!("{}/{}", c.first, c.second)).collect();
    let mean: Vec<String> = rows.iter().map(|c| cell(c.mean)).collect();
    let diff: Vec<String> = rows.iter().map(|c| cell(c.difference)).collect();
    let table = format!(
        "row,{}\nmean,{}\ndifference,{}\n",
        header.join(","),
        mean.join(","),
        diff.join(",")
    );
    print!("{table}");
    fs::write(&args.out, table).with_context(|| format!("writing {}", args.out.display()))?;
    Ok(())
}

fn synth(args: SynthArgs) -> Result<()> {
    let mut spec = match &args.spec {
        Some(p) => read_config(p, |t| serde_json::from_str::<GeneratorSpec>(t))?,
        None => GeneratorSpec::default(),
    };
    if let Some(f) = args.format {
        spec.format = f.into();
    }
    let set = synth_generate(&spec, args.seed, &args.out)?;
    println!("{} subjects written to {}", set.manifest.subjects.len(), args.out.display());
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        if k == 0 {
            bail!("--threads must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(k).build_global()?;
    }
    match cli.command {
        Command::Compute(a) => compute(a),
        Command::Classify(a) => classify(a),
        Command::Compare(a) => compare(a),
        Command::Synth(a) => synth(a),
    }
}
