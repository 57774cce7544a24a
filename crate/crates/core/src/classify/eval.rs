use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::logreg::{fit_arrays_from, FitOptions, LogRegModel};
use super::{Dataset, Penalty, Standardizer};
use crate::error::{Error, Result};
use crate::model::{Label, Measure};

/// Inverse-regularization values searched within [0.2, 5].
pub const GRID_STRENGTHS: [f64; 6] = [0.2, 0.5, 1.0, 2.0, 3.5, 5.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Protocol {
    /// One stratified 80/20 train/test split per run; the grid point with the
    /// best mean test accuracy over runs is reported.
    #[serde(rename = "split-80-20")]
    Split8020,
    /// Stratified 5-fold cross-validation per run; inside every training
    /// portion the grid point is chosen by an inner stratified CV.
    #[serde(rename = "kfold-5")]
    KFold5,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Split8020 => "split-80-20",
            Protocol::KFold5 => "kfold-5",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub penalty: Penalty,
    pub strength: f64,
}

fn grid() -> Vec<GridPoint> {
    [Penalty::L1, Penalty::L2]
        .into_iter()
        .flat_map(|penalty| GRID_STRENGTHS.into_iter().map(move |strength| GridPoint { penalty, strength }))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub protocol: Protocol,
    pub runs: usize,
    pub seed: u64,
    pub fit: FitOptions,
    /// Folds of the inner model-selection CV under [`Protocol::KFold5`].
    pub inner_folds: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            protocol: Protocol::KFold5,
            runs: 20,
            seed: 0,
            fit: FitOptions::default(),
            inner_folds: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub measure: Option<Measure>,
    pub protocol: Protocol,
    /// Percent.
    pub mean_accuracy: f64,
    /// Population standard deviation over runs, percent.
    pub std_accuracy: f64,
    pub run_accuracies: Vec<f64>,
    pub best: GridPoint,
    /// How often each grid point was selected (per run for the split
    /// protocol, per outer fold for k-fold).
    pub selection_counts: Vec<(GridPoint, usize)>,
}

fn stream(seed: u64, run: usize, fold: usize) -> ChaCha8Rng {
    crate::seed::stream(seed, run as u64, fold as u64)
}

/// Indices of a class-balanced subsample: the larger class is reduced to the
/// size of the smaller one by sampling without replacement. Sorted.
pub fn downsample_balanced(labels: &[Label], rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut case: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == Label::Case).collect();
    let mut control: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == Label::Control).collect();
    let keep = case.len().min(control.len());
    let larger = if case.len() > control.len() { &mut case } else { &mut control };
    larger.shuffle(rng);
    larger.truncate(keep);
    let mut out: Vec<usize> = case.into_iter().chain(control).collect();
    out.sort_unstable();
    out
}

fn by_class(indices: &[usize], labels: &[Label], rng: &mut ChaCha8Rng) -> [Vec<usize>; 2] {
    let mut groups = [Vec::new(), Vec::new()];
    for &i in indices {
        groups[labels[i].as_index()].push(i);
    }
    for g in &mut groups {
        g.shuffle(rng);
    }
    groups
}

/// Stratified train/test split with `test_fraction` of each class held out.
pub fn stratified_split(
    indices: &[usize],
    labels: &[Label],
    test_fraction: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for group in by_class(indices, labels, rng) {
        if group.len() < 2 {
            return Err(Error::InvalidDataset(format!(
                "a class has {} subjects, too few to stratify",
                group.len()
            )));
        }
        let n_test = ((group.len() as f64 * test_fraction).round() as usize).clamp(1, group.len() - 1);
        test.extend_from_slice(&group[..n_test]);
        train.extend_from_slice(&group[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// `k` stratified folds: every class is dealt round-robin, so per-fold class
/// counts differ from `n_class / k` by less than one.
pub fn stratified_folds(indices: &[usize], labels: &[Label], k: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<usize>>> {
    let mut folds = vec![Vec::new(); k];
    let mut slot = 0;
    for group in by_class(indices, labels, rng) {
        if group.len() < k {
            return Err(Error::InvalidDataset(format!(
                "a class has {} subjects, too few for {k} stratified folds",
                group.len()
            )));
        }
        for i in group {
            folds[slot % k].push(i);
            slot += 1;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

fn complement(all: &[usize], fold: &[usize]) -> Vec<usize> {
    all.iter().copied().filter(|i| fold.binary_search(i).is_err()).collect()
}

/// Fit on `train` (features standardized on `train`), return accuracy on `test`.
fn holdout_accuracy(d: &Dataset, train: &[usize], test: &[usize], g: GridPoint, fit: &FitOptions) -> Result<f64> {
    Ok(grid_accuracies(d, train, test, &[g], fit)?[0])
}

/// [`holdout_accuracy`] for every grid point. Consecutive points with the
/// same penalty are warm-started from each other.
fn grid_accuracies(d: &Dataset, train: &[usize], test: &[usize], grid: &[GridPoint], fit: &FitOptions) -> Result<Vec<f64>> {
    let xtr = d.rows(train);
    let scaler = Standardizer::fit(xtr.view());
    let xtr = scaler.transform(xtr.view());
    let ytr = d.targets(train);
    let xte = scaler.transform(d.rows(test).view());
    let yte = d.targets(test);
    let mut prev: Option<LogRegModel> = None;
    let mut out = Vec::with_capacity(grid.len());
    for &g in grid {
        let init = prev.as_ref().filter(|m| m.penalty == g.penalty);
        let model = fit_arrays_from(xtr.view(), ytr.view(), g.penalty, g.strength, fit, init)?;
        out.push(model.accuracy(xte.view(), yte.view()));
        prev = Some(model);
    }
    Ok(out)
}

fn argmax_first(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
        .0
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Repeated, class-balanced evaluation of the penalty/strength grid.
pub fn grid_search_eval(d: &Dataset, opts: &EvalOptions) -> Result<EvalReport> {
    if d.n_subjects() < 10 {
        return Err(Error::InvalidDataset(format!("{} subjects, need at least 10", d.n_subjects())));
    }
    if opts.runs == 0 {
        return Err(Error::InvalidArgument("runs must be positive".into()));
    }
    let grid = grid();
    let (run_accuracies, best, selection_counts): (Vec<f64>, GridPoint, Vec<(GridPoint, usize)>) = match opts.protocol {
        Protocol::Split8020 => {
            let per_run: Vec<Vec<f64>> = (0..opts.runs)
                .into_par_iter()
                .map(|run| {
                    let mut rng = stream(opts.seed, run, 0);
                    let idx = downsample_balanced(d.labels(), &mut rng);
                    let (train, test) = stratified_split(&idx, d.labels(), 0.2, &mut rng)?;
                    grid_accuracies(d, &train, &test, &grid, &opts.fit)
                })
                .collect::<Result<_>>()?;
            let means: Vec<f64> = (0..grid.len())
                .map(|g| per_run.iter().map(|r| r[g]).sum::<f64>() / opts.runs as f64)
                .collect();
            let best = argmax_first(&means);
            let accs = per_run.iter().map(|r| 100.0 * r[best]).collect();
            (accs, grid[best], vec![(grid[best], opts.runs)])
        }
        Protocol::KFold5 => {
            let per_run: Vec<(f64, Vec<usize>)> = (0..opts.runs)
                .into_par_iter()
                .map(|run| kfold_run(d, &grid, opts, run))
                .collect::<Result<_>>()?;
            let mut counts = vec![0usize; grid.len()];
            for (_, picks) in &per_run {
                for &p in picks {
                    counts[p] += 1;
                }
            }
            let best = argmax_first(&counts.iter().map(|&c| c as f64).collect::<Vec<_>>());
            let accs = per_run.iter().map(|(a, _)| 100.0 * a).collect();
            let selection = grid.iter().copied().zip(counts).filter(|&(_, c)| c > 0).collect();
            (accs, grid[best], selection)
        }
    };
    let (mean_accuracy, std_accuracy) = mean_std(&run_accuracies);
    Ok(EvalReport {
        measure: d.measure(),
        protocol: opts.protocol,
        mean_accuracy,
        std_accuracy,
        run_accuracies,
        best,
        selection_counts,
    })
}

/// One repeat of nested 5-fold CV: returns the mean outer-fold accuracy and
/// the grid index selected in each outer fold.
fn kfold_run(d: &Dataset, grid: &[GridPoint], opts: &EvalOptions, run: usize) -> Result<(f64, Vec<usize>)> {
    const OUTER: usize = 5;
    let mut rng = stream(opts.seed, run, 0);
    let idx = downsample_balanced(d.labels(), &mut rng);
    let folds = stratified_folds(&idx, d.labels(), OUTER, &mut rng)?;
    let mut total = 0.0;
    let mut picks = Vec::with_capacity(OUTER);
    for (f, test) in folds.iter().enumerate() {
        let train = complement(&idx, test);
        let mut inner_rng = stream(opts.seed, run, f + 1);
        let inner = stratified_folds(&train, d.labels(), opts.inner_folds, &mut inner_rng)?;
        let mut scores = vec![0.0; grid.len()];
        for val in &inner {
            let accs = grid_accuracies(d, &complement(&train, val), val, grid, &opts.fit)?;
            scores.iter_mut().zip(accs).for_each(|(s, a)| *s += a);
        }
        let pick = argmax_first(&scores);
        picks.push(pick);
        total += holdout_accuracy(d, &train, test, grid[pick], &opts.fit)?;
    }
    Ok((total / OUTER as f64, picks))
}
