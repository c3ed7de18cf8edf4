use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::params::combinations;
use super::{Grid, MlError, ModelFamily, Params};
use crate::dataset::{smote, stratified_kfold, take, SmoteMode, Standardizer};
use crate::seed::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvSetup {
    pub k: usize,
    pub seed: u64,
    pub smote: SmoteMode,
    pub smote_k: usize,
}

impl Default for CvSetup {
    fn default() -> Self {
        Self {
            k: 5,
            seed: 42,
            smote: SmoteMode::Fold,
            smote_k: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvEntry {
    pub params: Params,
    pub fold_accuracy: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub family: String,
    pub setup: CvSetup,
    pub entries: Vec<CvEntry>,
    /// Index of the highest mean accuracy, first in grid order on ties.
    pub best: usize,
}

impl CvResult {
    pub fn best_entry(&self) -> &CvEntry {
        &self.entries[self.best]
    }

    /// Entry indices by descending mean accuracy, grid order among equals.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.entries.len()).collect();
        idx.sort_by(|&a, &b| self.entries[b].mean.total_cmp(&self.entries[a].mean));
        idx
    }
}

struct Fold {
    train_x: Vec<Vec<f64>>,
    train_y: Vec<usize>,
    val_x: Vec<Vec<f64>>,
    val_y: Vec<usize>,
}

/// Builds the standardized (and possibly oversampled) fold matrices.
///
/// In `Fold` mode each fold's training part is scaled and oversampled on its
/// own. In `Paper` mode the whole set is scaled and oversampled first and
/// the folds are drawn from the result, as in the original study.
fn folds(x: &[Vec<f64>], y: &[usize], setup: &CvSetup) -> Result<Vec<Fold>, MlError> {
    if setup.smote == SmoteMode::Paper {
        let scaled = Standardizer::fit(x).transform(x);
        let over = smote(&scaled, y, setup.smote_k, derive_seed(setup.seed, "smote-paper", 0))?;
        let plan = stratified_kfold(&over.y, setup.k, setup.seed)?;
        return Ok((0..setup.k)
            .map(|f| {
                let tr = plan.training(f);
                let va = plan.validation(f);
                Fold {
                    train_x: take(&over.x, &tr),
                    train_y: take(&over.y, &tr),
                    val_x: take(&over.x, va),
                    val_y: take(&over.y, va),
                }
            })
            .collect());
    }
    let plan = stratified_kfold(y, setup.k, setup.seed)?;
    (0..setup.k)
        .map(|f| {
            let tr = plan.training(f);
            let va = plan.validation(f);
            let raw = take(x, &tr);
            let scaler = Standardizer::fit(&raw);
            let mut train_x = scaler.transform(&raw);
            let mut train_y = take(y, &tr);
            if setup.smote == SmoteMode::Fold {
                let over = smote(&train_x, &train_y, setup.smote_k, derive_seed(setup.seed, "smote-fold", f as u64))?;
                train_x = over.x;
                train_y = over.y;
            }
            Ok(Fold {
                train_x,
                train_y,
                val_x: scaler.transform(&take(x, va)),
                val_y: take(y, va),
            })
        })
        .collect()
}

fn score(
    family: &dyn ModelFamily,
    params: &Params,
    fold: &Fold,
    n_classes: usize,
    seed: u64,
) -> Result<f64, MlError> {
    let model = family.fit(&fold.train_x, &fold.train_y, n_classes, params, seed)?;
    let pred = model.predict(&fold.val_x);
    Ok(pred.iter().zip(&fold.val_y).filter(|(p, t)| p == t).count() as f64 / fold.val_y.len() as f64)
}

fn entry(params: Params, fold_accuracy: Vec<f64>) -> CvEntry {
    let k = fold_accuracy.len() as f64;
    let mean = fold_accuracy.iter().sum::<f64>() / k;
    let std = (fold_accuracy.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / k).sqrt();
    CvEntry {
        params,
        fold_accuracy,
        mean,
        std,
    }
}

/// Cross-validated accuracy of every grid combination. `x` is unscaled;
/// scaling is always fitted on training rows only (except in `Paper` mode).
pub fn grid_search(
    family: &dyn ModelFamily,
    grid: &Grid,
    x: &[Vec<f64>],
    y: &[usize],
    n_classes: usize,
    setup: &CvSetup,
) -> Result<CvResult, MlError> {
    let combos = combinations(grid);
    if combos.is_empty() {
        return Err(MlError::EmptyGrid);
    }
    let folds = folds(x, y, setup)?;
    let jobs: Vec<(usize, usize)> = (0..combos.len()).flat_map(|c| (0..folds.len()).map(move |f| (c, f))).collect();
    let scores = jobs
        .par_iter()
        .map(|&(c, f)| score(family, &combos[c], &folds[f], n_classes, derive_seed(setup.seed, "cv-fit", f as u64)))
        .collect::<Result<Vec<f64>, MlError>>()?;
    let entries: Vec<CvEntry> = combos
        .into_iter()
        .zip(scores.chunks(folds.len()))
        .map(|(p, s)| entry(p, s.to_vec()))
        .collect();
    let mut best = 0;
    for (i, e) in entries.iter().enumerate() {
        if e.mean > entries[best].mean {
            best = i;
        }
    }
    Ok(CvResult {
        family: family.name().to_string(),
        setup: *setup,
        entries,
        best,
    })
}

/// Cross-validated accuracy of a single parameter set.
pub fn cross_validate(
    family: &dyn ModelFamily,
    params: &Params,
    x: &[Vec<f64>],
    y: &[usize],
    n_classes: usize,
    setup: &CvSetup,
) -> Result<CvEntry, MlError> {
    let grid: Grid = params.iter().map(|(k, v)| (k.clone(), vec![v.clone()])).collect();
    let mut r = grid_search(family, &grid, x, y, n_classes, setup)?;
    Ok(r.entries.swap_remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ml::params::grid_of;
    use crate::ml::{ParamValue, SvmFamily};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn blobs(n: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let y: Vec<usize> = (0..n).map(|i| i % 3).collect();
        let x = y
            .iter()
            .map(|&c| vec![c as f64 * 3.0 + rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0) * 10.0])
            .collect();
        (x, y)
    }

    #[test]
    fn singleton_grid_is_best() {
        let (x, y) = blobs(60);
        let grid = grid_of([
            ("C", vec![ParamValue::Int(10)]),
            ("kernel", vec![ParamValue::Str("rbf".into())]),
            ("gamma", vec![ParamValue::Str("auto".into())]),
        ]);
        let r = grid_search(&SvmFamily, &grid, &x, &y, 3, &CvSetup::default()).unwrap();
        assert_eq!(r.best, 0);
        assert_eq!(r.entries.len(), 1);
        assert_eq!(r.entries[0].fold_accuracy.len(), 5);
        assert!(r.best_entry().mean > 0.9);
    }

    #[test]
    fn ties_go_to_first_combination() {
        let (x, y) = blobs(60);
        let grid = grid_of([("C", vec![ParamValue::Int(10), ParamValue::Int(10)])]);
        let r = grid_search(&SvmFamily, &grid, &x, &y, 3, &CvSetup::default()).unwrap();
        assert_eq!(r.entries[0].mean, r.entries[1].mean);
        assert_eq!(r.best, 0);
        assert_eq!(r.ranking(), vec![0, 1]);
    }

    #[test]
    fn empty_grid_is_fatal() {
        let (x, y) = blobs(30);
        let grid = grid_of([("C", vec![])]);
        assert!(matches!(
            grid_search(&SvmFamily, &grid, &x, &y, 3, &CvSetup::default()),
            Err(MlError::EmptyGrid)
        ));
    }
}
