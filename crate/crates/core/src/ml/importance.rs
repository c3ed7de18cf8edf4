use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Classifier;
use crate::seed::rng_for;

/// Normalized impurity-decrease importance of a tree or forest; `None` for
/// models without splits to credit.
pub fn gini_importance(model: &dyn Classifier) -> Option<Vec<f64>> {
    model.gini_importance()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationImportance {
    pub feature: usize,
    /// Mean accuracy lost when the column is shuffled.
    pub mean: f64,
    pub std: f64,
}

fn accuracy(pred: &[usize], y: &[usize]) -> f64 {
    pred.iter().zip(y).filter(|(p, t)| p == t).count() as f64 / y.len() as f64
}

/// Baseline accuracy minus accuracy with one column shuffled, averaged over
/// `n_repeats` shuffles. Column `j` uses its own seeded stream.
pub fn permutation_importance(
    model: &dyn Classifier,
    x: &[Vec<f64>],
    y: &[usize],
    n_repeats: usize,
    seed: u64,
) -> Vec<PermutationImportance> {
    if x.is_empty() || n_repeats == 0 {
        return Vec::new();
    }
    let base = accuracy(&model.predict(x), y);
    (0..x[0].len())
        .into_par_iter()
        .map(|j| {
            let mut rng = rng_for(seed, "permutation", j as u64);
            let mut column: Vec<f64> = x.iter().map(|r| r[j]).collect();
            let drops: Vec<f64> = (0..n_repeats)
                .map(|_| {
                    column.shuffle(&mut rng);
                    let shuffled: Vec<Vec<f64>> = x
                        .iter()
                        .zip(&column)
                        .map(|(r, v)| {
                            let mut r = r.clone();
                            r[j] = *v;
                            r
                        })
                        .collect();
                    base - accuracy(&model.predict(&shuffled), y)
                })
                .collect();
            let mean = drops.iter().sum::<f64>() / n_repeats as f64;
            let var = drops.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n_repeats as f64;
            PermutationImportance {
                feature: j,
                mean,
                std: var.sqrt(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ml::params::params_of;
    use crate::ml::{ModelFamily, ParamValue, RfFamily};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn signal_and_noise(seed: u64, n: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
        let y = x.iter().map(|r| usize::from(r[0] > 0.0)).collect();
        (x, y)
    }

    #[test]
    fn single_feature_gets_everything() {
        let (x, y) = signal_and_noise(1, 80);
        let x1: Vec<Vec<f64>> = x.iter().map(|r| vec![r[0]]).collect();
        let m = RfFamily.fit(&x1, &y, 2, &params_of([("n_estimators", ParamValue::Int(5))]), 0).unwrap();
        assert_eq!(gini_importance(m.as_ref()).unwrap(), vec![1.0]);
    }

    #[test]
    fn noise_ranks_below_signal() {
        let wins = (0..20)
            .filter(|&s| {
                let (x, y) = signal_and_noise(100 + s, 120);
                let m = RfFamily.fit(&x, &y, 2, &params_of([("n_estimators", ParamValue::Int(20))]), s).unwrap();
                let imp = gini_importance(m.as_ref()).unwrap();
                (imp.iter().sum::<f64>() - 1.0).abs() < 1e-9 && imp[1] < imp[0]
            })
            .count();
        assert!(wins > 10, "{wins}");
    }

    #[test]
    fn permutation_drop() {
        let (x, y) = signal_and_noise(5, 200);
        let p = params_of([("n_estimators", ParamValue::Int(1)), ("max_depth", ParamValue::Int(1)), ("bootstrap", ParamValue::Bool(false)), ("max_features", ParamValue::Str("all".into()))]);
        let m = RfFamily.fit(&x, &y, 2, &p, 0).unwrap();
        let (xt, yt) = signal_and_noise(6, 200);
        let a = permutation_importance(m.as_ref(), &xt, &yt, 10, 3);
        assert!(a[0].mean > 0.3, "{:?}", a[0]);
        assert_eq!(a[1].mean, 0.0);
        assert_eq!(a, permutation_importance(m.as_ref(), &xt, &yt, 10, 3));
    }
}
