use serde::{Deserialize, Serialize};

use super::params::resolve;
use super::{check_training_set, Classifier, Grid, MlError, ModelFamily, Params};

/// Gaussian naive Bayes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    /// Training rows per class; a class with none is never predicted.
    pub class_count: Vec<usize>,
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<Vec<f64>>,
    pub epsilon: f64,
}

impl GaussianNb {
    pub fn fit(x: &[Vec<f64>], y: &[usize], n_classes: usize) -> Result<Self, MlError> {
        check_training_set(x, y, n_classes)?;
        let d = x[0].len();
        let n = x.len() as f64;

        let max_var = (0..d)
            .map(|j| {
                let m = x.iter().map(|r| r[j]).sum::<f64>() / n;
                x.iter().map(|r| (r[j] - m).powi(2)).sum::<f64>() / n
            })
            .fold(0.0, f64::max);
        let epsilon = if max_var > 0.0 { 1e-9 * max_var } else { 1e-9 };

        let mut class_count = vec![0usize; n_classes];
        let mut means = vec![vec![0.0; d]; n_classes];
        for (row, &c) in x.iter().zip(y) {
            class_count[c] += 1;
            means[c].iter_mut().zip(row).for_each(|(m, v)| *m += v);
        }
        for (m, &cnt) in means.iter_mut().zip(&class_count) {
            if cnt > 0 {
                m.iter_mut().for_each(|v| *v /= cnt as f64);
            }
        }
        let mut variances = vec![vec![0.0; d]; n_classes];
        for (row, &c) in x.iter().zip(y) {
            for j in 0..d {
                variances[c][j] += (row[j] - means[c][j]).powi(2);
            }
        }
        for (v, &cnt) in variances.iter_mut().zip(&class_count) {
            v.iter_mut()
                .for_each(|s| *s = if cnt > 0 { *s / cnt as f64 } else { 0.0 } + epsilon);
        }
        Ok(Self {
            class_count,
            means,
            variances,
            epsilon,
        })
    }

    /// Log prior plus Gaussian log-likelihood, per class.
    pub fn joint_log_likelihood(&self, row: &[f64]) -> Vec<f64> {
        let total: usize = self.class_count.iter().sum();
        (0..self.class_count.len())
            .map(|c| {
                if self.class_count[c] == 0 {
                    return f64::NEG_INFINITY;
                }
                let prior = (self.class_count[c] as f64 / total as f64).ln();
                let ll: f64 = row
                    .iter()
                    .zip(&self.means[c])
                    .zip(&self.variances[c])
                    .map(|((x, m), v)| -0.5 * (2.0 * std::f64::consts::PI * v).ln() - (x - m).powi(2) / (2.0 * v))
                    .sum();
                prior + ll
            })
            .collect()
    }

    /// Normalized class log-posteriors.
    pub fn log_posterior(&self, row: &[f64]) -> Vec<f64> {
        let jll = self.joint_log_likelihood(row);
        let top = jll.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = top + jll.iter().map(|v| (v - top).exp()).sum::<f64>().ln();
        jll.iter().map(|v| v - lse).collect()
    }
}

impl Classifier for GaussianNb {
    fn family(&self) -> &'static str {
        "gnb"
    }

    fn n_classes(&self) -> usize {
        self.class_count.len()
    }

    fn scores(&self, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        x.iter().map(|r| self.log_posterior(r)).collect()
    }

    fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("model serializes")
    }
}

pub struct GnbFamily;

impl ModelFamily for GnbFamily {
    fn name(&self) -> &'static str {
        "gnb"
    }

    fn default_params(&self) -> Params {
        Params::new()
    }

    fn default_grid(&self) -> Grid {
        Grid::new()
    }

    fn fit(
        &self,
        x: &[Vec<f64>],
        y: &[usize],
        n_classes: usize,
        params: &Params,
        _seed: u64,
    ) -> Result<Box<dyn Classifier>, MlError> {
        resolve(self.default_params(), params, self.name())?;
        Ok(Box::new(GaussianNb::fit(x, y, n_classes)?))
    }

    fn load(&self, value: serde_json::Value) -> Result<Box<dyn Classifier>, MlError> {
        let m: GaussianNb = serde_json::from_value(value).map_err(|e| MlError::Model(e.to_string()))?;
        Ok(Box::new(m))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn separated_classes() {
        let x = vec![vec![-1.0], vec![1.0], vec![9.0], vec![11.0]];
        let m = GaussianNb::fit(&x, &[0, 0, 1, 1], 2).unwrap();
        assert_eq!(m.predict(&[vec![0.0], vec![10.0]]), vec![0, 1]);
    }

    #[test]
    fn midpoint_goes_to_first_class() {
        let x = vec![vec![-2.0], vec![0.0], vec![2.0], vec![4.0]];
        let m = GaussianNb::fit(&x, &[0, 0, 1, 1], 2).unwrap();
        assert_eq!(m.predict(&[vec![1.0]]), vec![0]);
    }

    #[test]
    fn posterior_matches_hand_bayes() {
        // Class 0 at {0, 2}, class 1 at {3, 5, 7}.
        let x = vec![vec![0.0], vec![2.0], vec![3.0], vec![5.0], vec![7.0]];
        let m = GaussianNb::fit(&x, &[0, 0, 1, 1, 1], 2).unwrap();
        let eps = 1e-9 * 5.84;
        let (v0, v1) = (1.0 + eps, 8.0 / 3.0 + eps);
        let pdf = |x: f64, m: f64, v: f64| (-(x - m).powi(2) / (2.0 * v)).exp() / (2.0 * std::f64::consts::PI * v).sqrt();
        for q in [-1.0, 2.5, 3.0, 6.0] {
            let a = 0.4 * pdf(q, 1.0, v0);
            let b = 0.6 * pdf(q, 5.0, v1);
            let lp = m.log_posterior(&[q]);
            assert_relative_eq!(lp[0].exp(), a / (a + b), epsilon = 1e-9);
            assert_relative_eq!(lp[1].exp(), b / (a + b), epsilon = 1e-9);
        }
    }

    #[test]
    fn variances_floored_and_priors_sum_to_one() {
        let x = vec![vec![1.0, 5.0], vec![1.0, 7.0], vec![1.0, 9.0]];
        let m = GaussianNb::fit(&x, &[0, 0, 1], 3).unwrap();
        assert!(m.variances.iter().flatten().all(|v| *v >= m.epsilon && *v > 0.0));
        let scores = m.scores(&[vec![1.0, 6.0]]);
        assert_eq!(scores[0][2], f64::NEG_INFINITY);
        let p: f64 = scores[0].iter().map(|s| s.exp()).sum();
        assert_relative_eq!(p, 1.0, epsilon = 1e-12);
    }
}
