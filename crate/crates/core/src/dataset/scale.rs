use serde::{Deserialize, Serialize};

/// Per-feature z-scoring with moments taken from training rows only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    /// Population standard deviation; zero marks a constant feature.
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &[Vec<f64>]) -> Self {
        let d = x.first().map_or(0, Vec::len);
        let n = x.len().max(1) as f64;
        let mut mean = vec![0.0; d];
        for row in x {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for row in x {
            for j in 0..d {
                var[j] += (row[j] - mean[j]).powi(2);
            }
        }
        let std = var.into_iter().map(|v| (v / n).sqrt()).collect();
        Self { mean, std }
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| if *s > 0.0 { (v - m) / s } else { 0.0 })
            .collect()
    }

    pub fn transform(&self, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        x.iter().map(|r| self.transform_row(r)).collect()
    }

    /// Constant features come back as their mean.
    pub fn inverse(&self, z: &[Vec<f64>]) -> Vec<Vec<f64>> {
        z.iter()
            .map(|r| {
                r.iter()
                    .zip(self.mean.iter().zip(&self.std))
                    .map(|(v, (m, s))| v * s + m)
                    .collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn col(x: &[Vec<f64>], j: usize) -> Vec<f64> {
        x.iter().map(|r| r[j]).collect()
    }

    #[test]
    fn fit_set_is_standard_and_constant_maps_to_zero() {
        let x = vec![vec![1.0, 5.0], vec![2.0, 5.0], vec![6.0, 5.0]];
        let s = Standardizer::fit(&x);
        let z = s.transform(&x);
        let c0 = col(&z, 0);
        let mean: f64 = c0.iter().sum::<f64>() / 3.0;
        let var: f64 = c0.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 3.0;
        assert!(mean.abs() < 1e-12);
        assert!((var.sqrt() - 1.0).abs() < 1e-12);
        assert_eq!(col(&z, 1), vec![0.0; 3]);
    }

    #[test]
    fn applies_training_moments() {
        let s = Standardizer::fit(&[vec![0.0], vec![2.0]]);
        assert_eq!(s.transform(&[vec![4.0]]), vec![vec![3.0]]);
    }

    proptest! {
        #[test]
        fn inverse_round_trip(rows in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 3), 2..20)) {
            let s = Standardizer::fit(&rows);
            let back = s.inverse(&s.transform(&rows));
            for (r, b) in rows.iter().zip(&back) {
                for j in 0..3 {
                    if s.std[j] > 1e-6 {
                        prop_assert!((r[j] - b[j]).abs() <= 1e-9 * r[j].abs().max(1.0));
                    }
                }
            }
        }
    }
}
