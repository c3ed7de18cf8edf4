//! One-vs-rest soft-margin SVM trained by SMO with second-order working-set
//! selection.

use std::borrow::Cow;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::params::{get_f64, get_str, grid_of, params_of, resolve};
use super::{check_training_set, Classifier, Grid, MlError, ModelFamily, ParamValue, Params};

const TOLERANCE: f64 = 1e-3;
const MAX_PASSES: usize = 10_000;
const TAU: f64 = 1e-12;
/// Largest training set whose Gram matrix is kept in memory.
const DENSE_GRAM_LIMIT: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Kernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            Kernel::Rbf { gamma } => (-gamma * a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>()).exp(),
        }
    }
}

enum Gram<'a> {
    Dense { k: Vec<f64>, n: usize },
    Lazy { x: &'a [Vec<f64>], kernel: Kernel },
}

impl<'a> Gram<'a> {
    fn new(x: &'a [Vec<f64>], kernel: Kernel) -> Self {
        let n = x.len();
        if n > DENSE_GRAM_LIMIT {
            return Gram::Lazy { x, kernel };
        }
        let k = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| x.iter().map(move |b| kernel.eval(&x[i], b)))
            .collect();
        Gram::Dense { k, n }
    }

    fn row(&self, i: usize) -> Cow<'_, [f64]> {
        match self {
            Gram::Dense { k, n } => Cow::Borrowed(&k[i * n..(i + 1) * n]),
            Gram::Lazy { x, kernel } => Cow::Owned(x.iter().map(|b| kernel.eval(&x[i], b)).collect()),
        }
    }

    fn diag(&self, i: usize) -> f64 {
        match self {
            Gram::Dense { k, n } => k[i * n + i],
            Gram::Lazy { x, kernel } => kernel.eval(&x[i], &x[i]),
        }
    }
}

/// Dual solution of one binary problem.
struct Solution {
    alpha: Vec<f64>,
    rho: f64,
    gap: f64,
    iterations: usize,
    converged: bool,
}

/// Minimizes `½αᵀQα − Σα` subject to `0 ≤ α ≤ c` and `yᵀα = 0`, where
/// `Q_ij = y_i y_j K_ij` and `y` is ±1.
fn solve(gram: &Gram, y: &[f64], c: f64) -> Solution {
    let n = y.len();
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let max_iter = MAX_PASSES.saturating_mul(n.max(1));
    let up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let low = |a: f64, yt: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < c);

    let mut iterations = 0;
    let mut gap = f64::INFINITY;
    let mut converged = false;
    while iterations < max_iter {
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            if up(alpha[t], y[t]) && -y[t] * grad[t] >= gmax {
                gmax = -y[t] * grad[t];
                i = t;
            }
        }
        if i == usize::MAX {
            gap = 0.0;
            converged = true;
            break;
        }
        let ki = gram.row(i);
        let kii = ki[i];
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut obj_min = f64::INFINITY;
        for t in 0..n {
            if !low(alpha[t], y[t]) {
                continue;
            }
            gmax2 = gmax2.max(y[t] * grad[t]);
            let b = gmax + y[t] * grad[t];
            if b > 0.0 {
                let a = kii + gram.diag(t) - 2.0 * ki[t];
                let a = if a > 0.0 { a } else { TAU };
                let obj = -(b * b) / a;
                if obj <= obj_min {
                    obj_min = obj;
                    j = t;
                }
            }
        }
        gap = gmax + gmax2;
        if gap < TOLERANCE || j == usize::MAX {
            converged = true;
            break;
        }
        iterations += 1;

        let kj = gram.row(j);
        let (ai_old, aj_old) = (alpha[i], alpha[j]);
        let quad = {
            let q = kii + kj[j] - 2.0 * ki[j];
            if q > 0.0 { q } else { TAU }
        };
        let (mut ai, mut aj) = (ai_old, aj_old);
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        alpha[i] = ai;
        alpha[j] = aj;
        let (di, dj) = (ai - ai_old, aj - aj_old);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * ki[t] * di + y[j] * kj[t] * dj);
        }
    }

    // Offset: mean of y·∇ over free vectors, else the middle of the feasible range.
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free_sum, mut free_n) = (0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 { ub = ub.min(yg) } else { lb = lb.max(yg) }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 { ub = ub.min(yg) } else { lb = lb.max(yg) }
        } else {
            free_n += 1;
            free_sum += yg;
        }
    }
    let rho = if free_n > 0 { free_sum / free_n as f64 } else { (ub + lb) / 2.0 };
    Solution {
        alpha,
        rho,
        gap,
        iterations,
        converged,
    }
}

/// `f(x) = Σ coef_i K(sv_i, x) + bias`; positive means "this class".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryMachine {
    pub support_vectors: Vec<Vec<f64>>,
    /// `α_i y_i` for each support vector.
    pub coef: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Maximal KKT violation at exit.
    pub kkt_gap: f64,
}

impl BinaryMachine {
    pub fn decision(&self, kernel: &Kernel, row: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.coef)
            .map(|(sv, c)| c * kernel.eval(sv, row))
            .sum::<f64>()
            + self.bias
    }

    fn constant(bias: f64) -> Self {
        Self {
            support_vectors: Vec::new(),
            coef: Vec::new(),
            bias,
            iterations: 0,
            converged: true,
            kkt_gap: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Svm {
    pub kernel: Kernel,
    pub c: f64,
    /// One machine per class; `None` for a class absent from training.
    pub machines: Vec<Option<BinaryMachine>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gamma {
    /// `1 / (d · mean per-feature variance)`.
    Scale,
    /// `1 / d`.
    Auto,
    Value(f64),
}

impl Gamma {
    pub fn resolve(self, x: &[Vec<f64>]) -> f64 {
        let d = x[0].len().max(1) as f64;
        match self {
            Gamma::Value(g) => g,
            Gamma::Auto => 1.0 / d,
            Gamma::Scale => {
                let n = x.len() as f64;
                let mean_var = (0..x[0].len())
                    .map(|j| {
                        let m = x.iter().map(|r| r[j]).sum::<f64>() / n;
                        x.iter().map(|r| (r[j] - m).powi(2)).sum::<f64>() / n
                    })
                    .sum::<f64>()
                    / d;
                if mean_var > 0.0 { 1.0 / (d * mean_var) } else { 1.0 }
            }
        }
    }
}

impl Svm {
    pub fn fit(x: &[Vec<f64>], y: &[usize], n_classes: usize, kernel: Kernel, c: f64) -> Result<Self, MlError> {
        check_training_set(x, y, n_classes)?;
        let gram = Gram::new(x, kernel);
        let machines = (0..n_classes)
            .into_par_iter()
            .map(|class| {
                let yb: Vec<f64> = y.iter().map(|&l| if l == class { 1.0 } else { -1.0 }).collect();
                let pos = yb.iter().filter(|v| **v > 0.0).count();
                if pos == 0 {
                    return None;
                }
                if pos == yb.len() {
                    return Some(BinaryMachine::constant(1.0));
                }
                let s = solve(&gram, &yb, c);
                if !s.converged {
                    log::warn!(
                        "SVM machine for class {class} stopped after {} iterations with KKT violation {:.3e}",
                        s.iterations,
                        s.gap
                    );
                }
                let (support_vectors, coef) = s
                    .alpha
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| **a > 0.0)
                    .map(|(t, a)| (x[t].clone(), a * yb[t]))
                    .unzip();
                Some(BinaryMachine {
                    support_vectors,
                    coef,
                    bias: -s.rho,
                    iterations: s.iterations,
                    converged: s.converged,
                    kkt_gap: s.gap,
                })
            })
            .collect();
        Ok(Self { kernel, c, machines })
    }

    pub fn decision_row(&self, row: &[f64]) -> Vec<f64> {
        self.machines
            .iter()
            .map(|m| m.as_ref().map_or(f64::NEG_INFINITY, |m| m.decision(&self.kernel, row)))
            .collect()
    }
}

impl Classifier for Svm {
    fn family(&self) -> &'static str {
        "svm"
    }

    fn n_classes(&self) -> usize {
        self.machines.len()
    }

    /// Raw one-vs-rest decision values.
    fn scores(&self, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        x.par_iter().map(|r| self.decision_row(r)).collect()
    }

    fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("model serializes")
    }
}

pub struct SvmFamily;

impl ModelFamily for SvmFamily {
    fn name(&self) -> &'static str {
        "svm"
    }

    fn default_params(&self) -> Params {
        params_of([
            ("C", ParamValue::Float(1.0)),
            ("kernel", ParamValue::Str("rbf".into())),
            ("gamma", ParamValue::Str("scale".into())),
        ])
    }

    fn default_grid(&self) -> Grid {
        use ParamValue::{Float, Str};
        grid_of([
            ("C", vec![Float(0.1), Float(1.0), Float(10.0), Float(100.0)]),
            ("kernel", vec![Str("linear".into()), Str("rbf".into())]),
            ("gamma", vec![Str("scale".into()), Str("auto".into())]),
        ])
    }

    fn fit(
        &self,
        x: &[Vec<f64>],
        y: &[usize],
        n_classes: usize,
        params: &Params,
        _seed: u64,
    ) -> Result<Box<dyn Classifier>, MlError> {
        check_training_set(x, y, n_classes)?;
        let p = resolve(self.default_params(), params, self.name())?;
        let c = get_f64(&p, "C")?;
        let gamma = match p.get("gamma") {
            Some(ParamValue::Str(s)) if s == "scale" => Gamma::Scale,
            Some(ParamValue::Str(s)) if s == "auto" => Gamma::Auto,
            _ => Gamma::Value(get_f64(&p, "gamma")?),
        };
        let kernel = match get_str(&p, "kernel")? {
            "linear" => Kernel::Linear,
            "rbf" => Kernel::Rbf { gamma: gamma.resolve(x) },
            other => return Err(MlError::Param(format!("unknown kernel {other:?}"))),
        };
        Ok(Box::new(Svm::fit(x, y, n_classes, kernel, c)?))
    }

    fn load(&self, value: serde_json::Value) -> Result<Box<dyn Classifier>, MlError> {
        let m: Svm = serde_json::from_value(value).map_err(|e| MlError::Model(e.to_string()))?;
        Ok(Box::new(m))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dual_objective(x: &[Vec<f64>], y: &[f64], alpha: &[f64], k: Kernel) -> f64 {
        let mut q = 0.0;
        for i in 0..x.len() {
            for j in 0..x.len() {
                q += alpha[i] * alpha[j] * y[i] * y[j] * k.eval(&x[i], &x[j]);
            }
        }
        0.5 * q - alpha.iter().sum::<f64>()
    }

    #[test]
    fn symmetric_pair_boundary_at_zero() {
        let x = vec![vec![-1.0], vec![1.0]];
        let m = Svm::fit(&x, &[0, 1], 2, Kernel::Linear, 1000.0).unwrap();
        let f = m.machines[1].as_ref().unwrap();
        let w = f.coef.iter().zip(&f.support_vectors).map(|(c, s)| c * s[0]).sum::<f64>();
        let boundary = -f.bias / w;
        assert!(boundary.abs() < 1e-3, "{boundary}");
        assert_eq!(m.predict(&[vec![-0.01], vec![0.01]]), vec![0, 1]);
    }

    #[test]
    fn dual_matches_grid_oracle() {
        let x = vec![vec![0.0, 0.0], vec![1.0, 0.5], vec![2.0, 2.0], vec![0.5, 1.5]];
        let y = [1.0, 1.0, -1.0, -1.0];
        let c = 1.0;
        let k = Kernel::Rbf { gamma: 0.5 };
        let s = solve(&Gram::new(&x, k), &y, c);
        let got = dual_objective(&x, &y, &s.alpha, k);

        // α4 is fixed by the equality constraint α1 + α2 = α3 + α4.
        let steps = 200;
        let mut best = f64::INFINITY;
        for a in 0..=steps {
            for b in 0..=steps {
                for d in 0..=steps {
                    let (a1, a2, a3) = (a as f64 / steps as f64, b as f64 / steps as f64, d as f64 / steps as f64);
                    let a4 = a1 + a2 - a3;
                    if !(0.0..=c).contains(&a4) {
                        continue;
                    }
                    best = best.min(dual_objective(&x, &y, &[a1, a2, a3, a4], k));
                }
            }
        }
        assert!((got - best).abs() < 1e-3, "{got} vs {best}");
        assert!(got <= best + 1e-9);
    }

    #[test]
    fn kkt_conditions_on_random_problem() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<Vec<f64>> = (0..80).map(|_| vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]).collect();
        let y: Vec<usize> = x.iter().map(|r| usize::from(r[0] * r[0] + r[1] + rng.gen_range(-0.5..0.5) > 1.0)).collect();
        let c = 5.0;
        let m = Svm::fit(&x, &y, 2, Kernel::Rbf { gamma: 0.5 }, c).unwrap();
        let f = m.machines[1].as_ref().unwrap();
        assert!(f.converged);
        for (sv, coef) in f.support_vectors.iter().zip(&f.coef) {
            let a = coef.abs();
            assert!(a > 0.0 && a <= c + 1e-12);
            if a < c - 1e-9 {
                let margin = coef.signum() * f.decision(&m.kernel, sv);
                assert!((margin - 1.0).abs() <= 10.0 * TOLERANCE, "{margin}");
            }
        }
        let dual_sum: f64 = f.coef.iter().sum();
        assert!(dual_sum.abs() < 1e-9);
    }

    #[test]
    fn tiny_gamma_rbf_agrees_with_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x: Vec<Vec<f64>> = (0..60)
            .map(|i| {
                let side = if i % 2 == 0 { 1.5 } else { -1.5 };
                vec![side + rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]
            })
            .collect();
        let y: Vec<usize> = (0..60).map(|i| i % 2).collect();
        let lin = Svm::fit(&x, &y, 2, Kernel::Linear, 10.0).unwrap();
        let rbf = Svm::fit(&x, &y, 2, Kernel::Rbf { gamma: 1e-3 }, 1e4).unwrap();
        let probe: Vec<Vec<f64>> = (0..50).map(|_| vec![rng.gen_range(-3.0..3.0), rng.gen_range(-2.0..2.0)]).collect();
        let agree = lin.predict(&probe).iter().zip(rbf.predict(&probe)).filter(|(a, b)| **a == *b).count();
        assert!(agree >= 48, "{agree}");
        assert_eq!(rbf.predict(&x), y);
    }

    #[test]
    fn gamma_modes() {
        let x = vec![vec![0.0, 0.0], vec![2.0, 4.0]];
        assert_eq!(Gamma::Auto.resolve(&x), 0.5);
        // Per-feature variances 1 and 4, mean 2.5.
        assert!((Gamma::Scale.resolve(&x) - 1.0 / 5.0).abs() < 1e-15);
    }
}
