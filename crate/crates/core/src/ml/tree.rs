//! CART classification trees with Gini impurity.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::params::{get_opt_usize, get_usize, grid_of, params_of, resolve};
use super::{check_training_set, Classifier, Grid, MlError, ModelFamily, ParamValue, Params};
use crate::seed::rng_for;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    /// Features drawn per split; `None` means all of them.
    pub max_features: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            max_features: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        /// `n·gini(parent) − n_l·gini(left) − n_r·gini(right)`, in samples.
        gain: f64,
    },
    Leaf { counts: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub n_classes: usize,
    pub n_features: usize,
    pub n_samples: usize,
    pub nodes: Vec<Node>,
}

/// `n·gini` for a class-count vector summing to `n`.
fn weighted_gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let sq: f64 = counts.iter().map(|&c| (c * c) as f64).sum();
    n as f64 - sq / n as f64
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    score: f64,
}

struct Builder<'a, R> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    n_classes: usize,
    params: &'a TreeParams,
    rng: R,
    nodes: Vec<Node>,
}

impl<R: Rng> Builder<'_, R> {
    fn counts(&self, idx: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.n_classes];
        idx.iter().for_each(|&i| c[self.y[i]] += 1);
        c
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let d = self.x[0].len();
        match self.params.max_features {
            Some(m) if m < d => {
                let mut f = sample(&mut self.rng, d, m).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..d).collect(),
        }
    }

    fn best_split(&mut self, idx: &[usize], parent: &[usize]) -> Option<BestSplit> {
        let n = idx.len();
        let min_leaf = self.params.min_samples_leaf.max(1);
        let mut best: Option<BestSplit> = None;
        let mut sorted = idx.to_vec();
        for f in self.candidate_features() {
            let x = self.x;
            sorted.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]));
            let mut left = vec![0usize; self.n_classes];
            let mut right = parent.to_vec();
            for p in 1..n {
                let moved = self.y[sorted[p - 1]];
                left[moved] += 1;
                right[moved] -= 1;
                let (lo, hi) = (x[sorted[p - 1]][f], x[sorted[p]][f]);
                if lo == hi || p < min_leaf || n - p < min_leaf {
                    continue;
                }
                let score = weighted_gini(&left, p) + weighted_gini(&right, n - p);
                if best.as_ref().is_none_or(|b| score < b.score) {
                    let mid = lo + (hi - lo) / 2.0;
                    let threshold = if mid >= hi { lo } else { mid };
                    best = Some(BestSplit { feature: f, threshold, score });
                }
            }
        }
        best
    }

    fn build(&mut self, idx: Vec<usize>) {
        // (slot, rows, depth); slots are filled in pre-order.
        let mut stack = vec![(0usize, idx, 0usize)];
        self.nodes.push(Node::Leaf { counts: Vec::new() });
        while let Some((slot, rows, depth)) = stack.pop() {
            let counts = self.counts(&rows);
            let n = rows.len();
            let parent = weighted_gini(&counts, n);
            let stop = parent <= 0.0
                || n < self.params.min_samples_split.max(2)
                || self.params.max_depth.is_some_and(|m| depth >= m);
            let split = if stop { None } else { self.best_split(&rows, &counts) };
            match split {
                // Zero-gain splits are refused so every split strictly lowers impurity.
                Some(s) if parent - s.score > 1e-11 * n as f64 => {
                    let (l, r): (Vec<usize>, Vec<usize>) =
                        rows.iter().partition(|&&i| self.x[i][s.feature] <= s.threshold);
                    let left = self.nodes.len();
                    self.nodes.push(Node::Leaf { counts: Vec::new() });
                    self.nodes.push(Node::Leaf { counts: Vec::new() });
                    self.nodes[slot] = Node::Split {
                        feature: s.feature,
                        threshold: s.threshold,
                        left,
                        right: left + 1,
                        gain: parent - s.score,
                    };
                    stack.push((left + 1, r, depth + 1));
                    stack.push((left, l, depth + 1));
                }
                _ => self.nodes[slot] = Node::Leaf { counts },
            }
        }
    }
}

impl DecisionTree {
    /// Grows a tree on the rows listed in `idx` (repeats allowed).
    pub fn fit_rows<R: Rng>(
        x: &[Vec<f64>],
        y: &[usize],
        idx: Vec<usize>,
        n_classes: usize,
        params: &TreeParams,
        rng: R,
    ) -> Self {
        let n_samples = idx.len();
        let mut b = Builder {
            x,
            y,
            n_classes,
            params,
            rng,
            nodes: Vec::new(),
        };
        b.build(idx);
        Self {
            n_classes,
            n_features: x[0].len(),
            n_samples,
            nodes: b.nodes,
        }
    }

    pub fn fit(x: &[Vec<f64>], y: &[usize], n_classes: usize, params: &TreeParams, seed: u64) -> Result<Self, MlError> {
        check_training_set(x, y, n_classes)?;
        Ok(Self::fit_rows(x, y, (0..x.len()).collect(), n_classes, params, rng_for(seed, "tree-features", 0)))
    }

    pub fn leaf(&self, row: &[f64]) -> &[usize] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => at = if row[*feature] <= *threshold { *left } else { *right },
                Node::Leaf { counts } => return counts,
            }
        }
    }

    /// Majority class of the leaf, lowest index on ties.
    pub fn predict_row(&self, row: &[f64]) -> usize {
        let c = self.leaf(row);
        let mut best = 0;
        for (i, &v) in c.iter().enumerate() {
            if v > c[best] {
                best = i;
            }
        }
        best
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
                Node::Leaf { .. } => 0,
            }
        }
        walk(&self.nodes, 0)
    }

    /// Impurity decrease per feature, as a fraction of the training size.
    pub fn feature_gains(&self) -> Vec<f64> {
        let mut g = vec![0.0; self.n_features];
        for node in &self.nodes {
            if let Node::Split { feature, gain, .. } = node {
                g[*feature] += gain / self.n_samples as f64;
            }
        }
        g
    }
}

pub(crate) fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let total: f64 = v.iter().sum();
    if total > 0.0 {
        v.iter_mut().for_each(|x| *x /= total);
    }
    v
}

impl Classifier for DecisionTree {
    fn family(&self) -> &'static str {
        "dt"
    }

    fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// Class frequencies of the reached leaf.
    fn scores(&self, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        x.iter()
            .map(|r| {
                let c = self.leaf(r);
                let n: usize = c.iter().sum();
                c.iter().map(|&v| v as f64 / n as f64).collect()
            })
            .collect()
    }

    fn predict(&self, x: &[Vec<f64>]) -> Vec<usize> {
        x.iter().map(|r| self.predict_row(r)).collect()
    }

    fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("model serializes")
    }

    fn gini_importance(&self) -> Option<Vec<f64>> {
        Some(normalize(self.feature_gains()))
    }
}

pub(crate) fn tree_params(p: &Params) -> Result<TreeParams, MlError> {
    Ok(TreeParams {
        max_depth: get_opt_usize(p, "max_depth")?,
        min_samples_split: get_usize(p, "min_samples_split", 2)?,
        min_samples_leaf: get_usize(p, "min_samples_leaf", 1)?,
        max_features: None,
    })
}

pub struct DtFamily;

impl ModelFamily for DtFamily {
    fn name(&self) -> &'static str {
        "dt"
    }

    fn default_params(&self) -> Params {
        params_of([
            ("max_depth", ParamValue::None),
            ("min_samples_split", ParamValue::Int(2)),
            ("min_samples_leaf", ParamValue::Int(1)),
        ])
    }

    fn default_grid(&self) -> Grid {
        use ParamValue::{Int, None};
        grid_of([
            ("max_depth", vec![None, Int(5), Int(10), Int(20)]),
            ("min_samples_split", vec![Int(2), Int(5), Int(10)]),
            ("min_samples_leaf", vec![Int(1), Int(2), Int(4)]),
        ])
    }

    fn fit(
        &self,
        x: &[Vec<f64>],
        y: &[usize],
        n_classes: usize,
        params: &Params,
        seed: u64,
    ) -> Result<Box<dyn Classifier>, MlError> {
        let p = tree_params(&resolve(self.default_params(), params, self.name())?)?;
        Ok(Box::new(DecisionTree::fit(x, y, n_classes, &p, seed)?))
    }

    fn load(&self, value: serde_json::Value) -> Result<Box<dyn Classifier>, MlError> {
        let m: DecisionTree = serde_json::from_value(value).map_err(|e| MlError::Model(e.to_string()))?;
        Ok(Box::new(m))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{any, prop_assert_eq, proptest};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fit(x: &[Vec<f64>], y: &[usize], p: &TreeParams) -> DecisionTree {
        let k = y.iter().max().unwrap() + 1;
        DecisionTree::fit(x, y, k, p, 0).unwrap()
    }

    #[test]
    fn sign_split_at_root() {
        let x: Vec<Vec<f64>> = (-5..=5).filter(|v| *v != 0).map(|v| vec![v as f64]).collect();
        let y: Vec<usize> = x.iter().map(|r| usize::from(r[0] > 0.0)).collect();
        let p = TreeParams { max_depth: Some(1), ..Default::default() };
        let t = fit(&x, &y, &p);
        match &t.nodes[0] {
            Node::Split { feature, threshold, .. } => assert_eq!((*feature, *threshold), (0, 0.0)),
            n => panic!("expected split, got {n:?}"),
        }
        assert_eq!(t.predict(&x), y);
    }

    #[test]
    fn pure_input_is_one_leaf() {
        let x = vec![vec![1.0], vec![2.0], vec![3.0]];
        let t = fit(&x, &[1, 1, 1], &TreeParams::default());
        assert_eq!(t.nodes, vec![Node::Leaf { counts: vec![0, 3] }]);
    }

    #[test]
    fn root_matches_brute_force_gini() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x: Vec<Vec<f64>> = (0..30).map(|_| (0..4).map(|_| rng.gen_range(0.0..1.0)).collect()).collect();
        let y: Vec<usize> = (0..30).map(|_| rng.gen_range(0..3)).collect();
        let t = fit(&x, &y, &TreeParams { max_depth: Some(1), ..Default::default() });
        let mut brute = f64::INFINITY;
        for f in 0..4 {
            for r in &x {
                let thr = r[f];
                let (mut l, mut rr) = (vec![0; 3], vec![0; 3]);
                for (row, &c) in x.iter().zip(&y) {
                    if row[f] <= thr { l[c] += 1 } else { rr[c] += 1 }
                }
                let (nl, nr) = (l.iter().sum::<usize>(), rr.iter().sum::<usize>());
                if nl == 0 || nr == 0 {
                    continue;
                }
                let gini = |c: &[usize], n: usize| 1.0 - c.iter().map(|&v| (v as f64 / n as f64).powi(2)).sum::<f64>();
                brute = brute.min((nl as f64 * gini(&l, nl) + nr as f64 * gini(&rr, nr)) / 30.0);
            }
        }
        let Node::Split { feature, threshold, .. } = t.nodes[0] else { panic!() };
        let (mut l, mut r) = (vec![0; 3], vec![0; 3]);
        for (row, &c) in x.iter().zip(&y) {
            if row[feature] <= threshold { l[c] += 1 } else { r[c] += 1 }
        }
        let got = (weighted_gini(&l, l.iter().sum()) + weighted_gini(&r, r.iter().sum())) / 30.0;
        assert!((got - brute).abs() < 1e-12, "{got} vs {brute}");
    }

    #[test]
    fn constraints_respected() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x: Vec<Vec<f64>> = (0..200).map(|_| (0..3).map(|_| rng.gen()).collect()).collect();
        let y: Vec<usize> = (0..200).map(|_| rng.gen_range(0..2)).collect();
        let p = TreeParams { max_depth: Some(4), min_samples_split: 2, min_samples_leaf: 5, max_features: None };
        let t = fit(&x, &y, &p);
        assert!(t.depth() <= 4);
        for n in &t.nodes {
            match n {
                Node::Leaf { counts } => assert!(counts.iter().sum::<usize>() >= 5),
                Node::Split { gain, .. } => assert!(*gain > 0.0),
            }
        }
        let imp = t.gini_importance().unwrap();
        assert!((imp.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn consistent_data_is_memorised(seed in any::<u64>(), n in 5usize..60) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| rng.gen::<f64>()).collect()).collect();
            let y: Vec<usize> = (0..n).map(|_| rng.gen_range(0..3)).collect();
            let t = DecisionTree::fit(&x, &y, 3, &TreeParams::default(), 0).unwrap();
            prop_assert_eq!(t.predict(&x), y);
        }
    }
}
