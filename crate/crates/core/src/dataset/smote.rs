//! Synthetic minority oversampling.

use std::collections::BTreeMap;

use rand::Rng;

use super::DatasetError;
use crate::seed::rng_for;

#[derive(Debug, Clone, PartialEq)]
pub struct SmoteOutput {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<usize>,
    /// `true` for appended synthetic rows; originals come first, unchanged.
    pub synthetic: Vec<bool>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

/// Indices (into `members`) of the `k` nearest other members of each member.
/// Ties go to the lower row index.
fn neighbours(x: &[Vec<f64>], members: &[usize], k: usize) -> Vec<Vec<usize>> {
    members
        .iter()
        .enumerate()
        .map(|(a, &ra)| {
            let mut cand: Vec<(f64, usize, usize)> = members
                .iter()
                .enumerate()
                .filter(|(b, _)| *b != a)
                .map(|(b, &rb)| (sq_dist(&x[ra], &x[rb]), rb, b))
                .collect();
            cand.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)));
            cand.into_iter().take(k).map(|c| c.2).collect()
        })
        .collect()
}

/// Oversample every class up to the majority count by interpolating between
/// a random member and one of its `k` nearest same-class neighbours.
/// Each class draws from its own stream derived from `seed`.
pub fn smote(x: &[Vec<f64>], y: &[usize], k: usize, seed: u64) -> Result<SmoteOutput, DatasetError> {
    if k == 0 {
        return Err(DatasetError::BadNeighbourCount);
    }
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &c) in y.iter().enumerate() {
        by_class.entry(c).or_default().push(i);
    }
    let majority = by_class.values().map(Vec::len).max().unwrap_or(0);
    let mut out = SmoteOutput {
        x: x.to_vec(),
        y: y.to_vec(),
        synthetic: vec![false; y.len()],
    };
    for (&class, members) in &by_class {
        let need = majority - members.len();
        if need == 0 {
            continue;
        }
        if members.len() < 2 {
            return Err(DatasetError::SmoteSingleton { class });
        }
        let nn = neighbours(x, members, k.min(members.len() - 1));
        let mut rng = rng_for(seed, "smote", class as u64);
        for _ in 0..need {
            let a = rng.gen_range(0..members.len());
            let b = nn[a][rng.gen_range(0..nn[a].len())];
            let u: f64 = rng.gen();
            let (xa, xb) = (&x[members[a]], &x[members[b]]);
            out.x.push(xa.iter().zip(xb).map(|(p, q)| p + u * (q - p)).collect());
            out.y.push(class);
            out.synthetic.push(true);
        }
    }
    Ok(out)
}
