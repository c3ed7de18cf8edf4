use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::DatasetError;
use crate::seed::rng_for;

/// Train/test partition at the vessel level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub test_fraction: f64,
    pub seed: u64,
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
    pub train_mmsis: Vec<u64>,
    pub test_mmsis: Vec<u64>,
}

/// Shuffle the distinct MMSIs with `seed`, then move whole vessels into the
/// test set until it first holds at least `test_fraction` of the rows.
pub fn grouped_split(mmsis: &[u64], test_fraction: f64, seed: u64) -> Result<SplitPlan, DatasetError> {
    if mmsis.is_empty() {
        return Err(DatasetError::Empty);
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(DatasetError::BadFraction(test_fraction));
    }
    let mut groups: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (i, m) in mmsis.iter().enumerate() {
        groups.entry(*m).or_default().push(i);
    }
    let total = mmsis.len();
    if let Some((m, rows)) = groups
        .iter()
        .find(|(_, rows)| rows.len() as f64 > (1.0 - test_fraction) * total as f64)
    {
        return Err(DatasetError::DominantGroup {
            mmsi: *m,
            rows: rows.len(),
            total,
        });
    }
    let mut order: Vec<u64> = groups.keys().copied().collect();
    order.shuffle(&mut rng_for(seed, "grouped-split", 0));

    let target = test_fraction * total as f64;
    let mut test_count = 0usize;
    let mut test_mmsis = Vec::new();
    let mut train_mmsis = Vec::new();
    for m in order {
        if (test_count as f64) < target {
            test_count += groups[&m].len();
            test_mmsis.push(m);
        } else {
            train_mmsis.push(m);
        }
    }
    test_mmsis.sort_unstable();
    train_mmsis.sort_unstable();
    let rows_of = |ms: &[u64]| {
        let mut rows: Vec<usize> = ms.iter().flat_map(|m| groups[m].iter().copied()).collect();
        rows.sort_unstable();
        rows
    };
    Ok(SplitPlan {
        test_fraction,
        seed,
        train_rows: rows_of(&train_mmsis),
        test_rows: rows_of(&test_mmsis),
        train_mmsis,
        test_mmsis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn four_vessels_one_in_test() {
        let mmsis: Vec<u64> = (0..100).map(|i| 100 + (i % 4) as u64).collect();
        let plan = grouped_split(&mmsis, 0.2, 7).unwrap();
        assert_eq!(plan.test_mmsis.len(), 1);
        assert_eq!(plan.test_rows.len(), 25);
        assert_eq!(plan.train_rows.len(), 75);
    }

    #[test]
    fn dominant_vessel_rejected() {
        let mut mmsis = vec![1u64; 90];
        mmsis.extend(2..12);
        assert!(matches!(
            grouped_split(&mmsis, 0.2, 1),
            Err(DatasetError::DominantGroup { mmsi: 1, rows: 90, .. })
        ));
        assert!(matches!(grouped_split(&[], 0.2, 1), Err(DatasetError::Empty)));
    }

    #[test]
    fn same_seed_same_plan() {
        let mmsis: Vec<u64> = (0..300).map(|i| (i * 7 % 41) as u64).collect();
        assert_eq!(grouped_split(&mmsis, 0.2, 3).unwrap(), grouped_split(&mmsis, 0.2, 3).unwrap());
        assert_ne!(grouped_split(&mmsis, 0.2, 3).unwrap(), grouped_split(&mmsis, 0.2, 4).unwrap());
    }

    proptest! {
        #[test]
        fn vessels_never_straddle(seed in any::<u64>(), sizes in prop::collection::vec(1usize..6, 20..60)) {
            let mmsis: Vec<u64> = sizes.iter().enumerate().flat_map(|(m, &n)| std::iter::repeat_n(m as u64, n)).collect();
            let plan = grouped_split(&mmsis, 0.2, seed).unwrap();
            for m in &plan.test_mmsis {
                prop_assert!(!plan.train_mmsis.contains(m));
            }
            prop_assert_eq!(plan.train_rows.len() + plan.test_rows.len(), mmsis.len());
            let frac = plan.test_rows.len() as f64 / mmsis.len() as f64;
            prop_assert!((frac - 0.2).abs() <= 0.05 + 5.0 / mmsis.len() as f64);
        }
    }
}
