use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: usize,
    pub support: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Set when a metric's denominator was zero and it was reported as 0.
    pub undefined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AucReport {
    /// Per class; `None` when the class has no positives or no negatives.
    pub per_class: Vec<Option<f64>>,
    pub macro_auc: Option<f64>,
    pub skipped: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: u64,
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    /// Classes present in the truth or the predictions.
    pub per_class: Vec<ClassMetrics>,
    /// Rows are true classes, columns predicted.
    pub confusion: Vec<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roc_auc: Option<AucReport>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Accuracy, per-class and macro precision/recall/F1, and the confusion
/// matrix. Macro averages run over classes seen in either label vector.
pub fn evaluate(truth: &[usize], pred: &[usize], n_classes: usize) -> EvalReport {
    assert_eq!(truth.len(), pred.len(), "label vectors differ in length");
    let mut confusion = vec![vec![0u64; n_classes]; n_classes];
    for (&t, &p) in truth.iter().zip(pred) {
        confusion[t][p] += 1;
    }
    let n = truth.len() as u64;
    let correct: u64 = (0..n_classes).map(|c| confusion[c][c]).sum();
    let per_class: Vec<ClassMetrics> = (0..n_classes)
        .filter_map(|c| {
            let tp = confusion[c][c];
            let support: u64 = confusion[c].iter().sum();
            let predicted: u64 = confusion.iter().map(|r| r[c]).sum();
            if support == 0 && predicted == 0 {
                return None;
            }
            let precision = ratio(tp, predicted);
            let recall = ratio(tp, support);
            let (p, r) = (precision.unwrap_or(0.0), recall.unwrap_or(0.0));
            let f1 = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
            Some(ClassMetrics {
                class: c,
                support,
                precision: p,
                recall: r,
                f1,
                undefined: precision.is_none() || recall.is_none() || p + r == 0.0,
            })
        })
        .collect();
    let mean = |f: fn(&ClassMetrics) -> f64| {
        if per_class.is_empty() {
            0.0
        } else {
            per_class.iter().map(f).sum::<f64>() / per_class.len() as f64
        }
    };
    EvalReport {
        n,
        accuracy: ratio(correct, n).unwrap_or(0.0),
        macro_precision: mean(|m| m.precision),
        macro_recall: mean(|m| m.recall),
        macro_f1: mean(|m| m.f1),
        per_class,
        confusion,
        roc_auc: None,
    }
}

/// Normalized Mann–Whitney U of `scores` with `positive` rows as the
/// positive class; tied scores count half.
fn auc_binary(scores: &[f64], positive: &[bool]) -> Option<f64> {
    let n_pos = positive.iter().filter(|p| **p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Sum of 1-based mid-ranks of the positives.
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += mid * order[i..=j].iter().filter(|&&k| positive[k]).count() as f64;
        i = j + 1;
    }
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Some(u / (n_pos as f64 * n_neg as f64))
}

/// One-vs-rest ROC AUC per class and its unweighted mean over the classes
/// that could be scored.
pub fn roc_auc_ovr(scores: &[Vec<f64>], truth: &[usize], n_classes: usize) -> AucReport {
    let per_class: Vec<Option<f64>> = (0..n_classes)
        .map(|c| {
            let s: Vec<f64> = scores.iter().map(|r| r[c]).collect();
            let pos: Vec<bool> = truth.iter().map(|&t| t == c).collect();
            auc_binary(&s, &pos)
        })
        .collect();
    let skipped = (0..n_classes).filter(|&c| per_class[c].is_none()).collect();
    let valid: Vec<f64> = per_class.iter().flatten().copied().collect();
    AucReport {
        macro_auc: (!valid.is_empty()).then(|| valid.iter().sum::<f64>() / valid.len() as f64),
        per_class,
        skipped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn binary_hand_case() {
        let mut truth = vec![1; 10];
        truth.extend(vec![0; 10]);
        let mut pred = vec![1; 8];
        pred.extend([0, 0]);
        pred.extend([1, 1]);
        pred.extend(vec![0; 8]);
        let r = evaluate(&truth, &pred, 2);
        assert_eq!(r.accuracy, 0.8);
        let m = &r.per_class[1];
        assert_eq!((m.precision, m.recall), (0.8, 0.8));
        assert!((m.f1 - 0.8).abs() < 1e-15);
        assert_eq!(r.confusion, vec![vec![8, 2], vec![2, 8]]);
    }

    #[test]
    fn perfect_predictions() {
        let y = [0, 1, 2, 2, 1];
        let r = evaluate(&y, &y, 3);
        assert_eq!((r.accuracy, r.macro_precision, r.macro_recall, r.macro_f1), (1.0, 1.0, 1.0, 1.0));
        assert_eq!(r.confusion[2], vec![0, 0, 2]);
    }

    #[test]
    fn counting_oracle_three_classes() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let truth: Vec<usize> = (0..200).map(|_| rng.gen_range(0..3)).collect();
        let pred: Vec<usize> = (0..200).map(|_| rng.gen_range(0..3)).collect();
        let r = evaluate(&truth, &pred, 3);
        for c in 0..3 {
            let tp = (0..200).filter(|&i| truth[i] == c && pred[i] == c).count() as f64;
            let fp = (0..200).filter(|&i| truth[i] != c && pred[i] == c).count() as f64;
            let fn_ = (0..200).filter(|&i| truth[i] == c && pred[i] != c).count() as f64;
            let m = &r.per_class[c];
            assert_eq!(m.precision, tp / (tp + fp));
            assert_eq!(m.recall, tp / (tp + fn_));
            assert_eq!(m.f1, 2.0 * m.precision * m.recall / (m.precision + m.recall));
        }
        let trace: u64 = (0..3).map(|c| r.confusion[c][c]).sum();
        assert_eq!(r.accuracy, trace as f64 / 200.0);
        let weighted: f64 = r.per_class.iter().map(|m| m.recall * m.support as f64).sum::<f64>() / 200.0;
        assert!((weighted - r.accuracy).abs() < 1e-12);
    }

    #[test]
    fn zero_denominator_flagged() {
        let r = evaluate(&[0, 0, 1], &[0, 0, 0], 2);
        assert_eq!(r.per_class[1].precision, 0.0);
        assert!(r.per_class[1].undefined);
        assert!(!r.per_class[0].undefined);
    }

    fn pair_oracle(s: &[f64], pos: &[bool]) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..s.len() {
            for j in 0..s.len() {
                if pos[i] && !pos[j] {
                    den += 1.0;
                    num += if s[i] > s[j] { 1.0 } else if s[i] == s[j] { 0.5 } else { 0.0 };
                }
            }
        }
        num / den
    }

    #[test]
    fn auc_cases() {
        let perfect = roc_auc_ovr(&[vec![0.9, 0.1], vec![0.8, 0.2], vec![0.1, 0.9]], &[0, 0, 1], 2);
        assert_eq!(perfect.per_class, vec![Some(1.0), Some(1.0)]);
        let flat = roc_auc_ovr(&[vec![0.5], vec![0.5], vec![0.5]], &[0, 1, 0], 1);
        assert_eq!(flat.per_class, vec![Some(0.5)]);
        let missing = roc_auc_ovr(&[vec![0.2, 0.8, 0.0], vec![0.6, 0.4, 0.0]], &[1, 0], 3);
        assert_eq!(missing.skipped, vec![2]);
        assert_eq!(missing.macro_auc, Some(1.0));

        let s = [0.3, 0.7, 0.7, 0.1, 0.5, 0.7];
        let pos = [true, true, false, false, true, false];
        assert_eq!(auc_binary(&s, &pos).unwrap(), pair_oracle(&s, &pos));
    }
}
