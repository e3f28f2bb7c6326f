//! Classification metrics: confusion matrix, per-class precision/recall/F1,
//! support-weighted averages, and ROC/AUC for binary scores.

use serde::Serialize;

use crate::error::{Error, Result};

/// Square count matrix; rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(counts: Vec<Vec<u64>>) -> Result<Self> {
        let k = counts.len();
        if counts.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidArgument("confusion matrix must be square".into()));
        }
        Ok(ConfusionMatrix { counts })
    }

    pub fn from_predictions(truth: &[usize], predicted: &[usize], n_classes: usize) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::InvalidArgument(format!(
                "{} labels vs {} predictions",
                truth.len(),
                predicted.len()
            )));
        }
        let mut counts = vec![vec![0u64; n_classes]; n_classes];
        for (&t, &p) in truth.iter().zip(predicted) {
            if t >= n_classes || p >= n_classes {
                return Err(Error::InvalidArgument(format!("class index out of range ({t}, {p})")));
            }
            counts[t][p] += 1;
        }
        Ok(ConfusionMatrix { counts })
    }

    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n_classes()).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_sum(&self, c: usize) -> u64 {
        self.counts[c].iter().sum()
    }

    pub fn col_sum(&self, c: usize) -> u64 {
        self.counts.iter().map(|r| r[c]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            0.0
        } else {
            self.trace() as f64 / total as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
    /// Set when a zero denominator forced a value of 0.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedAverage {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Support-weighted mean of `(support, value)` pairs; 0 when all supports are 0.
pub fn weighted_mean(pairs: &[(u64, f64)]) -> f64 {
    let total: u64 = pairs.iter().map(|p| p.0).sum();
    if total == 0 {
        return 0.0;
    }
    pairs.iter().map(|&(s, v)| s as f64 * v).sum::<f64>() / total as f64
}

pub fn precision_recall_f1(cm: &ConfusionMatrix) -> (Vec<ClassMetrics>, WeightedAverage) {
    let per_class: Vec<ClassMetrics> = (0..cm.n_classes())
        .map(|c| {
            let tp = cm.counts[c][c] as f64;
            let predicted = cm.col_sum(c);
            let support = cm.row_sum(c);
            let precision = if predicted == 0 { 0.0 } else { tp / predicted as f64 };
            let recall = if support == 0 { 0.0 } else { tp / support as f64 };
            ClassMetrics {
                precision,
                recall,
                f1: f1_score(precision, recall),
                support,
                degenerate: predicted == 0 || support == 0 || precision + recall == 0.0,
            }
        })
        .collect();
    let avg =
        |f: fn(&ClassMetrics) -> f64| weighted_mean(&per_class.iter().map(|m| (m.support, f(m))).collect::<Vec<_>>());
    let weighted = WeightedAverage {
        precision: avg(|m| m.precision),
        recall: avg(|m| m.recall),
        f1: avg(|m| m.f1),
        support: per_class.iter().map(|m| m.support).sum(),
    };
    (per_class, weighted)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RocCurve {
    /// `(false-positive rate, true-positive rate)` from (0, 0) to (1, 1).
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

/// Threshold sweep from the highest score down, one step per distinct score;
/// AUC by the trapezoidal rule.
pub fn roc_auc(labels: &[bool], scores: &[f64]) -> Result<RocCurve> {
    if labels.len() != scores.len() {
        return Err(Error::InvalidArgument(format!(
            "{} labels vs {} scores",
            labels.len(),
            scores.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidArgument("NaN score".into()));
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::InvalidArgument(
            "ROC needs at least one positive and one negative example".into(),
        ));
    }
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = 0.0;
    let mut k = 0;
    while k < order.len() {
        let s = scores[order[k]];
        while k < order.len() && scores[order[k]] == s {
            if labels[order[k]] {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        let (x0, y0) = *points.last().expect("starts non-empty");
        let (x1, y1) = (fp as f64 / neg as f64, tp as f64 / pos as f64);
        auc += (x1 - x0) * (y0 + y1) / 2.0;
        points.push((x1, y1));
    }
    Ok(RocCurve { points, auc })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub class_names: Vec<String>,
    pub per_class: Vec<ClassMetrics>,
    pub weighted: WeightedAverage,
    pub accuracy: f64,
    pub loss: Option<f64>,
    pub confusion: ConfusionMatrix,
    pub roc: Option<RocCurve>,
}

impl MetricsReport {
    pub fn from_confusion(cm: ConfusionMatrix, class_names: Vec<String>, loss: Option<f64>) -> Self {
        let (per_class, weighted) = precision_recall_f1(&cm);
        MetricsReport {
            class_names,
            per_class,
            weighted,
            accuracy: cm.accuracy(),
            loss,
            confusion: cm,
            roc: None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn confusion_csv(&self) -> String {
        let mut s = String::from("true\\predicted");
        for n in &self.class_names {
            s.push(',');
            s.push_str(n);
        }
        s.push('\n');
        for (n, row) in self.class_names.iter().zip(&self.confusion.counts) {
            s.push_str(n);
            for c in row {
                s.push(',');
                s.push_str(&c.to_string());
            }
            s.push('\n');
        }
        s
    }

    pub fn roc_csv(&self) -> Option<String> {
        let roc = self.roc.as_ref()?;
        let mut s = String::from("fpr,tpr\n");
        for (x, y) in &roc.points {
            s.push_str(&format!("{x},{y}\n"));
        }
        Some(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;
    use proptest::prelude::*;

    #[test]
    fn perfect_two_class() {
        let cm = ConfusionMatrix::new(vec![vec![5, 0], vec![0, 5]]).unwrap();
        let (pc, w) = precision_recall_f1(&cm);
        for m in &pc {
            assert_eq!((m.precision, m.recall, m.f1), (1.0, 1.0, 1.0));
        }
        assert_eq!(w.support, 10);
        assert_eq!(cm.accuracy(), 1.0);
    }

    #[test]
    fn f1_from_rounded_table_values() {
        assert!((f1_score(0.92, 0.94) - 0.9299).abs() < 5e-5);
        let w = weighted_mean(&[(847, 0.68), (3679, 0.93)]);
        assert!((w - 0.8832).abs() < 5e-5);
    }

    #[test]
    fn degenerate_denominators_are_flagged_zero() {
        let cm = ConfusionMatrix::new(vec![vec![3, 0], vec![0, 0]]).unwrap();
        let (pc, _) = precision_recall_f1(&cm);
        assert_eq!(pc[0].recall, 1.0);
        assert!(!pc[0].degenerate);
        assert_eq!(pc[1].precision, 0.0);
        assert!(pc[1].degenerate);
    }

    #[test]
    fn non_square_rejected() {
        assert!(ConfusionMatrix::new(vec![vec![1, 2], vec![3]]).is_err());
    }

    #[test]
    fn roc_perfect_and_reversed() {
        let labels = [true, true, false, false];
        let scores = [0.9, 0.8, 0.3, 0.1];
        let r = roc_auc(&labels, &scores).unwrap();
        assert_eq!(r.auc, 1.0);
        assert_eq!(r.points.first(), Some(&(0.0, 0.0)));
        assert_eq!(r.points.last(), Some(&(1.0, 1.0)));
        let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
        assert!(roc_auc(&labels, &neg).unwrap().auc.abs() < 1e-12);
        assert!(roc_auc(&[true, true], &[0.1, 0.2]).is_err());
    }

    #[test]
    fn roc_ties_form_one_step() {
        let r = roc_auc(&[true, false], &[0.5, 0.5]).unwrap();
        assert_eq!(r.points, vec![(0.0, 0.0), (1.0, 1.0)]);
        assert_eq!(r.auc, 0.5);
    }

    #[test]
    fn roc_null_model_near_half() {
        let mut rng = SeededRng::new(2024);
        let labels: Vec<bool> = (0..10_000).map(|_| rng.next_f64() < 0.5).collect();
        let scores: Vec<f64> = (0..10_000).map(|_| rng.next_f64()).collect();
        let auc = roc_auc(&labels, &scores).unwrap().auc;
        assert!((0.47..=0.53).contains(&auc), "{auc}");
    }

    fn mann_whitney(labels: &[bool], scores: &[f64]) -> f64 {
        let mut wins = 0.0;
        let mut pairs = 0.0;
        for (i, &li) in labels.iter().enumerate() {
            if !li {
                continue;
            }
            for (j, &lj) in labels.iter().enumerate() {
                if lj {
                    continue;
                }
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
        wins / pairs
    }

    fn counter_oracle(cm: &[Vec<u64>], c: usize) -> (f64, f64) {
        let (mut tp, mut fp, mut fnn) = (0u64, 0u64, 0u64);
        for (t, row) in cm.iter().enumerate() {
            for (p, &n) in row.iter().enumerate() {
                if t == c && p == c {
                    tp += n;
                } else if p == c {
                    fp += n;
                } else if t == c {
                    fnn += n;
                }
            }
        }
        let p = if tp + fp == 0 {
            0.0
        } else {
            tp as f64 / (tp + fp) as f64
        };
        let r = if tp + fnn == 0 {
            0.0
        } else {
            tp as f64 / (tp + fnn) as f64
        };
        (p, r)
    }

    proptest! {
        #[test]
        fn auc_matches_mann_whitney(n in 2usize..300, seed in any::<u64>(), levels in 2u32..50) {
            let mut rng = SeededRng::new(seed);
            let mut labels: Vec<bool> = (0..n).map(|_| rng.next_f64() < 0.4).collect();
            labels[0] = true;
            labels[1] = false;
            let scores: Vec<f64> = (0..n).map(|_| rng.below(levels as usize) as f64 / levels as f64).collect();
            let auc = roc_auc(&labels, &scores).unwrap().auc;
            prop_assert!((auc - mann_whitney(&labels, &scores)).abs() < 1e-9);
            let rev: Vec<f64> = scores.iter().map(|s| -s).collect();
            prop_assert!((roc_auc(&labels, &rev).unwrap().auc - (1.0 - auc)).abs() < 1e-12);
        }

        #[test]
        fn roc_points_monotone(n in 2usize..200, seed in any::<u64>()) {
            let mut rng = SeededRng::new(seed);
            let mut labels: Vec<bool> = (0..n).map(|_| rng.next_f64() < 0.5).collect();
            labels[0] = true;
            labels[1] = false;
            let scores: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
            let roc = roc_auc(&labels, &scores).unwrap();
            for w in roc.points.windows(2) {
                prop_assert!(w[1].0 >= w[0].0 && w[1].1 >= w[0].1);
            }
            prop_assert!((0.0..=1.0).contains(&roc.auc));
        }

        #[test]
        fn prf_matches_counter_oracle(k in 1usize..=5, cells in proptest::collection::vec(0u64..50, 25)) {
            let cm: Vec<Vec<u64>> = (0..k).map(|i| cells[i * 5..i * 5 + k].to_vec()).collect();
            let m = ConfusionMatrix::new(cm.clone()).unwrap();
            let (pc, w) = precision_recall_f1(&m);
            for (c, m_c) in pc.iter().enumerate() {
                let (p, r) = counter_oracle(&cm, c);
                prop_assert_eq!(m_c.precision, p);
                prop_assert_eq!(m_c.recall, r);
                prop_assert_eq!(m_c.f1, f1_score(p, r));
            }
            prop_assert_eq!(w.support, m.total());
        }
    }
}
