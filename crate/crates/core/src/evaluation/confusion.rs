//! Two-class script identification: confusion matrix and per-class scores.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{EvalError, PrfScore};
use crate::dataset::Script;

/// Counts indexed by `[true script][predicted script]`, Urdu first.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 2]; 2],
}

impl ConfusionMatrix {
    pub fn from_counts(counts: [[u64; 2]; 2]) -> Self {
        ConfusionMatrix { counts }
    }

    pub fn get(&self, truth: Script, predicted: Script) -> u64 {
        self.counts[truth.index()][predicted.index()]
    }

    pub fn record(&mut self, truth: Script, predicted: Script) {
        self.counts[truth.index()][predicted.index()] += 1;
    }

    pub fn row_total(&self, truth: Script) -> u64 {
        self.counts[truth.index()].iter().sum()
    }

    pub fn column_total(&self, predicted: Script) -> u64 {
        self.counts.iter().map(|row| row[predicted.index()]).sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn accuracy(&self) -> f64 {
        let correct: u64 = Script::ALL.iter().map(|&s| self.get(s, s)).sum();
        correct as f64 / self.total() as f64
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("true\\predicted,urdu,english\n");
        for s in Script::ALL {
            out.push_str(&format!("{},{},{}\n", s, self.get(s, Script::Urdu), self.get(s, Script::English)));
        }
        out
    }

    pub fn to_text(&self) -> String {
        let width = self.counts.iter().flatten().map(|c| c.to_string().len()).max().unwrap_or(1).max(7);
        let mut out = format!("{:<8}  {:>width$}  {:>width$}\n", "", "Urdu", "English");
        for (s, name) in Script::ALL.iter().zip(["Urdu", "English"]) {
            out.push_str(&format!(
                "{:<8}  {:>width$}  {:>width$}\n",
                name,
                self.get(*s, Script::Urdu),
                self.get(*s, Script::English)
            ));
        }
        out
    }
}

pub fn confusion_matrix(pairs: &[(Script, Script)]) -> ConfusionMatrix {
    let mut m = ConfusionMatrix::default();
    for &(truth, predicted) in pairs {
        m.record(truth, predicted);
    }
    m
}

/// Precision from columns, recall from rows.
///
/// A class that is never predicted gets precision 1.0 with the
/// `no_detections` flag, and therefore F = 0.
pub fn class_prf(m: &ConfusionMatrix) -> Result<BTreeMap<Script, PrfScore>, EvalError> {
    Script::ALL
        .iter()
        .map(|&s| {
            let (hits, predicted, actual) = (m.get(s, s), m.column_total(s), m.row_total(s));
            if actual == 0 {
                return Err(EvalError::EmptyClass(s));
            }
            let score = PrfScore::from_areas(hits as f64, predicted as f64, actual as f64)?;
            Ok((s, score))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use Script::{English, Urdu};

    #[test]
    fn all_correct_is_diagonal() {
        let m = confusion_matrix(&[(Urdu, Urdu), (English, English), (Urdu, Urdu)]);
        assert_eq!(m.counts, [[2, 0], [0, 1]]);
        assert_eq!(m.accuracy(), 1.0);
    }

    #[test]
    fn single_off_diagonal_pair() {
        let m = confusion_matrix(&[(Urdu, English)]);
        assert_eq!(m.counts, [[0, 1], [0, 0]]);
    }

    #[test]
    fn reconstructed_test_set() {
        let mut pairs = Vec::new();
        pairs.extend(std::iter::repeat_n((Urdu, Urdu), 8763));
        pairs.extend(std::iter::repeat_n((Urdu, English), 9149 - 8763));
        pairs.extend(std::iter::repeat_n((English, English), 6874));
        pairs.extend(std::iter::repeat_n((English, Urdu), 7425 - 6874));
        let m = confusion_matrix(&pairs);
        assert_eq!(m.counts, [[8763, 386], [551, 6874]]);
        assert_eq!(m.row_total(Urdu), 9149);
        assert_eq!(m.row_total(English), 7425);
    }

    #[test]
    fn per_class_scores() {
        let prf = class_prf(&ConfusionMatrix::from_counts([[8763, 386], [551, 6874]])).unwrap();
        assert!((prf[&Urdu].precision - 8763.0 / 9314.0).abs() < 1e-12);
        assert!((prf[&Urdu].recall - 8763.0 / 9149.0).abs() < 1e-12);
        assert!((prf[&English].precision - 6874.0 / 7260.0).abs() < 1e-12);
        assert!((prf[&English].recall - 6874.0 / 7425.0).abs() < 1e-12);
        assert_eq!(format!("{:.4}", prf[&Urdu].precision), "0.9408");
        assert_eq!(format!("{:.4}", prf[&English].recall), "0.9258");

        let prf = class_prf(&ConfusionMatrix::from_counts([[10, 0], [0, 10]])).unwrap();
        assert!(prf.values().all(|s| (s.precision, s.recall, s.f_measure) == (1.0, 1.0, 1.0)));
        let prf = class_prf(&ConfusionMatrix::from_counts([[5, 5], [5, 5]])).unwrap();
        assert!(prf.values().all(|s| (s.precision, s.recall, s.f_measure) == (0.5, 0.5, 0.5)));
    }

    #[test]
    fn empty_class_is_an_error() {
        let err = class_prf(&ConfusionMatrix::from_counts([[3, 1], [0, 0]])).unwrap_err();
        assert_eq!(err, EvalError::EmptyClass(English));
        assert!(err.to_string().contains("english"));
    }

    #[test]
    fn never_predicted_class() {
        let prf = class_prf(&ConfusionMatrix::from_counts([[4, 0], [2, 0]])).unwrap();
        let e = prf[&English];
        assert!(e.no_detections);
        assert_eq!((e.recall, e.f_measure), (0.0, 0.0));
    }
}
