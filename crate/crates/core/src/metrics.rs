//! Accuracy, one-vs-rest ROC AUC, per-class recall and the competition
//! total score.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Weight of accuracy in [`total_score`]; AUC gets the remainder.
///
/// Not published alongside the leaderboard: this is the only convex
/// weighting (at 0.001 resolution) that reproduces every row of the top-10
/// table to two decimals.
pub const ACCURACY_WEIGHT: f64 = 0.75;

pub fn accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::Length {
            left: pred.len(),
            right: truth.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::Empty);
    }
    let hits = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / pred.len() as f64)
}

/// Mann-Whitney AUC with midranks for tied scores.
pub fn binary_auc(scores: &[f64], positives: &[bool]) -> Result<f64> {
    if scores.len() != positives.len() {
        return Err(Error::Length {
            left: scores.len(),
            right: positives.len(),
        });
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::Range("AUC scores must be finite".into()));
    }
    let n_pos = positives.iter().filter(|&&p| p).count();
    let n_neg = positives.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Degenerate(format!("AUC undefined with {n_pos} positives and {n_neg} negatives")));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // 1-based ranks start+1 ..= end share their mean
        let midrank = (start + 1 + end) as f64 / 2.0;
        let tied_pos = order[start..end].iter().filter(|&&i| positives[i]).count();
        rank_sum += midrank * tied_pos as f64;
        start = end;
    }
    let (p, n) = (n_pos as f64, n_neg as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

/// How per-class AUCs are combined into one number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AucAverage {
    /// Unweighted mean over scoreable classes.
    #[default]
    Macro,
    /// Mean weighted by class prevalence among scoreable classes.
    Weighted,
    /// Single binary AUC over all flattened (sample, class) scores.
    Micro,
}

impl FromStr for AucAverage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "macro" => Ok(AucAverage::Macro),
            "weighted" => Ok(AucAverage::Weighted),
            "micro" => Ok(AucAverage::Micro),
            other => Err(Error::Config(format!("unknown AUC average {other:?}"))),
        }
    }
}

impl std::fmt::Display for AucAverage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AucAverage::Macro => "macro",
            AucAverage::Weighted => "weighted",
            AucAverage::Micro => "micro",
        })
    }
}

fn check_proba(proba: &[Vec<f64>], truth: &[usize]) -> Result<usize> {
    if proba.len() != truth.len() {
        return Err(Error::Length {
            left: proba.len(),
            right: truth.len(),
        });
    }
    let n_classes = proba.first().ok_or(Error::Empty)?.len();
    if proba.iter().any(|p| p.len() != n_classes) {
        return Err(Error::Validation("probability rows have differing lengths".into()));
    }
    if let Some(&t) = truth.iter().find(|&&t| t >= n_classes) {
        return Err(Error::Validation(format!("true label {t} outside [0, {n_classes})")));
    }
    Ok(n_classes)
}

/// One-vs-rest AUC of every class; `None` where a class has no positives or
/// no negatives.
pub fn per_class_auc(proba: &[Vec<f64>], truth: &[usize]) -> Result<Vec<Option<f64>>> {
    let n_classes = check_proba(proba, truth)?;
    (0..n_classes)
        .map(|c| {
            let scores: Vec<f64> = proba.iter().map(|p| p[c]).collect();
            let pos: Vec<bool> = truth.iter().map(|&t| t == c).collect();
            match binary_auc(&scores, &pos) {
                Ok(a) => Ok(Some(a)),
                Err(Error::Degenerate(_)) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// Multiclass AUC under the chosen averaging.
pub fn multiclass_auc(proba: &[Vec<f64>], truth: &[usize], average: AucAverage) -> Result<f64> {
    match average {
        AucAverage::Macro | AucAverage::Weighted => {
            let per_class = per_class_auc(proba, truth)?;
            let mut counts = vec![0usize; per_class.len()];
            truth.iter().for_each(|&t| counts[t] += 1);
            let (mut num, mut den) = (0.0, 0.0);
            for (c, auc) in per_class.iter().enumerate() {
                if let Some(a) = auc {
                    let w = if average == AucAverage::Macro { 1.0 } else { counts[c] as f64 };
                    num += w * a;
                    den += w;
                }
            }
            if den == 0.0 {
                return Err(Error::Degenerate("no class is scoreable".into()));
            }
            Ok(num / den)
        }
        AucAverage::Micro => {
            check_proba(proba, truth)?;
            let scores: Vec<f64> = proba.iter().flatten().copied().collect();
            let pos: Vec<bool> = proba
                .iter()
                .zip(truth)
                .flat_map(|(p, &t)| (0..p.len()).map(move |c| c == t))
                .collect();
            binary_auc(&scores, &pos)
        }
    }
}

/// Mean one-vs-rest AUC over scoreable classes.
pub fn macro_ovr_auc(proba: &[Vec<f64>], truth: &[usize]) -> Result<f64> {
    multiclass_auc(proba, truth, AucAverage::Macro)
}

/// `0.75 · accuracy + 0.25 · auc`.
pub fn total_score(accuracy: f64, auc: f64) -> Result<f64> {
    for (name, v) in [("accuracy", accuracy), ("auc", auc)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Range(format!("{name} {v} outside [0, 1]")));
        }
    }
    Ok(ACCURACY_WEIGHT * accuracy + (1.0 - ACCURACY_WEIGHT) * auc)
}

/// Recall of every class; `None` for classes absent from `truth`.
pub fn per_class_recall(pred: &[usize], truth: &[usize], n_classes: usize) -> Result<Vec<Option<f64>>> {
    if pred.len() != truth.len() {
        return Err(Error::Length {
            left: pred.len(),
            right: truth.len(),
        });
    }
    let mut hit = vec![0usize; n_classes];
    let mut total = vec![0usize; n_classes];
    for (&p, &t) in pred.iter().zip(truth) {
        if t >= n_classes {
            return Err(Error::Validation(format!("true label {t} outside [0, {n_classes})")));
        }
        total[t] += 1;
        if p == t {
            hit[t] += 1;
        }
    }
    Ok(hit
        .iter()
        .zip(&total)
        .map(|(&h, &n)| (n > 0).then(|| h as f64 / n as f64))
        .collect())
}

/// Mean recall over classes present in the ground truth.
pub fn macro_recall(per_class: &[Option<f64>]) -> f64 {
    let present: Vec<f64> = per_class.iter().flatten().copied().collect();
    present.iter().sum::<f64>() / present.len().max(1) as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub accuracy: f64,
    pub auc_per_class: Vec<Option<f64>>,
    /// Combined AUC under `auc_average`.
    pub macro_auc: f64,
    pub auc_average: AucAverage,
    pub total_score: f64,
    pub per_class_recall: Vec<Option<f64>>,
    pub n_eval: usize,
}

impl EvalReport {
    pub fn compute(pred: &[usize], proba: &[Vec<f64>], truth: &[usize], average: AucAverage) -> Result<Self> {
        let accuracy = accuracy(pred, truth)?;
        let n_classes = check_proba(proba, truth)?;
        let auc_per_class = per_class_auc(proba, truth)?;
        let macro_auc = multiclass_auc(proba, truth, average)?;
        Ok(EvalReport {
            accuracy,
            total_score: total_score(accuracy, macro_auc.clamp(0.0, 1.0))?,
            per_class_recall: per_class_recall(pred, truth, n_classes)?,
            auc_per_class,
            macro_auc,
            auc_average: average,
            n_eval: truth.len(),
        })
    }

    pub fn macro_recall(&self) -> f64 {
        macro_recall(&self.per_class_recall)
    }

    /// Classes whose AUC is undefined and were left out of the average.
    pub fn excluded_classes(&self) -> Vec<usize> {
        (0..self.auc_per_class.len()).filter(|&c| self.auc_per_class[c].is_none()).collect()
    }

    /// `metric,value` CSV of the headline numbers.
    pub fn to_csv(&self) -> String {
        let excluded: Vec<String> = self.excluded_classes().iter().map(usize::to_string).collect();
        format!(
            "metric,value\nn_eval,{}\naccuracy,{}\nauc_average,{}\nauc,{}\ntotal_score,{}\nmacro_recall,{}\nauc_excluded_classes,{}\n",
            self.n_eval,
            self.accuracy,
            self.auc_average,
            self.macro_auc,
            self.total_score,
            self.macro_recall(),
            excluded.join(" ")
        )
    }

    /// `class,support,recall,auc` CSV; undefined values are left empty.
    pub fn per_class_csv(&self, support: &[usize]) -> String {
        let mut out = String::from("class,support,recall,auc\n");
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for c in 0..self.per_class_recall.len() {
            writeln!(
                out,
                "{c},{},{},{}",
                support.get(c).copied().unwrap_or(0),
                opt(self.per_class_recall[c]),
                opt(self.auc_per_class[c])
            )
            .unwrap();
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        writeln!(s, "samples evaluated : {}", self.n_eval).unwrap();
        writeln!(s, "accuracy          : {:.2}%", 100.0 * self.accuracy).unwrap();
        writeln!(s, "{:<18}: {:.2}", format!("AUC ({})", self.auc_average), self.macro_auc).unwrap();
        writeln!(s, "total score       : {:.2}", self.total_score).unwrap();
        writeln!(s, "macro recall      : {:.4}", self.macro_recall()).unwrap();
        writeln!(s, "\nclass  recall   auc").unwrap();
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "   -  ".into());
        for c in 0..self.per_class_recall.len() {
            writeln!(s, "{c:>5}  {}   {}", opt(self.per_class_recall[c]), opt(self.auc_per_class[c])).unwrap();
        }
        s
    }
}
