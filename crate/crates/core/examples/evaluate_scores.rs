//! Competition-style scoring: the total-score formula against the published
//! leaderboard, and a full report on a small prediction set.

use longtail_sar::metrics::{total_score, AucAverage, EvalReport, ACCURACY_WEIGHT};

// (total, accuracy %, AUC) of the ten leaderboard rows
const LEADERBOARD: [(f64, f64, f64); 10] = [
    (0.49, 37.9, 0.83),
    (0.46, 38.85, 0.69),
    (0.39, 35.10, 0.49),
    (0.35, 38.80, 0.24),
    (0.33, 10.40, 1.00),
    (0.33, 10.05, 1.00),
    (0.32, 10.00, 1.00),
    (0.31, 8.45, 1.00),
    (0.30, 21.45, 0.56),
    (0.30, 18.90, 0.62),
];

fn main() -> longtail_sar::Result<()> {
    println!("total = {ACCURACY_WEIGHT} * accuracy + {} * AUC", 1.0 - ACCURACY_WEIGHT);
    println!("published  accuracy  AUC    recomputed");
    for (published, acc, auc) in LEADERBOARD {
        let score = total_score(acc / 100.0, auc)?;
        println!("{published:>9.2}  {acc:>7.2}%  {auc:.2}   {score:.4}");
    }

    let truth = [0, 0, 1, 1, 2, 2];
    let proba = vec![
        vec![0.7, 0.2, 0.1],
        vec![0.4, 0.5, 0.1],
        vec![0.1, 0.8, 0.1],
        vec![0.3, 0.3, 0.4],
        vec![0.2, 0.2, 0.6],
        vec![0.1, 0.1, 0.8],
    ];
    let pred: Vec<usize> = proba
        .iter()
        .map(|p: &Vec<f64>| (0..p.len()).fold(0, |best, c| if p[c] > p[best] { c } else { best }))
        .collect();
    for average in [AucAverage::Macro, AucAverage::Weighted, AucAverage::Micro] {
        let report = EvalReport::compute(&pred, &proba, &truth, average)?;
        println!("\n{average} average:\n{}", report.to_table());
    }
    Ok(())
}
