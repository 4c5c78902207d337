//! Balanced-subset ensemble vs. a single KNN on the full long-tail set.
//!
//! ```bash
//! cargo run --release -p longtail-sar --example longtail_benchmark -- [spread] [separation] [seeds]
//! ```

use std::time::Instant;

use longtail_sar::knn::{Metric, NeighborIndex};
use longtail_sar::metrics::{macro_recall, per_class_recall};
use longtail_sar::pipeline::{fit, predict, PipelineConfig};
use longtail_sar::sampling::SamplerConfig;
use longtail_sar::synthgen::{generate_balanced, generate_longtail, GeneratorConfig};

fn main() -> longtail_sar::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let spread = args.first().copied().unwrap_or(1.0);
    let separation = args.get(1).copied().unwrap_or(0.7);
    let seeds = args.get(2).copied().unwrap_or(5.0) as u64;

    println!("spread {spread}, separation {separation}");
    println!("seed  baseline  ensemble  gain     seconds");
    let mut gains = Vec::new();
    for seed in 0..seeds {
        let t = Instant::now();
        let gen = GeneratorConfig {
            cluster_spread: spread,
            cluster_separation: separation,
            seed,
            ..GeneratorConfig::default()
        };
        let train = generate_longtail(&gen)?;
        let holdout = generate_balanced(&gen, 100, 0)?;
        let truth: Vec<usize> = (0..holdout.len()).map(|i| holdout.label(i)).collect();

        let full = NeighborIndex::build_full(&train, Metric::Euclidean)?;
        let base_pred: Vec<usize> = full
            .predict_proba_batch(&holdout, 3)?
            .into_iter()
            .map(|p| longtail_sar::ensemble::Prediction::from_proba(p).label)
            .collect();
        let base = macro_recall(&per_class_recall(&base_pred, &truth, gen.n_classes)?);

        let cfg = PipelineConfig {
            sampler: SamplerConfig {
                seed,
                ..SamplerConfig::default()
            },
            ..PipelineConfig::default()
        };
        let model = fit(&train, &cfg)?.model;
        let ens_pred: Vec<usize> = predict(&model, &holdout, false)?.iter().map(|p| p.label).collect();
        let ens = macro_recall(&per_class_recall(&ens_pred, &truth, gen.n_classes)?);
        println!(
            "{seed:>4}  {base:.4}    {ens:.4}    {:+.4}  {:.2}",
            ens - base,
            t.elapsed().as_secs_f64()
        );
        gains.push(ens - base);
    }
    println!("mean gain {:+.4}", gains.iter().sum::<f64>() / gains.len() as f64);
    Ok(())
}
