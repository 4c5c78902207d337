//! Fit the balanced-subset ensemble, save it, load it back and predict.

use longtail_sar::ensemble::{predictions_to_csv, EnsembleModel};
use longtail_sar::pipeline::{fit, predict, PipelineConfig};
use longtail_sar::synthgen::{generate_balanced, generate_longtail, GeneratorConfig};

fn main() -> longtail_sar::Result<()> {
    let gen = GeneratorConfig {
        head_size: 2000,
        imbalance_ratio: 100.0,
        dim: 8,
        cluster_separation: 0.8,
        seed: 2,
        ..GeneratorConfig::default()
    };
    let train = generate_longtail(&gen)?;
    let holdout = generate_balanced(&gen, 5, 0)?;

    let out = fit(&train, &PipelineConfig::default())?;
    print!("{}", out.report.to_csv());
    println!(
        "{} members, {} samples per class in each",
        out.model.members().len(),
        out.plan.per_class_target
    );

    let dir = std::env::temp_dir().join("longtail_sar_model");
    let manifest = out.model.save(&dir, false)?;
    let (model, meta) = EnsembleModel::load(&manifest)?;
    println!("reloaded {} with k {} over {} classes", manifest.display(), meta.k, meta.n_classes);

    let preds = predict(&model, &holdout, meta.normalize)?;
    let csv = predictions_to_csv(&preds, model.n_classes());
    for line in csv.lines().take(4) {
        println!("{line}");
    }
    Ok(())
}
