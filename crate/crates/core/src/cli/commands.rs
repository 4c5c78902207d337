use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::{ComposeArgs, DenoiseArgs, EvaluateArgs, FitArgs, GenArgs, Globals, PredictArgs, Settings};
use crate::embeddings::{read_embedding_set, write_embedding_set};
use crate::ensemble::{predictions_from_csv, predictions_to_csv, EnsembleModel};
use crate::error::{Error, Result};
use crate::imageproc::{
    compose_channels, lee_filter, load_raster, load_raster_with_depth, save_raster, LeeConfig, NoiseVariance,
    RasterFormat, DEFAULT_TARGET_SIZE, DEFAULT_WINDOW,
};
use crate::metrics::{AucAverage, EvalReport};
use crate::pipeline::{self, PipelineConfig, DEFAULT_K, DEFAULT_SUBSETS};
use crate::sampling::SamplerConfig;
use crate::synthgen::{counts_csv, generate_balanced, generate_longtail, GeneratorConfig};

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// `<file>.<suffix>` next to a file output.
fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

fn create_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => create_dir(p),
        _ => Ok(()),
    }
}

/// Raster files of a directory keyed by file stem, sorted.
fn raster_files(dir: &Path) -> Result<BTreeMap<String, Vec<PathBuf>>> {
    let mut out: BTreeMap<String, Vec<PathBuf>> = BTreeMap::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if !path.is_file() || RasterFormat::from_path(&path).is_none() {
            continue;
        }
        let stem = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
        out.entry(stem).or_default().push(path);
    }
    out.values_mut().for_each(|v| v.sort());
    Ok(out)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub(super) fn gen(args: GenArgs, g: Globals, mut s: Settings) -> Result<()> {
    let d = GeneratorConfig::default();
    let cfg = GeneratorConfig {
        n_classes: s.get("n-classes", args.n_classes, d.n_classes)?,
        head_size: s.get("head-size", args.head_size, d.head_size)?,
        imbalance_ratio: s.get("ratio", args.ratio, d.imbalance_ratio)?,
        dim: s.get("dim", args.dim, d.dim)?,
        cluster_spread: s.get("spread", args.spread, d.cluster_spread)?,
        cluster_separation: s.get("separation", args.separation, d.cluster_separation)?,
        seed: g.seed,
    };
    let out: PathBuf = s.path("out", args.out)?;
    let holdout = s.path_opt("holdout", args.holdout);
    let per_class = s.get("holdout-per-class", args.holdout_per_class, 100usize)?;

    let set = generate_longtail(&cfg)?;
    create_parent(&out)?;
    write_embedding_set(&set, &out)?;
    write_file(&sidecar(&out, "counts.csv"), counts_csv(&set.class_counts()))?;
    println!("wrote {} samples ({} classes, dim {}) to {}", set.len(), cfg.n_classes, cfg.dim, out.display());
    if let Some(path) = holdout {
        let h = generate_balanced(&cfg, per_class, 0)?;
        create_parent(&path)?;
        write_embedding_set(&h, &path)?;
        println!("wrote {} holdout samples to {}", h.len(), path.display());
    }
    write_file(&sidecar(&out, "config.txt"), s.snapshot("gen"))
}

/// First error of the batch, preferring contract errors over I/O errors so
/// the exit status reflects the most serious class.
fn representative(errors: Vec<Error>, stage: &'static str) -> Option<Error> {
    let mut errors = errors;
    let pos = errors.iter().position(|e| !e.is_io()).unwrap_or(0);
    (!errors.is_empty()).then(|| errors.swap_remove(pos).in_stage(stage))
}

pub(super) fn denoise(args: DenoiseArgs, _g: Globals, mut s: Settings) -> Result<()> {
    let input: PathBuf = s.path("input", args.input)?;
    let output: PathBuf = s.path("output", args.output)?;
    let window = s.get("window", args.window, DEFAULT_WINDOW)?;
    let noise = s.get("noise-variance", args.noise_variance, NoiseVariance::Auto)?;
    let lee = LeeConfig::new(window, noise)?;

    let files: Vec<PathBuf> = raster_files(&input)?.into_values().flatten().collect();
    create_dir(&output)?;
    if fs::canonicalize(&input).ok() == fs::canonicalize(&output).ok() {
        return Err(Error::Config("denoise output directory must differ from the input directory".into()));
    }
    let results: Vec<Result<()>> = files
        .par_iter()
        .map(|path| {
            let format = RasterFormat::from_path(path).expect("filtered by extension");
            let (raster, depth) = load_raster_with_depth(path, format)?;
            let filtered = lee_filter(&raster, &lee)?;
            save_raster(&filtered, &output.join(path.file_name().unwrap()), format, depth)
        })
        .collect();

    let mut report = String::from("file,status,detail\n");
    let mut errors = Vec::new();
    for (path, r) in files.iter().zip(results) {
        let name = path.file_name().unwrap().to_string_lossy();
        match r {
            Ok(()) => report.push_str(&format!("{},ok,\n", csv_field(&name))),
            Err(e) => {
                log::error!("{}: {e}", path.display());
                report.push_str(&format!("{},failed,{}\n", csv_field(&name), csv_field(&e.to_string())));
                errors.push(e);
            }
        }
    }
    write_file(&output.join("denoise_report.csv"), report)?;
    write_file(&output.join("resolved_config.txt"), s.snapshot("denoise"))?;
    println!("denoised {} of {} rasters, {} failed", files.len() - errors.len(), files.len(), errors.len());
    representative(errors, "denoise").map_or(Ok(()), Err)
}

pub(super) fn compose(args: ComposeArgs, _g: Globals, mut s: Settings) -> Result<()> {
    let dirs: [PathBuf; 3] = [
        s.path("sar", args.sar)?,
        s.path("denoised", args.denoised)?,
        s.path("eo", args.eo)?,
    ];
    let output: PathBuf = s.path("output", args.output)?;
    let size = s.get("size", args.size, DEFAULT_TARGET_SIZE)?;
    if size == 0 {
        return Err(Error::Config("composite size must be >= 1".into()));
    }
    const NAMES: [&str; 3] = ["sar", "denoised", "eo"];
    let listings = dirs.iter().map(|d| raster_files(d)).collect::<Result<Vec<_>>>()?;
    create_dir(&output)?;

    let mut stems: Vec<&String> = listings.iter().flat_map(|l| l.keys()).collect();
    stems.sort();
    stems.dedup();
    let mut missing = Vec::new();
    let mut jobs = Vec::new();
    for stem in stems {
        let found: Vec<Option<&Vec<PathBuf>>> = listings.iter().map(|l| l.get(stem)).collect();
        let absent: Vec<&str> = (0..3).filter(|&i| found[i].is_none()).map(|i| NAMES[i]).collect();
        if absent.is_empty() {
            jobs.push((stem.clone(), found.iter().map(|f| f.unwrap().clone()).collect::<Vec<_>>()));
        } else {
            missing.push(format!("{stem} (missing {})", absent.join("+")));
        }
    }

    let results: Vec<Result<()>> = jobs
        .par_iter()
        .map(|(stem, paths)| {
            let mut chans = Vec::with_capacity(3);
            for (i, p) in paths.iter().enumerate() {
                if p.len() > 1 {
                    return Err(Error::Validation(format!("several {} rasters named {stem}", NAMES[i])));
                }
                chans.push(load_raster(&p[0], RasterFormat::from_path(&p[0]).unwrap())?);
            }
            compose_channels(&chans[0], &chans[1], &chans[2], size)?.save(&output.join(format!("{stem}.ltcr")))
        })
        .collect();

    let mut report = String::from("stem,status,detail\n");
    let mut errors = Vec::new();
    for ((stem, _), r) in jobs.iter().zip(results) {
        match r {
            Ok(()) => report.push_str(&format!("{},ok,\n", csv_field(stem))),
            Err(e) => {
                log::error!("{stem}: {e}");
                report.push_str(&format!("{},failed,{}\n", csv_field(stem), csv_field(&e.to_string())));
                errors.push(e);
            }
        }
    }
    for m in &missing {
        report.push_str(&format!("{},unmatched,\n", csv_field(m)));
        println!("unmatched: {m}");
    }
    write_file(&output.join("compose_report.csv"), report)?;
    write_file(&output.join("resolved_config.txt"), s.snapshot("compose"))?;
    println!(
        "composed {} of {} matched stems, {} unmatched",
        jobs.len() - errors.len(),
        jobs.len(),
        missing.len()
    );
    if !missing.is_empty() {
        return Err(Error::MissingPair(missing).in_stage("compose"));
    }
    representative(errors, "compose").map_or(Ok(()), Err)
}

pub(super) fn fit(args: FitArgs, g: Globals, mut s: Settings) -> Result<()> {
    let embeddings: PathBuf = s.path("embeddings", args.embeddings)?;
    let model_dir: PathBuf = s.path("model-dir", args.model_dir)?;
    let d = SamplerConfig::default();
    let sampler = SamplerConfig::new(
        g.metric,
        s.get("shortlist-m", args.shortlist_m, d.nearmiss_shortlist_m)?,
        s.get("nearmiss-k", args.nearmiss_k, d.nearmiss_k)?,
        g.seed,
    )?;
    let cfg = PipelineConfig {
        n_subsets: s.get("subsets", args.subsets, DEFAULT_SUBSETS)?,
        k_neighbors: s.get("k", args.k, DEFAULT_K)?,
        per_class_target: s.get_opt("per-class-target", args.per_class_target)?,
        normalize: s.get("normalize", args.normalize, false)?,
        sampler,
        ..PipelineConfig::default()
    };

    let set = read_embedding_set(&embeddings)?;
    let out = pipeline::fit(&set, &cfg)?;
    let manifest = out.model.save(&model_dir, cfg.normalize)?;
    write_file(&model_dir.join("cleaning_report.csv"), out.report.to_csv())?;
    out.plan.save(&model_dir.join("subsets.ltsp"))?;
    write_file(&model_dir.join("resolved_config.txt"), s.snapshot("fit"))?;
    println!(
        "fitted {} members (k {}, {} per class per subset); tomek removed {}, nearmiss kept {} of {}",
        out.model.members().len(),
        cfg.k_neighbors,
        out.plan.per_class_target,
        out.report.tomek_removed.iter().sum::<usize>(),
        out.report.after_nearmiss.iter().sum::<usize>(),
        out.report.after_tomek.iter().sum::<usize>()
    );
    println!("manifest: {}", manifest.display());
    Ok(())
}

pub(super) fn predict(args: PredictArgs, _g: Globals, mut s: Settings) -> Result<()> {
    let model: PathBuf = s.path("model", args.model)?;
    let embeddings: PathBuf = s.path("embeddings", args.embeddings)?;
    let out: PathBuf = s.path("out", args.out)?;
    let manifest_path = if model.is_dir() { model.join("manifest.txt") } else { model };

    let (model, manifest) = EnsembleModel::load(&manifest_path)?;
    let queries = read_embedding_set(&embeddings)?;
    let predictions = pipeline::predict(&model, &queries, manifest.normalize)?;
    create_parent(&out)?;
    write_file(&out, predictions_to_csv(&predictions, model.n_classes()))?;
    write_file(&sidecar(&out, "config.txt"), s.snapshot("predict"))?;
    println!("wrote {} predictions to {}", predictions.len(), out.display());
    Ok(())
}

pub(super) fn evaluate(args: EvaluateArgs, _g: Globals, mut s: Settings) -> Result<()> {
    let predictions: PathBuf = s.path("predictions", args.predictions)?;
    let truth: PathBuf = s.path("truth", args.truth)?;
    let out_dir: PathBuf = s.path("out-dir", args.out_dir)?;
    let average = s.get("auc-average", args.auc_average, AucAverage::Macro)?;

    let text = fs::read_to_string(&predictions).map_err(|e| Error::io(&predictions, e))?;
    let preds = predictions_from_csv(&text)?;
    let truth_set = read_embedding_set(&truth)?;
    if let Some(p) = preds.first() {
        if p.proba.len() != truth_set.n_classes() {
            return Err(Error::Validation(format!(
                "predictions cover {} classes, truth file has {}",
                p.proba.len(),
                truth_set.n_classes()
            )));
        }
    }
    let labels: Vec<usize> = preds.iter().map(|p| p.label).collect();
    let proba: Vec<Vec<f64>> = preds.into_iter().map(|p| p.proba).collect();
    let truth_labels: Vec<usize> = (0..truth_set.len()).map(|i| truth_set.label(i)).collect();
    let report = EvalReport::compute(&labels, &proba, &truth_labels, average)?;

    create_dir(&out_dir)?;
    write_file(&out_dir.join("report.csv"), report.to_csv())?;
    write_file(&out_dir.join("per_class.csv"), report.per_class_csv(&truth_set.class_counts()))?;
    write_file(&out_dir.join("resolved_config.txt"), s.snapshot("evaluate"))?;
    print!("{}", report.to_table());
    Ok(())
}
