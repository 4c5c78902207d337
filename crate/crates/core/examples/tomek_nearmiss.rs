//! Tomek-link cleaning followed by NearMiss-3 on a small long-tail set.

use longtail_sar::sampling::{find_tomek_links, nearmiss3_select, remove_tomek_majority, SamplerConfig};
use longtail_sar::synthgen::{generate_longtail, GeneratorConfig};

fn main() -> longtail_sar::Result<()> {
    let set = generate_longtail(&GeneratorConfig {
        n_classes: 4,
        head_size: 800,
        imbalance_ratio: 40.0,
        dim: 4,
        cluster_separation: 0.8,
        seed: 11,
        ..GeneratorConfig::default()
    })?;
    let cfg = SamplerConfig::default();

    let links = find_tomek_links(&set, &cfg)?;
    println!("{} Tomek links, first few: {:?}", links.len(), &links[..links.len().min(3)]);
    let cleaned = remove_tomek_majority(&set, &links)?;
    println!("counts before cleaning {:?}", set.class_counts());
    println!("counts after cleaning  {:?}", cleaned.set.class_counts());

    let smallest = *cleaned.set.class_counts().iter().min().unwrap();
    let targets = vec![4 * smallest; set.n_classes()];
    let reduced = nearmiss3_select(&cleaned.set, &targets, &cfg)?;
    println!("NearMiss-3 targets {targets:?}");
    println!("counts after NearMiss  {:?}", reduced.set.class_counts());
    // kept rows index the cleaned set; chain through to the original rows
    let original: Vec<usize> = reduced.kept.iter().map(|&i| cleaned.kept[i]).collect();
    println!("first kept rows of the input: {:?}", &original[..8]);
    Ok(())
}
