//! Exact KNN search: tree vs brute force, both metrics, and the LTIX1 file.

use std::time::Instant;

use longtail_sar::knn::{Metric, NeighborIndex};
use longtail_sar::synthgen::{generate_balanced, generate_longtail, GeneratorConfig};

fn main() -> longtail_sar::Result<()> {
    let gen = GeneratorConfig {
        head_size: 3000,
        imbalance_ratio: 30.0,
        dim: 8,
        seed: 5,
        ..GeneratorConfig::default()
    };
    let set = generate_longtail(&gen)?;
    let queries = generate_balanced(&gen, 20, 0)?;
    let all: Vec<usize> = (0..set.len()).collect();

    for metric in [Metric::Euclidean, Metric::Cosine] {
        let tree = NeighborIndex::build(&set, &all, metric)?;
        // threshold 0 forces a linear scan
        let scan = NeighborIndex::build_with_threshold(&set, &all, metric, 0)?;
        let t = Instant::now();
        let a = tree.query_batch(&queries, 5)?;
        let tree_time = t.elapsed();
        let t = Instant::now();
        let b = scan.query_batch(&queries, 5)?;
        let scan_time = t.elapsed();
        println!(
            "{metric:<9} tree {tree_time:>10.2?}  scan {scan_time:>10.2?}  identical: {}",
            a == b
        );
        println!("          first query: {:?}", a[0]);
    }

    let index = NeighborIndex::build(&set, &all, Metric::Euclidean)?;
    let path = std::env::temp_dir().join("longtail_sar_example.ltix");
    index.save(&path)?;
    let back = NeighborIndex::load(&path, set.n_classes())?;
    println!(
        "LTIX1 round trip gives the same class votes: {}",
        back.predict_proba(queries.row(0), 3)? == index.predict_proba(queries.row(0), 3)?
    );
    Ok(())
}
