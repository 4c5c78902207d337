//! Write and read the LTEB1 embedding format and inspect a class histogram.

use longtail_sar::embeddings::{class_histogram, read_embedding_set, write_embedding_set, EmbeddingSet};
use longtail_sar::synthgen::{generate_longtail, GeneratorConfig};
use longtail_sar::Error;

fn main() -> longtail_sar::Result<()> {
    let set = generate_longtail(&GeneratorConfig {
        head_size: 500,
        imbalance_ratio: 50.0,
        dim: 8,
        ..GeneratorConfig::default()
    })?;
    let path = std::env::temp_dir().join("longtail_sar_example.lteb");
    write_embedding_set(&set, &path)?;
    let back = read_embedding_set(&path)?;
    println!("{} rows of dim {}, {} bytes on disk", back.len(), back.dim(), set.encoded_len());
    println!("round trip identical: {}", back == set);

    let hist = class_histogram(&back);
    println!("class counts {:?}, imbalance {:.1}x", hist.counts, hist.imbalance_ratio);

    // every malformed input maps to a typed error
    let bytes = set.to_bytes();
    match EmbeddingSet::from_bytes(&bytes[..bytes.len() - 3]) {
        Err(Error::Format(msg)) => println!("truncated file -> format error: {msg}"),
        other => println!("unexpected: {other:?}"),
    }
    let mut bad_label = EmbeddingSet::from_rows(&[vec![0.0, 1.0]], vec![0], 2)?.to_bytes();
    let label_at = 17;
    bad_label[label_at..label_at + 4].copy_from_slice(&5u32.to_le_bytes());
    match EmbeddingSet::from_bytes(&bad_label) {
        Err(Error::Validation(msg)) => println!("label out of range -> validation error: {msg}"),
        other => println!("unexpected: {other:?}"),
    }
    Ok(())
}
