use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use longtail_sar::embeddings::{write_embedding_set, EmbeddingSet};
use longtail_sar::imageproc::{encode_pgm, BitDepth, CompositeRaster, Raster};

const BIN: &str = env!("CARGO_BIN_EXE_longtail-sar");

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN).current_dir(dir).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_pgm(path: &Path, side: usize, seed: usize) {
    let r = Raster::from_fn(side, side, |x, y| ((x * 31 + y * 17 + seed * 7) % 23) as f64 / 22.0).unwrap();
    fs::write(path, encode_pgm(&r, BitDepth::Eight)).unwrap();
}

#[test]
fn denoise_empty_directory() {
    let tmp = tempfile::tempdir().unwrap();
    fs::create_dir(tmp.path().join("in")).unwrap();
    let out = run(tmp.path(), &["denoise", "--input", "in", "--output", "out"]);
    assert_eq!(code(&out), 0, "{out:?}");
    assert!(stdout(&out).contains("denoised 0 of 0"));
    assert!(tmp.path().join("out/resolved_config.txt").exists());
}

#[test]
fn denoise_three_rasters() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("in");
    fs::create_dir(&input).unwrap();
    for i in 0..3 {
        write_pgm(&input.join(format!("chip{i}.pgm")), 21, i);
    }
    fs::write(input.join("notes.txt"), "not a raster").unwrap();
    let out = run(tmp.path(), &["denoise", "--input", "in", "--output", "out", "--window", "5"]);
    assert_eq!(code(&out), 0, "{out:?}");
    for i in 0..3 {
        assert!(tmp.path().join(format!("out/chip{i}.pgm")).exists());
    }
    let snapshot = fs::read_to_string(tmp.path().join("out/resolved_config.txt")).unwrap();
    assert!(snapshot.contains("window = 5\n") && snapshot.contains("noise-variance = auto\n"));
}

#[test]
fn denoise_corrupt_file_fails_but_others_are_written() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("in");
    fs::create_dir(&input).unwrap();
    write_pgm(&input.join("a.pgm"), 15, 1);
    write_pgm(&input.join("c.pgm"), 15, 2);
    fs::write(input.join("b.pgm"), b"P5\n15 15\n255\nshort").unwrap();
    let out = run(tmp.path(), &["denoise", "--input", "in", "--output", "out"]);
    assert_eq!(code(&out), 1, "{out:?}");
    assert!(tmp.path().join("out/a.pgm").exists());
    assert!(tmp.path().join("out/c.pgm").exists());
    assert!(!tmp.path().join("out/b.pgm").exists());
    let report = fs::read_to_string(tmp.path().join("out/denoise_report.csv")).unwrap();
    assert!(report.contains("b.pgm,failed,"));
    assert!(report.contains("a.pgm,ok,"));
}

#[test]
fn compose_matched_triple_and_unmatched_stem() {
    let tmp = tempfile::tempdir().unwrap();
    for d in ["sar", "den", "eo"] {
        fs::create_dir(tmp.path().join(d)).unwrap();
    }
    write_pgm(&tmp.path().join("sar/t1.pgm"), 51, 0);
    write_pgm(&tmp.path().join("den/t1.pgm"), 51, 1);
    write_pgm(&tmp.path().join("eo/t1.pgm"), 31, 2);
    let args = ["compose", "--sar", "sar", "--denoised", "den", "--eo", "eo", "--output", "out"];
    let out = run(tmp.path(), &args);
    assert_eq!(code(&out), 0, "{out:?}");
    let c = CompositeRaster::load(&tmp.path().join("out/t1.ltcr")).unwrap();
    assert_eq!((c.width(), c.height()), (56, 56));

    write_pgm(&tmp.path().join("sar/t2.pgm"), 51, 3);
    let out = run(tmp.path(), &args);
    assert_eq!(code(&out), 1, "{out:?}");
    assert!(stdout(&out).contains("unmatched: t2 (missing denoised+eo)"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("t2"));
}

#[test]
fn gen_fit_predict_evaluate() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    fs::write(dir.join("run.cfg"), "# small run\nhead_size = 300\nratio = 30\ndim = 6\nk = 5\nseed = 4\n").unwrap();
    let out = run(dir, &["gen", "--config", "run.cfg", "--out", "train.lteb", "--holdout", "hold.lteb"]);
    assert_eq!(code(&out), 0, "{out:?}");
    assert!(fs::read_to_string(dir.join("train.lteb.counts.csv")).unwrap().starts_with("class,count\n0,300\n"));

    let out = run(dir, &["fit", "--config", "run.cfg", "--embeddings", "train.lteb", "--model-dir", "model", "--k", "3"]);
    assert_eq!(code(&out), 0, "{out:?}");
    let snapshot = fs::read_to_string(dir.join("model/resolved_config.txt")).unwrap();
    assert!(snapshot.contains("k = 3\n"), "flag beats file: {snapshot}");
    assert!(snapshot.contains("seed = 4\n"), "file beats default: {snapshot}");
    for f in ["manifest.txt", "member_06.ltix", "cleaning_report.csv", "subsets.ltsp"] {
        assert!(dir.join("model").join(f).exists(), "{f}");
    }

    let out = run(dir, &["predict", "--model", "model", "--embeddings", "hold.lteb", "--out", "pred.csv"]);
    assert_eq!(code(&out), 0, "{out:?}");
    let out = run(dir, &["evaluate", "--predictions", "pred.csv", "--truth", "hold.lteb", "--out-dir", "eval"]);
    assert_eq!(code(&out), 0, "{out:?}");
    assert!(stdout(&out).contains("total score"));
    let report = fs::read_to_string(dir.join("eval/report.csv")).unwrap();
    assert!(report.starts_with("metric,value\nn_eval,1000\n"));
    assert!(dir.join("eval/per_class.csv").exists());
}

#[test]
fn one_sample_per_class_recalls_itself() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let set = EmbeddingSet::from_rows(&[vec![0.0, 0.0], vec![5.0, 0.0], vec![0.0, 5.0]], vec![0, 1, 2], 3).unwrap();
    write_embedding_set(&set, &dir.join("tiny.lteb")).unwrap();
    let out = run(dir, &["fit", "--embeddings", "tiny.lteb", "--model-dir", "m", "--subsets", "1", "--k", "1"]);
    assert_eq!(code(&out), 0, "{out:?}");
    let out = run(dir, &["predict", "--model", "m/manifest.txt", "--embeddings", "tiny.lteb", "--out", "p.csv"]);
    assert_eq!(code(&out), 0, "{out:?}");
    let out = run(dir, &["evaluate", "--predictions", "p.csv", "--truth", "tiny.lteb", "--out-dir", "e"]);
    assert_eq!(code(&out), 0, "{out:?}");
    let report = fs::read_to_string(dir.join("e/report.csv")).unwrap();
    assert!(report.contains("accuracy,1\n") && report.contains("total_score,1\n"), "{report}");
}

#[test]
fn contract_and_io_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let gen = |name: &str, dim: &str| {
        let out = run(dir, &["gen", "--out", name, "--head-size", "100", "--ratio", "10", "--dim", dim]);
        assert_eq!(code(&out), 0, "{out:?}");
    };
    gen("a.lteb", "4");
    gen("b.lteb", "3");
    assert_eq!(code(&run(dir, &["fit", "--embeddings", "a.lteb", "--model-dir", "m"])), 0);

    let mismatch = run(dir, &["predict", "--model", "m", "--embeddings", "b.lteb", "--out", "p.csv"]);
    assert_eq!(code(&mismatch), 1);
    assert!(String::from_utf8_lossy(&mismatch.stderr).contains("dimension mismatch"));

    let target = run(dir, &["fit", "--embeddings", "a.lteb", "--model-dir", "m2", "--per-class-target", "500"]);
    assert_eq!(code(&target), 1);
    assert!(String::from_utf8_lossy(&target.stderr).contains("nearmiss: target error"));

    assert_eq!(code(&run(dir, &["predict", "--model", "m", "--embeddings", "missing.lteb", "--out", "p.csv"])), 2);
    assert_eq!(code(&run(dir, &["fit", "--config", "missing.cfg", "--embeddings", "a.lteb"])), 2);
    assert_eq!(code(&run(dir, &["fit", "--no-such-flag"])), 1);
    assert_eq!(code(&run(dir, &["gen"])), 1, "missing --out");
    assert_eq!(code(&run(dir, &["gen", "--out", "x.lteb", "--ratio", "0.5"])), 1);
    assert_eq!(code(&run(dir, &["--metric", "manhattan", "gen", "--out", "x.lteb"])), 1);
    fs::write(dir.join("bad.cfg"), "colour = red\n").unwrap();
    assert_eq!(code(&run(dir, &["gen", "--config", "bad.cfg", "--out", "x.lteb"])), 1);
    fs::write(dir.join("junk.lteb"), b"LTEB1 definitely not embeddings").unwrap();
    assert_eq!(code(&run(dir, &["fit", "--embeddings", "junk.lteb", "--model-dir", "m3"])), 1);
    assert_eq!(code(&run(dir, &["--help"])), 0);
}

#[test]
fn gen_is_deterministic_and_ratio_one_is_balanced() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    for name in ["a.lteb", "b.lteb"] {
        assert_eq!(code(&run(dir, &["gen", "--out", name, "--seed", "8", "--head-size", "200", "--ratio", "20"])), 0);
    }
    assert_eq!(fs::read(dir.join("a.lteb")).unwrap(), fs::read(dir.join("b.lteb")).unwrap());
    assert_eq!(code(&run(dir, &["gen", "--out", "flat.lteb", "--head-size", "40", "--ratio", "1"])), 0);
    let counts = fs::read_to_string(dir.join("flat.lteb.counts.csv")).unwrap();
    assert!(counts.lines().skip(1).all(|l| l.ends_with(",40")), "{counts}");
}
