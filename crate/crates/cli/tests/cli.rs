mod support;

use std::path::Path;
use std::process::{Command, Output};

use ctxmeasure_core::GrayMap;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::{flat_prediction, random_colour, textured_scene, write_corpus, DiskRecord, Ellipse};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctxmeasure")).args(args).output().unwrap()
}

fn corpus(dir: &Path) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let records = (0..4)
        .map(|i| {
            let e = Ellipse::random(&mut rng, 48, 48, 6.0..12.0);
            let gt = e.mask(48, 48);
            let (fg, bg) = (random_colour(&mut rng), random_colour(&mut rng));
            let image = textured_scene(&mut rng, &gt, fg, bg);
            let near = Ellipse { row: e.row + 1.0, ..e }.mask(48, 48);
            let far = Ellipse { row: e.row + 4.0, col: e.col - 3.0, ..e }.mask(48, 48);
            DiskRecord {
                id: format!("s{i}"),
                fms: vec![GrayMap::from(&gt), flat_prediction(&near, 0.8), flat_prediction(&far, 0.8)],
                gt,
                image: Some(image),
                human_rank: Some(vec![1, 2, 3]),
            }
        })
        .collect::<Vec<_>>();
    write_corpus(dir, &records).to_string_lossy().into_owned()
}

#[test]
fn eval_writes_one_row_per_map_and_metric() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = corpus(dir.path());
    let out = run(&["eval", "--manifest", &manifest, "--metrics", "iou,cmeasure,cmeasure-camo"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("id,fm,metric,score,error"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4 * 3 * 3);
    assert!(rows[0].starts_with("s0,0,iou,1"), "{}", rows[0]);
}

#[test]
fn eval_json_matches_csv_scores() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = corpus(dir.path());
    let csv = run(&["eval", "--manifest", &manifest, "--metrics", "smeasure"]);
    let json = run(&["eval", "--manifest", &manifest, "--metrics", "smeasure", "--format", "json"]);
    let rows: Vec<serde_json::Value> = serde_json::from_slice(&json.stdout).unwrap();
    let csv = String::from_utf8(csv.stdout).unwrap();
    for (row, line) in rows.iter().zip(csv.lines().skip(1)) {
        let score: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert_eq!(row["score"].as_f64().unwrap(), score);
    }
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = corpus(dir.path());
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "metrics = mae\nformat = json\n").unwrap();
    let out = run(&["eval", "--manifest", &manifest, "--config", cfg.to_str().unwrap(), "--set", "format=csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("id,fm,metric"));
    assert!(text.lines().skip(1).all(|l| l.contains(",mae,")));
    let bad = run(&["eval", "--manifest", &manifest, "--set", "alpha=-1"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn camo_map_exports_png_maps() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = corpus(dir.path());
    let maps = dir.path().join("maps");
    let out = run(&["camo-map", "--manifest", &manifest, "--out-dir", maps.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for i in 0..4 {
        let d = image::open(maps.join(format!("s{i}_camo.png"))).unwrap();
        assert_eq!((d.width(), d.height()), (48, 48));
        assert!(matches!(d, image::DynamicImage::ImageLuma16(_)));
        assert!(maps.join(format!("s{i}_camo_preview.png")).exists());
    }
}

#[test]
fn meta_reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = corpus(dir.path());
    let args = ["meta", "--manifest", &manifest, "--protocol", "mm3", "--seed", "11", "--metrics", "iou,wfbeta"];
    let a = run(&args);
    let b = run(&[&args[..], &["--threads", "1"]].concat());
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.lines().next().unwrap().starts_with("metric,protocol,statistic,display"));
    // seeded protocols refuse to run without a seed
    let missing = run(&["meta", "--manifest", &manifest, "--protocol", "mm2"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn mm1_uses_human_ranks() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = corpus(dir.path());
    let out = run(&["meta", "--manifest", &manifest, "--protocol", "mm1", "--metrics", "iou"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("iou,mm1,0.0,0.00%,4,0,0"), "{text}");
}

#[test]
fn selftest_passes() {
    let out = run(&["selftest"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn broken_manifest_is_a_run_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.jsonl");
    std::fs::write(&path, "{\"id\": \"a\", \"gt\": \"missing.png\", \"fms\": [\"x.png\"]}\n").unwrap();
    let out = run(&["eval", "--manifest", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}
