use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use hdrtriad::commands::RunEcho;
use hdrtriad::core::decision::DecisionLabel;
use hdrtriad::core::ingest::CodeRange;
use hdrtriad::io;
use hdrtriad::report::{self, AnalysisRecord, DecisionRecord, RecordFile};
use serde_json::Value;

const THREE_SHOTS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/three_shots.toml");

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_hdrtriad")).args(args).env("RUST_LOG", "warn").output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn ok(args: &[&str]) {
    let (code, err) = run(args);
    assert_eq!(code, 0, "{args:?} failed: {err}");
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Synthesises a corpus from a spec file and returns its manifest path.
fn synth(dir: &Path, spec: &Path) -> PathBuf {
    let corpus = dir.join("corpus");
    ok(&["synth", "--spec", s(spec), "--out", s(&corpus), "--workers", "2"]);
    corpus.join("manifest.toml")
}

fn synth_text(dir: &Path, text: &str) -> PathBuf {
    let spec = dir.join("spec.toml");
    fs::write(&spec, text).unwrap();
    synth(dir, &spec)
}

fn csv_rows(path: &Path) -> Vec<BTreeMap<String, String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let headers = r.headers().unwrap().clone();
    r.records()
        .map(|rec| headers.iter().zip(rec.unwrap().iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect())
        .collect()
}

fn f(v: &str) -> f64 {
    v.parse().unwrap()
}

fn json_csv_files(root: &Path) -> Vec<PathBuf> {
    let mut out: Vec<PathBuf> = fs::read_dir(root)
        .unwrap()
        .flatten()
        .map(|e| e.path())
        .filter(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("json" | "csv")))
        .collect();
    out.sort();
    out
}

#[test]
fn empty_or_missing_manifest_is_a_config_error() {
    let dir = scratch("empty_manifest");
    let m = dir.join("manifest.toml");
    fs::write(&m, "shots = []\n").unwrap();
    let out = dir.join("out");
    assert_eq!(run(&["analyze", "--manifest", s(&m), "--out", s(&out)]).0, 2);
    assert_eq!(run(&["decide", "--manifest", s(&m), "--out", s(&out)]).0, 2);
    let missing = dir.join("nope.toml");
    assert_eq!(run(&["analyze", "--manifest", s(&missing), "--out", s(&out)]).0, 2);
    assert_eq!(run(&["analyze", "--manifest", s(&m), "--out", s(&out), "--bins", "zero"]).0, 2);
}

#[test]
fn table1_has_one_row_per_scene_and_a_full_film_row() {
    let dir = scratch("table1");
    let m = synth(&dir, Path::new(THREE_SHOTS));
    let out = dir.join("run");
    ok(&["analyze", "--manifest", s(&m), "--out", s(&out), "--workers", "2"]);
    let rows = csv_rows(&out.join(report::TABLE1));
    let scenes: Vec<&str> = rows.iter().map(|r| r["Scene"].as_str()).collect();
    assert_eq!(scenes, ["Cave", "Desert", "Smoke", report::FULL_FILM]);
    assert!(rows[..3].iter().all(|r| r["Number of Shots"] == "1"));
    assert_eq!(rows[3]["Number of Shots"], "3");
    let frames: RecordFile<AnalysisRecord> = report::read_json(&out.join(report::ANALYSIS_FRAMES)).unwrap();
    assert_eq!(frames.records.len(), 30);
    assert!(frames.failures.is_empty());
}

#[test]
fn reruns_are_byte_identical() {
    let dir = scratch("rerun");
    let m = synth(&dir, Path::new(THREE_SHOTS));
    let (a, b) = (dir.join("a"), dir.join("b"));
    for out in [&a, &b] {
        ok(&["analyze", "--manifest", s(&m), "--out", s(out), "--workers", "1"]);
        ok(&["decide", "--manifest", s(&m), "--out", s(out), "--workers", "1"]);
    }
    let files = json_csv_files(&a);
    assert!(files.len() >= 15);
    for p in files {
        let name = p.file_name().unwrap();
        assert_eq!(fs::read(&p).unwrap(), fs::read(b.join(name)).unwrap(), "{name:?} differs");
    }
}

#[test]
fn seed_changes_sample_but_not_per_frame_values() {
    let dir = scratch("seed");
    let m = synth(&dir, Path::new(THREE_SHOTS));
    let (a, b) = (dir.join("s1"), dir.join("s2"));
    ok(&["decide", "--manifest", s(&m), "--out", s(&a), "--seed", "1"]);
    ok(&["decide", "--manifest", s(&m), "--out", s(&b), "--seed", "2"]);
    let sampled = |d: &Path| -> Vec<Value> {
        let echo: RunEcho<Value> = report::read_json(&d.join("decide_run.json")).unwrap();
        echo.config["sampled"].as_array().unwrap().clone()
    };
    assert_ne!(sampled(&a), sampled(&b));
    let load = |d: &Path| -> BTreeMap<(String, u32), DecisionRecord> {
        let f: RecordFile<DecisionRecord> = report::read_json(&d.join(report::DECISION_FRAMES)).unwrap();
        f.records.into_iter().map(|r| ((r.shot.clone(), r.frame), r)).collect()
    };
    let (ra, rb) = (load(&a), load(&b));
    let shared: Vec<_> = ra.keys().filter(|k| rb.contains_key(*k)).collect();
    assert!(!shared.is_empty());
    for k in shared {
        assert_eq!(ra[k], rb[k]);
    }
}

#[test]
fn zero_threshold_leaves_no_neutral_pixels() {
    let dir = scratch("threshold");
    let m = synth(&dir, Path::new(THREE_SHOTS));
    let out = dir.join("run");
    ok(&["decide", "--manifest", s(&m), "--out", s(&out), "--threshold", "0"]);
    let f: RecordFile<DecisionRecord> = report::read_json(&out.join(report::DECISION_FRAMES)).unwrap();
    assert!(!f.records.is_empty());
    for r in &f.records {
        assert_eq!(r.counts.neutral, 0, "{} {}", r.shot, r.frame);
    }
    let neutral = csv_rows(&out.join(report::NEUTRAL));
    assert!(neutral.iter().all(|r| r["Neutral Pixels"] == "0"));
}

#[test]
fn plot_without_analysis_names_the_missing_step() {
    let dir = scratch("plot_missing");
    let (code, err) = run(&["plot", "--out", s(&dir)]);
    assert_eq!(code, 2);
    assert!(err.contains("analyze"), "{err}");
}

#[test]
fn identity_pipeline_plots_on_the_diagonal() {
    let dir = scratch("identity");
    let m = synth_text(
        &dir,
        r#"
seed = 3

[[shots]]
id = "same01"
scene = "Other"
frames = 4

[shots.synth]
width = 64
height = 48
scene = "textured"
sdr_curve = { gain = 40.0, clip = 48.0 }
hdr_curve = { gain = 40.0, clip = 48.0 }
"#,
    );
    let out = dir.join("run");
    ok(&["analyze", "--manifest", s(&m), "--out", s(&out)]);
    ok(&["plot", "--out", s(&out)]);
    let summary: Value = report::read_json(&out.join("plots/plot_summary.json")).unwrap();
    assert!(summary["baseline_identity_offset_px"].as_i64().unwrap() <= 1, "{summary}");

    let frames: RecordFile<AnalysisRecord> = report::read_json(&out.join(report::ANALYSIS_FRAMES)).unwrap();
    let pixels: u64 = frames.records.iter().map(|r| r.pixels as u64).sum();
    assert_eq!(summary["saturation_mass"].as_u64().unwrap(), pixels);
    assert_eq!(summary["density_mass"].as_u64().unwrap(), pixels);
    for name in ["luminance_density.png", "hue_shift_histogram.png", "chroma_change_heatmap.png"] {
        assert!(out.join("plots").join(name).is_file(), "{name}");
    }
}

#[test]
fn decision_pngs_match_label_counts_and_mask_borders() {
    let dir = scratch("maps");
    let m = synth_text(
        &dir,
        r#"
seed = 4

[sampling]
seed = 4
frames_per_shot = 3

[[shots]]
id = "bars01"
scene = "Night Interior"
frames = 3

[shots.synth]
width = 64
height = 48
scene = "blobs"
"#,
    );
    let corpus = m.parent().unwrap();
    let bar = 6;
    let matte = |p: &mut hdrtriad::core::Plane<[f64; 3]>| {
        let h = p.height();
        for y in (0..bar).chain(h - bar..h) {
            for x in 0..p.width() {
                *p.get_mut(x, y) = [0.0; 3];
            }
        }
    };
    for frame in 0..3 {
        let exr = corpus.join(format!("exr/bars01_{frame:04}.exr"));
        let mut e = io::read_exr(&exr).unwrap();
        matte(&mut e);
        io::write_exr(&exr, &e).unwrap();
        for dir in ["sdr", "hdr"] {
            let path = corpus.join(format!("{dir}/bars01_{frame:04}.png"));
            let mut c = io::read_codes(&path, CodeRange::Full, None).unwrap();
            matte(&mut c);
            io::write_png16(&path, &c).unwrap();
        }
    }
    let out = dir.join("run");
    ok(&["decide", "--manifest", s(&m), "--out", s(&out), "--threshold", "1"]);
    let f: RecordFile<DecisionRecord> = report::read_json(&out.join(report::DECISION_FRAMES)).unwrap();
    assert_eq!(f.records.len(), 3);
    for r in &f.records {
        let (w, h, rgb) = io::read_rgb8(&out.join(&r.map)).unwrap();
        let mut counts: BTreeMap<[u8; 3], u64> = BTreeMap::new();
        for px in rgb.chunks(3) {
            *counts.entry([px[0], px[1], px[2]]).or_default() += 1;
        }
        let count = |l: DecisionLabel| counts.get(&l.color()).copied().unwrap_or(0);
        assert_eq!(count(DecisionLabel::Recovery), r.counts.recovery);
        assert_eq!(count(DecisionLabel::Adjustment), r.counts.adjustment);
        assert_eq!(count(DecisionLabel::Neutral), r.counts.neutral);
        assert_eq!(count(DecisionLabel::Outside), (w * h) as u64 - r.counts.total());
        for y in (0..bar).chain(h - bar..h) {
            for x in 0..w {
                let i = (y * w + x) * 3;
                assert_eq!(&rgb[i..i + 3], &[0, 0, 0], "({x}, {y})");
            }
        }
    }
}

#[test]
fn scene_rows_equal_recomputation_from_shot_rows() {
    let dir = scratch("scene_means");
    let shot = |id: &str, scene: &str, kind: &str, seed: u64| {
        format!(
            "[[shots]]\nid = \"{id}\"\nscene = \"{scene}\"\nframes = 4\n\n[shots.synth]\nwidth = 48\nheight = 40\nscene = \"{kind}\"\nseed = {seed}\n\n"
        )
    };
    let text = format!(
        "seed = 9\n\n[sampling]\nseed = 9\nframes_per_shot = 4\n\n{}{}{}{}",
        shot("d1", "Desert", "textured", 1),
        shot("d2", "Desert", "blobs", 2),
        shot("d3", "Desert", "textured", 3),
        shot("c1", "Cave", "blobs", 4),
    );
    let m = synth_text(&dir, &text);
    let out = dir.join("run");
    ok(&["analyze", "--manifest", s(&m), "--out", s(&out)]);
    ok(&["decide", "--manifest", s(&m), "--out", s(&out)]);

    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;

    let shots = csv_rows(&out.join(report::SHOTS_LUMINANCE));
    let table1 = csv_rows(&out.join(report::TABLE1));
    for row in &table1 {
        let members: Vec<_> =
            shots.iter().filter(|s| row["Scene"] == report::FULL_FILM || s["Scene"] == row["Scene"]).collect();
        assert_eq!(f(&row["Number of Shots"]) as usize, members.len());
        let col = |c: &str| members.iter().map(|s| f(&s[c])).collect::<Vec<_>>();
        assert!(close(f(&row["Mean (R²)"]), mean(&col("Mean (R²)"))));
        assert!(close(f(&row["Gradient Correlation (ρ)"]), mean(&col("Gradient Correlation (ρ)"))));
        let lowest = col("Minimum (R²)").into_iter().fold(f64::INFINITY, f64::min);
        assert!(close(f(&row["Minimum (R²)"]), lowest));
    }
    assert_eq!(table1[1]["Scene"], "Desert");
    assert_eq!(table1[1]["Number of Shots"], "3");

    let shots = csv_rows(&out.join(report::SHOTS_STRUCTURE));
    for row in csv_rows(&out.join(report::TABLE6)) {
        let members: Vec<_> = shots.iter().filter(|s| s["Scene"] == row["Scene"]).collect();
        for c in ["Corr. (EXR–HDR)", "Corr. (HDR–SDR)"] {
            let v: Vec<f64> = members.iter().map(|s| f(&s[c])).collect();
            assert!(close(f(&row[c]), mean(&v)), "{c}");
        }
    }
}

#[test]
fn more_than_ten_percent_failures_is_a_partial_failure() {
    let dir = scratch("failures");
    let m = synth(&dir, Path::new(THREE_SHOTS));
    let corpus = m.parent().unwrap();
    for frame in [3, 4] {
        fs::remove_file(corpus.join(format!("hdr/desert01_{frame:04}.png"))).unwrap();
    }
    let out = dir.join("few");
    assert_eq!(run(&["analyze", "--manifest", s(&m), "--out", s(&out)]).0, 0);
    let echo: RunEcho<Value> = report::read_json(&out.join("analyze_run.json")).unwrap();
    assert_eq!(echo.failed, 2);

    for frame in [5, 6] {
        fs::remove_file(corpus.join(format!("hdr/desert01_{frame:04}.png"))).unwrap();
    }
    let out = dir.join("many");
    assert_eq!(run(&["analyze", "--manifest", s(&m), "--out", s(&out)]).0, 1);
    let echo: RunEcho<Value> = report::read_json(&out.join("analyze_run.json")).unwrap();
    assert_eq!((echo.frames, echo.failed), (30, 4));
    let t1 = csv_rows(&out.join(report::TABLE1));
    assert_eq!(t1.len(), 4);
}

#[test]
fn report_rebuilds_tables_and_verifies_truth() {
    let dir = scratch("report");
    let m = synth(&dir, Path::new(THREE_SHOTS));
    let out = dir.join("run");
    ok(&["analyze", "--manifest", s(&m), "--out", s(&out)]);
    ok(&["decide", "--manifest", s(&m), "--out", s(&out)]);
    let before = fs::read(out.join(report::TABLE1)).unwrap();
    fs::remove_file(out.join(report::TABLE1)).unwrap();
    let corpus = m.parent().unwrap();
    let (code, err) = run(&["report", "--out", s(&out), "--truth", s(corpus)]);
    assert!(code == 0 || code == 1, "{err}");
    assert_eq!(fs::read(out.join(report::TABLE1)).unwrap(), before);
    let verify: Value = report::read_json(&out.join("verify.json")).unwrap();
    assert_eq!(verify["passed"].as_bool().unwrap(), code == 0);
    assert!(verify["checks"].as_array().unwrap().iter().any(|c| c["name"] == "mapping"));
}
