//! The `qrhull` binary end to end, on files written by the tests.

mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::fixtures;
use qrhull::yuv::{self, FrameYuv420};

fn qrhull(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrhull")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn ladder_results(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("results.csv");
    qrhull::report::write_results_csv(&path, &fixtures::ladder_points()).unwrap();
    path
}

fn synthetic_hull(dir: &Path) -> std::path::PathBuf {
    let mut text = String::from("codec,clip,resolution,crf,ln_bitrate,quality\n");
    for clip in 0..4 {
        for k in 0..6 {
            let x = 6.0 + 1.2 * f64::from(k) + 0.1 * f64::from(clip);
            let q = 20.0 + 8.0 * (x - 5.5).ln() + 0.3 * f64::from(clip) + if k % 2 == 0 { 0.2 } else { -0.2 };
            text += &format!("h265,clip{clip},3840x2160,{},{x},{q}\n", 50 - 5 * k);
        }
    }
    let path = dir.join("hull.csv");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let o = qrhull(&["bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage"), "{}", stderr(&o));
}

#[test]
fn out_of_range_degree_is_a_usage_error() {
    let o = qrhull(&["fit", "--hull", "h.csv", "--codec", "h264", "--out", "m.json", "--degree", "9"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_input_names_the_file() {
    let o = qrhull(&["hull", "--results", "/nonexistent/results.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/nonexistent/results.csv"), "{}", stderr(&o));
}

#[test]
fn fit_selects_degree_and_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let hull = synthetic_hull(dir.path());
    let (model, sweep, svg) = (dir.path().join("model.json"), dir.path().join("sweep.csv"), dir.path().join("fit.svg"));
    let o = qrhull(&[
        "fit", "--hull", s(&hull), "--codec", "h265", "--out", s(&model), "--sweep", s(&sweep), "--svg", s(&svg), "--normalize",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let m = qrhull::report::read_model_json(&model).unwrap();
    assert_eq!(m.codec, qrhull::Codec::H265);
    assert!((1..=8).contains(&m.degree));
    assert!(m.x_std != 1.0 && m.n_points == 24);
    let sweep_text = std::fs::read_to_string(&sweep).unwrap();
    assert!(sweep_text.starts_with("degree,rmse,r_squared"));
    assert_eq!(sweep_text.lines().count(), 9);
    assert!(std::fs::read_to_string(&svg).unwrap().contains("class=\"fit\""));

    // no h264 rows in this file
    let o = qrhull(&["fit", "--hull", s(&hull), "--codec", "h264", "--out", s(&model)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn hull_and_report_from_ladder_rows() {
    let dir = tempfile::tempdir().unwrap();
    let results = ladder_results(dir.path());
    let hull = dir.path().join("hull.csv");
    let plots = dir.path().join("plots");
    let o = qrhull(&["hull", "--results", s(&results), "--out", s(&hull), "--svg-dir", s(&plots)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&hull).unwrap();
    assert!(text.starts_with("codec,clip,resolution,crf,ln_bitrate,quality"));
    assert!(plots.join("qr_myanmar.svg").exists());

    let out = dir.path().join("report");
    let o = qrhull(&["report", "--results", s(&results), "--out", s(&out), "--log-base", "10"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(out.join("hull.csv")).unwrap();
    assert!(text.starts_with("codec,clip,resolution,crf,log10_bitrate,quality"));
    assert!(out.join("qr_myanmar.svg").exists());
}

#[test]
fn compare_prints_one_row_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let a = fixtures::published_model(
        qrhull::Codec::H264,
        &fixtures::H264_MODEL,
        0.0,
        1.0,
        Some([fixtures::LADDER_H264[9].1, fixtures::LADDER_H264[0].1]),
    );
    let b = fixtures::published_model(
        qrhull::Codec::H265,
        &fixtures::H265_MODEL,
        0.0,
        1.0,
        Some([fixtures::LADDER_H265[9].1, fixtures::LADDER_H265[0].1]),
    );
    let (pa, pb) = (dir.path().join("a.json"), dir.path().join("b.json"));
    qrhull::report::write_model_json(&pa, &a).unwrap();
    qrhull::report::write_model_json(&pb, &b).unwrap();
    let o = qrhull(&["compare", s(&pa), s(&pb), "--points", "20"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "bitrate_kbps,h264,h265,delta");
    assert_eq!(lines.len(), 21);
    assert!(stderr(&o).contains("mean delta"));
}

fn write_clip(path: &Path, seed: u64, noise: i16) {
    let mut rng = common::rng(seed);
    let base: Vec<FrameYuv420> = (0..3).map(|i| common::random_frame(&mut rng, i, 32, 16)).collect();
    let frames: Vec<FrameYuv420> = base.iter().map(|f| common::perturb(&mut rng, f, noise)).collect();
    yuv::write_file(path, &common::info(32, 16), &frames).unwrap();
}

#[test]
fn metrics_and_features_on_y4m() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.y4m"), dir.path().join("b.y4m"));
    write_clip(&a, 1, 0);
    write_clip(&b, 1, 4);
    let o = qrhull(&["metrics", "--reference", s(&a), "--distorted", s(&b)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("frames,psnr_420,psnr_y,pooled_psnr,vmaf"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "3");
    let psnr: f64 = row[1].parse().unwrap();
    assert!(psnr > 30.0 && psnr < 100.0, "{psnr}");

    let o = qrhull(&["features", s(&a), s(&b)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "sequence,frame_count,SI,TI");
    assert!(lines[1].starts_with("a,3,") && lines[2].starts_with("b,3,"));
}

#[test]
fn dry_run_lists_the_plan_and_bad_crf_fails() {
    let dir = tempfile::tempdir().unwrap();
    let clip = dir.path().join("src.y4m");
    yuv::write_file(&clip, &common::info(64, 32), &[FrameYuv420::filled(0, 64, 32, 128)]).unwrap();
    let cfg = dir.path().join("ladder.json");
    std::fs::write(
        &cfg,
        r#"{"clips":[{"id":"src","path":"src.y4m"}],"codecs":["h264","vp9"],
            "resolutions":[{"width":64,"height":32},{"width":32,"height":16}],"crf_values":[20,40]}"#,
    )
    .unwrap();
    let o = qrhull(&["ladder", "--config", s(&cfg), "--dry-run"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 1 + 2 * 2 * 2);
    assert!(out.lines().nth(1).unwrap().starts_with("src,h264,64x32,20"));

    std::fs::write(
        &cfg,
        r#"{"clips":[{"id":"src","path":"src.y4m"}],"codecs":["h264"],
            "resolutions":[{"width":64,"height":32}],"crf_values":[50,55]}"#,
    )
    .unwrap();
    let o = qrhull(&["ladder", "--config", s(&cfg), "--dry-run"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("0..=51"), "{}", stderr(&o));
}
