use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn condloc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_condloc"))
        .current_dir(dir)
        .env_remove("RUST_LOG")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = condloc(dir, args);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn fails(dir: &Path, args: &[&str], code: i32) -> String {
    let out = condloc(dir, args);
    assert_eq!(out.status.code(), Some(code), "{args:?}");
    String::from_utf8(out.stderr).unwrap()
}

fn synth(dir: &Path, extra: &[&str]) {
    let mut args = vec!["synth", "--videos", "2", "--gt", "gt.txt", "--probs", "probs.jsonl"];
    args.extend_from_slice(extra);
    ok(dir, &args);
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

fn mean_os(stdout: &str) -> f64 {
    stdout.lines().next().unwrap().strip_prefix("mean_os ").unwrap().parse().unwrap()
}

fn one_hot_line(view: &str, clip: u32) -> String {
    let mut p = vec!["0.0"; 16];
    p[3] = "1.0";
    format!(r#"{{"video_id":"a","view":"{view}","clip_index":{clip},"probs":[{}]}}"#, p.join(","))
}

#[test]
fn synth_is_deterministic_and_counts_records() {
    let t = TempDir::new().unwrap();
    synth(t.path(), &["--seed", "1"]);
    let first = (read(t.path(), "gt.txt"), read(t.path(), "probs.jsonl"));
    synth(t.path(), &["--seed", "1"]);
    assert_eq!(first, (read(t.path(), "gt.txt"), read(t.path(), "probs.jsonl")));
    assert_eq!(first.1.lines().count(), 2 * 3 * 478);
    assert_eq!(first.0.lines().count(), 2 * 15);
}

#[test]
fn fuse_writes_one_record_per_clip() {
    let t = TempDir::new().unwrap();
    synth(t.path(), &[]);
    ok(t.path(), &["fuse", "-i", "probs.jsonl", "-o", "fused.jsonl"]);
    assert_eq!(read(t.path(), "fused.jsonl").lines().count(), 2 * 478);
}

#[test]
fn noiseless_round_trip_reproduces_schedule() {
    let t = TempDir::new().unwrap();
    synth(t.path(), &["--seed", "1", "--noiseless"]);
    ok(t.path(), &["fuse", "-i", "probs.jsonl", "-o", "fused.jsonl"]);
    ok(t.path(), &["localize", "-i", "fused.jsonl", "-o", "sub.txt"]);
    assert_eq!(read(t.path(), "sub.txt.notes.jsonl"), "");
    let parse = |text: String| -> Vec<(String, u16, f64, f64)> {
        let mut v: Vec<_> = text
            .lines()
            .map(|l| {
                let f: Vec<&str> = l.split_whitespace().collect();
                (f[0].to_string(), f[1].parse().unwrap(), f[2].parse().unwrap(), f[3].parse().unwrap())
            })
            .collect();
        v.sort_by(|a, b| (&a.0, a.1).cmp(&(&b.0, b.1)));
        v
    };
    let (sub, gt) = (parse(read(t.path(), "sub.txt")), parse(read(t.path(), "gt.txt")));
    assert_eq!(sub.len(), gt.len());
    for (s, g) in sub.iter().zip(&gt) {
        assert_eq!((&s.0, s.1), (&g.0, g.1));
        assert!((s.2 - g.2).abs() <= 1.0 && (s.3 - g.3).abs() <= 1.0, "{s:?} vs {g:?}");
    }
    let stdout = ok(t.path(), &["eval", "--pred", "sub.txt", "--gt", "gt.txt"]);
    assert!(mean_os(&stdout) > 0.8, "{stdout}");
}

#[test]
fn localize_is_byte_identical_and_accepts_raw_views() {
    let t = TempDir::new().unwrap();
    synth(t.path(), &[]);
    ok(t.path(), &["fuse", "-i", "probs.jsonl", "-o", "fused.jsonl"]);
    ok(t.path(), &["localize", "-i", "fused.jsonl", "-o", "a.txt"]);
    ok(t.path(), &["localize", "-i", "fused.jsonl", "-o", "b.txt"]);
    ok(t.path(), &["localize", "-i", "probs.jsonl", "-o", "c.txt"]);
    assert_eq!(read(t.path(), "a.txt"), read(t.path(), "b.txt"));
    assert_eq!(read(t.path(), "a.txt"), read(t.path(), "c.txt"));
    let lines: Vec<String> = read(t.path(), "a.txt").lines().map(String::from).collect();
    assert_eq!(lines.len(), 2 * 15);
    let mut sorted = lines.clone();
    sorted.sort_by_key(|l| {
        let f: Vec<&str> = l.split_whitespace().collect();
        (f[0].to_string(), f[1].parse::<u16>().unwrap(), f[2].parse::<i64>().unwrap())
    });
    assert_eq!(lines, sorted);
}

#[test]
fn malformed_line_reports_its_number() {
    let t = TempDir::new().unwrap();
    let mut lines: Vec<String> = (0..16).map(|c| one_hot_line("dashboard", c)).collect();
    lines.push("{not json".into());
    fs::write(t.path().join("p.jsonl"), lines.join("\n")).unwrap();
    let err = fails(t.path(), &["fuse", "-i", "p.jsonl", "-o", "f.jsonl"], 2);
    assert!(err.contains("line 17"), "{err}");
}

#[test]
fn empty_input_has_no_records() {
    let t = TempDir::new().unwrap();
    fs::write(t.path().join("p.jsonl"), "").unwrap();
    let err = fails(t.path(), &["localize", "-i", "p.jsonl", "-o", "s.txt"], 2);
    assert!(err.contains("no records"), "{err}");
}

#[test]
fn validation_errors_exit_3() {
    let t = TempDir::new().unwrap();
    let dup = [one_hot_line("dashboard", 0), one_hot_line("dashboard", 0)].join("\n");
    fs::write(t.path().join("dup.jsonl"), dup).unwrap();
    let err = fails(t.path(), &["fuse", "-i", "dup.jsonl", "-o", "f.jsonl"], 3);
    assert!(err.contains("duplicate"), "{err}");
    let zero = one_hot_line("rearview", 0).replace("1.0", "0.0");
    fs::write(t.path().join("zero.jsonl"), zero).unwrap();
    let err = fails(t.path(), &["fuse", "-i", "zero.jsonl", "-o", "f.jsonl"], 3);
    assert!(err.contains("line 1") && err.contains("zero"), "{err}");
    fails(t.path(), &["fuse", "-i", "zero.jsonl", "-o", "zero.jsonl"], 3);
}

#[test]
fn eval_worked_examples() {
    let t = TempDir::new().unwrap();
    fs::write(t.path().join("gt.txt"), "v 1 0 10\nv 2 20 30\n").unwrap();
    fs::write(t.path().join("half.txt"), "v 1 5 15\nv 2 25 35\n").unwrap();
    fs::write(t.path().join("other.txt"), "v 3 0 10\n").unwrap();
    assert!(ok(t.path(), &["eval", "--pred", "gt.txt", "--gt", "gt.txt"]).starts_with("mean_os 1.0000\n"));
    assert!(ok(t.path(), &["eval", "--pred", "half.txt", "--gt", "gt.txt"]).starts_with("mean_os 0.3333\n"));
    assert!(ok(t.path(), &["eval", "--pred", "other.txt", "--gt", "gt.txt"]).starts_with("mean_os 0.0000\n"));
    let json = ok(t.path(), &["--format", "json", "eval", "--pred", "half.txt", "--gt", "gt.txt"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert!((v["overall"]["mean_os"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
    fs::write(t.path().join("bad.txt"), "v 1 0\n").unwrap();
    let err = fails(t.path(), &["eval", "--pred", "bad.txt", "--gt", "gt.txt"], 2);
    assert!(err.contains("line 1"), "{err}");
}

#[test]
fn report_timelines() {
    let t = TempDir::new().unwrap();
    synth(t.path(), &["--noiseless"]);
    let text = ok(t.path(), &["report", "-i", "probs.jsonl", "--video", "vid0000", "--width", "30"]);
    let rows: Vec<&str> = text.lines().skip(2).take(15).collect();
    assert_eq!(rows.len(), 15);
    for row in rows {
        let bars: Vec<&str> = row.split(" | ").collect();
        let top1 = bars[0].split_whitespace().nth(1).unwrap();
        assert_eq!(top1, bars[2], "{row}");
    }

    synth(t.path(), &["--eps-flip", "0.4"]);
    let json = ok(t.path(), &["--format", "json", "report", "-i", "probs.jsonl"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    for video in v.as_array().unwrap() {
        let classes = video["classes"].as_array().unwrap();
        assert_eq!(classes.len(), 15);
        assert!(classes.iter().all(|c| c["final_segment"].is_array()));
    }
    fails(t.path(), &["report", "-i", "missing.jsonl"], 2);
}

#[test]
fn config_and_flags() {
    let t = TempDir::new().unwrap();
    synth(t.path(), &[]);
    fs::write(t.path().join("typo.toml"), "[post]\ngap_max = 3\n").unwrap();
    let err = fails(t.path(), &["--config", "typo.toml", "fuse", "-i", "probs.jsonl", "-o", "f.jsonl"], 2);
    assert!(err.contains("gap_max"), "{err}");
    fs::write(t.path().join("bad.toml"), "[post]\np_merge = 2.0\n").unwrap();
    fails(t.path(), &["--config", "bad.toml", "fuse", "-i", "probs.jsonl", "-o", "f.jsonl"], 3);

    // With no background class, class 0 becomes required too.
    ok(t.path(), &["--background-class", "none", "localize", "-i", "probs.jsonl", "-o", "s.txt"]);
    assert_eq!(read(t.path(), "s.txt").lines().count(), 2 * 16);
    let out = Command::new(env!("CARGO_BIN_EXE_condloc"))
        .current_dir(t.path())
        .env("CONDLOC_BACKGROUND_CLASS", "none")
        .args(["localize", "-i", "probs.jsonl", "-o", "e.txt"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(read(t.path(), "e.txt"), read(t.path(), "s.txt"));

    let rows = vec![[1.0, 1.0, 1.0]; 16];
    fs::write(t.path().join("w.json"), serde_json::to_string(&rows).unwrap()).unwrap();
    ok(t.path(), &["--weights", "w.json", "fuse", "-i", "probs.jsonl", "-o", "f.jsonl"]);
    fs::write(t.path().join("short.json"), "[[1,0,0]]").unwrap();
    fails(t.path(), &["--weights", "short.json", "fuse", "-i", "probs.jsonl", "-o", "f.jsonl"], 3);
}
