use std::path::Path;
use std::process::{Command, Output};

use flowsynth::io::{read_flo, write_flo, write_image, write_pfm, Pfm};
use flowsynth::{FlowField, ImageBuffer};

fn flowsynth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flowsynth")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Two frames of a smooth image over a constant-depth plane.
fn dataset(dir: &Path) -> std::path::PathBuf {
    let (w, h) = (24, 18);
    let mut data = Vec::new();
    for y in 0..h {
        for x in 0..w {
            data.push((0.5 + 0.3 * (x as f32 * 0.2).sin() * (y as f32 * 0.3).cos()).clamp(0.0, 1.0));
        }
    }
    let image = ImageBuffer::new(w, h, 1, data).unwrap();
    let mut text = String::new();
    for id in ["a", "b"] {
        write_image(dir.join(format!("{id}.png")), &image).unwrap();
        let depth = Pfm { width: w, height: h, channels: 1, data: vec![5.0; w * h] };
        write_pfm(dir.join(format!("{id}.pfm")), &depth).unwrap();
        text += &format!(
            "[[frame]]\nsequence = \"s\"\nid = \"{id}\"\nmodality = \"thermal\"\nimage = \"{id}.png\"\ndepth = \"{id}.pfm\"\n\n"
        );
    }
    let manifest = dir.join("manifest.toml");
    std::fs::write(&manifest, text).unwrap();
    manifest
}

#[test]
fn synthesize_writes_triplets() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dataset(dir.path());
    let out = dir.path().join("out");
    let o = flowsynth(&["synthesize", "--manifest", p(&manifest), "--out", p(&out), "--seed", "9"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("synthesized 2 triplet(s)"));
    for id in ["a", "b"] {
        let t = out.join("s").join("thermal").join(id);
        for f in ["rendered.png", "flow.flo", "mask.png", "meta.json"] {
            assert!(t.join(f).is_file(), "{}", t.join(f).display());
        }
    }
}

#[test]
fn loss_prints_value_and_kept_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut pred = FlowField::constant(4, 1, 0.0, 0.0);
    for (x, r) in [1.0, 2.0, 3.0, 100.0].into_iter().enumerate() {
        pred.set(x, 0, r, 0.0);
    }
    let (a, b) = (dir.path().join("p.flo"), dir.path().join("t.flo"));
    write_flo(&a, &pred).unwrap();
    write_flo(&b, &FlowField::zeros(4, 1)).unwrap();
    let o = flowsynth(&["loss", "--pred", p(&a), "--target", p(&b), "--tau", "25"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "loss 2\npixels 3 kept of 4 masked\n");

    let o = flowsynth(&["loss", "--pred", p(&a), "--target", p(&b), "--tau", "100"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn viz_writes_png() {
    let dir = tempfile::tempdir().unwrap();
    let flow = dir.path().join("f.flo");
    write_flo(&flow, &FlowField::constant(5, 4, 1.0, -1.0)).unwrap();
    let png = dir.path().join("viz/f.png");
    let o = flowsynth(&["viz", "--flow", p(&flow), "--out", p(&png)]);
    assert!(o.status.success());
    assert!(std::fs::read(&png).unwrap().starts_with(b"\x89PNG"));
    let o = flowsynth(&["viz", "--flow", p(&flow), "--out", p(&png), "--max-radius", "-1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn split_prints_counts() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dataset(dir.path());
    let o = flowsynth(&["split", "--manifest", p(&manifest), "--train-frac", "0.5"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let total = out.lines().last().unwrap();
    assert_eq!(total.split_whitespace().collect::<Vec<_>>(), ["total", "2", "1", "1"]);
}

#[test]
fn evaluate_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dataset(dir.path());
    let (gt, pred) = (dir.path().join("gt"), dir.path().join("pred"));
    let mut truth = FlowField::invalid(24, 18);
    truth.set(3, 4, 1.0, 1.0);
    truth.set(7, 9, -2.0, 0.5);
    for id in ["a", "b"] {
        write_flo(gt.join("s").join(id).join("flow.flo"), &truth).unwrap();
        write_flo(pred.join("s").join(id).join("flow.flo"), &FlowField::zeros(24, 18)).unwrap();
    }
    let report = dir.path().join("report.jsonl");
    let o = flowsynth(&[
        "evaluate", "--manifest", p(&manifest), "--pred", p(&pred), "--gt", p(&gt), "--report", p(&report),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("EPE"));
    let lines = std::fs::read_to_string(&report).unwrap();
    assert_eq!(lines.lines().count(), 3);
    assert!(lines.lines().last().unwrap().contains("\"aggregate\""));
}

#[test]
fn missing_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.flo");
    let o = flowsynth(&["loss", "--pred", p(&missing), "--target", p(&missing)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.flo"));
    let o = flowsynth(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let o = flowsynth(&["config"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("[pose]"));
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, text.replace("tau_percent = 10.0", "tau_percent = 20.0")).unwrap();
    let o = flowsynth(&["--config", p(&cfg), "config"]);
    assert!(stdout(&o).contains("tau_percent = 20.0"));
    std::fs::write(&cfg, "[pose]\nbogus = 1\n").unwrap();
    assert_eq!(flowsynth(&["--config", p(&cfg), "config"]).status.code(), Some(1));
}

#[test]
fn flow_survives_a_synthesize_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dataset(dir.path());
    let out = dir.path().join("out");
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[pose]\nmax_rotation_deg = 0.0\nmax_translation_frac = 0.0\n").unwrap();
    let o = flowsynth(&["--config", p(&cfg), "synthesize", "--manifest", p(&manifest), "--out", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read_flo(out.join("s/thermal/a/flow.flo")).unwrap(), FlowField::zeros(24, 18));
}
