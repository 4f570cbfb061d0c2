#![allow(dead_code)]

use std::path::{Path, PathBuf};

use flowsynth::geometry::CameraIntrinsics;
use flowsynth::io::{write_image, write_pfm, Pfm};
use flowsynth::{DepthMap, ImageBuffer};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Smooth RGB texture: a few low-frequency waves with random phases.
pub fn texture(w: usize, h: usize, r: &mut impl Rng, max_slope: f64) -> ImageBuffer {
    let waves: Vec<[f64; 4]> = (0..9)
        .map(|_| {
            let period = r.random_range(60.0..160.0);
            let angle: f64 = r.random_range(0.0..std::f64::consts::TAU);
            let phase = r.random_range(0.0..std::f64::consts::TAU);
            // amplitude chosen so each wave's slope is below max_slope / 3
            let amp = max_slope / 3.0 * period / std::f64::consts::TAU;
            [angle.cos() / period, angle.sin() / period, phase, amp]
        })
        .collect();
    let mut data = Vec::with_capacity(w * h * 3);
    for y in 0..h {
        for x in 0..w {
            for c in 0..3 {
                let mut v = 0.5;
                for [kx, ky, ph, amp] in &waves[c * 3..c * 3 + 3] {
                    v += amp * (std::f64::consts::TAU * (kx * x as f64 + ky * y as f64) + ph).sin();
                }
                data.push(v.clamp(0.0, 1.0) as f32);
            }
        }
    }
    ImageBuffer::new(w, h, 3, data).unwrap()
}

/// A slanted surface with gentle bumps, depths roughly 3 to 12 m.
pub fn depth(w: usize, h: usize, r: &mut impl Rng) -> DepthMap {
    let base = r.random_range(4.0..8.0);
    let (gx, gy) = (r.random_range(-0.02..0.02), r.random_range(-0.02..0.02));
    let bump = r.random_range(0.0..1.0);
    let values = (0..w * h)
        .map(|i| {
            let (x, y) = ((i % w) as f64, (i / w) as f64);
            (base + gx * x + gy * y + bump * (x * 0.1).sin() * (y * 0.13).cos()) as f32
        })
        .collect();
    DepthMap::from_values(w, h, values).unwrap()
}

pub fn intrinsics(w: usize, h: usize, r: &mut impl Rng) -> CameraIntrinsics {
    let f = r.random_range(0.8..1.5) * w as f64;
    CameraIntrinsics::new(f, f, (w - 1) as f64 / 2.0, (h - 1) as f64 / 2.0, w, h).unwrap()
}

/// Writes `n` frames (image PNG + depth PFM) over two sequences and a manifest
/// referencing them; returns the manifest path.
pub fn write_dataset(dir: &Path, n: usize, w: usize, h: usize, seed: u64) -> PathBuf {
    let mut r = rng(seed);
    let mut text = String::new();
    for i in 0..n {
        let seq = if i < n / 2 { "seq_a" } else { "seq_b" };
        let id = format!("{i:04}");
        let img = texture(w, h, &mut r, 0.02);
        let d = depth(w, h, &mut r);
        write_image(dir.join(format!("images/{id}.png")), &img).unwrap();
        write_pfm(
            dir.join(format!("depth/{id}.pfm")),
            &Pfm { width: w, height: h, channels: 1, data: d.values.clone() },
        )
        .unwrap();
        text += &format!(
            "[[frame]]\nsequence = \"{seq}\"\nid = \"{id}\"\nmodality = \"rgb\"\nimage = \"images/{id}.png\"\ndepth = \"depth/{id}.pfm\"\n"
        );
        if i % 2 == 0 {
            let k = intrinsics(w, h, &mut r);
            text += &format!(
                "intrinsics = {{ fx = {}, fy = {}, cx = {}, cy = {}, width = {w}, height = {h} }}\n",
                k.fx, k.fy, k.cx, k.cy
            );
        }
        text.push('\n');
    }
    let path = dir.join("manifest.toml");
    std::fs::write(&path, text).unwrap();
    path
}

/// Every file under `root` with its bytes, keyed by relative path.
pub fn tree(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}
