use std::f64::consts::PI;
use std::path::Path;

use crate::error::Result;
use crate::geometry::FlowField;
use crate::io::write_rgb8;

/// Hue segments of the Middlebury color wheel: red-yellow, yellow-green,
/// green-cyan, cyan-blue, blue-magenta, magenta-red.
const SEGMENTS: [usize; 6] = [15, 6, 4, 11, 13, 6];

fn color_wheel() -> Vec<[f64; 3]> {
    let mut wheel = Vec::with_capacity(SEGMENTS.iter().sum());
    for (seg, &n) in SEGMENTS.iter().enumerate() {
        for i in 0..n {
            let up = i as f64 / n as f64;
            let down = 1.0 - up;
            wheel.push(match seg {
                0 => [1.0, up, 0.0],
                1 => [down, 1.0, 0.0],
                2 => [0.0, 1.0, up],
                3 => [0.0, down, 1.0],
                4 => [up, 0.0, 1.0],
                _ => [1.0, 0.0, down],
            });
        }
    }
    wheel
}

/// Hue from direction, saturation from magnitude relative to `max_radius`
/// (the largest valid magnitude when `None`). Invalid pixels are black.
pub fn flow_to_rgb(flow: &FlowField, max_radius: Option<f64>) -> Vec<u8> {
    let wheel = color_wheel();
    let n = wheel.len();
    let max_r = max_radius.unwrap_or_else(|| {
        (0..flow.len())
            .filter(|&i| flow.valid[i])
            .map(|i| (flow.u[i] as f64).hypot(flow.v[i] as f64))
            .fold(0.0, f64::max)
    });
    let scale = if max_r > 0.0 { 1.0 / max_r } else { 0.0 };
    let mut rgb = vec![0u8; flow.len() * 3];
    for i in 0..flow.len() {
        if !flow.valid[i] {
            continue;
        }
        let (u, v) = (flow.u[i] as f64 * scale, flow.v[i] as f64 * scale);
        let r = u.hypot(v);
        let a = (-v).atan2(-u) / PI;
        let fk = (a + 1.0) / 2.0 * (n - 1) as f64;
        let k0 = fk.floor() as usize % n;
        let k1 = (k0 + 1) % n;
        let f = fk - fk.floor();
        for c in 0..3 {
            let col = (1.0 - f) * wheel[k0][c] + f * wheel[k1][c];
            let col = if r <= 1.0 { 1.0 - r * (1.0 - col) } else { col * 0.75 };
            rgb[i * 3 + c] = (255.0 * col).round().clamp(0.0, 255.0) as u8;
        }
    }
    rgb
}

pub fn write_flow_png(path: impl AsRef<Path>, flow: &FlowField, max_radius: Option<f64>) -> Result<()> {
    write_rgb8(path, flow.width, flow.height, flow_to_rgb(flow, max_radius))
}
