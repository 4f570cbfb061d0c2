use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::triplet::{frame_seed, make_triplet, TripletMeta};
use super::{Manifest, PipelineConfig};
use crate::benchmark::{lidar_to_flow, normalize_intrinsics, score, CameraRig, MetricReport, SparseFlowGT};
use crate::error::{Error, Result};
use crate::geometry::seeded_rng;
use crate::io::{read_flo, read_lidar, write_bytes, write_flo, write_mask};
use crate::losses::ValidMask;

/// Name of the flow file inside each frame directory.
pub const FLOW_FILE: &str = "flow.flo";
/// Name of the validity mask inside each frame directory.
pub const MASK_FILE: &str = "mask.png";

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start {workers} workers: {e}")))
}

/// Runs `f` on every item in a pool of `workers` threads (0 = one per core)
/// and returns the results in input order, or the first error in input order.
fn run_parallel<T: Sync, U: Send>(workers: usize, items: &[T], f: impl Fn(&T) -> Result<U> + Sync) -> Result<Vec<U>> {
    let results: Vec<Result<U>> = pool(workers)?.install(|| items.par_iter().map(&f).collect());
    results.into_iter().collect()
}

/// Everything recorded next to a synthesized triplet.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameMeta {
    pub sequence: String,
    pub id: String,
    pub modality: String,
    pub seed: u64,
    #[serde(flatten)]
    pub triplet: TripletMeta,
}

/// Output directory of a synthesized frame.
pub fn triplet_dir(out: &Path, sequence: &str, modality: &str, id: &str) -> PathBuf {
    out.join(sequence).join(modality).join(id)
}

/// Directory holding a frame's flow for ground truth and predictions.
pub fn frame_dir(root: &Path, sequence: &str, id: &str) -> PathBuf {
    root.join(sequence).join(id)
}

/// Synthesizes a triplet for every record with a depth map and writes
/// `rendered.png`, `flow.flo`, `mask.png` and `meta.json` under
/// `out/<sequence>/<modality>/<id>/`. Each frame draws from its own stream keyed
/// by the master seed (`cfg.pose.seed`) and its names, so the output does not
/// depend on `cfg.run.workers`.
pub fn run_synthesize(manifest: &Manifest, out: &Path, cfg: &PipelineConfig) -> Result<Vec<FrameMeta>> {
    cfg.validate()?;
    let frames: Vec<_> = manifest.frames.iter().filter(|f| f.depth.is_some()).collect();
    let skipped = manifest.frames.len() - frames.len();
    if skipped > 0 {
        log::info!("skipping {skipped} record(s) without a depth map");
    }
    if frames.is_empty() {
        return Err(Error::EmptyInput("no manifest record has a depth map".into()));
    }
    let metas = run_parallel(cfg.run.workers, &frames, |f| {
        let seed = frame_seed(cfg.pose.seed, &f.sequence, &f.id, &f.modality);
        let mut rng = seeded_rng(seed, 0);
        let depth = f.depth.as_ref().expect("filtered on depth");
        let (triplet, meta) = make_triplet(&f.image, depth, f.intrinsics.as_ref(), cfg, &mut rng)?;
        let meta = FrameMeta {
            sequence: f.sequence.clone(),
            id: f.id.clone(),
            modality: f.modality.clone(),
            seed,
            triplet: meta,
        };
        let dir = triplet_dir(out, &f.sequence, &f.modality, &f.id);
        triplet.write(&dir)?;
        let json = serde_json::to_vec_pretty(&meta).expect("metadata serializes");
        write_bytes(&dir.join("meta.json"), &json)?;
        log::debug!("{}: {} masked of {} valid", f.key(), meta.triplet.masked, meta.triplet.valid_flow);
        Ok(meta)
    })?;
    log::info!("synthesized {} triplet(s) into {}", metas.len(), out.display());
    Ok(metas)
}

/// Per-frame ground-truth statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GtSummary {
    pub sequence: String,
    pub id: String,
    pub n_points: usize,
}

/// Projects each frame's LiDAR sweep through `rig` and writes sparse flow from
/// camera B to camera A as `flow.flo` (unlabeled pixels invalid) plus an 8-bit
/// `mask.png` under `out/<sequence>/<id>/`. With normalization enabled, both
/// cameras are first mapped to the configured focal length and size.
pub fn run_gt_from_lidar(manifest: &Manifest, rig: &CameraRig, out: &Path, cfg: &PipelineConfig) -> Result<Vec<GtSummary>> {
    cfg.validate()?;
    rig.validate()?;
    let mut rig = *rig;
    if cfg.normalize.enabled {
        let n = &cfg.normalize;
        let size = (n.target_width, n.target_height);
        rig.intrinsics_a = normalize_intrinsics(&rig.intrinsics_a, n.target_focal, size)?;
        rig.intrinsics_b = normalize_intrinsics(&rig.intrinsics_b, n.target_focal, size)?;
    }
    let mut jobs = Vec::new();
    for (seq, ids) in manifest.sequences() {
        for id in ids {
            if let Some(rec) = manifest.first_record(&seq, &id, |f| f.lidar.is_some()) {
                jobs.push((seq.clone(), id, rec.lidar.clone().expect("filtered on lidar")));
            }
        }
    }
    if jobs.is_empty() {
        return Err(Error::EmptyInput("no manifest record has a LiDAR sweep".into()));
    }
    let occlusion = cfg.benchmark.occlusion;
    run_parallel(cfg.run.workers, &jobs, |(seq, id, lidar)| {
        let frame = read_lidar(lidar)?;
        let gt = lidar_to_flow(&frame, &rig, &occlusion)?;
        let dir = frame_dir(out, seq, id);
        let flow = gt.to_flow_field();
        write_flo(dir.join(FLOW_FILE), &flow)?;
        write_mask(dir.join(MASK_FILE), &ValidMask::from_values(flow.width, flow.height, flow.valid.clone())?)?;
        Ok(GtSummary {
            sequence: seq.clone(),
            id: id.clone(),
            n_points: gt.len(),
        })
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameScore {
    pub dataset: String,
    pub sequence: String,
    pub id: String,
    #[serde(flatten)]
    pub metrics: MetricReport,
}

/// Scores of every test frame, per dataset (in order of first appearance) and
/// overall; datasets and the total are weighted by labeled points.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub frames: Vec<FrameScore>,
    pub datasets: Vec<(String, MetricReport)>,
    pub aggregate: MetricReport,
}

#[derive(Serialize)]
#[serde(tag = "record", rename_all = "lowercase")]
enum ReportLine<'a> {
    Frame(&'a FrameScore),
    Dataset {
        dataset: &'a str,
        #[serde(flatten)]
        metrics: &'a MetricReport,
    },
    Aggregate(&'a MetricReport),
}

impl EvaluationReport {
    /// One JSON object per line: frames, then datasets, then the aggregate.
    pub fn to_json_lines(&self) -> String {
        let mut lines: Vec<ReportLine> = self.frames.iter().map(ReportLine::Frame).collect();
        lines.extend(self.datasets.iter().map(|(d, m)| ReportLine::Dataset { dataset: d, metrics: m }));
        lines.push(ReportLine::Aggregate(&self.aggregate));
        let mut s = String::new();
        for l in lines {
            s += &serde_json::to_string(&l).expect("report serializes");
            s.push('\n');
        }
        s
    }

    /// Datasets as columns with EPE and F1 rows.
    pub fn to_table(&self) -> String {
        let mut cols: Vec<(&str, &MetricReport)> = self.datasets.iter().map(|(d, m)| (d.as_str(), m)).collect();
        cols.push(("all", &self.aggregate));
        let w = cols.iter().map(|(d, _)| d.len()).max().unwrap_or(0).max(9);
        let mut t = format!("{:<6}", "");
        for (d, _) in &cols {
            let _ = write!(t, " | {d:>w$}");
        }
        t.push('\n');
        t += &"-".repeat(6 + cols.len() * (w + 3));
        t.push('\n');
        let rows: [(&str, fn(&MetricReport) -> String); 3] = [
            ("EPE", |m| format!("{:.2}", m.epe)),
            ("F1", |m| format!("{:.2}", m.f1)),
            ("points", |m| m.n_points.to_string()),
        ];
        for (name, f) in rows {
            let _ = write!(t, "{name:<6}");
            for (_, m) in &cols {
                let _ = write!(t, " | {:>w$}", f(m));
            }
            t.push('\n');
        }
        t
    }
}

/// Scores every test frame of the per-sequence split. Predictions and ground
/// truth are read from `<dir>/<sequence>/<id>/flow.flo`; if any is missing the
/// run fails listing all of them. Frames whose ground truth has no labels are
/// skipped with a warning.
pub fn run_evaluate(manifest: &Manifest, pred_dir: &Path, gt_dir: &Path, cfg: &PipelineConfig) -> Result<EvaluationReport> {
    cfg.validate()?;
    let test = manifest.test_frames(cfg.benchmark.train_frac)?;
    if test.is_empty() {
        return Err(Error::EmptyInput("manifest has no test frames".into()));
    }
    let mut missing = Vec::new();
    for (seq, id) in &test {
        for (what, root) in [("prediction", pred_dir), ("ground truth", gt_dir)] {
            let p = frame_dir(root, seq, id).join(FLOW_FILE);
            if !p.is_file() {
                missing.push(format!("{seq}/{id}: {what} {}", p.display()));
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingFiles(missing));
    }

    let scored = run_parallel(cfg.run.workers, &test, |(seq, id)| {
        let gt = SparseFlowGT::from_flow_field(&read_flo(frame_dir(gt_dir, seq, id).join(FLOW_FILE))?)?;
        if gt.is_empty() {
            log::warn!("{seq}/{id}: ground truth has no labeled pixel, skipped");
            return Ok(None);
        }
        let pred = read_flo(frame_dir(pred_dir, seq, id).join(FLOW_FILE))?;
        let dataset = manifest
            .first_record(seq, id, |_| true)
            .map(|f| f.dataset().to_string())
            .expect("test frames come from the manifest");
        Ok(Some(FrameScore {
            dataset,
            sequence: seq.clone(),
            id: id.clone(),
            metrics: score(&pred, &gt)?,
        }))
    })?;
    let frames: Vec<FrameScore> = scored.into_iter().flatten().collect();
    if frames.is_empty() {
        return Err(Error::EmptyInput("no test frame has labeled ground truth".into()));
    }

    let mut order: Vec<&str> = Vec::new();
    let mut by_dataset: BTreeMap<&str, Vec<MetricReport>> = BTreeMap::new();
    for f in &frames {
        if !by_dataset.contains_key(f.dataset.as_str()) {
            order.push(&f.dataset);
        }
        by_dataset.entry(&f.dataset).or_default().push(f.metrics);
    }
    let datasets = order
        .iter()
        .map(|d| Ok((d.to_string(), MetricReport::aggregate(&by_dataset[d])?)))
        .collect::<Result<Vec<_>>>()?;
    let all: Vec<MetricReport> = frames.iter().map(|f| f.metrics).collect();
    let aggregate = MetricReport::aggregate(&all)?;
    Ok(EvaluationReport {
        frames,
        datasets,
        aggregate,
    })
}
