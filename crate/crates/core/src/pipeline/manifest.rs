use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::benchmark::{split_count, split_sequence};
use crate::error::{Error, Result};
use crate::geometry::{CameraIntrinsics, RigidPose};
use crate::io::read_bytes;

/// Dataset name used when a record does not give one.
pub const DEFAULT_DATASET: &str = "default";

/// One image of one modality at one time step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameRecord {
    pub sequence: String,
    pub id: String,
    pub modality: String,
    pub image: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lidar: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intrinsics: Option<CameraIntrinsics>,
    /// LiDAR frame to this camera.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extrinsics: Option<RigidPose>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>,
}

impl FrameRecord {
    pub fn dataset(&self) -> &str {
        self.dataset.as_deref().unwrap_or(DEFAULT_DATASET)
    }

    /// `sequence/id`, the name frames are reported under.
    pub fn key(&self) -> String {
        format!("{}/{}", self.sequence, self.id)
    }

    fn paths(&self) -> impl Iterator<Item = &PathBuf> {
        std::iter::once(&self.image).chain(&self.depth).chain(&self.lidar)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestFile {
    #[serde(default)]
    frame: Vec<FrameRecord>,
}

/// Frames in file order with paths resolved against the manifest's directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub frames: Vec<FrameRecord>,
}

/// Names become output directories, so they must be single path components.
fn check_name(what: &str, s: &str) -> Result<()> {
    let bad = s.is_empty()
        || s == "."
        || s == ".."
        || s.contains(['/', '\\'])
        || s.chars().any(char::is_control);
    if bad {
        return Err(Error::InvalidInput(format!("{what} {s:?} is not usable as a file name")));
    }
    Ok(())
}

impl Manifest {
    /// Validates names and uniqueness of `(sequence, modality, id)`; does not
    /// touch the filesystem.
    pub fn from_records(frames: Vec<FrameRecord>) -> Result<Self> {
        let mut seen = HashSet::new();
        for f in &frames {
            check_name("sequence", &f.sequence)?;
            check_name("frame id", &f.id)?;
            check_name("modality", &f.modality)?;
            if let Some(k) = &f.intrinsics {
                k.validate()?;
            }
            if let Some(e) = &f.extrinsics {
                RigidPose::new(e.rotation, e.translation)?;
            }
            if !seen.insert((&f.sequence, &f.modality, &f.id)) {
                return Err(Error::InvalidInput(format!(
                    "frame {} appears twice for modality {}",
                    f.key(),
                    f.modality
                )));
            }
        }
        Ok(Self { frames })
    }

    /// Parses TOML text, resolving relative paths against `root`.
    pub fn parse(text: &str, root: &Path) -> Result<Self> {
        let file: ManifestFile = toml::from_str(text).map_err(|e| Error::Format(format!("manifest: {e}")))?;
        let mut frames = file.frame;
        for f in &mut frames {
            for p in [Some(&mut f.image), f.depth.as_mut(), f.lidar.as_mut()].into_iter().flatten() {
                if p.is_relative() {
                    *p = root.join(&*p);
                }
            }
        }
        Self::from_records(frames)
    }

    /// Loads a manifest and checks that every referenced file exists, listing
    /// all missing ones at once.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = read_bytes(path)?;
        let text = std::str::from_utf8(&bytes).map_err(|_| Error::Format(format!("{} is not UTF-8", path.display())))?;
        let root = path.parent().unwrap_or(Path::new(""));
        let m = Self::parse(text, root).map_err(|e| match e {
            Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
            e => e,
        })?;
        let missing: Vec<String> = m
            .frames
            .iter()
            .flat_map(|f| f.paths().filter(|p| !p.exists()).map(move |p| format!("{}: {}", f.key(), p.display())))
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingFiles(missing));
        }
        Ok(m)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(&ManifestFile { frame: self.frames.clone() })
            .map_err(|e| Error::InvalidInput(format!("manifest: {e}")))
    }

    /// Sequences in order of first appearance, each with its distinct frame ids
    /// in order of first appearance.
    pub fn sequences(&self) -> Vec<(String, Vec<String>)> {
        let mut order: Vec<(String, Vec<String>)> = Vec::new();
        let mut index: HashMap<&str, usize> = HashMap::new();
        let mut seen: HashSet<(&str, &str)> = HashSet::new();
        for f in &self.frames {
            let i = *index.entry(&f.sequence).or_insert_with(|| {
                order.push((f.sequence.clone(), Vec::new()));
                order.len() - 1
            });
            if seen.insert((&f.sequence, &f.id)) {
                order[i].1.push(f.id.clone());
            }
        }
        order
    }

    /// The first record of each `(sequence, id)` that satisfies `pred`.
    pub fn first_record(&self, sequence: &str, id: &str, pred: impl Fn(&FrameRecord) -> bool) -> Option<&FrameRecord> {
        self.frames.iter().find(|f| f.sequence == sequence && f.id == id && pred(f))
    }

    /// `(sequence, id)` of every test frame under the per-sequence split.
    pub fn test_frames(&self, train_frac: f64) -> Result<Vec<(String, String)>> {
        let mut out = Vec::new();
        for (seq, ids) in self.sequences() {
            let (_, test) = split_sequence(&ids, train_frac)?;
            out.extend(test.into_iter().map(|id| (seq.clone(), id)));
        }
        Ok(out)
    }

    pub fn split_report(&self, train_frac: f64) -> Result<SplitReport> {
        let seqs = self.sequences();
        if seqs.is_empty() {
            return Err(Error::EmptyInput("manifest has no frames".into()));
        }
        let mut rows = Vec::with_capacity(seqs.len());
        for (sequence, ids) in seqs {
            let n_train = split_count(ids.len(), train_frac)?;
            rows.push(SequenceSplit {
                sequence,
                n_frames: ids.len(),
                n_train,
                n_test: ids.len() - n_train,
            });
        }
        Ok(SplitReport { train_frac, sequences: rows })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceSplit {
    pub sequence: String,
    pub n_frames: usize,
    pub n_train: usize,
    pub n_test: usize,
}

/// Per-sequence train/test counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitReport {
    pub train_frac: f64,
    pub sequences: Vec<SequenceSplit>,
}

impl SplitReport {
    pub fn total_train(&self) -> usize {
        self.sequences.iter().map(|s| s.n_train).sum()
    }

    pub fn total_test(&self) -> usize {
        self.sequences.iter().map(|s| s.n_test).sum()
    }

    pub fn to_table(&self) -> String {
        let width = self.sequences.iter().map(|s| s.sequence.len()).max().unwrap_or(0).max(8);
        let mut t = format!("{:<width$}  {:>8}  {:>8}  {:>8}\n", "sequence", "frames", "train", "test");
        for s in &self.sequences {
            t += &format!("{:<width$}  {:>8}  {:>8}  {:>8}\n", s.sequence, s.n_frames, s.n_train, s.n_test);
        }
        t += &format!(
            "{:<width$}  {:>8}  {:>8}  {:>8}\n",
            "total",
            self.total_train() + self.total_test(),
            self.total_train(),
            self.total_test()
        );
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = r#"
[[frame]]
sequence = "s1"
id = "000"
modality = "rgb"
image = "rgb/000.png"
depth = "/abs/depth.pfm"
dataset = "MS2"
intrinsics = { fx = 100.0, fy = 100.0, cx = 3.5, cy = 2.5, width = 8, height = 6 }

[[frame]]
sequence = "s1"
id = "000"
modality = "thermal"
image = "t/000.png"

[[frame]]
sequence = "s1"
id = "001"
modality = "rgb"
image = "rgb/001.png"

[[frame]]
sequence = "s0"
id = "000"
modality = "rgb"
image = "x.png"
"#;

    #[test]
    fn parses_and_resolves() {
        let m = Manifest::parse(TEXT, Path::new("/data")).unwrap();
        assert_eq!(m.frames.len(), 4);
        assert_eq!(m.frames[0].image, PathBuf::from("/data/rgb/000.png"));
        assert_eq!(m.frames[0].depth, Some(PathBuf::from("/abs/depth.pfm")));
        assert_eq!(m.frames[0].dataset(), "MS2");
        assert_eq!(m.frames[1].dataset(), DEFAULT_DATASET);
        assert_eq!(
            m.sequences(),
            vec![("s1".into(), vec!["000".into(), "001".into()]), ("s0".into(), vec!["000".into()])]
        );
        let again = Manifest::parse(&m.to_toml_string().unwrap(), Path::new("/elsewhere")).unwrap();
        assert_eq!(again, m);
    }

    #[test]
    fn rejects_duplicates_and_bad_names() {
        let dup = format!("{TEXT}\n[[frame]]\nsequence = \"s1\"\nid = \"001\"\nmodality = \"rgb\"\nimage = \"y.png\"\n");
        assert!(matches!(Manifest::parse(&dup, Path::new("")), Err(Error::InvalidInput(_))));
        let bad = "[[frame]]\nsequence = \"../up\"\nid = \"0\"\nmodality = \"rgb\"\nimage = \"a.png\"\n";
        assert!(Manifest::parse(bad, Path::new("")).is_err());
        assert!(matches!(Manifest::parse("[[frame]]\nid = 3\n", Path::new("")), Err(Error::Format(_))));
    }

    #[test]
    fn load_lists_every_missing_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.toml");
        std::fs::write(&p, TEXT).unwrap();
        match Manifest::load(&p) {
            Err(Error::MissingFiles(list)) => assert_eq!(list.len(), 5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn split_per_sequence() {
        let m = Manifest::parse(TEXT, Path::new("")).unwrap();
        let r = m.split_report(0.8).unwrap();
        assert_eq!((r.total_train(), r.total_test()), (1, 2));
        assert_eq!(
            m.test_frames(0.8).unwrap(),
            vec![("s1".to_string(), "001".to_string()), ("s0".to_string(), "000".to_string())]
        );
        assert!(r.to_table().contains("total"));
    }
}
