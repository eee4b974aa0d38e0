//! Building a manifest of images from a directory.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

/// Class names of the 1000-image benchmark corpus, indexed by `n / 100`
/// where `n` is the numeric file stem.
pub const WANG_CLASSES: [&str; 10] = [
    "African People and villages",
    "Beaches",
    "Buildings",
    "Buses",
    "Dinosaurs",
    "Elephants",
    "Flowers",
    "Horses",
    "Mountains and glaciers",
    "Food",
];

const IMAGE_EXTENSIONS: [&str; 5] = ["ppm", "png", "jpg", "jpeg", "pnm"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Labeling {
    /// `root/<class>/<file>`: the parent directory names the class.
    Subdirs,
    /// `root/<n>.<ext>` with `0 <= n <= 999`: class `WANG_CLASSES[n / 100]`.
    WangNumeric,
    /// `root/<file>`, no labels.
    Unlabeled,
}

impl Labeling {
    pub fn as_str(self) -> &'static str {
        match self {
            Labeling::Subdirs => "subdirs",
            Labeling::WangNumeric => "wang_numeric",
            Labeling::Unlabeled => "none",
        }
    }
}

impl fmt::Display for Labeling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Labeling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "subdirs" => Ok(Labeling::Subdirs),
            "wang_numeric" => Ok(Labeling::WangNumeric),
            "none" => Ok(Labeling::Unlabeled),
            other => Err(Error::Input(format!(
                "unknown labeling {other:?} (expected subdirs, wang_numeric or none)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub image_id: String,
    pub path: PathBuf,
    pub label: Option<String>,
}

/// Images to process, sorted by `image_id` (unique).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_labeled(&self) -> bool {
        self.entries.iter().all(|e| e.label.is_some())
    }
}

/// Class index for a benchmark-corpus file name such as `432.jpg`.
pub fn wang_class(file_name: &str) -> Option<&'static str> {
    let stem = file_name.split_once('.').map_or(file_name, |(s, _)| s);
    if stem.is_empty() || !stem.bytes().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let n: usize = stem.parse().ok()?;
    WANG_CLASSES.get(n / 100).copied().filter(|_| n <= 999)
}

fn is_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

fn is_hidden(name: &str) -> bool {
    name.starts_with('.')
}

/// Sorted (name, path) pairs of the image files directly inside `dir`.
fn image_files(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        let Some(name) = entry.file_name().to_str().map(str::to_owned) else {
            return Err(Error::Ingest(format!(
                "non UTF-8 file name in {}",
                dir.display()
            )));
        };
        if is_hidden(&name) || !path.is_file() || !is_image(&path) {
            continue;
        }
        out.push((name, path));
    }
    out.sort();
    Ok(out)
}

/// Scan `root` and label every image according to `labeling`.
pub fn ingest(root: impl AsRef<Path>, labeling: Labeling) -> Result<DatasetManifest> {
    let root = root.as_ref();
    if !root.is_dir() {
        return Err(Error::Ingest(format!(
            "{} is not a readable directory",
            root.display()
        )));
    }
    let mut entries = Vec::new();
    match labeling {
        Labeling::Subdirs => {
            let mut dirs = Vec::new();
            for entry in std::fs::read_dir(root).map_err(|e| Error::io(root, e))? {
                let entry = entry.map_err(|e| Error::io(root, e))?;
                let name = entry.file_name().to_string_lossy().into_owned();
                if entry.path().is_dir() && !is_hidden(&name) {
                    dirs.push((name, entry.path()));
                }
            }
            dirs.sort();
            for (class, dir) in dirs {
                for (name, path) in image_files(&dir)? {
                    entries.push(ManifestEntry {
                        image_id: format!("{class}/{name}"),
                        path,
                        label: Some(class.clone()),
                    });
                }
            }
        }
        Labeling::WangNumeric => {
            let mut offenders = Vec::new();
            for (name, path) in image_files(root)? {
                match wang_class(&name) {
                    Some(class) => entries.push(ManifestEntry {
                        image_id: name,
                        path,
                        label: Some(class.to_owned()),
                    }),
                    None => offenders.push(name),
                }
            }
            if !offenders.is_empty() {
                return Err(Error::Ingest(format!(
                    "file names are not <0-999>.<ext>: {}",
                    offenders.join(", ")
                )));
            }
        }
        Labeling::Unlabeled => {
            for (name, path) in image_files(root)? {
                entries.push(ManifestEntry {
                    image_id: name,
                    path,
                    label: None,
                });
            }
        }
    }
    if entries.is_empty() {
        return Err(Error::Ingest(format!(
            "no images found under {}",
            root.display()
        )));
    }
    entries.sort_by(|a, b| a.image_id.cmp(&b.image_id));
    Ok(DatasetManifest { entries })
}
