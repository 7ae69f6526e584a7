use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::boxes::BoxCorner;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("cannot read manifest {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest does not start with a {{\"classes\": ...}} header line")]
    MissingClassHeader,
    #[error("line {line}: unknown class name {name:?}")]
    UnknownClassName { line: usize, name: String },
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestSample {
    /// Resolved against the manifest's directory.
    pub image_path: PathBuf,
    pub boxes: Vec<BoxCorner>,
    pub class_names: Vec<String>,
    pub labels: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    /// Class name to id. Ids are dense from 1; 0 is background.
    pub class_map: BTreeMap<String, u32>,
    pub samples: Vec<ManifestSample>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    classes: BTreeMap<String, u32>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleLine {
    image_path: String,
    #[serde(default)]
    boxes: Vec<BoxLine>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BoxLine {
    class_name: String,
    coordinates: [f64; 4],
}

impl DatasetManifest {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Class names indexed by id, with "background" at 0.
    pub fn class_names(&self) -> Vec<String> {
        let mut names = vec!["background".to_string(); self.class_map.len() + 1];
        for (name, &id) in &self.class_map {
            names[id as usize] = name.clone();
        }
        names
    }

    /// Parses manifest text. Relative image paths are joined onto `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, ManifestError> {
        let mut lines = text
            .split('\n')
            .enumerate()
            .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
            .filter(|(_, l)| !l.trim().is_empty());

        let (_, first) = lines.next().ok_or(ManifestError::MissingClassHeader)?;
        let header: Header = serde_json::from_str(first).map_err(|_| ManifestError::MissingClassHeader)?;
        let mut ids: Vec<u32> = header.classes.values().copied().collect();
        ids.sort_unstable();
        if ids.iter().enumerate().any(|(i, &id)| id as usize != i + 1) {
            return Err(ManifestError::MalformedLine {
                line: 1,
                reason: format!("class ids must be dense from 1, got {ids:?}"),
            });
        }

        let mut samples = Vec::new();
        for (line, text) in lines {
            let malformed = |reason: String| ManifestError::MalformedLine { line, reason };
            let s: SampleLine = serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
            let mut sample = ManifestSample {
                image_path: base_dir.join(&s.image_path),
                boxes: Vec::with_capacity(s.boxes.len()),
                class_names: Vec::with_capacity(s.boxes.len()),
                labels: Vec::with_capacity(s.boxes.len()),
            };
            for b in s.boxes {
                let label = *header
                    .classes
                    .get(&b.class_name)
                    .ok_or_else(|| ManifestError::UnknownClassName {
                        line,
                        name: b.class_name.clone(),
                    })?;
                let [x0, y0, x1, y1] = b.coordinates;
                if !b.coordinates.iter().all(|v| (0.0..=1.0).contains(v)) {
                    return Err(malformed(format!("box {:?} is not normalized", b.coordinates)));
                }
                let corner = BoxCorner::new(x0, y0, x1, y1).map_err(|e| malformed(e.to_string()))?;
                sample.boxes.push(corner);
                sample.class_names.push(b.class_name);
                sample.labels.push(label);
            }
            samples.push(sample);
        }
        Ok(Self {
            class_map: header.classes,
            samples,
        })
    }
}

pub fn load_manifest(path: &Path) -> Result<DatasetManifest, ManifestError> {
    let text = std::fs::read_to_string(path).map_err(|source| ManifestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    DatasetManifest::parse(&text, base)
}
