//! Corpus layout: `<dir>/<name>.nlm` with a sibling `<name>.ann.json`.

use std::fs;
use std::path::{Path, PathBuf};

use exactlin_core::{Model, PatternKind};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::load_model;

/// Ground truth for one instance: the pattern kinds it contains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceAnnotation {
    pub expected_kinds: Vec<PatternKind>,
    pub source: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct AnnotationFile {
    expected_kinds: Vec<String>,
    source: String,
}

impl InstanceAnnotation {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: AnnotationFile =
            serde_json::from_str(text).map_err(|e| Error::Invalid(format!("annotation: {e}")))?;
        let expected_kinds = raw
            .expected_kinds
            .iter()
            .map(|k| PatternKind::from_name(k).ok_or_else(|| Error::Invalid(format!("unknown kind `{k}`"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(InstanceAnnotation { expected_kinds, source: raw.source })
    }

    pub fn to_json(&self) -> String {
        let raw = AnnotationFile {
            expected_kinds: self.expected_kinds.iter().map(|k| k.name().to_string()).collect(),
            source: self.source.clone(),
        };
        crate::report::to_json(&raw)
    }
}

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub id: String,
    pub path: PathBuf,
    pub model: Model,
    pub annotation: InstanceAnnotation,
}

/// Loads every `.nlm` file in `dir`, sorted by name.
pub fn load_corpus(dir: &Path) -> Result<Vec<CorpusEntry>> {
    let listing = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths: Vec<PathBuf> = listing
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "nlm"))
        .collect();
    paths.sort();
    let mut out = Vec::with_capacity(paths.len());
    for path in paths {
        let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let model = load_model(&text)
            .map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?
            .model;
        let ann_path = path.with_extension("ann.json");
        let ann_text = fs::read_to_string(&ann_path).map_err(|e| Error::io(&ann_path, e))?;
        let annotation = InstanceAnnotation::from_json(&ann_text)?;
        out.push(CorpusEntry { id, path, model, annotation });
    }
    if out.is_empty() {
        return Err(Error::Invalid(format!("no .nlm files in {}", dir.display())));
    }
    Ok(out)
}
