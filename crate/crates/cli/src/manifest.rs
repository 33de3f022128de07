//! Line-delimited JSON manifests.
//!
//! One record per line:
//!
//! ```text
//! {"id": "cod_0001", "image": "img/0001.jpg", "gt": "gt/0001.png", "fms": ["a/0001.png", "b/0001.png"], "human_rank": [2, 1]}
//! ```
//!
//! `image` and `human_rank` are optional. Relative paths resolve against the
//! manifest's directory. Blank lines and lines starting with `#` are skipped.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    id: String,
    #[serde(default)]
    image: Option<PathBuf>,
    gt: PathBuf,
    fms: Vec<PathBuf>,
    #[serde(default)]
    human_rank: Option<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub id: String,
    pub image: Option<PathBuf>,
    pub gt: PathBuf,
    pub fms: Vec<PathBuf>,
    pub human_rank: Option<Vec<u32>>,
}

fn valid_permutation(ranks: &[u32]) -> bool {
    let mut seen = vec![false; ranks.len()];
    ranks.iter().all(|&r| match (r as usize).checked_sub(1).and_then(|i| seen.get_mut(i)) {
        Some(slot) => !std::mem::replace(slot, true),
        None => false,
    })
}

pub fn parse_manifest(text: &str, base: &Path, origin: &Path) -> Result<Vec<Record>> {
    let mut records = Vec::new();
    let mut ids = HashSet::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fail = |msg: String| CliError::Manifest { path: origin.to_path_buf(), line: n + 1, msg };
        let raw: RawRecord = serde_json::from_str(line).map_err(|e| fail(e.to_string()))?;
        if raw.fms.is_empty() {
            return Err(fail("record lists no foreground maps".into()));
        }
        if let Some(rank) = &raw.human_rank {
            if rank.len() != raw.fms.len() {
                return Err(fail(format!("human_rank has {} entries for {} maps", rank.len(), raw.fms.len())));
            }
            if !valid_permutation(rank) {
                return Err(fail("human_rank is not a permutation of 1..n".into()));
            }
        }
        if !ids.insert(raw.id.clone()) {
            return Err(fail(format!("duplicate id {:?}", raw.id)));
        }
        let resolve = |p: PathBuf| -> Result<PathBuf> {
            let full = if p.is_absolute() { p } else { base.join(p) };
            if !full.is_file() {
                return Err(fail(format!("no such file: {}", full.display())));
            }
            Ok(full)
        };
        records.push(Record {
            id: raw.id,
            image: raw.image.map(resolve).transpose()?,
            gt: resolve(raw.gt)?,
            fms: raw.fms.into_iter().map(resolve).collect::<Result<_>>()?,
            human_rank: raw.human_rank,
        });
    }
    Ok(records)
}

pub fn load_manifest(path: &Path) -> Result<Vec<Record>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_manifest(&text, base, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        for f in ["gt.png", "a.png", "b.png", "img.png"] {
            fs::write(dir.path().join(f), b"").unwrap();
        }
        dir
    }

    #[test]
    fn resolves_relative_paths() {
        let dir = setup();
        let text = "# corpus\n{\"id\":\"x\",\"gt\":\"gt.png\",\"fms\":[\"a.png\",\"b.png\"],\"image\":\"img.png\"}\n\n";
        let recs = parse_manifest(text, dir.path(), Path::new("m.jsonl")).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].gt, dir.path().join("gt.png"));
        assert_eq!(recs[0].fms.len(), 2);
        assert!(recs[0].human_rank.is_none());
    }

    #[test]
    fn rejects_bad_records() {
        let dir = setup();
        let cases = [
            "{\"id\":\"x\",\"gt\":\"gt.png\",\"fms\":[]}",
            "{\"id\":\"x\",\"gt\":\"missing.png\",\"fms\":[\"a.png\"]}",
            "{\"id\":\"x\",\"gt\":\"gt.png\",\"fms\":[\"a.png\",\"b.png\"],\"human_rank\":[1]}",
            "{\"id\":\"x\",\"gt\":\"gt.png\",\"fms\":[\"a.png\",\"b.png\"],\"human_rank\":[2,2]}",
            "{\"id\":\"x\",\"gt\":\"gt.png\",\"fms\":[\"a.png\"],\"colour\":1}",
            "{\"id\":\"x\",\"gt\":\"gt.png\",\"fms\":[\"a.png\"]}\n{\"id\":\"x\",\"gt\":\"gt.png\",\"fms\":[\"b.png\"]}",
        ];
        for text in cases {
            assert!(parse_manifest(text, dir.path(), Path::new("m")).is_err(), "{text}");
        }
    }
}
