//! Per-level Hecke matrix cache.
//!
//! Building a modular symbol space is cheap next to computing its Hecke
//! operators, so only the memoized relative Hecke matrices are persisted,
//! one JSON file per (p, model, H). The header pins a hash of the level
//! presentation; a stale or corrupt file is silently ignored and everything
//! is recomputed, never trusted.

use crate::criterion::Level;
use crate::exactalg::{fnv1a, is_prime, Int, ZMat};
use crate::modsym::RelMat;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

const FORMAT: &str = "level-cache/1";

#[derive(Serialize, Deserialize)]
struct CacheFile {
    format: String,
    p: u64,
    model: String,
    h_gens: Vec<u64>,
    basis_hash: u64,
    entries: Vec<CacheEntry>,
}

/// One relative Hecke matrix; integers as decimal strings.
#[derive(Serialize, Deserialize)]
struct CacheEntry {
    n: u64,
    den: String,
    rows: usize,
    cols: usize,
    num: Vec<String>,
}

fn model_tag(level: &Level) -> (String, Vec<u64>) {
    match level {
        Level::X0(_) => ("x0".into(), Vec::new()),
        Level::H(s) => {
            let mut gens = s.h_gens().to_vec();
            gens.sort_unstable();
            ("xh".into(), gens)
        }
    }
}

/// Hash of the presentation the cached matrices are expressed in: the symbol
/// basis, the scalar group and the common denominator together determine
/// every coordinate choice downstream.
fn basis_hash(level: &Level) -> u64 {
    let eng = match level {
        Level::X0(s) => s.engine(),
        Level::H(s) => s.engine(),
    };
    let mut bytes = Vec::new();
    bytes.extend_from_slice(&eng.p.to_le_bytes());
    for &s in &eng.scalars {
        bytes.extend_from_slice(&s.to_le_bytes());
    }
    for &i in &eng.basis_syms {
        bytes.extend_from_slice(&(i as u64).to_le_bytes());
    }
    bytes.extend_from_slice(eng.gen_den.to_string().as_bytes());
    bytes.extend_from_slice(&(eng.genus as u64).to_le_bytes());
    fnv1a(&bytes)
}

pub fn cache_path(dir: &Path, level: &Level) -> PathBuf {
    let (tag, gens) = model_tag(level);
    let name = if gens.is_empty() {
        format!("level-p{}-{tag}.json", level.p())
    } else {
        let joined: Vec<String> = gens.iter().map(|g| g.to_string()).collect();
        format!("level-p{}-{tag}-{}.json", level.p(), joined.join("_"))
    };
    dir.join(name)
}

fn encode(n: u64, m: &RelMat) -> CacheEntry {
    CacheEntry {
        n,
        den: m.den.to_string(),
        rows: m.num.rows,
        cols: m.num.cols,
        num: m
            .num
            .rows_iter()
            .flat_map(|r| r.iter().map(|x| x.to_string()))
            .collect(),
    }
}

fn decode(e: &CacheEntry, dim: usize) -> Option<(u64, RelMat)> {
    if e.rows != dim || e.cols != dim || e.num.len() != dim * dim {
        return None;
    }
    let den: Int = e.den.parse().ok()?;
    if den <= Int::from(0) {
        return None;
    }
    let mut rows = Vec::with_capacity(dim);
    for chunk in e.num.chunks(dim) {
        let row: Option<Vec<Int>> = chunk.iter().map(|s| s.parse().ok()).collect();
        rows.push(row?);
    }
    Some((e.n, RelMat::new(ZMat::from_rows(rows), den)))
}

/// Preloads cached Hecke matrices into the level's memo table. Returns the
/// number of matrices accepted; any header mismatch, parse failure or failed
/// integrity check discards the whole file.
pub fn load(level: &Level, dir: &Path) -> usize {
    let Ok(text) = std::fs::read_to_string(cache_path(dir, level)) else {
        return 0;
    };
    let Ok(file) = serde_json::from_str::<CacheFile>(&text) else {
        return 0;
    };
    let (tag, gens) = model_tag(level);
    if file.format != FORMAT
        || file.p != level.p()
        || file.model != tag
        || file.h_gens != gens
        || file.basis_hash != basis_hash(level)
    {
        return 0;
    }
    let eng = match level {
        Level::X0(s) => s.engine(),
        Level::H(s) => s.engine(),
    };
    let dim = eng.dim();
    let mut entries = Vec::with_capacity(file.entries.len());
    for e in &file.entries {
        match decode(e, dim) {
            Some(pair) => entries.push(pair),
            None => return 0,
        }
    }
    // Integrity spot check: recompute the smallest cached prime index
    // directly and require exact agreement before trusting any of it.
    if let Some((n, m)) = entries
        .iter()
        .filter(|(n, _)| is_prime(*n) && *n != level.p())
        .min_by_key(|(n, _)| *n)
    {
        if eng.hecke_relative_direct(*n) != *m {
            return 0;
        }
    }
    let count = entries.len();
    eng.hecke_preload(entries);
    count
}

/// Writes the level's current Hecke memo table to the cache directory,
/// replacing any existing file (write-to-temp, then rename).
pub fn store(level: &Level, dir: &Path) -> std::io::Result<()> {
    let eng = match level {
        Level::X0(s) => s.engine(),
        Level::H(s) => s.engine(),
    };
    let (model, h_gens) = model_tag(level);
    let file = CacheFile {
        format: FORMAT.into(),
        p: level.p(),
        model,
        h_gens,
        basis_hash: basis_hash(level),
        entries: eng
            .hecke_snapshot()
            .iter()
            .map(|(n, m)| encode(*n, m))
            .collect(),
    };
    std::fs::create_dir_all(dir)?;
    let path = cache_path(dir, level);
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    std::fs::write(&tmp, serde_json::to_string(&file).unwrap())?;
    std::fs::rename(&tmp, &path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criterion::Model;

    fn tmpdir(name: &str) -> PathBuf {
        let d = std::env::temp_dir().join(format!("torsionbound-cache-{name}-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&d);
        std::fs::create_dir_all(&d).unwrap();
        d
    }

    #[test]
    fn round_trip() {
        let dir = tmpdir("roundtrip");
        let lv = Level::build(23, &Model::X0).unwrap();
        lv.hecke(2).unwrap();
        lv.hecke(3).unwrap();
        lv.hecke(6).unwrap();
        store(&lv, &dir).unwrap();

        let fresh = Level::build(23, &Model::X0).unwrap();
        let n = load(&fresh, &dir);
        assert!(n >= 3, "loaded {n}");
        for i in [2u64, 3, 6] {
            assert_eq!(lv.hecke(i).unwrap(), fresh.hecke(i).unwrap());
        }

        // The H-model cache lives under a different key.
        let lh = Level::build(23, &Model::XH { h_gens: vec![] }).unwrap();
        assert_eq!(load(&lh, &dir), 0);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn corrupt_or_stale_is_ignored() {
        let dir = tmpdir("corrupt");
        let lv = Level::build(11, &Model::X0).unwrap();
        lv.hecke(2).unwrap();
        store(&lv, &dir).unwrap();
        let path = cache_path(&dir, &lv);

        // Flip one matrix entry: the integrity check must reject the file.
        let text = std::fs::read_to_string(&path).unwrap();
        let mut file: CacheFile = serde_json::from_str(&text).unwrap();
        file.entries[0].num[0] = format!("{}1", file.entries[0].num[0]);
        std::fs::write(&path, serde_json::to_string(&file).unwrap()).unwrap();
        assert_eq!(load(&Level::build(11, &Model::X0).unwrap(), &dir), 0);

        // Wrong header hash likewise.
        let mut file: CacheFile = serde_json::from_str(&text).unwrap();
        file.basis_hash ^= 1;
        std::fs::write(&path, serde_json::to_string(&file).unwrap()).unwrap();
        assert_eq!(load(&Level::build(11, &Model::X0).unwrap(), &dir), 0);

        // Truncated JSON likewise.
        std::fs::write(&path, &text[..text.len() / 2]).unwrap();
        assert_eq!(load(&Level::build(11, &Model::X0).unwrap(), &dir), 0);

        // And the pristine file is accepted.
        std::fs::write(&path, &text).unwrap();
        assert!(load(&Level::build(11, &Model::X0).unwrap(), &dir) >= 1);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
