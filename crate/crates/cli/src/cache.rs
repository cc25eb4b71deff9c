//! On-disk cache of BCH monomial product tables.
//!
//! The key hashes the structure constants and the degree bound only, so
//! relabelled or renamed copies of an algebra share a file. A file is used
//! only if its format tag, key, checksum and a few recomputed entries all
//! agree; anything else is discarded and the table is rebuilt.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use lie_star::lie::LieAlgebra;
use lie_star::poly::Multi;
use lie_star::scalar::{fmt_rational, GaussianRational};
use lie_star::star::{Bch, StarProduct};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

const FORMAT: u32 = 1;
const SPOT_CHECKS: usize = 4;

type Entry = (Vec<u32>, Vec<u32>, Vec<(Vec<u32>, u32, GaussianRational)>);

#[derive(Serialize, Deserialize)]
struct CacheFile {
    format: u32,
    key: String,
    dim: usize,
    checksum: String,
    entries: Vec<Entry>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LoadOutcome {
    Loaded(usize),
    Missing,
    /// The file existed but was rejected; it has been ignored.
    Rejected(String),
}

#[derive(Clone, Debug)]
pub struct Cache {
    dir: PathBuf,
}

/// SHA-256 over the canonical table "dim;i,j,k=c;..." (0-based, i < j,
/// nonzero entries in index order) and the degree bound.
pub fn key(alg: &LieAlgebra, degree: u32) -> String {
    let n = alg.dim();
    let mut canon = format!("dim={n};");
    for i in 0..n {
        for j in i + 1..n {
            let mut row: Vec<_> = alg.bracket_of(i, j).to_vec();
            row.sort_by_key(|(k, _)| *k);
            for (k, c) in row {
                canon.push_str(&format!("{i},{j},{k}={};", fmt_rational(&c)));
            }
        }
    }
    canon.push_str(&format!("degree={degree}"));
    hex::encode(Sha256::digest(canon.as_bytes()))
}

fn checksum(entries: &[Entry]) -> String {
    hex::encode(Sha256::digest(serde_json::to_vec(entries).expect("entries serialize")))
}

fn multi(v: &[u32]) -> Option<Multi> {
    if v.len() > lie_star::poly::MAX_VARS || v.iter().any(|&e| e > u8::MAX as u32) {
        return None;
    }
    Some(Multi::from_slice(v))
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }
    pub fn dir(&self) -> &Path {
        &self.dir
    }
    pub fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("bch-{key}.json"))
    }

    /// Preloads `bch` from disk when a trustworthy file exists.
    pub fn load(&self, bch: &Bch, degree: u32) -> LoadOutcome {
        let alg = bch.algebra();
        let key = key(alg, degree);
        let path = self.path(&key);
        let text = match fs::read(&path) {
            Ok(t) => t,
            Err(_) => return LoadOutcome::Missing,
        };
        match self.parse(&text, alg, &key) {
            Ok(entries) => {
                let n = entries.len();
                bch.preload(entries);
                LoadOutcome::Loaded(n)
            }
            Err(why) => LoadOutcome::Rejected(why),
        }
    }

    #[allow(clippy::type_complexity)]
    fn parse(
        &self,
        bytes: &[u8],
        alg: &LieAlgebra,
        key: &str,
    ) -> Result<Vec<((Multi, Multi), Vec<(Multi, u32, GaussianRational)>)>, String> {
        let file: CacheFile = serde_json::from_slice(bytes).map_err(|e| format!("unreadable: {e}"))?;
        if file.format != FORMAT {
            return Err(format!("format {} is not {FORMAT}", file.format));
        }
        if file.key != key || file.dim != alg.dim() {
            return Err("key mismatch".into());
        }
        if checksum(&file.entries) != file.checksum {
            return Err("checksum mismatch".into());
        }
        let mut out = Vec::with_capacity(file.entries.len());
        for (a, b, prod) in &file.entries {
            let (a, b) = (multi(a).ok_or("bad exponent")?, multi(b).ok_or("bad exponent")?);
            let mut p = Vec::with_capacity(prod.len());
            for (g, k, c) in prod {
                p.push((multi(g).ok_or("bad exponent")?, *k, c.clone()));
            }
            out.push(((a, b), p));
        }
        // Recompute a spread of entries from scratch.
        let fresh = Bch::new(std::sync::Arc::new(alg.clone()));
        let step = (out.len() / SPOT_CHECKS).max(1);
        for ((a, b), p) in out.iter().step_by(step).take(SPOT_CHECKS) {
            if fresh.monomial_product(a, b).as_slice() != p.as_slice() {
                return Err(format!("entry {a:?}·{b:?} does not recompute"));
            }
        }
        Ok(out)
    }

    /// Writes the current table of `bch` atomically.
    pub fn store(&self, bch: &Bch, degree: u32) -> std::io::Result<PathBuf> {
        let alg = bch.algebra();
        let n = alg.dim();
        let key = key(alg, degree);
        let entries: Vec<Entry> = bch
            .table()
            .into_iter()
            .map(|((a, b), p)| (a.to_vec(n), b.to_vec(n), p.iter().map(|(g, k, c)| (g.to_vec(n), *k, c.clone())).collect()))
            .collect();
        let file = CacheFile { format: FORMAT, key: key.clone(), dim: n, checksum: checksum(&entries), entries };
        fs::create_dir_all(&self.dir)?;
        let path = self.path(&key);
        let tmp = self.dir.join(format!(".bch-{key}.{}.tmp", std::process::id()));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(&serde_json::to_vec(&file).expect("cache serializes"))?;
            f.sync_all()?;
        }
        fs::rename(&tmp, &path)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::StarSelector;
    use crate::{run_suite, SuiteConfig};
    use lie_star::lie::{catalog, RawTable};
    use lie_star::scalar::int;
    use serde_json::Value;
    use std::sync::Arc;


    #[test]
    fn key_ignores_names() {
        let a = catalog("heisenberg3").unwrap();
        let mut raw = RawTable::new("other", 3);
        raw.bracket(0, 1, 2, int(1));
        let b = LieAlgebra::from_raw(&raw).unwrap();
        assert_eq!(key(&a, 4), key(&b, 4));
        assert_ne!(key(&a, 4), key(&a, 5));
        assert_ne!(key(&a, 4), key(&catalog("su2").unwrap(), 4));
    }

    fn cfg(dir: &std::path::Path) -> SuiteConfig {
        let mut c = SuiteConfig::new("su2", StarSelector::Bch).with_identities(&["assoc", "hermitian"]).with_degree(3);
        c.cache_dir = Some(dir.to_path_buf());
        c
    }

    type Entry = (Vec<u32>, Vec<u32>, Vec<(Vec<u32>, u32, lie_star::scalar::GaussianRational)>);

    // Recomputes the checksum over the typed entries, whose field order differs from `Value`'s.
    fn reseal(v: &mut Value) {
        let entries: Vec<Entry> = serde_json::from_value(v["entries"].clone()).unwrap();
        let sum = hex::encode(Sha256::digest(serde_json::to_vec(&entries).unwrap()));
        v["checksum"] = Value::String(sum);
    }

    #[test]
    fn warm_cache_gives_the_same_report() {
        let dir = tempfile::tempdir().unwrap();
        let cold = run_suite(&cfg(dir.path())).unwrap();
        assert!(cold.passed);
        let files: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(files.len(), 1);
        let warm = run_suite(&cfg(dir.path())).unwrap();
        assert_eq!(cold.to_json(), warm.to_json());
    }

    #[test]
    fn corrupted_files_are_rejected_and_rebuilt() {
        let dir = tempfile::tempdir().unwrap();
        let reference = run_suite(&cfg(dir.path())).unwrap();
        let alg = catalog("su2").unwrap();
        let cache = Cache::new(dir.path());
        let path = cache.path(&key(&alg, 3));

        // Truncation.
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
        let bch = Bch::new(Arc::new(alg.clone()));
        assert!(matches!(cache.load(&bch, 3), LoadOutcome::Rejected(_)));
        assert_eq!(run_suite(&cfg(dir.path())).unwrap().to_json(), reference.to_json());

        // A flipped coefficient without resealing fails the checksum.
        let mut v: Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
        v["entries"][0][2][0][2] = serde_json::to_value(lie_star::scalar::GaussianRational::from(lie_star::scalar::int(7))).unwrap();
        std::fs::write(&path, serde_json::to_vec(&v).unwrap()).unwrap();
        match cache.load(&Bch::new(Arc::new(alg.clone())), 3) {
            LoadOutcome::Rejected(why) => assert!(why.contains("checksum"), "{why}"),
            other => panic!("{other:?}"),
        }

        // Resealed tampering is caught by recomputation.
        reseal(&mut v);
        std::fs::write(&path, serde_json::to_vec(&v).unwrap()).unwrap();
        match cache.load(&Bch::new(Arc::new(alg.clone())), 3) {
            LoadOutcome::Rejected(why) => assert!(why.contains("recompute"), "{why}"),
            other => panic!("{other:?}"),
        }
        assert_eq!(run_suite(&cfg(dir.path())).unwrap().to_json(), reference.to_json());

        // The rebuilt file loads again.
        let fresh = Bch::new(Arc::new(alg.clone()));
        assert!(matches!(cache.load(&fresh, 3), LoadOutcome::Loaded(n) if n > 0));
        let x = Multi::from_slice(&[1, 0, 0]);
        assert_eq!(fresh.monomial_product(&x, &x), Bch::new(Arc::new(alg)).monomial_product(&x, &x));
    }

    #[test]
    fn renamed_algebras_share_a_file() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("h.toml");
        std::fs::write(&file, "name = \"renamed\"\ndim = 3\nbasis = [\"a\", \"b\", \"c\"]\n\n[[brackets]]\ni = 1\nj = 2\nk = 3\nvalue = \"1\"\n").unwrap();
        let cache_dir = dir.path().join("cache");
        let mut a = SuiteConfig::new("heisenberg3", StarSelector::Bch).with_identities(&["assoc"]).with_degree(3);
        a.cache_dir = Some(cache_dir.clone());
        let mut b = SuiteConfig::new(file.to_str().unwrap(), StarSelector::Bch).with_identities(&["assoc"]).with_degree(3);
        b.cache_dir = Some(cache_dir.clone());
        assert!(run_suite(&a).unwrap().passed);
        assert!(run_suite(&b).unwrap().passed);
        assert_eq!(std::fs::read_dir(&cache_dir).unwrap().count(), 1);
    }
}
