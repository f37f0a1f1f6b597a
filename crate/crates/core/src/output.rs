//! Artifact files. Every file carries the config hash: text files in a
//! leading `#` comment, JSON files in a `config_hash` field.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST: &str = "manifest.txt";

#[derive(Debug)]
pub struct Artifacts {
    dir: PathBuf,
    hash: String,
    seed: u64,
    written: Vec<(String, String)>,
}

impl Artifacts {
    pub fn create(dir: &Path, hash: &str, seed: u64) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            hash: hash.to_string(),
            seed,
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        let digest: String = Sha256::digest(bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        self.written.push((name.to_string(), digest));
        Ok(())
    }

    /// A text or CSV file behind a `# config_hash=... seed=...` line.
    pub fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let content = format!("# config_hash={} seed={}\n{body}", self.hash, self.seed);
        self.write(name, content.as_bytes())
    }

    /// A JSON object with `config_hash` and `seed` added.
    pub fn json(&mut self, name: &str, mut value: Value) -> Result<()> {
        if let Value::Object(map) = &mut value {
            map.insert("config_hash".into(), json!(self.hash));
            map.insert("seed".into(), json!(self.seed));
        }
        let mut text = serde_json::to_string_pretty(&value).expect("JSON values serialise");
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// Plain-text manifest: hash, seed, command, versions, wall time and the
    /// digest of every file written. The only artifact that varies between
    /// identical runs, through the wall time.
    pub fn manifest(&mut self, command: &str, threads: usize, wall: Duration) -> Result<()> {
        let mut out = String::new();
        let _ = writeln!(out, "# config_hash={} seed={}", self.hash, self.seed);
        let _ = writeln!(out, "command {command}");
        let _ = writeln!(
            out,
            "version {} {}",
            env!("CARGO_PKG_NAME"),
            env!("CARGO_PKG_VERSION")
        );
        let _ = writeln!(out, "threads {threads}");
        let _ = writeln!(out, "wall_time_s {:.3}", wall.as_secs_f64());
        for (name, digest) in &self.written {
            let _ = writeln!(out, "file {name} sha256={digest}");
        }
        let path = self.dir.join(MANIFEST);
        std::fs::write(&path, out).map_err(|e| Error::io(&path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_file_names_the_hash() {
        let dir = tempfile::tempdir().unwrap();
        let mut a = Artifacts::create(dir.path(), "abc", 7).unwrap();
        a.text("x.csv", "r,v\n0,1\n").unwrap();
        a.json("s.json", json!({"k": 1})).unwrap();
        a.manifest("test", 1, Duration::from_millis(5)).unwrap();
        let csv = std::fs::read_to_string(dir.path().join("x.csv")).unwrap();
        assert!(csv.starts_with("# config_hash=abc seed=7\n"));
        let s: Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("s.json")).unwrap())
                .unwrap();
        assert_eq!(s["config_hash"], "abc");
        let m = std::fs::read_to_string(dir.path().join(MANIFEST)).unwrap();
        assert!(m.contains("file x.csv sha256=") && m.contains("file s.json sha256="));
    }
}
