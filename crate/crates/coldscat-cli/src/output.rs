//! Deterministic output: fixed 12-significant-digit float formatting, CSV
//! with '#' metadata comments, two-column plot files, and a checksummed
//! manifest. Files are accumulated in memory and written together, so a
//! failed command leaves no partial outputs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

/// 12 significant digits, deterministic across runs.
pub fn fmt(x: f64) -> String {
    if x == 0.0 {
        return "0.00000000000e0".to_string();
    }
    format!("{x:.11e}")
}

pub struct OutputSet {
    dir: PathBuf,
    files: BTreeMap<String, String>,
}

impl OutputSet {
    pub fn new(dir: &Path) -> OutputSet {
        OutputSet {
            dir: dir.to_path_buf(),
            files: BTreeMap::new(),
        }
    }

    pub fn add(&mut self, name: &str, content: String) {
        self.files.insert(name.to_string(), content);
    }

    /// CSV body from a header row and rows of preformatted cells.
    pub fn add_csv(&mut self, name: &str, comments: &[String], header: &str, rows: &[Vec<String>]) {
        let mut s = String::new();
        for c in comments {
            s.push_str("# ");
            s.push_str(c);
            s.push('\n');
        }
        s.push_str(header);
        s.push('\n');
        for row in rows {
            s.push_str(&row.join(","));
            s.push('\n');
        }
        self.add(name, s);
    }

    /// Two-column whitespace plot file.
    pub fn add_plot(&mut self, name: &str, xy: &[(f64, f64)]) {
        let mut s = String::new();
        for &(x, y) in xy {
            s.push_str(&fmt(x));
            s.push(' ');
            s.push_str(&fmt(y));
            s.push('\n');
        }
        self.add(name, s);
    }

    /// Write everything plus a manifest with FNV-1a 64 checksums.
    pub fn write_all(&self) -> Result<()> {
        std::fs::create_dir_all(&self.dir)
            .with_context(|| format!("cannot create output directory {}", self.dir.display()))?;
        let mut manifest = String::new();
        for (name, content) in &self.files {
            let path = self.dir.join(name);
            std::fs::write(&path, content)
                .with_context(|| format!("cannot write {}", path.display()))?;
            manifest.push_str(&format!("{:016x}  {name}\n", fnv1a64(content.as_bytes())));
        }
        std::fs::write(self.dir.join("manifest.txt"), manifest)
            .with_context(|| format!("cannot write manifest in {}", self.dir.display()))?;
        Ok(())
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}
