use anyhow::{Context, Result};
use std::fs;
use std::path::{Path, PathBuf};

/// Output directory of one command run.
#[derive(Clone, Debug)]
pub struct OutDir {
    dir: PathBuf,
}

impl OutDir {
    pub fn create(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(OutDir { dir })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn csv(&self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<PathBuf> {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(&r)?;
        }
        w.flush()?;
        Ok(path)
    }

    pub fn text(&self, name: &str, content: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, content).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

/// Fixed scientific notation, so reruns produce byte-identical files.
pub fn num(x: f64) -> String {
    format!("{x:.10e}")
}
