//! Output directory bookkeeping, the run manifest and gnuplot scripts.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Files written by one run, in emission order.
pub struct OutputDir {
    root: PathBuf,
    files: Vec<FileEntry>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root).with_context(|| format!("creating output directory {}", root.display()))?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn files(&self) -> &[FileEntry] {
        &self.files
    }

    pub fn write(&mut self, name: &str, contents: &[u8]) -> Result<()> {
        let path = self.root.join(name);
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(FileEntry {
            name: name.to_string(),
            bytes: contents.len() as u64,
            sha256: hex::encode(Sha256::digest(contents)),
        });
        log::info!("wrote {}", path.display());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_vec_pretty(value)?;
        text.push(b'\n');
        self.write(name, &text)
    }

    /// Writes the manifest; it lists every file emitted before it.
    pub fn finish(self, manifest: &Manifest) -> Result<()> {
        let path = self.root.join("manifest.json");
        let mut text = serde_json::to_vec_pretty(manifest)?;
        text.push(b'\n');
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }
}

/// Per-row status counts of a run.
#[derive(Debug, Clone, Default, Serialize)]
pub struct StatusSummary {
    pub points: usize,
    pub ok: usize,
    pub degenerate: usize,
    pub unconverged: usize,
    pub unattainable: usize,
    pub failed: usize,
}

impl StatusSummary {
    pub fn add(&mut self, status: &qedft_maps::maps::PointStatus) {
        use qedft_maps::maps::PointStatus as S;
        self.points += 1;
        match status {
            S::Ok => self.ok += 1,
            S::Degenerate => self.degenerate += 1,
            S::Unconverged => self.unconverged += 1,
            S::Unattainable => self.unattainable += 1,
            S::Failed(_) => self.failed += 1,
        }
    }

    pub fn of<'a>(statuses: impl IntoIterator<Item = &'a qedft_maps::maps::PointStatus>) -> Self {
        let mut s = Self::default();
        for st in statuses {
            s.add(st);
        }
        s
    }

    /// Rows without values.
    pub fn incomplete(&self) -> usize {
        self.unconverged + self.unattainable + self.failed
    }
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: serde_json::Value,
    /// Keys set through the environment, as `key = value`.
    pub env_overrides: Vec<String>,
    pub workers: usize,
    pub started: String,
    pub finished: String,
    pub exit_code: i32,
    pub status: StatusSummary,
    pub files: Vec<FileEntry>,
}

/// Heatmap of one column of a CSV over two others.
pub fn heatmap_script(csv: &str, (x, y): (&str, &str), column: &str, title: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set title '{title}'\n\
         set xlabel '{x}'\n\
         set ylabel '{y}'\n\
         set view map\n\
         set palette rgbformulae 33,13,10\n\
         splot '{csv}' using '{x}':'{y}':'{column}' with points pointtype 5 pointsize 0.6 palette notitle\n\
         pause mouse close\n"
    )
}

/// Line plot of `y` columns against `x`.
pub fn line_script(csv: &str, x: &str, ys: &[&str], title: &str) -> String {
    let plots: Vec<String> = ys
        .iter()
        .map(|y| format!("'{csv}' using '{x}':'{y}' with lines title '{y}'"))
        .collect();
    format!(
        "set datafile separator ','\n\
         set title '{title}'\n\
         set xlabel '{x}'\n\
         plot {}\n\
         pause mouse close\n",
        plots.join(", \\\n     ")
    )
}
