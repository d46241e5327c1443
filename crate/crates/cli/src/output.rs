use std::fs::File;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliResult;

/// Collects the files a run writes into its output directory.
pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(root)?;
        Ok(OutputDir { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    /// Comma-separated, header row, LF line endings.
    pub fn csv(&mut self, name: &str) -> CliResult<csv::Writer<File>> {
        self.written.push(name.to_string());
        Ok(csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(self.root.join(name))?)
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.text(name, &text)
    }

    pub fn text(&mut self, name: &str, text: &str) -> CliResult<()> {
        std::fs::write(self.root.join(name), text)?;
        self.written.push(name.to_string());
        Ok(())
    }
}
