use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Output directory. Files are written whole and never appended.
pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(root).map_err(CliError::io(root))?;
        Ok(Self { root: root.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write<F>(&self, name: &str, body: F) -> CliResult<PathBuf>
    where
        F: FnOnce(&mut BufWriter<File>) -> CliResult<()>,
    {
        let path = self.path(name);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
        }
        let file = File::create(&path).map_err(CliError::io(&path))?;
        let mut w = BufWriter::new(file);
        body(&mut w)?;
        w.flush().map_err(CliError::io(&path))?;
        log::info!("wrote {}", path.display());
        Ok(path)
    }

    pub fn write_text(&self, name: &str, text: &str) -> CliResult<PathBuf> {
        let path = self.path(name);
        self.write(name, |w| w.write_all(text.as_bytes()).map_err(CliError::io(&path)))
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> CliResult<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Config(format!("cannot serialize {name}: {e}")))?;
        text.push('\n');
        self.write_text(name, &text)
    }
}

/// Sidecar echoing what produced an output.
#[derive(Serialize)]
pub struct Meta<'a, T: Serialize> {
    pub command: &'a str,
    pub version: &'a str,
    pub seed: u64,
    pub spec: T,
}

impl<'a, T: Serialize> Meta<'a, T> {
    pub fn new(command: &'a str, seed: u64, spec: T) -> Self {
        Self {
            command,
            version: env!("CARGO_PKG_VERSION"),
            seed,
            spec,
        }
    }
}
