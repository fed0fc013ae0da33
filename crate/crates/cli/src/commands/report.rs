use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::error::{CliError, CliResult};
use crate::Context;

const KINDS: [&str; 3] = ["csv", "json", "txt"];

/// Seconds since the epoch; `SOURCE_DATE_EPOCH` wins when set.
fn timestamp() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or_else(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()))
}

fn collect(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(CliError::io(dir))? {
        let path = entry.map_err(CliError::io(dir))?.path();
        let kind = path.extension().and_then(|e| e.to_str()).unwrap_or("");
        if path.is_file() && KINDS.contains(&kind) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

pub fn run(ctx: &Context, sources: &[PathBuf]) -> CliResult<()> {
    let out_root = ctx.out.root().canonicalize().map_err(CliError::io(ctx.out.root()))?;
    let mut used: BTreeMap<String, usize> = BTreeMap::new();
    let mut listed = Vec::new();
    let mut summary = String::new();
    for src in sources {
        if !src.is_dir() {
            return Err(CliError::Io {
                path: src.clone(),
                source: std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory"),
            });
        }
        if src.canonicalize().map_err(CliError::io(src))? == out_root {
            return Err(CliError::Usage("report sources must differ from --out".into()));
        }
        let base = src
            .file_name()
            .map_or_else(|| "source".to_string(), |n| n.to_string_lossy().into_owned());
        let n = used.entry(base.clone()).or_insert(0);
        *n += 1;
        let label = if *n == 1 { base } else { format!("{base}-{n}") };
        for file in collect(src)? {
            let name = file.file_name().unwrap_or_default().to_string_lossy().into_owned();
            let bytes = std::fs::read(&file).map_err(CliError::io(&file))?;
            let rel = format!("{label}/{name}");
            ctx.out.write(&rel, |w| {
                std::io::Write::write_all(w, &bytes).map_err(CliError::io(&file))
            })?;
            if name.ends_with(".txt") {
                summary.push_str(&format!("== {rel}\n{}\n", String::from_utf8_lossy(&bytes).trim_end()));
                summary.push('\n');
            }
            listed.push((rel, bytes.len()));
        }
    }
    ctx.out.write_text("summary.txt", &summary)?;

    let mut manifest = format!(
        "generated_at = {}\nexokit_version = {}\nfiles = {}\n",
        timestamp(),
        env!("CARGO_PKG_VERSION"),
        listed.len() + 1
    );
    listed.push(("summary.txt".into(), summary.len()));
    for (rel, size) in &listed {
        manifest.push_str(&format!("file = {rel} bytes={size}\n"));
    }
    ctx.out.write_text("manifest.txt", &manifest)?;
    print!("{manifest}");
    Ok(())
}
