//! Run artifacts: GeoJSON points, static SVG plots, a markdown report, and
//! atomic writing of the whole set.

mod geojson;
mod report;
mod svg;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub use geojson::clusters_geojson;
pub use report::markdown_report;
pub use svg::{cluster_colors, dendrogram_svg, map_svg};

/// Writes `content` to `path` through a temporary sibling and a rename, so
/// `path` is either absent, the old file, or the complete new file.
pub fn write_atomic(path: &Path, content: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidArgument(format!("{} has no file name", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp-{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(content)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    result.map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

/// Writes every artifact into `dir`. If any write fails the artifacts
/// already written by this call are removed again.
pub fn write_artifacts(dir: &Path, artifacts: &[(&str, String)]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::with_capacity(artifacts.len());
    for (name, content) in artifacts {
        let path = dir.join(name);
        if let Err(e) = write_atomic(&path, content.as_bytes()) {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            return Err(e);
        }
        written.push(path);
    }
    Ok(written)
}
