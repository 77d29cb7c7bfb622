//! Subcommand implementations and shared input sniffing.

pub mod decompose;
pub mod eval;
pub mod label;
pub mod loss;
pub mod pairs;

use crate::config::Config;
use crate::{input_err, CliError, Common};
use acd_core::geometry::PointCloud;
use std::path::Path;

/// Loads the config, configures the thread pool and resolves the seed.
pub fn common_setup(common: &Common) -> Result<(Config, u64), CliError> {
    let cfg = Config::load(common.config.as_deref())?;
    let threads = cfg.resolve(common.threads, "threads", 0usize)?;
    crate::init_threads(if threads == 0 { None } else { Some(threads) })?;
    let seed = cfg.resolve(common.seed, "seed", 0u64)?;
    Ok((cfg, seed))
}

pub enum ShapeInput {
    Mesh(acd_core::geometry::TriangleMesh),
    Cloud(PointCloud),
}

/// Loads a shape by extension: .obj is a mesh, .ply / .xyz (or any text) a
/// point cloud.
pub fn read_shape(path: &Path) -> Result<ShapeInput, CliError> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase();
    match ext.as_str() {
        "obj" => Ok(ShapeInput::Mesh(
            acd_core::io::read_obj(path).map_err(input_err)?,
        )),
        "ply" => {
            let (cloud, _) = acd_core::io::read_ply(path).map_err(input_err)?;
            Ok(ShapeInput::Cloud(cloud))
        }
        _ => Ok(ShapeInput::Cloud(
            acd_core::io::read_xyz(path).map_err(input_err)?,
        )),
    }
}

/// Loads labels, optionally with coordinates: ascii PLY with a component
/// property, "x y z label" text, or a plain one-label-per-line column.
pub fn read_labels(path: &Path) -> Result<(Option<PointCloud>, Vec<usize>), CliError> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase();
    if ext == "ply" {
        let (cloud, labels) = acd_core::io::read_ply(path).map_err(input_err)?;
        let labels = labels.ok_or_else(|| {
            CliError::Input(format!("{}: PLY has no component property", path.display()))
        })?;
        return Ok((Some(cloud), labels));
    }
    // Sniff column count on the first data line.
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let columns = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.split_whitespace().count())
        .unwrap_or(0);
    match columns {
        1 => Ok((
            None,
            acd_core::io::read_label_column(path).map_err(input_err)?,
        )),
        c if c >= 4 => {
            let labeled = acd_core::io::read_labeled_xyz(path).map_err(input_err)?;
            Ok((Some(labeled.cloud), labeled.labels))
        }
        _ => Err(CliError::Input(format!(
            "{}: expected labels (1 column) or x y z label lines",
            path.display()
        ))),
    }
}
