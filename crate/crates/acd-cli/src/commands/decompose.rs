//! `acd decompose`: shape file to convex components on disk.

use super::{common_setup, read_shape, ShapeInput};
use crate::manifest::ManifestBuilder;
use crate::{compute_err, input_err, CliError, Common};
use acd_core::decompose::{decompose, DecompParams};
use acd_core::voxel::{voxelize_mesh, voxelize_points};
use std::path::PathBuf;

pub struct Opts {
    pub input: PathBuf,
    pub out: PathBuf,
    pub resolution: Option<usize>,
    pub tol: Option<f64>,
    pub max_components: Option<usize>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub planes_per_axis: Option<usize>,
    pub common: Common,
}

pub fn run(opts: Opts) -> Result<(), CliError> {
    let (cfg, seed) = common_setup(&opts.common)?;
    let defaults = DecompParams::default();
    let params = DecompParams {
        resolution: cfg.resolve(opts.resolution, "resolution", defaults.resolution)?,
        concavity_tol: cfg.resolve(opts.tol, "tol", defaults.concavity_tol)?,
        max_components: cfg.resolve(
            opts.max_components,
            "max-components",
            defaults.max_components,
        )?,
        alpha: cfg.resolve(opts.alpha, "alpha", defaults.alpha)?,
        beta: cfg.resolve(opts.beta, "beta", defaults.beta)?,
        planes_per_axis: cfg.resolve(
            opts.planes_per_axis,
            "planes-per-axis",
            defaults.planes_per_axis,
        )?,
    };
    params.validate().map_err(input_err)?;

    let mut manifest = ManifestBuilder::new("decompose", &[&opts.input], seed);
    manifest
        .param("resolution", params.resolution)
        .param("tol", params.concavity_tol)
        .param("max-components", params.max_components)
        .param("alpha", params.alpha)
        .param("beta", params.beta)
        .param("planes-per-axis", params.planes_per_axis);

    manifest.stage("load");
    let shape = read_shape(&opts.input)?;

    manifest.stage("voxelize");
    let grid = match &shape {
        ShapeInput::Mesh(mesh) => voxelize_mesh(mesh, params.resolution).map_err(compute_err)?,
        ShapeInput::Cloud(cloud) => {
            voxelize_points(cloud, params.resolution).map_err(compute_err)?
        }
    };

    manifest.stage("decompose");
    let result = decompose(&grid, &params).map_err(compute_err)?;

    manifest.stage("write");
    let hull_dir = opts.out.join("hulls");
    std::fs::create_dir_all(&hull_dir)
        .map_err(|e| CliError::Compute(format!("{}: {e}", hull_dir.display())))?;
    let mut hull_paths = Vec::new();
    for comp in &result.components {
        let rel = format!("hulls/component_{:03}.obj", comp.id);
        acd_core::io::write_obj(opts.out.join(&rel), &comp.hull.mesh).map_err(compute_err)?;
        hull_paths.push(rel);
    }
    let decomp_manifest = acd_core::io::DecompositionManifest::from_result(&result, hull_paths);
    acd_core::io::write_decomposition_json(opts.out.join("decomposition.json"), &decomp_manifest)
        .map_err(compute_err)?;
    acd_core::io::write_grid_rle(opts.out.join("grid.cvg"), &grid).map_err(compute_err)?;
    let sets: Vec<_> = result.components.iter().map(|c| c.cells.clone()).collect();
    acd_core::io::write_label_grid_rle(opts.out.join("labels.cvl"), grid.frame(), &sets)
        .map_err(compute_err)?;

    println!("components: {}", result.components.len());
    for c in &result.components {
        println!(
            "  component {}: {} cells, concavity {:.6}",
            c.id,
            c.cells.len(),
            c.concavity
        );
    }
    manifest.write(&opts.out.join("manifest.json"))
}
