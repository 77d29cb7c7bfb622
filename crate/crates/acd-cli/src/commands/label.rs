//! `acd label`: sample a mesh surface and propagate component labels from a
//! decomposition written by `acd decompose`.

use super::common_setup;
use crate::manifest::ManifestBuilder;
use crate::{compute_err, input_err, CliError, Common};
use acd_core::geometry::Aabb;
use acd_core::label::{
    propagate_labels, ComponentSamples, DEFAULT_COMPONENT_SAMPLES, DEFAULT_SHAPE_SAMPLES,
};
use std::path::{Path, PathBuf};

pub struct Opts {
    pub mesh: PathBuf,
    pub decomposition: PathBuf,
    pub out: PathBuf,
    pub n: Option<usize>,
    pub per_component: Option<usize>,
    pub format: String,
    pub common: Common,
}

pub fn run(opts: Opts) -> Result<(), CliError> {
    let (cfg, seed) = common_setup(&opts.common)?;
    let n = cfg.resolve(opts.n, "n", DEFAULT_SHAPE_SAMPLES)?;
    let per_component = cfg.resolve(
        opts.per_component,
        "per-component",
        DEFAULT_COMPONENT_SAMPLES,
    )?;
    if opts.format != "ply" && opts.format != "txt" {
        return Err(CliError::Input(format!(
            "unknown --format {} (expected ply or txt)",
            opts.format
        )));
    }

    let mut manifest = ManifestBuilder::new("label", &[&opts.mesh, &opts.decomposition], seed);
    manifest
        .param("n", n)
        .param("per-component", per_component)
        .param("format", &opts.format);

    manifest.stage("load");
    let mesh = acd_core::io::read_obj(&opts.mesh).map_err(input_err)?;
    let decomp = acd_core::io::read_decomposition_json(&opts.decomposition).map_err(input_err)?;
    let base = opts
        .decomposition
        .parent()
        .map(PathBuf::from)
        .unwrap_or_default();

    // The decomposition must match this mesh: ids contiguous and the mesh
    // bounding box consistent with the recorded grid cube.
    for (i, comp) in decomp.components.iter().enumerate() {
        if comp.id != i {
            return Err(CliError::Compute(format!(
                "component ids not contiguous: found {} at position {i}",
                comp.id
            )));
        }
    }
    let bb = Aabb::of_points(&mesh.vertices)
        .ok_or_else(|| CliError::Input("mesh has no vertices".into()))?;
    let side = decomp.grid.cell_size * decomp.grid.resolution as f64;
    let ext = bb.extent();
    let longest = ext.x.max(ext.y).max(ext.z);
    let cube = Aabb {
        min: decomp.grid.origin,
        max: decomp.grid.origin + acd_core::geometry::Point3::new(side, side, side),
    };
    if (longest * 1.05 - side).abs() > 0.01 * side || !cube.contains(bb.center()) {
        return Err(CliError::Compute(
            "decomposition grid does not match the mesh bounding box".into(),
        ));
    }

    manifest.stage("sample");
    let surface = acd_core::geometry::sample_mesh_surface(&mesh, n, seed).map_err(compute_err)?;
    let mut groups = Vec::new();
    for comp in &decomp.components {
        let hull_path = base.join(&comp.hull_obj_path);
        let hull = acd_core::io::read_obj(&hull_path)
            .map_err(|e| CliError::Compute(format!("{}: {e}", hull_path.display())))?;
        let comp_seed = acd_core::label::component_seed(seed, comp.id as u64);
        let samples = acd_core::geometry::sample_mesh_surface(&hull, per_component, comp_seed)
            .map_err(compute_err)?;
        groups.push((comp.id, samples));
    }
    let samples = ComponentSamples::new(groups).map_err(compute_err)?;

    manifest.stage("propagate");
    let labeled = propagate_labels(&surface, &samples).map_err(compute_err)?;

    manifest.stage("write");
    match opts.format.as_str() {
        "ply" => acd_core::io::write_ply(&opts.out, &labeled.cloud, Some(&labeled.labels))
            .map_err(compute_err)?,
        _ => acd_core::io::write_labeled_xyz(&opts.out, &labeled).map_err(compute_err)?,
    }

    let mut histogram = std::collections::BTreeMap::<usize, usize>::new();
    for &l in &labeled.labels {
        *histogram.entry(l).or_default() += 1;
    }
    println!(
        "labeled {} points across {} components",
        labeled.labels.len(),
        histogram.len()
    );
    for (label, count) in histogram {
        println!("  label {label}: {count}");
    }
    manifest.write(&manifest_path(&opts.out))
}

pub(super) fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_os_string();
    s.push(".manifest.json");
    PathBuf::from(s)
}
