//! File formats: Wavefront OBJ meshes, XYZ and PLY point clouds, binary RLE
//! occupancy/label grids, flat binary embeddings with a JSON sidecar, pair
//! batches as CSV, decomposition manifests and evaluation reports.
//!
//! All text output uses shortest round-trip float formatting, so identical
//! inputs always produce byte-identical files.

use crate::decompose::{DecompParams, DecompositionResult};
use crate::geometry::{Point3, PointCloud, TriangleMesh};
use crate::label::LabeledPointCloud;
use crate::selfsup::{EmbeddingSet, PairBatch};
use crate::voxel::{GridFrame, VoxelGrid, VoxelSet};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Format(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

fn parse_err(line: usize, message: impl Into<String>) -> IoError {
    IoError::Parse {
        line,
        message: message.into(),
    }
}

// ---------------------------------------------------------------------------
// Wavefront OBJ

/// Reads an OBJ mesh: `v` and `f` records, 1-based indices (negative indices
/// count from the end), polygons triangulated by fan. Everything else is
/// ignored.
pub fn read_obj(path: impl AsRef<Path>) -> Result<TriangleMesh, IoError> {
    let text = fs::read_to_string(path)?;
    parse_obj(&text)
}

pub fn parse_obj(text: &str) -> Result<TriangleMesh, IoError> {
    let mut vertices: Vec<Point3> = Vec::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let mut fields = line.split_whitespace();
        match fields.next() {
            Some("v") => {
                let mut coord = |name: &str| -> Result<f64, IoError> {
                    fields
                        .next()
                        .ok_or_else(|| parse_err(lineno + 1, format!("missing {name}")))?
                        .parse::<f64>()
                        .map_err(|e| parse_err(lineno + 1, format!("bad {name}: {e}")))
                };
                let x = coord("x")?;
                let y = coord("y")?;
                let z = coord("z")?;
                vertices.push(Point3::new(x, y, z));
            }
            Some("f") => {
                let mut idx = Vec::new();
                for field in fields {
                    let first = field.split('/').next().unwrap_or(field);
                    let i: i64 = first
                        .parse()
                        .map_err(|e| parse_err(lineno + 1, format!("bad index: {e}")))?;
                    let resolved = if i > 0 {
                        (i - 1) as usize
                    } else if i < 0 {
                        let back = vertices.len() as i64 + i;
                        if back < 0 {
                            return Err(parse_err(lineno + 1, "negative index out of range"));
                        }
                        back as usize
                    } else {
                        return Err(parse_err(lineno + 1, "zero face index"));
                    };
                    if resolved >= vertices.len() {
                        return Err(parse_err(
                            lineno + 1,
                            format!("face index {} out of range", resolved + 1),
                        ));
                    }
                    idx.push(resolved);
                }
                if idx.len() < 3 {
                    return Err(parse_err(lineno + 1, "face with fewer than 3 vertices"));
                }
                for t in 1..idx.len() - 1 {
                    faces.push([idx[0], idx[t], idx[t + 1]]);
                }
            }
            _ => {}
        }
    }
    if vertices.is_empty() || faces.is_empty() {
        return Err(IoError::Format("OBJ has no usable geometry".into()));
    }
    Ok(TriangleMesh { vertices, faces })
}

pub fn write_obj(path: impl AsRef<Path>, mesh: &TriangleMesh) -> Result<(), IoError> {
    let mut out = String::new();
    for v in &mesh.vertices {
        writeln!(out, "v {} {} {}", v.x, v.y, v.z).unwrap();
    }
    for f in &mesh.faces {
        writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1).unwrap();
    }
    fs::write(path, out)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// XYZ point clouds (and labeled "x y z label" text)

pub fn read_xyz(path: impl AsRef<Path>) -> Result<PointCloud, IoError> {
    let text = fs::read_to_string(path)?;
    let mut points = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 3 {
            return Err(parse_err(lineno + 1, "expected at least x y z"));
        }
        let mut c = [0.0f64; 3];
        for (i, f) in fields.iter().take(3).enumerate() {
            c[i] = f
                .parse()
                .map_err(|e| parse_err(lineno + 1, format!("bad coordinate: {e}")))?;
        }
        points.push(Point3::new(c[0], c[1], c[2]));
    }
    if points.is_empty() {
        return Err(IoError::Format("no points in XYZ file".into()));
    }
    Ok(PointCloud::new(points))
}

pub fn write_xyz(path: impl AsRef<Path>, cloud: &PointCloud) -> Result<(), IoError> {
    let mut out = String::new();
    for p in &cloud.points {
        writeln!(out, "{} {} {}", p.x, p.y, p.z).unwrap();
    }
    fs::write(path, out)?;
    Ok(())
}

/// Labeled text: one `x y z label` line per point.
pub fn write_labeled_xyz(
    path: impl AsRef<Path>,
    labeled: &LabeledPointCloud,
) -> Result<(), IoError> {
    let mut out = String::new();
    for (p, l) in labeled.cloud.points.iter().zip(&labeled.labels) {
        writeln!(out, "{} {} {} {}", p.x, p.y, p.z, l).unwrap();
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_labeled_xyz(path: impl AsRef<Path>) -> Result<LabeledPointCloud, IoError> {
    let text = fs::read_to_string(path)?;
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 4 {
            return Err(parse_err(lineno + 1, "expected x y z label"));
        }
        let x: f64 = fields[0]
            .parse()
            .map_err(|e| parse_err(lineno + 1, format!("bad x: {e}")))?;
        let y: f64 = fields[1]
            .parse()
            .map_err(|e| parse_err(lineno + 1, format!("bad y: {e}")))?;
        let z: f64 = fields[2]
            .parse()
            .map_err(|e| parse_err(lineno + 1, format!("bad z: {e}")))?;
        let l: usize = fields[3]
            .parse()
            .map_err(|e| parse_err(lineno + 1, format!("bad label: {e}")))?;
        points.push(Point3::new(x, y, z));
        labels.push(l);
    }
    if points.is_empty() {
        return Err(IoError::Format("no points in labeled file".into()));
    }
    Ok(LabeledPointCloud {
        cloud: PointCloud::new(points),
        labels,
    })
}

/// Plain labels: one integer per line.
pub fn read_label_column(path: impl AsRef<Path>) -> Result<Vec<usize>, IoError> {
    let text = fs::read_to_string(path)?;
    let mut labels = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        labels.push(
            line.parse()
                .map_err(|e| parse_err(lineno + 1, format!("bad label: {e}")))?,
        );
    }
    if labels.is_empty() {
        return Err(IoError::Format("no labels in file".into()));
    }
    Ok(labels)
}

pub fn write_label_column(path: impl AsRef<Path>, labels: &[usize]) -> Result<(), IoError> {
    let mut out = String::new();
    for l in labels {
        writeln!(out, "{l}").unwrap();
    }
    fs::write(path, out)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// PLY (ascii)

/// Writes ascii PLY with x, y, z properties and, when labels are given, an
/// integer `component` property.
pub fn write_ply(
    path: impl AsRef<Path>,
    cloud: &PointCloud,
    labels: Option<&[usize]>,
) -> Result<(), IoError> {
    if let Some(l) = labels {
        if l.len() != cloud.len() {
            return Err(IoError::Format(format!(
                "labels ({}) and points ({}) differ",
                l.len(),
                cloud.len()
            )));
        }
    }
    let mut out = String::new();
    out.push_str("ply\nformat ascii 1.0\n");
    writeln!(out, "element vertex {}", cloud.len()).unwrap();
    out.push_str("property double x\nproperty double y\nproperty double z\n");
    if labels.is_some() {
        out.push_str("property int component\n");
    }
    out.push_str("end_header\n");
    for (i, p) in cloud.points.iter().enumerate() {
        match labels {
            Some(l) => writeln!(out, "{} {} {} {}", p.x, p.y, p.z, l[i]).unwrap(),
            None => writeln!(out, "{} {} {}", p.x, p.y, p.z).unwrap(),
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads ascii PLY with x, y, z properties; an integer `component` (or
/// `label`) property is returned as labels when present. Other properties are
/// skipped.
pub fn read_ply(path: impl AsRef<Path>) -> Result<(PointCloud, Option<Vec<usize>>), IoError> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, magic) = lines
        .next()
        .ok_or_else(|| IoError::Format("empty PLY".into()))?;
    if magic.trim() != "ply" {
        return Err(IoError::Format("missing ply magic".into()));
    }
    let mut vertex_count: Option<usize> = None;
    let mut properties: Vec<String> = Vec::new();
    let mut in_vertex_element = false;
    let mut header_end = 0usize;
    for (lineno, raw) in &mut lines {
        let line = raw.trim();
        if line == "end_header" {
            header_end = lineno;
            break;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            ["format", kind, _] => {
                if *kind != "ascii" {
                    return Err(IoError::Format("only ascii PLY is supported".into()));
                }
            }
            ["element", "vertex", count] => {
                vertex_count = Some(
                    count
                        .parse()
                        .map_err(|e| parse_err(lineno + 1, format!("bad count: {e}")))?,
                );
                in_vertex_element = true;
            }
            ["element", ..] => {
                in_vertex_element = false;
            }
            ["property", _ty, name] if in_vertex_element => {
                properties.push((*name).to_string());
            }
            _ => {}
        }
    }
    let count = vertex_count.ok_or_else(|| IoError::Format("no vertex element".into()))?;
    let x_at = properties.iter().position(|p| p == "x");
    let y_at = properties.iter().position(|p| p == "y");
    let z_at = properties.iter().position(|p| p == "z");
    let (x_at, y_at, z_at) = match (x_at, y_at, z_at) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return Err(IoError::Format("PLY lacks x/y/z properties".into())),
    };
    let label_at = properties
        .iter()
        .position(|p| p == "component" || p == "label");

    let mut points = Vec::with_capacity(count);
    let mut labels = label_at.map(|_| Vec::with_capacity(count));
    for (lineno, raw) in lines.take(count) {
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if fields.len() < properties.len() {
            return Err(parse_err(lineno + 1, "short vertex record"));
        }
        let get = |at: usize| -> Result<f64, IoError> {
            fields[at]
                .parse()
                .map_err(|e| parse_err(lineno + 1, format!("bad value: {e}")))
        };
        points.push(Point3::new(get(x_at)?, get(y_at)?, get(z_at)?));
        if let (Some(at), Some(ls)) = (label_at, labels.as_mut()) {
            let v: f64 = get(at)?;
            ls.push(v as usize);
        }
    }
    if points.len() != count {
        return Err(IoError::Format(format!(
            "expected {count} vertices, found {}  (header at line {header_end})",
            points.len()
        )));
    }
    Ok((PointCloud::new(points), labels))
}

// ---------------------------------------------------------------------------
// RLE grid dumps

const GRID_MAGIC: &[u8; 4] = b"CVG1";
const LABEL_GRID_MAGIC: &[u8; 4] = b"CVL1";
/// Label value marking unoccupied cells in a label grid.
pub const NO_COMPONENT: u16 = u16::MAX;

fn write_grid_header(out: &mut Vec<u8>, magic: &[u8; 4], frame: &GridFrame) {
    out.extend_from_slice(magic);
    out.extend_from_slice(&(frame.resolution as u32).to_le_bytes());
    for v in [
        frame.origin.x,
        frame.origin.y,
        frame.origin.z,
        frame.cell_size,
    ] {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

fn read_grid_header(bytes: &[u8], magic: &[u8; 4]) -> Result<(GridFrame, usize), IoError> {
    if bytes.len() < 4 + 4 + 32 || &bytes[..4] != magic {
        return Err(IoError::Format("bad grid header".into()));
    }
    let resolution = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let mut reals = [0.0f64; 4];
    for (i, r) in reals.iter_mut().enumerate() {
        let at = 8 + i * 8;
        *r = f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
    }
    Ok((
        GridFrame {
            resolution,
            origin: Point3::new(reals[0], reals[1], reals[2]),
            cell_size: reals[3],
        },
        40,
    ))
}

/// Binary RLE dump of an occupancy grid: "CVG1" header then alternating
/// (empty, occupied) run pairs of 32-bit counts covering all cells in linear
/// order.
pub fn write_grid_rle(path: impl AsRef<Path>, grid: &VoxelGrid) -> Result<(), IoError> {
    let mut out = Vec::new();
    write_grid_header(&mut out, GRID_MAGIC, grid.frame());
    let total = grid.frame().cell_count() as u32;
    let mut u = 0u32;
    while u < total {
        let mut empty = 0u32;
        while u < total && !grid.is_occupied_linear(u) {
            empty += 1;
            u += 1;
        }
        let mut occupied = 0u32;
        while u < total && grid.is_occupied_linear(u) {
            occupied += 1;
            u += 1;
        }
        out.extend_from_slice(&empty.to_le_bytes());
        out.extend_from_slice(&occupied.to_le_bytes());
    }
    let mut file = fs::File::create(path)?;
    file.write_all(&out)?;
    Ok(())
}

pub fn read_grid_rle(path: impl AsRef<Path>) -> Result<VoxelGrid, IoError> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    let (frame, mut at) = read_grid_header(&bytes, GRID_MAGIC)?;
    let mut grid =
        VoxelGrid::new_empty(frame).map_err(|e| IoError::Format(format!("bad frame: {e}")))?;
    let total = frame.cell_count() as u32;
    let mut u = 0u32;
    while at + 8 <= bytes.len() && u < total {
        let empty = u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
        let occupied = u32::from_le_bytes(bytes[at + 4..at + 8].try_into().unwrap());
        at += 8;
        u += empty;
        for _ in 0..occupied {
            if u >= total {
                return Err(IoError::Format("runs exceed grid size".into()));
            }
            grid.set_linear(u);
            u += 1;
        }
    }
    if u != total {
        return Err(IoError::Format("runs do not cover the grid".into()));
    }
    Ok(grid)
}

/// RLE dump of per-cell component labels: "CVL1" header then (count, label)
/// pairs of 32-bit count and 16-bit id; `NO_COMPONENT` marks empty cells.
pub fn write_label_grid_rle(
    path: impl AsRef<Path>,
    frame: &GridFrame,
    components: &[VoxelSet],
) -> Result<(), IoError> {
    let total = frame.cell_count();
    let mut labels = vec![NO_COMPONENT; total];
    for (id, comp) in components.iter().enumerate() {
        if id >= NO_COMPONENT as usize {
            return Err(IoError::Format("too many components for 16-bit ids".into()));
        }
        for &u in &comp.cells {
            labels[u as usize] = id as u16;
        }
    }
    let mut out = Vec::new();
    write_grid_header(&mut out, LABEL_GRID_MAGIC, frame);
    let mut u = 0usize;
    while u < total {
        let label = labels[u];
        let mut run = 0u32;
        while u < total && labels[u] == label {
            run += 1;
            u += 1;
        }
        out.extend_from_slice(&run.to_le_bytes());
        out.extend_from_slice(&label.to_le_bytes());
    }
    let mut file = fs::File::create(path)?;
    file.write_all(&out)?;
    Ok(())
}

/// Reads a label grid into per-cell labels (`NO_COMPONENT` = empty).
pub fn read_label_grid_rle(path: impl AsRef<Path>) -> Result<(GridFrame, Vec<u16>), IoError> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    let (frame, mut at) = read_grid_header(&bytes, LABEL_GRID_MAGIC)?;
    let total = frame.cell_count();
    let mut labels = Vec::with_capacity(total);
    while at + 6 <= bytes.len() && labels.len() < total {
        let run = u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
        let label = u16::from_le_bytes(bytes[at + 4..at + 6].try_into().unwrap());
        at += 6;
        for _ in 0..run {
            labels.push(label);
        }
    }
    if labels.len() != total {
        return Err(IoError::Format("runs do not cover the grid".into()));
    }
    Ok((frame, labels))
}

// ---------------------------------------------------------------------------
// Embeddings: flat little-endian f32 with a JSON sidecar {n, d}

#[derive(Debug, Serialize, Deserialize)]
struct EmbeddingSidecar {
    n: usize,
    d: usize,
}

pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".json");
    std::path::PathBuf::from(s)
}

/// Writes embeddings as flat little-endian f32 plus `<path>.json` sidecar.
pub fn write_embeddings(path: impl AsRef<Path>, e: &EmbeddingSet) -> Result<(), IoError> {
    let path = path.as_ref();
    let mut bytes = Vec::with_capacity(e.n * e.d * 4);
    for &v in e.as_slice() {
        bytes.extend_from_slice(&(v as f32).to_le_bytes());
    }
    fs::write(path, bytes)?;
    let sidecar = serde_json::to_string_pretty(&EmbeddingSidecar { n: e.n, d: e.d })?;
    fs::write(sidecar_path(path), sidecar + "\n")?;
    Ok(())
}

pub fn read_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingSet, IoError> {
    let path = path.as_ref();
    let sidecar: EmbeddingSidecar = serde_json::from_str(&fs::read_to_string(sidecar_path(path))?)?;
    let bytes = fs::read(path)?;
    let expected = sidecar.n * sidecar.d * 4;
    if bytes.len() != expected {
        return Err(IoError::Format(format!(
            "embedding file is {} bytes, sidecar implies {expected}",
            bytes.len()
        )));
    }
    let mut values = Vec::with_capacity(sidecar.n * sidecar.d);
    for chunk in bytes.chunks_exact(4) {
        values.push(f32::from_le_bytes(chunk.try_into().unwrap()) as f64);
    }
    EmbeddingSet::new(sidecar.n, sidecar.d, values).map_err(|e| IoError::Format(e.to_string()))
}

/// Writes an n x d gradient in the embedding binary format (with sidecar).
pub fn write_gradient(
    path: impl AsRef<Path>,
    n: usize,
    d: usize,
    grad: &[f64],
) -> Result<(), IoError> {
    let e = EmbeddingSet::new(n, d, grad.to_vec()).map_err(|e| IoError::Format(e.to_string()))?;
    write_embeddings(path, &e)
}

// ---------------------------------------------------------------------------
// Pair batches: CSV "i,j,same"

pub fn write_pairs_csv(path: impl AsRef<Path>, batch: &PairBatch) -> Result<(), IoError> {
    let mut out = String::from("i,j,same\n");
    for &(i, j, same) in &batch.pairs {
        writeln!(out, "{i},{j},{}", same as u8).unwrap();
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_pairs_csv(path: impl AsRef<Path>) -> Result<PairBatch, IoError> {
    let text = fs::read_to_string(path)?;
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || (lineno == 0 && line.starts_with('i')) {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(parse_err(lineno + 1, "expected i,j,same"));
        }
        let i: usize = fields[0]
            .trim()
            .parse()
            .map_err(|e| parse_err(lineno + 1, format!("bad i: {e}")))?;
        let j: usize = fields[1]
            .trim()
            .parse()
            .map_err(|e| parse_err(lineno + 1, format!("bad j: {e}")))?;
        let same = match fields[2].trim() {
            "1" | "true" => true,
            "0" | "false" => false,
            other => return Err(parse_err(lineno + 1, format!("bad same flag: {other}"))),
        };
        pairs.push((i, j, same));
    }
    Ok(PairBatch::new(pairs))
}

// ---------------------------------------------------------------------------
// Decomposition manifest JSON

#[derive(Debug, Serialize, Deserialize)]
pub struct ComponentRecord {
    pub id: usize,
    pub cell_count: usize,
    pub concavity: f64,
    pub hull_obj_path: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DecompositionManifest {
    pub params: DecompParams,
    pub grid: GridFrame,
    pub occupied_cells: usize,
    pub components: Vec<ComponentRecord>,
}

impl DecompositionManifest {
    pub fn from_result(result: &DecompositionResult, hull_paths: Vec<String>) -> Self {
        DecompositionManifest {
            params: result.params,
            grid: result.source_grid.frame,
            occupied_cells: result.source_grid.occupied,
            components: result
                .components
                .iter()
                .zip(hull_paths)
                .map(|(c, hull_obj_path)| ComponentRecord {
                    id: c.id,
                    cell_count: c.cells.len(),
                    concavity: c.concavity,
                    hull_obj_path,
                })
                .collect(),
        }
    }
}

pub fn write_decomposition_json(
    path: impl AsRef<Path>,
    manifest: &DecompositionManifest,
) -> Result<(), IoError> {
    fs::write(path, serde_json::to_string_pretty(manifest)? + "\n")?;
    Ok(())
}

pub fn read_decomposition_json(path: impl AsRef<Path>) -> Result<DecompositionManifest, IoError> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

// ---------------------------------------------------------------------------
// Evaluation reports

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalRecord {
    pub shape_id: String,
    pub method: String,
    pub nmi: f64,
    pub precision: f64,
    pub recall: f64,
    pub k: usize,
    pub n_points: usize,
}

pub fn write_eval_csv(path: impl AsRef<Path>, rows: &[EvalRecord]) -> Result<(), IoError> {
    let mut out = String::from("shape_id,method,nmi,precision,recall,k,n_points\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.shape_id, r.method, r.nmi, r.precision, r.recall, r.k, r.n_points
        )
        .unwrap();
    }
    fs::write(path, out)?;
    Ok(())
}

/// Histogram summary mirroring the evaluation plots: 20 NMI bins over [0, 1]
/// per method.
#[derive(Debug, Serialize, Deserialize)]
pub struct HistogramSummary {
    pub bins: usize,
    pub range: [f64; 2],
    pub methods: std::collections::BTreeMap<String, Vec<u64>>,
}

pub fn write_histogram_json(
    path: impl AsRef<Path>,
    per_method_nmi: &std::collections::BTreeMap<String, Vec<f64>>,
) -> Result<(), IoError> {
    let methods = per_method_nmi
        .iter()
        .map(|(m, values)| (m.clone(), crate::cluster::histogram_20(values).to_vec()))
        .collect();
    let summary = HistogramSummary {
        bins: 20,
        range: [0.0, 1.0],
        methods,
    };
    fs::write(path, serde_json::to_string_pretty(&summary)? + "\n")?;
    Ok(())
}
