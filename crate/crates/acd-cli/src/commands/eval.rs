//! `acd eval`: clustering-quality report (NMI, pair precision/recall) for
//! predicted labels against reference part labels, with optional K-means,
//! HAC and spectral baselines on the point coordinates.

use super::{common_setup, read_labels};
use crate::manifest::ManifestBuilder;
use crate::{compute_err, CliError, Common};
use acd_core::cluster::{
    hac, kmeans, nmi_labels, pair_precision_recall, spectral, ClusterAssignment, Linkage,
    PartLabels,
};
use acd_core::io::EvalRecord;
use std::collections::BTreeMap;
use std::path::PathBuf;

pub struct Opts {
    pub pred: PathBuf,
    pub truth: PathBuf,
    pub out: PathBuf,
    pub baseline: Vec<String>,
    pub hist: Option<PathBuf>,
    pub n_neighbors: usize,
    pub shape_id: Option<String>,
    pub common: Common,
}

pub fn run(opts: Opts) -> Result<(), CliError> {
    let (_cfg, seed) = common_setup(&opts.common)?;
    let mut manifest = ManifestBuilder::new("eval", &[&opts.pred, &opts.truth], seed);
    manifest.param("n-neighbors", opts.n_neighbors);
    if !opts.baseline.is_empty() {
        manifest.param("baseline", opts.baseline.join("+"));
    }

    manifest.stage("load");
    let (pred_cloud, pred_labels) = read_labels(&opts.pred)?;
    let (_, truth_labels) = read_labels(&opts.truth)?;
    if pred_labels.len() != truth_labels.len() {
        return Err(CliError::Input(format!(
            "label files have different lengths: {} vs {}",
            pred_labels.len(),
            truth_labels.len()
        )));
    }
    let shape_id = opts.shape_id.clone().unwrap_or_else(|| {
        opts.pred
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "shape".into())
    });

    manifest.stage("evaluate");
    let truth = PartLabels::new(truth_labels.clone());
    let k_true = distinct(&truth_labels);
    let n_points = truth_labels.len();
    let mut rows: Vec<EvalRecord> = Vec::new();
    let mut nmi_by_method: BTreeMap<String, Vec<f64>> = BTreeMap::new();

    let push = |rows: &mut Vec<EvalRecord>,
                nmi_by_method: &mut BTreeMap<String, Vec<f64>>,
                method: &str,
                assignment: &ClusterAssignment|
     -> Result<(), CliError> {
        let score = nmi_labels(&truth.labels, &assignment.labels).map_err(compute_err)?;
        let (precision, recall) = pair_precision_recall(assignment, &truth).map_err(compute_err)?;
        rows.push(EvalRecord {
            shape_id: shape_id.clone(),
            method: method.to_string(),
            nmi: score,
            precision,
            recall,
            k: assignment.k,
            n_points,
        });
        nmi_by_method
            .entry(method.to_string())
            .or_default()
            .push(score);
        Ok(())
    };

    let pred_assignment = to_assignment(&pred_labels);
    push(&mut rows, &mut nmi_by_method, "acd", &pred_assignment)?;

    if !opts.baseline.is_empty() {
        let cloud = pred_cloud.ok_or_else(|| {
            CliError::Input(
                "baselines need point coordinates; give a PLY or x y z label file".into(),
            )
        })?;
        for baseline in &opts.baseline {
            let assignment = match baseline.as_str() {
                "kmeans" => kmeans(&cloud, k_true, seed).map_err(compute_err)?,
                "hac" => hac(&cloud, k_true, Linkage::Ward).map_err(compute_err)?,
                "spectral" => {
                    spectral(&cloud, k_true, opts.n_neighbors, seed).map_err(compute_err)?
                }
                other => {
                    return Err(CliError::Input(format!(
                        "unknown baseline {other} (kmeans, hac, spectral)"
                    )))
                }
            };
            push(&mut rows, &mut nmi_by_method, baseline, &assignment)?;
        }
    }

    manifest.stage("write");
    acd_core::io::write_eval_csv(&opts.out, &rows).map_err(compute_err)?;
    if let Some(hist) = &opts.hist {
        acd_core::io::write_histogram_json(hist, &nmi_by_method).map_err(compute_err)?;
    }
    for r in &rows {
        println!(
            "{}: nmi {:.4} precision {:.4} recall {:.4} (k = {})",
            r.method, r.nmi, r.precision, r.recall, r.k
        );
    }
    manifest.write(&super::label::manifest_path(&opts.out))
}

fn distinct(labels: &[usize]) -> usize {
    let mut seen: Vec<usize> = labels.to_vec();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}

/// Remaps arbitrary label values into a compact ClusterAssignment.
fn to_assignment(labels: &[usize]) -> ClusterAssignment {
    let mut ids: Vec<usize> = labels.to_vec();
    ids.sort_unstable();
    ids.dedup();
    let index: BTreeMap<usize, usize> = ids.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    ClusterAssignment {
        labels: labels.iter().map(|l| index[l]).collect(),
        k: ids.len(),
    }
}
