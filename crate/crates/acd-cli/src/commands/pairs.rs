//! `acd pairs`: sample same/different-label pairs from a labels file.

use super::{common_setup, read_labels};
use crate::manifest::ManifestBuilder;
use crate::{compute_err, CliError, Common};
use acd_core::selfsup::sample_pairs;
use std::path::PathBuf;

pub struct Opts {
    pub labels: PathBuf,
    pub out: PathBuf,
    pub n_same: Option<usize>,
    pub n_diff: Option<usize>,
    pub common: Common,
}

pub fn run(opts: Opts) -> Result<(), CliError> {
    let (cfg, seed) = common_setup(&opts.common)?;
    let n_same = cfg.resolve(opts.n_same, "n-same", 1024usize)?;
    let n_diff = cfg.resolve(opts.n_diff, "n-diff", n_same)?;

    let mut manifest = ManifestBuilder::new("pairs", &[&opts.labels], seed);
    manifest.param("n-same", n_same).param("n-diff", n_diff);

    manifest.stage("load");
    let (_, labels) = read_labels(&opts.labels)?;

    manifest.stage("sample");
    let batch = sample_pairs(&labels, n_same, n_diff, seed).map_err(compute_err)?;

    manifest.stage("write");
    acd_core::io::write_pairs_csv(&opts.out, &batch).map_err(compute_err)?;
    let same = batch.pairs.iter().filter(|p| p.2).count();
    println!(
        "wrote {} pairs ({} same, {} different)",
        batch.len(),
        same,
        batch.len() - same
    );
    manifest.write(&super::label::manifest_path(&opts.out))
}
