//! `acd loss`: contrastive pairwise loss (and optionally cross-entropy plus
//! the joint objective) over an embedding file, with analytic gradients on
//! request.

use super::{common_setup, read_labels};
use crate::manifest::ManifestBuilder;
use crate::{compute_err, input_err, CliError, Common};
use acd_core::selfsup::{
    cross_entropy, joint_loss, pairwise_loss, pairwise_loss_grad, sample_pairs, LossConfig,
};
use std::path::PathBuf;

pub struct Opts {
    pub embeddings: PathBuf,
    pub pairs: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub n_same: Option<usize>,
    pub n_diff: Option<usize>,
    pub margin: Option<f64>,
    pub lambda: Option<f64>,
    pub logits: Option<PathBuf>,
    pub grad_out: Option<PathBuf>,
    pub common: Common,
}

pub fn run(opts: Opts) -> Result<(), CliError> {
    let (cfg, seed) = common_setup(&opts.common)?;
    let defaults = LossConfig::default();
    let loss_cfg = LossConfig {
        margin: cfg.resolve(opts.margin, "margin", defaults.margin)?,
        lambda: cfg.resolve(opts.lambda, "lambda", defaults.lambda)?,
    };
    loss_cfg.validate().map_err(input_err)?;

    let mut manifest = ManifestBuilder::new("loss", &[&opts.embeddings], seed);
    manifest
        .param("margin", loss_cfg.margin)
        .param("lambda", loss_cfg.lambda);

    manifest.stage("load");
    let embeddings = acd_core::io::read_embeddings(&opts.embeddings).map_err(input_err)?;
    let labels = match &opts.labels {
        Some(path) => Some(read_labels(path)?.1),
        None => None,
    };
    let batch = match (&opts.pairs, &labels) {
        (Some(path), _) => acd_core::io::read_pairs_csv(path).map_err(input_err)?,
        (None, Some(labels)) => {
            let n_same = cfg.resolve(opts.n_same, "n-same", 1024usize)?;
            let n_diff = cfg.resolve(opts.n_diff, "n-diff", n_same)?;
            manifest.param("n-same", n_same).param("n-diff", n_diff);
            sample_pairs(labels, n_same, n_diff, seed).map_err(compute_err)?
        }
        (None, None) => {
            return Err(CliError::Input(
                "need --pairs or --labels to build a pair batch".into(),
            ))
        }
    };

    manifest.stage("loss");
    let pair = pairwise_loss(&embeddings, &batch, &loss_cfg).map_err(compute_err)?;
    println!("pair_loss: {pair}");

    if let Some(logits_path) = &opts.logits {
        let labels = labels.as_ref().ok_or_else(|| {
            CliError::Input("cross-entropy needs --labels alongside --logits".into())
        })?;
        let logits = acd_core::io::read_embeddings(logits_path).map_err(input_err)?;
        if logits.n != labels.len() {
            return Err(CliError::Input(format!(
                "logits rows ({}) do not match labels ({})",
                logits.n,
                labels.len()
            )));
        }
        let ce = cross_entropy(logits.as_slice(), logits.d, labels).map_err(compute_err)?;
        println!("cross_entropy: {ce}");
        println!("joint_loss: {}", joint_loss(ce, pair, &loss_cfg));
    }

    if let Some(grad_path) = &opts.grad_out {
        manifest.stage("gradient");
        let grad = pairwise_loss_grad(&embeddings, &batch, &loss_cfg).map_err(compute_err)?;
        acd_core::io::write_gradient(grad_path, embeddings.n, embeddings.d, &grad)
            .map_err(compute_err)?;
        println!("gradient written: {}", grad_path.display());
    }

    manifest.write(&super::label::manifest_path(
        opts.grad_out.as_ref().unwrap_or(&opts.embeddings),
    ))
}
