//! Restarts run concurrently; the winner is picked by
//! [`select_best`], which depends only on inertia and restart index, so the
//! result does not depend on the thread count.

use actpath_core::kmeans::{check_layer_ks, kmeans_trial, select_best};
use actpath_core::{ActivationSet, KMeansParams, LayerClustering, Matrix};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// `threads == 0` lets rayon choose.
pub fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::config("threads", e.to_string()))
}

pub fn kmeans_fit_parallel(
    data: &Matrix,
    k: usize,
    params: &KMeansParams,
    pool: &rayon::ThreadPool,
) -> Result<LayerClustering> {
    params.validate()?;
    let trials = pool.install(|| {
        (0..params.restarts)
            .into_par_iter()
            .map(|r| kmeans_trial(data, k, params, r))
            .collect::<actpath_core::Result<Vec<_>>>()
    })?;
    Ok(select_best(trials).expect("restarts >= 1"))
}

pub fn cluster_layers_parallel(
    set: &ActivationSet,
    ks: &[usize],
    params: &KMeansParams,
    threads: usize,
) -> Result<Vec<LayerClustering>> {
    check_layer_ks(set, ks)?;
    let pool = pool(threads)?;
    set.layers()
        .iter()
        .zip(ks)
        .map(|(layer, &k)| {
            let mut fit = kmeans_fit_parallel(&layer.matrix, k, params, &pool)?;
            fit.layer_name = layer.name.clone();
            Ok(fit)
        })
        .collect()
}
