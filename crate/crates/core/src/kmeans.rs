//! Restarted k-means with distance-squared-weighted seeding.
//!
//! Each restart seeds with k-means++ from its own SplitMix64 stream
//! (`base_seed ^ (restart + 1)`) and runs Lloyd iterations until the relative
//! inertia improvement drops below `rel_tol`. The restart with the smallest
//! inertia wins, ties going to the lowest restart index. Restarts share no
//! state, so callers may run them in any order or in parallel and reduce with
//! [`select_best`].

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::activation::{ActivationSet, Mode};
use crate::error::{Error, Result};
use crate::matrix::{squared_distance, Matrix};
use crate::rng::SplitMix64;
use crate::sum::pairwise_sum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansParams {
    pub restarts: usize,
    pub max_iters: usize,
    /// Stop once `(previous - current) / previous` inertia falls below this.
    pub rel_tol: f64,
    pub base_seed: u64,
}

impl Default for KMeansParams {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_iters: 300,
            rel_tol: 1e-6,
            base_seed: 42,
        }
    }
}

impl KMeansParams {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::invalid("restarts", "must be at least 1"));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters", "must be at least 1"));
        }
        if !(self.rel_tol >= 0.0) || !self.rel_tol.is_finite() {
            return Err(Error::invalid("rel_tol", "must be a finite value >= 0"));
        }
        Ok(())
    }
}

/// Final clustering of one layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerClustering {
    pub layer_name: String,
    pub k: usize,
    pub centroids: Matrix,
    pub assignments: Vec<usize>,
    /// Sum of squared distances from each row to its assigned centroid.
    pub inertia: f64,
    pub seed: u64,
    pub chosen_restart: usize,
    pub iterations_run: usize,
}

impl LayerClustering {
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }
}

/// Seed of the SplitMix64 stream used by restart `restart`.
pub fn restart_seed(base_seed: u64, restart: usize) -> u64 {
    base_seed ^ (restart as u64 + 1)
}

fn check_data(data: &Matrix, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::invalid("k", "must be at least 1"));
    }
    if data.rows() < k {
        return Err(Error::TooFewRows {
            needed: k,
            found: data.rows(),
        });
    }
    Ok(())
}

/// Row indices picked by k-means++ seeding: the first uniformly, each next
/// one with probability proportional to its squared distance to the nearest
/// pick so far. When every remaining row coincides with a pick, the next one
/// is drawn uniformly from the unpicked rows, so indices are always distinct.
pub fn kmeanspp_indices(data: &Matrix, k: usize, rng: &mut SplitMix64) -> Result<Vec<usize>> {
    check_data(data, k)?;
    let n = data.rows();
    let mut picked = Vec::with_capacity(k);
    let mut is_picked = vec![false; n];
    let first = rng.below(n);
    picked.push(first);
    is_picked[first] = true;
    let mut nearest: Vec<f64> = data
        .iter_rows()
        .map(|r| squared_distance(r, data.row(first)))
        .collect();

    while picked.len() < k {
        for (d, &p) in nearest.iter_mut().zip(&is_picked) {
            if p {
                *d = 0.0;
            }
        }
        let next = match rng.weighted_index(&nearest) {
            Some(i) => i,
            None => {
                let free: Vec<usize> = (0..n).filter(|&i| !is_picked[i]).collect();
                free[rng.below(free.len())]
            }
        };
        picked.push(next);
        is_picked[next] = true;
        let c = data.row(next);
        for (d, r) in nearest.iter_mut().zip(data.iter_rows()) {
            let dn = squared_distance(r, c);
            if dn < *d {
                *d = dn;
            }
        }
    }
    Ok(picked)
}

pub fn kmeanspp_init(data: &Matrix, k: usize, rng: &mut SplitMix64) -> Result<Matrix> {
    let idx = kmeanspp_indices(data, k, rng)?;
    Ok(data.select_rows(&idx))
}

fn check_dims(data: &Matrix, centroids: &Matrix) -> Result<()> {
    if centroids.cols() != data.cols() {
        return Err(Error::DimensionMismatch {
            expected: data.cols(),
            found: centroids.cols(),
        });
    }
    if centroids.rows() == 0 {
        return Err(Error::invalid("centroids", "no centroids"));
    }
    Ok(())
}

#[inline]
fn nearest(row: &[f64], centroids: &Matrix) -> (usize, f64) {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, c) in centroids.iter_rows().enumerate() {
        let d = squared_distance(row, c);
        if d < best_d {
            best = j;
            best_d = d;
        }
    }
    (best, best_d)
}

/// Nearest-centroid assignment; ties go to the lowest cluster index.
pub fn assign(data: &Matrix, centroids: &Matrix) -> Result<Vec<usize>> {
    check_dims(data, centroids)?;
    Ok(data.iter_rows().map(|r| nearest(r, centroids).0).collect())
}

fn assign_into(data: &Matrix, centroids: &Matrix, labels: &mut [usize], dists: &mut [f64]) {
    for (i, r) in data.iter_rows().enumerate() {
        let (j, d) = nearest(r, centroids);
        labels[i] = j;
        dists[i] = d;
    }
}

/// Gives every empty cluster a member.
///
/// The lowest-index empty cluster takes over the row farthest from its
/// current centroid (among clusters that can spare a row), its centroid moves
/// onto that row, and any row strictly closer to the moved centroid follows
/// it. Repeats until no cluster is empty. Assignments stay optimal with
/// respect to the current centroids and inertia never increases.
fn repair_empty(
    data: &Matrix,
    centroids: &mut Matrix,
    labels: &mut [usize],
    dists: &mut [f64],
) {
    let k = centroids.rows();
    let mut counts = vec![0usize; k];
    for &l in labels.iter() {
        counts[l] += 1;
    }
    while let Some(empty) = counts.iter().position(|&c| c == 0) {
        let mut donor = None;
        let mut donor_d = f64::NEG_INFINITY;
        for (i, (&l, &d)) in labels.iter().zip(dists.iter()).enumerate() {
            if counts[l] > 1 && d > donor_d {
                donor = Some(i);
                donor_d = d;
            }
        }
        // rows >= k guarantees a cluster with two or more rows exists.
        let donor = donor.expect("some cluster has a spare row");
        centroids.row_mut(empty).copy_from_slice(data.row(donor));
        counts[labels[donor]] -= 1;
        labels[donor] = empty;
        dists[donor] = 0.0;
        counts[empty] += 1;
        let c = centroids.row(empty);
        for (i, r) in data.iter_rows().enumerate() {
            if i == donor {
                continue;
            }
            let d = squared_distance(r, c);
            if d < dists[i] {
                counts[labels[i]] -= 1;
                labels[i] = empty;
                dists[i] = d;
                counts[empty] += 1;
            }
        }
    }
}

fn update_means(data: &Matrix, labels: &[usize], centroids: &mut Matrix) {
    let k = centroids.rows();
    let mut sums = Matrix::zeros(k, data.cols());
    let mut counts = vec![0usize; k];
    for (r, &l) in data.iter_rows().zip(labels) {
        counts[l] += 1;
        for (s, v) in sums.row_mut(l).iter_mut().zip(r) {
            *s += v;
        }
    }
    for (j, &count) in counts.iter().enumerate() {
        if count == 0 {
            continue;
        }
        for (c, s) in centroids.row_mut(j).iter_mut().zip(sums.row(j)) {
            *c = s / count as f64;
        }
    }
}

/// Inertia of an arbitrary assignment, summed pairwise across rows.
pub fn inertia_of(data: &Matrix, centroids: &Matrix, assignments: &[usize]) -> f64 {
    let d: Vec<f64> = data
        .iter_rows()
        .zip(assignments)
        .map(|(r, &a)| squared_distance(r, centroids.row(a)))
        .collect();
    pairwise_sum(&d)
}

/// Lloyd iterations from the given centroids.
///
/// The returned clustering has an empty `layer_name` and zero seed fields;
/// [`kmeans_trial`] fills them in.
pub fn lloyd(data: &Matrix, initial: Matrix, params: &KMeansParams) -> Result<LayerClustering> {
    lloyd_traced(data, initial, params, &mut Vec::new())
}

/// [`lloyd`], pushing the inertia after seeding and after every accepted
/// iteration onto `trace`.
pub fn lloyd_traced(
    data: &Matrix,
    initial: Matrix,
    params: &KMeansParams,
    trace: &mut Vec<f64>,
) -> Result<LayerClustering> {
    params.validate()?;
    check_dims(data, &initial)?;
    let k = initial.rows();
    check_data(data, k)?;
    let n = data.rows();

    let mut centroids = initial;
    let mut labels = vec![0usize; n];
    let mut dists = vec![0.0; n];
    assign_into(data, &centroids, &mut labels, &mut dists);
    repair_empty(data, &mut centroids, &mut labels, &mut dists);
    let mut inertia = pairwise_sum(&dists);
    trace.push(inertia);

    let mut next_centroids = centroids.clone();
    let mut next_labels = labels.clone();
    let mut next_dists = dists.clone();
    let mut iterations = 0;
    while iterations < params.max_iters && inertia > 0.0 {
        next_centroids.clone_from(&centroids);
        update_means(data, &labels, &mut next_centroids);
        assign_into(data, &next_centroids, &mut next_labels, &mut next_dists);
        repair_empty(data, &mut next_centroids, &mut next_labels, &mut next_dists);
        let next_inertia = pairwise_sum(&next_dists);
        iterations += 1;
        if next_inertia > inertia {
            // Only rounding can get here; keep the previous solution.
            break;
        }
        core::mem::swap(&mut centroids, &mut next_centroids);
        core::mem::swap(&mut labels, &mut next_labels);
        core::mem::swap(&mut dists, &mut next_dists);
        let improvement = (inertia - next_inertia) / inertia;
        inertia = next_inertia;
        trace.push(inertia);
        if improvement < params.rel_tol {
            break;
        }
    }

    Ok(LayerClustering {
        layer_name: String::new(),
        k,
        centroids,
        assignments: labels,
        inertia,
        seed: 0,
        chosen_restart: 0,
        iterations_run: iterations,
    })
}

/// One restart: seeding plus Lloyd iterations.
pub fn kmeans_trial(
    data: &Matrix,
    k: usize,
    params: &KMeansParams,
    restart: usize,
) -> Result<LayerClustering> {
    let mut rng = SplitMix64::new(restart_seed(params.base_seed, restart));
    let init = kmeanspp_init(data, k, &mut rng)?;
    let mut fit = lloyd(data, init, params)?;
    fit.seed = params.base_seed;
    fit.chosen_restart = restart;
    Ok(fit)
}

/// Lowest inertia, then lowest restart index. Independent of input order.
pub fn select_best<I>(trials: I) -> Option<LayerClustering>
where
    I: IntoIterator<Item = LayerClustering>,
{
    trials.into_iter().min_by(|a, b| {
        a.inertia
            .total_cmp(&b.inertia)
            .then(a.chosen_restart.cmp(&b.chosen_restart))
    })
}

pub fn kmeans_fit(data: &Matrix, k: usize, params: &KMeansParams) -> Result<LayerClustering> {
    Ok(kmeans_fit_traced(data, k, params)?.0)
}

/// [`kmeans_fit`] plus the final inertia of every restart, by restart index.
pub fn kmeans_fit_traced(
    data: &Matrix,
    k: usize,
    params: &KMeansParams,
) -> Result<(LayerClustering, Vec<f64>)> {
    params.validate()?;
    check_data(data, k)?;
    let mut trials = Vec::with_capacity(params.restarts);
    for r in 0..params.restarts {
        trials.push(kmeans_trial(data, k, params, r)?);
    }
    let inertias = trials.iter().map(|t| t.inertia).collect();
    let best = select_best(trials).expect("restarts >= 1");
    Ok((best, inertias))
}

/// Clusters every layer of `set` with its own `k`. A recurrent set has one
/// layer holding all time-steps, so it gets one clustering over all rows.
pub fn cluster_layers(
    set: &ActivationSet,
    ks: &[usize],
    params: &KMeansParams,
) -> Result<Vec<LayerClustering>> {
    check_layer_ks(set, ks)?;
    set.layers()
        .iter()
        .zip(ks)
        .map(|(layer, &k)| {
            let mut fit = kmeans_fit(&layer.matrix, k, params)?;
            fit.layer_name = layer.name.clone();
            Ok(fit)
        })
        .collect()
}

pub fn check_layer_ks(set: &ActivationSet, ks: &[usize]) -> Result<()> {
    if ks.len() != set.layers().len() {
        return Err(Error::invalid(
            "layers",
            format!("{} cluster counts for {} layers", ks.len(), set.layers().len()),
        ));
    }
    if set.mode() == Mode::Recurrent && ks.len() != 1 {
        return Err(Error::invalid("layers", "recurrent mode takes exactly one layer"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[[f64; 2]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn single_cluster_is_the_mean() {
        let data = m(&[[0.0, 0.0], [2.0, 0.0]]);
        let fit = kmeans_fit(&data, 1, &KMeansParams::default()).unwrap();
        assert_eq!(fit.centroids.row(0), &[1.0, 0.0]);
        assert_eq!(fit.inertia, 2.0);
    }

    #[test]
    fn two_pairs() {
        let data = m(&[[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0]]);
        let fit = kmeans_fit(&data, 2, &KMeansParams::default()).unwrap();
        assert!((fit.inertia - 1.0).abs() < 1e-12);
        let mut cs: Vec<[f64; 2]> = fit.centroids.iter_rows().map(|r| [r[0], r[1]]).collect();
        cs.sort_by(|a, b| a[0].total_cmp(&b[0]));
        assert_eq!(cs, vec![[0.0, 0.5], [10.0, 0.5]]);
    }

    #[test]
    fn k_equals_rows_gives_zero_inertia() {
        let data = m(&[[0.0, 0.0], [3.0, 1.0], [5.0, 5.0], [1.0, 9.0]]);
        let fit = kmeans_fit(&data, 4, &KMeansParams::default()).unwrap();
        assert_eq!(fit.inertia, 0.0);
        assert!(fit.cluster_sizes().iter().all(|&s| s == 1));
    }

    #[test]
    fn too_few_rows() {
        let data = m(&[[0.0, 0.0]]);
        assert_eq!(
            kmeans_fit(&data, 2, &KMeansParams::default()).unwrap_err(),
            Error::TooFewRows { needed: 2, found: 1 }
        );
    }

    #[test]
    fn kmeanspp_exhausts_rows() {
        let data = m(&[[0.0, 0.0], [1.0, 0.0], [0.0, 7.0], [2.0, 2.0], [9.0, 9.0]]);
        for seed in 0..20 {
            let mut idx = kmeanspp_indices(&data, 5, &mut SplitMix64::new(seed)).unwrap();
            idx.sort_unstable();
            assert_eq!(idx, vec![0, 1, 2, 3, 4]);
        }
    }

    #[test]
    fn kmeanspp_distinct_rows_with_duplicates() {
        let data = m(&[[1.0, 1.0]; 6]);
        let mut idx = kmeanspp_indices(&data, 6, &mut SplitMix64::new(5)).unwrap();
        idx.sort_unstable();
        assert_eq!(idx, vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn kmeanspp_first_draw_is_uniform() {
        let data = m(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0]]);
        let mut hist = [0usize; 4];
        let trials = 40_000;
        for seed in 0..trials {
            hist[kmeanspp_indices(&data, 1, &mut SplitMix64::new(seed)).unwrap()[0]] += 1;
        }
        // Binomial std is about 87; allow 5 sigma.
        for h in hist {
            assert!((h as f64 - 10_000.0).abs() < 435.0, "{hist:?}");
        }
    }

    #[test]
    fn identical_rows_keep_every_cluster_populated() {
        let data = m(&[[2.0, 2.0]; 5]);
        let fit = kmeans_fit(&data, 3, &KMeansParams::default()).unwrap();
        assert!(fit.cluster_sizes().iter().all(|&s| s >= 1));
        assert_eq!(fit.inertia, 0.0);
    }

    #[test]
    fn repair_fills_empty_cluster_from_farthest_row() {
        // Centroid 1 sits far from every row and starts empty.
        let data = m(&[[0.0, 0.0], [1.0, 0.0], [8.0, 0.0]]);
        let init = m(&[[0.0, 0.0], [100.0, 100.0]]);
        let mut trace = Vec::new();
        let params = KMeansParams {
            max_iters: 1,
            ..Default::default()
        };
        let fit = lloyd_traced(&data, init, &params, &mut trace).unwrap();
        assert_eq!(fit.assignments, vec![0, 0, 1]);
        assert_eq!(trace[0], 1.0);
    }

    #[test]
    fn assign_ties_go_low() {
        let data = m(&[[0.0, 0.0], [5.0, 5.0]]);
        let cents = m(&[[1.0, 0.0], [9.0, 9.0], [-1.0, 0.0], [0.0, 0.0], [7.0, 7.0], [5.0, 5.0]]);
        assert_eq!(assign(&data, &cents).unwrap(), vec![3, 5]);
        let eq = m(&[[-1.0, 0.0], [3.0, 3.0], [1.0, 0.0]]);
        assert_eq!(assign(&data, &eq).unwrap()[0], 0);
        let bad = Matrix::zeros(2, 3);
        assert!(matches!(assign(&data, &bad), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn select_best_breaks_ties_by_restart() {
        let data = m(&[[0.0, 0.0], [1.0, 1.0]]);
        let mut a = kmeans_trial(&data, 1, &KMeansParams::default(), 3).unwrap();
        let mut b = a.clone();
        b.chosen_restart = 1;
        a.chosen_restart = 3;
        let best = select_best([a.clone(), b.clone()]).unwrap();
        assert_eq!(best.chosen_restart, 1);
        let best = select_best([b, a]).unwrap();
        assert_eq!(best.chosen_restart, 1);
    }

    #[test]
    fn params_validation() {
        let p = KMeansParams {
            restarts: 0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        let p = KMeansParams {
            rel_tol: -1.0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
    }
}
