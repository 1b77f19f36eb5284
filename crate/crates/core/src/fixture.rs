//! Synthetic activation datasets with planted structure.
//!
//! Cluster centres sit on a lattice with spacing `separation * sigma`, so
//! every pair of centres is at least that far apart, and samples are
//! isotropic Gaussians of standard deviation `sigma` around them. The
//! planted truth (paths, per-instance assignments, outliers, recurrent state
//! sequences) is returned alongside the activations and serves as the
//! ground truth for end-to-end tests.
//!
//! Draw order per planted instance: class, path, outlier coin, then (for
//! outliers) the perturbed column and replacement cluster, then the
//! Gaussian coordinates column by column.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{Gaussian, SplitMix64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedPath {
    pub clusters: Vec<usize>,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureColumn {
    pub k: usize,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureSpec {
    pub classes: usize,
    /// Per class, the planted paths and their mixture weights.
    pub paths: Vec<Vec<PlantedPath>>,
    pub columns: Vec<FixtureColumn>,
    pub separation: f64,
    pub sigma: f64,
    pub instances: usize,
    pub outlier_rate: f64,
    pub seed: u64,
}

impl FixtureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.classes == 0 || self.paths.len() != self.classes {
            return Err(Error::invalid("paths", "one path list per class is required"));
        }
        if self.columns.is_empty() {
            return Err(Error::invalid("columns", "at least one column is required"));
        }
        if self.columns.iter().any(|c| c.k == 0 || c.dim == 0) {
            return Err(Error::invalid("columns", "k and dim must be positive"));
        }
        for (c, paths) in self.paths.iter().enumerate() {
            if paths.is_empty() {
                return Err(Error::invalid("paths", format!("class {c} has no path")));
            }
            let total: f64 = paths.iter().map(|p| p.weight).sum();
            if paths.iter().any(|p| !(p.weight >= 0.0)) || (total - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(
                    "paths",
                    format!("class {c} weights must be non-negative and sum to 1"),
                ));
            }
            for p in paths {
                if p.clusters.len() != self.columns.len()
                    || p.clusters.iter().zip(&self.columns).any(|(&a, col)| a >= col.k)
                {
                    return Err(Error::invalid(
                        "paths",
                        format!("class {c}: path {:?} does not fit the columns", p.clusters),
                    ));
                }
            }
        }
        check_scale(self.separation, self.sigma)?;
        if !(0.0..1.0).contains(&self.outlier_rate) {
            return Err(Error::invalid("outlier_rate", "must lie in [0, 1)"));
        }
        if self.outlier_rate > 0.0 && self.columns.iter().all(|c| c.k < 2) {
            return Err(Error::invalid(
                "outlier_rate",
                "outliers need a column with at least two clusters",
            ));
        }
        Ok(())
    }
}

fn check_scale(separation: f64, sigma: f64) -> Result<()> {
    if !(separation > 0.0) || !separation.is_finite() {
        return Err(Error::invalid("separation", "must be positive"));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::invalid("sigma", "must be positive"));
    }
    Ok(())
}

/// `k` centres on the integer lattice `{0..m}^dim` scaled by `spacing`,
/// where `m` is the smallest side with `m^dim >= k`. Centre `j` takes the
/// base-`m` digits of `j` as its coordinates, least significant first.
pub fn lattice_centers(k: usize, dim: usize, spacing: f64) -> Result<Matrix> {
    if k == 0 || dim == 0 {
        return Err(Error::invalid("lattice", "k and dim must be positive"));
    }
    let mut side = 1usize;
    while (0..dim).try_fold(1usize, |acc, _| acc.checked_mul(side)).is_some_and(|cap| cap < k) {
        side += 1;
    }
    let mut centers = Matrix::zeros(k, dim);
    for j in 0..k {
        let mut rest = j;
        for v in centers.row_mut(j) {
            *v = (rest % side) as f64 * spacing;
            rest /= side;
        }
    }
    Ok(centers)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedOutlier {
    pub instance: usize,
    /// Index of the instance's path within its class.
    pub path: usize,
    pub column: usize,
    pub planted: usize,
    pub swapped_to: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedTruth {
    pub seed: u64,
    pub paths: Vec<Vec<PlantedPath>>,
    pub classes: Vec<usize>,
    pub path_ids: Vec<usize>,
    /// Per column, the centre each instance was sampled around.
    pub assignments: Vec<Vec<usize>>,
    pub outliers: Vec<PlantedOutlier>,
    pub centers: Vec<Matrix>,
}

impl PlantedTruth {
    /// Number of instances drawn for each (class, path).
    pub fn path_counts(&self) -> Vec<Vec<usize>> {
        let mut counts: Vec<Vec<usize>> = self.paths.iter().map(|p| vec![0; p.len()]).collect();
        for (&c, &p) in self.classes.iter().zip(&self.path_ids) {
            counts[c][p] += 1;
        }
        counts
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedDataset {
    pub layers: Vec<Matrix>,
    pub truth: PlantedTruth,
}

pub fn gen_planted(spec: &FixtureSpec) -> Result<PlantedDataset> {
    spec.validate()?;
    let spacing = spec.separation * spec.sigma;
    let centers = spec
        .columns
        .iter()
        .map(|c| lattice_centers(c.k, c.dim, spacing))
        .collect::<Result<Vec<_>>>()?;
    let eligible: Vec<usize> = (0..spec.columns.len()).filter(|&c| spec.columns[c].k >= 2).collect();
    let weights: Vec<Vec<f64>> = spec
        .paths
        .iter()
        .map(|ps| ps.iter().map(|p| p.weight).collect())
        .collect();

    let mut rng = SplitMix64::new(spec.seed);
    let mut gauss = Gaussian::new();
    let n = spec.instances;
    let mut layers: Vec<Matrix> = spec.columns.iter().map(|c| Matrix::zeros(n, c.dim)).collect();
    let mut classes = Vec::with_capacity(n);
    let mut path_ids = Vec::with_capacity(n);
    let mut assignments: Vec<Vec<usize>> = vec![Vec::with_capacity(n); spec.columns.len()];
    let mut outliers = Vec::new();

    for i in 0..n {
        let class = rng.below(spec.classes);
        let path = rng
            .weighted_index(&weights[class])
            .expect("weights sum to one");
        let mut seq = spec.paths[class][path].clusters.clone();
        if rng.next_f64() < spec.outlier_rate {
            let column = eligible[rng.below(eligible.len())];
            let planted = seq[column];
            let mut other = rng.below(spec.columns[column].k - 1);
            if other >= planted {
                other += 1;
            }
            seq[column] = other;
            outliers.push(PlantedOutlier {
                instance: i,
                path,
                column,
                planted,
                swapped_to: other,
            });
        }
        for (col, &cluster) in seq.iter().enumerate() {
            let center = centers[col].row(cluster);
            for (v, &m) in layers[col].row_mut(i).iter_mut().zip(center) {
                *v = m + spec.sigma * gauss.sample(&mut rng);
            }
            assignments[col].push(cluster);
        }
        classes.push(class);
        path_ids.push(path);
    }

    Ok(PlantedDataset {
        layers,
        truth: PlantedTruth {
            seed: spec.seed,
            paths: spec.paths.clone(),
            classes,
            path_ids,
            assignments,
            outliers,
            centers,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrentFixtureSpec {
    pub classes: usize,
    pub states: usize,
    pub dim: usize,
    pub separation: f64,
    pub sigma: f64,
    pub instances: usize,
    /// Sequence lengths are uniform in `[min_length, max_length]`.
    pub min_length: usize,
    pub max_length: usize,
    /// Per class, the distribution of the first state.
    pub initial: Vec<Vec<f64>>,
    /// Per class and state, the distribution of the next state.
    pub transitions: Vec<Vec<Vec<f64>>>,
    pub seed: u64,
}

impl RecurrentFixtureSpec {
    /// Every class starts in state 0 and, with probability `fidelity`,
    /// steps from state `s` to `(s + class + 1) % states`; otherwise it
    /// jumps to a uniformly random state.
    pub fn cyclic(
        classes: usize,
        states: usize,
        dim: usize,
        instances: usize,
        lengths: (usize, usize),
        fidelity: f64,
        seed: u64,
    ) -> Self {
        let jump = (1.0 - fidelity) / states as f64;
        let transitions = (0..classes)
            .map(|c| {
                (0..states)
                    .map(|s| {
                        let mut row = vec![jump; states];
                        row[(s + c + 1) % states] += fidelity;
                        row
                    })
                    .collect()
            })
            .collect();
        let mut start = vec![0.0; states];
        start[0] = 1.0;
        Self {
            classes,
            states,
            dim,
            separation: 10.0,
            sigma: 1.0,
            instances,
            min_length: lengths.0,
            max_length: lengths.1,
            initial: vec![start; classes],
            transitions,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.classes == 0 || self.states == 0 || self.dim == 0 {
            return Err(Error::invalid("spec", "classes, states and dim must be positive"));
        }
        if self.min_length == 0 || self.min_length > self.max_length {
            return Err(Error::invalid("lengths", "need 1 <= min_length <= max_length"));
        }
        check_scale(self.separation, self.sigma)?;
        let check_dist = |row: &[f64], what: &'static str| -> Result<()> {
            let total: f64 = row.iter().sum();
            if row.len() != self.states || row.iter().any(|p| !(*p >= 0.0)) || (total - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(what, "each row must be a distribution over the states"));
            }
            Ok(())
        };
        if self.initial.len() != self.classes || self.transitions.len() != self.classes {
            return Err(Error::invalid("transitions", "one table per class is required"));
        }
        for c in 0..self.classes {
            check_dist(&self.initial[c], "initial")?;
            if self.transitions[c].len() != self.states {
                return Err(Error::invalid("transitions", "one row per state is required"));
            }
            for row in &self.transitions[c] {
                check_dist(row, "transitions")?;
            }
        }
        Ok(())
    }

    /// Per class, the sequence obtained by always taking the most likely
    /// state (lowest index on ties), `max_length` steps long.
    pub fn dominant_sequences(&self) -> Vec<Vec<usize>> {
        let argmax = |row: &[f64]| {
            let mut best = 0;
            for (i, &p) in row.iter().enumerate() {
                if p > row[best] {
                    best = i;
                }
            }
            best
        };
        (0..self.classes)
            .map(|c| {
                let mut s = argmax(&self.initial[c]);
                let mut seq = vec![s];
                while seq.len() < self.max_length {
                    s = argmax(&self.transitions[c][s]);
                    seq.push(s);
                }
                seq
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrentTruth {
    pub seed: u64,
    pub classes: Vec<usize>,
    pub lengths: Vec<usize>,
    pub states: Vec<Vec<usize>>,
    pub dominant: Vec<Vec<usize>>,
    pub centers: Matrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecurrentDataset {
    /// All time-steps of all instances, instance-major.
    pub activations: Matrix,
    pub truth: RecurrentTruth,
}

pub fn gen_recurrent(spec: &RecurrentFixtureSpec) -> Result<RecurrentDataset> {
    spec.validate()?;
    let centers = lattice_centers(spec.states, spec.dim, spec.separation * spec.sigma)?;
    let mut rng = SplitMix64::new(spec.seed);
    let mut gauss = Gaussian::new();
    let mut classes = Vec::with_capacity(spec.instances);
    let mut lengths = Vec::with_capacity(spec.instances);
    let mut states = Vec::with_capacity(spec.instances);
    let mut data = Vec::new();
    for _ in 0..spec.instances {
        let class = rng.below(spec.classes);
        let len = spec.min_length + rng.below(spec.max_length - spec.min_length + 1);
        let mut s = rng.weighted_index(&spec.initial[class]).expect("valid distribution");
        let mut seq = Vec::with_capacity(len);
        for t in 0..len {
            if t > 0 {
                s = rng
                    .weighted_index(&spec.transitions[class][s])
                    .expect("valid distribution");
            }
            seq.push(s);
            for &m in centers.row(s) {
                data.push(m + spec.sigma * gauss.sample(&mut rng));
            }
        }
        classes.push(class);
        lengths.push(len);
        states.push(seq);
    }
    let rows = data.len() / spec.dim;
    Ok(RecurrentDataset {
        activations: Matrix::new(rows, spec.dim, data)?,
        truth: RecurrentTruth {
            seed: spec.seed,
            classes,
            lengths,
            states,
            dominant: spec.dominant_sequences(),
            centers,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kmeans::assign;
    use crate::matrix::squared_distance;

    pub(crate) fn two_path_spec(seed: u64, instances: usize, outlier_rate: f64) -> FixtureSpec {
        let p = |a: usize, b: usize, w: f64| PlantedPath {
            clusters: vec![a, b],
            weight: w,
        };
        FixtureSpec {
            classes: 3,
            paths: vec![
                vec![p(0, 0, 0.7), p(1, 1, 0.3)],
                vec![p(2, 2, 0.7), p(3, 3, 0.3)],
                vec![p(4, 1, 0.7), p(5, 2, 0.3)],
            ],
            columns: vec![FixtureColumn { k: 6, dim: 8 }, FixtureColumn { k: 4, dim: 8 }],
            separation: 10.0,
            sigma: 1.0,
            instances,
            outlier_rate,
            seed,
        }
    }

    #[test]
    fn lattice_is_separated() {
        for (k, dim) in [(6, 8), (10, 2), (30, 3), (1, 4), (7, 1)] {
            let c = lattice_centers(k, dim, 10.0).unwrap();
            for i in 0..k {
                for j in i + 1..k {
                    assert!(squared_distance(c.row(i), c.row(j)) >= 100.0 - 1e-9);
                }
            }
        }
    }

    #[test]
    fn single_path_instances_follow_their_class() {
        let p = |a: usize, b: usize| PlantedPath {
            clusters: vec![a, b],
            weight: 1.0,
        };
        let spec = FixtureSpec {
            classes: 2,
            paths: vec![vec![p(0, 1)], vec![p(1, 0)]],
            columns: vec![FixtureColumn { k: 2, dim: 3 }, FixtureColumn { k: 2, dim: 3 }],
            separation: 10.0,
            sigma: 1.0,
            instances: 500,
            outlier_rate: 0.0,
            seed: 5,
        };
        let data = gen_planted(&spec).unwrap();
        for col in 0..2 {
            let nearest = assign(&data.layers[col], &data.truth.centers[col]).unwrap();
            for (&got, &class) in nearest.iter().zip(&data.truth.classes) {
                assert_eq!(got, spec.paths[class][0].clusters[col]);
            }
        }
        assert!(data.truth.outliers.is_empty());
    }

    #[test]
    fn nearest_centres_reproduce_planted_assignments() {
        let spec = two_path_spec(42, 3000, 0.005);
        let data = gen_planted(&spec).unwrap();
        for col in 0..2 {
            let nearest = assign(&data.layers[col], &data.truth.centers[col]).unwrap();
            assert_eq!(nearest, data.truth.assignments[col]);
        }
        for o in &data.truth.outliers {
            assert_ne!(o.planted, o.swapped_to);
            assert_eq!(data.truth.assignments[o.column][o.instance], o.swapped_to);
        }
    }

    #[test]
    fn path_counts_within_binomial_bound() {
        let n = 3000;
        let data = gen_planted(&two_path_spec(42, n, 0.0)).unwrap();
        let counts = data.truth.path_counts();
        // 3-sigma bound around the expected counts, using the sidecar's own
        // class sizes (classes are drawn uniformly first).
        for class_counts in counts {
            let size: usize = class_counts.iter().sum();
            let bound = 3.0 * (size as f64 * 0.7 * 0.3).sqrt();
            assert!((class_counts[0] as f64 - 0.7 * size as f64).abs() <= bound);
            assert!((class_counts[1] as f64 - 0.3 * size as f64).abs() <= bound);
        }
        // The overall bound quoted for N = 3000 draws.
        let all: usize = data.truth.path_ids.iter().filter(|&&p| p == 0).count();
        assert!((all as f64 - 2100.0).abs() <= 3.0 * (3000.0f64 * 0.21).sqrt());
    }

    #[test]
    fn deterministic_given_seed() {
        let a = gen_planted(&two_path_spec(9, 200, 0.05)).unwrap();
        let b = gen_planted(&two_path_spec(9, 200, 0.05)).unwrap();
        assert_eq!(a, b);
        let c = gen_planted(&two_path_spec(10, 200, 0.05)).unwrap();
        assert_ne!(a.layers, c.layers);
    }

    #[test]
    fn spec_validation() {
        let mut s = two_path_spec(1, 10, 0.0);
        s.paths[0][0].weight = 0.5;
        assert!(gen_planted(&s).is_err());
        let mut s = two_path_spec(1, 10, 0.0);
        s.paths[1][0].clusters = vec![9, 0];
        assert!(gen_planted(&s).is_err());
        let mut s = two_path_spec(1, 10, 0.0);
        s.separation = 0.0;
        assert!(gen_planted(&s).is_err());
        let mut s = two_path_spec(1, 10, 0.0);
        s.outlier_rate = 1.0;
        assert!(gen_planted(&s).is_err());
    }

    #[test]
    fn recurrent_states_and_lengths() {
        let spec = RecurrentFixtureSpec::cyclic(3, 10, 8, 300, (20, 30), 0.98, 4);
        let data = gen_recurrent(&spec).unwrap();
        assert_eq!(data.activations.rows(), data.truth.lengths.iter().sum::<usize>());
        assert!(data.truth.lengths.iter().all(|&l| (20..=30).contains(&l)));
        assert_eq!(&data.truth.dominant[1][..4], &[0, 2, 4, 6]);
        let nearest = assign(&data.activations, &data.truth.centers).unwrap();
        let flat: Vec<usize> = data.truth.states.iter().flatten().copied().collect();
        assert_eq!(nearest, flat);
    }
}
