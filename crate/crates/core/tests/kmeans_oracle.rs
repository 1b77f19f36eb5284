use actpath_core::kmeans::{
    assign, inertia_of, kmeans_fit, kmeans_fit_traced, kmeanspp_indices, lloyd_traced,
    KMeansParams,
};
use actpath_core::matrix::squared_distance;
use actpath_core::rng::{Gaussian, SplitMix64};
use actpath_core::Matrix;
use proptest::prelude::*;

/// Global optimum of the k-means objective by enumerating every assignment
/// of rows to k non-empty clusters.
fn exhaustive_optimum(data: &Matrix, k: usize) -> f64 {
    let n = data.rows();
    let d = data.cols();
    let mut labels = vec![0usize; n];
    let mut best = f64::INFINITY;
    loop {
        let mut sizes = vec![0usize; k];
        for &l in &labels {
            sizes[l] += 1;
        }
        if sizes.iter().all(|&s| s > 0) {
            let mut means = vec![vec![0.0; d]; k];
            for (i, &l) in labels.iter().enumerate() {
                for (m, v) in means[l].iter_mut().zip(data.row(i)) {
                    *m += v;
                }
            }
            for (m, &s) in means.iter_mut().zip(&sizes) {
                m.iter_mut().for_each(|x| *x /= s as f64);
            }
            let cost: f64 = (0..n).map(|i| squared_distance(data.row(i), &means[labels[i]])).sum();
            best = best.min(cost);
        }
        // next assignment in base k
        let mut i = 0;
        while i < n {
            labels[i] += 1;
            if labels[i] < k {
                break;
            }
            labels[i] = 0;
            i += 1;
        }
        if i == n {
            return best;
        }
    }
}

fn random_matrix(rng: &mut SplitMix64, rows: usize, cols: usize) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.next_f64() * 10.0 - 5.0).collect();
    Matrix::new(rows, cols, data).unwrap()
}

#[test]
fn exhaustive_oracle_on_tiny_instances() {
    let data = Matrix::from_rows(&[[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0]]).unwrap();
    assert!((exhaustive_optimum(&data, 2) - 1.0).abs() < 1e-12);
    let fit = kmeans_fit(&data, 2, &KMeansParams::default()).unwrap();
    assert!((fit.inertia - 1.0).abs() < 1e-12);
}

#[test]
fn within_five_percent_of_global_optimum() {
    let mut rng = SplitMix64::new(2024);
    for case in 0..50 {
        let rows = 3 + rng.below(6);
        let cols = 1 + rng.below(3);
        let k = 1 + rng.below(3);
        let data = random_matrix(&mut rng, rows, cols);
        let params = KMeansParams {
            base_seed: case,
            ..Default::default()
        };
        let fit = kmeans_fit(&data, k, &params).unwrap();
        let opt = exhaustive_optimum(&data, k);
        assert!(fit.inertia >= opt * (1.0 - 1e-9), "case {case}: below optimum");
        assert!(fit.inertia <= 1.05 * opt + 1e-12, "case {case}: {} vs {opt}", fit.inertia);
    }
}

fn planted_blobs(seed: u64, per_cluster: usize, dim: usize, separation: f64) -> (Matrix, Vec<usize>) {
    let mut rng = SplitMix64::new(seed);
    let mut g = Gaussian::new();
    let mut rows = Vec::new();
    let mut truth = Vec::new();
    for c in 0..3 {
        for _ in 0..per_cluster {
            let row: Vec<f64> = (0..dim)
                .map(|j| if j == c { separation } else { 0.0 } + g.sample(&mut rng))
                .collect();
            rows.push(row);
            truth.push(c);
        }
    }
    (Matrix::from_rows(&rows).unwrap(), truth)
}

fn same_partition(a: &[usize], b: &[usize]) -> bool {
    let mut map = std::collections::HashMap::new();
    let mut back = std::collections::HashMap::new();
    a.iter().zip(b).all(|(x, y)| *map.entry(x).or_insert(y) == y && *back.entry(y).or_insert(x) == x)
}

#[test]
fn recovers_planted_gaussians() {
    // Centres on the axes at distance 10 from the origin: pairwise 10*sqrt(2).
    let (data, truth) = planted_blobs(17, 100, 8, 10.0);
    let fit = kmeans_fit(&data, 3, &KMeansParams::default()).unwrap();
    assert!(same_partition(&fit.assignments, &truth));
}

#[test]
fn deterministic_bit_for_bit() {
    let (data, _) = planted_blobs(3, 40, 4, 6.0);
    let p = KMeansParams {
        base_seed: 77,
        ..Default::default()
    };
    let a = kmeans_fit(&data, 5, &p).unwrap();
    let b = kmeans_fit(&data, 5, &p).unwrap();
    assert_eq!(a, b);
    for (x, y) in a.centroids.as_slice().iter().zip(b.centroids.as_slice()) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
}

#[test]
fn returned_inertia_is_min_over_restarts() {
    let mut rng = SplitMix64::new(5);
    let data = random_matrix(&mut rng, 60, 3);
    let (fit, trace) = kmeans_fit_traced(&data, 6, &KMeansParams::default()).unwrap();
    assert_eq!(trace.len(), 10);
    let min = trace.iter().copied().fold(f64::INFINITY, f64::min);
    assert_eq!(fit.inertia, min);
    let first = trace.iter().position(|&t| t == min).unwrap();
    assert_eq!(fit.chosen_restart, first);
}

#[test]
fn kmeanspp_separated_groups_monte_carlo() {
    let data = Matrix::from_rows(&[[0.0, 0.0], [0.0, 1.0], [100.0, 0.0], [100.0, 1.0]]).unwrap();
    // Direct probability that the second pick lands in the first pick's
    // group: by symmetry every first pick sees d² = 1 to its partner and
    // 10000, 10001 to the other group.
    let p_same = 1.0 / (1.0 + 10_000.0 + 10_001.0);
    let expected_failures = 100.0 * p_same;
    assert!(expected_failures < 0.01);
    let mut both = 0;
    for seed in 0..100 {
        let idx = kmeanspp_indices(&data, 2, &mut SplitMix64::new(seed)).unwrap();
        let groups: std::collections::BTreeSet<usize> = idx.iter().map(|&i| i / 2).collect();
        if groups.len() == 2 {
            both += 1;
        }
    }
    assert!(both >= 99, "{both}");
}

#[test]
fn assign_matches_exhaustive_scan() {
    let mut rng = SplitMix64::new(8);
    let data = random_matrix(&mut rng, 20, 3);
    let cents = random_matrix(&mut rng, 4, 3);
    let got = assign(&data, &cents).unwrap();
    for (i, &g) in got.iter().enumerate() {
        let d: Vec<f64> = (0..4)
            .map(|j| (0..3).map(|c| (data.get(i, c) - cents.get(j, c)).powi(2)).sum())
            .collect();
        let mut best = 0;
        for j in 1..4 {
            if d[j] < d[best] {
                best = j;
            }
        }
        assert_eq!(g, best);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lloyd_invariants(seed in any::<u64>(), rows in 2usize..40, cols in 1usize..4, k in 1usize..6) {
        let k = k.min(rows);
        let mut rng = SplitMix64::new(seed);
        let data = random_matrix(&mut rng, rows, cols);
        // Coarse grid values so duplicates and ties occur.
        let data = Matrix::new(rows, cols, data.as_slice().iter().map(|v| v.round()).collect()).unwrap();
        let init_idx = kmeanspp_indices(&data, k, &mut rng).unwrap();
        let mut trace = Vec::new();
        let params = KMeansParams { rel_tol: 0.0, max_iters: 50, ..Default::default() };
        let fit = lloyd_traced(&data, data.select_rows(&init_idx), &params, &mut trace).unwrap();

        for w in trace.windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
        let sizes = fit.cluster_sizes();
        prop_assert!(sizes.iter().all(|&s| s >= 1));
        let recomputed = inertia_of(&data, &fit.centroids, &fit.assignments);
        prop_assert!((recomputed - fit.inertia).abs() <= 1e-9 * fit.inertia.max(1e-300));
        for i in 0..rows {
            let own = squared_distance(data.row(i), fit.centroids.row(fit.assignments[i]));
            for j in 0..k {
                prop_assert!(own <= squared_distance(data.row(i), fit.centroids.row(j)));
            }
        }
    }
}
