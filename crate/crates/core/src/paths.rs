//! Decision paths and rare transitions.
//!
//! A decision path is the exact sequence of clusters an instance visits over
//! the clustered columns, paired with the instance's class. Coverage is
//! always relative to the class: the fraction of that class's instances
//! following the path (or crossing the edge).

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{FlowGraph, InstanceClasses, Track};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionPath {
    pub class: usize,
    pub clusters: Vec<usize>,
    pub count: u64,
    /// Instances of `class` with a complete sequence.
    pub class_size: u64,
    pub coverage: f64,
    pub sample_instance_ids: Vec<usize>,
}

fn check_tracks(tracks: &[Track], classes: &InstanceClasses, mask: Option<&[bool]>) -> Result<usize> {
    let n = classes.len();
    if tracks.is_empty() {
        return Err(Error::invalid("tracks", "no clustered columns"));
    }
    for t in tracks {
        if t.len() != n {
            return Err(Error::RowMismatch {
                what: "assignments vs. labels".into(),
                expected: n,
                found: t.len(),
            });
        }
    }
    if let Some(m) = mask {
        if m.len() != n {
            return Err(Error::RowMismatch {
                what: "filter mask".into(),
                expected: n,
                found: m.len(),
            });
        }
    }
    if classes.classes.iter().any(|&c| c >= classes.count()) {
        return Err(Error::Label("class index out of range".into()));
    }
    Ok(n)
}

fn sequence_of(tracks: &[Track], i: usize) -> Option<Vec<usize>> {
    tracks.iter().map(|t| t[i]).collect()
}

/// Every distinct (class, cluster sequence) with its count and coverage.
///
/// Instances missing from any column (recurrent sequences shorter than the
/// window) are skipped and do not count towards the class size. Output is
/// grouped by class; within a class, paths run by descending coverage, then
/// by lexicographic sequence.
pub fn mine_paths(
    tracks: &[Track],
    classes: &InstanceClasses,
    mask: Option<&[bool]>,
    sample_cap: usize,
) -> Result<Vec<DecisionPath>> {
    let n = check_tracks(tracks, classes, mask)?;
    let mut groups: BTreeMap<(usize, Vec<usize>), (u64, Vec<usize>)> = BTreeMap::new();
    let mut class_sizes = vec![0u64; classes.count()];
    for i in 0..n {
        if mask.is_some_and(|m| !m[i]) {
            continue;
        }
        let Some(seq) = sequence_of(tracks, i) else {
            continue;
        };
        let c = classes.classes[i];
        class_sizes[c] += 1;
        let entry = groups.entry((c, seq)).or_default();
        entry.0 += 1;
        if entry.1.len() < sample_cap {
            entry.1.push(i);
        }
    }
    let mut paths: Vec<DecisionPath> = groups
        .into_iter()
        .map(|((class, clusters), (count, samples))| DecisionPath {
            class,
            clusters,
            count,
            class_size: class_sizes[class],
            coverage: count as f64 / class_sizes[class] as f64,
            sample_instance_ids: samples,
        })
        .collect();
    sort_paths(&mut paths);
    Ok(paths)
}

/// Class ascending, then count (equivalently coverage) descending, then
/// sequence ascending.
pub fn sort_paths(paths: &mut [DecisionPath]) {
    paths.sort_by(|a, b| {
        a.class
            .cmp(&b.class)
            .then(b.coverage.total_cmp(&a.coverage))
            .then_with(|| a.clusters.cmp(&b.clusters))
    });
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathSelection {
    /// The `n` most covering paths of each class.
    Top(usize),
    /// Paths with coverage at or above the threshold.
    MinCoverage(f64),
}

/// Keeps the selected paths of each class, preserving input order.
pub fn top_paths(paths: &[DecisionPath], selection: PathSelection) -> Vec<DecisionPath> {
    let mut taken: BTreeMap<usize, usize> = BTreeMap::new();
    paths
        .iter()
        .filter(|p| match selection {
            PathSelection::MinCoverage(theta) => p.coverage >= theta,
            PathSelection::Top(n) => {
                let t = taken.entry(p.class).or_default();
                *t += 1;
                *t <= n
            }
        })
        .cloned()
        .collect()
}

/// Combined coverage of the given paths of `class`, computed from the
/// integer counts as `Σ count / class_size`.
pub fn class_coverage(paths: &[DecisionPath], class: usize) -> f64 {
    let mut count = 0u64;
    let mut size = 0u64;
    for p in paths.iter().filter(|p| p.class == class) {
        count += p.count;
        size = p.class_size;
    }
    if size == 0 {
        0.0
    } else {
        count as f64 / size as f64
    }
}

/// Exact ids of the instances following `path`, by full scan.
pub fn path_instances(
    path: &DecisionPath,
    tracks: &[Track],
    classes: &InstanceClasses,
    mask: Option<&[bool]>,
) -> Result<Vec<usize>> {
    let n = check_tracks(tracks, classes, mask)?;
    if path.clusters.len() != tracks.len() {
        return Err(Error::DimensionMismatch {
            expected: tracks.len(),
            found: path.clusters.len(),
        });
    }
    Ok((0..n)
        .filter(|&i| mask.is_none_or(|m| m[i]))
        .filter(|&i| {
            classes.classes[i] == path.class
                && tracks
                    .iter()
                    .zip(&path.clusters)
                    .all(|(t, &c)| t[i] == Some(c))
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RareTransition {
    pub pair: usize,
    pub src: usize,
    pub dst: usize,
    /// `dst` is a class index rather than a cluster.
    pub dst_is_class: bool,
    /// Class of the instances on this edge.
    pub class: usize,
    pub src_dominant: Option<usize>,
    pub count: u64,
    /// Flow of `class` through the same column pair.
    pub class_size: u64,
    pub coverage: f64,
    /// For cluster-to-class edges: whether `dst` differs from the source
    /// cluster's dominant class.
    pub mismatch: Option<bool>,
    pub sample_instance_ids: Vec<usize>,
}

/// Class-keyed edges with `0 < coverage < threshold`, rarest first.
pub fn rare_transitions(flows: &FlowGraph, threshold: f64) -> Vec<RareTransition> {
    let mut out = Vec::new();
    for (p, pair) in flows.pairs.iter().enumerate() {
        let dst_is_class = flows.plan.columns[pair.right].is_class();
        for e in &pair.edges {
            let size = pair.class_totals[e.class];
            if e.count == 0 || size == 0 {
                continue;
            }
            let coverage = e.count as f64 / size as f64;
            if coverage >= threshold {
                continue;
            }
            let src_dominant = flows.dominant_of(pair.left, e.src).map(|d| d.class);
            out.push(RareTransition {
                pair: p,
                src: e.src,
                dst: e.dst,
                dst_is_class,
                class: e.class,
                src_dominant,
                count: e.count,
                class_size: size,
                coverage,
                mismatch: if dst_is_class {
                    src_dominant.map(|d| d != e.dst)
                } else {
                    None
                },
                sample_instance_ids: e.samples.clone(),
            });
        }
    }
    out.sort_by(|a, b| {
        a.coverage
            .total_cmp(&b.coverage)
            .then((a.pair, a.src, a.dst, a.class).cmp(&(b.pair, b.src, b.dst, b.class)))
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{build_flows, ClassColumn, ClassSource, Column, ColumnPlan, FlowOptions};
    use alloc::string::{String, ToString};

    fn classes(cs: &[usize], k: usize) -> InstanceClasses {
        InstanceClasses {
            names: (0..k).map(|i| i.to_string()).collect::<Vec<String>>(),
            classes: cs.to_vec(),
            source: ClassSource::True,
        }
    }

    fn track(a: &[usize]) -> Track {
        a.iter().map(|&x| Some(x)).collect()
    }

    fn path(class: usize, clusters: &[usize], count: u64, class_size: u64) -> DecisionPath {
        DecisionPath {
            class,
            clusters: clusters.to_vec(),
            count,
            class_size,
            coverage: count as f64 / class_size as f64,
            sample_instance_ids: Vec::new(),
        }
    }

    #[test]
    fn uniform_class_has_one_full_path() {
        let cl = classes(&[0; 5], 1);
        let p = mine_paths(&[track(&[2; 5]), track(&[1; 5])], &cl, None, 8).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].coverage, 1.0);
        assert_eq!(p[0].clusters, vec![2, 1]);
    }

    #[test]
    fn sorted_by_coverage_then_sequence() {
        let cl = classes(&[0, 0, 0, 0, 1], 2);
        let p = mine_paths(&[track(&[1, 0, 1, 2, 0]), track(&[0, 0, 0, 0, 0])], &cl, None, 8).unwrap();
        let seqs: Vec<(usize, Vec<usize>, u64)> =
            p.iter().map(|p| (p.class, p.clusters.clone(), p.count)).collect();
        assert_eq!(
            seqs,
            vec![
                (0, vec![1, 0], 2),
                (0, vec![0, 0], 1),
                (0, vec![2, 0], 1),
                (1, vec![0, 0], 1)
            ]
        );
        assert_eq!(p[0].sample_instance_ids, vec![0, 2]);
    }

    #[test]
    fn incomplete_sequences_are_skipped() {
        let cl = classes(&[0, 0, 0], 1);
        let t0 = vec![Some(0), Some(0), Some(1)];
        let t1 = vec![Some(1), None, Some(1)];
        let p = mine_paths(&[t0, t1], &cl, None, 8).unwrap();
        assert_eq!(p.iter().map(|p| p.class_size).max(), Some(2));
        assert_eq!(p.iter().map(|p| p.count).sum::<u64>(), 2);
    }

    #[test]
    fn published_path_table_accounting() {
        // Class 0 of a 1000-instance class: the four published rows.
        let rows = [(17, 270), (15, 249), (8, 222), (23, 232)];
        let mut paths: Vec<DecisionPath> =
            rows.iter().map(|&(c, n)| path(0, &[c, 7], n, 1000)).collect();
        assert_eq!(class_coverage(&paths, 0), 0.973);
        sort_paths(&mut paths);
        let order: Vec<f64> = paths.iter().map(|p| p.coverage).collect();
        assert_eq!(order, vec![0.270, 0.249, 0.232, 0.222]);
        let kept = top_paths(&paths, PathSelection::MinCoverage(0.25));
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].coverage, 0.270);
        assert_eq!(top_paths(&paths, PathSelection::MinCoverage(0.0)), paths);
    }

    #[test]
    fn top_n_per_class() {
        let paths = vec![path(0, &[0], 5, 10), path(0, &[1], 3, 10), path(0, &[2], 2, 10), path(1, &[0], 1, 1)];
        let kept = top_paths(&paths, PathSelection::Top(2));
        assert_eq!(kept.len(), 3);
        assert_eq!(kept[1].clusters, vec![1]);
        assert_eq!(kept[2].class, 1);
    }

    #[test]
    fn single_instance_path_lookup() {
        let cl = classes(&[0, 1, 0], 2);
        let tracks = [track(&[0, 0, 1])];
        let paths = mine_paths(&tracks, &cl, None, 8).unwrap();
        let lone = paths.iter().find(|p| p.class == 0 && p.clusters == [1]).unwrap();
        assert_eq!(path_instances(lone, &tracks, &cl, None).unwrap(), vec![2]);
    }

    #[test]
    fn rare_class_edge_flags_mismatch() {
        // 20 instances of class 6 and one of class 0 sit in cluster 3.
        let n = 21;
        let mut cs = vec![6usize; n];
        cs[20] = 0;
        let cl = classes(&cs, 10);
        let plan = ColumnPlan {
            columns: vec![
                Column::Clusters { name: "h".to_string(), k: 4 },
                Column::Classes(ClassColumn { count: 10, source: ClassSource::True }),
            ],
            window: None,
        };
        let g = build_flows(&[track(&vec![3; n])], &plan, &cl, &cl, &FlowOptions::default()).unwrap();
        let rare = rare_transitions(&g, 0.5);
        assert!(rare.is_empty(), "a lone instance is its whole class");

        // Give class 0 a common edge elsewhere so the stray edge is rare.
        let mut cs = cs.clone();
        let mut t = vec![3usize; n];
        cs.extend(core::iter::repeat_n(0, 999));
        t.extend(core::iter::repeat_n(1, 999));
        let cl = classes(&cs, 10);
        let g = build_flows(&[track(&t)], &plan, &cl, &cl, &FlowOptions::default()).unwrap();
        let rare = rare_transitions(&g, 0.005);
        assert_eq!(rare.len(), 1);
        let r = &rare[0];
        assert_eq!((r.src, r.dst, r.class, r.src_dominant), (3, 0, 0, Some(6)));
        assert_eq!(r.mismatch, Some(true));
        assert_eq!(r.coverage, 0.001);
        assert_eq!(r.sample_instance_ids, vec![20]);
        assert!(rare_transitions(&g, 0.0).is_empty());
    }
}
