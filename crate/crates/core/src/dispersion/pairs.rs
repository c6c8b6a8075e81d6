use std::collections::HashMap;

use rayon::prelude::*;

use super::Edge;
use crate::geometry::Dataset;
use crate::{Error, Result};

/// Number of leading coordinates used to key grid cells.
const GRID_AXES: usize = 3;
/// Below this size the grid costs more than it saves.
const GRID_MIN_POINTS: usize = 64;

pub(crate) fn check_radius(beta: f64, r: f64) -> Result<f64> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::param(format!("beta must be positive and finite, got {beta}")));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::param(format!("r must be positive and finite, got {r}")));
    }
    Ok(beta * r)
}

/// `N_β`: unordered pairs `i < j` with `dist(x_i, x_j) ≤ β·r`.
pub fn count_near_pairs(ds: &Dataset, beta: f64, r: f64) -> Result<u64> {
    let threshold = check_radius(beta, r)?;
    Ok(if ds.len() >= GRID_MIN_POINTS {
        fold_grid(ds, threshold, 0u64, |acc, _, _, _| *acc += 1, |a, b| a + b)
    } else {
        fold_bruteforce(ds, threshold, 0u64, |acc, _, _, _| *acc += 1, |a, b| a + b)
    })
}

/// The `O(n²)` reference path for [`count_near_pairs`].
pub fn count_near_pairs_bruteforce(ds: &Dataset, beta: f64, r: f64) -> Result<u64> {
    let threshold = check_radius(beta, r)?;
    Ok(fold_bruteforce(ds, threshold, 0u64, |acc, _, _, _| *acc += 1, |a, b| a + b))
}

/// Grid-bucketed path for [`count_near_pairs`]; always exact.
pub fn count_near_pairs_grid(ds: &Dataset, beta: f64, r: f64) -> Result<u64> {
    let threshold = check_radius(beta, r)?;
    Ok(fold_grid(ds, threshold, 0u64, |acc, _, _, _| *acc += 1, |a, b| a + b))
}

/// Edges `(i, j)`, `i < j`, of the graph joining points within `β·r`, sorted.
pub fn near_graph(ds: &Dataset, beta: f64, r: f64) -> Result<Vec<Edge>> {
    let threshold = check_radius(beta, r)?;
    let mut edges = fold_grid(
        ds,
        threshold,
        Vec::new(),
        |acc: &mut Vec<Edge>, i, j, _| acc.push((i, j)),
        |mut a, mut b| {
            a.append(&mut b);
            a
        },
    );
    edges.sort_unstable();
    Ok(edges)
}

/// Folds `visit(acc, i, j, dist)` over all pairs `i < j` with `dist ≤ threshold`.
pub(crate) fn fold_near_pairs<A, V, M>(ds: &Dataset, threshold: f64, init: A, visit: V, merge: M) -> A
where
    A: Clone + Send + Sync,
    V: Fn(&mut A, usize, usize, f64) + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    if ds.len() >= GRID_MIN_POINTS {
        fold_grid(ds, threshold, init, visit, merge)
    } else {
        fold_bruteforce(ds, threshold, init, visit, merge)
    }
}

fn fold_bruteforce<A, V, M>(ds: &Dataset, threshold: f64, init: A, visit: V, merge: M) -> A
where
    A: Clone + Send + Sync,
    V: Fn(&mut A, usize, usize, f64) + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    let n = ds.len();
    (0..n)
        .into_par_iter()
        .fold(
            || init.clone(),
            |mut acc, i| {
                let pi = ds.point(i);
                for j in i + 1..n {
                    let d = ds.metric().dist(pi, ds.point(j));
                    if d <= threshold {
                        visit(&mut acc, i, j, d);
                    }
                }
                acc
            },
        )
        .reduce(|| init.clone(), &merge)
}

type CellKey = [i64; GRID_AXES];

fn fold_grid<A, V, M>(ds: &Dataset, threshold: f64, init: A, visit: V, merge: M) -> A
where
    A: Clone + Send + Sync,
    V: Fn(&mut A, usize, usize, f64) + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    // A coordinate gap ≤ threshold keeps cell indices within ±1 of each other under both
    // ℓ1 and ℓ2. The slack absorbs rounding in the division; larger cells stay exact.
    let side = threshold * (1.0 + 1e-9);
    let axes = ds.dim().min(GRID_AXES);
    let key_of = |p: &[f64]| -> CellKey {
        let mut key = [0i64; GRID_AXES];
        for a in 0..axes {
            key[a] = (p[a] / side).floor() as i64;
        }
        key
    };

    let mut cells: HashMap<CellKey, Vec<usize>> = HashMap::new();
    for (i, p) in ds.points().enumerate() {
        cells.entry(key_of(p)).or_default().push(i);
    }
    let mut keys: Vec<CellKey> = cells.keys().copied().collect();
    keys.sort_unstable();

    let offsets = neighbour_offsets(axes);
    let metric = ds.metric();
    keys.par_iter()
        .fold(
            || init.clone(),
            |mut acc, key| {
                let here = &cells[key];
                for &off in &offsets {
                    let mut other = *key;
                    for a in 0..axes {
                        other[a] = other[a].saturating_add(off[a]);
                    }
                    // each unordered cell pair once: the lexicographically smaller cell owns it
                    if other < *key {
                        continue;
                    }
                    let Some(there) = cells.get(&other) else { continue };
                    let same = other == *key;
                    for (pos, &i) in here.iter().enumerate() {
                        let pi = ds.point(i);
                        let rest = if same { &there[pos + 1..] } else { &there[..] };
                        for &j in rest {
                            let d = metric.dist(pi, ds.point(j));
                            if d <= threshold {
                                let (a, b) = if i < j { (i, j) } else { (j, i) };
                                visit(&mut acc, a, b, d);
                            }
                        }
                    }
                }
                acc
            },
        )
        .reduce(|| init.clone(), &merge)
}

fn neighbour_offsets(axes: usize) -> Vec<CellKey> {
    let mut out = vec![[0i64; GRID_AXES]];
    for a in 0..axes {
        out = out
            .into_iter()
            .flat_map(|base| {
                [-1i64, 0, 1].into_iter().map(move |delta| {
                    let mut k = base;
                    k[a] = delta;
                    k
                })
            })
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{generate, Generator, Metric};
    use proptest::prelude::*;

    fn line(xs: &[f64]) -> Dataset {
        let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        Dataset::new(&rows, Metric::L2).unwrap()
    }

    #[test]
    fn counts_on_a_line() {
        // pairs of {0,1,2,10}: gaps 1,2,10,1,9,8; two are ≤ 1.5
        let ds = line(&[0.0, 1.0, 2.0, 10.0]);
        assert_eq!(count_near_pairs(&ds, 1.5, 1.0).unwrap(), 2);
        assert_eq!(count_near_pairs_grid(&ds, 1.5, 1.0).unwrap(), 2);
        assert_eq!(near_graph(&ds, 1.5, 1.0).unwrap(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn trivial_counts() {
        assert_eq!(count_near_pairs(&line(&[3.0]), 5.0, 1.0).unwrap(), 0);
        let ds = line(&[0.0, 1.0, 2.0, 10.0]);
        assert_eq!(count_near_pairs(&ds, 10.0, 1.0).unwrap(), 6);
        assert!(near_graph(&ds, 0.5, 1.0).unwrap().is_empty());
        let dup = line(&[1.0, 1.0, 7.0]);
        assert_eq!(near_graph(&dup, 0.1, 1.0).unwrap(), vec![(0, 1)]);
    }

    #[test]
    fn rejects_nonpositive_radius() {
        let ds = line(&[0.0]);
        assert!(count_near_pairs(&ds, 0.0, 1.0).is_err());
        assert!(count_near_pairs(&ds, 1.0, -1.0).is_err());
    }

    #[test]
    fn lattice_gap_two_has_no_pairs_below_two() {
        let ds = generate(&Generator::Lattice { gap: 2.0 }, 100, 2, Metric::L2, 0).unwrap();
        assert_eq!(count_near_pairs(&ds, 1.9, 1.0).unwrap(), 0);
        assert_eq!(count_near_pairs_bruteforce(&ds, 1.9, 1.0).unwrap(), 0);
        // 10x10 grid: 2·10·9 axis-aligned neighbours at distance exactly 2
        assert_eq!(count_near_pairs(&ds, 2.0, 1.0).unwrap(), 180);
    }

    #[test]
    fn boundary_distances_count() {
        // points exactly threshold apart straddling cell boundaries
        let xs: Vec<f64> = (0..200).map(|i| i as f64 * 0.3).collect();
        let ds = line(&xs);
        for beta in [0.3, 0.6, 0.9, 1.2] {
            assert_eq!(
                count_near_pairs_grid(&ds, beta, 1.0).unwrap(),
                count_near_pairs_bruteforce(&ds, beta, 1.0).unwrap(),
                "beta {beta}"
            );
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn grid_equals_reference(
            seed in any::<u64>(), n in 1usize..150, d in 1usize..6,
            beta in 0.05f64..3.0, l1 in any::<bool>(), clustered in any::<bool>(),
        ) {
            let metric = if l1 { Metric::L1 } else { Metric::L2 };
            let kind = if clustered {
                Generator::GaussianClusters { k: 5, sigma: 0.2, spread: 4.0 }
            } else {
                Generator::UniformCube { side: 4.0 }
            };
            let ds = generate(&kind, n, d, metric, seed).unwrap();
            let reference = count_near_pairs_bruteforce(&ds, beta, 1.0).unwrap();
            prop_assert_eq!(count_near_pairs_grid(&ds, beta, 1.0).unwrap(), reference);
            prop_assert_eq!(near_graph(&ds, beta, 1.0).unwrap().len() as u64, reference);
            prop_assert!(2 * reference + n as u64 <= (n * n) as u64);
        }

        #[test]
        fn monotone_in_beta_and_r(seed in any::<u64>(), b1 in 0.1f64..2.0, db in 0.0f64..2.0, r in 0.5f64..2.0, dr in 0.0f64..1.0) {
            let ds = generate(&Generator::UniformCube { side: 5.0 }, 80, 3, Metric::L2, seed).unwrap();
            let base = count_near_pairs(&ds, b1, r).unwrap();
            prop_assert!(count_near_pairs(&ds, b1 + db, r).unwrap() >= base);
            prop_assert!(count_near_pairs(&ds, b1, r + dr).unwrap() >= base);
        }
    }
}
