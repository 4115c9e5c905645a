use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::country::normalize;
use super::{BarrierError, EconomicClusterMap};

/// Number of economic dimensions per country.
pub const PROSPERITY_DIMS: usize = 12;

/// A country's economic profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ProsperityVector {
    pub country: String,
    dims: Vec<f64>,
}

impl ProsperityVector {
    pub fn new(country: impl Into<String>, dims: Vec<f64>) -> Result<Self, BarrierError> {
        if dims.len() != PROSPERITY_DIMS {
            return Err(BarrierError::DimensionMismatch { expected: PROSPERITY_DIMS, found: dims.len() });
        }
        if dims.iter().any(|d| !d.is_finite()) {
            return Err(BarrierError::NonFinite(country.into()));
        }
        Ok(ProsperityVector { country: country.into(), dims })
    }

    pub fn dims(&self) -> &[f64] {
        &self.dims
    }

    pub fn distance(&self, other: &ProsperityVector) -> f64 {
        squared_distance(&self.dims, &other.dims).sqrt()
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Euclidean distance between two coordinate vectors of equal length.
pub fn euclidean_distance(a: &[f64], b: &[f64]) -> Result<f64, BarrierError> {
    if a.len() != b.len() {
        return Err(BarrierError::DimensionMismatch { expected: a.len(), found: b.len() });
    }
    Ok(squared_distance(a, b).sqrt())
}

/// Reads `country,d1,...,d12`.
pub fn load_prosperity(path: impl AsRef<Path>) -> Result<Vec<ProsperityVector>, BarrierError> {
    let path = path.as_ref();
    let raw = fs::read_to_string(path).map_err(|e| BarrierError::io(path, e))?;
    parse_prosperity(&raw)
}

pub fn parse_prosperity(raw: &str) -> Result<Vec<ProsperityVector>, BarrierError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(raw.as_bytes());
    let expected: Vec<String> =
        std::iter::once("country".to_string()).chain((1..=PROSPERITY_DIMS).map(|i| format!("d{i}"))).collect();
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != expected {
        return Err(BarrierError::HeaderMismatch { expected: expected.join(","), found: header.join(",") });
    }
    reader
        .records()
        .map(|rec| {
            let rec = rec?;
            let dims = rec
                .iter()
                .skip(1)
                .map(|v| v.parse::<f64>().map_err(|_| BarrierError::BadValue(format!("`{v}` in row for {}", &rec[0]))))
                .collect::<Result<Vec<_>, _>>()?;
            ProsperityVector::new(&rec[0], dims)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct KmeansOptions {
    /// Z-score every dimension before clustering. Off by default: raw
    /// Euclidean distance on the index values.
    pub standardize: bool,
}

/// A k-means result together with its per-iteration inertia.
#[derive(Debug, Clone, PartialEq)]
pub struct KmeansRun {
    pub map: EconomicClusterMap,
    /// Inertia after each assignment step, then the final inertia.
    pub inertia_trace: Vec<f64>,
    pub iterations: usize,
}

/// Lloyd k-means with k-means++ seeding; see [`kmeans_with`].
pub fn kmeans(
    vectors: &[ProsperityVector],
    k: usize,
    seed: u64,
    max_iter: usize,
) -> Result<EconomicClusterMap, BarrierError> {
    kmeans_with(vectors, k, seed, max_iter, KmeansOptions::default()).map(|run| run.map)
}

/// Lloyd iterations from k-means++ seeding drawn from a ChaCha8 stream seeded
/// with `seed`. Stops at an assignment fixpoint or after `max_iter`
/// assignment steps. A cluster left empty by an assignment step is moved
/// onto the point farthest from its own centroid (taken from a cluster with
/// at least two members). Classes are numbered by first member in input
/// order, so `C1` always holds `vectors[0]`.
pub fn kmeans_with(
    vectors: &[ProsperityVector],
    k: usize,
    seed: u64,
    max_iter: usize,
    options: KmeansOptions,
) -> Result<KmeansRun, BarrierError> {
    if vectors.is_empty() {
        return Err(BarrierError::EmptyInput);
    }
    if k == 0 || k > vectors.len() {
        return Err(BarrierError::KTooLarge { k, points: vectors.len() });
    }
    let max_iter = max_iter.max(1);
    let mut points: Vec<Vec<f64>> = vectors.iter().map(|v| v.dims.clone()).collect();
    if options.standardize {
        standardize(&mut points);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = plus_plus_seeds(&points, k, &mut rng);
    let mut assignment: Option<Vec<usize>> = None;
    let mut trace = Vec::new();
    let mut iterations = 0;

    while iterations < max_iter {
        iterations += 1;
        let mut next = assign(&points, &centroids);
        repair_empty(&points, &mut centroids, &mut next);
        trace.push(inertia(&points, &centroids, &next));
        let converged = assignment.as_ref() == Some(&next);
        assignment = Some(next);
        if converged {
            break;
        }
        centroids = means(&points, assignment.as_ref().unwrap(), k);
    }

    let assignment = assignment.expect("at least one iteration runs");
    let centroids = means(&points, &assignment, k);
    let final_inertia = inertia(&points, &centroids, &assignment);
    trace.push(final_inertia);

    // Renumber by first appearance.
    let mut order = Vec::with_capacity(k);
    for &c in &assignment {
        if !order.contains(&c) {
            order.push(c);
        }
    }
    let mut relabel = vec![0; k];
    for (new, &old) in order.iter().enumerate() {
        relabel[old] = new;
    }
    let centroids_ordered = order.iter().map(|&old| centroids[old].clone()).collect();
    let mut classes = BTreeMap::new();
    let mut names = BTreeMap::new();
    for (v, &c) in vectors.iter().zip(&assignment) {
        let key = normalize(&v.country);
        classes.insert(key.clone(), relabel[c] + 1);
        names.insert(key, v.country.clone());
    }

    Ok(KmeansRun {
        map: EconomicClusterMap {
            k,
            classes,
            names,
            centroids: centroids_ordered,
            seed: Some(seed),
            inertia: final_inertia,
        },
        inertia_trace: trace,
        iterations,
    })
}

fn standardize(points: &mut [Vec<f64>]) {
    let n = points.len() as f64;
    for d in 0..PROSPERITY_DIMS {
        let mean = points.iter().map(|p| p[d]).sum::<f64>() / n;
        let var = points.iter().map(|p| (p[d] - mean).powi(2)).sum::<f64>() / n;
        let sd = var.sqrt();
        for p in points.iter_mut() {
            p[d] = if sd > 0.0 { (p[d] - mean) / sd } else { 0.0 };
        }
    }
}

fn plus_plus_seeds(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut nearest: Vec<f64> = points.iter().map(|p| squared_distance(p, &points[chosen[0]])).collect();
    while chosen.len() < k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &d) in nearest.iter().enumerate() {
                if d <= 0.0 {
                    continue;
                }
                if target < d {
                    pick = i;
                    break;
                }
                target -= d;
            }
            // Guard against rounding landing on an already chosen point.
            if nearest[pick] <= 0.0 {
                pick = (0..n).rev().find(|&i| nearest[i] > 0.0).unwrap();
            }
            pick
        } else {
            // Every remaining point coincides with a centre.
            let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(pick);
        for (i, p) in points.iter().enumerate() {
            nearest[i] = nearest[i].min(squared_distance(p, &points[pick]));
        }
    }
    chosen.into_iter().map(|i| points[i].clone()).collect()
}

fn assign(points: &[Vec<f64>], centroids: &[Vec<f64>]) -> Vec<usize> {
    points
        .iter()
        .map(|p| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (c, centroid) in centroids.iter().enumerate() {
                let d = squared_distance(p, centroid);
                if d < best_d {
                    best = c;
                    best_d = d;
                }
            }
            best
        })
        .collect()
}

fn repair_empty(points: &[Vec<f64>], centroids: &mut [Vec<f64>], assignment: &mut [usize]) {
    let k = centroids.len();
    loop {
        let mut sizes = vec![0usize; k];
        for &c in assignment.iter() {
            sizes[c] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else { return };
        let far = (0..points.len())
            .filter(|&i| sizes[assignment[i]] >= 2)
            .max_by(|&a, &b| {
                let da = squared_distance(&points[a], &centroids[assignment[a]]);
                let db = squared_distance(&points[b], &centroids[assignment[b]]);
                da.total_cmp(&db).then(b.cmp(&a))
            })
            .expect("k <= n leaves a cluster with two members");
        centroids[empty] = points[far].clone();
        assignment[far] = empty;
    }
}

fn means(points: &[Vec<f64>], assignment: &[usize], k: usize) -> Vec<Vec<f64>> {
    let dims = points[0].len();
    let mut sums = vec![vec![0.0; dims]; k];
    let mut counts = vec![0usize; k];
    for (p, &c) in points.iter().zip(assignment) {
        counts[c] += 1;
        for (s, x) in sums[c].iter_mut().zip(p) {
            *s += x;
        }
    }
    for (s, &n) in sums.iter_mut().zip(&counts) {
        if n > 0 {
            s.iter_mut().for_each(|x| *x /= n as f64);
        }
    }
    sums
}

fn inertia(points: &[Vec<f64>], centroids: &[Vec<f64>], assignment: &[usize]) -> f64 {
    points.iter().zip(assignment).map(|(p, &c)| squared_distance(p, &centroids[c])).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn pv(name: &str, dims: Vec<f64>) -> ProsperityVector {
        ProsperityVector::new(name, dims).unwrap()
    }

    /// Two blobs of five points around 0 and 100, spread < 1.
    fn blobs() -> Vec<ProsperityVector> {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        (0..10)
            .map(|i| {
                let base = if i < 5 { 0.0 } else { 100.0 };
                pv(&format!("c{i}"), (0..12).map(|_| base + rng.random::<f64>()).collect())
            })
            .collect()
    }

    /// Exhaustive minimum-SSE 2-partition.
    fn brute_force_two_partition(points: &[ProsperityVector]) -> (Vec<bool>, f64) {
        let n = points.len();
        let mut best = (vec![], f64::INFINITY);
        // Fix point 0 on side `false` to skip mirrored partitions.
        for mask in 0u32..(1 << (n - 1)) {
            let side: Vec<bool> = (0..n).map(|i| i > 0 && mask & (1 << (i - 1)) != 0).collect();
            if side.iter().all(|s| !s) {
                continue;
            }
            let mut sse = 0.0;
            for s in [false, true] {
                let members: Vec<_> =
                    points.iter().zip(&side).filter(|(_, &x)| x == s).map(|(p, _)| p.dims()).collect();
                let mean: Vec<f64> =
                    (0..12).map(|d| members.iter().map(|m| m[d]).sum::<f64>() / members.len() as f64).collect();
                sse += members.iter().map(|m| squared_distance(m, &mean)).sum::<f64>();
            }
            if sse < best.1 {
                best = (side, sse);
            }
        }
        best
    }

    #[test]
    fn distance_examples() {
        let a = vec![1.5; 12];
        let b: Vec<f64> = a.iter().map(|x| x + 1.0).collect();
        assert_eq!(euclidean_distance(&a, &a).unwrap(), 0.0);
        assert!((euclidean_distance(&a, &b).unwrap() - 12f64.sqrt()).abs() < 1e-12);
        assert!(matches!(euclidean_distance(&a, &b[..11]), Err(BarrierError::DimensionMismatch { .. })));
        assert!(ProsperityVector::new("x", vec![0.0; 11]).is_err());
        assert!(ProsperityVector::new("x", vec![f64::NAN; 12]).is_err());
    }

    #[test]
    fn two_blobs_match_brute_force() {
        let points = blobs();
        let (side, best_sse) = brute_force_two_partition(&points);
        let map = kmeans(&points, 2, 42, 100).unwrap();
        let got: Vec<bool> = points.iter().map(|p| map.class_of_key(&normalize(&p.country)) == Some(2)).collect();
        assert_eq!(got, side);
        assert!((map.inertia - best_sse).abs() < 1e-9);
    }

    #[test]
    fn k_equals_n_has_zero_inertia() {
        let points = blobs();
        let map = kmeans(&points, points.len(), 1, 50).unwrap();
        assert_eq!(map.inertia, 0.0);
        let mut classes: Vec<_> = map.classes.values().copied().collect();
        classes.sort();
        assert_eq!(classes, (1..=10).collect::<Vec<_>>());
    }

    #[test]
    fn k_one_centroid_is_mean() {
        let points = blobs();
        let map = kmeans(&points, 1, 3, 10).unwrap();
        for d in 0..12 {
            let mean = points.iter().map(|p| p.dims()[d]).sum::<f64>() / 10.0;
            assert!((map.centroids[0][d] - mean).abs() < 1e-12);
        }
    }

    #[test]
    fn errors() {
        assert_eq!(kmeans(&[], 1, 0, 10), Err(BarrierError::EmptyInput));
        assert!(matches!(kmeans(&blobs(), 11, 0, 10), Err(BarrierError::KTooLarge { .. })));
        assert!(matches!(kmeans(&blobs(), 0, 0, 10), Err(BarrierError::KTooLarge { .. })));
    }

    #[test]
    fn duplicate_points_with_k_equal_n() {
        let points: Vec<_> = (0..4).map(|i| pv(&format!("d{i}"), vec![1.0; 12])).collect();
        let map = kmeans(&points, 4, 9, 10).unwrap();
        assert_eq!(map.inertia, 0.0);
    }

    #[test]
    fn standardize_switch_changes_space() {
        let mut points = blobs();
        points.push(pv("wide", (0..12).map(|d| if d == 0 { 1.0e4 } else { 50.0 }).collect()));
        let run = kmeans_with(&points, 2, 5, 100, KmeansOptions { standardize: true }).unwrap();
        for c in &run.map.centroids {
            assert!(c.iter().all(|x| x.abs() < 10.0));
        }
    }

    fn arb_points() -> impl Strategy<Value = Vec<Vec<f64>>> {
        prop::collection::vec(prop::collection::vec(-50.0f64..50.0, 12), 2..25)
    }

    proptest! {
        #[test]
        fn inertia_never_increases(points in arb_points(), k in 1usize..6, seed in any::<u64>()) {
            let vs: Vec<_> = points.into_iter().enumerate().map(|(i, d)| pv(&format!("p{i}"), d)).collect();
            let k = k.min(vs.len());
            let run = kmeans_with(&vs, k, seed, 50, KmeansOptions::default()).unwrap();
            for w in run.inertia_trace.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-9 * w[0].max(1.0), "trace {:?}", run.inertia_trace);
            }
            // reported inertia matches centroids and assignment
            let recomputed: f64 = vs.iter().map(|v| {
                let c = run.map.class_of_key(&normalize(&v.country)).unwrap();
                squared_distance(v.dims(), &run.map.centroids[c - 1])
            }).sum();
            prop_assert!((recomputed - run.map.inertia).abs() <= 1e-9 * recomputed.max(1.0));
            prop_assert!(run.map.classes.values().all(|&c| (1..=k).contains(&c)));
            let again = kmeans_with(&vs, k, seed, 50, KmeansOptions::default()).unwrap();
            prop_assert_eq!(run, again);
        }

        #[test]
        fn distance_symmetric(a in prop::collection::vec(-1e3f64..1e3, 12), b in prop::collection::vec(-1e3f64..1e3, 12)) {
            prop_assert_eq!(euclidean_distance(&a, &b).unwrap(), euclidean_distance(&b, &a).unwrap());
        }
    }
}
