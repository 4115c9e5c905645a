use serde::{Deserialize, Serialize};

use super::text::TfIdfMatrix;
use super::TopicError;

/// One agglomeration step. Leaves are ids `0..n`; the cluster created by
/// step `s` gets id `n + s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub leaves: usize,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    /// True when every merge is at least as high as the merges that formed
    /// its children.
    pub fn is_monotone(&self, tolerance: f64) -> bool {
        let n = self.leaves;
        self.merges.iter().all(|m| {
            [m.left, m.right].iter().filter(|&&c| c >= n).all(|&c| self.merges[c - n].height <= m.height + tolerance)
        })
    }
}

/// Ward linkage over the rows of a TF-IDF matrix. Rows are unit length, so
/// the squared Euclidean distance between two rows is `2 - 2·cosine`.
pub fn ward_cluster(matrix: &TfIdfMatrix) -> Result<Dendrogram, TopicError> {
    let rows = &matrix.rows;
    let norms: Vec<f64> = rows.iter().map(|r| r.squared_norm()).collect();
    ward_linkage(rows.len(), |i, j| (norms[i] + norms[j] - 2.0 * rows[i].dot(&rows[j])).max(0.0))
}

/// Ward linkage over dense points (for pluggable embeddings).
pub fn ward_from_points(points: &[Vec<f64>]) -> Result<Dendrogram, TopicError> {
    ward_linkage(points.len(), |i, j| points[i].iter().zip(&points[j]).map(|(a, b)| (a - b) * (a - b)).sum())
}

/// Generic Ward agglomeration from pairwise squared Euclidean distances.
///
/// Keeps the matrix of squared Ward distances `2·ΔSSE` and updates it with
/// the Lance–Williams recurrence
/// `d(k, i∪j) = ((n_i+n_k)·d(k,i) + (n_j+n_k)·d(k,j) − n_k·d(i,j)) / (n_i+n_j+n_k)`.
/// Merge heights are `sqrt(2·ΔSSE)`, i.e. the Euclidean distance for two
/// singletons. Equal distances go to the smallest `(min id, max id)` pair.
pub fn ward_linkage(n: usize, sq_dist: impl Fn(usize, usize) -> f64) -> Result<Dendrogram, TopicError> {
    if n < 2 {
        return Err(TopicError::TooFewDocs { needed: 2, found: n });
    }
    let mut d = vec![0.0f64; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = sq_dist(i, j);
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    let mut active: Vec<usize> = (0..n).collect();
    let mut ids: Vec<usize> = (0..n).collect();
    let mut sizes = vec![1usize; n];
    let mut merges = Vec::with_capacity(n - 1);

    for step in 0..n - 1 {
        let mut best: Option<(f64, (usize, usize), usize, usize)> = None;
        for (ai, &a) in active.iter().enumerate() {
            for &b in &active[ai + 1..] {
                let dist = d[a * n + b];
                let pair = (ids[a].min(ids[b]), ids[a].max(ids[b]));
                let better = match best {
                    None => true,
                    Some((bd, bp, _, _)) => dist < bd || (dist == bd && pair < bp),
                };
                if better {
                    best = Some((dist, pair, a, b));
                }
            }
        }
        let (dist, (left, right), a, b) = best.expect("at least two active clusters");
        let (na, nb) = (sizes[a] as f64, sizes[b] as f64);
        for &c in &active {
            if c == a || c == b {
                continue;
            }
            let nc = sizes[c] as f64;
            let updated = ((na + nc) * d[a * n + c] + (nb + nc) * d[b * n + c] - nc * dist) / (na + nb + nc);
            let updated = updated.max(0.0);
            d[a * n + c] = updated;
            d[c * n + a] = updated;
        }
        sizes[a] += sizes[b];
        ids[a] = n + step;
        active.retain(|&x| x != b);
        merges.push(Merge { left, right, height: dist.sqrt(), size: sizes[a] });
    }
    Ok(Dendrogram { leaves: n, merges })
}

/// Cuts the dendrogram into `k` clusters by undoing its last `k − 1` merges.
/// Cluster ids are ordered by smallest member leaf; with leaves in
/// publication order that is the earliest member article.
pub fn cut(dendrogram: &Dendrogram, k: usize) -> Result<Vec<usize>, TopicError> {
    let n = dendrogram.leaves;
    if k == 0 || k > n {
        return Err(TopicError::KOutOfRange { k, docs: n });
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    // Representative leaf of every cluster id.
    let mut rep: Vec<usize> = (0..n).collect();
    for m in &dendrogram.merges[..n - k] {
        let (ra, rb) = (find(&mut parent, rep[m.left]), find(&mut parent, rep[m.right]));
        let root = ra.min(rb);
        parent[ra.max(rb)] = root;
        rep.push(root);
    }
    let mut topic_of_root = vec![usize::MAX; n];
    let mut next = 0;
    let mut assignment = Vec::with_capacity(n);
    for leaf in 0..n {
        let root = find(&mut parent, leaf);
        if topic_of_root[root] == usize::MAX {
            topic_of_root[root] = next;
            next += 1;
        }
        assignment.push(topic_of_root[root]);
    }
    Ok(assignment)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_points() {
        let d = ward_from_points(&[vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(d.merges.len(), 1);
        assert!((d.merges[0].height - 5.0).abs() < 1e-12);
        assert_eq!((d.merges[0].left, d.merges[0].right, d.merges[0].size), (0, 1, 2));
    }

    #[test]
    fn identical_points_merge_at_zero() {
        let d = ward_from_points(&vec![vec![1.0, 2.0]; 5]).unwrap();
        assert_eq!(d.merges.len(), 4);
        assert!(d.merges.iter().all(|m| m.height == 0.0));
        // ties resolved by smallest id pair
        assert_eq!((d.merges[0].left, d.merges[0].right), (0, 1));
        assert_eq!((d.merges[1].left, d.merges[1].right), (2, 3));
    }

    #[test]
    fn tight_pairs_merge_first() {
        let pts = vec![vec![0.0, 0.0], vec![10.0, 0.0], vec![0.1, 0.0], vec![10.0, 0.2]];
        let d = ward_from_points(&pts).unwrap();
        let first_two: Vec<_> = d.merges[..2].iter().map(|m| (m.left, m.right)).collect();
        assert_eq!(first_two, [(0, 2), (1, 3)]);
        assert_eq!(cut(&d, 2).unwrap(), [0, 1, 0, 1]);
        assert!(d.is_monotone(0.0));
    }

    #[test]
    fn cut_extremes() {
        let pts: Vec<_> = (0..6).map(|i| vec![i as f64 * i as f64]).collect();
        let d = ward_from_points(&pts).unwrap();
        assert_eq!(cut(&d, 1).unwrap(), vec![0; 6]);
        assert_eq!(cut(&d, 6).unwrap(), (0..6).collect::<Vec<_>>());
        assert_eq!(cut(&d, 7), Err(TopicError::KOutOfRange { k: 7, docs: 6 }));
        assert_eq!(cut(&d, 0), Err(TopicError::KOutOfRange { k: 0, docs: 6 }));
    }

    #[test]
    fn too_few() {
        assert_eq!(ward_from_points(&[vec![1.0]]), Err(TopicError::TooFewDocs { needed: 2, found: 1 }));
    }
}
