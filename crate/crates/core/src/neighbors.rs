//! Exact Euclidean nearest-neighbor search and the k-NN classifier.
//!
//! Two interchangeable backends answer queries: a parallel brute-force scan
//! and a kd-tree. Both are exact and return identical results; distance ties
//! are always broken by the lower point id. `Auto` picks the tree for low
//! dimensions, where space partitioning actually prunes, and the brute scan
//! otherwise.

use ndarray::{Array2, ArrayView1, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};

/// Euclidean distance `sqrt(sum_i (x_i - y_i)^2)`.
pub fn euclidean_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    Ok(sq_dist_slices(x, y).sqrt())
}

#[inline]
fn sq_dist_slices(x: &[f64], y: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (a, b) in x.iter().zip(y) {
        let d = a - b;
        acc += d * d;
    }
    acc
}

#[inline]
fn sq_dist(x: ArrayView1<'_, f64>, y: &[f64]) -> f64 {
    // Rows of a standard-layout matrix are contiguous.
    sq_dist_slices(x.as_slice().expect("contiguous row"), y)
}

/// Search backend selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum IndexStrategy {
    Brute,
    Tree,
    #[default]
    Auto,
}

/// Dimension bound up to which `Auto` uses the kd-tree.
const TREE_DIM_LIMIT: usize = 8;

/// Leaf bucket size for the kd-tree.
const LEAF_SIZE: usize = 16;

#[derive(Debug)]
enum Structure {
    Brute,
    Tree(KdNode),
}

#[derive(Debug)]
enum KdNode {
    Leaf {
        ids: Vec<usize>,
    },
    Internal {
        axis: usize,
        split: f64,
        left: Box<KdNode>,
        right: Box<KdNode>,
    },
}

/// Immutable exact nearest-neighbor index over a point set.
#[derive(Debug)]
pub struct NeighborIndex {
    points: Array2<f64>,
    structure: Structure,
}

/// Result of a k-NN query: ids ordered nearest first, ties by lower id, with
/// matching distances.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborQueryResult {
    pub neighbor_ids: Vec<usize>,
    pub distances: Vec<f64>,
}

#[derive(Clone, Copy, PartialEq)]
struct Candidate {
    dist2: f64,
    id: usize,
}

impl Candidate {
    /// Lexicographic (distance, id) order; distances are finite by
    /// construction.
    #[inline]
    fn worse_than(&self, other: &Candidate) -> bool {
        (self.dist2, self.id) > (other.dist2, other.id)
    }
}

/// Bounded best-k list ordered by (distance, id).
struct TopK {
    k: usize,
    items: Vec<Candidate>,
}

impl TopK {
    fn new(k: usize) -> Self {
        Self {
            k,
            items: Vec::with_capacity(k + 1),
        }
    }

    #[inline]
    fn full(&self) -> bool {
        self.items.len() == self.k
    }

    /// Largest (worst) retained squared distance, or infinity while filling.
    #[inline]
    fn worst_dist2(&self) -> f64 {
        if self.full() {
            self.items.last().expect("non-empty when full").dist2
        } else {
            f64::INFINITY
        }
    }

    #[inline]
    fn push(&mut self, cand: Candidate) {
        if self.full() && cand.worse_than(self.items.last().expect("full")) {
            return;
        }
        let pos = self
            .items
            .partition_point(|c| !c.worse_than(&cand));
        self.items.insert(pos, cand);
        if self.items.len() > self.k {
            self.items.pop();
        }
    }

    fn into_result(self) -> NeighborQueryResult {
        let mut neighbor_ids = Vec::with_capacity(self.items.len());
        let mut distances = Vec::with_capacity(self.items.len());
        for c in self.items {
            neighbor_ids.push(c.id);
            distances.push(c.dist2.sqrt());
        }
        NeighborQueryResult {
            neighbor_ids,
            distances,
        }
    }
}

impl NeighborIndex {
    /// Build an index over the rows of `points`.
    pub fn build(points: Array2<f64>, strategy: IndexStrategy) -> Result<Self> {
        let points = crate::dataset::ensure_standard_layout(points);
        if points.nrows() == 0 {
            return Err(Error::EmptyInput("cannot index an empty point set".into()));
        }
        let use_tree = match strategy {
            IndexStrategy::Brute => false,
            IndexStrategy::Tree => true,
            IndexStrategy::Auto => points.ncols() <= TREE_DIM_LIMIT,
        };
        let structure = if use_tree {
            let ids: Vec<usize> = (0..points.nrows()).collect();
            Structure::Tree(build_node(&points, ids, 0))
        } else {
            Structure::Brute
        };
        Ok(Self { points, structure })
    }

    /// Build from row vectors, rejecting ragged input.
    pub fn from_rows(rows: &[Vec<f64>], strategy: IndexStrategy) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyInput("cannot index an empty point set".into()));
        }
        let dims = rows[0].len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dims {
                return Err(Error::RaggedRows {
                    row: i,
                    expected: dims,
                    got: r.len(),
                });
            }
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let points =
            Array2::from_shape_vec((rows.len(), dims), flat).expect("consistent dimensions");
        Self::build(points, strategy)
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dims(&self) -> usize {
        self.points.ncols()
    }

    pub fn points(&self) -> &Array2<f64> {
        &self.points
    }

    /// The k nearest indexed points to `q`, ties by lower id. `exclude`
    /// omits one point id, supporting leave-one-out passes.
    pub fn knn_query(
        &self,
        q: &[f64],
        k: usize,
        exclude: Option<usize>,
    ) -> Result<NeighborQueryResult> {
        if q.len() != self.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                got: q.len(),
            });
        }
        let available = self.len() - usize::from(exclude.map_or(false, |e| e < self.len()));
        if k == 0 {
            return Err(Error::InvalidParameter {
                name: "k",
                reason: "k must be at least 1".into(),
            });
        }
        if k > available {
            return Err(Error::KTooLarge { k, available });
        }
        let mut top = TopK::new(k);
        match &self.structure {
            Structure::Brute => {
                for (id, row) in self.points.axis_iter(Axis(0)).enumerate() {
                    if Some(id) == exclude {
                        continue;
                    }
                    top.push(Candidate {
                        dist2: sq_dist(row, q),
                        id,
                    });
                }
            }
            Structure::Tree(root) => search_node(root, &self.points, q, exclude, &mut top),
        }
        Ok(top.into_result())
    }

    /// Leave-one-out k-NN for every indexed point, computed in parallel.
    /// Output order matches point ids, so the result is deterministic
    /// regardless of thread scheduling.
    pub fn self_knn(&self, k: usize) -> Result<Vec<NeighborQueryResult>> {
        if k + 1 > self.len() {
            return Err(Error::KTooLarge {
                k,
                available: self.len().saturating_sub(1),
            });
        }
        (0..self.len())
            .into_par_iter()
            .map(|i| {
                let row = self.points.row(i);
                self.knn_query(row.as_slice().expect("contiguous row"), k, Some(i))
            })
            .collect()
    }
}

fn build_node(points: &Array2<f64>, mut ids: Vec<usize>, depth: usize) -> KdNode {
    if ids.len() <= LEAF_SIZE {
        return KdNode::Leaf { ids };
    }
    let axis = depth % points.ncols();
    ids.sort_unstable_by(|&a, &b| {
        (points[[a, axis]], a)
            .partial_cmp(&(points[[b, axis]], b))
            .expect("finite coordinates")
    });
    let mid = ids.len() / 2;
    let split = points[[ids[mid], axis]];
    let right_ids = ids.split_off(mid);
    KdNode::Internal {
        axis,
        split,
        left: Box::new(build_node(points, ids, depth + 1)),
        right: Box::new(build_node(points, right_ids, depth + 1)),
    }
}

fn search_node(
    node: &KdNode,
    points: &Array2<f64>,
    q: &[f64],
    exclude: Option<usize>,
    top: &mut TopK,
) {
    match node {
        KdNode::Leaf { ids } => {
            for &id in ids {
                if Some(id) == exclude {
                    continue;
                }
                top.push(Candidate {
                    dist2: sq_dist(points.row(id), q),
                    id,
                });
            }
        }
        KdNode::Internal {
            axis,
            split,
            left,
            right,
        } => {
            let delta = q[*axis] - split;
            let (near, far) = if delta < 0.0 {
                (left, right)
            } else {
                (right, left)
            };
            search_node(near, points, q, exclude, top);
            // The far side may still hold an equal-distance, lower-id
            // candidate, so the bound check is inclusive.
            if delta * delta <= top.worst_dist2() {
                search_node(far, points, q, exclude, top);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// k-NN classifier
// ---------------------------------------------------------------------------

/// Majority-vote k-NN classifier over a training dataset.
pub struct KnnModel {
    train: LabeledDataset,
    k: usize,
    index: NeighborIndex,
}

impl KnnModel {
    /// Fit a k-NN model. Training rows are canonicalized into ascending
    /// row-id order so the id-based tie rule is independent of input row
    /// permutation.
    pub fn fit(train: LabeledDataset, k: usize, strategy: IndexStrategy) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter {
                name: "k",
                reason: "k must be at least 1".into(),
            });
        }
        if k > train.n_rows() {
            return Err(Error::KTooLarge {
                k,
                available: train.n_rows(),
            });
        }
        let train = train.sorted_by_row_id();
        let index = NeighborIndex::build(train.features().clone(), strategy)?;
        Ok(Self { train, k, index })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn train(&self) -> &LabeledDataset {
        &self.train
    }

    /// Classify one point. The score is the fraction of the k nearest
    /// training points labeled 1; the label is the majority, and an exact
    /// 0.5 tie (even k) defers to the single nearest neighbor.
    pub fn classify(&self, q: &[f64]) -> Result<(u8, f64)> {
        let res = self.index.knn_query(q, self.k, None)?;
        let minority_votes = res
            .neighbor_ids
            .iter()
            .filter(|&&id| self.train.labels()[id] == 1)
            .count();
        let score = minority_votes as f64 / self.k as f64;
        let label = if score > 0.5 {
            1
        } else if score < 0.5 {
            0
        } else {
            self.train.labels()[res.neighbor_ids[0]]
        };
        Ok((label, score))
    }

    /// Classify every row of `queries` in parallel; output order matches the
    /// input rows.
    pub fn classify_batch(&self, queries: &Array2<f64>) -> Result<Vec<(u8, f64)>> {
        if queries.ncols() != self.index.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.index.dims(),
                got: queries.ncols(),
            });
        }
        (0..queries.nrows())
            .into_par_iter()
            .map(|i| {
                let row = queries.row(i);
                match row.as_slice() {
                    Some(slice) => self.classify(slice),
                    None => self.classify(&row.to_vec()),
                }
            })
            .collect()
    }
}
