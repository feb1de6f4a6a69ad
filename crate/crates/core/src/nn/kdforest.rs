use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use super::dist2;
use crate::datagen::{derive_seed, Stream};

/// Points per leaf bucket.
pub const LEAF_SIZE: usize = 16;
/// Split dimension is drawn among this many highest-variance dimensions.
const TOP_DIMS: usize = 5;
/// Points sampled to estimate per-node mean and variance.
const SAMPLE: usize = 128;

#[derive(Debug, Clone)]
enum Node {
    Split {
        dim: usize,
        val: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        start: usize,
        end: usize,
    },
}

#[derive(Debug, Clone)]
struct Tree {
    nodes: Vec<Node>,
    perm: Vec<usize>,
}

/// Randomized kd-trees searched together through one priority queue.
#[derive(Debug, Clone)]
pub struct KdForest {
    dim: usize,
    trees: Vec<Tree>,
}

struct Pending {
    bound: f64,
    tree: usize,
    node: usize,
}

impl PartialEq for Pending {
    fn eq(&self, o: &Self) -> bool {
        self.bound == o.bound
    }
}
impl Eq for Pending {}
impl PartialOrd for Pending {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Pending {
    // min-heap on the bound
    fn cmp(&self, o: &Self) -> Ordering {
        o.bound.total_cmp(&self.bound)
    }
}

impl KdForest {
    pub fn build(dim: usize, points: &[f64], n_trees: usize, seed: u64) -> Self {
        let n = points.len() / dim;
        let trees = (0..n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = Stream::new(derive_seed(seed, &[t as u64]));
                let mut tree = Tree {
                    nodes: Vec::new(),
                    perm: (0..n).collect(),
                };
                build_node(&mut tree, dim, points, 0, n, &mut rng);
                tree
            })
            .collect();
        Self { dim, trees }
    }

    /// Approximate nearest neighbour, visiting at most `max_checks` leaves.
    pub fn nearest(&self, points: &[f64], q: &[f64], max_checks: usize) -> usize {
        let dim = self.dim;
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        let mut heap = BinaryHeap::new();
        for t in 0..self.trees.len() {
            heap.push(Pending {
                bound: 0.0,
                tree: t,
                node: 0,
            });
        }
        let mut checks = 0;
        while let Some(Pending { bound, tree, node }) = heap.pop() {
            if bound >= best_d || checks >= max_checks {
                if best != usize::MAX {
                    break;
                }
            }
            let tr = &self.trees[tree];
            let mut cur = node;
            let cur_bound = bound;
            loop {
                match tr.nodes[cur] {
                    Node::Split {
                        dim: sd,
                        val,
                        left,
                        right,
                    } => {
                        let diff = q[sd] - val;
                        let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                        let far_bound = cur_bound + diff * diff;
                        if far_bound < best_d {
                            heap.push(Pending {
                                bound: far_bound,
                                tree,
                                node: far,
                            });
                        }
                        cur = near;
                    }
                    Node::Leaf { start, end } => {
                        for &i in &tr.perm[start..end] {
                            let d = dist2(&points[i * dim..(i + 1) * dim], q);
                            if d < best_d || (d == best_d && i < best) {
                                best_d = d;
                                best = i;
                            }
                        }
                        checks += 1;
                        break;
                    }
                }
            }
        }
        best
    }
}

fn build_node(tree: &mut Tree, dim: usize, points: &[f64], start: usize, end: usize, rng: &mut Stream) -> usize {
    let id = tree.nodes.len();
    let count = end - start;
    if count <= LEAF_SIZE {
        tree.nodes.push(Node::Leaf { start, end });
        return id;
    }
    // mean and variance over an evenly strided sample
    let stride = count.div_ceil(SAMPLE).max(1);
    let mut mean = vec![0.0; dim];
    let mut m2 = vec![0.0; dim];
    let mut k = 0.0;
    for &i in tree.perm[start..end].iter().step_by(stride) {
        k += 1.0;
        let p = &points[i * dim..(i + 1) * dim];
        for c in 0..dim {
            let delta = p[c] - mean[c];
            mean[c] += delta / k;
            m2[c] += delta * (p[c] - mean[c]);
        }
    }
    let mut dims: Vec<usize> = (0..dim).collect();
    dims.sort_by(|&a, &b| m2[b].total_cmp(&m2[a]));
    let top = TOP_DIMS.min(dim);
    let sd = dims[rng.below(top)];
    let val = mean[sd];

    // partition: < val to the left
    let slice = &mut tree.perm[start..end];
    let mut lo = 0;
    for j in 0..slice.len() {
        if points[slice[j] * dim + sd] < val {
            slice.swap(lo, j);
            lo += 1;
        }
    }
    let (mid, val) = if lo == 0 || lo == count {
        // the mean failed to separate: split at the median coordinate
        slice.sort_by(|&a, &b| points[a * dim + sd].total_cmp(&points[b * dim + sd]));
        let mid = count / 2;
        (mid, points[slice[mid] * dim + sd])
    } else {
        (lo, val)
    };
    tree.nodes.push(Node::Leaf { start, end });
    let left = build_node(tree, dim, points, start, start + mid, rng);
    let right = build_node(tree, dim, points, start + mid, end, rng);
    tree.nodes[id] = Node::Split {
        dim: sd,
        val,
        left,
        right,
    };
    id
}
