//! CART decision trees shared by the forest classifier and the boosted
//! regressor. Trees are stored as a flat node array rooted at index 0; a
//! sample goes left when `x[feature] <= threshold`.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Node<T, L> {
    Split {
        feature: u32,
        threshold: T,
        left: u32,
        right: u32,
    },
    Leaf {
        value: L,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree<T, L> {
    pub nodes: Vec<Node<T, L>>,
}

impl<T: Scalar, L> DecisionTree<T, L> {
    pub fn leaf(&self, x: &[T]) -> &L {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x[*feature as usize] <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
                Node::Leaf { value } => return value,
            }
        }
    }

    /// Depth of the deepest leaf (a single-leaf tree has depth 0).
    pub fn depth(&self) -> usize {
        fn walk<T, L>(nodes: &[Node<T, L>], at: usize) -> usize {
            match &nodes[at] {
                Node::Split { left, right, .. } => 1 + walk(nodes, *left as usize).max(walk(nodes, *right as usize)),
                Node::Leaf { .. } => 0,
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    /// Largest feature index referenced by a split.
    pub fn max_feature(&self) -> Option<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Split { feature, .. } => Some(*feature as usize),
                Node::Leaf { .. } => None,
            })
            .max()
    }
}

/// Node statistics used to score candidate splits.
pub(crate) trait Criterion<T: Scalar> {
    type Target: Copy;
    type Acc: Clone;
    type Leaf;

    fn empty(&self) -> Self::Acc;
    fn add(&self, acc: &mut Self::Acc, y: Self::Target);
    fn remove(&self, acc: &mut Self::Acc, y: Self::Target);
    /// The gain of a split is `score(left) + score(right) - score(parent)`.
    fn score(&self, acc: &Self::Acc) -> T;
    fn is_pure(&self, acc: &Self::Acc) -> bool;
    fn leaf(&self, acc: &Self::Acc) -> Self::Leaf;
}

/// Gini impurity over the three feasibility classes; targets are class
/// indices 0..3 and leaves keep the class histogram.
pub(crate) struct Gini;

impl<T: Scalar> Criterion<T> for Gini {
    type Target = usize;
    type Acc = [u32; 3];
    type Leaf = [u32; 3];

    fn empty(&self) -> [u32; 3] {
        [0; 3]
    }
    fn add(&self, acc: &mut [u32; 3], y: usize) {
        acc[y] += 1;
    }
    fn remove(&self, acc: &mut [u32; 3], y: usize) {
        acc[y] -= 1;
    }
    fn score(&self, acc: &[u32; 3]) -> T {
        let n: u32 = acc.iter().sum();
        if n == 0 {
            return T::zero();
        }
        let sq: f64 = acc.iter().map(|&c| (c as f64) * (c as f64)).sum();
        T::of(sq / n as f64)
    }
    fn is_pure(&self, acc: &[u32; 3]) -> bool {
        acc.iter().filter(|&&c| c > 0).count() <= 1
    }
    fn leaf(&self, acc: &[u32; 3]) -> [u32; 3] {
        *acc
    }
}

/// Half squared error with an L2 penalty `lambda` on leaf values: a node
/// with residual sum `S` over `n` rows scores `0.5 S^2 / (n + lambda)` and
/// its leaf is `S / (n + lambda)`. With `lambda = 0` the gain is the
/// reduction of `0.5 * sum (r - leaf)^2` and leaves hold the mean residual.
pub(crate) struct SquaredError<T> {
    pub lambda: T,
}

impl<T: Scalar> Criterion<T> for SquaredError<T> {
    type Target = T;
    type Acc = (T, usize);
    type Leaf = T;

    fn empty(&self) -> (T, usize) {
        (T::zero(), 0)
    }
    fn add(&self, acc: &mut (T, usize), y: T) {
        acc.0 += y;
        acc.1 += 1;
    }
    fn remove(&self, acc: &mut (T, usize), y: T) {
        acc.0 -= y;
        acc.1 -= 1;
    }
    fn score(&self, acc: &(T, usize)) -> T {
        if acc.1 == 0 {
            return T::zero();
        }
        T::of(0.5) * acc.0 * acc.0 / (T::of_usize(acc.1) + self.lambda)
    }
    fn is_pure(&self, _acc: &(T, usize)) -> bool {
        false
    }
    fn leaf(&self, acc: &(T, usize)) -> T {
        if acc.1 == 0 {
            T::zero()
        } else {
            acc.0 / (T::of_usize(acc.1) + self.lambda)
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct GrowParams<T> {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    /// Features examined per split; `None` examines all of them.
    pub max_features: Option<usize>,
    /// Minimum gain for a split to be kept (it must also be positive).
    pub min_gain: T,
}

struct Task {
    node: usize,
    sample: Vec<usize>,
    depth: usize,
}

struct Split<T> {
    feature: usize,
    threshold: T,
    gain: T,
}

/// Grows a tree on `sample` (row indices; repeats allowed for bootstraps).
pub(crate) fn grow<T, C, R>(
    x: &[Vec<T>],
    y: &[C::Target],
    sample: Vec<usize>,
    criterion: &C,
    params: &GrowParams<T>,
    rng: &mut R,
) -> DecisionTree<T, C::Leaf>
where
    T: Scalar,
    C: Criterion<T>,
    R: Rng + ?Sized,
{
    let d = x.first().map_or(0, Vec::len);
    let mut nodes: Vec<Option<Node<T, C::Leaf>>> = vec![None];
    let mut stack = vec![Task {
        node: 0,
        sample,
        depth: 0,
    }];
    while let Some(task) = stack.pop() {
        let mut acc = criterion.empty();
        for &i in &task.sample {
            criterion.add(&mut acc, y[i]);
        }
        let splittable = task.sample.len() >= params.min_samples_split
            && task.sample.len() >= 2 * params.min_samples_leaf
            && params.max_depth.is_none_or(|m| task.depth < m)
            && !criterion.is_pure(&acc);
        let split = if splittable && d > 0 {
            let features: Vec<usize> = match params.max_features {
                Some(m) if m < d => index::sample(rng, d, m.max(1)).into_vec(),
                _ => (0..d).collect(),
            };
            best_split(x, y, &task.sample, &acc, &features, criterion, params)
        } else {
            None
        };
        match split {
            Some(s) => {
                let (left, right): (Vec<usize>, Vec<usize>) =
                    task.sample.iter().partition(|&&i| x[i][s.feature] <= s.threshold);
                let l = nodes.len();
                nodes.push(None);
                nodes.push(None);
                nodes[task.node] = Some(Node::Split {
                    feature: s.feature as u32,
                    threshold: s.threshold,
                    left: l as u32,
                    right: (l + 1) as u32,
                });
                stack.push(Task {
                    node: l + 1,
                    sample: right,
                    depth: task.depth + 1,
                });
                stack.push(Task {
                    node: l,
                    sample: left,
                    depth: task.depth + 1,
                });
            }
            None => {
                nodes[task.node] = Some(Node::Leaf {
                    value: criterion.leaf(&acc),
                });
            }
        }
    }
    DecisionTree {
        nodes: nodes.into_iter().map(|n| n.expect("every node filled")).collect(),
    }
}

fn best_split<T, C>(
    x: &[Vec<T>],
    y: &[C::Target],
    sample: &[usize],
    parent: &C::Acc,
    features: &[usize],
    criterion: &C,
    params: &GrowParams<T>,
) -> Option<Split<T>>
where
    T: Scalar,
    C: Criterion<T>,
{
    let n = sample.len();
    let parent_score = criterion.score(parent);
    let mut best: Option<Split<T>> = None;
    let mut order = sample.to_vec();
    for &f in features {
        order.sort_by(|&a, &b| x[a][f].partial_cmp(&x[b][f]).expect("finite features"));
        let mut left = criterion.empty();
        let mut right = parent.clone();
        for p in 0..n - 1 {
            let i = order[p];
            criterion.add(&mut left, y[i]);
            criterion.remove(&mut right, y[i]);
            let n_left = p + 1;
            if n_left < params.min_samples_leaf {
                continue;
            }
            if n - n_left < params.min_samples_leaf {
                break;
            }
            let (lo, hi) = (x[i][f], x[order[p + 1]][f]);
            if lo == hi {
                continue;
            }
            let gain = criterion.score(&left) + criterion.score(&right) - parent_score;
            if gain > T::zero() && gain >= params.min_gain && best.as_ref().is_none_or(|b| gain > b.gain) {
                let mid = (lo + hi) / T::of(2.0);
                best = Some(Split {
                    feature: f,
                    threshold: if mid < hi { mid } else { lo },
                    gain,
                });
            }
        }
    }
    best
}
