//! Binary decision tree over numeric features, grown by gain ratio and
//! pruned by pessimistic error estimates.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{check_matrix, ModelError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// Minimum training instances on each side of a split.
    pub min_leaf: usize,
    /// Confidence factor for pessimistic pruning.
    pub confidence: f64,
    pub prune: bool,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            min_leaf: 2,
            confidence: 0.25,
            prune: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        label: usize,
        /// Training instances per class that reached this leaf.
        distribution: Vec<usize>,
    },
    Split {
        feature: usize,
        /// Instances with `x[feature] <= threshold` go left.
        threshold: f64,
        distribution: Vec<usize>,
        left: Box<Node>,
        right: Box<Node>,
    },
}

impl Node {
    pub fn distribution(&self) -> &[usize] {
        match self {
            Node::Leaf { distribution, .. } | Node::Split { distribution, .. } => distribution,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Split { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub n_features: usize,
    pub n_classes: usize,
    pub root: Node,
}

impl DecisionTree {
    pub fn predict(&self, x: &[f64]) -> Result<usize, ModelError> {
        if x.len() != self.n_features {
            return Err(ModelError::DimensionMismatch {
                expected: self.n_features,
                actual: x.len(),
            });
        }
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { label, .. } => return Ok(*label),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => node = if x[*feature] <= *threshold { left } else { right },
            }
        }
    }
}

/// Best threshold found for one feature at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
    pub gain_ratio: f64,
}

fn entropy(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

fn majority(distribution: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in distribution.iter().enumerate() {
        if c > distribution[best] {
            best = i;
        }
    }
    best
}

fn counts(y: &[usize], idx: &[usize], n_classes: usize) -> Vec<usize> {
    let mut c = vec![0; n_classes];
    for &i in idx {
        c[y[i]] += 1;
    }
    c
}

const EPS: f64 = 1e-12;

/// Best information-gain threshold of `feature` among midpoints between
/// consecutive distinct values that leave at least `min_leaf` per side.
fn best_threshold(
    x: &[Vec<f64>],
    y: &[usize],
    idx: &[usize],
    feature: usize,
    n_classes: usize,
    min_leaf: usize,
) -> Option<SplitCandidate> {
    let mut sorted = idx.to_vec();
    sorted.sort_by(|&a, &b| x[a][feature].total_cmp(&x[b][feature]).then(a.cmp(&b)));
    let total = counts(y, idx, n_classes);
    let n = idx.len() as f64;
    let base = entropy(&total);
    let mut left = vec![0; n_classes];
    let mut best: Option<SplitCandidate> = None;
    for k in 0..sorted.len() - 1 {
        left[y[sorted[k]]] += 1;
        let (lo, hi) = (x[sorted[k]][feature], x[sorted[k + 1]][feature]);
        let nl = k + 1;
        let nr = sorted.len() - nl;
        if hi <= lo || nl < min_leaf || nr < min_leaf {
            continue;
        }
        let right: Vec<usize> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
        let gain = base - (nl as f64 / n) * entropy(&left) - (nr as f64 / n) * entropy(&right);
        if best.is_none_or(|b| gain > b.gain + EPS) {
            let split_info = entropy(&[nl, nr]);
            best = Some(SplitCandidate {
                feature,
                threshold: lo + (hi - lo) / 2.0,
                gain,
                gain_ratio: if split_info > 0.0 { gain / split_info } else { 0.0 },
            });
        }
    }
    best
}

/// Per-feature best thresholds at a node, followed by the chosen split:
/// the highest gain ratio among candidates whose gain is at least the
/// average gain. `None` when no split has positive gain.
pub(crate) fn choose_split(
    x: &[Vec<f64>],
    y: &[usize],
    idx: &[usize],
    n_classes: usize,
    min_leaf: usize,
) -> (Vec<SplitCandidate>, Option<SplitCandidate>) {
    let n_features = x.first().map_or(0, Vec::len);
    let candidates: Vec<SplitCandidate> = (0..n_features)
        .filter_map(|f| best_threshold(x, y, idx, f, n_classes, min_leaf))
        .filter(|c| c.gain > EPS)
        .collect();
    if candidates.is_empty() {
        return (candidates, None);
    }
    let avg = candidates.iter().map(|c| c.gain).sum::<f64>() / candidates.len() as f64;
    let mut chosen: Option<SplitCandidate> = None;
    for c in candidates.iter().filter(|c| c.gain >= avg - EPS) {
        if chosen.is_none_or(|b| c.gain_ratio > b.gain_ratio + EPS) {
            chosen = Some(*c);
        }
    }
    (candidates, chosen)
}

fn grow(
    x: &[Vec<f64>],
    y: &[usize],
    idx: &[usize],
    n_classes: usize,
    params: &TreeParams,
) -> Node {
    let distribution = counts(y, idx, n_classes);
    let leaf = |distribution: Vec<usize>| Node::Leaf {
        label: majority(&distribution),
        distribution,
    };
    if distribution.iter().filter(|&&c| c > 0).count() < 2 || idx.len() < 2 * params.min_leaf {
        return leaf(distribution);
    }
    let (_, Some(split)) = choose_split(x, y, idx, n_classes, params.min_leaf) else {
        return leaf(distribution);
    };
    let (l, r): (Vec<usize>, Vec<usize>) = idx
        .iter()
        .partition(|&&i| x[i][split.feature] <= split.threshold);
    Node::Split {
        feature: split.feature,
        threshold: split.threshold,
        distribution,
        left: Box::new(grow(x, y, &l, n_classes, params)),
        right: Box::new(grow(x, y, &r, n_classes, params)),
    }
}

/// Upper confidence bound on extra errors for `e` observed errors out of
/// `n`, as used by C4.5's pessimistic pruning.
pub(crate) fn added_errors(n: f64, e: f64, cf: f64) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    if e < 1.0 {
        let base = n * (1.0 - cf.powf(1.0 / n));
        if e == 0.0 {
            return base;
        }
        return base + e * (added_errors(n, 1.0, cf) - base);
    }
    if e + 0.5 >= n {
        return (n - e).max(0.0);
    }
    let z = Normal::standard().inverse_cdf(1.0 - cf);
    let f = (e + 0.5) / n;
    let r = (f + z * z / (2.0 * n) + z * (f / n - f * f / n + z * z / (4.0 * n * n)).sqrt())
        / (1.0 + z * z / n);
    r * n - e
}

fn leaf_estimate(distribution: &[usize], cf: f64) -> f64 {
    let n: usize = distribution.iter().sum();
    let e = n - distribution[majority(distribution)];
    e as f64 + added_errors(n as f64, e as f64, cf)
}

/// Bottom-up subtree replacement; returns the pruned node and its
/// estimated error count.
fn prune(node: Node, cf: f64) -> (Node, f64) {
    match node {
        Node::Leaf { .. } => {
            let est = leaf_estimate(node.distribution(), cf);
            (node, est)
        }
        Node::Split {
            feature,
            threshold,
            distribution,
            left,
            right,
        } => {
            let (left, le) = prune(*left, cf);
            let (right, re) = prune(*right, cf);
            let subtree = le + re;
            let as_leaf = leaf_estimate(&distribution, cf);
            if as_leaf <= subtree + 0.1 {
                (
                    Node::Leaf {
                        label: majority(&distribution),
                        distribution,
                    },
                    as_leaf,
                )
            } else {
                (
                    Node::Split {
                        feature,
                        threshold,
                        distribution,
                        left: Box::new(left),
                        right: Box::new(right),
                    },
                    subtree,
                )
            }
        }
    }
}

/// Grows a tree on class labels `0..n_classes`. Majority ties resolve to
/// the smallest label.
pub fn fit_tree(x: &[Vec<f64>], y: &[usize], params: &TreeParams) -> Result<DecisionTree, ModelError> {
    let n_features = check_matrix(x, y.len())?;
    if params.min_leaf == 0 {
        return Err(ModelError::InvalidParameter("min_leaf must be at least 1".into()));
    }
    if !(params.confidence > 0.0 && params.confidence <= 0.5) {
        return Err(ModelError::InvalidParameter("confidence must be in (0, 0.5]".into()));
    }
    let n_classes = y.iter().max().map_or(1, |m| m + 1).max(2);
    let idx: Vec<usize> = (0..y.len()).collect();
    let mut root = grow(x, y, &idx, n_classes, params);
    if params.prune {
        root = prune(root, params.confidence).0;
    }
    Ok(DecisionTree {
        n_features,
        n_classes,
        root,
    })
}
