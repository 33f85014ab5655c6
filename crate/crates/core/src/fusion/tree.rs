use serde::{Deserialize, Serialize};

use crate::rng::Rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf { vote: u8 },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

/// CART classifier stored as a flat node arena; node 0 is the root.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
    pub depth: usize,
}

fn gini(c0: usize, c1: usize) -> f64 {
    let n = (c0 + c1) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let (p0, p1) = (c0 as f64 / n, c1 as f64 / n);
    1.0 - p0 * p0 - p1 * p1
}

/// Lowest weighted Gini over midpoints of sorted unique values; ties keep the lower threshold.
fn best_split(x: &[Vec<f64>], y: &[u8], idx: &[usize], feature: usize) -> Option<(f64, f64)> {
    let mut vals: Vec<(f64, u8)> = idx.iter().map(|&i| (x[i][feature], y[i])).collect();
    vals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total1 = vals.iter().filter(|v| v.1 == 1).count();
    let n = vals.len();
    let mut best: Option<(f64, f64)> = None;
    let (mut l0, mut l1) = (0usize, 0usize);
    for i in 0..n - 1 {
        if vals[i].1 == 1 {
            l1 += 1;
        } else {
            l0 += 1;
        }
        if vals[i].0 == vals[i + 1].0 {
            continue;
        }
        let left = l0 + l1;
        let (r1, r0) = (total1 - l1, n - left - (total1 - l1));
        let score = (left as f64 * gini(l0, l1) + (n - left) as f64 * gini(r0, r1)) / n as f64;
        if best.is_none_or(|(_, s)| score < s) {
            best = Some(((vals[i].0 + vals[i + 1].0) / 2.0, score));
        }
    }
    best
}

impl DecisionTree {
    /// Grows until nodes are pure or hold fewer than two samples. Each node
    /// tries one uniformly drawn feature first and falls back to the others
    /// in random order when the drawn one has a single distinct value.
    pub fn fit(x: &[Vec<f64>], y: &[u8], idx: &[usize], rng: &mut Rng) -> Self {
        let mut tree = DecisionTree { nodes: Vec::new(), depth: 0 };
        tree.grow(x, y, idx.to_vec(), 0, rng);
        tree
    }

    fn grow(&mut self, x: &[Vec<f64>], y: &[u8], idx: Vec<usize>, depth: usize, rng: &mut Rng) -> usize {
        self.depth = self.depth.max(depth);
        let id = self.nodes.len();
        let ones = idx.iter().filter(|&&i| y[i] == 1).count();
        let vote = u8::from(2 * ones >= idx.len());
        self.nodes.push(Node::Leaf { vote });
        if idx.len() < 2 || ones == 0 || ones == idx.len() {
            return id;
        }
        let d = x[idx[0]].len();
        let mut order: Vec<usize> = (0..d).collect();
        let first = rng.below(d);
        order.swap(0, first);
        rng.shuffle(&mut order[1..]);
        let Some((feature, threshold)) = order.iter().find_map(|&f| best_split(x, y, &idx, f).map(|(t, _)| (f, t)))
        else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx.into_iter().partition(|&i| x[i][feature] <= threshold);
        let left = self.grow(x, y, l, depth + 1, rng);
        let right = self.grow(x, y, r, depth + 1, rng);
        self.nodes[id] = Node::Split { feature, threshold, left, right };
        id
    }

    pub fn predict(&self, z: &[f64]) -> u8 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { vote } => return vote,
                Node::Split { feature, threshold, left, right } => {
                    at = if z[feature] <= threshold { left } else { right }
                }
            }
        }
    }
}
