//! Greedy (farthest-point) permutations with insertion radii.

use std::io::Write;

use crate::error::{Error, Result};
use crate::metric::PointCloud;

/// A reordering of a cloud together with insertion radii and nearest
/// predecessors.
///
/// Everything except `order` is indexed by *rank*, the position in the
/// greedy order: `lambda[r]` is the insertion radius of the point
/// `order[r]`, and `pred[r]` is the rank of its nearest predecessor.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedyPermutation {
    pub order: Vec<usize>,
    pub lambda: Vec<f64>,
    pub pred: Vec<Option<usize>>,
    rank_of: Vec<usize>,
}

impl GreedyPermutation {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Rank of the original point `index`.
    pub fn rank_of(&self, index: usize) -> usize {
        self.rank_of[index]
    }

    /// Wraps an arbitrary ordering, filling in insertion radii and
    /// predecessors by brute force. The ordering is not required to be greedy;
    /// this exists so that non-greedy orders can be fed to
    /// [`verify_net_property`].
    pub fn from_order(cloud: &PointCloud, order: Vec<usize>) -> Result<Self> {
        let n = cloud.len();
        let mut seen = vec![false; n];
        if order.len() != n {
            return Err(Error::usage("order must be a permutation of the cloud"));
        }
        for &i in &order {
            if i >= n || std::mem::replace(&mut seen[i], true) {
                return Err(Error::usage("order must be a permutation of the cloud"));
            }
        }
        let mut lambda = vec![f64::INFINITY; n];
        let mut pred = vec![None; n];
        for r in 1..n {
            let (best, d) = (0..r)
                .map(|s| (s, cloud.distance(order[r], order[s])))
                .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
            lambda[r] = d;
            pred[r] = Some(best);
        }
        Ok(Self::assemble(order, lambda, pred))
    }

    fn assemble(order: Vec<usize>, lambda: Vec<f64>, pred: Vec<Option<usize>>) -> Self {
        let mut rank_of = vec![0; order.len()];
        for (r, &i) in order.iter().enumerate() {
            rank_of[i] = r;
        }
        GreedyPermutation { order, lambda, pred, rank_of }
    }

    /// Text form: one line per rank, `orig_index lambda pred_orig_index`,
    /// with `inf` and `-` for the first point.
    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        for r in 0..self.len() {
            let pred = match self.pred[r] {
                Some(p) => self.order[p].to_string(),
                None => "-".to_string(),
            };
            writeln!(w, "{} {} {}", self.order[r], fmt_real(self.lambda[r]), pred)?;
        }
        Ok(())
    }
}

/// Formats a real for the text formats, `inf` for infinity.
pub fn fmt_real(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".to_string()
    } else {
        x.to_string()
    }
}

/// Farthest-point ordering starting from `seed`, in O(n^2) time.
///
/// Ties among equally far candidates go to the lowest original index; ties
/// among equally near predecessors go to the earliest rank.
pub fn greedy_permutation(cloud: &PointCloud, seed: usize) -> Result<GreedyPermutation> {
    let n = cloud.len();
    if seed >= n {
        return Err(Error::usage(format!("seed index {seed} out of range (n = {n})")));
    }
    let mut order = Vec::with_capacity(n);
    let mut lambda = Vec::with_capacity(n);
    let mut pred = Vec::with_capacity(n);
    // distance of each point to the current prefix, and the rank realizing it
    let mut near_dist = vec![f64::INFINITY; n];
    let mut near_rank = vec![0usize; n];
    let mut taken = vec![false; n];

    let mut next = seed;
    for rank in 0..n {
        taken[next] = true;
        order.push(next);
        if rank == 0 {
            lambda.push(f64::INFINITY);
            pred.push(None);
        } else {
            lambda.push(near_dist[next]);
            pred.push(Some(near_rank[next]));
        }
        let center = cloud.point(next);
        let mut far = None;
        let mut far_d = f64::NEG_INFINITY;
        for v in 0..n {
            if taken[v] {
                continue;
            }
            let d = cloud.distance_to(v, center);
            if d < near_dist[v] {
                near_dist[v] = d;
                near_rank[v] = rank;
            }
            if near_dist[v] > far_d {
                far_d = near_dist[v];
                far = Some(v);
            }
        }
        match far {
            Some(v) => next = v,
            None => break,
        }
    }
    Ok(GreedyPermutation::assemble(order, lambda, pred))
}

/// Checks that the first `i` points (1-based prefix length) form a
/// `lambda_i`-net: pairwise at least `lambda_i` apart and covering every point
/// within `lambda_i`.
pub fn verify_net_property(gp: &GreedyPermutation, cloud: &PointCloud, i: usize) -> bool {
    if i == 0 || i > gp.len() {
        return false;
    }
    let radius = gp.lambda[i - 1];
    let prefix = &gp.order[..i];
    for (a, &p) in prefix.iter().enumerate() {
        for &q in &prefix[a + 1..] {
            if cloud.distance(p, q) < radius {
                return false;
            }
        }
    }
    (0..cloud.len()).all(|x| prefix.iter().any(|&p| cloud.distance(x, p) <= radius))
}
