//! Perturbed distances: capped radii, truncated balls and their cones.
//!
//! All operations here address points by greedy *rank*. [`SparseParams`]
//! carries the cloud already rearranged into greedy order so rank `r` is
//! simply position `r`.

use crate::error::{Error, Result};
use crate::greedy::GreedyPermutation;
use crate::metric::{MetricKind, PointCloud, EMPTY_RADIUS};

/// How edge birth times treat the removal time of the smaller ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BirthMode {
    /// An edge whose balls only meet after one of them has been removed is
    /// absent (birth = infinity).
    #[default]
    Strict,
    /// The three-branch formula without the removal-time check.
    PaperLiteral,
}

/// Sparsity parameters bound to a cloud in greedy order.
#[derive(Debug, Clone)]
pub struct SparseParams {
    epsilon: f64,
    mode: BirthMode,
    ordered: PointCloud,
    lambda: Vec<f64>,
    pred: Vec<Option<usize>>,
    order: Vec<usize>,
}

/// A point of the cone `U_i`: a location together with a scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ConePoint {
    pub x: Vec<f64>,
    pub delta: f64,
}

impl SparseParams {
    /// Requires `0 < epsilon < 1`.
    pub fn new(cloud: &PointCloud, gp: &GreedyPermutation, epsilon: f64) -> Result<Self> {
        if epsilon >= 1.0 {
            return Err(Error::usage(format!(
                "epsilon must be below 1 (got {epsilon}); use the override to allow larger values"
            )));
        }
        Self::with_options(cloud, gp, epsilon, BirthMode::Strict)
    }

    /// Accepts any finite `epsilon > 0`; the formulas stay well defined for
    /// `epsilon >= 1`.
    pub fn with_options(
        cloud: &PointCloud,
        gp: &GreedyPermutation,
        epsilon: f64,
        mode: BirthMode,
    ) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::usage(format!("epsilon must be positive and finite (got {epsilon})")));
        }
        if gp.len() != cloud.len() {
            return Err(Error::usage("greedy permutation does not match the cloud"));
        }
        Ok(SparseParams {
            epsilon,
            mode,
            ordered: cloud.permuted(&gp.order),
            lambda: gp.lambda.clone(),
            pred: gp.pred.clone(),
            order: gp.order.clone(),
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn mode(&self) -> BirthMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    pub fn metric(&self) -> MetricKind {
        self.ordered.metric()
    }

    /// The cloud in greedy order.
    pub fn cloud(&self) -> &PointCloud {
        &self.ordered
    }

    pub fn lambda(&self, rank: usize) -> f64 {
        self.lambda[rank]
    }

    pub fn pred(&self, rank: usize) -> Option<usize> {
        self.pred[rank]
    }

    /// Original input index of a rank.
    pub fn original_index(&self, rank: usize) -> usize {
        self.order[rank]
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    #[inline]
    pub fn dist(&self, a: usize, b: usize) -> f64 {
        self.ordered.distance(a, b)
    }

    /// Scale at which the radius of `rank` stops growing: `lambda (1+eps)/eps`.
    #[inline]
    pub fn radius_cap(&self, rank: usize) -> f64 {
        self.lambda[rank] * (1.0 + self.epsilon) / self.epsilon
    }

    /// `r_i(alpha)`: grows with slope one, then holds at the cap.
    #[inline]
    pub fn radius(&self, rank: usize, alpha: f64) -> f64 {
        let cap = self.radius_cap(rank);
        if alpha <= cap {
            alpha
        } else {
            cap
        }
    }

    /// Last scale at which the ball of `rank` is non-empty:
    /// `lambda (1+eps)^2 / eps`, infinite for rank 0.
    #[inline]
    pub fn removal_time(&self, rank: usize) -> f64 {
        let e = self.epsilon;
        self.lambda[rank] * (1.0 + e) * (1.0 + e) / e
    }

    /// Radius of the truncated ball `b_i(alpha)`, or [`EMPTY_RADIUS`] once
    /// `alpha` passes the removal time. The comparison is non-strict.
    #[inline]
    pub fn ball_radius_or_empty(&self, rank: usize, alpha: f64) -> f64 {
        if alpha <= self.removal_time(rank) {
            self.radius(rank, alpha)
        } else {
            EMPTY_RADIUS
        }
    }

    /// Membership of `x` in the truncated ball `b_i(alpha)`.
    pub fn in_ball(&self, rank: usize, alpha: f64, x: &[f64]) -> bool {
        let r = self.ball_radius_or_empty(rank, alpha);
        r != EMPTY_RADIUS && self.ordered.distance_to(rank, x) <= r
    }

    /// Membership of a cone point in `U_i^alpha`, the union over
    /// `delta <= alpha` of `b_i(delta) x {delta}`.
    pub fn cone_contains(&self, rank: usize, cp: &ConePoint, alpha: f64) -> bool {
        cp.delta >= 0.0 && cp.delta <= alpha && self.in_ball(rank, cp.delta, &cp.x)
    }

    /// A rank whose ball at scale `beta` swallows the ball of `rank`.
    ///
    /// Returns `rank` itself while its ball is still alive at `beta`.
    /// Otherwise scans the greedy prefix with `lambda >= eps beta/(1+eps)` and
    /// returns the member nearest to `rank` (earliest on ties). The net
    /// covering property puts that member within `eps beta/(1+eps)`.
    pub fn covering_witness(&self, rank: usize, beta: f64) -> usize {
        if beta < self.removal_time(rank) {
            return rank;
        }
        let threshold = self.epsilon * beta / (1.0 + self.epsilon);
        let mut best = 0;
        let mut best_d = self.dist(0, rank);
        // lambda is non-increasing, so the qualifying ranks form a prefix
        for k in 1..self.len() {
            if self.lambda[k] < threshold {
                break;
            }
            let d = self.dist(k, rank);
            if d < best_d {
                best = k;
                best_d = d;
            }
        }
        best
    }

    /// Membership in the perturbed offsets, computed as the union of the
    /// truncated balls. Debug builds also evaluate the union of the untruncated
    /// capped balls and assert both agree.
    pub fn perturbed_offsets_contains(&self, x: &[f64], alpha: f64) -> bool {
        let truncated = (0..self.len()).any(|i| self.in_ball(i, alpha, x));
        debug_assert_eq!(
            truncated,
            self.perturbed_offsets_contains_capped(x, alpha),
            "truncated and capped unions disagree at alpha = {alpha}"
        );
        truncated
    }

    /// Membership in the union of `ball(p_i, r_i(alpha))` with no truncation.
    pub fn perturbed_offsets_contains_capped(&self, x: &[f64], alpha: f64) -> bool {
        (0..self.len()).any(|i| self.ordered.distance_to(i, x) <= self.radius(i, alpha))
    }
}
