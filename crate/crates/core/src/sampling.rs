//! Randomized checks of the ball-inclusion facts the sparse filtration rests
//! on. Points are drawn inside balls, with a share placed exactly on the
//! boundary, since that is where the inclusions are tight.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::metric::MetricKind;
use crate::sparse_balls::{ConePoint, SparseParams};

/// Count of sampled instances and how many broke the property.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SampleStats {
    pub checked: usize,
    pub violations: usize,
    /// Instances that fail in exact floating-point comparison but hold
    /// within [`ROUNDING_TOL`]; not counted as violations.
    pub rounding: usize,
}

/// Relative tolerance for comparisons whose two sides agree in exact
/// arithmetic, such as convex combinations of boundary points.
pub const ROUNDING_TOL: f64 = 1e-12;

impl SampleStats {
    fn record(&mut self, holds: bool) {
        self.checked += 1;
        if !holds {
            self.violations += 1;
        }
    }

    pub fn merge(&mut self, other: SampleStats) {
        self.checked += other.checked;
        self.violations += other.violations;
        self.rounding += other.rounding;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CoveringStats {
    /// `x` in `b_j(alpha)`, `alpha <= beta` implies `x` in `b_w(beta)`.
    pub clause1: SampleStats,
    /// `x` in `ball(p_j, alpha)`, `beta >= (1+eps) alpha` implies `x` in `b_w(beta)`.
    pub clause2: SampleStats,
    /// Perturbed offsets at `alpha` lie inside the offsets at `alpha`.
    pub sandwich_lower: SampleStats,
    /// Offsets at `alpha` lie inside the perturbed offsets at `(1+eps) alpha`.
    pub sandwich_upper: SampleStats,
}

impl CoveringStats {
    pub fn violations(&self) -> usize {
        self.clause1.violations + self.clause2.violations + self.sandwich_lower.violations + self.sandwich_upper.violations
    }
}

/// A point of the closed ball of radius `r` around `center`; with
/// probability 1/4 it is on the boundary.
pub fn sample_in_ball(rng: &mut impl Rng, metric: MetricKind, center: &[f64], r: f64) -> Vec<f64> {
    let dir: Vec<f64> = loop {
        let d: Vec<f64> = (0..center.len()).map(|_| StandardNormal.sample(rng)).collect();
        let norm = metric.dist(&d, &vec![0.0; d.len()]);
        if norm > 1e-12 {
            break d.into_iter().map(|x| x / norm).collect();
        }
    };
    let t = if rng.random_bool(0.25) { 1.0 } else { rng.random::<f64>().powf(1.0 / center.len() as f64) };
    center.iter().zip(&dir).map(|(c, u)| c + r * t * u).collect()
}

fn scale_of(params: &SparseParams) -> f64 {
    let d = params.cloud().diameter();
    if d > 0.0 { d } else { 1.0 }
}

/// Samples both clauses of the covering lemma with [`SparseParams::covering_witness`]
/// as the witness, plus the offsets sandwich, `samples` times each.
pub fn check_covering(params: &SparseParams, samples: usize, seed: u64) -> CoveringStats {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let metric = params.metric();
    let n = params.len();
    let scale = scale_of(params);
    let eps = params.epsilon();
    let mut stats = CoveringStats::default();

    while stats.clause1.checked < samples {
        let j = rng.random_range(0..n);
        let removal = params.removal_time(j).min(2.0 * scale);
        let alpha = if rng.random_bool(0.1) { removal } else { rng.random::<f64>() * removal };
        let beta = match rng.random_range(0..3) {
            0 => alpha,
            1 => alpha * (1.0 + 3.0 * rng.random::<f64>()),
            _ => alpha.max(params.removal_time(j).min(4.0 * scale) * (1.0 + rng.random::<f64>())),
        };
        let r = params.ball_radius_or_empty(j, alpha);
        let x = sample_in_ball(&mut rng, metric, params.cloud().point(j), r.max(0.0));
        if !params.in_ball(j, alpha, &x) {
            // rounding put the sample just outside its ball
            continue;
        }
        let w = params.covering_witness(j, beta);
        stats.clause1.record(params.in_ball(w, beta, &x));
    }

    while stats.clause2.checked < samples {
        let j = rng.random_range(0..n);
        let alpha = rng.random::<f64>() * scale;
        let beta = (1.0 + eps) * alpha * if rng.random_bool(0.3) { 1.0 } else { 1.0 + 2.0 * rng.random::<f64>() };
        let x = sample_in_ball(&mut rng, metric, params.cloud().point(j), alpha);
        if params.cloud().distance_to(j, &x) > alpha {
            continue;
        }
        let w = params.covering_witness(j, beta);
        stats.clause2.record(params.in_ball(w, beta, &x));
    }

    let near_any = |x: &[f64], a: f64| (0..n).any(|k| params.cloud().distance_to(k, x) <= a);
    while stats.sandwich_lower.checked < samples {
        let j = rng.random_range(0..n);
        let alpha = rng.random::<f64>() * scale;
        let x = sample_in_ball(&mut rng, metric, params.cloud().point(j), alpha * 1.2);
        if params.perturbed_offsets_contains(&x, alpha) {
            stats.sandwich_lower.record(near_any(&x, alpha));
        }
        if near_any(&x, alpha) {
            stats.sandwich_upper.record(params.perturbed_offsets_contains(&x, (1.0 + eps) * alpha));
        }
    }
    stats
}

/// Cone membership with scale and radius comparisons relaxed by the
/// relative tolerance `tol`.
fn cone_contains_within(params: &SparseParams, i: usize, cp: &ConePoint, alpha: f64, tol: f64) -> bool {
    let limit = alpha.min(params.removal_time(i));
    if !(cp.delta >= 0.0 && cp.delta <= limit * (1.0 + tol)) {
        return false;
    }
    let r = params.radius(i, cp.delta.min(limit));
    params.cloud().distance_to(i, &cp.x) <= r * (1.0 + tol)
}

/// Samples pairs of points of a cone `U_i^alpha` and checks that a random
/// convex combination stays in it.
pub fn check_cone_convexity(params: &SparseParams, samples: usize, seed: u64) -> SampleStats {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let metric = params.metric();
    let scale = scale_of(params);
    let mut stats = SampleStats::default();
    while stats.checked < samples {
        let i = rng.random_range(0..params.len());
        let alpha = rng.random::<f64>() * params.removal_time(i).min(2.0 * scale);
        let cone_point = |rng: &mut ChaCha8Rng| -> Option<ConePoint> {
            let delta = if rng.random_bool(0.2) { alpha } else { rng.random::<f64>() * alpha };
            let r = params.ball_radius_or_empty(i, delta);
            let x = sample_in_ball(rng, metric, params.cloud().point(i), r.max(0.0));
            let cp = ConePoint { x, delta };
            params.cone_contains(i, &cp, alpha).then_some(cp)
        };
        let (Some(u), Some(v)) = (cone_point(&mut rng), cone_point(&mut rng)) else {
            continue;
        };
        let t: f64 = rng.random();
        let w = ConePoint {
            x: u.x.iter().zip(&v.x).map(|(a, b)| t * a + (1.0 - t) * b).collect(),
            delta: t * u.delta + (1.0 - t) * v.delta,
        };
        let exact = params.cone_contains(i, &w, alpha);
        stats.record(exact || cone_contains_within(params, i, &w, alpha, ROUNDING_TOL));
        if !exact {
            stats.rounding += 1;
        }
    }
    stats
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greedy::greedy_permutation;
    use crate::metric::PointCloud;
    use crate::sparse_balls::BirthMode;

    fn params(metric: MetricKind, eps: f64, seed: u64) -> SparseParams {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = (0..40).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect();
        let c = PointCloud::new(pts, metric).unwrap();
        let gp = greedy_permutation(&c, 0).unwrap();
        SparseParams::with_options(&c, &gp, eps, BirthMode::Strict).unwrap()
    }

    #[test]
    fn samples_stay_in_their_ball() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for metric in [MetricKind::L2, MetricKind::L1, MetricKind::Linf] {
            let mut on_boundary = 0;
            for _ in 0..400 {
                let x = sample_in_ball(&mut rng, metric, &[1.0, 2.0, 3.0], 0.5);
                let d = metric.dist(&x, &[1.0, 2.0, 3.0]);
                assert!(d <= 0.5 * (1.0 + 1e-12));
                if (d - 0.5).abs() < 1e-12 {
                    on_boundary += 1;
                }
            }
            assert!(on_boundary > 50);
        }
    }

    #[test]
    fn small_runs_are_clean() {
        for (k, metric) in [MetricKind::L2, MetricKind::L1, MetricKind::Linf].into_iter().enumerate() {
            let p = params(metric, 0.5, k as u64);
            let c = check_covering(&p, 300, 1);
            assert_eq!(c.violations(), 0, "{metric}: {c:?}");
            assert_eq!(c.clause1.checked, 300);
            let s = check_cone_convexity(&p, 300, 2);
            assert_eq!((s.checked, s.violations), (300, 0));
            assert!(s.rounding < 10);
        }
    }
}
