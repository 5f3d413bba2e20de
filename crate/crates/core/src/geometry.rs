//! Small Euclidean solvers used for Čech birth times.
//!
//! * [`min_max_power`] minimizes `max_j |x - p_j|^2 - w_j` over `x`. The
//!   minimizer lies in the convex hull of an affinely independent active set
//!   where all active terms are equal; that point is the solution of a linear
//!   system on the affine hull. Trying every affinely independent subset of
//!   size at most `dim + 1` and keeping the best objective value is exact.
//! * [`min_enclosing_ball`] is Welzl's move-to-front recursion.

/// Point on the affine hull of `pts` where `|x - p|^2 - w` is equal for every
/// listed point, or `None` if the points are affinely dependent.
fn equal_power_point(pts: &[&[f64]], weights: &[f64]) -> Option<Vec<f64>> {
    let base = pts[0];
    let m = pts.len() - 1;
    if m == 0 {
        return Some(base.to_vec());
    }
    let dirs: Vec<Vec<f64>> = pts[1..]
        .iter()
        .map(|p| p.iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    // 2 G mu = rhs, G the Gram matrix of the directions
    let mut a = vec![vec![0.0; m + 1]; m];
    for k in 0..m {
        for l in 0..m {
            a[k][l] = 2.0 * dot(&dirs[k], &dirs[l]);
        }
        a[k][m] = dot(&dirs[k], &dirs[k]) + weights[0] - weights[k + 1];
    }
    let scale = (0..m).map(|k| a[k][k].abs()).fold(0.0, f64::max);
    let mu = solve_in_place(&mut a, scale * 1e-12)?;
    let mut x = base.to_vec();
    for (coef, dir) in mu.iter().zip(&dirs) {
        for (xi, di) in x.iter_mut().zip(dir) {
            *xi += coef * di;
        }
    }
    Some(x)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Gaussian elimination with partial pivoting on an augmented `m x (m+1)`
/// system. Returns `None` when a pivot falls below `tiny`.
fn solve_in_place(a: &mut [Vec<f64>], tiny: f64) -> Option<Vec<f64>> {
    let m = a.len();
    for col in 0..m {
        let piv = (col..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= tiny || a[piv][col].is_nan() {
            return None;
        }
        a.swap(col, piv);
        let (top, bottom) = a.split_at_mut(col + 1);
        let pivot = &top[col];
        for row in bottom {
            let f = row[col] / pivot[col];
            if f != 0.0 {
                for (x, p) in row[col..].iter_mut().zip(&pivot[col..]) {
                    *x -= f * p;
                }
            }
        }
    }
    let mut x = vec![0.0; m];
    for row in (0..m).rev() {
        let s: f64 = (row + 1..m).map(|c| a[row][c] * x[c]).sum();
        x[row] = (a[row][m] - s) / a[row][row];
    }
    Some(x)
}

/// `min_x max_j (|x - p_j|^2 - w_j)` together with a minimizer.
///
/// Exponential in the number of points; meant for simplices.
pub fn min_max_power(pts: &[&[f64]], weights: &[f64]) -> (f64, Vec<f64>) {
    assert!(!pts.is_empty() && pts.len() == weights.len());
    let dim = pts[0].len();
    let eval = |x: &[f64]| {
        pts.iter()
            .zip(weights)
            .map(|(p, w)| sq_dist(x, p) - w)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let m = pts.len();
    let max_size = m.min(dim + 1);
    let mut best = (f64::INFINITY, pts[0].to_vec());
    let mut chosen = Vec::with_capacity(max_size);
    for mask in 1u64..(1u64 << m) {
        let size = mask.count_ones() as usize;
        if size > max_size {
            continue;
        }
        chosen.clear();
        chosen.extend((0..m).filter(|&j| mask & (1 << j) != 0));
        let sub_pts: Vec<&[f64]> = chosen.iter().map(|&j| pts[j]).collect();
        let sub_w: Vec<f64> = chosen.iter().map(|&j| weights[j]).collect();
        if let Some(x) = equal_power_point(&sub_pts, &sub_w) {
            let v = eval(&x);
            if v < best.0 {
                best = (v, x);
            }
        }
    }
    best
}

/// Whether `min_x max_j (|x - p_j|^2 - w_j) <= slack`, stopping at the first
/// active set that certifies it. `None` if the objective evaluates to NaN.
pub fn power_feasible(pts: &[&[f64]], weights: &[f64], slack: f64) -> Option<bool> {
    assert!(!pts.is_empty() && pts.len() == weights.len());
    let m = pts.len();
    let max_size = m.min(pts[0].len() + 1);
    let mut sub_pts: Vec<&[f64]> = Vec::with_capacity(max_size);
    let mut sub_w = Vec::with_capacity(max_size);
    for size in 1..=max_size {
        for mask in 1u64..(1u64 << m) {
            if mask.count_ones() as usize != size {
                continue;
            }
            sub_pts.clear();
            sub_w.clear();
            for j in (0..m).filter(|&j| mask & (1 << j) != 0) {
                sub_pts.push(pts[j]);
                sub_w.push(weights[j]);
            }
            if let Some(x) = equal_power_point(&sub_pts, &sub_w) {
                let mut v = f64::NEG_INFINITY;
                for (p, w) in pts.iter().zip(weights) {
                    v = v.max(sq_dist(&x, p) - w);
                }
                if v.is_nan() || x.iter().any(|c| c.is_nan()) {
                    return None;
                }
                if v <= slack {
                    return Some(true);
                }
            }
        }
    }
    Some(false)
}

/// Radius of the smallest Euclidean ball containing all points.
pub fn min_enclosing_ball(pts: &[&[f64]]) -> f64 {
    if pts.is_empty() {
        return 0.0;
    }
    let mut work: Vec<&[f64]> = pts.to_vec();
    let mut boundary = Vec::new();
    let (_, r2) = welzl(&mut work, pts.len(), &mut boundary);
    r2.max(0.0).sqrt()
}

fn welzl<'a>(pts: &mut Vec<&'a [f64]>, n: usize, boundary: &mut Vec<&'a [f64]>) -> (Vec<f64>, f64) {
    let dim = pts.first().or(boundary.first()).map_or(0, |p| p.len());
    if n == 0 || boundary.len() == dim + 1 {
        return circumball(boundary, dim);
    }
    let p = pts[n - 1];
    let (c, r2) = welzl(pts, n - 1, boundary);
    if sq_dist(&c, p) <= r2 * (1.0 + 1e-12) + 1e-300 {
        return (c, r2);
    }
    boundary.push(p);
    let ball = welzl(pts, n - 1, boundary);
    boundary.pop();
    // move to front
    pts[..n].rotate_right(1);
    pts[0] = p;
    ball
}

/// Smallest ball with every listed point on its boundary, center on their
/// affine hull.
fn circumball(boundary: &[&[f64]], dim: usize) -> (Vec<f64>, f64) {
    match boundary.len() {
        0 => (vec![0.0; dim], -1.0),
        1 => (boundary[0].to_vec(), 0.0),
        _ => {
            let zeros = vec![0.0; boundary.len()];
            match equal_power_point(boundary, &zeros) {
                Some(c) => {
                    let r2 = sq_dist(&c, boundary[0]);
                    (c, r2)
                }
                // affinely dependent boundary: fall back to the widest pair
                None => {
                    let mut best = (boundary[0].to_vec(), 0.0);
                    for (i, a) in boundary.iter().enumerate() {
                        for b in &boundary[i + 1..] {
                            let r2 = sq_dist(a, b) / 4.0;
                            if r2 > best.1 {
                                let c = a.iter().zip(b.iter()).map(|(x, y)| 0.5 * (x + y)).collect();
                                best = (c, r2);
                            }
                        }
                    }
                    best
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn feasibility_agrees_with_minimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..500 {
            let m = rng.random_range(1..=5);
            let dim = rng.random_range(1..=3);
            let pts: Vec<Vec<f64>> = (0..m).map(|_| (0..dim).map(|_| rng.random::<f64>()).collect()).collect();
            let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
            let w: Vec<f64> = (0..m).map(|_| rng.random::<f64>() * 0.5).collect();
            let (f, _) = min_max_power(&refs, &w);
            for slack in [f - 1e-9, f + 1e-9] {
                assert_eq!(power_feasible(&refs, &w, slack), Some(f <= slack));
            }
        }
    }

    #[test]
    fn enclosing_ball_examples() {
        let pair: [&[f64]; 2] = [&[0.0, 0.0], &[2.0, 0.0]];
        assert_relative_eq!(min_enclosing_ball(&pair), 1.0);
        let h = 3.0f64.sqrt();
        let tri: [&[f64]; 3] = [&[0.0, 0.0], &[2.0, 0.0], &[1.0, h]];
        assert_relative_eq!(min_enclosing_ball(&tri), 2.0 / 3.0f64.sqrt(), epsilon = 1e-12);
        let collinear: [&[f64]; 3] = [&[0.0], &[1.0], &[2.0]];
        assert_relative_eq!(min_enclosing_ball(&collinear), 1.0);
        let collinear2d: [&[f64]; 3] = [&[0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0]];
        assert_relative_eq!(min_enclosing_ball(&collinear2d), 2.0f64.sqrt(), epsilon = 1e-12);
        let obtuse: [&[f64]; 3] = [&[0.0, 0.0], &[4.0, 0.0], &[2.0, 0.5]];
        assert_relative_eq!(min_enclosing_ball(&obtuse), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn power_with_zero_weights_is_enclosing_radius() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let m = rng.random_range(1..=4);
            let dim = rng.random_range(1..=3);
            let pts: Vec<Vec<f64>> = (0..m).map(|_| (0..dim).map(|_| rng.random::<f64>()).collect()).collect();
            let refs: Vec<&[f64]> = pts.iter().map(Vec::as_slice).collect();
            let (v, _) = min_max_power(&refs, &vec![0.0; m]);
            assert_relative_eq!(v.sqrt(), min_enclosing_ball(&refs), epsilon = 1e-9);
        }
    }

    #[test]
    fn power_minimum_is_not_beaten_by_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let m = rng.random_range(1..=4);
            let pts: Vec<Vec<f64>> = (0..m).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect();
            let w: Vec<f64> = (0..m).map(|_| rng.random::<f64>() * 0.3).collect();
            let refs: Vec<&[f64]> = pts.iter().map(Vec::as_slice).collect();
            let (v, x) = min_max_power(&refs, &w);
            let f = |y: &[f64]| refs.iter().zip(&w).map(|(p, wj)| sq_dist(y, p) - wj).fold(f64::MIN, f64::max);
            assert_relative_eq!(f(&x), v);
            for _ in 0..200 {
                let y = [rng.random::<f64>() * 1.4 - 0.2, rng.random::<f64>() * 1.4 - 0.2];
                assert!(f(&y) >= v - 1e-12);
            }
        }
    }
}
