//! Persistent homology over GF(2), full-filtration oracles and the
//! multiplicative barcode comparison.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::geometry::min_enclosing_ball;
use crate::greedy::fmt_real;
use crate::metric::{MetricKind, PointCloud};
use crate::simplex_enum::{FilteredComplex, FilteredSimplex};

/// Births below this are treated as zero when comparing barcodes.
pub const ZERO_BIRTH: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub dim: usize,
    pub birth: f64,
    /// `f64::INFINITY` for an essential class.
    pub death: f64,
}

impl Interval {
    /// `death / birth`, with `inf` for bars born at (numerical) zero.
    pub fn persistence_ratio(&self) -> f64 {
        if self.birth < ZERO_BIRTH {
            if self.death < ZERO_BIRTH { 1.0 } else { f64::INFINITY }
        } else {
            self.death / self.birth
        }
    }

    pub fn is_alive_at(&self, alpha: f64) -> bool {
        self.birth <= alpha && alpha < self.death
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Barcode {
    /// Sorted by `(dim, birth, death)`.
    pub intervals: Vec<Interval>,
    /// Pairs with equal birth and death, left out of `intervals`.
    pub zero_length: usize,
}

fn interval_order(a: &Interval, b: &Interval) -> std::cmp::Ordering {
    a.dim.cmp(&b.dim).then(a.birth.total_cmp(&b.birth)).then(a.death.total_cmp(&b.death))
}

impl Barcode {
    pub fn from_intervals(mut intervals: Vec<Interval>) -> Self {
        intervals.sort_by(interval_order);
        Barcode { intervals, zero_length: 0 }
    }

    pub fn in_dim(&self, dim: usize) -> impl Iterator<Item = &Interval> + '_ {
        self.intervals.iter().filter(move |i| i.dim == dim)
    }

    /// Bars of dimension below `dim`.
    pub fn below_dim(&self, dim: usize) -> Barcode {
        Barcode {
            intervals: self.intervals.iter().filter(|i| i.dim < dim).copied().collect(),
            zero_length: 0,
        }
    }

    pub fn max_dim(&self) -> Option<usize> {
        self.intervals.iter().map(|i| i.dim).max()
    }

    /// Number of bars of each dimension alive at `alpha`.
    pub fn betti_at(&self, alpha: f64, max_dim: usize) -> Vec<usize> {
        let mut b = vec![0; max_dim + 1];
        for i in &self.intervals {
            if i.dim <= max_dim && i.is_alive_at(alpha) {
                b[i.dim] += 1;
            }
        }
        b
    }

    /// Text form: `dim birth death` per line, `inf` for an infinite death.
    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        for i in &self.intervals {
            writeln!(w, "{} {} {}", i.dim, fmt_real(i.birth), fmt_real(i.death))?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut intervals = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let bad = |msg: String| Error::Parse { line: lineno + 1, msg };
            let toks: Vec<&str> = t.split_whitespace().collect();
            if toks.len() != 3 {
                return Err(bad(format!("expected `dim birth death`, got {} fields", toks.len())));
            }
            let dim = toks[0].parse().map_err(|e| bad(format!("bad dimension: {e}")))?;
            let birth: f64 = toks[1].parse().map_err(|e| bad(format!("bad birth: {e}")))?;
            let death: f64 = toks[2].parse().map_err(|e| bad(format!("bad death: {e}")))?;
            if birth > death || birth.is_nan() || death.is_nan() {
                return Err(bad(format!("birth {birth} exceeds death {death}")));
            }
            intervals.push(Interval { dim, birth, death });
        }
        Ok(Barcode::from_intervals(intervals))
    }
}

/// Symmetric difference of two ascending index lists.
fn add_columns(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Boundary columns: ascending indices of the facets of each simplex.
fn boundary_columns(fc: &FilteredComplex) -> Result<Vec<Vec<usize>>> {
    let index: HashMap<&[usize], usize> =
        fc.simplices.iter().enumerate().map(|(i, s)| (s.vertices.as_slice(), i)).collect();
    fc.simplices
        .iter()
        .map(|s| {
            let mut col = s
                .facets()
                .map(|f| {
                    index
                        .get(f.as_slice())
                        .copied()
                        .ok_or_else(|| Error::usage(format!("facet {f:?} of {:?} is missing", s.vertices)))
                })
                .collect::<Result<Vec<_>>>()?;
            col.sort_unstable();
            Ok(col)
        })
        .collect()
}

/// Standard persistence pairing by left-to-right column reduction.
pub fn compute_barcode(fc: &FilteredComplex) -> Result<Barcode> {
    fc.validate()?;
    let mut cols = boundary_columns(fc)?;
    let n = cols.len();
    // pivot_of[row] = column whose lowest one sits in `row`
    let mut pivot_of: Vec<Option<usize>> = vec![None; n];
    let mut paired = vec![false; n];
    let mut intervals = Vec::new();
    let mut zero_length = 0;
    for j in 0..n {
        let mut col = std::mem::take(&mut cols[j]);
        while let Some(&low) = col.last() {
            match pivot_of[low] {
                Some(k) => {
                    col = add_columns(&col, &cols[k]);
                    debug_assert!(col.last().is_none_or(|&l| l < low));
                }
                None => break,
            }
        }
        if let Some(&low) = col.last() {
            pivot_of[low] = Some(j);
            paired[low] = true;
            paired[j] = true;
            let creator = &fc.simplices[low];
            let birth = creator.birth;
            let death = fc.simplices[j].birth;
            debug_assert!(birth <= death);
            if birth == death {
                zero_length += 1;
            } else {
                intervals.push(Interval { dim: creator.dim(), birth, death });
            }
        }
        cols[j] = col;
    }
    for (i, s) in fc.simplices.iter().enumerate() {
        if !paired[i] {
            intervals.push(Interval { dim: s.dim(), birth: s.birth, death: f64::INFINITY });
        }
    }
    let mut bc = Barcode::from_intervals(intervals);
    bc.zero_length = zero_length;
    Ok(bc)
}

/// Rank over GF(2) of the rows given as bitsets.
fn gf2_rank(mut rows: Vec<Vec<u64>>) -> usize {
    let mut rank = 0;
    let words = rows.first().map_or(0, Vec::len);
    for w in 0..words {
        for bit in 0..64 {
            let mask = 1u64 << bit;
            let Some(p) = (rank..rows.len()).find(|&r| rows[r][w] & mask != 0) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for row in &mut rows[rank + 1..] {
                if row[w] & mask != 0 {
                    for (x, y) in row[w..].iter_mut().zip(&pivot[w..]) {
                        *x ^= y;
                    }
                }
            }
            rank += 1;
        }
    }
    rank
}

/// Betti numbers over GF(2) of a closed complex, dims `0..=max_dim`, by
/// ranks of boundary matrices.
pub fn betti_numbers(simplices: &[Vec<usize>], max_dim: usize) -> Result<Vec<usize>> {
    let mut by_dim: Vec<Vec<&Vec<usize>>> = vec![Vec::new(); max_dim + 2];
    for s in simplices {
        if s.is_empty() {
            continue;
        }
        let d = s.len() - 1;
        if d <= max_dim + 1 {
            by_dim[d].push(s);
        }
    }
    let index: Vec<HashMap<&[usize], usize>> = by_dim
        .iter()
        .map(|list| list.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect())
        .collect();
    // rank of the boundary map from dim d to dim d-1
    let mut ranks = vec![0; max_dim + 2];
    for d in 1..=max_dim + 1 {
        let words = by_dim[d - 1].len().div_ceil(64);
        let mut rows = Vec::with_capacity(by_dim[d].len());
        for s in &by_dim[d] {
            let mut row = vec![0u64; words];
            for skip in 0..s.len() {
                let f: Vec<usize> = s.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v).collect();
                let &i = index[d - 1]
                    .get(f.as_slice())
                    .ok_or_else(|| Error::usage(format!("facet {f:?} of {s:?} is missing")))?;
                row[i / 64] ^= 1 << (i % 64);
            }
            rows.push(row);
        }
        ranks[d] = gf2_rank(rows);
    }
    Ok((0..=max_dim).map(|d| by_dim[d].len() - ranks[d] - ranks[d + 1]).collect())
}

/// Cliques of the graph `dist <= 2 alpha_max`, up to `max_dim + 1` vertices.
fn full_cliques(cloud: &PointCloud, max_dim: usize, alpha_max: f64) -> Vec<Vec<usize>> {
    let n = cloud.len();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| (i + 1..n).filter(|&j| cloud.distance(i, j) <= 2.0 * alpha_max).collect())
        .collect();
    let mut out = Vec::new();
    let mut stack = Vec::new();
    fn grow(adj: &[Vec<usize>], cand: &[usize], stack: &mut Vec<usize>, limit: usize, out: &mut Vec<Vec<usize>>) {
        out.push(stack.clone());
        if stack.len() == limit {
            return;
        }
        for (i, &u) in cand.iter().enumerate() {
            let next: Vec<usize> = cand[i + 1..].iter().copied().filter(|w| adj[u].binary_search(w).is_ok()).collect();
            stack.push(u);
            grow(adj, &next, stack, limit, out);
            stack.pop();
        }
    }
    for v in 0..n {
        stack.push(v);
        grow(&adj, &adj[v], &mut stack, max_dim + 1, &mut out);
        stack.pop();
    }
    out
}

fn finish_oracle(mut simplices: Vec<FilteredSimplex>, max_dim: usize) -> Result<FilteredComplex> {
    // enclosing-ball radii are monotone in exact arithmetic; clamp rounding
    simplices.sort_by_key(|s| s.vertices.len());
    let mut births: HashMap<Vec<usize>, f64> = HashMap::with_capacity(simplices.len());
    for s in &mut simplices {
        let m = s.facets().filter_map(|f| births.get(&f).copied()).fold(0.0, f64::max);
        s.birth = s.birth.max(m);
        births.insert(s.vertices.clone(), s.birth);
    }
    FilteredComplex::new(simplices, max_dim)
}

/// Full Rips filtration: every simplex with `diameter / 2 <= alpha_max`,
/// born at half its diameter. `alpha_max = None` means the cloud diameter.
pub fn full_rips_filtration(cloud: &PointCloud, max_dim: usize, alpha_max: Option<f64>) -> Result<FilteredComplex> {
    let alpha_max = alpha_max.unwrap_or_else(|| cloud.diameter());
    let simplices = full_cliques(cloud, max_dim, alpha_max)
        .into_iter()
        .map(|vertices| {
            let mut diam = 0.0f64;
            for (i, &a) in vertices.iter().enumerate() {
                for &b in &vertices[i + 1..] {
                    diam = diam.max(cloud.distance(a, b));
                }
            }
            FilteredSimplex { vertices, birth: diam / 2.0 }
        })
        .collect();
    FilteredComplex::new(simplices, max_dim)
}

/// Full l2 Čech filtration: simplices born at the radius of the smallest
/// enclosing ball of their vertices, kept if at most `alpha_max`.
pub fn full_cech_filtration_l2(cloud: &PointCloud, max_dim: usize, alpha_max: Option<f64>) -> Result<FilteredComplex> {
    if cloud.metric() != MetricKind::L2 {
        return Err(Error::usage("the full Čech oracle needs an l2 cloud"));
    }
    let alpha_max = alpha_max.unwrap_or_else(|| cloud.diameter());
    let simplices = full_cliques(cloud, max_dim, alpha_max)
        .into_iter()
        .filter_map(|vertices| {
            let pts: Vec<&[f64]> = vertices.iter().map(|&v| cloud.point(v)).collect();
            let birth = if pts.len() == 1 { 0.0 } else { min_enclosing_ball(&pts) };
            (birth <= alpha_max).then_some(FilteredSimplex { vertices, birth })
        })
        .collect();
    finish_oracle(simplices, max_dim)
}

/// Outcome of [`barcode_approx_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub matched: Vec<(Interval, Interval)>,
    /// Bars left unmatched, all with `death / birth <= c`.
    pub unmatched_ok: Vec<Interval>,
    pub ok: bool,
    /// Smallest `c` at which the check passes (`inf` if none does).
    pub worst_ratio: f64,
}

fn endpoint_ratio(x: f64, y: f64) -> f64 {
    if x == f64::INFINITY || y == f64::INFINITY {
        return if x == y { 1.0 } else { f64::INFINITY };
    }
    if x < ZERO_BIRTH && y < ZERO_BIRTH {
        return 1.0;
    }
    let (lo, hi) = if x < y { (x, y) } else { (y, x) };
    if lo <= 0.0 { f64::INFINITY } else { hi / lo }
}

/// Largest of the four endpoint ratios of a candidate pair.
pub fn pair_ratio(a: &Interval, b: &Interval) -> f64 {
    endpoint_ratio(a.birth, b.birth).max(endpoint_ratio(a.death, b.death))
}

/// Maximum bipartite matching (Hopcroft–Karp); returns the partner of each
/// left vertex.
fn max_matching(adj: &[Vec<usize>], n_right: usize) -> Vec<Option<usize>> {
    let n_left = adj.len();
    let mut mate_l: Vec<Option<usize>> = vec![None; n_left];
    let mut mate_r: Vec<Option<usize>> = vec![None; n_right];
    let mut dist = vec![usize::MAX; n_left];
    loop {
        // BFS layering from free left vertices
        let mut queue = std::collections::VecDeque::new();
        for u in 0..n_left {
            if mate_l[u].is_none() {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                match mate_r[v] {
                    None => found = true,
                    Some(w) if dist[w] == usize::MAX => {
                        dist[w] = dist[u] + 1;
                        queue.push_back(w);
                    }
                    Some(_) => {}
                }
            }
        }
        if !found {
            return mate_l;
        }
        fn augment(
            u: usize,
            adj: &[Vec<usize>],
            dist: &mut [usize],
            mate_l: &mut [Option<usize>],
            mate_r: &mut [Option<usize>],
        ) -> bool {
            for &v in &adj[u] {
                let ok = match mate_r[v] {
                    None => true,
                    Some(w) => dist[w] == dist[u] + 1 && augment(w, adj, dist, mate_l, mate_r),
                };
                if ok {
                    mate_l[u] = Some(v);
                    mate_r[v] = Some(u);
                    return true;
                }
            }
            dist[u] = usize::MAX;
            false
        }
        for u in 0..n_left {
            if mate_l[u].is_none() {
                augment(u, adj, &mut dist, &mut mate_l, &mut mate_r);
            }
        }
    }
}

/// Matching of one dimension at ratio `c`: pairs `(i, j)` of indices into
/// `a` and `b`, or `None` if bars that must be matched cannot all be.
fn match_dim(a: &[Interval], b: &[Interval], c: f64) -> Option<Vec<(usize, usize)>> {
    let (n1, n2) = (a.len(), b.len());
    // left: a bars then dummies of b bars; right: b bars then dummies of a bars
    let mut adj: Vec<Vec<usize>> = Vec::with_capacity(n1 + n2);
    for (i, x) in a.iter().enumerate() {
        let mut row: Vec<usize> = (0..n2).filter(|&j| pair_ratio(x, &b[j]) <= c).collect();
        if x.persistence_ratio() <= c {
            row.push(n2 + i);
        }
        adj.push(row);
    }
    for (j, y) in b.iter().enumerate() {
        let mut row: Vec<usize> = if y.persistence_ratio() <= c { vec![j] } else { Vec::new() };
        row.extend(n2..n2 + n1);
        adj.push(row);
    }
    let mate = max_matching(&adj, n1 + n2);
    if mate.iter().any(Option::is_none) {
        return None;
    }
    Some((0..n1).filter_map(|i| mate[i].filter(|&j| j < n2).map(|j| (i, j))).collect())
}

/// Decides whether `b1` is a multiplicative `c`-approximation of `b2`: a
/// partial matching per dimension in which matched bars have all endpoint
/// ratios at most `c` and every unmatched bar has `death / birth <= c`.
pub fn barcode_approx_check(b1: &Barcode, b2: &Barcode, c: f64) -> MatchResult {
    let top = b1.max_dim().max(b2.max_dim());
    let dims: Vec<(Vec<Interval>, Vec<Interval>)> = match top {
        None => Vec::new(),
        Some(top) => (0..=top)
            .map(|d| (b1.in_dim(d).copied().collect(), b2.in_dim(d).copied().collect()))
            .collect(),
    };
    let mut result = MatchResult { matched: Vec::new(), unmatched_ok: Vec::new(), ok: true, worst_ratio: 1.0 };
    for (a, b) in &dims {
        match match_dim(a, b, c) {
            Some(pairs) => {
                let mut used_a = vec![false; a.len()];
                let mut used_b = vec![false; b.len()];
                for &(i, j) in &pairs {
                    used_a[i] = true;
                    used_b[j] = true;
                    result.matched.push((a[i], b[j]));
                }
                result.unmatched_ok.extend(a.iter().zip(&used_a).filter(|(_, &u)| !u).map(|(x, _)| *x));
                result.unmatched_ok.extend(b.iter().zip(&used_b).filter(|(_, &u)| !u).map(|(x, _)| *x));
            }
            None => result.ok = false,
        }
        result.worst_ratio = result.worst_ratio.max(min_ratio_dim(a, b));
    }
    if !result.ok {
        result.matched.clear();
        result.unmatched_ok.clear();
    }
    result
}

/// Smallest `c` for which [`match_dim`] succeeds: feasibility only changes
/// at pair ratios and persistence ratios, so binary search over those.
fn min_ratio_dim(a: &[Interval], b: &[Interval]) -> f64 {
    let mut cands: Vec<f64> = vec![1.0];
    cands.extend(a.iter().chain(b).map(Interval::persistence_ratio));
    for x in a {
        cands.extend(b.iter().map(|y| pair_ratio(x, y)));
    }
    cands.retain(|c| c.is_finite() && *c >= 1.0);
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    if match_dim(a, b, *cands.last().unwrap()).is_none() {
        return f64::INFINITY;
    }
    let (mut lo, mut hi) = (0, cands.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if match_dim(a, b, cands[mid]).is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    cands[lo]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn s(v: &[usize], birth: f64) -> FilteredSimplex {
        FilteredSimplex { vertices: v.to_vec(), birth }
    }

    fn iv(dim: usize, birth: f64, death: f64) -> Interval {
        Interval { dim, birth, death }
    }

    fn circle(n: usize) -> PointCloud {
        let pts = (0..n)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                vec![t.cos(), t.sin()]
            })
            .collect();
        PointCloud::new(pts, MetricKind::L2).unwrap()
    }

    #[test]
    fn tiny_barcodes() {
        let one = FilteredComplex::new(vec![s(&[0], 0.0)], 0).unwrap();
        assert_eq!(compute_barcode(&one).unwrap().intervals, vec![iv(0, 0.0, f64::INFINITY)]);

        let edge = FilteredComplex::new(vec![s(&[0], 0.0), s(&[1], 0.0), s(&[0, 1], 1.0)], 1).unwrap();
        let bc = compute_barcode(&edge).unwrap();
        assert_eq!(bc.intervals, vec![iv(0, 0.0, 1.0), iv(0, 0.0, f64::INFINITY)]);
        assert_eq!(bc.zero_length, 0);

        let filled = FilteredComplex::new(
            vec![s(&[0], 0.0), s(&[1], 0.0), s(&[2], 0.0), s(&[0, 1], 1.0), s(&[1, 2], 1.0), s(&[0, 2], 2.0), s(&[0, 1, 2], 2.0)],
            2,
        )
        .unwrap();
        let bc = compute_barcode(&filled).unwrap();
        assert_eq!(bc.in_dim(1).count(), 0);
        assert_eq!(bc.zero_length, 1);
    }

    #[test]
    fn rejects_bad_input() {
        let unclosed = FilteredComplex { simplices: vec![s(&[0], 0.0), s(&[0, 1], 1.0)], max_dim: 1 };
        assert!(matches!(compute_barcode(&unclosed), Err(Error::Usage(_))));
        let unsorted = FilteredComplex { simplices: vec![s(&[0], 1.0), s(&[1], 0.0)], max_dim: 0 };
        assert!(matches!(compute_barcode(&unsorted), Err(Error::Usage(_))));
    }

    #[test]
    fn circle_has_one_long_loop() {
        let fc = full_rips_filtration(&circle(12), 2, None).unwrap();
        let bc = compute_barcode(&fc).unwrap();
        let loops: Vec<_> = bc.in_dim(1).collect();
        assert_eq!(loops.len(), 1);
        let pi = std::f64::consts::PI;
        assert_relative_eq!(loops[0].birth, (pi / 12.0).sin(), max_relative = 1e-12);
        assert_relative_eq!(loops[0].death, (pi / 3.0).sin(), max_relative = 1e-12);
        assert!(loops[0].persistence_ratio() > 2.0);
        assert_eq!(bc.in_dim(0).filter(|i| i.death == f64::INFINITY).count(), 1);
    }

    #[test]
    fn oracle_examples() {
        let pair = PointCloud::new(vec![vec![0.0, 0.0], vec![2.0, 0.0]], MetricKind::L2).unwrap();
        let fc = full_rips_filtration(&pair, 1, None).unwrap();
        assert_eq!(fc.simplices.last().unwrap().birth, 1.0);
        let fc = full_cech_filtration_l2(&pair, 1, None).unwrap();
        assert_eq!(fc.simplices.last().unwrap().birth, 1.0);

        let h = 3.0f64.sqrt();
        let tri = PointCloud::new(vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![1.0, h]], MetricKind::L2).unwrap();
        let rips = full_rips_filtration(&tri, 2, None).unwrap();
        assert_relative_eq!(rips.simplices.last().unwrap().birth, 1.0, max_relative = 1e-15);
        let cech = full_cech_filtration_l2(&tri, 2, None).unwrap();
        assert_relative_eq!(cech.simplices.last().unwrap().birth, 2.0 / h, max_relative = 1e-12);

        let line = PointCloud::new(vec![vec![0.0], vec![1.0], vec![2.0]], MetricKind::L2).unwrap();
        let cech = full_cech_filtration_l2(&line, 2, None).unwrap();
        assert_eq!(cech.simplices.last().unwrap().vertices, vec![0, 1, 2]);
        assert_relative_eq!(cech.simplices.last().unwrap().birth, 1.0, max_relative = 1e-12);

        // alpha_max cuts long edges
        let fc = full_rips_filtration(&line, 2, Some(0.5)).unwrap();
        assert_eq!(fc.counts_by_dim(), vec![3, 2, 0]);
    }

    #[test]
    fn approx_check_examples() {
        let b = Barcode::from_intervals(vec![iv(0, 0.0, f64::INFINITY), iv(0, 0.0, 1.0), iv(1, 1.0, 3.0), iv(1, 2.0, 2.5)]);
        let r = barcode_approx_check(&b, &b, 1.0);
        assert!(r.ok);
        assert_eq!(r.worst_ratio, 1.0);

        let long = Barcode::from_intervals(vec![iv(1, 1.0, 3.0), iv(1, 2.0, 5.0), iv(2, 0.5, 4.0)]);
        let scaled = Barcode::from_intervals(
            long.intervals.iter().map(|i| iv(i.dim, i.birth * 1.05, i.death * 1.05)).collect(),
        );
        assert!(barcode_approx_check(&scaled, &long, 1.05).ok);
        assert!(!barcode_approx_check(&scaled, &long, 1.01).ok);
        let r = barcode_approx_check(&scaled, &long, 1.05);
        assert_relative_eq!(r.worst_ratio, 1.05, max_relative = 1e-12);
        assert_eq!(r.matched.len(), 3);
    }

    #[test]
    fn approx_check_rules() {
        let inf = f64::INFINITY;
        // finite death never matches an infinite one
        let a = Barcode::from_intervals(vec![iv(0, 0.0, inf)]);
        let b = Barcode::from_intervals(vec![iv(0, 0.0, 10.0)]);
        assert!(!barcode_approx_check(&a, &b, 100.0).ok);
        // short bars may go unmatched
        let short = Barcode::from_intervals(vec![iv(1, 1.0, 1.2)]);
        let r = barcode_approx_check(&short, &Barcode::default(), 1.3);
        assert!(r.ok);
        assert_eq!(r.unmatched_ok.len(), 1);
        assert!(!barcode_approx_check(&short, &Barcode::default(), 1.1).ok);
        assert_relative_eq!(barcode_approx_check(&short, &Barcode::default(), 1.1).worst_ratio, 1.2, max_relative = 1e-12);
        // births below the zero threshold are interchangeable
        let z1 = Barcode::from_intervals(vec![iv(0, 0.0, 2.0)]);
        let z2 = Barcode::from_intervals(vec![iv(0, 1e-12, 2.0)]);
        assert!(barcode_approx_check(&z1, &z2, 1.0).ok);
    }

    #[test]
    fn betti_by_rank() {
        let hollow: Vec<Vec<usize>> = vec![vec![0], vec![1], vec![2], vec![0, 1], vec![1, 2], vec![0, 2]];
        assert_eq!(betti_numbers(&hollow, 1).unwrap(), vec![1, 1]);
        let mut filled = hollow.clone();
        filled.push(vec![0, 1, 2]);
        assert_eq!(betti_numbers(&filled, 2).unwrap(), vec![1, 0, 0]);
        assert_eq!(betti_numbers(&[vec![0], vec![5]], 0).unwrap(), vec![2]);
        assert!(betti_numbers(&[vec![0, 1]], 1).is_err());
    }

    #[test]
    fn barcode_text_round_trip() {
        let b = Barcode::from_intervals(vec![iv(1, 0.5, 2.0), iv(0, 0.0, f64::INFINITY), iv(0, 0.0, 0.25)]);
        let mut buf = Vec::new();
        b.write(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "0 0 0.25\n0 0 inf\n1 0.5 2\n");
        assert_eq!(Barcode::read(buf.as_slice()).unwrap(), b);
        assert!(Barcode::read("0 2 1\n".as_bytes()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn bars_alive_equal_rank_betti(seed in any::<u64>(), n in 4usize..12) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts = (0..n).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect();
            let cloud = PointCloud::new(pts, MetricKind::L2).unwrap();
            let fc = full_rips_filtration(&cloud, 2, None).unwrap();
            let bc = compute_barcode(&fc).unwrap();
            for alpha in [0.05, 0.15, 0.3] {
                let expect = betti_numbers(&fc.at_scale(alpha), 2).unwrap();
                prop_assert_eq!(bc.betti_at(alpha, 2), expect);
            }
        }

        #[test]
        fn worst_ratio_is_tight(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut bars = |k: usize| -> Barcode {
                Barcode::from_intervals((0..k).map(|_| {
                    let b = rng.random_range(0.1..1.0);
                    iv(1, b, b * rng.random_range(1.0..4.0))
                }).collect())
            };
            let (a, b) = (bars(4), bars(5));
            let w = barcode_approx_check(&a, &b, 1.0).worst_ratio;
            prop_assert!(w.is_finite());
            prop_assert!(barcode_approx_check(&a, &b, w).ok);
            prop_assert!(!barcode_approx_check(&a, &b, w * (1.0 - 1e-9)).ok || w == 1.0);
        }
    }
}
