//! Incremental neighbor structure and sparse edge construction.
//!
//! Points are inserted in greedy order. Each point carries a level
//! `ceil(log2 lambda)`, a parent at a coarser level, a children list and a
//! neighbor list. After every insertion three invariants hold (checked by
//! [`NeighborStructure::check_invariants_bruteforce`]):
//!
//! * parent: a point coarser than the newest one is its own parent; every
//!   other point has a parent at a coarser level within `2^level(newest)`;
//! * child: `ch(p)` holds `p` and every point at the newest level whose parent
//!   is `p`;
//! * neighbor: `nbr(p)` holds every `q` with
//!   `d(p, q) <= kappa 2^min(level p, level q, level(newest) + 1)`.
//!
//! Lists are supersets; entries that are no longer required are dropped
//! lazily whenever a list is enumerated.

use crate::sparse_balls::{BirthMode, SparseParams};

/// `(eps^2 + 3 eps + 2) / eps`: every sparse edge at a point with insertion
/// radius `lambda` is shorter than `kappa lambda`.
pub fn kappa(epsilon: f64) -> f64 {
    (epsilon * epsilon + 3.0 * epsilon + 2.0) / epsilon
}

/// Dyadic level of an insertion radius. `TOP` stands for `lambda = inf` and
/// `BOTTOM` for `lambda = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Level(i32);

impl Level {
    pub const TOP: Level = Level(i32::MAX);
    pub const BOTTOM: Level = Level(i32::MIN);

    /// Smallest `l` with `lambda <= 2^l`.
    pub fn of(lambda: f64) -> Level {
        if lambda == f64::INFINITY {
            return Level::TOP;
        }
        if lambda <= 0.0 {
            return Level::BOTTOM;
        }
        let mut l = lambda.log2().ceil() as i32;
        while exp2(l) < lambda {
            l += 1;
        }
        while exp2(l - 1) >= lambda {
            l -= 1;
        }
        Level(l)
    }

    pub fn value(self) -> Option<i32> {
        (self != Level::TOP && self != Level::BOTTOM).then_some(self.0)
    }

    /// `2^level`, with `inf` at the top and `0` at the bottom.
    pub fn scale(self) -> f64 {
        match self {
            Level::TOP => f64::INFINITY,
            Level::BOTTOM => 0.0,
            Level(l) => exp2(l),
        }
    }

    /// One level coarser; the sentinels absorb.
    pub fn up(self) -> Level {
        match self {
            Level::TOP | Level::BOTTOM => self,
            Level(l) => Level(l + 1),
        }
    }
}

fn exp2(l: i32) -> f64 {
    (l as f64).exp2()
}

// Admission radii are widened by this factor so that edges sitting exactly on
// the kappa bound survive rounding. Lists only grow, so the invariants still hold.
const ADMIT_SLACK: f64 = 1.0 + 1e-12;

/// The parent / children / neighbor structure over a cloud in greedy order.
#[derive(Debug, Clone)]
pub struct NeighborStructure<'a> {
    params: &'a SparseParams,
    kappa: f64,
    level: Vec<Level>,
    parent: Vec<usize>,
    nbr: Vec<Vec<usize>>,
    ch: Vec<Vec<usize>>,
    // ranks grouped by level in insertion order; levels never increase so the
    // last bucket is the newest level
    buckets: Vec<(Level, Vec<usize>)>,
    inserted: usize,
    stamp: Vec<usize>,
}

impl<'a> NeighborStructure<'a> {
    pub fn new(params: &'a SparseParams) -> Self {
        let n = params.len();
        NeighborStructure {
            params,
            kappa: kappa(params.epsilon()),
            level: (0..n).map(|r| Level::of(params.lambda(r))).collect(),
            parent: (0..n).collect(),
            nbr: vec![Vec::new(); n],
            ch: vec![Vec::new(); n],
            buckets: Vec::new(),
            inserted: 0,
            stamp: vec![usize::MAX; n],
        }
    }

    pub fn inserted_count(&self) -> usize {
        self.inserted
    }

    pub fn level(&self, rank: usize) -> Level {
        self.level[rank]
    }

    pub fn parent(&self, rank: usize) -> usize {
        self.parent[rank]
    }

    pub fn neighbors(&self, rank: usize) -> &[usize] {
        &self.nbr[rank]
    }

    pub fn children(&self, rank: usize) -> &[usize] {
        &self.ch[rank]
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Inserts the next point in greedy order. Fails if `rank` is not the
    /// next one.
    pub fn insert(&mut self, rank: usize) -> crate::Result<()> {
        if rank != self.inserted || rank >= self.params.len() {
            return Err(crate::Error::usage(format!(
                "points must be inserted in greedy order: expected rank {}, got {rank}",
                self.inserted
            )));
        }
        self.inserted += 1;
        let li = self.level[rank];
        match self.buckets.last_mut() {
            Some((l, members)) if *l == li => members.push(rank),
            _ => self.buckets.push((li, vec![rank])),
        }
        if rank == 0 {
            self.parent[0] = 0;
            self.ch[0].push(0);
            self.nbr[0].push(0);
            return Ok(());
        }

        let prev_level = self.level[rank - 1];
        if li < prev_level {
            let (l, members) = &self.buckets[self.buckets.len() - 2];
            debug_assert_eq!(*l, prev_level);
            for &k in members {
                self.parent[k] = k;
            }
        }

        let pred = self.params.pred(rank).expect("every rank past 0 has a predecessor");
        let start = self.parent[pred];
        self.parent[rank] = start;
        let mut best_d = self.params.dist(rank, start);
        for k in self.live_neighbors(start) {
            let d = self.params.dist(rank, k);
            if d <= best_d && self.level[k] > li {
                self.parent[rank] = k;
                best_d = d;
            }
        }

        let par = self.parent[rank];
        self.ch[rank].push(rank);
        if par != rank {
            self.ch[par].push(rank);
        }
        self.nbr[rank].push(rank);

        let reach = self.kappa * li.scale() * ADMIT_SLACK;
        for m in self.live_neighbors(par) {
            for k in self.live_children(m) {
                if k == rank || self.stamp[k] == rank {
                    continue;
                }
                self.stamp[k] = rank;
                if self.params.dist(rank, k) <= reach {
                    self.nbr[rank].push(k);
                    self.nbr[k].push(rank);
                }
            }
        }
        Ok(())
    }

    fn newest_level(&self) -> Level {
        self.level[self.inserted - 1]
    }

    /// Neighbor requirement radius for the pair `(p, q)` at the current step.
    fn neighbor_reach(&self, p: usize, q: usize) -> f64 {
        let l = self.level[p].min(self.level[q]).min(self.newest_level().up());
        self.kappa * l.scale()
    }

    /// Prunes `nbr(q)` to the entries still required and returns a copy.
    fn live_neighbors(&mut self, q: usize) -> Vec<usize> {
        let mut list = std::mem::take(&mut self.nbr[q]);
        list.retain(|&k| self.params.dist(q, k) <= self.neighbor_reach(q, k) * ADMIT_SLACK);
        self.nbr[q] = list.clone();
        list
    }

    /// Prunes `ch(q)` to the entries still required and returns a copy.
    fn live_children(&mut self, q: usize) -> Vec<usize> {
        let newest = self.newest_level();
        let mut list = std::mem::take(&mut self.ch[q]);
        list.retain(|&k| k == q || (self.parent[k] == q && self.level[k] == newest));
        self.ch[q] = list.clone();
        list
    }

    /// Verifies the three invariants for the points inserted so far by a
    /// quadratic scan. Intended as a test oracle.
    pub fn check_invariants_bruteforce(&self) -> bool {
        let count = self.inserted;
        if count == 0 {
            return true;
        }
        let newest = self.newest_level();
        let p = self.params;
        for j in 0..count {
            let lj = self.level[j];
            if lj > newest || lj == Level::TOP {
                if self.parent[j] != j {
                    return false;
                }
            } else {
                let k = self.parent[j];
                if k >= count || self.level[k] <= newest || p.dist(j, k) > newest.scale() {
                    return false;
                }
            }
        }
        for j in 0..count {
            if !self.ch[j].contains(&j) {
                return false;
            }
        }
        for k in 0..count {
            let par = self.parent[k];
            if par != k && self.level[k] == newest && !self.ch[par].contains(&k) {
                return false;
            }
        }
        for j in 0..count {
            let listed: std::collections::HashSet<usize> = self.nbr[j].iter().copied().collect();
            for k in 0..count {
                if p.dist(j, k) <= self.neighbor_reach(j, k) && !listed.contains(&k) {
                    return false;
                }
            }
        }
        true
    }

    #[cfg(test)]
    pub(crate) fn set_parent_for_test(&mut self, rank: usize, parent: usize) {
        self.parent[rank] = parent;
    }
}

/// Birth time of the edge between two ranks, or `inf` if it never appears.
///
/// With `lambda_a <= lambda_b` (after swapping) and `c_a = lambda_a (1+eps)/eps`:
/// `d/2` if `d <= 2 c_a`; else `d - c_a` if `d <= c_a + c_b`; else `inf`.
/// In [`BirthMode::Strict`] a birth later than the removal time of the
/// smaller ball is also `inf`.
pub fn edge_birth_time(params: &SparseParams, a: usize, b: usize) -> f64 {
    let birth = growth_meeting_time(params, a, b, params.dist(a, b));
    let small = if params.lambda(a) > params.lambda(b) { b } else { a };
    match params.mode() {
        BirthMode::Strict if birth > params.removal_time(small) => f64::INFINITY,
        _ => birth,
    }
}

/// First scale at which the capped radii of `a` and `b` sum to `gap`,
/// ignoring removal times; `inf` if they never do.
pub fn growth_meeting_time(params: &SparseParams, a: usize, b: usize, gap: f64) -> f64 {
    let (small, large) = if params.lambda(a) > params.lambda(b) { (b, a) } else { (a, b) };
    let cap_small = params.radius_cap(small);
    if gap <= 2.0 * cap_small {
        gap / 2.0
    } else if gap <= cap_small + params.radius_cap(large) {
        gap - cap_small
    } else {
        f64::INFINITY
    }
}

/// A directed sparse edge from the later (smaller radius) endpoint to the
/// earlier one, by rank.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparseEdge {
    pub src: usize,
    pub dst: usize,
    pub birth: f64,
}

/// The directed edge graph. Out-neighbors of a rank are earlier ranks.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EdgeGraph {
    out: Vec<Vec<(usize, f64)>>,
    adj: Vec<Vec<(usize, f64)>>,
}

impl EdgeGraph {
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = SparseEdge>) -> Self {
        let mut out = vec![Vec::new(); n];
        let mut adj = vec![Vec::new(); n];
        for e in edges {
            out[e.src].push((e.dst, e.birth));
            adj[e.src].push((e.dst, e.birth));
            adj[e.dst].push((e.src, e.birth));
        }
        for list in out.iter_mut().chain(adj.iter_mut()) {
            list.sort_by_key(|&(v, _)| v);
            list.dedup_by_key(|&mut (v, _)| v);
        }
        EdgeGraph { out, adj }
    }

    pub fn vertex_count(&self) -> usize {
        self.out.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    /// Out-neighbors of `v` with edge births, sorted by neighbor.
    pub fn out_neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.out[v]
    }

    /// Birth of the undirected edge `{a, b}` if present.
    pub fn birth(&self, a: usize, b: usize) -> Option<f64> {
        let list = &self.adj[a];
        list.binary_search_by_key(&b, |&(v, _)| v).ok().map(|i| list[i].1)
    }

    pub fn edges(&self) -> impl Iterator<Item = SparseEdge> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(src, l)| l.iter().map(move |&(dst, birth)| SparseEdge { src, dst, birth }))
    }

    /// Edges sorted by `(birth, src, dst)`.
    pub fn sorted_edges(&self) -> Vec<SparseEdge> {
        let mut edges: Vec<_> = self.edges().collect();
        edges.sort_by(|x, y| x.birth.total_cmp(&y.birth).then(x.src.cmp(&y.src)).then(x.dst.cmp(&y.dst)));
        edges
    }

    pub fn max_out_degree(&self) -> usize {
        self.out.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// All sparse edges with finite birth times, found by inserting every point
/// into a [`NeighborStructure`] and testing its fresh neighbor list.
pub fn construct_edges(params: &SparseParams) -> EdgeGraph {
    let n = params.len();
    let mut ds = NeighborStructure::new(params);
    let mut edges = Vec::new();
    for rank in 0..n {
        ds.insert(rank).expect("ranks are inserted in order");
        for &k in ds.neighbors(rank) {
            if k == rank {
                continue;
            }
            let birth = edge_birth_time(params, rank, k);
            if birth < f64::INFINITY {
                edges.push(SparseEdge { src: rank, dst: k, birth });
            }
        }
    }
    EdgeGraph::from_edges(n, edges)
}

/// All-pairs reference for [`construct_edges`].
pub fn construct_edges_bruteforce(params: &SparseParams) -> EdgeGraph {
    let n = params.len();
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..a {
            let birth = edge_birth_time(params, a, b);
            if birth < f64::INFINITY {
                edges.push(SparseEdge { src: a, dst: b, birth });
            }
        }
    }
    EdgeGraph::from_edges(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greedy::greedy_permutation;
    use crate::metric::{MetricKind, PointCloud};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params_for(points: Vec<Vec<f64>>, eps: f64, mode: BirthMode) -> SparseParams {
        let c = PointCloud::new(points, MetricKind::L2).unwrap();
        let gp = greedy_permutation(&c, 0).unwrap();
        SparseParams::with_options(&c, &gp, eps, mode).unwrap()
    }

    fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
        (0..n).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect()
    }

    /// Smallest alpha with b_a(alpha) and b_b(alpha) overlapping, by bisection
    /// on the definition, or None when they never overlap.
    fn bisect_pair_birth(p: &SparseParams, a: usize, b: usize) -> Option<f64> {
        let meet = |alpha: f64| {
            let ra = p.ball_radius_or_empty(a, alpha);
            let rb = p.ball_radius_or_empty(b, alpha);
            ra >= 0.0 && rb >= 0.0 && p.dist(a, b) <= ra + rb
        };
        let hi0 = p.removal_time(a).min(p.removal_time(b));
        if !meet(hi0) {
            return None;
        }
        let (mut lo, mut hi) = (0.0, hi0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if meet(mid) {
                hi = mid
            } else {
                lo = mid
            }
        }
        Some(hi)
    }

    #[test]
    fn kappa_values() {
        assert_eq!(kappa(1.0), 6.0);
        assert_eq!(kappa(0.5), 7.5);
        assert_eq!(kappa(2.0), 6.0);
    }

    #[test]
    fn levels() {
        assert_eq!(Level::of(1.0).value(), Some(0));
        assert_eq!(Level::of(1.5).value(), Some(1));
        assert_eq!(Level::of(2.0).value(), Some(1));
        assert_eq!(Level::of(0.3).value(), Some(-1));
        assert_eq!(Level::of(f64::INFINITY), Level::TOP);
        assert_eq!(Level::of(0.0), Level::BOTTOM);
        assert!(Level::TOP > Level::of(1e300));
        assert!(Level::BOTTOM < Level::of(1e-300));
        assert_eq!(Level::BOTTOM.scale(), 0.0);
        assert_eq!(Level::TOP.up(), Level::TOP);
    }

    /// Rank 3 of this cloud sits at distance `d` from rank 0 with insertion
    /// radius 1.
    fn unit_lambda_at(d: f64, mode: BirthMode) -> SparseParams {
        params_for(vec![vec![0.0, 0.0], vec![0.0, 100.0], vec![d, 1.0], vec![d, 0.0]], 1.0, mode)
    }

    #[test]
    fn edge_birth_examples() {
        let p = params_for(vec![vec![0.0], vec![2.0]], 0.5, BirthMode::Strict);
        assert_eq!(edge_birth_time(&p, 0, 1), 1.0);

        let s5 = unit_lambda_at(5.0, BirthMode::Strict);
        assert_eq!((s5.lambda(3), s5.dist(0, 3)), (1.0, 5.0));
        assert_eq!(edge_birth_time(&s5, 3, 0), 3.0);
        assert_eq!(edge_birth_time(&s5, 0, 3), 3.0);
        assert_eq!(bisect_pair_birth(&s5, 0, 3).map(|b| (b - 3.0).abs() < 1e-12), Some(true));

        let s7 = unit_lambda_at(7.0, BirthMode::Strict);
        let l7 = unit_lambda_at(7.0, BirthMode::PaperLiteral);
        assert_eq!(edge_birth_time(&s7, 3, 0), f64::INFINITY);
        assert_eq!(edge_birth_time(&l7, 3, 0), 5.0);
        assert_eq!(bisect_pair_birth(&s7, 0, 3), None);
    }

    #[test]
    fn strict_birth_matches_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..20 {
            let eps = [0.3, 0.5, 1.0][trial % 3];
            let p = params_for(random_points(&mut rng, 25), eps, BirthMode::Strict);
            for a in 0..p.len() {
                for b in 0..a {
                    let formula = edge_birth_time(&p, a, b);
                    match bisect_pair_birth(&p, a, b) {
                        None => assert_eq!(formula, f64::INFINITY, "pair ({a},{b})"),
                        Some(t) => assert!((formula - t).abs() <= 1e-9 * (1.0 + t), "pair ({a},{b})"),
                    }
                }
            }
        }
    }

    #[test]
    fn small_graphs() {
        let one = params_for(vec![vec![1.0, 2.0]], 0.5, BirthMode::Strict);
        assert_eq!(construct_edges(&one).edge_count(), 0);
        let two = params_for(vec![vec![0.0, 0.0], vec![0.5, 0.0]], 0.5, BirthMode::Strict);
        let g = construct_edges(&two);
        assert_eq!(g.sorted_edges(), vec![SparseEdge { src: 1, dst: 0, birth: 0.25 }]);
        assert_eq!(g.birth(0, 1), Some(0.25));
    }

    #[test]
    fn fresh_structure() {
        let p = params_for(vec![vec![0.0, 0.0], vec![3.0, 0.0]], 0.5, BirthMode::Strict);
        let mut ds = NeighborStructure::new(&p);
        assert!(ds.check_invariants_bruteforce());
        ds.insert(0).unwrap();
        assert_eq!(ds.children(0), &[0]);
        assert_eq!(ds.parent(0), 0);
        assert!(ds.check_invariants_bruteforce());
        assert!(ds.insert(0).is_err());
        ds.insert(1).unwrap();
        let reach = ds.kappa() * ds.level(1).scale();
        let within = p.dist(0, 1) <= reach;
        assert_eq!(ds.neighbors(1).contains(&0), within);
        assert_eq!(ds.neighbors(0).contains(&1), within);
        assert!(within);
    }

    #[test]
    fn invariants_hold_after_every_insert() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for eps in [0.3, 0.5, 1.0] {
            let p = params_for(random_points(&mut rng, 20), eps, BirthMode::Strict);
            let mut ds = NeighborStructure::new(&p);
            for r in 0..p.len() {
                ds.insert(r).unwrap();
                assert!(ds.check_invariants_bruteforce(), "eps {eps}, after rank {r}");
            }
        }
    }

    #[test]
    fn corrupted_parent_is_detected() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = params_for(random_points(&mut rng, 20), 0.5, BirthMode::Strict);
        let mut ds = NeighborStructure::new(&p);
        for r in 0..p.len() {
            ds.insert(r).unwrap();
        }
        assert!(ds.check_invariants_bruteforce());
        let last = p.len() - 1;
        // the newest point cannot be its own parent
        ds.set_parent_for_test(last, last);
        assert!(!ds.check_invariants_bruteforce());
    }

    #[test]
    fn duplicates_are_handled() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 0.0], vec![0.5, 0.5]];
        let p = params_for(pts, 0.5, BirthMode::Strict);
        let mut ds = NeighborStructure::new(&p);
        for r in 0..p.len() {
            ds.insert(r).unwrap();
            assert!(ds.check_invariants_bruteforce());
        }
        let fast = construct_edges(&p).sorted_edges();
        let slow = construct_edges_bruteforce(&p).sorted_edges();
        assert_eq!(fast, slow);
        assert!(fast.iter().any(|e| e.birth == 0.0));
    }

    #[test]
    fn matches_bruteforce_on_random_cloud() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = params_for(random_points(&mut rng, 50), 0.5, BirthMode::Strict);
        let fast = construct_edges(&p);
        assert_eq!(fast.sorted_edges(), construct_edges_bruteforce(&p).sorted_edges());
        let k = kappa(0.5);
        for e in fast.edges() {
            assert!(p.lambda(e.src) <= p.lambda(e.dst));
            assert!(p.dist(e.src, e.dst) <= k * p.lambda(e.src));
        }
    }
}
