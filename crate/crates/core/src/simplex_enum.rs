//! Higher simplices of the sparse filtration and their birth times.
//!
//! Every simplex is found exactly once, from its latest vertex `v`, by
//! extending cliques inside the out-neighborhood `E(v)` of the edge graph.
//! Birth times come from a caller-supplied function; built-ins cover Rips
//! (any metric), Čech in l2 and Čech in l-infinity.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::power_feasible;
use crate::greedy::fmt_real;
use crate::metric::MetricKind;
use crate::neighbor_graph::{construct_edges, growth_meeting_time, EdgeGraph};
use crate::sparse_balls::SparseParams;

/// Filtration flavor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Flavor {
    #[default]
    Rips,
    Cech,
}

impl FromStr for Flavor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rips" => Ok(Flavor::Rips),
            "cech" | "čech" => Ok(Flavor::Cech),
            other => Err(Error::usage(format!("unknown flavor `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilteredSimplex {
    /// Strictly increasing vertex labels.
    pub vertices: Vec<usize>,
    pub birth: f64,
}

impl FilteredSimplex {
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Codimension-one faces, in lexicographic order.
    pub fn facets(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let k = self.vertices.len();
        (0..k).rev().filter(move |_| k > 1).map(move |skip| {
            self.vertices
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(_, &v)| v)
                .collect()
        })
    }
}

fn filtration_order(a: &FilteredSimplex, b: &FilteredSimplex) -> std::cmp::Ordering {
    a.birth
        .total_cmp(&b.birth)
        .then(a.vertices.len().cmp(&b.vertices.len()))
        .then_with(|| a.vertices.cmp(&b.vertices))
}

/// A filtered simplicial complex, sorted by `(birth, dimension, vertices)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FilteredComplex {
    pub simplices: Vec<FilteredSimplex>,
    pub max_dim: usize,
}

impl FilteredComplex {
    /// Sorts and validates.
    pub fn new(mut simplices: Vec<FilteredSimplex>, max_dim: usize) -> Result<Self> {
        simplices.sort_by(filtration_order);
        let fc = FilteredComplex { simplices, max_dim };
        fc.validate()?;
        Ok(fc)
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    /// Checks sort order, vertex ordering, finite births, facet closure and
    /// that every facet precedes its cofaces with no larger birth.
    pub fn validate(&self) -> Result<()> {
        let mut index: HashMap<&[usize], usize> = HashMap::with_capacity(self.simplices.len());
        for (i, s) in self.simplices.iter().enumerate() {
            if s.vertices.is_empty() || s.vertices.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::usage(format!("simplex {i} has unsorted or repeated vertices")));
            }
            if !s.birth.is_finite() {
                return Err(Error::usage(format!("simplex {i} has non-finite birth")));
            }
            if i > 0 && filtration_order(&self.simplices[i - 1], s).is_gt() {
                return Err(Error::usage(format!("simplex {i} is out of filtration order")));
            }
            for f in s.facets() {
                match index.get(f.as_slice()) {
                    Some(&j) if self.simplices[j].birth <= s.birth => {}
                    Some(_) => return Err(Error::usage(format!("simplex {i} is born before a facet"))),
                    None => return Err(Error::usage(format!("simplex {i} has a facet missing or later in the order"))),
                }
            }
            if index.insert(&s.vertices, i).is_some() {
                return Err(Error::usage(format!("simplex {i} appears twice")));
            }
        }
        Ok(())
    }

    /// Number of simplices of each dimension `0..=max_dim`.
    pub fn counts_by_dim(&self) -> Vec<usize> {
        let mut counts = vec![0; self.max_dim + 1];
        for s in &self.simplices {
            if s.dim() >= counts.len() {
                counts.resize(s.dim() + 1, 0);
            }
            counts[s.dim()] += 1;
        }
        counts
    }

    /// Vertex sets of the subcomplex born at or before `alpha`.
    pub fn at_scale(&self, alpha: f64) -> Vec<Vec<usize>> {
        self.simplices.iter().filter(|s| s.birth <= alpha).map(|s| s.vertices.clone()).collect()
    }

    /// Renames vertex `v` to `labels[v]` and restores the sort order.
    pub fn relabel(&self, labels: &[usize]) -> FilteredComplex {
        let mut simplices: Vec<FilteredSimplex> = self
            .simplices
            .iter()
            .map(|s| {
                let mut vertices: Vec<usize> = s.vertices.iter().map(|&v| labels[v]).collect();
                vertices.sort_unstable();
                FilteredSimplex { vertices, birth: s.birth }
            })
            .collect();
        simplices.sort_by(filtration_order);
        FilteredComplex { simplices, max_dim: self.max_dim }
    }

    /// Text form: `birth dim v0 ... vk` per line.
    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        for s in &self.simplices {
            write!(w, "{} {}", fmt_real(s.birth), s.dim())?;
            for v in &s.vertices {
                write!(w, " {v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Parses the text form, keeping the given order, and validates it.
    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut simplices = Vec::new();
        let mut max_dim = 0;
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let bad = |msg: String| Error::Parse { line: lineno + 1, msg };
            let mut toks = t.split_whitespace();
            let birth: f64 = toks
                .next()
                .unwrap()
                .parse()
                .map_err(|e| bad(format!("bad birth: {e}")))?;
            let dim: usize = toks
                .next()
                .ok_or_else(|| bad("missing dimension".into()))?
                .parse()
                .map_err(|e| bad(format!("bad dimension: {e}")))?;
            let vertices = toks
                .map(|v| v.parse::<usize>().map_err(|e| bad(format!("bad vertex: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            if vertices.len() != dim + 1 {
                return Err(bad(format!("dimension {dim} needs {} vertices", dim + 1)));
            }
            max_dim = max_dim.max(dim);
            simplices.push(FilteredSimplex { vertices, birth });
        }
        let fc = FilteredComplex { simplices, max_dim };
        fc.validate()?;
        Ok(fc)
    }
}

/// Rips birth of a vertex set: the latest edge birth, provided no vertex has
/// been removed by then; `inf` otherwise or if an edge is missing.
pub fn simplex_birth_time_rips(params: &SparseParams, sigma: &[usize], graph: &EdgeGraph) -> f64 {
    if sigma.len() <= 1 {
        return 0.0;
    }
    let mut t = 0.0f64;
    for (i, &a) in sigma.iter().enumerate() {
        for &b in &sigma[i + 1..] {
            match graph.birth(a, b) {
                Some(x) => t = t.max(x),
                None => return f64::INFINITY,
            }
        }
    }
    if t <= min_removal_time(params, sigma) {
        t
    } else {
        f64::INFINITY
    }
}

fn min_removal_time(params: &SparseParams, sigma: &[usize]) -> f64 {
    sigma.iter().map(|&v| params.removal_time(v)).fold(f64::INFINITY, f64::min)
}

/// Smallest scale at which the truncated l2 balls of `sigma` share a point.
///
/// Bisects on the scale up to the earliest removal time; at a fixed scale the
/// balls meet iff `min_x max_j |x - p_j|^2 - r_j^2 <= 0`, decided exactly by
/// [`power_feasible`] with a relative slack of `1e-10` on squared distances.
pub fn simplex_birth_time_cech_l2(params: &SparseParams, sigma: &[usize]) -> Result<f64> {
    cech_l2_birth_above(params, sigma, 0.0)
}

/// [`simplex_birth_time_cech_l2`] for a simplex known to be born no earlier
/// than `lower` (for instance the latest birth among its facets).
pub fn cech_l2_birth_above(params: &SparseParams, sigma: &[usize], lower: f64) -> Result<f64> {
    if params.metric() != MetricKind::L2 {
        return Err(Error::usage("the l2 Čech birth needs an l2 cloud"));
    }
    if sigma.len() <= 1 {
        return Ok(0.0);
    }
    let mut hi = min_removal_time(params, sigma);
    if !hi.is_finite() {
        return Err(Error::internal(format!("no finite removal time in {sigma:?}")));
    }
    // the balls must meet pairwise first
    let mut lo = lower.max(0.0);
    for (i, &a) in sigma.iter().enumerate() {
        for &b in &sigma[i + 1..] {
            lo = lo.max(growth_meeting_time(params, a, b, params.dist(a, b)));
        }
    }
    if lo > hi {
        return Ok(f64::INFINITY);
    }
    let pts: Vec<&[f64]> = sigma.iter().map(|&v| params.cloud().point(v)).collect();
    let feasible = |alpha: f64| -> Result<bool> {
        let weights: Vec<f64> = sigma
            .iter()
            .map(|&v| {
                let r = params.radius(v, alpha);
                r * r
            })
            .collect();
        power_feasible(&pts, &weights, 2e-10 * alpha * alpha).ok_or_else(|| {
            Error::internal(format!("ball intersection test returned NaN for {sigma:?} at alpha = {alpha}"))
        })
    };
    if feasible(lo)? {
        return Ok(lo);
    }
    if !feasible(hi)? {
        return Ok(f64::INFINITY);
    }
    let mut iterations = 0;
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
        if iterations > 400 {
            return Err(Error::internal(format!(
                "bisection for {sigma:?} did not converge: [{lo}, {hi}]"
            )));
        }
    }
    Ok(hi)
}

/// Čech birth for l-infinity balls (boxes). Boxes meet iff their coordinate
/// intervals meet pairwise, so the birth is the latest pairwise per-coordinate
/// meeting time, provided no vertex has been removed by then.
pub fn simplex_birth_time_cech_linf(params: &SparseParams, sigma: &[usize]) -> Result<f64> {
    if params.metric() != MetricKind::Linf {
        return Err(Error::usage("the l-infinity Čech birth needs an l-infinity cloud"));
    }
    if sigma.len() <= 1 {
        return Ok(0.0);
    }
    let cloud = params.cloud();
    let mut t = 0.0f64;
    for (i, &a) in sigma.iter().enumerate() {
        for &b in &sigma[i + 1..] {
            for (xa, xb) in cloud.point(a).iter().zip(cloud.point(b)) {
                t = t.max(growth_meeting_time(params, a, b, (xa - xb).abs()));
            }
        }
    }
    Ok(if t <= min_removal_time(params, sigma) { t } else { f64::INFINITY })
}

/// A simplex birth time, `inf` for a simplex that never appears.
pub type BirthFn<'a> = Box<dyn Fn(&[usize]) -> Result<f64> + Sync + 'a>;

/// Birth function for the given flavor and the metric of `params`.
pub fn birth_function<'a>(
    params: &'a SparseParams,
    graph: &'a EdgeGraph,
    flavor: Flavor,
) -> Result<BirthFn<'a>> {
    match (flavor, params.metric()) {
        (Flavor::Rips, _) => Ok(Box::new(move |s: &[usize]| Ok(simplex_birth_time_rips(params, s, graph)))),
        (Flavor::Cech, MetricKind::L2) => Ok(Box::new(move |s: &[usize]| simplex_birth_time_cech_l2(params, s))),
        (Flavor::Cech, MetricKind::Linf) => Ok(Box::new(move |s: &[usize]| simplex_birth_time_cech_linf(params, s))),
        (Flavor::Cech, MetricKind::L1) => Err(Error::usage("Čech filtrations are not available for l1; use rips")),
    }
}

/// All `k`-simplices (`k >= 2`) reachable as cliques `{v} ∪ S`, `S ⊆ E(v)`,
/// with finite birth, sorted by vertices.
pub fn find_simplices<F>(graph: &EdgeGraph, k: usize, birth_fn: F) -> Result<Vec<FilteredSimplex>>
where
    F: Fn(&[usize]) -> Result<f64>,
{
    let mut out = Vec::new();
    for v in 0..graph.vertex_count() {
        simplices_at(graph, v, k, &birth_fn, &mut out)?;
    }
    out.sort_by(|a, b| a.vertices.cmp(&b.vertices));
    Ok(out)
}

/// Same output as [`find_simplices`], vertices processed on the rayon pool.
pub fn find_simplices_parallel<F>(graph: &EdgeGraph, k: usize, birth_fn: F) -> Result<Vec<FilteredSimplex>>
where
    F: Fn(&[usize]) -> Result<f64> + Sync,
{
    let chunks = (0..graph.vertex_count())
        .into_par_iter()
        .map(|v| {
            let mut local = Vec::new();
            simplices_at(graph, v, k, &birth_fn, &mut local)?;
            Ok(local)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out: Vec<FilteredSimplex> = chunks.into_iter().flatten().collect();
    out.sort_by(|a, b| a.vertices.cmp(&b.vertices));
    Ok(out)
}

fn simplices_at<F>(graph: &EdgeGraph, v: usize, k: usize, birth_fn: &F, out: &mut Vec<FilteredSimplex>) -> Result<()>
where
    F: Fn(&[usize]) -> Result<f64>,
{
    let cand: Vec<usize> = graph.out_neighbors(v).iter().map(|&(u, _)| u).collect();
    if cand.len() < k {
        return Ok(());
    }
    let mut chosen = Vec::with_capacity(k);
    extend_clique(graph, v, k, &cand, 0, &mut chosen, birth_fn, out)
}

#[allow(clippy::too_many_arguments)]
fn extend_clique<F>(
    graph: &EdgeGraph,
    v: usize,
    k: usize,
    cand: &[usize],
    from: usize,
    chosen: &mut Vec<usize>,
    birth_fn: &F,
    out: &mut Vec<FilteredSimplex>,
) -> Result<()>
where
    F: Fn(&[usize]) -> Result<f64>,
{
    if chosen.len() == k {
        let mut vertices = chosen.clone();
        vertices.push(v);
        vertices.sort_unstable();
        let birth = birth_fn(&vertices)?;
        if birth < f64::INFINITY {
            out.push(FilteredSimplex { vertices, birth });
        }
        return Ok(());
    }
    let need = k - chosen.len();
    for idx in from..cand.len() {
        if cand.len() - idx < need {
            break;
        }
        let u = cand[idx];
        if chosen.iter().all(|&w| graph.birth(w, u).is_some()) {
            chosen.push(u);
            extend_clique(graph, v, k, cand, idx + 1, chosen, birth_fn, out)?;
            chosen.pop();
        }
    }
    Ok(())
}

/// Reference for [`find_simplices`]: every `(k+1)`-subset of the vertices that
/// is a clique in `graph`.
pub fn find_simplices_bruteforce<F>(graph: &EdgeGraph, k: usize, birth_fn: F) -> Result<Vec<FilteredSimplex>>
where
    F: Fn(&[usize]) -> Result<f64>,
{
    use itertools::Itertools;
    let mut out = Vec::new();
    for subset in (0..graph.vertex_count()).combinations(k + 1) {
        let clique = subset.iter().tuple_combinations().all(|(&a, &b)| graph.birth(a, b).is_some());
        if !clique {
            continue;
        }
        let birth = birth_fn(&subset)?;
        if birth < f64::INFINITY {
            out.push(FilteredSimplex { vertices: subset, birth });
        }
    }
    Ok(out)
}

/// Options for [`build_filtration_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct BuildOptions {
    /// Only keep simplices born at or before this scale.
    pub alpha_cap: Option<f64>,
    /// Enumerate higher simplices on the rayon pool.
    pub parallel: bool,
}

/// The sparse filtration up to dimension `max_dim`, vertices labelled by
/// greedy rank.
pub fn build_filtration(params: &SparseParams, max_dim: usize, flavor: Flavor) -> Result<FilteredComplex> {
    build_filtration_with(params, max_dim, flavor, BuildOptions::default())
}

pub fn build_filtration_with(
    params: &SparseParams,
    max_dim: usize,
    flavor: Flavor,
    opts: BuildOptions,
) -> Result<FilteredComplex> {
    let graph = construct_edges(params);
    let cap = opts.alpha_cap.unwrap_or(f64::INFINITY);
    let graph = if cap < f64::INFINITY {
        EdgeGraph::from_edges(params.len(), graph.edges().filter(|e| e.birth <= cap))
    } else {
        graph
    };
    let birth_fn = birth_function(params, &graph, flavor)?;
    let mut simplices: Vec<FilteredSimplex> =
        (0..params.len()).map(|v| FilteredSimplex { vertices: vec![v], birth: 0.0 }).collect();
    if max_dim >= 1 {
        simplices.extend(graph.edges().map(|e| {
            let mut vertices = vec![e.src, e.dst];
            vertices.sort_unstable();
            FilteredSimplex { vertices, birth: e.birth }
        }));
    }
    let mut births: HashMap<Vec<usize>, f64> = simplices.iter().map(|s| (s.vertices.clone(), s.birth)).collect();
    let ambient = params.cloud().dim();
    let cech_l2 = flavor == Flavor::Cech && params.metric() == MetricKind::L2;
    for k in 2..=max_dim {
        let found = {
            let births = &births;
            let facet_max = |s: &[usize]| -> f64 {
                let mut m = 0.0f64;
                for skip in 0..s.len() {
                    let f: Vec<usize> = s.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v).collect();
                    match births.get(&f) {
                        Some(&b) => m = m.max(b),
                        // a facet that never appears (or appears after the cap)
                        None => return f64::INFINITY,
                    }
                }
                m
            };
            let birth_k = |s: &[usize]| -> Result<f64> {
                let lower = facet_max(s);
                if lower == f64::INFINITY {
                    Ok(f64::INFINITY)
                } else if cech_l2 && k > ambient {
                    // Helly at a fixed scale: more than ambient+1 convex sets
                    // meet iff every ambient+1 of them do. Each facet exists
                    // from its birth until its earliest removal time.
                    Ok(if lower <= min_removal_time(params, s) { lower } else { f64::INFINITY })
                } else if cech_l2 {
                    cech_l2_birth_above(params, s, lower)
                } else {
                    birth_fn(s)
                }
            };
            if opts.parallel {
                find_simplices_parallel(&graph, k, birth_k)?
            } else {
                find_simplices(&graph, k, birth_k)?
            }
        };
        if found.is_empty() {
            break;
        }
        for mut s in found {
            let facet_max = s.facets().map(|f| births[&f]).fold(0.0f64, f64::max);
            if s.birth < facet_max {
                if facet_max - s.birth <= 1e-9 * facet_max.max(1.0) {
                    s.birth = facet_max;
                } else {
                    return Err(Error::internal(format!(
                        "simplex {:?} born at {} before its facets ({})",
                        s.vertices, s.birth, facet_max
                    )));
                }
            }
            if s.birth <= cap {
                births.insert(s.vertices.clone(), s.birth);
                simplices.push(s);
            }
        }
    }
    FilteredComplex::new(simplices, max_dim)
}
