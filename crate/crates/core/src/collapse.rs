//! Links, the link condition and edge contraction, used to check that the
//! last greedy vertex can be contracted onto its covering neighbor.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::greedy::GreedyPermutation;
use crate::metric::PointCloud;
use crate::persistence::betti_numbers;
use crate::simplex_enum::{build_filtration_with, BuildOptions, Flavor};
use crate::sparse_balls::SparseParams;

/// A finite simplicial complex stored as its full set of (sorted) faces.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SimplicialComplex {
    simplices: BTreeSet<Vec<usize>>,
}

impl SimplicialComplex {
    /// The closure of the given simplices under taking faces.
    pub fn from_simplices<I, S>(simplices: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[usize]>,
    {
        let mut out = BTreeSet::new();
        for s in simplices {
            let mut v = s.as_ref().to_vec();
            v.sort_unstable();
            v.dedup();
            add_with_faces(&mut out, v);
        }
        SimplicialComplex { simplices: out }
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn contains(&self, sigma: &[usize]) -> bool {
        self.simplices.contains(&sorted(sigma))
    }

    pub fn simplices(&self) -> impl Iterator<Item = &Vec<usize>> + '_ {
        self.simplices.iter()
    }

    pub fn vertices(&self) -> Vec<usize> {
        self.simplices.iter().filter(|s| s.len() == 1).map(|s| s[0]).collect()
    }

    pub fn dim(&self) -> Option<usize> {
        self.simplices.iter().map(|s| s.len() - 1).max()
    }

    pub fn is_closed(&self) -> bool {
        self.simplices.iter().all(|s| {
            s.len() == 1
                || (0..s.len()).all(|skip| {
                    let f: Vec<usize> = s.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v).collect();
                    self.simplices.contains(&f)
                })
        })
    }

    /// `Lk σ = {τ \ σ : σ ⊆ τ ∈ K}`, including the empty simplex.
    pub fn link(&self, sigma: &[usize]) -> Result<BTreeSet<Vec<usize>>> {
        let sigma = sorted(sigma);
        if !self.simplices.contains(&sigma) {
            return Err(Error::usage(format!("{sigma:?} is not a simplex of the complex")));
        }
        Ok(self
            .simplices
            .iter()
            .filter(|t| sigma.iter().all(|v| t.binary_search(v).is_ok()))
            .map(|t| t.iter().copied().filter(|v| sigma.binary_search(v).is_err()).collect())
            .collect())
    }

    /// Whether `Lk{u,v} = Lk{u} ∩ Lk{v}`.
    pub fn satisfies_link_condition(&self, u: usize, v: usize) -> Result<bool> {
        let edge = self.link(&[u, v]).map_err(|_| Error::usage(format!("edge {{{u}, {v}}} is not in the complex")))?;
        let lu = self.link(&[u])?;
        let lv = self.link(&[v])?;
        let common: BTreeSet<Vec<usize>> = lu.intersection(&lv).cloned().collect();
        debug_assert!(edge.is_subset(&common));
        Ok(edge == common)
    }

    /// Replaces `u` by `v` everywhere and merges duplicates.
    pub fn contract_edge(&self, u: usize, v: usize) -> Result<SimplicialComplex> {
        if u == v || !self.contains(&[u, v]) {
            return Err(Error::usage(format!("edge {{{u}, {v}}} is not in the complex")));
        }
        let simplices = self
            .simplices
            .iter()
            .map(|s| {
                let mut t: Vec<usize> = s.iter().map(|&w| if w == u { v } else { w }).collect();
                t.sort_unstable();
                t.dedup();
                t
            })
            .collect();
        Ok(SimplicialComplex { simplices })
    }

    /// GF(2) Betti numbers in dimensions `0..=dim`.
    pub fn betti(&self) -> Result<Vec<usize>> {
        let all: Vec<Vec<usize>> = self.simplices.iter().cloned().collect();
        betti_numbers(&all, self.dim().unwrap_or(0))
    }
}

fn sorted(sigma: &[usize]) -> Vec<usize> {
    let mut s = sigma.to_vec();
    s.sort_unstable();
    s.dedup();
    s
}

fn add_with_faces(set: &mut BTreeSet<Vec<usize>>, s: Vec<usize>) {
    if s.is_empty() || set.contains(&s) {
        return;
    }
    for skip in 0..s.len() {
        if s.len() > 1 {
            let f = s.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v).collect();
            add_with_faces(set, f);
        }
    }
    set.insert(s);
}

/// The rank onto which the last greedy vertex is contracted: its covering
/// witness at its own removal time.
pub fn find_collapse_partner(params: &SparseParams) -> Result<usize> {
    let n = params.len();
    if n < 2 {
        return Err(Error::usage("collapse needs at least two points"));
    }
    let last = n - 1;
    Ok(params.covering_witness(last, params.removal_time(last)))
}

/// The complex `S^alpha`: every simplex of the sparse filtration born at or
/// before `alpha`, in all dimensions.
pub fn complex_at(params: &SparseParams, flavor: Flavor, alpha: f64) -> Result<SimplicialComplex> {
    let opts = BuildOptions { alpha_cap: Some(alpha), parallel: false };
    let fc = build_filtration_with(params, params.len().saturating_sub(1), flavor, opts)?;
    Ok(SimplicialComplex::from_simplices(fc.simplices.iter().map(|s| &s.vertices)))
}

/// Result of contracting the last vertex onto its partner.
#[derive(Debug, Clone, PartialEq)]
pub struct CollapseReport {
    /// Greedy ranks.
    pub last: usize,
    pub partner: usize,
    pub alpha: f64,
    pub edge_present: bool,
    pub link_condition: bool,
    pub betti_before: Vec<usize>,
    pub betti_after: Vec<usize>,
}

impl CollapseReport {
    pub fn passed(&self) -> bool {
        self.edge_present && self.link_condition && self.betti_before == self.betti_after
    }
}

pub fn check_collapse(params: &SparseParams, flavor: Flavor) -> Result<CollapseReport> {
    let partner = find_collapse_partner(params)?;
    let last = params.len() - 1;
    let alpha = params.removal_time(last);
    let k = complex_at(params, flavor, alpha)?;
    let betti_before = k.betti()?;
    if !k.contains(&[partner, last]) {
        return Ok(CollapseReport {
            last,
            partner,
            alpha,
            edge_present: false,
            link_condition: false,
            betti_after: Vec::new(),
            betti_before,
        });
    }
    let link_condition = k.satisfies_link_condition(last, partner)?;
    let mut betti_after = k.contract_edge(last, partner)?.betti()?;
    betti_after.resize(betti_before.len(), 0);
    Ok(CollapseReport { last, partner, alpha, edge_present: true, link_condition, betti_before, betti_after })
}

/// Runs [`check_collapse`] on every greedy prefix of length `n` down to 2,
/// i.e. removes vertices one by one from the end, each at its own removal
/// time.
pub fn repeated_collapse(cloud: &PointCloud, gp: &GreedyPermutation, params: &SparseParams, flavor: Flavor) -> Result<Vec<CollapseReport>> {
    let mut reports = Vec::new();
    for len in (2..=params.len()).rev() {
        let prefix: Vec<Vec<f64>> = gp.order[..len].iter().map(|&i| cloud.point(i).to_vec()).collect();
        let sub = PointCloud::new(prefix, cloud.metric())?;
        let sub_gp = GreedyPermutation::from_order(&sub, (0..len).collect())?;
        let sub_params = SparseParams::with_options(&sub, &sub_gp, params.epsilon(), params.mode())?;
        reports.push(check_collapse(&sub_params, flavor)?);
    }
    Ok(reports)
}
