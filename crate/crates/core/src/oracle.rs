//! Brute-force ground truth at desk scale.
//!
//! Deliberately exponential: every matching of the instance is enumerated and
//! filtered through the stability check.  Everything else in the crate is
//! validated against this module on small instances.

use std::collections::BTreeSet;

use crate::model::{is_stable, Edge, EdgeWeights, Matching, PreferenceSystem};
use crate::Rat;

/// Default agent bound for the exhaustive search.
pub const DEFAULT_BOUND: usize = 12;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance has {agents} agents, oracle bound is {bound}")]
    InstanceTooLarge { agents: usize, bound: usize },
    #[error("instance has no stable matching")]
    NoStableMatching,
}

/// The set of stable matchings of an instance, as found by exhaustion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StableSet {
    matchings: BTreeSet<Matching>,
}

impl StableSet {
    pub fn iter(&self) -> impl Iterator<Item = &Matching> {
        self.matchings.iter()
    }

    pub fn len(&self) -> usize {
        self.matchings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matchings.is_empty()
    }

    pub fn contains(&self, m: &Matching) -> bool {
        self.matchings.contains(m)
    }

    /// Union of all member edge sets.
    pub fn edge_union(&self) -> BTreeSet<Edge> {
        self.matchings
            .iter()
            .flat_map(|m| m.edges())
            .collect()
    }
}

/// All matchings of the instance, perfect or not, in deterministic order.
pub fn all_matchings(ps: &PreferenceSystem) -> Vec<Matching> {
    let edges = ps.edges();
    let mut out = Vec::new();
    let mut chosen: Vec<Edge> = Vec::new();
    let mut covered: BTreeSet<u32> = BTreeSet::new();
    fn rec(
        edges: &[Edge],
        i: usize,
        chosen: &mut Vec<Edge>,
        covered: &mut BTreeSet<u32>,
        out: &mut Vec<Matching>,
    ) {
        if i == edges.len() {
            out.push(Matching::empty_from(chosen));
            return;
        }
        let e = edges[i];
        rec(edges, i + 1, chosen, covered, out);
        if !covered.contains(&e.lo()) && !covered.contains(&e.hi()) {
            chosen.push(e);
            covered.insert(e.lo());
            covered.insert(e.hi());
            rec(edges, i + 1, chosen, covered, out);
            chosen.pop();
            covered.remove(&e.lo());
            covered.remove(&e.hi());
        }
    }
    rec(&edges, 0, &mut chosen, &mut covered, &mut out);
    out
}

impl Matching {
    fn empty_from(edges: &[Edge]) -> Matching {
        // Internal: edges are disjoint by construction of the enumeration.
        let mut m = Matching::empty();
        for &e in edges {
            m = m.with_edge_unchecked(e);
        }
        m
    }
}

fn check_bound(ps: &PreferenceSystem, bound: usize) -> Result<(), OracleError> {
    let agents = ps.num_agents();
    if agents > bound {
        return Err(OracleError::InstanceTooLarge { agents, bound });
    }
    Ok(())
}

/// Exactly the stable matchings of `ps`, by exhaustive enumeration.
pub fn enumerate_stable_matchings(ps: &PreferenceSystem) -> Result<StableSet, OracleError> {
    enumerate_stable_matchings_bounded(ps, DEFAULT_BOUND)
}

pub fn enumerate_stable_matchings_bounded(
    ps: &PreferenceSystem,
    bound: usize,
) -> Result<StableSet, OracleError> {
    check_bound(ps, bound)?;
    let matchings = all_matchings(ps)
        .into_iter()
        .filter(|m| is_stable(ps, m).is_stable())
        .collect();
    Ok(StableSet { matchings })
}

/// Does some stable matching contain every edge of `forced`?
pub fn extends_to_stable(
    ps: &PreferenceSystem,
    forced: &BTreeSet<Edge>,
) -> Result<bool, OracleError> {
    let stable = enumerate_stable_matchings(ps)?;
    let ok = stable
        .iter()
        .any(|m| forced.iter().all(|&e| m.contains(e)));
    Ok(ok)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Min,
    Max,
}

/// A stable matching of extreme total weight, ties broken by canonical edge
/// order.
pub fn brute_optimum(
    ps: &PreferenceSystem,
    w: &EdgeWeights,
    direction: Direction,
) -> Result<(Matching, Rat), OracleError> {
    let stable = enumerate_stable_matchings(ps)?;
    let mut best: Option<(Matching, Rat)> = None;
    for m in stable.iter() {
        let wm = w.matching_weight(m);
        let better = match &best {
            None => true,
            Some((bm, bw)) => {
                let cmp = match direction {
                    Direction::Min => wm.cmp(bw),
                    Direction::Max => bw.cmp(&wm),
                };
                cmp == std::cmp::Ordering::Less
                    || (wm == *bw && m < bm)
            }
        };
        if better {
            best = Some((m.clone(), wm));
        }
    }
    best.ok_or(OracleError::NoStableMatching)
}
