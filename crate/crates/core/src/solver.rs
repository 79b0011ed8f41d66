//! Exact minimum/maximum-weight stable matching for instances whose canonical
//! subgraph is bipartite: deferred acceptance for the proposer-optimal
//! matching, rotation discovery with precedence, and minimum-weight closure
//! over the rotation poset.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use crate::irving::{self, expose_rotation, Table};
use crate::model::{AgentId, Edge, EdgeWeights, Matching, PreferenceSystem};
use crate::optcore::{min_weight_closure, ClosureInstance};
use crate::oracle::Direction;
use crate::reduction;
use crate::Rat;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SolverError {
    #[error("instance has no stable matching")]
    NoStableMatching,
    #[error("canonical subgraph is not bipartite")]
    NotReducible,
    #[error("the given side is not one part of a bipartition")]
    NotBipartite,
}

/// A cyclic exchange between adjacent stable matchings.  Each move sends a
/// proposer from its current partner to the next one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rotation {
    /// (proposer, old partner, new partner)
    pub moves: Vec<(AgentId, AgentId, AgentId)>,
    /// exact weight change induced by applying the rotation
    pub delta: Rat,
}

impl Rotation {
    fn key(&self) -> Vec<(AgentId, AgentId, AgentId)> {
        let mut k = self.moves.clone();
        k.sort();
        k
    }
}

/// The proposer-optimal matching together with all rotations and their
/// precedence.  Downward-closed subsets of rotations are in bijection with
/// the stable matchings.
#[derive(Clone, Debug)]
pub struct RotationSystem {
    pub base: Matching,
    /// in discovery order, which is a linear extension of the precedence
    pub rotations: Vec<Rotation>,
    /// (predecessor, successor) index pairs
    pub precedence: Vec<(usize, usize)>,
}

impl RotationSystem {
    pub fn is_closed(&self, set: &BTreeSet<usize>) -> bool {
        self.precedence
            .iter()
            .all(|&(pred, succ)| !set.contains(&succ) || set.contains(&pred))
    }

    /// Every downward-closed subset of rotation indices.
    pub fn closed_subsets(&self) -> Vec<BTreeSet<usize>> {
        let k = self.rotations.len();
        assert!(k < 24, "rotation count too large to enumerate subsets");
        (0u32..1 << k)
            .map(|mask| (0..k).filter(|&i| mask >> i & 1 == 1).collect())
            .filter(|s| self.is_closed(s))
            .collect()
    }

    /// The stable matching reached by applying a closed subset to the base.
    pub fn apply(&self, ps: &PreferenceSystem, closed: &BTreeSet<usize>) -> Matching {
        assert!(self.is_closed(closed), "subset must be downward closed");
        let mut partner: BTreeMap<AgentId, AgentId> = self
            .base
            .edges()
            .flat_map(|e| [(e.lo(), e.hi()), (e.hi(), e.lo())])
            .collect();
        for (i, rot) in self.rotations.iter().enumerate() {
            if !closed.contains(&i) {
                continue;
            }
            for &(p, old, new) in &rot.moves {
                debug_assert_eq!(partner.get(&p), Some(&old));
                partner.insert(p, new);
                partner.insert(new, p);
                if partner.get(&old) == Some(&p) {
                    partner.remove(&old);
                }
            }
        }
        let edges: BTreeSet<Edge> = partner
            .iter()
            .filter(|(&v, &w)| v < w && partner.get(&w) == Some(&v))
            .map(|(&v, &w)| Edge::new(v, w))
            .collect();
        Matching::new(ps, edges).expect("rotation application yields a matching")
    }
}

fn check_side(ps: &PreferenceSystem, side: &BTreeSet<AgentId>) -> Result<(), SolverError> {
    let crosses = ps.edges().into_iter().all(|e| {
        side.contains(&e.lo()) != side.contains(&e.hi())
    });
    if crosses && side.iter().all(|v| ps.contains_agent(*v)) {
        Ok(())
    } else {
        Err(SolverError::NotBipartite)
    }
}

fn deferred_acceptance(ps: &PreferenceSystem, side: &BTreeSet<AgentId>) -> Table {
    let order: Vec<AgentId> = side.iter().copied().collect();
    let mut t = Table::new(ps, &order);
    t.stabilize();
    t
}

fn matching_of(ps: &PreferenceSystem, t: &Table, side: &BTreeSet<AgentId>) -> Matching {
    let edges: Vec<Edge> = side
        .iter()
        .filter_map(|&p| t.list[&p].first().map(|&w| Edge::new(p, w)))
        .collect();
    Matching::new(ps, edges).expect("deferred acceptance yields a matching")
}

/// Deferred acceptance with `side` proposing; each proposer does at least as
/// well here as in any other stable matching.
pub fn proposer_optimal(
    ps: &PreferenceSystem,
    side: &BTreeSet<AgentId>,
) -> Result<Matching, SolverError> {
    check_side(ps, side)?;
    let t = deferred_acceptance(ps, side);
    Ok(matching_of(ps, &t, side))
}

/// Distinct rotations exposed in the current table, in order of their
/// smallest proposer.
fn exposed_rotations(t: &Table, side: &BTreeSet<AgentId>) -> Vec<Rotation> {
    let mut found: Vec<Rotation> = Vec::new();
    let mut keys: BTreeSet<Vec<(AgentId, AgentId, AgentId)>> = BTreeSet::new();
    for &p in side {
        if t.list[&p].len() < 2 {
            continue;
        }
        let pairs = expose_rotation(t, p);
        let moves: Vec<(AgentId, AgentId, AgentId)> = pairs
            .iter()
            .map(|&(p, q)| (p, t.list[&p][0], q))
            .collect();
        let rot = Rotation {
            moves,
            delta: Rat::zero(),
        };
        if keys.insert(rot.key()) {
            found.push(rot);
        }
    }
    found
}

fn eliminate(t: &mut Table, rot: &Rotation) {
    for &(_, _, new) in &rot.moves {
        let last = *t.list[&new].last().unwrap();
        t.delete_pair(new, last);
    }
    t.stabilize();
}

/// Discovers every rotation reachable from the proposer-optimal matching and
/// the precedence between them.
pub fn rotation_system(
    ps: &PreferenceSystem,
    side: &BTreeSet<AgentId>,
    w: &EdgeWeights,
) -> Result<RotationSystem, SolverError> {
    check_side(ps, side)?;
    let base_table = deferred_acceptance(ps, side);
    let base = matching_of(ps, &base_table, side);

    // one full elimination run visits every rotation exactly once
    let mut rotations: Vec<Rotation> = Vec::new();
    let mut t = base_table.clone();
    loop {
        let exposed = exposed_rotations(&t, side);
        let Some(mut rot) = exposed.into_iter().next() else {
            break;
        };
        eliminate(&mut t, &rot);
        rot.delta = rot
            .moves
            .iter()
            .map(|&(p, old, new)| w.get(Edge::new(p, new)) - w.get(Edge::new(p, old)))
            .sum();
        rotations.push(rot);
    }

    let index: BTreeMap<Vec<(AgentId, AgentId, AgentId)>, usize> = rotations
        .iter()
        .enumerate()
        .map(|(i, r)| (r.key(), i))
        .collect();

    // precedence by avoidance: eliminate everything except rotation i; the
    // rotations that never become available are exactly the successors of i
    let mut precedence: Vec<(usize, usize)> = Vec::new();
    for i in 0..rotations.len() {
        let mut t = base_table.clone();
        let mut done: BTreeSet<usize> = BTreeSet::new();
        loop {
            let exposed = exposed_rotations(&t, side);
            let next = exposed.into_iter().find(|r| {
                *index.get(&r.key()).expect("exposed rotation was discovered") != i
            });
            let Some(rot) = next else { break };
            done.insert(index[&rot.key()]);
            eliminate(&mut t, &rot);
        }
        for j in 0..rotations.len() {
            if j != i && !done.contains(&j) {
                precedence.push((i, j));
            }
        }
    }

    Ok(RotationSystem {
        base,
        rotations,
        precedence,
    })
}

/// Exact optimum over all stable matchings; requires the canonical subgraph
/// to be bipartite.
pub fn optimize_exact(
    ps: &PreferenceSystem,
    w: &EdgeWeights,
    direction: Direction,
) -> Result<(Matching, Rat), SolverError> {
    if irving::find_stable_matching(ps).is_none() {
        return Err(SolverError::NoStableMatching);
    }
    let core = irving::perfect_core(ps).expect("stable matching exists");
    let red = reduction::reduce_to_h(&core).expect("core is in perfect-core form");
    let (side, _) = reduction::bipartition(&red.h).ok_or(SolverError::NotReducible)?;
    let rs = rotation_system(&red.h, &side, w)?;

    let weights: Vec<Rat> = rs
        .rotations
        .iter()
        .map(|r| match direction {
            Direction::Min => r.delta.clone(),
            Direction::Max => -r.delta.clone(),
        })
        .collect();
    let requires: Vec<(usize, usize)> = rs
        .precedence
        .iter()
        .map(|&(pred, succ)| (succ, pred))
        .collect();
    let c = ClosureInstance::new(weights, requires);
    let (chosen, _) = min_weight_closure(&c).expect("rotation precedence is acyclic");

    let m = rs.apply(ps, &chosen);
    let weight = w.matching_weight(&m);
    debug_assert_eq!(
        weight,
        w.matching_weight(&rs.base)
            + chosen
                .iter()
                .map(|&i| rs.rotations[i].delta.clone())
                .sum::<Rat>()
    );
    debug_assert!(crate::model::is_stable(ps, &m).is_stable());
    Ok((m, weight))
}
