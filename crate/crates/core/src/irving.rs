//! Irving's two-phase algorithm for the stable roommates problem with
//! incomplete lists, the matched-vertex partition, and the reduction to the
//! perfect-matching core.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::model::{AgentId, Edge, Matching, PreferenceSystem};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum IrvingError {
    #[error("instance has no stable matching")]
    NoStableMatching,
}

/// The subgraph surviving phase one, plus the deleted edges in order.
#[derive(Clone, Debug)]
pub struct PhaseOneResult {
    pub surviving: PreferenceSystem,
    pub removed: Vec<Edge>,
}

/// Agents never matched (`v0`) versus matched in every stable matching (`v1`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexPartition {
    pub v0: BTreeSet<AgentId>,
    pub v1: BTreeSet<AgentId>,
}

/// Mutable proposal table shared by both phases.
///
/// Invariants between stabilization rounds: lists are pairwise symmetric;
/// `held_by[u] == Some(v)` iff `v` currently holds `u`'s proposal iff `v` is
/// the first entry of `u`'s list; every agent with a nonempty list has its
/// proposal held.
#[derive(Clone)]
pub(crate) struct Table {
    pub(crate) list: BTreeMap<AgentId, Vec<AgentId>>,
    /// holds[v]: the proposer whose proposal v currently holds.
    holds: BTreeMap<AgentId, Option<AgentId>>,
    /// held_by[u]: the agent holding u's proposal.
    held_by: BTreeMap<AgentId, Option<AgentId>>,
    removed: Vec<Edge>,
    queue: VecDeque<AgentId>,
}

impl Table {
    pub(crate) fn new(ps: &PreferenceSystem, order: &[AgentId]) -> Self {
        let list: BTreeMap<AgentId, Vec<AgentId>> = ps
            .agents()
            .map(|v| (v, ps.neighbors(v).to_vec()))
            .collect();
        let holds = ps.agents().map(|v| (v, None)).collect();
        let held_by = ps.agents().map(|v| (v, None)).collect();
        Table {
            list,
            holds,
            held_by,
            removed: Vec::new(),
            queue: order.iter().copied().collect(),
        }
    }

    pub(crate) fn delete_pair(&mut self, a: AgentId, b: AgentId) {
        self.list.get_mut(&a).unwrap().retain(|&x| x != b);
        self.list.get_mut(&b).unwrap().retain(|&x| x != a);
        self.removed.push(Edge::new(a, b));
        if self.holds[&a] == Some(b) {
            self.holds.insert(a, None);
            self.held_by.insert(b, None);
            self.queue.push_back(b);
        }
        if self.holds[&b] == Some(a) {
            self.holds.insert(b, None);
            self.held_by.insert(a, None);
            self.queue.push_back(a);
        }
    }

    /// Runs the proposal sequence until every agent with a nonempty list has
    /// its proposal held.
    pub(crate) fn stabilize(&mut self) {
        while let Some(u) = self.queue.pop_front() {
            if self.held_by[&u].is_some() {
                continue;
            }
            let Some(&v) = self.list[&u].first() else {
                continue; // exhausted
            };
            // Any remaining entry of v's list beats v's current holder, so v
            // always accepts and the displaced proposer is rejected.
            if let Some(old) = self.holds[&v] {
                self.delete_pair(v, old);
            }
            self.holds.insert(v, Some(u));
            self.held_by.insert(u, Some(v));
            // v discards everyone it likes less than u.
            let pos = self.list[&v].iter().position(|&x| x == u).unwrap();
            let worse: Vec<AgentId> = self.list[&v][pos + 1..].to_vec();
            for w in worse {
                self.delete_pair(v, w);
            }
        }
    }

    fn surviving(&self) -> PreferenceSystem {
        PreferenceSystem::new(self.list.clone()).expect("table lists stay symmetric")
    }
}

fn ascending_order(ps: &PreferenceSystem) -> Vec<AgentId> {
    ps.agents().collect()
}

/// Phase one with a given initial proposal order.  The surviving subgraph is
/// independent of the order; the removal log is not.
pub fn phase_one_with_order(ps: &PreferenceSystem, order: &[AgentId]) -> PhaseOneResult {
    let mut t = Table::new(ps, order);
    t.stabilize();
    PhaseOneResult {
        surviving: t.surviving(),
        removed: t.removed,
    }
}

/// Phase one of Irving's algorithm; proposals in ascending agent order.
pub fn phase_one(ps: &PreferenceSystem) -> PhaseOneResult {
    phase_one_with_order(ps, &ascending_order(ps))
}

/// Full two-phase run.  `None` means the instance has no stable matching.
pub fn find_stable_matching(ps: &PreferenceSystem) -> Option<Matching> {
    let mut t = Table::new(ps, &ascending_order(ps));
    t.stabilize();
    // Agents surviving phase one; if a stable matching exists these are
    // exactly the agents matched in every stable matching.
    let active: BTreeSet<AgentId> = t
        .list
        .iter()
        .filter(|(_, l)| !l.is_empty())
        .map(|(&v, _)| v)
        .collect();

    loop {
        if active.iter().any(|v| t.list[v].is_empty()) {
            return None;
        }
        // Smallest agent with a shortlist of length >= 2 seeds the rotation.
        let Some(&start) = active.iter().find(|v| t.list[v].len() >= 2) else {
            break;
        };
        let rotation = expose_rotation(&t, start);
        for &(_, q) in &rotation {
            let last = *t.list[&q].last().unwrap();
            t.delete_pair(q, last);
        }
        t.stabilize();
    }

    let mut m = Matching::empty();
    for (&v, l) in &t.list {
        if let Some(&w) = l.first() {
            debug_assert_eq!(t.list[&w], vec![v]);
            if v < w {
                m = m.with_edge_unchecked(Edge::new(v, w));
            }
        }
    }
    debug_assert!(crate::model::is_stable(ps, &m).is_stable());
    Some(m)
}

/// Traces second-choice / last-holder pairs from `start` until a cycle forms;
/// returns the cyclic part as `(p_i, q_i)` pairs.
pub(crate) fn expose_rotation(t: &Table, start: AgentId) -> Vec<(AgentId, AgentId)> {
    let mut seen: BTreeMap<AgentId, usize> = BTreeMap::new();
    let mut seq: Vec<(AgentId, AgentId)> = Vec::new();
    let mut p = start;
    loop {
        if let Some(&i) = seen.get(&p) {
            return seq[i..].to_vec();
        }
        seen.insert(p, seq.len());
        let q = t.list[&p][1];
        seq.push((p, q));
        p = *t.list[&q].last().unwrap();
    }
}

/// Splits the agents into never-matched (`v0`) and always-matched (`v1`).
pub fn partition_matched(ps: &PreferenceSystem) -> Result<VertexPartition, IrvingError> {
    let m = find_stable_matching(ps).ok_or(IrvingError::NoStableMatching)?;
    let v1 = m.matched_agents();
    let v0 = ps.agents().filter(|v| !v1.contains(v)).collect();
    Ok(VertexPartition { v0, v1 })
}

/// Restriction to the always-matched agents, dropping edges whose endpoint
/// would prefer a never-matched neighbor.  Stable matchings of the input are
/// exactly the perfect stable matchings of the result.
pub fn perfect_core(ps: &PreferenceSystem) -> Result<PreferenceSystem, IrvingError> {
    let part = partition_matched(ps)?;
    let keep = |e: Edge| {
        e.endpoints().iter().all(|&u| {
            let v = e.other(u);
            ps.neighbors(u)
                .iter()
                .all(|&w| !part.v0.contains(&w) || ps.prefers(u, v, w))
        })
    };
    Ok(ps.restrict(&part.v1, keep))
}
