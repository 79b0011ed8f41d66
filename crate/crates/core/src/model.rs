//! Core data model: preference systems, matchings, domination and stability.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::Rat;
use num_traits::Zero;

/// Agents are arbitrary positive integers, not required to be contiguous.
pub type AgentId = u32;

/// An unordered pair of distinct agents, stored as `(min, max)`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    a: AgentId,
    b: AgentId,
}

impl Edge {
    /// Builds the edge `{u, v}`.  Panics if `u == v`.
    pub fn new(u: AgentId, v: AgentId) -> Self {
        assert!(u != v, "an edge needs two distinct endpoints");
        Edge {
            a: u.min(v),
            b: u.max(v),
        }
    }

    // named to stay clear of Ord::min / Ord::max
    pub fn lo(self) -> AgentId {
        self.a
    }

    pub fn hi(self) -> AgentId {
        self.b
    }

    pub fn endpoints(&self) -> [AgentId; 2] {
        [self.a, self.b]
    }

    pub fn contains(&self, v: AgentId) -> bool {
        self.a == v || self.b == v
    }

    /// The endpoint other than `v`.  Panics if `v` is not an endpoint.
    pub fn other(&self, v: AgentId) -> AgentId {
        if v == self.a {
            self.b
        } else if v == self.b {
            self.a
        } else {
            panic!("{v} is not an endpoint of {self:?}")
        }
    }

    pub fn is_disjoint(&self, other: &Edge) -> bool {
        !other.contains(self.a) && !other.contains(self.b)
    }
}

impl fmt::Debug for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.a, self.b)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.a, self.b)
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("agent {0} lists itself")]
    SelfPreference(AgentId),
    #[error("agent {agent} lists {listed} more than once")]
    DuplicatePreference { agent: AgentId, listed: AgentId },
    #[error("agent {agent} lists undeclared agent {listed}")]
    UnknownAgent { agent: AgentId, listed: AgentId },
    #[error("agent {agent} lists {listed} but not vice versa")]
    NotMutual { agent: AgentId, listed: AgentId },
    #[error("edge {0} is not in the instance")]
    UnknownEdge(Edge),
    #[error("edges {0} and {1} share an endpoint")]
    NotDisjoint(Edge, Edge),
    #[error("negative weight on edge {0}")]
    NegativeWeight(Edge),
}

/// A stable-matching instance: agents with strict preference lists over their
/// neighbors.  The edge set is derived from the lists and mutual
/// acceptability is enforced at construction.
#[derive(Clone, PartialEq, Eq)]
pub struct PreferenceSystem {
    prefs: BTreeMap<AgentId, Vec<AgentId>>,
}

impl PreferenceSystem {
    pub fn new(
        prefs: impl IntoIterator<Item = (AgentId, Vec<AgentId>)>,
    ) -> Result<Self, ModelError> {
        let prefs: BTreeMap<AgentId, Vec<AgentId>> = prefs.into_iter().collect();
        for (&u, list) in &prefs {
            let mut seen = BTreeSet::new();
            for &v in list {
                if v == u {
                    return Err(ModelError::SelfPreference(u));
                }
                if !seen.insert(v) {
                    return Err(ModelError::DuplicatePreference { agent: u, listed: v });
                }
                match prefs.get(&v) {
                    None => return Err(ModelError::UnknownAgent { agent: u, listed: v }),
                    Some(back) if !back.contains(&u) => {
                        return Err(ModelError::NotMutual { agent: u, listed: v })
                    }
                    _ => {}
                }
            }
        }
        Ok(PreferenceSystem { prefs })
    }

    /// Parses lines of the form `u: v1 v2 ...` (most preferred first).
    /// Lines starting with `#` and blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut prefs = BTreeMap::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (head, tail) = line
                .split_once(':')
                .ok_or_else(|| format!("line {}: expected `agent: neighbors...`", ln + 1))?;
            let agent: AgentId = head
                .trim()
                .parse()
                .map_err(|_| format!("line {}: bad agent id `{}`", ln + 1, head.trim()))?;
            if agent == 0 {
                return Err(format!("line {}: agent ids are positive", ln + 1));
            }
            let mut list = Vec::new();
            for tok in tail.split_whitespace() {
                let v: AgentId = tok
                    .parse()
                    .map_err(|_| format!("line {}: bad agent id `{tok}`", ln + 1))?;
                list.push(v);
            }
            if prefs.insert(agent, list).is_some() {
                return Err(format!("line {}: agent {} declared twice", ln + 1, agent));
            }
        }
        PreferenceSystem::new(prefs).map_err(|e| e.to_string())
    }

    pub fn agents(&self) -> impl Iterator<Item = AgentId> + '_ {
        self.prefs.keys().copied()
    }

    pub fn num_agents(&self) -> usize {
        self.prefs.len()
    }

    pub fn contains_agent(&self, v: AgentId) -> bool {
        self.prefs.contains_key(&v)
    }

    /// `v`'s neighbors, most preferred first.
    pub fn neighbors(&self, v: AgentId) -> &[AgentId] {
        self.prefs
            .get(&v)
            .map(|l| l.as_slice())
            .unwrap_or_default()
    }

    pub fn contains_edge(&self, e: Edge) -> bool {
        self.neighbors(e.lo()).contains(&e.hi())
    }

    /// All edges in canonical `(min, max)` order.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        for (&u, list) in &self.prefs {
            for &v in list {
                if u < v {
                    out.push(Edge::new(u, v));
                }
            }
        }
        out.sort();
        out
    }

    pub fn num_edges(&self) -> usize {
        self.prefs.values().map(|l| l.len()).sum::<usize>() / 2
    }

    /// 1-based position of `v` in `u`'s list.
    pub fn rank_of(&self, u: AgentId, v: AgentId) -> Result<usize, ModelError> {
        self.neighbors(u)
            .iter()
            .position(|&w| w == v)
            .map(|p| p + 1)
            .ok_or(ModelError::UnknownEdge(Edge::new(u, v)))
    }

    /// Does `u` strictly prefer `v` over `w`?  Both must be neighbors of `u`.
    pub fn prefers(&self, u: AgentId, v: AgentId, w: AgentId) -> bool {
        let list = self.neighbors(u);
        let pv = list.iter().position(|&x| x == v);
        let pw = list.iter().position(|&x| x == w);
        match (pv, pw) {
            (Some(pv), Some(pw)) => pv < pw,
            _ => panic!("prefers() called with a non-neighbor"),
        }
    }

    /// Most preferred neighbor, if any.
    pub fn first(&self, v: AgentId) -> Option<AgentId> {
        self.neighbors(v).first().copied()
    }

    /// Least preferred neighbor, if any.
    pub fn last(&self, v: AgentId) -> Option<AgentId> {
        self.neighbors(v).last().copied()
    }

    /// A copy with one edge removed.
    pub fn without_edge(&self, e: Edge) -> Result<Self, ModelError> {
        if !self.contains_edge(e) {
            return Err(ModelError::UnknownEdge(e));
        }
        let mut prefs = self.prefs.clone();
        prefs.get_mut(&e.lo()).unwrap().retain(|&x| x != e.hi());
        prefs.get_mut(&e.hi()).unwrap().retain(|&x| x != e.lo());
        Ok(PreferenceSystem { prefs })
    }

    /// The induced subinstance on `keep`, keeping only edges accepted by
    /// `keep_edge`.  Relative preference order is preserved.
    pub fn restrict(
        &self,
        keep: &BTreeSet<AgentId>,
        mut keep_edge: impl FnMut(Edge) -> bool,
    ) -> Self {
        let mut prefs = BTreeMap::new();
        for (&u, list) in &self.prefs {
            if !keep.contains(&u) {
                continue;
            }
            let filtered: Vec<AgentId> = list
                .iter()
                .copied()
                .filter(|&v| keep.contains(&v) && keep_edge(Edge::new(u, v)))
                .collect();
            prefs.insert(u, filtered);
        }
        // keep_edge decisions must be symmetric; re-validate cheaply.
        PreferenceSystem::new(prefs).expect("restriction broke mutual acceptability")
    }
}

impl fmt::Debug for PreferenceSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (u, list) in &self.prefs {
            write!(f, "{u}:")?;
            for v in list {
                write!(f, " {v}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// A set of pairwise vertex-disjoint edges of an instance.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Matching {
    edges: BTreeSet<Edge>,
}

impl Matching {
    pub fn new(
        ps: &PreferenceSystem,
        edges: impl IntoIterator<Item = Edge>,
    ) -> Result<Self, ModelError> {
        let edges: BTreeSet<Edge> = edges.into_iter().collect();
        let mut covered = BTreeSet::new();
        for &e in &edges {
            if !ps.contains_edge(e) {
                return Err(ModelError::UnknownEdge(e));
            }
            for v in e.endpoints() {
                if !covered.insert(v) {
                    let clash = *edges.iter().find(|f| f.contains(v) && **f != e).unwrap();
                    return Err(ModelError::NotDisjoint(e, clash));
                }
            }
        }
        Ok(Matching { edges })
    }

    pub fn empty() -> Self {
        Matching {
            edges: BTreeSet::new(),
        }
    }

    /// Caller guarantees disjointness and membership in the instance.
    pub(crate) fn with_edge_unchecked(mut self, e: Edge) -> Self {
        self.edges.insert(e);
        self
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.edges.contains(&e)
    }

    /// The partner of `v`, or `v` itself when unmatched.
    pub fn partner(&self, v: AgentId) -> AgentId {
        self.edges
            .iter()
            .find(|e| e.contains(v))
            .map(|e| e.other(v))
            .unwrap_or(v)
    }

    pub fn is_matched(&self, v: AgentId) -> bool {
        self.partner(v) != v
    }

    /// Every agent of `ps` is matched.
    pub fn is_perfect(&self, ps: &PreferenceSystem) -> bool {
        ps.agents().all(|v| self.is_matched(v))
    }

    pub fn matched_agents(&self) -> BTreeSet<AgentId> {
        self.edges
            .iter()
            .flat_map(|e| e.endpoints())
            .collect()
    }
}

impl fmt::Debug for Matching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.edges.iter()).finish()
    }
}

/// Nonnegative rational weight per edge; edges absent from the map weigh 0.
#[derive(Clone, Debug, Default)]
pub struct EdgeWeights {
    weight: BTreeMap<Edge, Rat>,
}

impl EdgeWeights {
    pub fn new(
        ps: &PreferenceSystem,
        weight: impl IntoIterator<Item = (Edge, Rat)>,
    ) -> Result<Self, ModelError> {
        let weight: BTreeMap<Edge, Rat> = weight.into_iter().collect();
        for (&e, w) in &weight {
            if !ps.contains_edge(e) {
                return Err(ModelError::UnknownEdge(e));
            }
            if w < &Rat::zero() {
                return Err(ModelError::NegativeWeight(e));
            }
        }
        Ok(EdgeWeights { weight })
    }

    /// All-ones weights on every edge of `ps`.
    pub fn ones(ps: &PreferenceSystem) -> Self {
        EdgeWeights {
            weight: ps
                .edges()
                .into_iter()
                .map(|e| (e, crate::rat(1)))
                .collect(),
        }
    }

    pub fn get(&self, e: Edge) -> Rat {
        self.weight.get(&e).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn keyed_edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.weight.keys().copied()
    }

    pub fn matching_weight(&self, m: &Matching) -> Rat {
        m.edges().map(|e| self.get(e)).sum()
    }
}

/// `e` plus every edge dominating `e` at one of its endpoints.
pub fn phi(ps: &PreferenceSystem, e: Edge) -> Result<BTreeSet<Edge>, ModelError> {
    if !ps.contains_edge(e) {
        return Err(ModelError::UnknownEdge(e));
    }
    let mut out = BTreeSet::new();
    out.insert(e);
    for v in e.endpoints() {
        let u = e.other(v);
        for &w in ps.neighbors(v) {
            if w == u {
                break; // strictly better neighbors only
            }
            out.insert(Edge::new(v, w));
        }
    }
    Ok(out)
}

/// Both endpoints of `e` are unmatched or strictly prefer each other to their
/// current partners.
pub fn is_blocking(ps: &PreferenceSystem, m: &Matching, e: Edge) -> Result<bool, ModelError> {
    if !ps.contains_edge(e) {
        return Err(ModelError::UnknownEdge(e));
    }
    if m.contains(e) {
        return Ok(false);
    }
    let wants = |v: AgentId| {
        let u = e.other(v);
        let p = m.partner(v);
        p == v || ps.prefers(v, u, p)
    };
    Ok(wants(e.lo()) && wants(e.hi()))
}

/// Stability verdict for a matching.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stability {
    Stable,
    /// The lexicographically smallest blocking edge.
    Unstable { witness: Edge },
}

impl Stability {
    pub fn is_stable(&self) -> bool {
        matches!(self, Stability::Stable)
    }
}

pub fn is_stable(ps: &PreferenceSystem, m: &Matching) -> Stability {
    for e in ps.edges() {
        if is_blocking(ps, m, e).unwrap() {
            return Stability::Unstable { witness: e };
        }
    }
    Stability::Stable
}
