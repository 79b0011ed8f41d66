//! Fractional stable matching polytopes with exact rational arithmetic:
//! membership testing, semi-stable partitions and their induced graphs,
//! half-integral point enumeration, and decomposition of fractional points
//! into pairs of stable matchings.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use crate::model::{phi, AgentId, Edge, Matching, PreferenceSystem};
use crate::oracle::DEFAULT_BOUND;
use crate::reduction::{self, EdgeClassification, ReductionError};
use crate::{ratio, Rat};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PolytopeError {
    #[error("point has a coordinate outside the variant's edge domain")]
    DomainMismatch,
    #[error("partition is not a valid cover by edges and cycles")]
    BadPartition,
    #[error("instance is not in perfect-core form")]
    NotPerfectCore,
    #[error("canonical subgraph is not bipartite")]
    NotBipartite,
    #[error("point is not induced by a semi-stable partition")]
    NotSemiStable,
    #[error("instance exceeds the enumeration bound of {0} agents")]
    InstanceTooLarge(usize),
}

impl From<ReductionError> for PolytopeError {
    fn from(e: ReductionError) -> Self {
        match e {
            ReductionError::NotPerfectCore => PolytopeError::NotPerfectCore,
            // the remaining variants concern explicit edge arguments, which
            // this module never passes through
            _ => unreachable!("unexpected reduction failure: {e}"),
        }
    }
}

/// The three constraint systems.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum PolytopeVariant {
    /// Degree, stability, and nonnegativity constraints over all edges.
    Fsm,
    /// As `Fsm`, plus zero coordinates outside the stable-edge set.
    FsmPrime,
    /// Coordinates restricted to stable edges; degree and stability sums
    /// intersected with that set (stability still quantified over all edges).
    FsmBar,
}

impl PolytopeVariant {
    fn needs_em(self) -> bool {
        !matches!(self, PolytopeVariant::Fsm)
    }
}

/// Sparse exact-rational vector indexed by edges; zero coordinates are not
/// stored, so equality is equality of the nonzero support.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct FractionalPoint {
    coords: BTreeMap<Edge, Rat>,
}

impl FractionalPoint {
    pub fn new(coords: impl IntoIterator<Item = (Edge, Rat)>) -> Self {
        FractionalPoint {
            coords: coords
                .into_iter()
                .filter(|(_, v)| !v.is_zero())
                .collect(),
        }
    }

    pub fn zero() -> Self {
        FractionalPoint::default()
    }

    pub fn from_matching(m: &Matching) -> Self {
        FractionalPoint::new(m.edges().map(|e| (e, Rat::one())))
    }

    pub fn get(&self, e: Edge) -> Rat {
        self.coords.get(&e).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn support(&self) -> impl Iterator<Item = Edge> + '_ {
        self.coords.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Edge, &Rat)> + '_ {
        self.coords.iter().map(|(&e, v)| (e, v))
    }
}

/// A single violated constraint, identified by kind and index.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Constraint {
    /// x(delta(v)) <= 1
    Capacity(AgentId),
    /// x(phi(e)) >= 1
    Stability(Edge),
    /// x_e >= 0
    Nonnegative(Edge),
    /// x_e = 0 for edges outside the stable-edge set
    Support(Edge),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Member,
    Violated(Vec<Constraint>),
}

impl Verdict {
    pub fn is_member(&self) -> bool {
        matches!(self, Verdict::Member)
    }
}

fn classify_em(ps: &PreferenceSystem) -> Result<EdgeClassification, PolytopeError> {
    Ok(reduction::compute_em(ps)?)
}

/// Exact evaluation of every constraint of `variant` at `x`.
pub fn membership(
    ps: &PreferenceSystem,
    variant: PolytopeVariant,
    x: &FractionalPoint,
) -> Result<Verdict, PolytopeError> {
    let em = if variant.needs_em() {
        Some(classify_em(ps)?)
    } else {
        None
    };
    membership_with_em(ps, variant, x, em.as_ref())
}

/// As `membership`, with the stable-edge classification supplied by the
/// caller (it is expensive to recompute inside enumeration loops).
pub fn membership_with_em(
    ps: &PreferenceSystem,
    variant: PolytopeVariant,
    x: &FractionalPoint,
    em: Option<&EdgeClassification>,
) -> Result<Verdict, PolytopeError> {
    let em = match (variant.needs_em(), em) {
        (true, Some(em)) => Some(&em.in_em),
        (true, None) => panic!("restricted variant requires the stable-edge set"),
        (false, _) => None,
    };
    let in_domain = |e: Edge| match variant {
        PolytopeVariant::Fsm | PolytopeVariant::FsmPrime => ps.contains_edge(e),
        PolytopeVariant::FsmBar => em.unwrap().contains(&e),
    };
    if x.support().any(|e| !in_domain(e)) {
        return Err(PolytopeError::DomainMismatch);
    }

    let mut violations = Vec::new();
    for (e, v) in x.iter() {
        if v < &Rat::zero() {
            violations.push(Constraint::Nonnegative(e));
        }
    }
    if variant == PolytopeVariant::FsmPrime {
        for (e, v) in x.iter() {
            if !em.unwrap().contains(&e) && !v.is_zero() {
                violations.push(Constraint::Support(e));
            }
        }
    }
    for v in ps.agents() {
        let sum: Rat = ps
            .neighbors(v)
            .iter()
            .map(|&w| Edge::new(v, w))
            .filter(|&e| em.is_none_or(|em| em.contains(&e)))
            .map(|e| x.get(e))
            .sum();
        if sum > Rat::one() {
            violations.push(Constraint::Capacity(v));
        }
    }
    for e in ps.edges() {
        let dominators = phi(ps, e).expect("edge comes from the instance");
        let sum: Rat = dominators
            .into_iter()
            .filter(|f| em.is_none_or(|em| em.contains(f)))
            .map(|f| x.get(f))
            .sum();
        if sum < Rat::one() {
            violations.push(Constraint::Stability(e));
        }
    }

    violations.sort();
    if violations.is_empty() {
        Ok(Verdict::Member)
    } else {
        Ok(Verdict::Violated(violations))
    }
}

/// Partition of the agents into matched pairs and cycles with rotationally
/// consistent preferences.  Cycles are stored in canonical form: smallest
/// vertex first, then the smaller of the two traversal directions.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct SemiStablePartition {
    pub singles: BTreeSet<Edge>,
    pub cycles: BTreeSet<Vec<AgentId>>,
}

/// Rotates and possibly reverses `cycle` into canonical form.
pub fn canonical_cycle(cycle: &[AgentId]) -> Vec<AgentId> {
    let n = cycle.len();
    let start = (0..n)
        .min_by_key(|&i| cycle[i])
        .expect("cycle is nonempty");
    let fwd: Vec<AgentId> = (0..n).map(|i| cycle[(start + i) % n]).collect();
    let rev: Vec<AgentId> = (0..n).map(|i| cycle[(start + n - i) % n]).collect();
    if fwd[1] <= rev[1] {
        fwd
    } else {
        rev
    }
}

fn cycle_edges(cycle: &[AgentId]) -> Vec<Edge> {
    (0..cycle.len())
        .map(|i| Edge::new(cycle[i], cycle[(i + 1) % cycle.len()]))
        .collect()
}

/// Does every cycle vertex prefer its neighbor in one consistent traversal
/// direction?  Either direction qualifies.
pub fn has_cyclic_preferences(ps: &PreferenceSystem, cycle: &[AgentId]) -> bool {
    let n = cycle.len();
    let consistent = |forward: bool| {
        (0..n).all(|i| {
            let prev = cycle[(i + n - 1) % n];
            let next = cycle[(i + 1) % n];
            let (a, b) = if forward { (next, prev) } else { (prev, next) };
            ps.prefers(cycle[i], a, b)
        })
    };
    consistent(true) || consistent(false)
}

impl SemiStablePartition {
    /// Structural validation: disjoint cover of the agents, all components
    /// made of instance edges, cycles of length at least 3 with rotationally
    /// consistent preferences.
    pub fn validate(&self, ps: &PreferenceSystem) -> Result<(), PolytopeError> {
        let mut covered: BTreeSet<AgentId> = BTreeSet::new();
        let mut take = |v: AgentId| -> Result<(), PolytopeError> {
            if !ps.contains_agent(v) || !covered.insert(v) {
                return Err(PolytopeError::BadPartition);
            }
            Ok(())
        };
        for e in &self.singles {
            if !ps.contains_edge(*e) {
                return Err(PolytopeError::BadPartition);
            }
            take(e.lo())?;
            take(e.hi())?;
        }
        for cycle in &self.cycles {
            if cycle.len() < 3 {
                return Err(PolytopeError::BadPartition);
            }
            for &v in cycle {
                take(v)?;
            }
            if cycle_edges(cycle).iter().any(|&e| !ps.contains_edge(e)) {
                return Err(PolytopeError::BadPartition);
            }
            if !has_cyclic_preferences(ps, cycle) {
                return Err(PolytopeError::BadPartition);
            }
        }
        if ps.agents().any(|v| !covered.contains(&v)) {
            return Err(PolytopeError::BadPartition);
        }
        Ok(())
    }

    /// The induced point: 1 on matched pairs, 1/2 on cycle edges.
    pub fn induced_point(&self) -> FractionalPoint {
        let mut coords: BTreeMap<Edge, Rat> = BTreeMap::new();
        for &e in &self.singles {
            coords.insert(e, Rat::one());
        }
        for cycle in &self.cycles {
            for e in cycle_edges(cycle) {
                coords.insert(e, ratio(1, 2));
            }
        }
        FractionalPoint { coords }
    }
}

/// Is the partition's induced point a member of the given polytope?
pub fn semistable_feasible(
    ps: &PreferenceSystem,
    c: &SemiStablePartition,
    variant: PolytopeVariant,
) -> Result<bool, PolytopeError> {
    c.validate(ps)?;
    let em = if variant.needs_em() {
        Some(classify_em(ps)?)
    } else {
        None
    };
    feasible_with_em(ps, c, variant, em.as_ref())
}

fn feasible_with_em(
    ps: &PreferenceSystem,
    c: &SemiStablePartition,
    variant: PolytopeVariant,
    em: Option<&EdgeClassification>,
) -> Result<bool, PolytopeError> {
    let x = c.induced_point();
    if variant == PolytopeVariant::FsmBar
        && x.support().any(|e| !em.unwrap().contains(e))
    {
        return Ok(false);
    }
    Ok(membership_with_em(ps, variant, &x, em)?.is_member())
}

/// Exhaustive generator of partitions of the agents into allowed edges and
/// allowed cycles of length >= 3.  With `cyclic_only` the cycle components
/// are restricted to rotationally consistent preferences (pruned during the
/// search, since a strict order fixes the direction at every interior
/// vertex).
fn generate_partitions(
    ps: &PreferenceSystem,
    allowed: &BTreeSet<Edge>,
    cyclic_only: bool,
) -> Vec<SemiStablePartition> {
    fn recurse(
        ps: &PreferenceSystem,
        allowed: &BTreeSet<Edge>,
        cyclic_only: bool,
        covered: &mut BTreeSet<AgentId>,
        current: &mut SemiStablePartition,
        out: &mut Vec<SemiStablePartition>,
    ) {
        let Some(v) = ps.agents().find(|v| !covered.contains(v)) else {
            out.push(current.clone());
            return;
        };
        covered.insert(v);
        for &w in ps.neighbors(v) {
            let e = Edge::new(v, w);
            if covered.contains(&w) || !allowed.contains(&e) {
                continue;
            }
            covered.insert(w);
            current.singles.insert(e);
            recurse(ps, allowed, cyclic_only, covered, current, out);
            current.singles.remove(&e);
            covered.remove(&w);
        }
        // cycles through v, canonical: v smallest, second element below last
        let mut path = vec![v];
        extend_cycle(ps, allowed, cyclic_only, covered, current, out, &mut path, 3);
        covered.remove(&v);
    }

    // fwd: every path vertex prefers its successor; bwd: its predecessor.
    // dirs is the bitmask of directions still possible (1 = fwd, 2 = bwd).
    #[allow(clippy::too_many_arguments)]
    fn extend_cycle(
        ps: &PreferenceSystem,
        allowed: &BTreeSet<Edge>,
        cyclic_only: bool,
        covered: &mut BTreeSet<AgentId>,
        current: &mut SemiStablePartition,
        out: &mut Vec<SemiStablePartition>,
        path: &mut Vec<AgentId>,
        dirs: u8,
    ) {
        let v = path[0];
        let tail = *path.last().unwrap();
        let interior = |dirs: u8, prev: AgentId, at: AgentId, next: AgentId| -> u8 {
            let mut d = dirs;
            if d & 1 != 0 && !ps.prefers(at, next, prev) {
                d &= !1;
            }
            if d & 2 != 0 && !ps.prefers(at, prev, next) {
                d &= !2;
            }
            d
        };
        if path.len() >= 3 && path[1] < tail && allowed.contains(&Edge::new(tail, v)) {
            let mut d = dirs;
            if cyclic_only {
                d = interior(d, path[path.len() - 2], tail, v);
                d = interior(d, tail, v, path[1]);
            }
            if !cyclic_only || d != 0 {
                let cycle = path.clone();
                current.cycles.insert(cycle.clone());
                recurse(ps, allowed, cyclic_only, covered, current, out);
                current.cycles.remove(&cycle);
            }
        }
        for &w in ps.neighbors(tail) {
            if w < v || covered.contains(&w) || !allowed.contains(&Edge::new(tail, w)) {
                continue;
            }
            let mut d = dirs;
            if cyclic_only && path.len() >= 2 {
                d = interior(d, path[path.len() - 2], tail, w);
                if d == 0 {
                    continue;
                }
            }
            covered.insert(w);
            path.push(w);
            extend_cycle(ps, allowed, cyclic_only, covered, current, out, path, d);
            path.pop();
            covered.remove(&w);
        }
    }

    let mut out = Vec::new();
    let mut covered = BTreeSet::new();
    let mut current = SemiStablePartition::default();
    recurse(ps, allowed, cyclic_only, &mut covered, &mut current, &mut out);
    out
}

fn check_bound(ps: &PreferenceSystem) -> Result<(), PolytopeError> {
    if ps.num_agents() > DEFAULT_BOUND {
        return Err(PolytopeError::InstanceTooLarge(DEFAULT_BOUND));
    }
    Ok(())
}

/// All semi-stable partitions whose induced point lies in the polytope.
pub fn enumerate_semistable(
    ps: &PreferenceSystem,
    variant: PolytopeVariant,
) -> Result<BTreeSet<SemiStablePartition>, PolytopeError> {
    check_bound(ps)?;
    let em = if variant.needs_em() {
        Some(classify_em(ps)?)
    } else {
        None
    };
    let allowed: BTreeSet<Edge> = match (variant, &em) {
        (PolytopeVariant::Fsm, _) => ps.edges().into_iter().collect(),
        (_, Some(em)) => em.in_em.clone(),
        _ => unreachable!(),
    };
    let mut result = BTreeSet::new();
    for c in generate_partitions(ps, &allowed, true) {
        if feasible_with_em(ps, &c, variant, em.as_ref())? {
            result.insert(c);
        }
    }
    Ok(result)
}

/// All feasible points with every coordinate in {0, 1/2, 1}.
///
/// Requires perfect-core form, where every feasible point saturates every
/// vertex; the search therefore ranges over vertex partitions into edges
/// (coordinate 1) and cycles (coordinate 1/2 on each cycle edge).
pub fn halfintegral_points(
    ps: &PreferenceSystem,
    variant: PolytopeVariant,
) -> Result<BTreeSet<FractionalPoint>, PolytopeError> {
    check_bound(ps)?;
    let em = classify_em(ps)?;
    let allowed: BTreeSet<Edge> = match variant {
        PolytopeVariant::Fsm => ps.edges().into_iter().collect(),
        _ => em.in_em.clone(),
    };
    let mut result = BTreeSet::new();
    for c in generate_partitions(ps, &allowed, false) {
        let x = c.induced_point();
        if membership_with_em(ps, variant, &x, Some(&em))?.is_member() {
            result.insert(x);
        }
    }
    Ok(result)
}

/// The graph induced by a partition: its own edges plus every canonical
/// subgraph edge lying weakly between the partition edges in both endpoints'
/// preference lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HcGraph {
    pub edges: BTreeSet<Edge>,
    pub bipartite: bool,
}

pub fn build_hc(
    ps: &PreferenceSystem,
    c: &SemiStablePartition,
) -> Result<HcGraph, PolytopeError> {
    c.validate(ps)?;
    let red = reduction::reduce_to_h(ps)?;
    if !feasible_with_em(ps, c, PolytopeVariant::FsmBar, Some(&red.em))? {
        return Err(PolytopeError::BadPartition);
    }

    let mut partners: BTreeMap<AgentId, Vec<AgentId>> = BTreeMap::new();
    for &e in &c.singles {
        partners.entry(e.lo()).or_default().push(e.hi());
        partners.entry(e.hi()).or_default().push(e.lo());
    }
    for cycle in &c.cycles {
        for e in cycle_edges(cycle) {
            partners.entry(e.lo()).or_default().push(e.hi());
            partners.entry(e.hi()).or_default().push(e.lo());
        }
    }
    // weakly between u's most and least preferred partners
    let sandwiched = |u: AgentId, v: AgentId| {
        let ps_of_u = &partners[&u];
        let best = *ps_of_u
            .iter()
            .min_by_key(|&&p| ps.rank_of(u, p).unwrap())
            .unwrap();
        let worst = *ps_of_u
            .iter()
            .max_by_key(|&&p| ps.rank_of(u, p).unwrap())
            .unwrap();
        (v == best || ps.prefers(u, best, v)) && (v == worst || ps.prefers(u, v, worst))
    };

    let mut edges: BTreeSet<Edge> = c.singles.clone();
    for cycle in &c.cycles {
        edges.extend(cycle_edges(cycle));
    }
    for e in red.h.edges() {
        if sandwiched(e.lo(), e.hi()) && sandwiched(e.hi(), e.lo()) {
            edges.insert(e);
        }
    }

    let agents: BTreeSet<AgentId> = ps.agents().collect();
    let graph = ps.restrict(&agents, |e| edges.contains(&e));
    let bipartite = reduction::bipartition(&graph).is_some();
    Ok(HcGraph { edges, bipartite })
}

/// Splits a half-integral point into two stable matchings averaging to it
/// exactly.  Requires the canonical subgraph to be bipartite and the point to
/// be induced by a semi-stable partition over stable edges.
pub fn decompose_fractional(
    ps: &PreferenceSystem,
    x: &FractionalPoint,
) -> Result<(Matching, Matching), PolytopeError> {
    let red = reduction::reduce_to_h(ps)?;
    let (part_a, _) = reduction::bipartition(&red.h).ok_or(PolytopeError::NotBipartite)?;

    if x.support().any(|e| !red.em.contains(e)) {
        return Err(PolytopeError::NotSemiStable);
    }
    let mut singles: BTreeSet<Edge> = BTreeSet::new();
    let mut half_adj: BTreeMap<AgentId, Vec<AgentId>> = BTreeMap::new();
    for (e, v) in x.iter() {
        if v == &Rat::one() {
            singles.insert(e);
        } else if *v == ratio(1, 2) {
            half_adj.entry(e.lo()).or_default().push(e.hi());
            half_adj.entry(e.hi()).or_default().push(e.lo());
        } else {
            return Err(PolytopeError::NotSemiStable);
        }
    }
    let mut degree: BTreeMap<AgentId, usize> = ps.agents().map(|v| (v, 0)).collect();
    for e in &singles {
        for u in e.endpoints() {
            *degree.get_mut(&u).ok_or(PolytopeError::NotSemiStable)? += 2;
        }
    }
    for (&u, l) in &half_adj {
        *degree.get_mut(&u).ok_or(PolytopeError::NotSemiStable)? += l.len();
    }
    if degree.values().any(|&d| d != 2) {
        return Err(PolytopeError::NotSemiStable);
    }

    // walk the half-edges into cycles, oriented so that every vertex prefers
    // its successor
    let mut cycles: Vec<Vec<AgentId>> = Vec::new();
    let mut seen: BTreeSet<AgentId> = BTreeSet::new();
    for &start in half_adj.keys() {
        if seen.contains(&start) {
            continue;
        }
        let mut cycle = vec![start];
        seen.insert(start);
        let mut prev = start;
        let mut at = half_adj[&start][0];
        while at != start {
            if !seen.insert(at) {
                return Err(PolytopeError::NotSemiStable);
            }
            cycle.push(at);
            let l = &half_adj[&at];
            let next = if l[0] == prev { l[1] } else { l[0] };
            prev = at;
            at = next;
        }
        if cycle.len() < 3 {
            return Err(PolytopeError::NotSemiStable);
        }
        let n = cycle.len();
        let forward = (0..n).all(|i| {
            ps.prefers(cycle[i], cycle[(i + 1) % n], cycle[(i + n - 1) % n])
        });
        if !forward {
            cycle.reverse();
            let ok = (0..n).all(|i| {
                ps.prefers(cycle[i], cycle[(i + 1) % n], cycle[(i + n - 1) % n])
            });
            if !ok {
                return Err(PolytopeError::NotSemiStable);
            }
        }
        cycles.push(cycle);
    }

    let partition = SemiStablePartition {
        singles: singles.clone(),
        cycles: cycles.iter().map(|c| canonical_cycle(c)).collect(),
    };
    if !feasible_with_em(ps, &partition, PolytopeVariant::FsmBar, Some(&red.em))? {
        return Err(PolytopeError::NotSemiStable);
    }

    let mut m1: BTreeSet<Edge> = singles.clone();
    let mut m2: BTreeSet<Edge> = singles;
    for cycle in &cycles {
        let n = cycle.len();
        for i in 0..n {
            let u = cycle[i];
            let succ = cycle[(i + 1) % n];
            if part_a.contains(&u) {
                m1.insert(Edge::new(u, succ));
            } else {
                m2.insert(Edge::new(u, succ));
            }
        }
    }
    let m1 = Matching::new(ps, m1).map_err(|_| PolytopeError::NotSemiStable)?;
    let m2 = Matching::new(ps, m2).map_err(|_| PolytopeError::NotSemiStable)?;
    debug_assert!(crate::model::is_stable(ps, &m1).is_stable());
    debug_assert!(crate::model::is_stable(ps, &m2).is_stable());
    debug_assert!({
        let avg = FractionalPoint::new(ps.edges().into_iter().map(|e| {
            (e, (FractionalPoint::from_matching(&m1).get(e)
                + FractionalPoint::from_matching(&m2).get(e))
                * ratio(1, 2))
        }));
        &avg == x
    });
    Ok((m1, m2))
}
