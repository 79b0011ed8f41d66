//! Factor-2 approximation of the minimum-weight stable matching for
//! instances whose stable-edge graph consists of single edges and
//! vertex-disjoint even cycles.
//!
//! Pipeline: shift all weight onto one reference edge per cycle, extract
//! two-literal orientation constraints from the intermediate edges, solve a
//! half-integral covering relaxation by minimum cut, round through residual
//! two-literal satisfiability, and fall back to exact search over the cycle
//! orientations when rounding fails.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicU64, Ordering};

use num_traits::Zero;

use crate::irving;
use crate::model::{AgentId, Edge, EdgeWeights, Matching, PreferenceSystem};
use crate::optcore::{two_sat, FlowNetwork, Lit, TwoLitSystem};
use crate::reduction;
use crate::{ratio, Rat};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ApproxError {
    #[error("instance has no stable matching")]
    NoStableMatching,
    #[error("instance is not in perfect-core form")]
    NotPerfectCore,
    #[error("stable-edge graph has degree {degree} at agent {vertex}")]
    Violation { vertex: AgentId, degree: usize },
}

/// One even cycle of the stable-edge graph, oriented so that every vertex
/// prefers its successor, starting from its smallest vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleComponent {
    pub vertices: Vec<AgentId>,
}

impl CycleComponent {
    /// The two perfect matchings of the cycle.  The first contains the edge
    /// from the smallest vertex to its successor.
    pub fn orientations(&self) -> (Vec<Edge>, Vec<Edge>) {
        let n = self.vertices.len();
        let edge_at = |i: usize| Edge::new(self.vertices[i], self.vertices[(i + 1) % n]);
        let first = (0..n).step_by(2).map(edge_at).collect();
        let second = (1..n).step_by(2).map(edge_at).collect();
        (first, second)
    }
}

/// Decomposition of the stable-edge graph into single edges and even cycles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleStructure {
    pub singles: BTreeSet<Edge>,
    pub cycles: Vec<CycleComponent>,
}

/// Succeeds iff no vertex carries three or more stable edges; the components
/// are then single edges or even cycles with rotationally consistent
/// preferences.
pub fn check_cycle_form(ps: &PreferenceSystem) -> Result<CycleStructure, ApproxError> {
    if irving::find_stable_matching(ps).is_none() {
        return Err(ApproxError::NoStableMatching);
    }
    let em = reduction::compute_em(ps).map_err(|_| ApproxError::NotPerfectCore)?;
    let mut adj: BTreeMap<AgentId, Vec<AgentId>> = ps.agents().map(|v| (v, Vec::new())).collect();
    for e in &em.in_em {
        adj.get_mut(&e.lo()).unwrap().push(e.hi());
        adj.get_mut(&e.hi()).unwrap().push(e.lo());
    }
    for (&v, l) in &adj {
        if l.len() > 2 {
            return Err(ApproxError::Violation {
                vertex: v,
                degree: l.len(),
            });
        }
    }

    let mut singles = BTreeSet::new();
    let mut cycles = Vec::new();
    let mut seen: BTreeSet<AgentId> = BTreeSet::new();
    for v in ps.agents() {
        if seen.contains(&v) {
            continue;
        }
        let l = &adj[&v];
        // every agent is matched somewhere, so isolated vertices cannot occur
        assert!(!l.is_empty(), "agent {v} has no stable edge");
        if l.len() == 1 {
            let w = l[0];
            assert_eq!(adj[&w], vec![v], "stable-edge path of length above one");
            singles.insert(Edge::new(v, w));
            seen.insert(v);
            seen.insert(w);
            continue;
        }
        // walk the cycle from v toward the neighbor it prefers
        let start_next = if ps.prefers(v, l[0], l[1]) { l[0] } else { l[1] };
        let mut cycle = vec![v];
        seen.insert(v);
        let mut prev = v;
        let mut at = start_next;
        while at != v {
            assert_eq!(adj[&at].len(), 2, "stable-edge path of length above one");
            seen.insert(at);
            cycle.push(at);
            let l = &adj[&at];
            let next = if l[0] == prev { l[1] } else { l[0] };
            prev = at;
            at = next;
        }
        assert!(cycle.len() % 2 == 0, "odd stable-edge cycle");
        let n = cycle.len();
        for i in 0..n {
            assert!(
                ps.prefers(cycle[i], cycle[(i + 1) % n], cycle[(i + n - 1) % n]),
                "stable-edge cycle without rotationally consistent preferences"
            );
        }
        cycles.push(CycleComponent { vertices: cycle });
    }
    Ok(CycleStructure { singles, cycles })
}

/// Per-cycle reference edge and premium.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclePricing {
    /// lexicographically smallest edge of the costlier orientation
    pub reference_edge: Edge,
    /// cost difference between the two orientations, always nonnegative
    pub premium: Rat,
    pub w_plus: Rat,
    pub w_minus: Rat,
    /// whether the costlier orientation is the cycle's first orientation
    pub ref_in_first: bool,
}

/// The reweighting: all weight concentrated on reference edges, plus the
/// constant part shared by every stable matching.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TildeWeights {
    /// aligned with the cycle list of the structure
    pub pricing: Vec<CyclePricing>,
    pub w_minus_total: Rat,
}

impl TildeWeights {
    /// Sum of premiums of reference edges present in `m`.
    pub fn tilde_weight(&self, m: &Matching) -> Rat {
        self.pricing
            .iter()
            .filter(|p| m.contains(p.reference_edge))
            .map(|p| p.premium.clone())
            .sum()
    }
}

pub fn tilde_weights(s: &CycleStructure, w: &EdgeWeights) -> TildeWeights {
    let mut w_minus_total: Rat = s.singles.iter().map(|&e| w.get(e)).sum();
    let mut pricing = Vec::new();
    for cycle in &s.cycles {
        let (first, second) = cycle.orientations();
        let w_first: Rat = first.iter().map(|&e| w.get(e)).sum();
        let w_second: Rat = second.iter().map(|&e| w.get(e)).sum();
        let ref_in_first = w_first >= w_second;
        let (plus_edges, w_plus, w_minus) = if ref_in_first {
            (&first, w_first.clone(), w_second.clone())
        } else {
            (&second, w_second.clone(), w_first.clone())
        };
        let reference_edge = *plus_edges.iter().min().unwrap();
        w_minus_total += w_minus.clone();
        pricing.push(CyclePricing {
            reference_edge,
            premium: w_plus.clone() - w_minus.clone(),
            w_plus,
            w_minus,
            ref_in_first,
        });
    }
    TildeWeights {
        pricing,
        w_minus_total,
    }
}

/// Two-literal constraints over one boolean per cycle (true = the cycle's
/// first orientation).  Each intermediate edge of the canonical subgraph
/// blocks exactly when both endpoints hold their less preferred partner.
#[derive(Clone, Debug)]
pub struct OrientationProblem {
    pub system: TwoLitSystem,
    /// per cycle vertex, the literal "matched to the preferred partner"
    pub literal_of: BTreeMap<AgentId, Lit>,
}

pub fn orientation_constraints(
    ps: &PreferenceSystem,
    s: &CycleStructure,
) -> Result<OrientationProblem, ApproxError> {
    let red = reduction::reduce_to_h(ps).map_err(|_| ApproxError::NotPerfectCore)?;
    let mut literal_of: BTreeMap<AgentId, Lit> = BTreeMap::new();
    for (i, cycle) in s.cycles.iter().enumerate() {
        for (j, &v) in cycle.vertices.iter().enumerate() {
            // in the first orientation, even positions are matched to their
            // successor, which every vertex prefers
            let lit = if j % 2 == 0 { Lit::pos(i) } else { Lit::neg(i) };
            literal_of.insert(v, lit);
        }
    }
    let mut system = TwoLitSystem::new(s.cycles.len());
    for e in red.h.edges() {
        if red.em.contains(e) {
            continue;
        }
        let (a, b) = (
            literal_of
                .get(&e.lo())
                .copied()
                .expect("intermediate edge at a single-edge vertex"),
            literal_of
                .get(&e.hi())
                .copied()
                .expect("intermediate edge at a single-edge vertex"),
        );
        if a == b {
            system.force(a);
        } else if a != b.negated() {
            system.add_clause(a, b);
        }
        // (l or not l) is a tautology and is dropped
    }
    Ok(OrientationProblem { system, literal_of })
}

/// The matching selecting, per cycle, its first orientation iff
/// `first[i]`, together with all single edges.
pub fn matching_from_orientations(
    ps: &PreferenceSystem,
    s: &CycleStructure,
    first: &[bool],
) -> Matching {
    assert_eq!(first.len(), s.cycles.len());
    let mut edges: BTreeSet<Edge> = s.singles.clone();
    for (cycle, &f) in s.cycles.iter().zip(first) {
        let (o1, o2) = cycle.orientations();
        edges.extend(if f { o1 } else { o2 });
    }
    Matching::new(ps, edges).expect("orientations cover each vertex once")
}

static FALLBACK_INVOCATIONS: AtomicU64 = AtomicU64::new(0);

/// How many times the exact fallback has run in this process.
pub fn fallback_invocations() -> u64 {
    FALLBACK_INVOCATIONS.load(Ordering::Relaxed)
}

/// Value of an orientation assignment under the reweighting.
fn assignment_cost(tw: &TildeWeights, assignment: &[bool]) -> Rat {
    tw.pricing
        .iter()
        .zip(assignment)
        .filter(|(p, &a)| a == p.ref_in_first)
        .map(|(p, _)| p.premium.clone())
        .sum()
}

/// Half-integral covering relaxation of the orientation problem, solved as a
/// minimum cut on a doubled bipartite graph.  Returns the relaxation value
/// and, per cycle, the value of the "premium orientation" indicator
/// (0, 1/2, or 1).
fn solve_relaxation(tw: &TildeWeights, op: &OrientationProblem) -> (Rat, Vec<Rat>) {
    let k = tw.pricing.len();
    if k == 0 {
        return (Rat::zero(), Vec::new());
    }
    // covering node per literal polarity: index 2i = "premium orientation of
    // cycle i" (cost premium_i), 2i+1 = its complement (cost 0)
    let node_of = |l: Lit, tw: &TildeWeights| -> usize {
        let premium_lit = l.positive == tw.pricing[l.var].ref_in_first;
        2 * l.var + usize::from(!premium_lit)
    };
    let mut constraints: Vec<(usize, usize)> = (0..k).map(|i| (2 * i, 2 * i + 1)).collect();
    for &(a, b) in &op.system.clauses {
        constraints.push((node_of(a, tw), node_of(b, tw)));
    }
    for &l in &op.system.forced {
        let n = node_of(l, tw);
        constraints.push((n, n));
    }

    let cost = |n: usize| -> Rat {
        if n % 2 == 0 {
            tw.pricing[n / 2].premium.clone()
        } else {
            Rat::zero()
        }
    };
    // nodes: left copies 0..2k, right copies 2k..4k, then source and sink
    let nn = 4 * k;
    let source = nn;
    let sink = nn + 1;
    let mut net = FlowNetwork::new(nn + 2, source, sink);
    let total: Rat = (0..2 * k).map(cost).sum();
    let big = total + crate::rat(1);
    for n in 0..2 * k {
        net.add_arc(source, n, cost(n) * ratio(1, 2));
        net.add_arc(2 * k + n, sink, cost(n) * ratio(1, 2));
    }
    for &(a, b) in &constraints {
        net.add_arc(a, 2 * k + b, big.clone());
        if a != b {
            net.add_arc(b, 2 * k + a, big.clone());
        }
    }
    let (value, cut) = net.max_flow_min_cut();

    let mut premium_value = Vec::with_capacity(k);
    for i in 0..k {
        let n = 2 * i;
        let left = !cut.contains(&n); // left copy selected when cut off source
        let right = cut.contains(&(2 * k + n));
        let halves = usize::from(left) + usize::from(right);
        premium_value.push(ratio(halves as i64, 2));
    }
    (value, premium_value)
}

/// Exhaustive minimum over all satisfying orientation assignments.
fn exact_orientation_opt(tw: &TildeWeights, op: &OrientationProblem) -> Option<Vec<bool>> {
    let k = tw.pricing.len();
    assert!(k < 24, "too many cycles for the exact fallback");
    let mut best: Option<(Rat, Vec<bool>)> = None;
    for mask in 0u32..1 << k {
        let assignment: Vec<bool> = (0..k).map(|i| mask >> i & 1 == 1).collect();
        if !op.system.satisfied_by(&assignment) {
            continue;
        }
        let c = assignment_cost(tw, &assignment);
        let better = match &best {
            None => true,
            Some((bc, ba)) => c < *bc || (c == *bc && assignment < *ba),
        };
        if better {
            best = Some((c, assignment));
        }
    }
    best.map(|(_, a)| a)
}

/// A stable matching whose weight is at most twice the minimum, together
/// with its exact weight and the proven upper bound.
pub fn approximate_min_weight(
    ps: &PreferenceSystem,
    w: &EdgeWeights,
) -> Result<(Matching, Rat, Rat), ApproxError> {
    let s = check_cycle_form(ps)?;
    let tw = tilde_weights(&s, w);
    let op = orientation_constraints(ps, &s)?;

    let (relax_value, premium_value) = solve_relaxation(&tw, &op);

    // round: keep integral indicators, complete the half ones by residual
    // satisfiability
    let mut residual = op.system.clone();
    for (i, v) in premium_value.iter().enumerate() {
        let premium_lit = if tw.pricing[i].ref_in_first {
            Lit::pos(i)
        } else {
            Lit::neg(i)
        };
        if v.is_zero() {
            residual.force(premium_lit.negated());
        } else if !v.is_zero() && *v != ratio(1, 2) {
            residual.force(premium_lit);
        }
    }

    let (assignment, bound) = match two_sat(&residual) {
        Some(a) => {
            let bound = (relax_value + tw.w_minus_total.clone()) * crate::rat(2);
            (a, bound)
        }
        None => {
            FALLBACK_INVOCATIONS.fetch_add(1, Ordering::Relaxed);
            let a = exact_orientation_opt(&tw, &op)
                .expect("a stable matching exists, so some assignment satisfies");
            let bound = assignment_cost(&tw, &a) + tw.w_minus_total.clone();
            (a, bound)
        }
    };

    let m = matching_from_orientations(ps, &s, &assignment);
    let weight = w.matching_weight(&m);
    debug_assert!(crate::model::is_stable(ps, &m).is_stable());
    debug_assert_eq!(
        weight,
        assignment_cost(&tw, &assignment) + tw.w_minus_total.clone()
    );
    debug_assert!(weight <= bound);
    Ok((m, weight, bound))
}
