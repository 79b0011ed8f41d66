//! Minimum-weight closure via reduction to minimum cut (project selection).

use std::collections::BTreeSet;

use super::flow::FlowNetwork;
use crate::Rat;
use num_traits::Zero;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ClosureError {
    #[error("precedence relation contains a cycle")]
    CyclicPrecedence,
}

/// Elements with signed rational weights and an acyclic precedence relation:
/// choosing an element requires all of its prerequisites.
#[derive(Clone, Debug, Default)]
pub struct ClosureInstance {
    weights: Vec<Rat>,
    /// (element, prerequisite) pairs
    requires: Vec<(usize, usize)>,
}

impl ClosureInstance {
    pub fn new(weights: Vec<Rat>, requires: Vec<(usize, usize)>) -> Self {
        for &(e, p) in &requires {
            assert!(e < weights.len() && p < weights.len());
        }
        ClosureInstance { weights, requires }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    fn check_acyclic(&self) -> Result<(), ClosureError> {
        let n = self.len();
        let mut indeg = vec![0usize; n];
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(e, p) in &self.requires {
            out[e].push(p);
            indeg[p] += 1;
        }
        let mut stack: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut seen = 0;
        while let Some(v) = stack.pop() {
            seen += 1;
            for &w in &out[v] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    stack.push(w);
                }
            }
        }
        if seen == n {
            Ok(())
        } else {
            Err(ClosureError::CyclicPrecedence)
        }
    }

    /// Is `set` closed under the precedence relation?
    pub fn is_closed(&self, set: &BTreeSet<usize>) -> bool {
        self.requires
            .iter()
            .all(|&(e, p)| !set.contains(&e) || set.contains(&p))
    }

    pub fn total_weight(&self, set: &BTreeSet<usize>) -> Rat {
        set.iter().map(|&i| self.weights[i].clone()).sum()
    }
}

/// A prerequisite-closed subset of minimum total weight (the empty set is
/// allowed and has weight 0).
pub fn min_weight_closure(
    c: &ClosureInstance,
) -> Result<(BTreeSet<usize>, Rat), ClosureError> {
    c.check_acyclic()?;
    let n = c.len();
    if n == 0 {
        return Ok((BTreeSet::new(), Rat::zero()));
    }
    // Max-weight closure of the negated weights.  Nodes 0..n are elements,
    // n is the source, n+1 the sink.
    let source = n;
    let sink = n + 1;
    let mut net = FlowNetwork::new(n + 2, source, sink);
    let mut positive_total = Rat::zero();
    let infinite: Rat = c
        .weights
        .iter()
        .map(|w| if w < &Rat::zero() { -w.clone() } else { w.clone() })
        .sum::<Rat>()
        + crate::rat(1);
    for (i, w) in c.weights.iter().enumerate() {
        let neg = -w.clone(); // profit in the max-closure view
        if neg > Rat::zero() {
            positive_total += neg.clone();
            net.add_arc(source, i, neg);
        } else if neg < Rat::zero() {
            net.add_arc(i, sink, -neg);
        }
    }
    for &(e, p) in &c.requires {
        // selecting e requires p
        net.add_arc(e, p, infinite.clone());
    }
    let (cut_value, cut) = net.max_flow_min_cut();
    let chosen: BTreeSet<usize> = cut.into_iter().filter(|&v| v < n).collect();
    debug_assert!(c.is_closed(&chosen));
    let weight = c.total_weight(&chosen);
    debug_assert_eq!(weight, -(positive_total - cut_value));
    Ok((chosen, weight))
}
