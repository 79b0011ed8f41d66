//! Edmonds-Karp maximum flow with exact rational capacities.

use std::collections::{BTreeSet, VecDeque};

use crate::Rat;
use num_traits::Zero;

/// Directed flow network over nodes `0..n`.
pub struct FlowNetwork {
    n: usize,
    source: usize,
    sink: usize,
    // arc i and i^1 are a residual pair
    to: Vec<usize>,
    cap: Vec<Rat>,
    head: Vec<Vec<usize>>, // per node, arc indices in insertion order
}

impl FlowNetwork {
    pub fn new(n: usize, source: usize, sink: usize) -> Self {
        assert!(source < n && sink < n && source != sink);
        FlowNetwork {
            n,
            source,
            sink,
            to: Vec::new(),
            cap: Vec::new(),
            head: vec![Vec::new(); n],
        }
    }

    pub fn add_arc(&mut self, from: usize, to: usize, cap: Rat) {
        assert!(from < self.n && to < self.n);
        assert!(cap >= Rat::zero(), "capacities must be nonnegative");
        self.head[from].push(self.to.len());
        self.to.push(to);
        self.cap.push(cap);
        self.head[to].push(self.to.len());
        self.to.push(from);
        self.cap.push(Rat::zero());
    }

    /// Runs Edmonds-Karp and returns the flow value together with the source
    /// side of a minimum cut.  Strong duality (flow value = cut capacity) is
    /// asserted internally on every call.
    pub fn max_flow_min_cut(mut self) -> (Rat, BTreeSet<usize>) {
        let mut value = Rat::zero();
        loop {
            // BFS for a shortest augmenting path, deterministic arc order.
            let mut pred: Vec<Option<usize>> = vec![None; self.n];
            let mut seen = vec![false; self.n];
            seen[self.source] = true;
            let mut q = VecDeque::from([self.source]);
            while let Some(u) = q.pop_front() {
                for &a in &self.head[u] {
                    let v = self.to[a];
                    if !seen[v] && self.cap[a] > Rat::zero() && self.arc_tail(a) == u {
                        seen[v] = true;
                        pred[v] = Some(a);
                        q.push_back(v);
                    }
                }
            }
            if !seen[self.sink] {
                let cut: BTreeSet<usize> = (0..self.n).filter(|&v| seen[v]).collect();
                let mut cut_cap = Rat::zero();
                for u in &cut {
                    for &a in &self.head[*u] {
                        if a % 2 == 0 && self.arc_tail(a) == *u && !cut.contains(&self.to[a]) {
                            // original capacity = residual + pushed-back
                            cut_cap += self.cap[a].clone() + self.cap[a ^ 1].clone();
                        }
                    }
                }
                assert_eq!(value, cut_cap, "max-flow / min-cut duality violated");
                return (value, cut);
            }
            let mut bottleneck: Option<Rat> = None;
            let mut v = self.sink;
            while v != self.source {
                let a = pred[v].unwrap();
                let c = self.cap[a].clone();
                bottleneck = Some(match bottleneck {
                    None => c,
                    Some(b) => b.min(c),
                });
                v = self.arc_tail(a);
            }
            let push = bottleneck.unwrap();
            let mut v = self.sink;
            while v != self.source {
                let a = pred[v].unwrap();
                self.cap[a] -= push.clone();
                self.cap[a ^ 1] += push.clone();
                v = self.arc_tail(a);
            }
            value += push;
        }
    }

    fn arc_tail(&self, a: usize) -> usize {
        self.to[a ^ 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    #[test]
    fn single_arc() {
        let mut n = FlowNetwork::new(2, 0, 1);
        n.add_arc(0, 1, rat(3));
        let (v, cut) = n.max_flow_min_cut();
        assert_eq!(v, rat(3));
        assert_eq!(cut, [0].into_iter().collect());
    }

    #[test]
    fn two_disjoint_paths() {
        let mut n = FlowNetwork::new(4, 0, 3);
        n.add_arc(0, 1, rat(2));
        n.add_arc(1, 3, rat(2));
        n.add_arc(0, 2, rat(5));
        n.add_arc(2, 3, rat(5));
        let (v, _) = n.max_flow_min_cut();
        assert_eq!(v, rat(7));
    }

    #[test]
    fn zero_capacity() {
        let mut n = FlowNetwork::new(2, 0, 1);
        n.add_arc(0, 1, rat(0));
        let (v, cut) = n.max_flow_min_cut();
        assert_eq!(v, rat(0));
        assert_eq!(cut, [0].into_iter().collect());
    }

    #[test]
    fn rational_bottleneck() {
        let mut n = FlowNetwork::new(3, 0, 2);
        n.add_arc(0, 1, crate::ratio(1, 2));
        n.add_arc(1, 2, crate::ratio(1, 3));
        let (v, _) = n.max_flow_min_cut();
        assert_eq!(v, crate::ratio(1, 3));
    }
}
