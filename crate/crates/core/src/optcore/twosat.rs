//! Two-literal satisfiability via the implication graph and strongly
//! connected components.

/// A literal over variable `var` (0-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Lit {
    pub var: usize,
    pub positive: bool,
}

impl Lit {
    pub fn pos(var: usize) -> Self {
        Lit { var, positive: true }
    }

    pub fn neg(var: usize) -> Self {
        Lit {
            var,
            positive: false,
        }
    }

    pub fn negated(self) -> Self {
        Lit {
            var: self.var,
            positive: !self.positive,
        }
    }

    fn node(self) -> usize {
        2 * self.var + usize::from(!self.positive)
    }
}

/// Clauses of exactly two literals plus optional forced assignments.
#[derive(Clone, Debug, Default)]
pub struct TwoLitSystem {
    pub num_vars: usize,
    pub clauses: Vec<(Lit, Lit)>,
    pub forced: Vec<Lit>,
}

impl TwoLitSystem {
    pub fn new(num_vars: usize) -> Self {
        TwoLitSystem {
            num_vars,
            clauses: Vec::new(),
            forced: Vec::new(),
        }
    }

    pub fn add_clause(&mut self, a: Lit, b: Lit) {
        assert!(a.var < self.num_vars && b.var < self.num_vars);
        self.clauses.push((a, b));
    }

    pub fn force(&mut self, l: Lit) {
        assert!(l.var < self.num_vars);
        self.forced.push(l);
    }

    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        let val = |l: Lit| assignment[l.var] == l.positive;
        self.clauses.iter().all(|&(a, b)| val(a) || val(b))
            && self.forced.iter().all(|&l| val(l))
    }
}

/// Satisfying assignment, or `None` when unsatisfiable.
pub fn two_sat(s: &TwoLitSystem) -> Option<Vec<bool>> {
    let n = 2 * s.num_vars;
    let mut fwd: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
    let imply = |a: Lit, b: Lit, fwd: &mut Vec<Vec<usize>>, rev: &mut Vec<Vec<usize>>| {
        fwd[a.node()].push(b.node());
        rev[b.node()].push(a.node());
    };
    for &(a, b) in &s.clauses {
        imply(a.negated(), b, &mut fwd, &mut rev);
        imply(b.negated(), a, &mut fwd, &mut rev);
    }
    for &l in &s.forced {
        imply(l.negated(), l, &mut fwd, &mut rev);
    }

    // Kosaraju with explicit stacks.
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut stack = vec![(start, 0usize)];
        seen[start] = true;
        while let Some(&mut (v, ref mut i)) = stack.last_mut() {
            if *i < fwd[v].len() {
                let w = fwd[v][*i];
                *i += 1;
                if !seen[w] {
                    seen[w] = true;
                    stack.push((w, 0));
                }
            } else {
                order.push(v);
                stack.pop();
            }
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut c = 0;
    for &start in order.iter().rev() {
        if comp[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        comp[start] = c;
        while let Some(v) = stack.pop() {
            for &w in &rev[v] {
                if comp[w] == usize::MAX {
                    comp[w] = c;
                    stack.push(w);
                }
            }
        }
        c += 1;
    }

    let mut assignment = vec![false; s.num_vars];
    for v in 0..s.num_vars {
        let p = comp[Lit::pos(v).node()];
        let q = comp[Lit::neg(v).node()];
        if p == q {
            return None;
        }
        // components are numbered in topological order of the condensation;
        // a literal is true when its node comes later.
        assignment[v] = p > q;
    }
    debug_assert!(s.satisfied_by(&assignment));
    Some(assignment)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_satisfiable() {
        let mut s = TwoLitSystem::new(2);
        s.add_clause(Lit::pos(0), Lit::pos(1));
        s.add_clause(Lit::neg(0), Lit::pos(1));
        let a = two_sat(&s).unwrap();
        assert!(a[1]);
    }

    #[test]
    fn contradiction() {
        let mut s = TwoLitSystem::new(1);
        s.add_clause(Lit::pos(0), Lit::pos(0));
        s.add_clause(Lit::neg(0), Lit::neg(0));
        assert_eq!(two_sat(&s), None);
    }

    #[test]
    fn forced_assignments_hold() {
        let mut s = TwoLitSystem::new(2);
        s.add_clause(Lit::pos(0), Lit::pos(1));
        s.force(Lit::neg(0));
        let a = two_sat(&s).unwrap();
        assert!(!a[0] && a[1]);
    }

    #[test]
    fn matches_truth_tables() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..500 {
            let vars = rng.gen_range(1..=6);
            let mut s = TwoLitSystem::new(vars);
            for _ in 0..rng.gen_range(0..=10) {
                let l = |rng: &mut rand_chacha::ChaCha8Rng| Lit {
                    var: rng.gen_range(0..vars),
                    positive: rng.gen_bool(0.5),
                };
                let (a, b) = (l(&mut rng), l(&mut rng));
                s.add_clause(a, b);
            }
            if rng.gen_bool(0.3) {
                let var = rng.gen_range(0..vars);
                s.force(Lit {
                    var,
                    positive: rng.gen_bool(0.5),
                });
            }
            let brute_sat = (0u32..1 << vars).any(|mask| {
                let a: Vec<bool> = (0..vars).map(|i| mask >> i & 1 == 1).collect();
                s.satisfied_by(&a)
            });
            match two_sat(&s) {
                Some(a) => {
                    assert!(s.satisfied_by(&a));
                    assert!(brute_sat);
                }
                None => assert!(!brute_sat),
            }
        }
    }
}
