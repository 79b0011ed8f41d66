//! Small named instances and random instance generators.
//!
//! The fixtures here are shared by the unit tests, the integration tests and
//! the acceptance suite; the generators produce the randomized corpora those
//! suites run over.

use std::collections::BTreeSet;

use crate::model::{AgentId, PreferenceSystem};

/// The 6-agent instance whose phase-one graph is non-bipartite while its
/// reduced graph is a perfect matching.
pub fn ex1() -> PreferenceSystem {
    PreferenceSystem::new([
        (1, vec![3, 4, 5, 2]),
        (2, vec![1, 4, 3, 5, 6]),
        (3, vec![5, 6, 1, 2]),
        (4, vec![5, 6, 1, 2]),
        (5, vec![1, 2, 3, 4]),
        (6, vec![2, 3, 4]),
    ])
    .unwrap()
}

/// Two agents, each the other's only choice.
pub fn e2() -> PreferenceSystem {
    PreferenceSystem::new([(1, vec![2]), (2, vec![1])]).unwrap()
}

/// Six agents on a cycle with cyclic preferences: each ranks its successor
/// first and its predecessor second.  Two stable matchings.
pub fn c6() -> PreferenceSystem {
    cycle_with_cyclic_prefs(&[1, 2, 3, 4, 5, 6])
}

/// Four agents with no stable matching.
pub fn nosm() -> PreferenceSystem {
    PreferenceSystem::new([
        (1, vec![2, 3, 4]),
        (2, vec![3, 1, 4]),
        (3, vec![1, 2, 4]),
        (4, vec![1, 2, 3]),
    ])
    .unwrap()
}

/// A 3-vertex path; agent 3 is unmatched in the unique stable matching.
pub fn path3() -> PreferenceSystem {
    PreferenceSystem::new([(1, vec![2]), (2, vec![1, 3]), (3, vec![2])]).unwrap()
}

/// Bipartite 3+3 instance with cyclically shifted lists; three stable
/// matchings and three stable partners per agent.  Agents 1-3 versus 4-6.
pub fn lat3() -> PreferenceSystem {
    PreferenceSystem::new([
        (1, vec![4, 5, 6]),
        (2, vec![5, 6, 4]),
        (3, vec![6, 4, 5]),
        (4, vec![2, 3, 1]),
        (5, vec![3, 1, 2]),
        (6, vec![1, 2, 3]),
    ])
    .unwrap()
}

/// Two disjoint copies of [`c6`] (vertices 1-6 and 7-12) joined by the edge
/// 1-7, inserted strictly between the cycle edges in both endpoint lists.
pub fn two_c6() -> PreferenceSystem {
    PreferenceSystem::new([
        (1, vec![2, 7, 6]),
        (2, vec![3, 1]),
        (3, vec![4, 2]),
        (4, vec![5, 3]),
        (5, vec![6, 4]),
        (6, vec![1, 5]),
        (7, vec![8, 1, 12]),
        (8, vec![9, 7]),
        (9, vec![10, 8]),
        (10, vec![11, 9]),
        (11, vec![12, 10]),
        (12, vec![7, 11]),
    ])
    .unwrap()
}

/// A cycle over `verts` where each vertex ranks its successor first and its
/// predecessor second.
pub fn cycle_with_cyclic_prefs(verts: &[AgentId]) -> PreferenceSystem {
    let n = verts.len();
    assert!(n >= 3);
    let prefs = (0..n).map(|i| {
        let succ = verts[(i + 1) % n];
        let pred = verts[(i + n - 1) % n];
        (verts[i], vec![succ, pred])
    });
    PreferenceSystem::new(prefs).unwrap()
}

/// Random preference system: an Erdos-Renyi graph on `ids` with edge
/// probability `density` (as percent, 0..=100) and uniformly shuffled lists.
pub fn random_system<R: rand::Rng>(rng: &mut R, ids: &[AgentId], density_pct: u32) -> PreferenceSystem {
    use rand::seq::SliceRandom;
    let mut adj: std::collections::BTreeMap<AgentId, Vec<AgentId>> =
        ids.iter().map(|&v| (v, Vec::new())).collect();
    for (i, &u) in ids.iter().enumerate() {
        for &v in &ids[i + 1..] {
            if rng.gen_range(0..100) < density_pct {
                adj.get_mut(&u).unwrap().push(v);
                adj.get_mut(&v).unwrap().push(u);
            }
        }
    }
    for list in adj.values_mut() {
        list.shuffle(rng);
    }
    PreferenceSystem::new(adj).unwrap()
}

/// Random instance already in perfect-core form (a stable matching exists and
/// all stable matchings are perfect), or `None` if the draw yields no stable
/// matching or an empty core.
pub fn random_perfect_core<R: rand::Rng>(
    rng: &mut R,
    max_agents: usize,
) -> Option<PreferenceSystem> {
    let n = rng.gen_range(4..=max_agents);
    let ids: Vec<AgentId> = (1..=n as AgentId).collect();
    let density = rng.gen_range(35..85);
    let ps = random_system(rng, &ids, density);
    crate::irving::find_stable_matching(&ps)?;
    let core = crate::irving::perfect_core(&ps).ok()?;
    if core.num_agents() == 0 {
        return None;
    }
    Some(core)
}

/// Random union of even cyclic-preference cycles plus sandwiched chords
/// between them.  Useful as a seed for cycle-form corpora; the result is a
/// valid instance but callers must still filter for the wanted structure.
pub fn random_cycle_union<R: rand::Rng>(rng: &mut R, max_agents: usize) -> PreferenceSystem {
    let mut sizes = Vec::new();
    let mut total = 0usize;
    while total + 4 <= max_agents {
        let s = 2 * rng.gen_range(2..=(max_agents - total) / 2);
        sizes.push(s);
        total += s;
        if rng.gen_bool(0.4) {
            break;
        }
    }
    let mut prefs: std::collections::BTreeMap<AgentId, Vec<AgentId>> = Default::default();
    let mut start = 1u32;
    let mut cycles: Vec<Vec<AgentId>> = Vec::new();
    for &s in &sizes {
        let verts: Vec<AgentId> = (start..start + s as u32).collect();
        for (i, &v) in verts.iter().enumerate() {
            let succ = verts[(i + 1) % s];
            let pred = verts[(i + s - 1) % s];
            prefs.insert(v, vec![succ, pred]);
        }
        cycles.push(verts);
        start += s as u32;
    }
    // A few chords between different cycles, placed second in both lists so
    // they sit strictly between the two cycle edges.
    if cycles.len() >= 2 {
        let chords = rng.gen_range(0..=2);
        let mut used: BTreeSet<AgentId> = BTreeSet::new();
        for _ in 0..chords {
            let ci = rng.gen_range(0..cycles.len());
            let cj = rng.gen_range(0..cycles.len());
            if ci == cj {
                continue;
            }
            let u = cycles[ci][rng.gen_range(0..cycles[ci].len())];
            let v = cycles[cj][rng.gen_range(0..cycles[cj].len())];
            if !used.insert(u) || !used.insert(v) {
                continue;
            }
            prefs.get_mut(&u).unwrap().insert(1, v);
            prefs.get_mut(&v).unwrap().insert(1, u);
        }
    }
    PreferenceSystem::new(prefs).unwrap()
}
