//! Degeneralization of the TGBA into a state-based Büchi automaton.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::tableau::Tgba;
use crate::graph::tarjan_scc;

#[derive(Clone, Debug)]
pub(crate) struct NbaEdge {
    pub pos: u32,
    pub neg: u32,
    pub dst: usize,
}

impl NbaEdge {
    pub fn enabled(&self, letter: u32) -> bool {
        letter & self.pos == self.pos && letter & self.neg == 0
    }
}

/// Büchi automaton with a single initial state 0 (when nonempty).
#[derive(Debug)]
pub(crate) struct Nba {
    pub edges: Vec<Vec<NbaEdge>>,
    pub accepting: Vec<bool>,
}

impl Nba {
    pub fn len(&self) -> usize {
        self.edges.len()
    }
}

/// Counter construction: level `k` (the number of acceptance sets) marks an
/// accepting state; from there counting restarts at 0.
pub(crate) fn degeneralize(tgba: &Tgba, budget: usize) -> Result<Nba, usize> {
    let k = tgba.eventualities.len();
    let mut ids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut states = vec![(0usize, 0usize)];
    ids.insert((0, 0), 0);
    let mut edges = Vec::new();
    let mut cursor = 0;
    while cursor < states.len() {
        let (s, level) = states[cursor];
        let start = if level == k { 0 } else { level };
        let mut out = Vec::new();
        for e in &tgba.edges[s] {
            let mut j = start;
            while j < k && e.accepting.contains(j) {
                j += 1;
            }
            let key = (e.dst, j);
            let dst = match ids.get(&key) {
                Some(&d) => d,
                None => {
                    let d = states.len();
                    if d >= budget {
                        return Err(d + 1);
                    }
                    ids.insert(key, d);
                    states.push(key);
                    d
                }
            };
            out.push(NbaEdge { pos: e.pos, neg: e.neg, dst });
        }
        edges.push(out);
        cursor += 1;
    }
    let accepting = states.iter().map(|&(_, level)| level == k).collect();
    Ok(prune(Nba { edges, accepting }))
}

/// Keeps only states from which an accepting cycle is reachable. The initial
/// state stays at index 0 if it survives; an empty result accepts nothing.
fn prune(nba: Nba) -> Nba {
    let n = nba.len();
    let (comp, count) = tarjan_scc(n, |_| true, |v| nba.edges[v].iter().map(|e| e.dst).collect::<Vec<_>>());
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); count];
    for v in 0..n {
        members[comp[v].unwrap()].push(v);
    }
    let mut good_comp = vec![false; count];
    for v in 0..n {
        if !nba.accepting[v] {
            continue;
        }
        let c = comp[v].unwrap();
        // nontrivial: more than one member, or a self-loop
        if members[c].len() > 1 || nba.edges[v].iter().any(|e| e.dst == v) {
            good_comp[c] = true;
        }
    }
    // Components come out sinks first, so one pass propagates liveness backwards.
    let mut live = vec![false; n];
    for c in 0..count {
        let alive = good_comp[c]
            || members[c].iter().any(|&v| nba.edges[v].iter().any(|e| live[e.dst]));
        if alive {
            for &v in &members[c] {
                live[v] = true;
            }
        }
    }

    let mut remap = vec![usize::MAX; n];
    let mut next = 0;
    for v in 0..n {
        if live[v] {
            remap[v] = next;
            next += 1;
        }
    }
    let mut edges = Vec::with_capacity(next);
    let mut accepting = Vec::with_capacity(next);
    for v in 0..n {
        if !live[v] {
            continue;
        }
        edges.push(
            nba.edges[v]
                .iter()
                .filter(|e| live[e.dst])
                .map(|e| NbaEdge { pos: e.pos, neg: e.neg, dst: remap[e.dst] })
                .collect(),
        );
        accepting.push(nba.accepting[v]);
    }
    if !live.first().copied().unwrap_or(false) {
        return Nba { edges: Vec::new(), accepting: Vec::new() };
    }
    Nba { edges, accepting }
}
