//! Safra's determinization of a Büchi automaton into a Rabin automaton.
//!
//! States are Safra trees: ordered trees whose nodes carry a name, a set of
//! Büchi states, and a mark. For every name `i` the Rabin pair is
//! (trees without node `i`, trees where node `i` is marked).

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::nba::Nba;
use crate::bitset::BitSet;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct SafraNode {
    name: u32,
    marked: bool,
    label: BitSet,
    children: Vec<usize>,
}

/// Canonical form: nodes stored in preorder, root at index 0. An empty
/// `nodes` vector is the rejecting sink.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct SafraTree {
    nodes: Vec<SafraNode>,
}

impl SafraTree {
    fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes.len());
        if self.nodes.is_empty() {
            return out;
        }
        let mut stack = vec![0];
        while let Some(v) = stack.pop() {
            out.push(v);
            stack.extend(self.nodes[v].children.iter().rev());
        }
        out
    }

    fn canonical(&self) -> SafraTree {
        if self.nodes.is_empty() {
            return SafraTree { nodes: Vec::new() };
        }
        let order = self.preorder();
        let mut position = vec![usize::MAX; self.nodes.len()];
        for (i, &v) in order.iter().enumerate() {
            position[v] = i;
        }
        let nodes = order
            .iter()
            .map(|&v| {
                let n = &self.nodes[v];
                SafraNode {
                    name: n.name,
                    marked: n.marked,
                    label: n.label.clone(),
                    children: n.children.iter().map(|&c| position[c]).collect(),
                }
            })
            .collect();
        SafraTree { nodes }
    }

    /// Removes from each node the states owned by an older sibling of it or
    /// of one of its ancestors.
    fn horizontal_merge(&mut self, v: usize, forbidden: &BitSet) {
        self.nodes[v].label.difference_with(forbidden);
        let mut taken = forbidden.clone();
        for i in 0..self.nodes[v].children.len() {
            let c = self.nodes[v].children[i];
            self.horizontal_merge(c, &taken);
            taken.union_with(&self.nodes[c].label);
        }
    }

    fn drop_empty(&mut self, v: usize) {
        let children = core::mem::take(&mut self.nodes[v].children);
        let kept: Vec<usize> = children.into_iter().filter(|&c| !self.nodes[c].label.is_empty()).collect();
        for &c in &kept {
            self.drop_empty(c);
        }
        self.nodes[v].children = kept;
    }

    fn vertical_merge(&mut self, v: usize) {
        if self.nodes[v].children.is_empty() {
            return;
        }
        let mut union = BitSet::new(0);
        for (i, &c) in self.nodes[v].children.iter().enumerate() {
            if i == 0 {
                union = self.nodes[c].label.clone();
            } else {
                union.union_with(&self.nodes[c].label);
            }
        }
        if union == self.nodes[v].label {
            self.nodes[v].children.clear();
            self.nodes[v].marked = true;
            return;
        }
        for i in 0..self.nodes[v].children.len() {
            let c = self.nodes[v].children[i];
            self.vertical_merge(c);
        }
    }
}

pub(crate) struct Determinized {
    /// `transitions[q * letters + letter]`
    pub transitions: Vec<u32>,
    pub state_count: usize,
    /// (fin, inf) membership vectors
    pub pairs: Vec<(Vec<bool>, Vec<bool>)>,
}

struct Stepper<'a> {
    nba: &'a Nba,
    accepting: BitSet,
    /// `post[q][letter]`
    post: Vec<Vec<BitSet>>,
}

impl Stepper<'_> {
    fn step(&self, tree: &SafraTree, letter: usize) -> SafraTree {
        if tree.nodes.is_empty() {
            return SafraTree { nodes: Vec::new() };
        }
        let mut t = tree.clone();
        for node in &mut t.nodes {
            node.marked = false;
        }

        let mut used: Vec<u32> = t.nodes.iter().map(|n| n.name).collect();
        for v in t.preorder() {
            let mut acc = t.nodes[v].label.clone();
            acc.intersect_with(&self.accepting);
            if acc.is_empty() {
                continue;
            }
            let name = (1..).find(|k| !used.contains(k)).unwrap();
            used.push(name);
            let id = t.nodes.len();
            t.nodes.push(SafraNode { name, marked: false, label: acc, children: Vec::new() });
            t.nodes[v].children.push(id);
        }

        for node in &mut t.nodes {
            let mut next = BitSet::new(self.nba.len());
            for q in node.label.iter() {
                next.union_with(&self.post[q][letter]);
            }
            node.label = next;
        }

        t.horizontal_merge(0, &BitSet::new(self.nba.len()));
        if t.nodes[0].label.is_empty() {
            return SafraTree { nodes: Vec::new() };
        }
        t.drop_empty(0);
        t.vertical_merge(0);
        t.canonical()
    }
}

/// Determinizes `nba` over `letters` letters, numbering states breadth-first
/// from the initial tree with letters in increasing order. Fails with the
/// number of states reached once `budget` is exceeded.
pub(crate) fn determinize(nba: &Nba, letters: usize, budget: usize) -> Result<Determinized, usize> {
    let n = nba.len();
    let mut accepting = BitSet::new(n);
    for (q, &a) in nba.accepting.iter().enumerate() {
        if a {
            accepting.insert(q);
        }
    }
    let post: Vec<Vec<BitSet>> = (0..n)
        .map(|q| {
            (0..letters)
                .map(|letter| {
                    let mut s = BitSet::new(n);
                    for e in &nba.edges[q] {
                        if e.enabled(letter as u32) {
                            s.insert(e.dst);
                        }
                    }
                    s
                })
                .collect()
        })
        .collect();
    let stepper = Stepper { nba, accepting, post };

    let initial = if n == 0 {
        SafraTree { nodes: Vec::new() }
    } else {
        let mut label = BitSet::new(n);
        label.insert(0);
        SafraTree { nodes: vec![SafraNode { name: 1, marked: false, label, children: Vec::new() }] }
    };

    let mut ids: BTreeMap<SafraTree, u32> = BTreeMap::new();
    let mut trees = vec![initial.clone()];
    ids.insert(initial, 0);
    let mut transitions = Vec::new();
    let mut cursor = 0;
    while cursor < trees.len() {
        for letter in 0..letters {
            let next = stepper.step(&trees[cursor], letter);
            let id = match ids.get(&next) {
                Some(&id) => id,
                None => {
                    let id = trees.len();
                    if id >= budget {
                        return Err(id + 1);
                    }
                    ids.insert(next.clone(), id as u32);
                    trees.push(next);
                    id as u32
                }
            };
            transitions.push(id);
        }
        cursor += 1;
    }

    let max_name = trees.iter().flat_map(|t| t.nodes.iter().map(|n| n.name)).max().unwrap_or(0);
    let mut pairs = Vec::new();
    for name in 1..=max_name {
        let fin: Vec<bool> = trees.iter().map(|t| !t.nodes.iter().any(|n| n.name == name)).collect();
        let inf: Vec<bool> = trees.iter().map(|t| t.nodes.iter().any(|n| n.name == name && n.marked)).collect();
        if inf.iter().any(|&b| b) {
            pairs.push((fin, inf));
        }
    }
    Ok(Determinized { transitions, state_count: trees.len(), pairs })
}
