//! Tableau expansion of NNF formulas into a transition-based generalized
//! Büchi automaton (TGBA).
//!
//! A TGBA state is the set of obligations still to be met. Expanding it yields
//! terms: a conjunction of literals for the current letter, the obligations
//! for the next step, and the eventualities (`U`/`F`) that were postponed.
//! Each eventuality owns one acceptance set containing every transition that
//! does not postpone it.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::nnf::{Arena, Node, NodeId};
use crate::bitset::BitSet;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct Term {
    pub pos: u32,
    pub neg: u32,
    pub next: BitSet,
    pub pending: BitSet,
}

impl Term {
    fn subsumes(&self, other: &Term) -> bool {
        self.pos & !other.pos == 0
            && self.neg & !other.neg == 0
            && self.next.is_subset(&other.next)
            && self.pending.is_subset(&other.pending)
    }
}

#[derive(Clone, Debug)]
pub(crate) struct TgbaEdge {
    pub pos: u32,
    pub neg: u32,
    pub dst: usize,
    /// Indices (into `Tgba::eventualities`) of the acceptance sets this edge belongs to.
    pub accepting: BitSet,
}

#[derive(Debug)]
pub(crate) struct Tgba {
    /// Outgoing edges per state; state 0 is initial.
    pub edges: Vec<Vec<TgbaEdge>>,
    pub eventualities: Vec<NodeId>,
}

struct Partial {
    todo: Vec<NodeId>,
    done: BitSet,
    term: Term,
}

fn expand(arena: &Arena, obligations: &BitSet) -> Vec<Term> {
    let n = arena.len();
    let mut results: Vec<Term> = Vec::new();
    let mut work = vec![Partial {
        todo: obligations.iter().collect(),
        done: BitSet::new(n),
        term: Term { pos: 0, neg: 0, next: BitSet::new(n), pending: BitSet::new(n) },
    }];

    'branch: while let Some(mut p) = work.pop() {
        while let Some(id) = p.todo.pop() {
            if !p.done.insert(id) {
                continue;
            }
            match arena.get(id) {
                Node::True => {}
                Node::False => continue 'branch,
                Node::Lit { prop, positive } => {
                    let bit = 1u32 << prop;
                    if positive {
                        p.term.pos |= bit;
                    } else {
                        p.term.neg |= bit;
                    }
                    if p.term.pos & p.term.neg != 0 {
                        continue 'branch;
                    }
                }
                Node::And(a, b) => {
                    p.todo.push(a);
                    p.todo.push(b);
                }
                Node::Or(a, b) => {
                    let mut alt = Partial { todo: p.todo.clone(), done: p.done.clone(), term: p.term.clone() };
                    alt.todo.push(b);
                    work.push(alt);
                    p.todo.push(a);
                }
                Node::Next(a) => {
                    p.term.next.insert(a);
                }
                Node::Always(a) => {
                    p.todo.push(a);
                    p.term.next.insert(id);
                }
                Node::Eventually(a) => {
                    let mut alt = Partial { todo: p.todo.clone(), done: p.done.clone(), term: p.term.clone() };
                    alt.term.next.insert(id);
                    alt.term.pending.insert(id);
                    work.push(alt);
                    p.todo.push(a);
                }
                Node::Until(a, b) => {
                    let mut alt = Partial { todo: p.todo.clone(), done: p.done.clone(), term: p.term.clone() };
                    alt.todo.push(a);
                    alt.term.next.insert(id);
                    alt.term.pending.insert(id);
                    work.push(alt);
                    p.todo.push(b);
                }
                Node::Release(a, b) => {
                    let mut alt = Partial { todo: p.todo.clone(), done: p.done.clone(), term: p.term.clone() };
                    alt.todo.push(b);
                    alt.term.next.insert(id);
                    work.push(alt);
                    p.todo.push(a);
                    p.todo.push(b);
                }
            }
        }
        results.push(p.term);
    }

    results.sort();
    results.dedup();
    // Drop terms made redundant by a weaker one: a smaller guard, fewer
    // obligations and fewer postponed eventualities accept a superset.
    let keep: Vec<bool> = (0..results.len())
        .map(|i| !(0..results.len()).any(|j| j != i && results[j].subsumes(&results[i]) && (results[j] != results[i])))
        .collect();
    results.into_iter().zip(keep).filter_map(|(t, k)| k.then_some(t)).collect()
}

/// Builds the TGBA for `root`. Fails with the number of states reached once
/// `budget` is exceeded.
pub(crate) fn build(arena: &Arena, root: NodeId, budget: usize) -> Result<Tgba, usize> {
    let n = arena.len();
    let eventualities: Vec<NodeId> = (0..n)
        .filter(|&id| matches!(arena.get(id), Node::Until(..) | Node::Eventually(_)))
        .collect();

    let mut init = BitSet::new(n);
    init.insert(root);
    let mut ids: BTreeMap<BitSet, usize> = BTreeMap::new();
    let mut states: Vec<BitSet> = Vec::new();
    ids.insert(init.clone(), 0);
    states.push(init);

    let mut edges = Vec::new();
    let mut cursor = 0;
    while cursor < states.len() {
        let terms = expand(arena, &states[cursor]);
        let mut out = Vec::with_capacity(terms.len());
        for term in terms {
            let dst = match ids.get(&term.next) {
                Some(&d) => d,
                None => {
                    let d = states.len();
                    if d >= budget {
                        return Err(d + 1);
                    }
                    ids.insert(term.next.clone(), d);
                    states.push(term.next.clone());
                    d
                }
            };
            let mut accepting = BitSet::new(eventualities.len());
            for (k, &ev) in eventualities.iter().enumerate() {
                if !term.pending.contains(ev) {
                    accepting.insert(k);
                }
            }
            out.push(TgbaEdge { pos: term.pos, neg: term.neg, dst, accepting });
        }
        edges.push(out);
        cursor += 1;
    }
    Ok(Tgba { edges, eventualities })
}
