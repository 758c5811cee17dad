//! The skip-augmented product of an MDP with a Rabin automaton.
//!
//! Product states pair an MDP state (or the pre-initial state) with an
//! automaton state. Each underlying action comes in two flavors: `keep`
//! advances the automaton on the label of the successor, `susp` leaves it
//! where it is at a unit (discounted) cost.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::automata::Dra;
use crate::graph::tarjan_scc;
use crate::mdp::{ActionId, Mdp, StateId};

/// Id of the pre-initial product state `(s_-1, q0)`.
pub const PRE_INITIAL: usize = 0;

const ABSENT: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DraAction {
    Keep,
    Susp,
}

/// A product action: an underlying action (`None` for the pre-initial move)
/// paired with an automaton action.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProductAction {
    pub action: Option<ActionId>,
    pub dra: DraAction,
}

/// One MDP successor of a product choice, with both automaton outcomes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProductSuccessor {
    pub probability: f64,
    /// Product state reached under `keep`.
    pub keep: usize,
    /// Product state reached under `susp`.
    pub susp: usize,
}

impl ProductSuccessor {
    pub fn target(&self, dra: DraAction) -> usize {
        match dra {
            DraAction::Keep => self.keep,
            DraAction::Susp => self.susp,
        }
    }
}

/// An underlying action available in a product state.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductChoice {
    /// `None` for the pre-initial action.
    pub action: Option<ActionId>,
    pub successors: Vec<ProductSuccessor>,
}

/// The reachable part of the product, with dense ids in breadth-first order
/// from [`PRE_INITIAL`].
#[derive(Clone, Debug)]
pub struct ProductMdp<'a> {
    mdp: &'a Mdp,
    dra: &'a Dra,
    gamma: f64,
    states: Vec<(Option<StateId>, usize)>,
    choices: Vec<Vec<ProductChoice>>,
    /// `(mdp slot, q) -> id`, slot 0 being the pre-initial state.
    index: Vec<u32>,
}

pub fn build_product<'a>(mdp: &'a Mdp, dra: &'a Dra, gamma: f64) -> ProductMdp<'a> {
    assert!(gamma > 0.0 && gamma < 1.0, "discount must lie in (0, 1)");
    let nq = dra.state_count();
    let mut p = ProductMdp {
        mdp,
        dra,
        gamma,
        states: Vec::new(),
        choices: Vec::new(),
        index: vec![ABSENT; (mdp.state_count() + 1) * nq],
    };
    let mut queue = VecDeque::new();
    queue.push_back(p.intern(None, dra.initial()));
    let label_steps: Vec<Vec<usize>> = (0..mdp.state_count())
        .map(|s| (0..nq).map(|q| dra.step(q, mdp.label(s))).collect())
        .collect();
    while let Some(id) = queue.pop_front() {
        let (s, q) = p.states[id];
        let mut out = Vec::new();
        let add = |p: &mut ProductMdp<'a>, queue: &mut VecDeque<usize>, action, succ: &[(StateId, f64)]| {
            let mut successors = Vec::with_capacity(succ.len());
            for &(t, probability) in succ {
                let before = p.states.len();
                let keep = p.intern(Some(t), label_steps[t][q]);
                if p.states.len() > before {
                    queue.push_back(keep);
                }
                let before = p.states.len();
                let susp = p.intern(Some(t), q);
                if p.states.len() > before {
                    queue.push_back(susp);
                }
                successors.push(ProductSuccessor { probability, keep, susp });
            }
            ProductChoice { action, successors }
        };
        match s {
            None => out.push(add(&mut p, &mut queue, None, &[(mdp.initial(), 1.0)])),
            Some(s) => {
                for c in mdp.choices(s) {
                    out.push(add(&mut p, &mut queue, Some(c.action), &c.successors));
                }
            }
        }
        p.choices[id] = out;
    }
    p
}

impl<'a> ProductMdp<'a> {
    fn slot(&self, s: Option<StateId>, q: usize) -> usize {
        s.map_or(0, |s| s + 1) * self.dra.state_count() + q
    }

    fn intern(&mut self, s: Option<StateId>, q: usize) -> usize {
        let slot = self.slot(s, q);
        if self.index[slot] == ABSENT {
            self.index[slot] = self.states.len() as u32;
            self.states.push((s, q));
            self.choices.push(Vec::new());
        }
        self.index[slot] as usize
    }

    pub fn mdp(&self) -> &'a Mdp {
        self.mdp
    }

    pub fn dra(&self) -> &'a Dra {
        self.dra
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `1 / (1 - γ)`, the largest possible violation cost.
    pub fn max_cost(&self) -> f64 {
        1.0 / (1.0 - self.gamma)
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    /// `(MDP state, automaton state)`; the MDP part is `None` for the pre-initial state.
    pub fn state(&self, id: usize) -> (Option<StateId>, usize) {
        self.states[id]
    }

    /// Id of a reachable product state.
    pub fn id(&self, s: Option<StateId>, q: usize) -> Option<usize> {
        if q >= self.dra.state_count() || s.is_some_and(|s| s >= self.mdp.state_count()) {
            return None;
        }
        match self.index[self.slot(s, q)] {
            ABSENT => None,
            i => Some(i as usize),
        }
    }

    pub fn choices(&self, id: usize) -> &[ProductChoice] {
        &self.choices[id]
    }

    /// Every product action available in `id`, keep before susp per underlying action.
    pub fn actions(&self, id: usize) -> impl Iterator<Item = ProductAction> + '_ {
        self.choices[id].iter().flat_map(|c| {
            [DraAction::Keep, DraAction::Susp].map(|dra| ProductAction { action: c.action, dra })
        })
    }

    /// Positive-probability successors of a product action.
    pub fn successors(&self, id: usize, act: ProductAction) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.choices[id]
            .iter()
            .filter(move |c| c.action == act.action)
            .flat_map(move |c| c.successors.iter().map(move |x| (x.target(act.dra), x.probability)))
    }
}

/// A set of product states with an action restriction under which the set is
/// closed and strongly connected.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EndComponent {
    /// Ascending product-state ids.
    pub states: Vec<usize>,
    /// `actions[i]` is the (sorted, nonempty) restriction at `states[i]`.
    pub actions: Vec<Vec<ProductAction>>,
}

impl EndComponent {
    pub fn contains(&self, id: usize) -> bool {
        self.states.binary_search(&id).is_ok()
    }

    pub fn actions_at(&self, id: usize) -> Option<&[ProductAction]> {
        self.states.binary_search(&id).ok().map(|i| self.actions[i].as_slice())
    }

    /// State set and every action restriction are contained in `other`'s.
    pub fn is_subset_of(&self, other: &EndComponent) -> bool {
        self.states.iter().zip(&self.actions).all(|(&s, acts)| {
            other.actions_at(s).is_some_and(|theirs| acts.iter().all(|a| theirs.contains(a)))
        })
    }
}

/// Maximal end components of the sub-MDP induced by `allowed` states.
pub fn maximal_end_components(p: &ProductMdp<'_>, allowed: &[bool]) -> Vec<EndComponent> {
    let n = p.state_count();
    let mut active = allowed.to_vec();
    let mut acts: Vec<Vec<ProductAction>> = (0..n)
        .map(|v| if active[v] { p.actions(v).collect() } else { Vec::new() })
        .collect();
    let comp = loop {
        let (comp, _) = tarjan_scc(
            n,
            |v| active[v],
            |v| {
                let mut out: Vec<usize> = acts[v].iter().flat_map(|&a| p.successors(v, a).map(|(t, _)| t)).collect();
                out.sort_unstable();
                out.dedup();
                out
            },
        );
        let mut changed = false;
        for v in 0..n {
            if !active[v] {
                continue;
            }
            let before = acts[v].len();
            acts[v].retain(|&a| p.successors(v, a).all(|(t, _)| active[t] && comp[t] == comp[v]));
            changed |= acts[v].len() != before;
            if acts[v].is_empty() {
                active[v] = false;
                changed = true;
            }
        }
        if !changed {
            break comp;
        }
    };
    let mut groups: Vec<Option<usize>> = Vec::new();
    let mut out: Vec<EndComponent> = Vec::new();
    for v in 0..n {
        if !active[v] {
            continue;
        }
        let c = comp[v].expect("active states have a component");
        if groups.len() <= c {
            groups.resize(c + 1, None);
        }
        let slot = *groups[c].get_or_insert_with(|| {
            out.push(EndComponent { states: Vec::new(), actions: Vec::new() });
            out.len() - 1
        });
        let mut a = core::mem::take(&mut acts[v]);
        a.sort_unstable();
        out[slot].states.push(v);
        out[slot].actions.push(a);
    }
    out
}

/// Accepting maximal end components: for each Rabin pair, the maximal end
/// components avoiding its Fin states that touch one of its Inf states.
/// Components subsumed by a component found for another pair are dropped.
pub fn compute_amecs(p: &ProductMdp<'_>) -> Vec<EndComponent> {
    let dra = p.dra();
    let mut found: Vec<EndComponent> = Vec::new();
    for pair in dra.pairs() {
        let allowed: Vec<bool> = (0..p.state_count()).map(|v| !pair.is_fin(p.state(v).1)).collect();
        for ec in maximal_end_components(p, &allowed) {
            if ec.states.iter().any(|&v| pair.is_inf(p.state(v).1)) {
                found.push(ec);
            }
        }
    }
    found.sort();
    found.dedup();
    let keep: Vec<bool> = (0..found.len())
        .map(|i| !(0..found.len()).any(|j| i != j && found[i].is_subset_of(&found[j])))
        .collect();
    found.into_iter().zip(keep).filter(|(_, k)| *k).map(|(ec, _)| ec).collect()
}

/// Product states inside an accepting end component, and those that can never reach one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateClassification {
    good: Vec<bool>,
    bad: Vec<bool>,
}

impl StateClassification {
    pub fn is_good(&self, id: usize) -> bool {
        self.good[id]
    }

    pub fn is_bad(&self, id: usize) -> bool {
        self.bad[id]
    }

    pub fn good_states(&self) -> impl Iterator<Item = usize> + '_ {
        self.good.iter().enumerate().filter(|(_, &g)| g).map(|(i, _)| i)
    }

    pub fn bad_states(&self) -> impl Iterator<Item = usize> + '_ {
        self.bad.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }
}

pub fn classify_states(p: &ProductMdp<'_>, amecs: &[EndComponent]) -> StateClassification {
    let n = p.state_count();
    let mut good = vec![false; n];
    for ec in amecs {
        for &v in &ec.states {
            good[v] = true;
        }
    }
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for v in 0..n {
        for c in p.choices(v) {
            for x in &c.successors {
                preds[x.keep].push(v);
                preds[x.susp].push(v);
            }
        }
    }
    let mut reaches = good.clone();
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| good[v]).collect();
    while let Some(v) = queue.pop_front() {
        for &u in &preds[v] {
            if !reaches[u] {
                reaches[u] = true;
                queue.push_back(u);
            }
        }
    }
    StateClassification { good, bad: reaches.into_iter().map(|r| !r).collect() }
}
