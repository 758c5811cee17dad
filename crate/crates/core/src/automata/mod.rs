//! Deterministic Rabin automata for LTL formulas.
//!
//! [`compile`] runs the classic route: negation normal form, tableau expansion
//! into a generalized Büchi automaton, degeneralization, pruning of states
//! that cannot reach an accepting cycle, and Safra's determinization.
//!
//! Internally an automaton only reads the propositions its formula mentions;
//! [`Dra::step`] projects full valuations onto them, so the automaton behaves
//! as a total function over every valuation of the host alphabet.

mod nba;
mod nnf;
mod safra;
mod tableau;

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::ltl::{Alphabet, Formula, LassoWord, Valuation};

/// Default cap on the number of automaton states.
pub const DEFAULT_STATE_BUDGET: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CompileError {
    UnknownProposition(String),
    /// The construction needed more states than allowed.
    StateBudgetExceeded { budget: usize },
}

impl fmt::Display for CompileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompileError::UnknownProposition(p) => write!(f, "proposition `{p}` is not in the alphabet"),
            CompileError::StateBudgetExceeded { budget } => {
                write!(f, "automaton construction exceeded the budget of {budget} states")
            }
        }
    }
}

impl core::error::Error for CompileError {}

/// One Rabin pair: a run is accepting under it when it visits `fin` states
/// finitely often and `inf` states infinitely often.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AcceptancePair {
    fin: Vec<bool>,
    inf: Vec<bool>,
}

impl AcceptancePair {
    pub fn new(fin: Vec<bool>, inf: Vec<bool>) -> Self {
        assert_eq!(fin.len(), inf.len());
        AcceptancePair { fin, inf }
    }

    pub fn is_fin(&self, q: usize) -> bool {
        self.fin[q]
    }

    pub fn is_inf(&self, q: usize) -> bool {
        self.inf[q]
    }

    pub fn fin_states(&self) -> impl Iterator<Item = usize> + '_ {
        self.fin.iter().enumerate().filter(|(_, &b)| b).map(|(q, _)| q)
    }

    pub fn inf_states(&self) -> impl Iterator<Item = usize> + '_ {
        self.inf.iter().enumerate().filter(|(_, &b)| b).map(|(q, _)| q)
    }
}

/// A deterministic Rabin automaton. State 0 is initial.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dra {
    /// Host-alphabet bit read by each local letter bit, ascending.
    props: Vec<usize>,
    state_count: usize,
    transitions: Vec<u32>,
    pairs: Vec<AcceptancePair>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DraError {
    WrongTableSize { expected: usize, found: usize },
    TargetOutOfRange { target: u32 },
    PairSize,
    NoStates,
}

impl fmt::Display for DraError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DraError::WrongTableSize { expected, found } => {
                write!(f, "transition table has {found} entries, expected {expected}")
            }
            DraError::TargetOutOfRange { target } => write!(f, "transition target {target} is not a state"),
            DraError::PairSize => f.write_str("acceptance pair does not cover every state"),
            DraError::NoStates => f.write_str("automaton has no states"),
        }
    }
}

impl core::error::Error for DraError {}

impl Dra {
    /// Assembles an automaton from an explicit table indexed by
    /// `state * 2^props.len() + local letter`.
    pub fn from_parts(
        props: Vec<usize>,
        state_count: usize,
        transitions: Vec<u32>,
        pairs: Vec<AcceptancePair>,
    ) -> Result<Self, DraError> {
        if state_count == 0 {
            return Err(DraError::NoStates);
        }
        let expected = state_count << props.len();
        if transitions.len() != expected {
            return Err(DraError::WrongTableSize { expected, found: transitions.len() });
        }
        if let Some(&target) = transitions.iter().find(|&&t| t as usize >= state_count) {
            return Err(DraError::TargetOutOfRange { target });
        }
        if pairs.iter().any(|p| p.fin.len() != state_count) {
            return Err(DraError::PairSize);
        }
        Ok(Dra { props, state_count, transitions, pairs })
    }

    pub fn state_count(&self) -> usize {
        self.state_count
    }

    pub fn initial(&self) -> usize {
        0
    }

    pub fn pairs(&self) -> &[AcceptancePair] {
        &self.pairs
    }

    /// Host-alphabet propositions this automaton reads.
    pub fn propositions(&self) -> &[usize] {
        &self.props
    }

    /// Number of distinct letters over [`Dra::propositions`].
    pub fn local_letters(&self) -> usize {
        1 << self.props.len()
    }

    pub fn local_letter(&self, v: Valuation) -> usize {
        self.props
            .iter()
            .enumerate()
            .fold(0, |acc, (bit, &host)| if v.contains(host) { acc | (1 << bit) } else { acc })
    }

    /// The valuation setting exactly the host propositions of a local letter.
    pub fn letter_valuation(&self, letter: usize) -> Valuation {
        self.props
            .iter()
            .enumerate()
            .filter(|(bit, _)| letter & (1 << bit) != 0)
            .fold(Valuation::EMPTY, |v, (_, &host)| v.with(host))
    }

    pub fn step_letter(&self, q: usize, letter: usize) -> usize {
        self.transitions[(q << self.props.len()) + letter] as usize
    }

    /// The transition function.
    pub fn step(&self, q: usize, v: Valuation) -> usize {
        self.step_letter(q, self.local_letter(v))
    }

    /// Whether no infinite word is accepted: no reachable cycle avoids a pair's
    /// `Fin` states while passing through one of its `Inf` states.
    pub fn accepts_nothing(&self) -> bool {
        let letters = self.local_letters();
        let successors = |q: usize| (0..letters).map(move |l| self.step_letter(q, l));
        let mut reachable = alloc::vec![false; self.state_count];
        let mut stack = alloc::vec![self.initial()];
        reachable[self.initial()] = true;
        while let Some(q) = stack.pop() {
            for t in successors(q) {
                if !reachable[t] {
                    reachable[t] = true;
                    stack.push(t);
                }
            }
        }
        let on_cycle = |pair: &AcceptancePair, start: usize| {
            let mut seen = alloc::vec![false; self.state_count];
            let mut stack = alloc::vec![start];
            while let Some(q) = stack.pop() {
                for t in successors(q) {
                    if t == start {
                        return true;
                    }
                    if !seen[t] && !pair.fin[t] {
                        seen[t] = true;
                        stack.push(t);
                    }
                }
            }
            false
        };
        !self.pairs.iter().any(|pair| {
            (0..self.state_count).any(|q| reachable[q] && pair.inf[q] && !pair.fin[q] && on_cycle(pair, q))
        })
    }

    /// Whether the run on `word` satisfies some acceptance pair.
    pub fn accepts_lasso(&self, word: &LassoWord) -> bool {
        let mut q = self.initial();
        for &v in &word.prefix {
            q = self.step(q, v);
        }
        // Walk whole cycles until the state at the start of a cycle repeats.
        let mut starts: Vec<usize> = Vec::new();
        let mut visited: Vec<Vec<usize>> = Vec::new();
        let first_repeat = loop {
            if let Some(i) = starts.iter().position(|&s| s == q) {
                break i;
            }
            starts.push(q);
            let mut seen = Vec::with_capacity(word.cycle.len());
            for &v in &word.cycle {
                seen.push(q);
                q = self.step(q, v);
            }
            visited.push(seen);
        };
        let mut recurring = alloc::vec![false; self.state_count];
        for seen in &visited[first_repeat..] {
            for &s in seen {
                recurring[s] = true;
            }
        }
        self.pairs.iter().any(|p| {
            (0..self.state_count).all(|s| !(recurring[s] && p.fin[s]))
                && (0..self.state_count).any(|s| recurring[s] && p.inf[s])
        })
    }
}

/// Compiles `f` with the default state budget.
pub fn compile(f: &Formula, alphabet: &Alphabet) -> Result<Dra, CompileError> {
    compile_with_budget(f, alphabet, DEFAULT_STATE_BUDGET)
}

/// Compiles `f`; every intermediate automaton is held to `budget` states too.
pub fn compile_with_budget(f: &Formula, alphabet: &Alphabet, budget: usize) -> Result<Dra, CompileError> {
    let mut props: Vec<usize> = Vec::new();
    for name in f.propositions() {
        let i = alphabet.index_of(name).ok_or_else(|| CompileError::UnknownProposition(name.to_string()))?;
        props.push(i);
    }
    props.sort_unstable();
    let local = |name: &str| -> u8 {
        let host = alphabet.index_of(name).expect("checked above");
        props.iter().position(|&p| p == host).expect("checked above") as u8
    };

    let exceeded = |_| CompileError::StateBudgetExceeded { budget };
    let mut arena = nnf::Arena::default();
    let root = arena.lower(f, false, &local);
    let tgba = tableau::build(&arena, root, budget).map_err(exceeded)?;
    let nba = nba::degeneralize(&tgba, budget).map_err(exceeded)?;
    let det = safra::determinize(&nba, 1 << props.len(), budget).map_err(exceeded)?;
    let pairs = det.pairs.into_iter().map(|(fin, inf)| AcceptancePair { fin, inf }).collect();
    Ok(Dra { props, state_count: det.state_count, transitions: det.transitions, pairs })
}

/// Memo table from canonical formula text to compiled automata.
#[derive(Debug, Default)]
pub struct CompileCache {
    entries: BTreeMap<String, Result<Arc<Dra>, CompileError>>,
}

impl CompileCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get_or_compile(&mut self, f: &Formula, alphabet: &Alphabet, budget: usize) -> Result<Arc<Dra>, CompileError> {
        self.entries
            .entry(f.to_string())
            .or_insert_with(|| compile_with_budget(f, alphabet, budget).map(Arc::new))
            .clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::{eval_lasso, parse};
    use alloc::vec;

    fn ab() -> Alphabet {
        Alphabet::new(["p", "q", "r"]).unwrap()
    }

    fn dra(text: &str) -> Dra {
        compile(&parse(text, &ab()).unwrap(), &ab()).unwrap()
    }

    fn word(prefix: &[u32], cycle: &[u32]) -> LassoWord {
        LassoWord::new(prefix.iter().map(|&b| Valuation(b)).collect(), cycle.iter().map(|&b| Valuation(b)).collect())
            .unwrap()
    }

    #[test]
    fn false_accepts_nothing() {
        let d = dra("false");
        assert_eq!(d.state_count(), 1);
        for v in 0..8 {
            assert_eq!(d.step(0, Valuation(v)), 0);
        }
        assert!(!d.accepts_lasso(&word(&[], &[0])));
        assert!(!d.accepts_lasso(&word(&[1, 2], &[7])));
    }

    #[test]
    fn emptiness() {
        assert!(dra("false").accepts_nothing());
        assert!(dra("G (p & !p)").accepts_nothing());
        assert!(dra("F (q U false)").accepts_nothing());
        assert!(!dra("G p").accepts_nothing());
        assert!(!dra("G F p & F G !p | true").accepts_nothing());
    }

    #[test]
    fn always_p_structure() {
        let d = dra("G p");
        let p = Valuation(0b001);
        let live = d.step(d.initial(), p);
        assert_eq!(d.step(live, p), live);
        let sink = d.step(live, Valuation::EMPTY);
        assert_ne!(sink, live);
        assert_eq!(d.step(sink, p), sink);
        assert_eq!(d.step(sink, Valuation::EMPTY), sink);
        // other propositions are ignored
        assert_eq!(d.step(live, Valuation(0b111)), live);
        assert!(d.state_count() >= 2);
        assert!(d.accepts_lasso(&word(&[], &[1])));
        assert!(!d.accepts_lasso(&word(&[0], &[1])));
    }

    #[test]
    fn unknown_proposition() {
        let f: Formula = "G z".parse().unwrap();
        assert_eq!(compile(&f, &ab()), Err(CompileError::UnknownProposition("z".into())));
    }

    #[test]
    fn budget_is_enforced() {
        let f = parse("G F p & G F q & F G r", &ab()).unwrap();
        assert_eq!(compile_with_budget(&f, &ab(), 2), Err(CompileError::StateBudgetExceeded { budget: 2 }));
    }

    #[test]
    fn recurrence_and_persistence() {
        for (text, cases) in [
            ("G F p", vec![(word(&[], &[0, 1]), true), (word(&[1, 1], &[0]), false)]),
            ("F G p", vec![(word(&[0, 0], &[1]), true), (word(&[1], &[1, 0]), false)]),
            ("G (p -> F q)", vec![(word(&[1], &[0, 2]), true), (word(&[1], &[0]), false), (word(&[], &[0]), true)]),
            ("(p U q) & G F r", vec![(word(&[1, 2], &[4]), true), (word(&[1, 0], &[6]), false)]),
        ] {
            let d = dra(text);
            let f = parse(text, &ab()).unwrap();
            for (w, expected) in cases {
                assert_eq!(eval_lasso(&f, &w, &ab()), expected, "oracle {text} on {w:?}");
                assert_eq!(d.accepts_lasso(&w), expected, "{text} on {w:?}");
            }
        }
    }

    #[test]
    fn compilation_is_reproducible() {
        let f = parse("G ((X p) U q) | F G r", &ab()).unwrap();
        assert_eq!(compile(&f, &ab()), compile(&f, &ab()));
    }

    #[test]
    fn cache_returns_same_automaton() {
        let mut cache = CompileCache::new();
        let f = parse("G p", &ab()).unwrap();
        let a = cache.get_or_compile(&f, &ab(), 100).unwrap();
        let b = cache.get_or_compile(&f, &ab(), 100).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(cache.len(), 1);
    }

    #[test]
    fn from_parts_validates() {
        assert_eq!(Dra::from_parts(vec![], 0, vec![], vec![]), Err(DraError::NoStates));
        assert!(matches!(Dra::from_parts(vec![0], 1, vec![0], vec![]), Err(DraError::WrongTableSize { .. })));
        assert!(matches!(Dra::from_parts(vec![], 1, vec![3], vec![]), Err(DraError::TargetOutOfRange { .. })));
        let d = Dra::from_parts(vec![0], 1, vec![0, 0], vec![AcceptancePair::new(vec![false], vec![true])]).unwrap();
        assert!(d.accepts_lasso(&word(&[], &[0])));
    }
}
