use alloc::vec;
use alloc::vec::Vec;

use super::{Alphabet, Children, Formula, Valuation};

/// The ultimately periodic word `prefix · cycle^ω`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LassoWord {
    pub prefix: Vec<Valuation>,
    pub cycle: Vec<Valuation>,
}

impl LassoWord {
    /// Returns `None` when `cycle` is empty.
    pub fn new(prefix: Vec<Valuation>, cycle: Vec<Valuation>) -> Option<Self> {
        if cycle.is_empty() {
            return None;
        }
        Some(LassoWord { prefix, cycle })
    }

    /// Number of distinct positions: every later position repeats one of these.
    pub fn positions(&self) -> usize {
        self.prefix.len() + self.cycle.len()
    }

    pub fn letter(&self, position: usize) -> Valuation {
        if position < self.prefix.len() {
            self.prefix[position]
        } else {
            let k = (position - self.prefix.len()) % self.cycle.len();
            self.cycle[k]
        }
    }

    /// Position following `position` in the folded position space.
    pub fn successor(&self, position: usize) -> usize {
        if position + 1 < self.positions() {
            position + 1
        } else {
            self.prefix.len()
        }
    }
}

/// Decides `prefix · cycle^ω ⊨ f`.
///
/// Each subformula is evaluated at every folded position; `Until`, `Always` and
/// `Eventually` are computed as fixpoints over that finite position space.
/// Propositions missing from `alphabet` are false everywhere.
pub fn eval_lasso(f: &Formula, word: &LassoWord, alphabet: &Alphabet) -> bool {
    assert!(!word.cycle.is_empty(), "lasso word needs a nonempty cycle");
    truth_table(f, word, alphabet)[0]
}

fn truth_table(f: &Formula, w: &LassoWord, ab: &Alphabet) -> Vec<bool> {
    let n = w.positions();
    match (f, f.children()) {
        (Formula::True, _) => vec![true; n],
        (Formula::False, _) => vec![false; n],
        (Formula::Prop(name), _) => match ab.index_of(name) {
            Some(i) => (0..n).map(|p| w.letter(p).contains(i)).collect(),
            None => vec![false; n],
        },
        (Formula::Not(_), Children::One(a)) => truth_table(a, w, ab).into_iter().map(|b| !b).collect(),
        (Formula::Next(_), Children::One(a)) => {
            let t = truth_table(a, w, ab);
            (0..n).map(|p| t[w.successor(p)]).collect()
        }
        (Formula::Always(_), Children::One(a)) => {
            let t = truth_table(a, w, ab);
            fixpoint(w, true, |p, out| t[p] && out[w.successor(p)])
        }
        (Formula::Eventually(_), Children::One(a)) => {
            let t = truth_table(a, w, ab);
            fixpoint(w, false, |p, out| t[p] || out[w.successor(p)])
        }
        (Formula::And(..), Children::Two(a, b)) => zip(truth_table(a, w, ab), truth_table(b, w, ab), |x, y| x && y),
        (Formula::Or(..), Children::Two(a, b)) => zip(truth_table(a, w, ab), truth_table(b, w, ab), |x, y| x || y),
        (Formula::Implies(..), Children::Two(a, b)) => {
            zip(truth_table(a, w, ab), truth_table(b, w, ab), |x, y| !x || y)
        }
        (Formula::Until(..), Children::Two(a, b)) => {
            let ta = truth_table(a, w, ab);
            let tb = truth_table(b, w, ab);
            fixpoint(w, false, |p, out| tb[p] || (ta[p] && out[w.successor(p)]))
        }
        _ => unreachable!("arity mismatch"),
    }
}

fn zip(a: Vec<bool>, b: Vec<bool>, op: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| op(x, y)).collect()
}

/// Iterates `step` from the constant `init` until nothing changes. Starting
/// from `false` yields the least fixpoint, from `true` the greatest.
fn fixpoint(w: &LassoWord, init: bool, step: impl Fn(usize, &[bool]) -> bool) -> Vec<bool> {
    let n = w.positions();
    let mut out = vec![init; n];
    loop {
        let mut changed = false;
        for p in (0..n).rev() {
            let v = step(p, &out);
            if v != out[p] {
                out[p] = v;
                changed = true;
            }
        }
        if !changed {
            return out;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::parse;

    fn ab() -> Alphabet {
        Alphabet::new(["p", "q"]).unwrap()
    }

    fn v(bits: u32) -> Valuation {
        Valuation(bits)
    }

    fn holds(text: &str, prefix: &[u32], cycle: &[u32]) -> bool {
        let a = ab();
        let f = parse(text, &a).unwrap();
        let w = LassoWord::new(prefix.iter().copied().map(v).collect(), cycle.iter().copied().map(v).collect()).unwrap();
        eval_lasso(&f, &w, &a)
    }

    #[test]
    fn always_examples() {
        assert!(holds("G p", &[], &[0b01]));
        assert!(!holds("G p", &[0b00], &[0b01]));
    }

    #[test]
    fn until_example() {
        assert!(holds("p U q", &[0b01, 0b01], &[0b10]));
        assert!(!holds("p U q", &[0b01, 0b00], &[0b10]));
        assert!(!holds("p U q", &[], &[0b01]));
    }

    #[test]
    fn recurrence_needs_cycle() {
        assert!(!holds("G F q", &[0b10, 0b10], &[0b00]));
        assert!(holds("G F q", &[0b00], &[0b00, 0b10]));
        assert!(holds("F G !q", &[0b10, 0b10], &[0b00]));
        assert!(holds("X X q", &[0b00], &[0b00, 0b10]));
        assert!(!holds("X X X q", &[0b00], &[0b00, 0b10]));
    }

    #[test]
    fn empty_cycle_rejected() {
        assert!(LassoWord::new(vec![v(0)], vec![]).is_none());
    }
}
