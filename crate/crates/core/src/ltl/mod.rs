//! Linear temporal logic formulas.
//!
//! [`Formula`] is an immutable syntax tree over named atomic propositions. Its
//! canonical text form (the [`Display`](core::fmt::Display) impl) is fully
//! parenthesized and parses back to the same tree, which makes it usable as a
//! cache key and as the on-disk representation in reports.

mod alphabet;
mod lasso;
mod parse;

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub use alphabet::{Alphabet, AlphabetError, Valuation, MAX_PROPOSITIONS};
pub use lasso::{eval_lasso, LassoWord};
pub use parse::{parse, ParseError, ParseErrorKind};

/// An LTL formula.
///
/// `Always` and `Eventually` are the `G` and `F` operators; `Next` is `X`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Prop(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Always(Box<Formula>),
    Eventually(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn prop(name: impl Into<String>) -> Self {
        Formula::Prop(name.into())
    }

    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(l: Formula, r: Formula) -> Self {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Self {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn implies(l: Formula, r: Formula) -> Self {
        Formula::Implies(Box::new(l), Box::new(r))
    }

    pub fn next(f: Formula) -> Self {
        Formula::Next(Box::new(f))
    }

    pub fn always(f: Formula) -> Self {
        Formula::Always(Box::new(f))
    }

    pub fn eventually(f: Formula) -> Self {
        Formula::Eventually(Box::new(f))
    }

    pub fn until(l: Formula, r: Formula) -> Self {
        Formula::Until(Box::new(l), Box::new(r))
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Formula::True | Formula::False | Formula::Prop(_))
    }

    /// Direct subformulas, left to right.
    pub fn children(&self) -> Children<'_> {
        match self {
            Formula::True | Formula::False | Formula::Prop(_) => Children::Zero,
            Formula::Not(a) | Formula::Next(a) | Formula::Always(a) | Formula::Eventually(a) => {
                Children::One(a)
            }
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Until(a, b) => Children::Two(a, b),
        }
    }

    fn children_mut(&mut self) -> ChildrenMut<'_> {
        match self {
            Formula::True | Formula::False | Formula::Prop(_) => ChildrenMut::Zero,
            Formula::Not(a) | Formula::Next(a) | Formula::Always(a) | Formula::Eventually(a) => {
                ChildrenMut::One(a)
            }
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Until(a, b) => ChildrenMut::Two(a, b),
        }
    }

    /// Number of nodes in the parse tree. Leaves count one each.
    pub fn complexity(&self) -> usize {
        1 + match self.children() {
            Children::Zero => 0,
            Children::One(a) => a.complexity(),
            Children::Two(a, b) => a.complexity() + b.complexity(),
        }
    }

    /// Height of the parse tree; a leaf has depth 1.
    pub fn depth(&self) -> usize {
        1 + match self.children() {
            Children::Zero => 0,
            Children::One(a) => a.depth(),
            Children::Two(a, b) => a.depth().max(b.depth()),
        }
    }

    /// Proposition names occurring in the formula, sorted and deduplicated.
    pub fn propositions(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_props(&mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    fn collect_props<'a>(&'a self, out: &mut Vec<&'a str>) {
        if let Formula::Prop(name) = self {
            out.push(name);
        }
        match self.children() {
            Children::Zero => {}
            Children::One(a) => a.collect_props(out),
            Children::Two(a, b) => {
                a.collect_props(out);
                b.collect_props(out);
            }
        }
    }

    /// Subtree at preorder position `index` (the root is 0).
    pub fn subterm(&self, index: usize) -> Option<&Formula> {
        let mut remaining = index;
        self.subterm_inner(&mut remaining)
    }

    fn subterm_inner(&self, remaining: &mut usize) -> Option<&Formula> {
        if *remaining == 0 {
            return Some(self);
        }
        *remaining -= 1;
        match self.children() {
            Children::Zero => None,
            Children::One(a) => a.subterm_inner(remaining),
            Children::Two(a, b) => a
                .subterm_inner(remaining)
                .or_else(|| b.subterm_inner(remaining)),
        }
    }

    /// Depth of the node at preorder position `index` (the root sits at depth 1).
    pub fn subterm_level(&self, index: usize) -> Option<usize> {
        fn walk(f: &Formula, remaining: &mut usize, level: usize) -> Option<usize> {
            if *remaining == 0 {
                return Some(level);
            }
            *remaining -= 1;
            match f.children() {
                Children::Zero => None,
                Children::One(a) => walk(a, remaining, level + 1),
                Children::Two(a, b) => {
                    walk(a, remaining, level + 1).or_else(|| walk(b, remaining, level + 1))
                }
            }
        }
        let mut remaining = index;
        walk(self, &mut remaining, 1)
    }

    /// Replaces the subtree at preorder position `index`, returning the old one.
    pub fn replace_subterm(&mut self, index: usize, replacement: Formula) -> Option<Formula> {
        let mut remaining = index;
        let slot = self.subterm_mut_inner(&mut remaining)?;
        Some(core::mem::replace(slot, replacement))
    }

    fn subterm_mut_inner(&mut self, remaining: &mut usize) -> Option<&mut Formula> {
        if *remaining == 0 {
            return Some(self);
        }
        *remaining -= 1;
        match self.children_mut() {
            ChildrenMut::Zero => None,
            ChildrenMut::One(a) => a.subterm_mut_inner(remaining),
            ChildrenMut::Two(a, b) => {
                let size = a.complexity();
                if *remaining < size {
                    a.subterm_mut_inner(remaining)
                } else {
                    *remaining -= size;
                    b.subterm_mut_inner(remaining)
                }
            }
        }
    }
}

/// Borrowed view of a node's operands.
#[derive(Clone, Copy, Debug)]
pub enum Children<'a> {
    Zero,
    One(&'a Formula),
    Two(&'a Formula, &'a Formula),
}

enum ChildrenMut<'a> {
    Zero,
    One(&'a mut Formula),
    Two(&'a mut Formula, &'a mut Formula),
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Prop(name) => f.write_str(name),
            Formula::Not(a) => write!(f, "! ({a})"),
            Formula::Next(a) => write!(f, "X ({a})"),
            Formula::Always(a) => write!(f, "G ({a})"),
            Formula::Eventually(a) => write!(f, "F ({a})"),
            Formula::And(a, b) => write!(f, "({a}) & ({b})"),
            Formula::Or(a, b) => write!(f, "({a}) | ({b})"),
            Formula::Implies(a, b) => write!(f, "({a}) -> ({b})"),
            Formula::Until(a, b) => write!(f, "({a}) U ({b})"),
        }
    }
}

impl core::str::FromStr for Formula {
    type Err = ParseError;

    /// Parses without an alphabet check; every identifier becomes a proposition.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse::parse_unchecked(s)
    }
}
