//! Hash-consed negation normal form.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::ltl::Formula;

pub(crate) type NodeId = usize;

/// NNF node. Literals refer to local proposition indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Node {
    True,
    False,
    Lit { prop: u8, positive: bool },
    And(NodeId, NodeId),
    Or(NodeId, NodeId),
    Next(NodeId),
    Always(NodeId),
    Eventually(NodeId),
    Until(NodeId, NodeId),
    Release(NodeId, NodeId),
}

#[derive(Debug, Default)]
pub(crate) struct Arena {
    nodes: Vec<Node>,
    index: BTreeMap<Node, NodeId>,
}

impl Arena {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn get(&self, id: NodeId) -> Node {
        self.nodes[id]
    }

    fn intern(&mut self, node: Node) -> NodeId {
        if let Some(&id) = self.index.get(&node) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(node);
        self.index.insert(node, id);
        id
    }

    fn and(&mut self, a: NodeId, b: NodeId) -> NodeId {
        match (self.get(a), self.get(b)) {
            (Node::False, _) | (_, Node::False) => self.intern(Node::False),
            (Node::True, _) => b,
            (_, Node::True) => a,
            _ if a == b => a,
            _ => self.intern(Node::And(a.min(b), a.max(b))),
        }
    }

    fn or(&mut self, a: NodeId, b: NodeId) -> NodeId {
        match (self.get(a), self.get(b)) {
            (Node::True, _) | (_, Node::True) => self.intern(Node::True),
            (Node::False, _) => b,
            (_, Node::False) => a,
            _ if a == b => a,
            _ => self.intern(Node::Or(a.min(b), a.max(b))),
        }
    }

    fn next(&mut self, a: NodeId) -> NodeId {
        match self.get(a) {
            Node::True | Node::False => a,
            _ => self.intern(Node::Next(a)),
        }
    }

    fn always(&mut self, a: NodeId) -> NodeId {
        match self.get(a) {
            Node::True | Node::False | Node::Always(_) => a,
            _ => self.intern(Node::Always(a)),
        }
    }

    fn eventually(&mut self, a: NodeId) -> NodeId {
        match self.get(a) {
            Node::True | Node::False | Node::Eventually(_) => a,
            _ => self.intern(Node::Eventually(a)),
        }
    }

    fn until(&mut self, a: NodeId, b: NodeId) -> NodeId {
        match (self.get(a), self.get(b)) {
            (_, Node::True | Node::False) => b,
            (Node::False, _) => b,
            (Node::True, _) => self.eventually(b),
            _ if a == b => a,
            _ => self.intern(Node::Until(a, b)),
        }
    }

    fn release(&mut self, a: NodeId, b: NodeId) -> NodeId {
        match (self.get(a), self.get(b)) {
            (_, Node::True | Node::False) => b,
            (Node::True, _) => b,
            (Node::False, _) => self.always(b),
            _ if a == b => a,
            _ => self.intern(Node::Release(a, b)),
        }
    }

    /// Converts `f` (negated when `negate` is set) to NNF. `prop_index` maps
    /// proposition names to local indices.
    pub fn lower(&mut self, f: &Formula, negate: bool, prop_index: &impl Fn(&str) -> u8) -> NodeId {
        match f {
            Formula::True | Formula::False => {
                let value = matches!(f, Formula::True) != negate;
                self.intern(if value { Node::True } else { Node::False })
            }
            Formula::Prop(name) => self.intern(Node::Lit { prop: prop_index(name), positive: !negate }),
            Formula::Not(a) => self.lower(a, !negate, prop_index),
            Formula::And(a, b) | Formula::Or(a, b) => {
                let (x, y) = (self.lower(a, negate, prop_index), self.lower(b, negate, prop_index));
                if matches!(f, Formula::And(..)) != negate {
                    self.and(x, y)
                } else {
                    self.or(x, y)
                }
            }
            Formula::Implies(a, b) => {
                // a -> b == !a | b
                let x = self.lower(a, !negate, prop_index);
                let y = self.lower(b, negate, prop_index);
                if negate {
                    self.and(x, y)
                } else {
                    self.or(x, y)
                }
            }
            Formula::Next(a) => {
                let x = self.lower(a, negate, prop_index);
                self.next(x)
            }
            Formula::Always(a) | Formula::Eventually(a) => {
                let x = self.lower(a, negate, prop_index);
                if matches!(f, Formula::Always(_)) != negate {
                    self.always(x)
                } else {
                    self.eventually(x)
                }
            }
            Formula::Until(a, b) => {
                let x = self.lower(a, negate, prop_index);
                let y = self.lower(b, negate, prop_index);
                if negate {
                    self.release(x, y)
                } else {
                    self.until(x, y)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::String;

    fn lower(text: &str) -> (Arena, NodeId) {
        let f: Formula = text.parse().unwrap();
        let props: Vec<String> = f.propositions().into_iter().map(String::from).collect();
        let mut arena = Arena::default();
        let root = arena.lower(&f, false, &|n: &str| props.iter().position(|p| p == n).unwrap() as u8);
        (arena, root)
    }

    #[test]
    fn negation_is_pushed_to_literals() {
        let (a, root) = lower("!(p U q)");
        match a.get(root) {
            Node::Release(x, y) => {
                assert_eq!(a.get(x), Node::Lit { prop: 0, positive: false });
                assert_eq!(a.get(y), Node::Lit { prop: 1, positive: false });
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn constants_fold() {
        let (a, root) = lower("G false");
        assert_eq!(a.get(root), Node::False);
        let (a, root) = lower("!(G true)");
        assert_eq!(a.get(root), Node::False);
        let (a, root) = lower("true U p");
        assert!(matches!(a.get(root), Node::Eventually(_)));
        let (a, root) = lower("p -> p");
        assert!(matches!(a.get(root), Node::Or(..)));
    }

    #[test]
    fn structurally_equal_subformulas_share_ids() {
        let (a, root) = lower("(p & q) | (q & p)");
        assert!(matches!(a.get(root), Node::And(..)));
    }
}
