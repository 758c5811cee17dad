//! Graphviz rendering of Rabin automata.

use std::collections::BTreeMap;
use std::fmt::Write;

use ltlinfer_core::automata::Dra;
use ltlinfer_core::ltl::Alphabet;

fn state_set(states: impl Iterator<Item = usize>) -> String {
    let items: Vec<String> = states.map(|q| q.to_string()).collect();
    format!("{{{}}}", items.join(", "))
}

/// DOT text with one node per state, one edge per (source, target) labeled by
/// the valuations that take it, and the acceptance pairs in a header comment.
pub fn dra_to_dot(d: &Dra, alphabet: &Alphabet) -> String {
    let mut out = String::new();
    for (k, pair) in d.pairs().iter().enumerate() {
        writeln!(out, "// pair {k}: fin {} inf {}", state_set(pair.fin_states()), state_set(pair.inf_states())).unwrap();
    }
    out.push_str("digraph dra {\n  rankdir=LR;\n  init [shape=point];\n");
    for q in 0..d.state_count() {
        writeln!(out, "  q{q} [label=\"{q}\"];").unwrap();
    }
    writeln!(out, "  init -> q{};", d.initial()).unwrap();
    for q in 0..d.state_count() {
        let mut edges: BTreeMap<usize, Vec<String>> = BTreeMap::new();
        for letter in 0..d.local_letters() {
            let v = d.letter_valuation(letter);
            let names: Vec<&str> = alphabet.names_in(v).collect();
            edges.entry(d.step_letter(q, letter)).or_default().push(format!("{{{}}}", names.join(",")));
        }
        for (t, labels) in edges {
            writeln!(out, "  q{q} -> q{t} [label=\"{}\"];", labels.join(" ")).unwrap();
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ltlinfer_core::{compile, parse};

    #[test]
    fn always_p() {
        let ab = Alphabet::new(["p", "q"]).unwrap();
        let d = compile(&parse("G p", &ab).unwrap(), &ab).unwrap();
        let dot = dra_to_dot(&d, &ab);
        assert!(dot.starts_with("// pair 0: fin"));
        assert!(dot.contains("digraph dra {"));
        assert!(dot.contains("[label=\"{p}\"]"));
        assert!(dot.contains("[label=\"{}\"]"));
        assert_eq!(dot.matches(" -> q").count(), 1 + 2 * d.state_count() - 1);
        assert!(dot.ends_with("}\n"));
    }
}
