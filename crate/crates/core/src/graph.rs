//! Strongly connected components (iterative Tarjan).

use alloc::vec;
use alloc::vec::Vec;

const UNVISITED: usize = usize::MAX;

/// Returns the component index of every node in `0..n`; nodes for which
/// `active` is false get `None`. Components are numbered in reverse
/// topological order (sinks first).
pub(crate) fn tarjan_scc<F, I>(n: usize, active: impl Fn(usize) -> bool, successors: F) -> (Vec<Option<usize>>, usize)
where
    F: Fn(usize) -> I,
    I: IntoIterator<Item = usize>,
{
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![None; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut comp_count = 0;

    for root in 0..n {
        if index[root] != UNVISITED || !active(root) {
            continue;
        }
        // (node, successor list, cursor)
        let mut call: Vec<(usize, Vec<usize>, usize)> = Vec::new();
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        call.push((root, successors(root).into_iter().filter(|&s| active(s)).collect(), 0));

        while let Some(frame) = call.last_mut() {
            let v = frame.0;
            if frame.2 < frame.1.len() {
                let w = frame.1[frame.2];
                frame.2 += 1;
                if index[w] == UNVISITED {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, successors(w).into_iter().filter(|&s| active(s)).collect(), 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(parent) = call.last() {
                    let p = parent.0;
                    low[p] = low[p].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        comp[w] = Some(comp_count);
                        if w == v {
                            break;
                        }
                    }
                    comp_count += 1;
                }
            }
        }
    }
    (comp, comp_count)
}
