//! Independent reference implementations and random instance generators used
//! to cross-check the production algorithms. Everything here favors
//! obviousness over speed.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::automata::{AcceptancePair, Dra};
use crate::ltl::{Alphabet, Formula, LassoWord, Valuation};
use crate::math::{abs, powi};
use crate::mdp::{Mdp, MdpBuilder, StateId};
use crate::objective::{ProductPolicy, ViolationTable};
use crate::product::{DraAction, EndComponent, ProductAction, ProductMdp, StateClassification};

/// A random formula of depth at most `depth`; inner nodes stop early with
/// probability 0.2.
pub fn random_formula<R: Rng + ?Sized>(rng: &mut R, depth: usize, props: &[&str]) -> Formula {
    if depth <= 1 || rng.gen_bool(0.2) {
        return match rng.gen_range(0..props.len() + 2) {
            0 => Formula::True,
            1 => Formula::False,
            i => Formula::prop(props[i - 2]),
        };
    }
    let op = rng.gen_range(0..8);
    let sub = |rng: &mut R| random_formula(rng, depth - 1, props);
    match op {
        0 => Formula::not(sub(rng)),
        1 => Formula::and(sub(rng), sub(rng)),
        2 => Formula::or(sub(rng), sub(rng)),
        3 => Formula::implies(sub(rng), sub(rng)),
        4 => Formula::next(sub(rng)),
        5 => Formula::always(sub(rng)),
        6 => Formula::eventually(sub(rng)),
        _ => Formula::until(sub(rng), sub(rng)),
    }
}

/// A random formula with at most `max_complexity` nodes.
pub fn random_small_formula<R: Rng + ?Sized>(rng: &mut R, max_complexity: usize, props: &[&str]) -> Formula {
    loop {
        let f = random_formula(rng, 4, props);
        if f.complexity() <= max_complexity {
            return f;
        }
    }
}

/// A lasso word with a prefix of at most `max_prefix` letters and a nonempty
/// cycle of at most `max_cycle` letters over `n_props` propositions.
pub fn random_lasso<R: Rng + ?Sized>(rng: &mut R, n_props: usize, max_prefix: usize, max_cycle: usize) -> LassoWord {
    let prefix_len = rng.gen_range(0..=max_prefix);
    let cycle_len = rng.gen_range(1..=max_cycle.max(1));
    let mut letters = |len: usize| (0..len).map(|_| Valuation(rng.gen_range(0..1u32 << n_props))).collect();
    let prefix = letters(prefix_len);
    let cycle = letters(cycle_len);
    LassoWord::new(prefix, cycle).expect("cycle is nonempty")
}

/// A random MDP: each state gets a random label and 1 to `max_actions`
/// actions, each with 1 to 3 successors and random probabilities.
pub fn random_mdp<R: Rng + ?Sized>(rng: &mut R, alphabet: &Alphabet, states: usize, max_actions: usize) -> Mdp {
    let mut b = MdpBuilder::new(alphabet.clone());
    for s in 0..states {
        let label = Valuation(rng.gen_range(0..1u32 << alphabet.len()));
        b.add_state(format!("s{s}"), label).expect("fresh");
    }
    for s in 0..states {
        let actions = rng.gen_range(1..=max_actions);
        for a in 0..actions {
            let k = rng.gen_range(1..=3.min(states));
            let mut targets: Vec<StateId> = Vec::new();
            while targets.len() < k {
                let t = rng.gen_range(0..states);
                if !targets.contains(&t) {
                    targets.push(t);
                }
            }
            let weights: Vec<f64> = targets.iter().map(|_| rng.gen_range(0.1..1.0)).collect();
            let total: f64 = weights.iter().sum();
            for (&t, w) in targets.iter().zip(&weights) {
                b.add_transition(s, &format!("a{a}"), t, w / total).expect("valid");
            }
        }
    }
    b.set_initial(0);
    b.build().expect("probabilities are normalized")
}

/// A random complete DRA over host propositions `props` with `pairs` random
/// Rabin pairs.
pub fn random_dra<R: Rng + ?Sized>(rng: &mut R, props: Vec<usize>, states: usize, pairs: usize) -> Dra {
    let letters = 1usize << props.len();
    let transitions = (0..states * letters).map(|_| rng.gen_range(0..states as u32)).collect();
    let pairs = (0..pairs)
        .map(|_| {
            let fin = (0..states).map(|_| rng.gen_bool(0.3)).collect();
            let inf = (0..states).map(|_| rng.gen_bool(0.5)).collect();
            AcceptancePair::new(fin, inf)
        })
        .collect();
    Dra::from_parts(props, states, transitions, pairs).expect("well-formed")
}

/// A uniformly random walk of `len` transitions from the initial state.
pub fn random_walk<R: Rng + ?Sized>(rng: &mut R, m: &Mdp, len: usize) -> Vec<StateId> {
    let mut s = m.initial();
    let mut out = vec![s];
    for _ in 0..len {
        let choices = m.choices(s);
        let c = &choices[rng.gen_range(0..choices.len())];
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut next = c.successors.last().expect("nonempty").0;
        for &(t, p) in &c.successors {
            acc += p;
            if u < acc {
                next = t;
                break;
            }
        }
        out.push(next);
        s = next;
    }
    out
}

/// Minimum over all skip sets `N ⊆ {0..T}` of `Σ_{t∈N} γ^t + γ^{T+1} viol_rand(end)`,
/// where `end` is the product state the induced automaton run ends in and
/// must not be bad; `1 / (1 - γ)` if every run ends in a bad state.
pub fn brute_force_interpretation_cost(
    viol_rand: &ViolationTable,
    p: &ProductMdp<'_>,
    cls: &StateClassification,
    states: &[StateId],
) -> f64 {
    let (m, d, gamma) = (p.mdp(), p.dra(), p.gamma());
    let t_len = states.len();
    let mut best = f64::INFINITY;
    for mask in 0u64..(1u64 << t_len) {
        let mut q = d.initial();
        let mut cost = 0.0;
        for (t, &s) in states.iter().enumerate() {
            if mask >> t & 1 == 1 {
                cost += powi(gamma, t as u32);
            } else {
                q = d.step(q, m.label(s));
            }
        }
        let end = p.id(Some(states[t_len - 1]), q).expect("interpretations stay in the product");
        if !cls.is_bad(end) {
            best = best.min(cost + powi(gamma, t_len as u32) * viol_rand[end]);
        }
    }
    if best.is_finite() {
        best
    } else {
        p.max_cost()
    }
}

fn strongly_connected(members: &[usize], edges: &dyn Fn(usize) -> Vec<usize>) -> bool {
    let reach = |from: usize, forward: bool| {
        let mut seen = BTreeSet::from([from]);
        let mut stack = vec![from];
        while let Some(v) = stack.pop() {
            for &u in members {
                let adjacent = if forward { edges(v).contains(&u) } else { edges(u).contains(&v) };
                if adjacent && seen.insert(u) {
                    stack.push(u);
                }
            }
        }
        seen.len() == members.len()
    };
    reach(members[0], true) && reach(members[0], false)
}

/// Accepting maximal end components by enumerating every set of product
/// states. For a fixed state set the largest candidate restriction keeps
/// every action whose successors stay inside; any end component on that set
/// uses a subset of it, so checking that restriction alone is exhaustive.
/// Returns components accepted by some pair that are not strictly contained
/// in another accepted component.
///
/// # Panics
///
/// If the product has more than 20 states.
pub fn exhaustive_amecs(p: &ProductMdp<'_>) -> Vec<EndComponent> {
    let n = p.state_count();
    assert!(n <= 20, "exhaustive enumeration is limited to 20 states");
    let mut accepted: Vec<EndComponent> = Vec::new();
    for mask in 1u32..(1u32 << n) {
        let members: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
        let restriction: Vec<Vec<ProductAction>> = members
            .iter()
            .map(|&v| {
                let mut acts: Vec<ProductAction> =
                    p.actions(v).filter(|&a| p.successors(v, a).all(|(t, _)| mask >> t & 1 == 1)).collect();
                acts.sort();
                acts.dedup();
                acts
            })
            .collect();
        if restriction.iter().any(Vec::is_empty) {
            continue;
        }
        let edges = |v: usize| -> Vec<usize> {
            let i = members.iter().position(|&x| x == v).expect("member");
            restriction[i].iter().flat_map(|&a| p.successors(v, a).map(|(t, _)| t)).collect()
        };
        if !strongly_connected(&members, &edges) {
            continue;
        }
        let accepting = p.dra().pairs().iter().any(|pair| {
            members.iter().all(|&v| !pair.is_fin(p.state(v).1)) && members.iter().any(|&v| pair.is_inf(p.state(v).1))
        });
        if accepting {
            accepted.push(EndComponent { states: members, actions: restriction });
        }
    }
    let maximal: Vec<EndComponent> = accepted
        .iter()
        .filter(|e| !accepted.iter().any(|o| o != *e && e.is_subset_of(o)))
        .cloned()
        .collect();
    let mut out = maximal;
    out.sort();
    out
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>, String> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| abs(a[i][col]).total_cmp(&abs(a[j][col])))
            .expect("nonempty range");
        if abs(a[pivot][col]) < 1e-14 {
            return Err(format!("singular system at column {col}"));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor != 0.0 {
                for k in col..n {
                    a[row][k] -= factor * a[col][k];
                }
                b[row] -= factor * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    Ok(x)
}

/// Result of solving the policy's violation cost by direct linear solves.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearSolution {
    pub values: Vec<f64>,
    /// Smallest gap between the two branches of any min at the solution.
    pub min_branch_gap: f64,
}

/// Violation cost of `pi` by iterating over automaton-action choices: fix a
/// keep/susp choice for every (state, successor) pair, solve the resulting
/// linear system exactly, switch every choice to the cheaper branch, and
/// repeat until the choices stop changing.
pub fn solve_policy_by_linear_systems(
    p: &ProductMdp<'_>,
    pi: &ProductPolicy,
    cls: &StateClassification,
) -> Result<LinearSolution, String> {
    let n = p.state_count();
    let gamma = p.gamma();
    let max = p.max_cost();
    let free: Vec<usize> = (0..n).filter(|&v| !cls.is_bad(v)).collect();
    let column = |v: usize| free.iter().position(|&x| x == v);
    // rows[v] = [(weight, keep, susp)]
    let rows: Vec<Vec<(f64, usize, usize)>> = (0..n)
        .map(|v| {
            let mut out = Vec::new();
            for &(a, w) in pi.distribution(v) {
                if let Some(c) = p.choices(v).iter().find(|c| c.action == a) {
                    out.extend(c.successors.iter().map(|x| (w * x.probability, x.keep, x.susp)));
                }
            }
            out
        })
        .collect();
    let mut choice: Vec<Vec<DraAction>> = rows.iter().map(|r| vec![DraAction::Keep; r.len()]).collect();
    for _ in 0..1000 {
        let k = free.len();
        let mut a = vec![vec![0.0; k]; k];
        let mut b = vec![0.0; k];
        for (i, &v) in free.iter().enumerate() {
            a[i][i] += 1.0;
            for (r, &(w, keep, susp)) in rows[v].iter().enumerate() {
                let (target, unit) = match choice[v][r] {
                    DraAction::Keep => (keep, 0.0),
                    DraAction::Susp => (susp, 1.0),
                };
                b[i] += w * unit;
                match column(target) {
                    Some(j) => a[i][j] -= w * gamma,
                    None => b[i] += w * gamma * max,
                }
            }
        }
        let x = solve_linear(a, b)?;
        let value = |v: usize| column(v).map_or(max, |j| x[j]);
        let mut changed = false;
        let mut gap = f64::INFINITY;
        for &v in &free {
            for (r, &(_, keep, susp)) in rows[v].iter().enumerate() {
                let (kv, sv) = (gamma * value(keep), 1.0 + gamma * value(susp));
                gap = gap.min(abs(kv - sv));
                let current = match choice[v][r] {
                    DraAction::Keep => kv,
                    DraAction::Susp => sv,
                };
                let better = if kv <= sv { DraAction::Keep } else { DraAction::Susp };
                if kv.min(sv) < current - 1e-12 {
                    choice[v][r] = better;
                    changed = true;
                }
            }
        }
        if !changed {
            return Ok(LinearSolution { values: (0..n).map(value).collect(), min_branch_gap: gap });
        }
    }
    Err(String::from("branch choices did not stabilize"))
}
