//! Violation costs: evaluating product policies, interpreting observed state
//! sequences, and the state- and action-based objectives.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::automata::{compile_with_budget, CompileError, Dra};
use crate::ltl::{Alphabet, Formula};
use crate::math::{abs, powi};
use crate::mdp::{ActionId, Mdp, StateId, Trajectory};
use crate::product::{build_product, classify_states, compute_amecs, ProductMdp, StateClassification, PRE_INITIAL};

/// Stopping rule for value iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationOptions {
    /// Stop once a sweep changes no value by more than this.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for IterationOptions {
    fn default() -> Self {
        IterationOptions { tolerance: 1e-9, max_iterations: 100_000 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum EvalError {
    NotConverged { iterations: usize, residual: f64 },
    /// The policy assigns no action to a product state that is not bad.
    MissingPolicy { state: usize },
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::NotConverged { iterations, residual } => {
                write!(f, "value iteration did not converge after {iterations} sweeps (residual {residual:e})")
            }
            EvalError::MissingPolicy { state } => write!(f, "policy is undefined at product state {state}"),
        }
    }
}

impl core::error::Error for EvalError {}

/// A stationary policy on product states over underlying actions; `None` is
/// the pre-initial action. The automaton action is chosen by the evaluator.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductPolicy {
    dists: Vec<Vec<(Option<ActionId>, f64)>>,
}

impl ProductPolicy {
    /// Uniform over the actions available in each product state.
    pub fn uniform(p: &ProductMdp<'_>) -> Self {
        Self::uniform_over(p, |v| p.choices(v).iter().map(|c| c.action).collect())
    }

    /// Uniform over `allowed(v)` in each product state.
    pub fn uniform_over(p: &ProductMdp<'_>, mut allowed: impl FnMut(usize) -> Vec<Option<ActionId>>) -> Self {
        let dists = (0..p.state_count())
            .map(|v| {
                let acts = allowed(v);
                let w = 1.0 / acts.len() as f64;
                acts.into_iter().map(|a| (a, w)).collect()
            })
            .collect();
        ProductPolicy { dists }
    }

    /// Explicit distributions, one per product state.
    pub fn from_distributions(dists: Vec<Vec<(Option<ActionId>, f64)>>) -> Self {
        ProductPolicy { dists }
    }

    pub fn distribution(&self, v: usize) -> &[(Option<ActionId>, f64)] {
        &self.dists[v]
    }
}

/// Violation cost of every product state.
#[derive(Clone, Debug, PartialEq)]
pub struct ViolationTable {
    values: Vec<f64>,
}

impl ViolationTable {
    pub fn get(&self, v: usize) -> f64 {
        self.values[v]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl core::ops::Index<usize> for ViolationTable {
    type Output = f64;

    fn index(&self, v: usize) -> &f64 {
        &self.values[v]
    }
}

/// Flattened Bellman operator: the value of a state is the minimum over its
/// groups of `Σ w · min(1 + γ V(susp), γ V(keep))` over the group's rows.
pub(crate) struct Operator {
    group_start: Vec<usize>,
    row_start: Vec<usize>,
    rows: Vec<(f64, usize, usize)>,
}

impl Operator {
    /// One group per state, weighted by the policy.
    fn for_policy(p: &ProductMdp<'_>, pi: &ProductPolicy, cls: &StateClassification) -> Result<Self, EvalError> {
        let mut op = Operator { group_start: vec![0], row_start: vec![0], rows: Vec::new() };
        for v in 0..p.state_count() {
            if !cls.is_bad(v) {
                let dist = pi.distribution(v);
                if dist.iter().all(|&(_, w)| w <= 0.0) {
                    return Err(EvalError::MissingPolicy { state: v });
                }
                for &(a, w) in dist {
                    let c = p.choices(v).iter().find(|c| c.action == a).ok_or(EvalError::MissingPolicy { state: v })?;
                    for x in &c.successors {
                        op.rows.push((w * x.probability, x.keep, x.susp));
                    }
                }
                op.row_start.push(op.rows.len());
            }
            op.group_start.push(op.row_start.len() - 1);
        }
        Ok(op)
    }

    /// One group per available action.
    pub(crate) fn for_minimum(p: &ProductMdp<'_>, cls: &StateClassification) -> Self {
        let mut op = Operator { group_start: vec![0], row_start: vec![0], rows: Vec::new() };
        for v in 0..p.state_count() {
            if !cls.is_bad(v) {
                for c in p.choices(v) {
                    for x in &c.successors {
                        op.rows.push((x.probability, x.keep, x.susp));
                    }
                    op.row_start.push(op.rows.len());
                }
            }
            op.group_start.push(op.row_start.len() - 1);
        }
        op
    }

    fn group_value(&self, g: usize, values: &[f64], gamma: f64) -> f64 {
        self.rows[self.row_start[g]..self.row_start[g + 1]]
            .iter()
            .map(|&(w, keep, susp)| w * f64::min(1.0 + gamma * values[susp], gamma * values[keep]))
            .sum()
    }

    /// Gauss-Seidel value iteration; states without groups keep their pinned value.
    pub(crate) fn solve(&self, cls: &StateClassification, gamma: f64, opts: IterationOptions) -> Result<Vec<f64>, EvalError> {
        let n = self.group_start.len() - 1;
        let max = 1.0 / (1.0 - gamma);
        let mut values: Vec<f64> = (0..n).map(|v| if cls.is_bad(v) { max } else { 0.0 }).collect();
        let mut residual = f64::INFINITY;
        for _ in 0..opts.max_iterations {
            residual = 0.0;
            for v in 0..n {
                let groups = self.group_start[v]..self.group_start[v + 1];
                if groups.is_empty() {
                    continue;
                }
                let new = groups.map(|g| self.group_value(g, &values, gamma)).fold(f64::INFINITY, f64::min);
                residual = f64::max(residual, abs(new - values[v]));
                values[v] = new;
            }
            if residual < opts.tolerance {
                return Ok(values);
            }
        }
        Err(EvalError::NotConverged { iterations: opts.max_iterations, residual })
    }

    /// Expected cost of each group of `v` under `values`.
    pub(crate) fn group_values(&self, v: usize, values: &[f64], gamma: f64) -> Vec<f64> {
        (self.group_start[v]..self.group_start[v + 1]).map(|g| self.group_value(g, values, gamma)).collect()
    }
}

/// Violation cost of following `pi` in the product, with bad states pinned at
/// `1 / (1 - γ)` and the automaton action chosen optimally at every step.
pub fn evaluate_policy_violation(
    p: &ProductMdp<'_>,
    pi: &ProductPolicy,
    cls: &StateClassification,
    opts: IterationOptions,
) -> Result<ViolationTable, EvalError> {
    let op = Operator::for_policy(p, pi, cls)?;
    Ok(ViolationTable { values: op.solve(cls, p.gamma(), opts)? })
}

/// The cheapest automaton run explaining an observed state sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct Interpretation {
    /// `q_0, …, q_{T+1}`, starting with the automaton's initial state.
    pub dra_states: Vec<usize>,
    /// Product states `(s_t, q_{t+1})` for `t = 0..=T`.
    pub product_states: Vec<usize>,
    /// Discounted skip cost plus the random-policy tail.
    pub cost: f64,
    /// Product state the interpretation ends in.
    pub terminal: usize,
}

/// Dynamic program over the product: at time `t`, skipping costs `γ^t` and
/// advancing is free. The tail after the last state is costed with
/// `viol_rand`. When every reachable terminal state is bad the cost is
/// `1 / (1 - γ)`.
///
/// # Panics
///
/// If `states` is empty or is not a path of the MDP starting at its initial state.
pub fn rabin_state_sequence(
    viol_rand: &ViolationTable,
    p: &ProductMdp<'_>,
    cls: &StateClassification,
    states: &[StateId],
) -> Interpretation {
    assert!(!states.is_empty(), "state sequence must be nonempty");
    let (mdp, dra, gamma) = (p.mdp(), p.dra(), p.gamma());
    // layer entries: (product state, cost, index of predecessor in previous layer)
    let mut layers: Vec<Vec<(usize, f64, usize)>> = vec![vec![(PRE_INITIAL, 0.0, 0)]];
    let mut discount = 1.0;
    for &s in states {
        let label = mdp.label(s);
        let prev = layers.last().expect("nonempty");
        let mut next: Vec<(usize, f64, usize)> = Vec::with_capacity(prev.len() * 2);
        for (j, &(v, cost, _)) in prev.iter().enumerate() {
            let q = p.state(v).1;
            let keep = p.id(Some(s), dra.step(q, label)).expect("state sequence is not a path of the MDP");
            let susp = p.id(Some(s), q).expect("state sequence is not a path of the MDP");
            for (target, c) in [(keep, cost), (susp, cost + discount)] {
                match next.iter_mut().find(|e| e.0 == target) {
                    Some(e) if c < e.1 => *e = (target, c, j),
                    Some(_) => {}
                    None => next.push((target, c, j)),
                }
            }
        }
        next.sort_by_key(|e| e.0);
        layers.push(next);
        discount *= gamma;
    }
    let last = layers.last().expect("nonempty");
    let best = |candidates: &mut dyn Iterator<Item = (usize, f64)>| {
        candidates.fold(None, |acc: Option<(usize, f64)>, (i, c)| match acc {
            Some((_, bc)) if bc <= c => acc,
            _ => Some((i, c)),
        })
    };
    let tail = |i: usize| last[i].1 + discount * viol_rand[last[i].0];
    let (end, cost) = match best(&mut (0..last.len()).filter(|&i| !cls.is_bad(last[i].0)).map(|i| (i, tail(i)))) {
        Some(found) => found,
        None => {
            let (i, _) = best(&mut (0..last.len()).map(|i| (i, last[i].1))).expect("layers are nonempty");
            (i, p.max_cost())
        }
    };
    let mut product_states = vec![0; states.len()];
    let mut idx = end;
    for t in (0..states.len()).rev() {
        let (v, _, parent) = layers[t + 1][idx];
        product_states[t] = v;
        idx = parent;
    }
    let mut dra_states = vec![dra.initial()];
    dra_states.extend(product_states.iter().map(|&v| p.state(v).1));
    Interpretation { dra_states, terminal: last[end].0, product_states, cost }
}

/// `Σ_i Viol(τ_i) − m · viol_rand(s_-1)`.
pub fn obj_state_based(p: &ProductMdp<'_>, cls: &StateClassification, viol_rand: &ViolationTable, demos: &[Trajectory]) -> f64 {
    let total: f64 = demos.iter().map(|d| rabin_state_sequence(viol_rand, p, cls, &d.states()).cost).sum();
    total - demos.len() as f64 * viol_rand[PRE_INITIAL]
}

/// Violation cost of the policy that picks uniformly among the demonstrated
/// actions at each interpreted product state (all actions where nothing was
/// observed), less that of the random policy.
pub fn obj_action_based(
    p: &ProductMdp<'_>,
    cls: &StateClassification,
    viol_rand: &ViolationTable,
    demos: &[Trajectory],
    opts: IterationOptions,
) -> Result<f64, EvalError> {
    let mut observed: Vec<BTreeSet<Option<ActionId>>> = vec![BTreeSet::new(); p.state_count()];
    for d in demos {
        let interp = rabin_state_sequence(viol_rand, p, cls, &d.states());
        observed[PRE_INITIAL].insert(None);
        for (t, &(_, a)) in d.steps.iter().enumerate() {
            observed[interp.product_states[t]].insert(Some(a));
        }
    }
    let pi = ProductPolicy::uniform_over(p, |v| {
        if observed[v].is_empty() {
            p.choices(v).iter().map(|c| c.action).collect()
        } else {
            observed[v].iter().copied().collect()
        }
    });
    let values = evaluate_policy_violation(p, &pi, cls, opts)?;
    Ok(values[PRE_INITIAL] - viol_rand[PRE_INITIAL])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ObjectiveKind {
    State,
    Action,
}

/// Everything about one formula on one MDP that does not depend on the demonstrations.
pub struct FormulaAnalysis<'a> {
    pub product: ProductMdp<'a>,
    pub classification: StateClassification,
    /// Violation cost of the uniformly random policy.
    pub viol_rand: ViolationTable,
    pub options: IterationOptions,
}

impl<'a> FormulaAnalysis<'a> {
    pub fn new(mdp: &'a Mdp, dra: &'a Dra, gamma: f64, options: IterationOptions) -> Result<Self, EvalError> {
        let product = build_product(mdp, dra, gamma);
        let amecs = compute_amecs(&product);
        let classification = classify_states(&product, &amecs);
        let viol_rand = evaluate_policy_violation(&product, &ProductPolicy::uniform(&product), &classification, options)?;
        Ok(FormulaAnalysis { product, classification, viol_rand, options })
    }

    pub fn interpret(&self, states: &[StateId]) -> Interpretation {
        rabin_state_sequence(&self.viol_rand, &self.product, &self.classification, states)
    }

    pub fn objective(&self, kind: ObjectiveKind, demos: &[Trajectory]) -> Result<f64, EvalError> {
        match kind {
            ObjectiveKind::State => Ok(obj_state_based(&self.product, &self.classification, &self.viol_rand, demos)),
            ObjectiveKind::Action => {
                obj_action_based(&self.product, &self.classification, &self.viol_rand, demos, self.options)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ScoreError {
    Compile(CompileError),
    Eval(EvalError),
}

impl fmt::Display for ScoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScoreError::Compile(e) => e.fmt(f),
            ScoreError::Eval(e) => e.fmt(f),
        }
    }
}

impl core::error::Error for ScoreError {}

impl From<CompileError> for ScoreError {
    fn from(e: CompileError) -> Self {
        ScoreError::Compile(e)
    }
}

impl From<EvalError> for ScoreError {
    fn from(e: EvalError) -> Self {
        ScoreError::Eval(e)
    }
}

/// Shared inputs for scoring many formulas against the same demonstrations.
#[derive(Clone, Copy, Debug)]
pub struct ScoringContext<'a> {
    pub mdp: &'a Mdp,
    pub demos: &'a [Trajectory],
    pub kind: ObjectiveKind,
    pub gamma: f64,
    pub budget: usize,
    pub options: IterationOptions,
}

impl ScoringContext<'_> {
    pub fn alphabet(&self) -> &Alphabet {
        self.mdp.alphabet()
    }

    /// Compiles `f` and returns its objective value.
    pub fn score(&self, f: &Formula) -> Result<f64, ScoreError> {
        let dra = compile_with_budget(f, self.mdp.alphabet(), self.budget)?;
        let analysis = FormulaAnalysis::new(self.mdp, &dra, self.gamma, self.options)?;
        Ok(analysis.objective(self.kind, self.demos)?)
    }

    /// Score assigned to formulas that cannot be evaluated: worse than any
    /// attainable objective value.
    pub fn worst_score(&self) -> f64 {
        (self.demos.len() as f64 + 1.0) / (1.0 - self.gamma)
    }
}

/// `Σ_{t ∈ skipped} γ^t`.
pub fn skip_cost(gamma: f64, skipped: impl IntoIterator<Item = usize>) -> f64 {
    skipped.into_iter().map(|t| powi(gamma, t as u32)).sum()
}
