//! A demonstrator that minimizes violation cost for a known specification.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automata::{compile_with_budget, CompileError, Dra, DEFAULT_STATE_BUDGET};
use crate::ltl::Formula;
use crate::mdp::{pick, ActionId, Mdp, StateId, Trajectory};
use crate::objective::{EvalError, IterationOptions, Operator};
use crate::product::{build_product, classify_states, compute_amecs};

/// Values closer than this are treated as ties.
const TIE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub enum PlanError {
    Compile(CompileError),
    Eval(EvalError),
    InvalidArgument(&'static str),
}

impl fmt::Display for PlanError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanError::Compile(e) => e.fmt(f),
            PlanError::Eval(e) => e.fmt(f),
            PlanError::InvalidArgument(what) => f.write_str(what),
        }
    }
}

impl core::error::Error for PlanError {}

impl From<CompileError> for PlanError {
    fn from(e: CompileError) -> Self {
        PlanError::Compile(e)
    }
}

impl From<EvalError> for PlanError {
    fn from(e: EvalError) -> Self {
        PlanError::Eval(e)
    }
}

/// Optimal violation costs and a greedy deterministic policy on the product.
#[derive(Clone, Debug)]
pub struct DemonstratorPolicy {
    dra: Dra,
    gamma: f64,
    mdp_states: usize,
    /// Indexed by `(mdp slot, q)`; slot 0 is the pre-initial state. `NaN` where unreachable.
    values: Vec<f64>,
    actions: Vec<Option<ActionId>>,
}

/// Solves `V(s,q) = min_a Σ P(s,a,s') min{1 + γ V(s',q), γ V(s',δ(q,L(s')))}`
/// with unrecoverable states pinned at `1 / (1 - γ)`, then acts greedily with
/// ties going to the lowest action id.
pub fn plan_demonstrator(m: &Mdp, f: &Formula, gamma: f64) -> Result<DemonstratorPolicy, PlanError> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(PlanError::InvalidArgument("discount must lie in (0, 1)"));
    }
    let dra = compile_with_budget(f, m.alphabet(), DEFAULT_STATE_BUDGET)?;
    let opts = IterationOptions { tolerance: 1e-12, ..IterationOptions::default() };
    let (values, actions) = {
        let p = build_product(m, &dra, gamma);
        let cls = classify_states(&p, &compute_amecs(&p));
        let op = Operator::for_minimum(&p, &cls);
        let solved = op.solve(&cls, gamma, opts)?;
        let nq = dra.state_count();
        let mut values = vec![f64::NAN; (m.state_count() + 1) * nq];
        let mut actions = vec![None; values.len()];
        for v in 0..p.state_count() {
            let (s, q) = p.state(v);
            let slot = s.map_or(0, |s| s + 1) * nq + q;
            values[slot] = solved[v];
            let choices = p.choices(v);
            actions[slot] = if cls.is_bad(v) {
                choices[0].action
            } else {
                let q_values = op.group_values(v, &solved, gamma);
                let best = q_values.iter().copied().fold(f64::INFINITY, f64::min);
                let i = q_values.iter().position(|&x| x <= best + TIE).expect("nonempty");
                choices[i].action
            };
        }
        (values, actions)
    };
    Ok(DemonstratorPolicy { dra, gamma, mdp_states: m.state_count(), values, actions })
}

impl DemonstratorPolicy {
    fn slot(&self, s: Option<StateId>, q: usize) -> usize {
        s.map_or(0, |s| s + 1) * self.dra.state_count() + q
    }

    pub fn dra(&self) -> &Dra {
        &self.dra
    }

    /// Optimal violation cost of `(s, q)`, `None` if unreachable.
    pub fn value(&self, s: Option<StateId>, q: usize) -> Option<f64> {
        if q >= self.dra.state_count() || s.is_some_and(|s| s >= self.mdp_states) {
            return None;
        }
        let v = self.values[self.slot(s, q)];
        (!v.is_nan()).then_some(v)
    }

    /// Greedy action at a reachable MDP product state.
    pub fn action(&self, s: StateId, q: usize) -> Option<ActionId> {
        if q >= self.dra.state_count() || s >= self.mdp_states {
            return None;
        }
        self.actions[self.slot(Some(s), q)]
    }

    /// Automaton state after entering `next` from automaton state `q`:
    /// advance unless skipping is strictly cheaper.
    fn track(&self, m: &Mdp, q: usize, next: StateId) -> usize {
        let advanced = self.dra.step(q, m.label(next));
        let keep = self.gamma * self.value(Some(next), advanced).expect("reachable");
        let susp = 1.0 + self.gamma * self.value(Some(next), q).expect("reachable");
        if keep <= susp + TIE {
            advanced
        } else {
            q
        }
    }

    /// Rolls the greedy policy forward for `horizon` steps, tracking the
    /// automaton alongside.
    pub fn rollout<R: Rng + ?Sized>(&self, m: &Mdp, horizon: usize, rng: &mut R) -> Trajectory {
        let mut s = m.initial();
        let mut q = self.track(m, self.dra.initial(), s);
        let mut steps = Vec::with_capacity(horizon);
        for _ in 0..horizon {
            let a = self.action(s, q).expect("reachable product state");
            steps.push((s, a));
            let choice = m.choice(s, a).expect("available");
            let next = pick(&choice.successors, rng.gen::<f64>());
            q = self.track(m, q, next);
            s = next;
        }
        Trajectory { steps, final_state: s }
    }
}

/// `count` rollouts of `horizon` steps from one seeded stream.
pub fn generate_demos(
    m: &Mdp,
    f: &Formula,
    gamma: f64,
    count: usize,
    horizon: usize,
    seed: u64,
) -> Result<Vec<Trajectory>, PlanError> {
    if count == 0 {
        return Err(PlanError::InvalidArgument("count must be at least 1"));
    }
    if horizon == 0 {
        return Err(PlanError::InvalidArgument("horizon must be at least 1"));
    }
    let policy = plan_demonstrator(m, f, gamma)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count).map(|_| policy.rollout(m, horizon, &mut rng)).collect())
}
