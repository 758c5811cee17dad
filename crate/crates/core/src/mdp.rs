//! Labeled Markov decision processes, trajectories, and stationary policies.
//!
//! States and actions are dense integer ids; names are kept only for I/O and
//! reporting. Action ids are assigned by first appearance, scanning states in
//! id order, so an MDP rebuilt from its own serialization gets the same ids.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ltl::{Alphabet, Valuation};
use crate::math::abs;

pub type StateId = usize;
pub type ActionId = usize;

/// Tolerance on probability sums.
pub const PROBABILITY_TOLERANCE: f64 = 1e-9;

/// An available action together with its successor distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct Choice {
    pub action: ActionId,
    /// `(successor, probability)`, sorted by successor, all probabilities > 0.
    pub successors: Vec<(StateId, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mdp {
    alphabet: Alphabet,
    state_names: Vec<String>,
    action_names: Vec<String>,
    labels: Vec<Valuation>,
    /// Per state, sorted by action id.
    choices: Vec<Vec<Choice>>,
    initial: StateId,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MdpError {
    DuplicateState(String),
    NoInitialState,
    NoActions { state: String },
    BadProbability { state: String, action: String, probability: f64 },
    NotNormalized { state: String, action: String, sum: f64 },
    UnknownState(StateId),
}

impl fmt::Display for MdpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MdpError::DuplicateState(s) => write!(f, "duplicate state `{s}`"),
            MdpError::NoInitialState => f.write_str("no initial state"),
            MdpError::NoActions { state } => write!(f, "state `{state}` has no available action"),
            MdpError::BadProbability { state, action, probability } => {
                write!(f, "probability {probability} for `{state}`/`{action}` is outside [0, 1]")
            }
            MdpError::NotNormalized { state, action, sum } => {
                write!(f, "successor probabilities of `{state}`/`{action}` sum to {sum}")
            }
            MdpError::UnknownState(s) => write!(f, "state id {s} does not exist"),
        }
    }
}

impl core::error::Error for MdpError {}

/// Incremental construction of an [`Mdp`].
#[derive(Clone, Debug)]
pub struct MdpBuilder {
    alphabet: Alphabet,
    state_names: Vec<String>,
    labels: Vec<Valuation>,
    action_names: Vec<String>,
    /// Per state: (action, successor -> probability) in insertion order.
    choices: Vec<Vec<(ActionId, BTreeMap<StateId, f64>)>>,
    initial: Option<StateId>,
}

impl MdpBuilder {
    pub fn new(alphabet: Alphabet) -> Self {
        MdpBuilder {
            alphabet,
            state_names: Vec::new(),
            labels: Vec::new(),
            action_names: Vec::new(),
            choices: Vec::new(),
            initial: None,
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn add_state(&mut self, name: impl Into<String>, label: Valuation) -> Result<StateId, MdpError> {
        let name = name.into();
        if self.state_names.contains(&name) {
            return Err(MdpError::DuplicateState(name));
        }
        self.state_names.push(name);
        self.labels.push(label);
        self.choices.push(Vec::new());
        Ok(self.state_names.len() - 1)
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.state_names.iter().position(|n| n == name)
    }

    pub fn set_initial(&mut self, state: StateId) {
        self.initial = Some(state);
    }

    /// Adds probability mass for `(state, action) -> successor`; repeated
    /// entries accumulate.
    pub fn add_transition(&mut self, state: StateId, action: &str, successor: StateId, probability: f64) -> Result<(), MdpError> {
        if state >= self.state_names.len() {
            return Err(MdpError::UnknownState(state));
        }
        if successor >= self.state_names.len() {
            return Err(MdpError::UnknownState(successor));
        }
        if !(0.0..=1.0).contains(&probability) {
            return Err(MdpError::BadProbability {
                state: self.state_names[state].clone(),
                action: action.to_string(),
                probability,
            });
        }
        let a = match self.action_names.iter().position(|n| n == action) {
            Some(a) => a,
            None => {
                self.action_names.push(action.to_string());
                self.action_names.len() - 1
            }
        };
        let slot = match self.choices[state].iter().position(|(x, _)| *x == a) {
            Some(i) => i,
            None => {
                self.choices[state].push((a, BTreeMap::new()));
                self.choices[state].len() - 1
            }
        };
        *self.choices[state][slot].1.entry(successor).or_insert(0.0) += probability;
        Ok(())
    }

    pub fn build(self) -> Result<Mdp, MdpError> {
        let initial = self.initial.ok_or(MdpError::NoInitialState)?;
        if initial >= self.state_names.len() {
            return Err(MdpError::UnknownState(initial));
        }
        // Renumber actions by first appearance in state order.
        let mut remap: Vec<Option<ActionId>> = vec![None; self.action_names.len()];
        let mut action_names = Vec::new();
        for per_state in &self.choices {
            for (a, _) in per_state {
                if remap[*a].is_none() {
                    remap[*a] = Some(action_names.len());
                    action_names.push(self.action_names[*a].clone());
                }
            }
        }
        let mut choices = Vec::with_capacity(self.choices.len());
        for (s, per_state) in self.choices.into_iter().enumerate() {
            if per_state.is_empty() {
                return Err(MdpError::NoActions { state: self.state_names[s].clone() });
            }
            let mut out: Vec<Choice> = Vec::with_capacity(per_state.len());
            for (a, dist) in per_state {
                let sum: f64 = dist.values().sum();
                if abs(sum - 1.0) > PROBABILITY_TOLERANCE {
                    return Err(MdpError::NotNormalized {
                        state: self.state_names[s].clone(),
                        action: self.action_names[a].clone(),
                        sum,
                    });
                }
                out.push(Choice {
                    action: remap[a].expect("assigned above"),
                    successors: dist.into_iter().filter(|&(_, p)| p > 0.0).collect(),
                });
            }
            out.sort_by_key(|c| c.action);
            choices.push(out);
        }
        Ok(Mdp {
            alphabet: self.alphabet,
            state_names: self.state_names,
            action_names,
            labels: self.labels,
            choices,
            initial,
        })
    }
}

impl Mdp {
    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn state_count(&self) -> usize {
        self.state_names.len()
    }

    pub fn action_count(&self) -> usize {
        self.action_names.len()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.state_names[s]
    }

    pub fn action_name(&self, a: ActionId) -> &str {
        &self.action_names[a]
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.state_names.iter().position(|n| n == name)
    }

    pub fn action_id(&self, name: &str) -> Option<ActionId> {
        self.action_names.iter().position(|n| n == name)
    }

    pub fn label(&self, s: StateId) -> Valuation {
        self.labels[s]
    }

    pub fn choices(&self, s: StateId) -> &[Choice] {
        &self.choices[s]
    }

    pub fn choice(&self, s: StateId, a: ActionId) -> Option<&Choice> {
        self.choices[s].iter().find(|c| c.action == a)
    }

    pub fn available(&self, s: StateId) -> impl Iterator<Item = ActionId> + '_ {
        self.choices[s].iter().map(|c| c.action)
    }

    pub fn is_available(&self, s: StateId, a: ActionId) -> bool {
        self.choice(s, a).is_some()
    }

    /// `P(s, a, s')`; zero for unavailable actions.
    pub fn probability(&self, s: StateId, a: ActionId, next: StateId) -> f64 {
        self.choice(s, a)
            .and_then(|c| c.successors.iter().find(|(t, _)| *t == next))
            .map_or(0.0, |&(_, p)| p)
    }
}

/// A finite path `(s_0, a_0), …, (s_{T-1}, a_{T-1}), s_T`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trajectory {
    pub steps: Vec<(StateId, ActionId)>,
    pub final_state: StateId,
}

impl Trajectory {
    /// Number of state-action pairs.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// `s_0, …, s_T`.
    pub fn states(&self) -> Vec<StateId> {
        self.steps.iter().map(|&(s, _)| s).chain(core::iter::once(self.final_state)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationReason {
    UnknownState,
    /// The trajectory does not start in the MDP's initial state.
    NotInitial,
    ActionUnavailable,
    ZeroProbability,
}

/// First point where a trajectory departs from the MDP.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrajectoryViolation {
    /// Index of the offending step (`T` for the final state).
    pub index: usize,
    pub reason: ViolationReason,
}

impl fmt::Display for TrajectoryViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.reason {
            ViolationReason::UnknownState => "unknown state",
            ViolationReason::NotInitial => "does not start in the initial state",
            ViolationReason::ActionUnavailable => "action not available",
            ViolationReason::ZeroProbability => "transition has probability zero",
        };
        write!(f, "step {}: {what}", self.index)
    }
}

impl core::error::Error for TrajectoryViolation {}

/// Checks that `tau` starts in the initial state, uses only available actions,
/// and only takes positive-probability transitions.
pub fn validate_trajectory(m: &Mdp, tau: &Trajectory) -> Result<(), TrajectoryViolation> {
    let states = tau.states();
    let fail = |index, reason| Err(TrajectoryViolation { index, reason });
    if let Some(t) = states.iter().position(|&s| s >= m.state_count()) {
        return fail(t, ViolationReason::UnknownState);
    }
    if states[0] != m.initial() {
        return fail(0, ViolationReason::NotInitial);
    }
    for (t, &(s, a)) in tau.steps.iter().enumerate() {
        if !m.is_available(s, a) {
            return fail(t, ViolationReason::ActionUnavailable);
        }
        if m.probability(s, a, states[t + 1]) <= 0.0 {
            return fail(t, ViolationReason::ZeroProbability);
        }
    }
    Ok(())
}

/// A stationary policy: a distribution over available actions per state.
#[derive(Clone, Debug, PartialEq)]
pub struct StationaryPolicy {
    dists: Vec<Vec<(ActionId, f64)>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PolicyError {
    WrongStateCount { expected: usize, found: usize },
    Unavailable { state: StateId, action: ActionId },
    NotNormalized { state: StateId, sum: f64 },
}

impl fmt::Display for PolicyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyError::WrongStateCount { expected, found } => {
                write!(f, "policy covers {found} states, MDP has {expected}")
            }
            PolicyError::Unavailable { state, action } => {
                write!(f, "action {action} is not available in state {state}")
            }
            PolicyError::NotNormalized { state, sum } => write!(f, "distribution at state {state} sums to {sum}"),
        }
    }
}

impl core::error::Error for PolicyError {}

impl StationaryPolicy {
    pub fn new(m: &Mdp, dists: Vec<Vec<(ActionId, f64)>>) -> Result<Self, PolicyError> {
        if dists.len() != m.state_count() {
            return Err(PolicyError::WrongStateCount { expected: m.state_count(), found: dists.len() });
        }
        for (s, d) in dists.iter().enumerate() {
            for &(a, p) in d {
                if p > 0.0 && !m.is_available(s, a) {
                    return Err(PolicyError::Unavailable { state: s, action: a });
                }
            }
            let sum: f64 = d.iter().map(|&(_, p)| p).sum();
            if abs(sum - 1.0) > PROBABILITY_TOLERANCE || d.iter().any(|&(_, p)| p < 0.0) {
                return Err(PolicyError::NotNormalized { state: s, sum });
            }
        }
        Ok(StationaryPolicy { dists })
    }

    /// Deterministic policy choosing `actions[s]` in state `s`.
    pub fn deterministic(m: &Mdp, actions: &[ActionId]) -> Result<Self, PolicyError> {
        Self::new(m, actions.iter().map(|&a| vec![(a, 1.0)]).collect())
    }

    pub fn distribution(&self, s: StateId) -> &[(ActionId, f64)] {
        &self.dists[s]
    }

    pub fn probability(&self, s: StateId, a: ActionId) -> f64 {
        self.dists[s].iter().find(|&&(x, _)| x == a).map_or(0.0, |&(_, p)| p)
    }
}

/// `π(s, a) = 1 / |A(s)|` for every available action.
pub fn uniform_random_policy(m: &Mdp) -> StationaryPolicy {
    let dists = (0..m.state_count())
        .map(|s| {
            let n = m.choices(s).len() as f64;
            m.available(s).map(|a| (a, 1.0 / n)).collect()
        })
        .collect();
    StationaryPolicy { dists }
}

/// Draws an index from `weights` (which sum to one) using a uniform `u` in `[0, 1)`.
pub(crate) fn pick<T: Copy>(items: &[(T, f64)], u: f64) -> T {
    let mut acc = 0.0;
    for &(x, p) in items {
        acc += p;
        if u < acc {
            return x;
        }
    }
    items.iter().rev().find(|(_, p)| *p > 0.0).expect("empty distribution").0
}

/// Samples a `horizon`-step trajectory from the initial state.
pub fn sample_trajectory(m: &Mdp, policy: &StationaryPolicy, horizon: usize, seed: u64) -> Trajectory {
    sample_trajectory_with(m, policy, horizon, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn sample_trajectory_with<R: Rng + ?Sized>(m: &Mdp, policy: &StationaryPolicy, horizon: usize, rng: &mut R) -> Trajectory {
    let mut s = m.initial();
    let mut steps = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let a = pick(policy.distribution(s), rng.gen::<f64>());
        steps.push((s, a));
        let choice = m.choice(s, a).expect("policy picked an unavailable action");
        s = pick(&choice.successors, rng.gen::<f64>());
    }
    Trajectory { steps, final_state: s }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two states, `a` moves deterministically, `b` flips a coin.
    fn coin() -> Mdp {
        let ab = Alphabet::new(["h"]).unwrap();
        let mut b = MdpBuilder::new(ab);
        let t = b.add_state("tails", Valuation::EMPTY).unwrap();
        let h = b.add_state("heads", Valuation(1)).unwrap();
        b.add_transition(t, "flip", t, 0.5).unwrap();
        b.add_transition(t, "flip", h, 0.5).unwrap();
        b.add_transition(t, "stay", t, 1.0).unwrap();
        b.add_transition(h, "stay", h, 1.0).unwrap();
        b.set_initial(t);
        b.build().unwrap()
    }

    #[test]
    fn builder_validates() {
        let ab = Alphabet::new(["h"]).unwrap();
        let mut b = MdpBuilder::new(ab.clone());
        let s = b.add_state("s", Valuation::EMPTY).unwrap();
        assert!(matches!(b.add_state("s", Valuation::EMPTY), Err(MdpError::DuplicateState(_))));
        assert!(b.add_transition(s, "a", s, 1.5).is_err());
        b.add_transition(s, "a", s, 0.7).unwrap();
        b.set_initial(s);
        assert!(matches!(b.clone().build(), Err(MdpError::NotNormalized { .. })));

        let mut b = MdpBuilder::new(ab);
        b.add_state("s", Valuation::EMPTY).unwrap();
        b.set_initial(0);
        assert!(matches!(b.build(), Err(MdpError::NoActions { .. })));
    }

    #[test]
    fn action_ids_follow_first_appearance() {
        let ab = Alphabet::new(["h"]).unwrap();
        let mut b = MdpBuilder::new(ab);
        let x = b.add_state("x", Valuation::EMPTY).unwrap();
        let y = b.add_state("y", Valuation::EMPTY).unwrap();
        // added for y first, but x comes first in state order
        b.add_transition(y, "late", y, 1.0).unwrap();
        b.add_transition(x, "early", y, 1.0).unwrap();
        b.set_initial(x);
        let m = b.build().unwrap();
        assert_eq!(m.action_id("early"), Some(0));
        assert_eq!(m.action_id("late"), Some(1));
    }

    #[test]
    fn uniform_policy_splits_evenly() {
        let m = coin();
        let pi = uniform_random_policy(&m);
        assert_eq!(pi.distribution(0), &[(0, 0.5), (1, 0.5)]);
        assert_eq!(pi.distribution(1), &[(1, 1.0)]);
    }

    #[test]
    fn validation_reports_first_problem() {
        let m = coin();
        let ok = Trajectory { steps: vec![(0, 0), (1, 1)], final_state: 1 };
        assert_eq!(validate_trajectory(&m, &ok), Ok(()));
        let empty = Trajectory { steps: vec![], final_state: 0 };
        assert_eq!(validate_trajectory(&m, &empty), Ok(()));
        let bad = Trajectory { steps: vec![(0, 1), (0, 1)], final_state: 1 };
        assert_eq!(
            validate_trajectory(&m, &bad),
            Err(TrajectoryViolation { index: 1, reason: ViolationReason::ZeroProbability })
        );
        let unavailable = Trajectory { steps: vec![(0, 0), (1, 0)], final_state: 1 };
        assert_eq!(validate_trajectory(&m, &unavailable).unwrap_err().reason, ViolationReason::ActionUnavailable);
        let elsewhere = Trajectory { steps: vec![], final_state: 1 };
        assert_eq!(validate_trajectory(&m, &elsewhere).unwrap_err().reason, ViolationReason::NotInitial);
    }

    #[test]
    fn sampling_is_seeded_and_valid() {
        let m = coin();
        let pi = uniform_random_policy(&m);
        for seed in 0..50 {
            let a = sample_trajectory(&m, &pi, 12, seed);
            assert_eq!(a, sample_trajectory(&m, &pi, 12, seed));
            assert_eq!(a.len(), 12);
            assert_eq!(validate_trajectory(&m, &a), Ok(()));
        }
    }

    #[test]
    fn deterministic_policy_gives_unique_path() {
        let m = coin();
        let pi = StationaryPolicy::deterministic(&m, &[1, 1]).unwrap();
        let a = sample_trajectory(&m, &pi, 5, 1);
        let b = sample_trajectory(&m, &pi, 5, 99);
        assert_eq!(a, b);
        assert!(a.steps.iter().all(|&s| s == (0, 1)));
        assert!(StationaryPolicy::deterministic(&m, &[0, 0]).is_err());
    }

    #[test]
    fn empirical_frequencies_match() {
        let m = coin();
        let pi = StationaryPolicy::deterministic(&m, &[0, 1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (mut flips, mut heads) = (0usize, 0usize);
        while flips < 20_000 {
            let t = sample_trajectory_with(&m, &pi, 1, &mut rng);
            flips += 1;
            heads += usize::from(t.final_state == 1);
        }
        let p = heads as f64 / flips as f64;
        let se = (0.25f64 / flips as f64).sqrt();
        assert!((p - 0.5).abs() < 3.0 * se, "p = {p}");
    }
}
