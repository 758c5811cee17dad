//! JSON encodings of MDPs and demonstration sets.

use std::fs;
use std::path::Path;

use indexmap::IndexMap;
use ltlinfer_core::ltl::{Alphabet, Valuation};
use ltlinfer_core::mdp::{validate_trajectory, Mdp, MdpBuilder, Trajectory};
use serde::{Deserialize, Serialize};

use crate::InputError;

/// Sums further than this from 1 are rejected; closer ones are rescaled.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MdpFile {
    pub propositions: Vec<String>,
    pub states: Vec<StateEntry>,
    pub initial: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateEntry {
    pub name: String,
    pub labels: Vec<String>,
    pub actions: IndexMap<String, IndexMap<String, f64>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryFile {
    pub trajectories: Vec<TrajectoryEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryEntry {
    pub steps: Vec<StepEntry>,
    #[serde(rename = "final")]
    pub final_state: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepEntry {
    pub state: String,
    pub action: String,
}

impl MdpFile {
    pub fn from_mdp(m: &Mdp) -> Self {
        let ab = m.alphabet();
        let states = (0..m.state_count())
            .map(|s| StateEntry {
                name: m.state_name(s).to_string(),
                labels: ab.names_in(m.label(s)).map(str::to_string).collect(),
                actions: m
                    .choices(s)
                    .iter()
                    .map(|c| {
                        let succ = c.successors.iter().map(|&(t, p)| (m.state_name(t).to_string(), p)).collect();
                        (m.action_name(c.action).to_string(), succ)
                    })
                    .collect(),
            })
            .collect();
        MdpFile {
            propositions: ab.names().to_vec(),
            states,
            initial: m.state_name(m.initial()).to_string(),
        }
    }

    /// Builds the model, rescaling distributions whose sums are within
    /// [`NORMALIZATION_TOLERANCE`] of 1.
    pub fn to_mdp(&self) -> Result<Mdp, InputError> {
        let ab = Alphabet::new(self.propositions.iter().map(String::as_str))
            .map_err(|e| InputError::Invalid(format!("propositions: {e}")))?;
        let mut b = MdpBuilder::new(ab.clone());
        for st in &self.states {
            let label: Valuation =
                ab.valuation(st.labels.iter().map(String::as_str)).map_err(|e| InputError::Invalid(format!("state `{}`: unknown proposition `{e}`", st.name)))?;
            b.add_state(st.name.clone(), label).map_err(|e| InputError::Invalid(e.to_string()))?;
        }
        let lookup = |b: &MdpBuilder, name: &str| b.state_id(name).ok_or_else(|| InputError::UnknownState(name.to_string()));
        for st in &self.states {
            let s = lookup(&b, &st.name)?;
            for (action, succ) in &st.actions {
                let total: f64 = succ.values().sum();
                if succ.values().any(|p| !p.is_finite() || *p < 0.0) {
                    return Err(InputError::Invalid(format!("state `{}`, action `{action}`: bad probability", st.name)));
                }
                if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
                    return Err(InputError::Invalid(format!(
                        "state `{}`, action `{action}`: probabilities sum to {total}",
                        st.name
                    )));
                }
                if total != 1.0 {
                    log::warn!("state `{}`, action `{action}`: rescaling probabilities summing to {total}", st.name);
                }
                for (target, p) in succ {
                    let t = lookup(&b, target)?;
                    b.add_transition(s, action, t, p / total).map_err(|e| InputError::Invalid(e.to_string()))?;
                }
            }
        }
        let init = lookup(&b, &self.initial)?;
        b.set_initial(init);
        b.build().map_err(|e| InputError::Invalid(e.to_string()))
    }
}

impl TrajectoryFile {
    pub fn from_trajectories(m: &Mdp, demos: &[Trajectory]) -> Self {
        let trajectories = demos
            .iter()
            .map(|t| TrajectoryEntry {
                steps: t
                    .steps
                    .iter()
                    .map(|&(s, a)| StepEntry { state: m.state_name(s).to_string(), action: m.action_name(a).to_string() })
                    .collect(),
                final_state: m.state_name(t.final_state).to_string(),
            })
            .collect();
        TrajectoryFile { trajectories }
    }

    /// Resolves names against `m` and checks every trajectory is feasible.
    pub fn to_trajectories(&self, m: &Mdp) -> Result<Vec<Trajectory>, InputError> {
        let state = |name: &str| m.state_id(name).ok_or_else(|| InputError::UnknownState(name.to_string()));
        self.trajectories
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let steps = t
                    .steps
                    .iter()
                    .map(|st| {
                        let s = state(&st.state)?;
                        let a = m.action_id(&st.action).ok_or_else(|| InputError::UnknownAction(st.action.clone()))?;
                        Ok((s, a))
                    })
                    .collect::<Result<Vec<_>, InputError>>()?;
                let tau = Trajectory { steps, final_state: state(&t.final_state)? };
                validate_trajectory(m, &tau).map_err(|e| InputError::Invalid(format!("trajectory {i}: {e}")))?;
                Ok(tau)
            })
            .collect()
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, InputError> {
    let text = fs::read_to_string(path).map_err(|e| InputError::Io(path.display().to_string(), e))?;
    serde_json::from_str(&text).map_err(|e| InputError::Json(path.display().to_string(), e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}

pub fn load_mdp(path: &Path) -> Result<Mdp, InputError> {
    read_json::<MdpFile>(path)?.to_mdp()
}

pub fn load_trajectories(path: &Path, m: &Mdp) -> Result<Vec<Trajectory>, InputError> {
    read_json::<TrajectoryFile>(path)?.to_trajectories(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ltlinfer_core::domains::{cleaningworld, slimchance};

    #[test]
    fn mdp_round_trip() {
        for m in [slimchance(0.01), cleaningworld(3, 2, 2)] {
            let file = MdpFile::from_mdp(&m);
            let text = serde_json::to_string(&file).unwrap();
            let back: MdpFile = serde_json::from_str(&text).unwrap();
            assert_eq!(back, file);
            let m2 = back.to_mdp().unwrap();
            assert_eq!(MdpFile::from_mdp(&m2), file);
            assert_eq!(m2.state_count(), m.state_count());
            for s in 0..m.state_count() {
                assert_eq!(m2.choices(s), m.choices(s));
                assert_eq!(m2.label(s), m.label(s));
            }
        }
    }

    #[test]
    fn near_normalized_sums_are_rescaled() {
        let mut file = MdpFile::from_mdp(&slimchance(0.25));
        for p in file.states[0].actions[0].values_mut() {
            *p *= 1.0 + 5e-7;
        }
        let m = file.to_mdp().unwrap();
        let total: f64 = m.choices(0)[0].successors.iter().map(|&(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
        for p in file.states[0].actions[0].values_mut() {
            *p *= 1.1;
        }
        assert!(matches!(file.to_mdp(), Err(InputError::Invalid(_))));
    }

    #[test]
    fn unknown_names_are_rejected() {
        let m = slimchance(0.01);
        let mut file = MdpFile::from_mdp(&m);
        file.initial = "nowhere".into();
        assert!(matches!(file.to_mdp(), Err(InputError::UnknownState(_))));
        let demos = TrajectoryFile {
            trajectories: vec![TrajectoryEntry {
                steps: vec![StepEntry { state: "s_BAD".into(), action: "jump".into() }],
                final_state: "s_BAD".into(),
            }],
        };
        assert!(matches!(demos.to_trajectories(&m), Err(InputError::UnknownAction(_))));
    }

    #[test]
    fn infeasible_trajectory_is_rejected() {
        let m = slimchance(0.01);
        let demos = TrajectoryFile {
            trajectories: vec![TrajectoryEntry {
                steps: vec![StepEntry { state: "s_BAD".into(), action: "notry".into() }],
                final_state: "s_GOOD".into(),
            }],
        };
        assert!(matches!(demos.to_trajectories(&m), Err(InputError::Invalid(_))));
    }
}
