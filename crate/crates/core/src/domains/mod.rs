//! Benchmark MDPs and a violation-cost-minimizing demonstrator.

mod cleaningworld;
mod planner;

use alloc::string::String;

pub use cleaningworld::{cleaningworld, CleaningState, CLEANING_ACTIONS, CLEANING_PROPOSITIONS};
pub use planner::{generate_demos, plan_demonstrator, DemonstratorPolicy, PlanError};

use crate::ltl::{Alphabet, Valuation};
use crate::mdp::{Mdp, MdpBuilder};

/// Parameters of a built-in domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DomainSpec {
    SlimChance { epsilon: f64 },
    CleaningWorld { dirt: u32, battery: u32, capacity: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DomainError(pub String);

impl core::fmt::Display for DomainError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(&self.0)
    }
}

impl core::error::Error for DomainError {}

impl DomainSpec {
    pub fn build(&self) -> Result<Mdp, DomainError> {
        match *self {
            DomainSpec::SlimChance { epsilon } => {
                if !(epsilon > 0.0 && epsilon < 1.0) {
                    return Err(DomainError(alloc::format!("epsilon {epsilon} is outside (0, 1)")));
                }
                Ok(slimchance(epsilon))
            }
            DomainSpec::CleaningWorld { dirt, battery, capacity } => {
                if battery > capacity {
                    return Err(DomainError(alloc::format!("battery {battery} exceeds capacity {capacity}")));
                }
                Ok(cleaningworld(dirt, battery, capacity))
            }
        }
    }
}

/// Two states, `s_GOOD` (labeled `good`) and `s_BAD`. `try` reaches `s_GOOD`
/// with probability `epsilon`, `notry` always reaches `s_BAD`. Starts in `s_BAD`.
pub fn slimchance(epsilon: f64) -> Mdp {
    assert!(epsilon > 0.0 && epsilon < 1.0, "epsilon must lie in (0, 1)");
    let mut b = MdpBuilder::new(Alphabet::new(["good"]).expect("valid alphabet"));
    let good = b.add_state("s_GOOD", Valuation(1)).expect("fresh");
    let bad = b.add_state("s_BAD", Valuation::EMPTY).expect("fresh");
    for s in [good, bad] {
        b.add_transition(s, "try", good, epsilon).expect("valid");
        b.add_transition(s, "try", bad, 1.0 - epsilon).expect("valid");
        b.add_transition(s, "notry", bad, 1.0).expect("valid");
    }
    b.set_initial(bad);
    b.build().expect("well-formed")
}
