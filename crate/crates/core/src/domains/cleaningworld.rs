//! A vacuum robot cleaning a room on a limited battery.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::ltl::{Alphabet, Valuation};
use crate::mdp::{Mdp, MdpBuilder};

pub const CLEANING_ACTIONS: [&str; 5] = ["vacuum", "dock", "undock", "wait", "beDead"];
pub const CLEANING_PROPOSITIONS: [&str; 7] = ["batteryDead", "roomClean", "vacuum", "dock", "undock", "wait", "beDead"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CleaningState {
    pub dirt: u32,
    pub battery: u32,
    pub docked: bool,
    /// Index into [`CLEANING_ACTIONS`] of the action that led here.
    pub last: Option<usize>,
}

impl CleaningState {
    pub fn name(&self) -> String {
        let last = self.last.map_or("none", |a| CLEANING_ACTIONS[a]);
        let dock = if self.docked { "docked" } else { "undocked" };
        format!("({},{},{dock},{last})", self.dirt, self.battery)
    }

    fn label(&self) -> Valuation {
        let mut v = Valuation::EMPTY;
        if self.battery == 0 {
            v = v.with(0);
        }
        if self.dirt == 0 {
            v = v.with(1);
        }
        if let Some(a) = self.last {
            v = v.with(2 + a);
        }
        v
    }

    /// Available actions in [`CLEANING_ACTIONS`] order, each with its successor.
    fn moves(&self, capacity: u32) -> Vec<(usize, CleaningState)> {
        let s = *self;
        let go = |a: usize, next: CleaningState| (a, CleaningState { last: Some(a), ..next });
        if s.docked {
            return [go(2, CleaningState { docked: false, ..s }), go(3, CleaningState { battery: capacity, ..s })].into();
        }
        if s.battery == 0 {
            return [go(4, s)].into();
        }
        let drained = CleaningState { battery: s.battery - 1, ..s };
        [
            go(0, CleaningState { dirt: s.dirt.saturating_sub(1), ..drained }),
            go(1, CleaningState { docked: true, ..s }),
            go(3, drained),
        ]
        .into()
    }
}

/// Deterministic CleaningWorld over the states reachable from
/// `(dirt, battery, undocked, none)`, numbered breadth-first.
pub fn cleaningworld(dirt: u32, battery: u32, capacity: u32) -> Mdp {
    assert!(battery <= capacity, "battery exceeds capacity");
    let alphabet = Alphabet::new(CLEANING_PROPOSITIONS).expect("valid alphabet");
    let start = CleaningState { dirt, battery, docked: false, last: None };
    let mut ids = BTreeMap::new();
    let mut order = Vec::new();
    let mut queue = VecDeque::from([start]);
    ids.insert(start, 0usize);
    while let Some(s) = queue.pop_front() {
        order.push(s);
        for (_, t) in s.moves(capacity) {
            if !ids.contains_key(&t) {
                ids.insert(t, ids.len());
                queue.push_back(t);
            }
        }
    }
    let mut b = MdpBuilder::new(alphabet);
    for s in &order {
        b.add_state(s.name(), s.label()).expect("distinct states have distinct names");
    }
    for (i, s) in order.iter().enumerate() {
        for (a, t) in s.moves(capacity) {
            b.add_transition(i, CLEANING_ACTIONS[a], ids[&t], 1.0).expect("valid");
        }
    }
    b.set_initial(0);
    b.build().expect("well-formed")
}
