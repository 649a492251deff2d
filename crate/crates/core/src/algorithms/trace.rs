use std::fmt;

use crate::envy::{rotate_bundles, Cycle, Weight};
use crate::model::Allocation;
use crate::{Error, Result};

use super::AgentGroups;

/// Which refinement pass produced a pick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PickPass {
    /// First pick of the three-item group (EFR).
    ThirdGroupFirst,
    /// Second pick of the three-item group (EFR).
    ThirdGroupSecond,
    /// The single pick of the two-item group (EFR and EFX).
    SecondGroup,
}

impl PickPass {
    pub fn label(self) -> &'static str {
        match self {
            PickPass::ThirdGroupFirst => "g3-first",
            PickPass::ThirdGroupSecond => "g3-second",
            PickPass::SecondGroup => "g2",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        [Self::ThirdGroupFirst, Self::ThirdGroupSecond, Self::SecondGroup]
            .into_iter()
            .find(|p| p.label() == label)
    }
}

impl fmt::Display for PickPass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceEvent {
    MatchingDone { allocation: Allocation, ranks: Vec<Weight> },
    GroupsAssigned { groups: AgentGroups },
    Pick { agent: usize, item: usize, pass: PickPass },
    CycleRotated { cycle: Cycle },
    SourcePick { agent: usize, item: usize },
    InvariantChecked { name: String, passed: bool },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
}

impl Trace {
    pub fn push(&mut self, event: TraceEvent) {
        self.events.push(event);
    }

    pub fn invariant_checks(&self) -> impl Iterator<Item = (&str, bool)> {
        self.events.iter().filter_map(|e| match e {
            TraceEvent::InvariantChecked { name, passed } => Some((name.as_str(), *passed)),
            _ => None,
        })
    }

    /// Re-applies every pick and rotation to the recorded matching.
    pub fn replay(&self) -> Result<Allocation> {
        let mut current: Option<Allocation> = None;
        for event in &self.events {
            match event {
                TraceEvent::MatchingDone { allocation, .. } => current = Some(allocation.clone()),
                TraceEvent::Pick { agent, item, .. } | TraceEvent::SourcePick { agent, item } => {
                    let alloc = current.as_mut().ok_or_else(no_matching)?;
                    if *agent >= alloc.agent_count() {
                        return Err(Error::AgentOutOfRange(*agent));
                    }
                    if !alloc.remaining().contains(item) {
                        return Err(Error::MalformedAllocation(format!(
                            "replayed pick of unavailable item {item}"
                        )));
                    }
                    alloc.assign(*agent, *item);
                }
                TraceEvent::CycleRotated { cycle } => {
                    let alloc = current.as_ref().ok_or_else(no_matching)?;
                    current = Some(rotate_bundles(alloc, cycle)?);
                }
                TraceEvent::GroupsAssigned { .. } | TraceEvent::InvariantChecked { .. } => {}
            }
        }
        current.ok_or_else(no_matching)
    }
}

fn no_matching() -> Error {
    Error::MalformedAllocation("trace has no matching event".into())
}
