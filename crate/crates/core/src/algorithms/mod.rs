//! The two three-step allocation algorithms.
//!
//! Both start from a certified Nash social welfare matching and split the
//! agents into groups by envy-rank. Step 2 hands extra items to the groups
//! with small envy-rank in topological order of the envy graph. Step 3
//! finishes with envy-cycle elimination.
//!
//! * [`solve_efr`]: groups split at `√3 + 1` and `2`; the output is
//!   `(√3 − 1)`-EFR.
//! * [`solve_efx`]: groups split at the golden ratio `φ`; the output is
//!   `(φ − 1)`-EFX.

mod checks;
mod trace;

use std::cmp::Ordering;

use crate::envy::{find_envy_cycle, rotate_bundles, strict_envy_edges, topological_order, EnvyRanks, Weight};
use crate::matching::nsw_matching;
use crate::model::{fairness_factor, Allocation, FairnessNotion, FairnessReport, Instance};
use crate::rational::{int, QuadraticSurd, Threshold};
use crate::{Error, Result};

use checks::{Check, EliminationBound};
pub use trace::{PickPass, Trace, TraceEvent};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Efr,
    Efx,
}

impl Mode {
    pub fn notion(self) -> FairnessNotion {
        match self {
            Mode::Efr => FairnessNotion::Efr,
            Mode::Efx => FairnessNotion::Efx,
        }
    }

    /// Worst-case factor the algorithm guarantees.
    pub fn guarantee(self) -> Threshold {
        match self {
            Mode::Efr => Threshold::SqrtThreeMinusOne,
            Mode::Efx => Threshold::GoldenRatioMinusOne,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Group {
    G1,
    G2,
    G3,
}

/// Envy-rank groups: EFR uses all three, EFX only `G1` and `G2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentGroups {
    mode: Mode,
    membership: Vec<Group>,
}

impl AgentGroups {
    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn group(&self, agent: usize) -> Group {
        self.membership[agent]
    }

    pub fn membership(&self) -> &[Group] {
        &self.membership
    }

    pub fn members(&self, group: Group) -> Vec<usize> {
        (0..self.membership.len())
            .filter(|&a| self.membership[a] == group)
            .collect()
    }
}

fn exceeds(rank: &Weight, boundary: &QuadraticSurd) -> bool {
    match rank.as_finite() {
        Some(r) => boundary.cmp_rational(r) == Ordering::Greater,
        None => rank.is_infinite(),
    }
}

/// EFR: `G1` iff `r > √3 + 1`, `G2` iff `2 < r ≤ √3 + 1`, `G3` iff `r ≤ 2`.
/// EFX: `G1` iff `r > φ`, else `G2`. Infinite ranks land in `G1`.
pub fn partition_groups(ranks: &EnvyRanks, mode: Mode) -> AgentGroups {
    let two = QuadraticSurd::new(int(2), int(0), 1);
    let membership = ranks
        .ranks()
        .iter()
        .map(|rank| match mode {
            Mode::Efr if exceeds(rank, &QuadraticSurd::sqrt3_plus_one()) => Group::G1,
            Mode::Efr if exceeds(rank, &two) => Group::G2,
            Mode::Efr => Group::G3,
            Mode::Efx if exceeds(rank, &QuadraticSurd::golden_ratio()) => Group::G1,
            Mode::Efx => Group::G2,
        })
        .collect();
    AgentGroups { mode, membership }
}

/// Most valuable pooled item for `agent`, smallest index on ties.
fn best_remaining(instance: &Instance, allocation: &Allocation, agent: usize) -> Option<usize> {
    let mut best: Option<usize> = None;
    for item in allocation.remaining() {
        if best.is_none_or(|b| instance.value(agent, item) > instance.value(agent, b)) {
            best = Some(item);
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Refinement {
    pub allocation: Allocation,
    pub events: Vec<TraceEvent>,
    /// True if some scheduled pick found the pool empty.
    pub pool_exhausted: bool,
}

/// Step 2: agents outside `G1` pick their favourite remaining items in
/// `order`. EFR runs two passes over `G3` then one over `G2`; EFX one pass
/// over `G2`.
pub fn refine_step2(
    instance: &Instance,
    allocation: &Allocation,
    groups: &AgentGroups,
    order: &[usize],
) -> Result<Refinement> {
    allocation.validate_for(instance)?;
    let passes: &[(Group, PickPass)] = match groups.mode() {
        Mode::Efr => &[
            (Group::G3, PickPass::ThirdGroupFirst),
            (Group::G3, PickPass::ThirdGroupSecond),
            (Group::G2, PickPass::SecondGroup),
        ],
        Mode::Efx => &[(Group::G2, PickPass::SecondGroup)],
    };
    let mut allocation = allocation.clone();
    let mut events = Vec::new();
    let mut pool_exhausted = false;
    for &(group, pass) in passes {
        for &agent in order.iter().filter(|&&a| groups.group(a) == group) {
            match best_remaining(instance, &allocation, agent) {
                Some(item) => {
                    allocation.assign(agent, item);
                    events.push(TraceEvent::Pick { agent, item, pass });
                }
                None => pool_exhausted = true,
            }
        }
    }
    Ok(Refinement {
        allocation,
        events,
        pool_exhausted,
    })
}

/// Smallest-index agent nobody strictly envies.
fn unenvied_agent(instance: &Instance, allocation: &Allocation) -> Option<usize> {
    let edges = strict_envy_edges(instance, allocation);
    instance
        .agents()
        .find(|&a| !edges.iter().any(|&(_, envied)| envied == a))
}

fn eliminate(
    instance: &Instance,
    allocation: &Allocation,
    mut after_step: impl FnMut(&Allocation, &mut Vec<TraceEvent>) -> Result<()>,
) -> Result<(Allocation, Vec<TraceEvent>)> {
    allocation.validate_for(instance)?;
    let mut allocation = allocation.clone();
    let mut events = Vec::new();
    while !allocation.remaining().is_empty() {
        while let Some(cycle) = find_envy_cycle(instance, &allocation)? {
            allocation = rotate_bundles(&allocation, &cycle)?;
            events.push(TraceEvent::CycleRotated { cycle });
            after_step(&allocation, &mut events)?;
        }
        let agent = unenvied_agent(instance, &allocation)
            .ok_or_else(|| Error::InternalGuaranteeViolated("acyclic envy graph without a source".into()))?;
        let item = best_remaining(instance, &allocation, agent).expect("pool is non-empty");
        allocation.assign(agent, item);
        events.push(TraceEvent::SourcePick { agent, item });
        after_step(&allocation, &mut events)?;
    }
    Ok((allocation, events))
}

/// Step 3: rotate bundles along strict-envy cycles until the envy graph is
/// acyclic, then let the smallest unenvied agent take its favourite remaining
/// item; repeat until the pool is empty.
pub fn envy_cycle_elimination(instance: &Instance, allocation: &Allocation) -> Result<(Allocation, Vec<TraceEvent>)> {
    eliminate(instance, allocation, |_, _| Ok(()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    /// Run the exact mid-run invariant checks and record them in the trace.
    pub check_invariants: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            check_invariants: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub allocation: Allocation,
    pub trace: Trace,
    pub groups: AgentGroups,
    pub report: FairnessReport,
}

fn record(trace: &mut Vec<TraceEvent>, name: &str, outcome: Check) -> Result<()> {
    trace.push(TraceEvent::InvariantChecked {
        name: name.to_string(),
        passed: outcome.is_ok(),
    });
    outcome.map_err(|reason| Error::InternalGuaranteeViolated(format!("{name}: {reason}")))
}

pub fn solve(instance: &Instance, mode: Mode, options: SolveOptions) -> Result<Solution> {
    let checking = options.check_invariants;
    let mut events = Vec::new();

    let matching = nsw_matching(instance)?;
    events.push(TraceEvent::MatchingDone {
        allocation: matching.allocation.clone(),
        ranks: matching.ranks.ranks().to_vec(),
    });
    if checking {
        let outcome = checks::matching_certificate(instance, &matching.allocation)?;
        record(&mut events, "matching-certificate", outcome)?;
    }

    let groups = partition_groups(&matching.ranks, mode);
    events.push(TraceEvent::GroupsAssigned { groups: groups.clone() });

    let order = topological_order(
        instance.agent_count(),
        &strict_envy_edges(instance, &matching.allocation),
    )
    .map_err(|_| Error::InternalGuaranteeViolated("envy graph of the matching is cyclic".into()))?;
    let refined = refine_step2(instance, &matching.allocation, &groups, &order)?;
    events.extend(refined.events);
    let refined_allocation = refined.allocation;
    if checking {
        record(
            &mut events,
            "refinement-fairness",
            checks::refinement_fairness(instance, &refined_allocation, &groups),
        )?;
        record(
            &mut events,
            "refinement-remaining-bounds",
            checks::refinement_remaining(instance, &refined_allocation, &groups),
        )?;
        if !refined.pool_exhausted {
            record(
                &mut events,
                "refinement-bundle-sizes",
                checks::bundle_shape(&refined_allocation, &groups),
            )?;
        }
    }

    let bound = if checking {
        Some(EliminationBound::new(instance, &refined_allocation, mode)?)
    } else {
        None
    };
    let (allocation, elimination_events) = eliminate(instance, &refined_allocation, |current, log| {
        if let Some(bound) = &bound {
            let outcome = bound.check(instance, current)?;
            record(log, "elimination-bound", outcome)?;
        }
        Ok(())
    })?;
    events.extend(elimination_events);

    if !allocation.is_complete() {
        return Err(Error::InternalGuaranteeViolated("final allocation is incomplete".into()));
    }
    let report = fairness_factor(instance, &allocation, mode.notion())?;
    let guarantee = mode.guarantee();
    let met = report.factor.meets(&guarantee);
    if checking {
        events.push(TraceEvent::InvariantChecked {
            name: "final-guarantee".into(),
            passed: met,
        });
    }
    if !met {
        return Err(Error::InternalGuaranteeViolated(format!(
            "final {} factor {} below {guarantee}",
            mode.notion(),
            report.factor
        )));
    }
    Ok(Solution {
        allocation,
        trace: Trace { events },
        groups,
        report,
    })
}

/// Complete allocation that is `(√3 − 1)`-EFR.
pub fn solve_efr(instance: &Instance) -> Result<(Allocation, Trace)> {
    solve(instance, Mode::Efr, SolveOptions::default()).map(|s| (s.allocation, s.trace))
}

/// Complete allocation that is `(φ − 1)`-EFX.
pub fn solve_efx(instance: &Instance) -> Result<(Allocation, Trace)> {
    solve(instance, Mode::Efx, SolveOptions::default()).map(|s| (s.allocation, s.trace))
}
