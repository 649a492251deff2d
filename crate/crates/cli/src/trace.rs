//! Line-delimited JSON trace records.

use fairdiv::algorithms::{Group, PickPass, Trace, TraceEvent};
use fairdiv::envy::Cycle;
use fairdiv::{Allocation, Bundle};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TraceRecord {
    /// Certified one-item-per-agent matching; ranks use `c*eps^k` for
    /// infinitesimal and infinite weights.
    Matching { bundles: Vec<Vec<usize>>, ranks: Vec<String> },
    Groups { groups: Vec<String> },
    Pick { agent: usize, item: usize, pass: String },
    Rotate { cycle: Vec<usize> },
    SourcePick { agent: usize, item: usize },
    Check { name: String, passed: bool },
}

fn group_label(group: Group) -> &'static str {
    match group {
        Group::G1 => "G1",
        Group::G2 => "G2",
        Group::G3 => "G3",
    }
}

impl From<&TraceEvent> for TraceRecord {
    fn from(event: &TraceEvent) -> Self {
        match event {
            TraceEvent::MatchingDone { allocation, ranks } => TraceRecord::Matching {
                bundles: bundles_of(allocation),
                ranks: ranks.iter().map(ToString::to_string).collect(),
            },
            TraceEvent::GroupsAssigned { groups } => TraceRecord::Groups {
                groups: groups.membership().iter().map(|&g| group_label(g).to_string()).collect(),
            },
            TraceEvent::Pick { agent, item, pass } => TraceRecord::Pick {
                agent: *agent,
                item: *item,
                pass: pass.label().to_string(),
            },
            TraceEvent::CycleRotated { cycle } => TraceRecord::Rotate {
                cycle: cycle.agents().to_vec(),
            },
            TraceEvent::SourcePick { agent, item } => TraceRecord::SourcePick {
                agent: *agent,
                item: *item,
            },
            TraceEvent::InvariantChecked { name, passed } => TraceRecord::Check {
                name: name.clone(),
                passed: *passed,
            },
        }
    }
}

fn bundles_of(allocation: &Allocation) -> Vec<Vec<usize>> {
    allocation.bundles().iter().map(|b| b.iter().copied().collect()).collect()
}

pub fn render_trace(trace: &Trace) -> String {
    trace
        .events
        .iter()
        .map(|event| serde_json::to_string(&TraceRecord::from(event)).expect("trace records serialize") + "\n")
        .collect()
}

#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    #[error("trace line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("trace line {line}: {reason}")]
    Record { line: usize, reason: String },
    #[error(transparent)]
    Model(#[from] fairdiv::Error),
}

pub fn parse_trace(text: &str) -> Result<Vec<TraceRecord>, TraceError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| serde_json::from_str(l).map_err(|source| TraceError::Json { line: k + 1, source }))
        .collect()
}

/// Re-applies the recorded picks and rotations to the recorded matching.
pub fn replay(records: &[TraceRecord], item_count: usize) -> Result<Allocation, TraceError> {
    let mut trace = Trace::default();
    let mut agents = None;
    for (k, record) in records.iter().enumerate() {
        let bad = |reason: String| TraceError::Record { line: k + 1, reason };
        let event = match record {
            TraceRecord::Matching { bundles, .. } => {
                let bundles: Vec<Bundle> = bundles.iter().map(|b| b.iter().copied().collect()).collect();
                agents = Some(bundles.len());
                TraceEvent::MatchingDone {
                    allocation: Allocation::new(item_count, bundles)?,
                    ranks: Vec::new(),
                }
            }
            TraceRecord::Pick { agent, item, pass } => TraceEvent::Pick {
                agent: *agent,
                item: *item,
                pass: PickPass::from_label(pass).ok_or_else(|| bad(format!("unknown pass {pass:?}")))?,
            },
            TraceRecord::Rotate { cycle } => {
                let agents = agents.ok_or_else(|| bad("rotation before the matching".into()))?;
                TraceEvent::CycleRotated {
                    cycle: Cycle::new(cycle.clone(), agents)?,
                }
            }
            TraceRecord::SourcePick { agent, item } => TraceEvent::SourcePick {
                agent: *agent,
                item: *item,
            },
            TraceRecord::Groups { .. } | TraceRecord::Check { .. } => continue,
        };
        trace.push(event);
    }
    Ok(trace.replay()?)
}
