//! Exact runtime checks of the guarantees each step is supposed to establish.

use std::cmp::Ordering;

use num_traits::{One, Zero};

use crate::matching::{certificate_failure, CertificateFailure};
use crate::model::{fairness_factor, first_violation, Allocation, Factor, FairnessNotion, Instance};
use crate::rational::{int, ratio, QuadraticSurd, Rational, Threshold};
use crate::Result;

use super::{AgentGroups, Group, Mode};

/// Outcome of one named check; `Err` carries a human-readable reason.
pub(crate) type Check = std::result::Result<(), String>;

pub(crate) fn matching_certificate(instance: &Instance, allocation: &Allocation) -> Result<Check> {
    Ok(match certificate_failure(instance, allocation)? {
        None => Ok(()),
        Some(CertificateFailure::ImprovingCycle(cycle)) => Err(format!("improving cycle {cycle}")),
        Some(CertificateFailure::RemainingItemTooValuable { agent, item }) => {
            Err(format!("agent {agent} values remaining item {item} above own/rank"))
        }
    })
}

/// Pairwise fairness per envier group after refinement.
pub(crate) fn refinement_fairness(instance: &Instance, allocation: &Allocation, groups: &AgentGroups) -> Check {
    let requirements: Vec<(Group, FairnessNotion, Threshold)> = match groups.mode() {
        Mode::Efr => vec![
            (Group::G1, FairnessNotion::Efr, Threshold::Rational(Rational::one())),
            (Group::G2, FairnessNotion::Efr, Threshold::Rational(ratio(3, 4))),
            // 2 / (√3 + 1) = √3 − 1
            (Group::G3, FairnessNotion::Efr, Threshold::SqrtThreeMinusOne),
        ],
        Mode::Efx => vec![
            (Group::G1, FairnessNotion::Efx, Threshold::Rational(Rational::one())),
            (Group::G2, FairnessNotion::Efx, Threshold::GoldenRatioMinusOne),
        ],
    };
    for (group, notion, threshold) in requirements {
        if let Some((i, j)) = first_violation(instance, allocation, notion, &threshold, |a| groups.group(a) == group) {
            return Err(format!(
                "{notion} below {threshold} for envier {i} ({group:?}) against {j}"
            ));
        }
    }
    Ok(())
}

/// Upper bounds on remaining items relative to own value after refinement.
pub(crate) fn refinement_remaining(instance: &Instance, allocation: &Allocation, groups: &AgentGroups) -> Check {
    let pool = allocation.remaining();
    for agent in instance.agents() {
        let own = instance.value_of(agent, allocation.bundle(agent));
        // own ≥ scale · v(b)
        let scale = match (groups.mode(), groups.group(agent)) {
            (Mode::Efr, Group::G1) => QuadraticSurd::sqrt3_plus_one(),
            (Mode::Efr, _) => QuadraticSurd::new(int(3), Rational::zero(), 1),
            (Mode::Efx, Group::G1) => QuadraticSurd::golden_ratio(),
            (Mode::Efx, _) => QuadraticSurd::new(int(2), Rational::zero(), 1),
        };
        for &item in &pool {
            if scale.cmp_scaled(&own, instance.value(agent, item)) == Ordering::Less {
                return Err(format!(
                    "agent {agent} values remaining item {item} above own/({scale})"
                ));
            }
        }
    }
    Ok(())
}

pub(crate) fn bundle_shape(allocation: &Allocation, groups: &AgentGroups) -> Check {
    for (agent, bundle) in allocation.bundles().iter().enumerate() {
        let expected = match (groups.mode(), groups.group(agent)) {
            (_, Group::G1) => 1,
            (_, Group::G2) => 2,
            (Mode::Efr, Group::G3) => 3,
            (Mode::Efx, Group::G3) => unreachable!("EFX uses two groups"),
        };
        if bundle.len() != expected {
            return Err(format!("agent {agent} holds {} items, expected {expected}", bundle.len()));
        }
    }
    Ok(())
}

/// The guarantee carried through envy-cycle elimination: starting from a
/// state that is `α`-fair with every remaining item worth at most `α′` of
/// each agent's own bundle, every later state is `min(α, 1/(1+α′))`-fair.
#[derive(Debug, Clone)]
pub(crate) struct EliminationBound {
    notion: FairnessNotion,
    bound: Rational,
    target: Threshold,
}

impl EliminationBound {
    pub(crate) fn new(instance: &Instance, allocation: &Allocation, mode: Mode) -> Result<Self> {
        let notion = mode.notion();
        let alpha = fairness_factor(instance, allocation, notion)?.factor;
        let pool = allocation.remaining();
        let mut alpha_prime: Option<Rational> = Some(Rational::zero());
        for agent in instance.agents() {
            let own = instance.value_of(agent, allocation.bundle(agent));
            for &item in &pool {
                let value = instance.value(agent, item);
                if value.is_zero() {
                    continue;
                }
                if own.is_zero() {
                    alpha_prime = None;
                    continue;
                }
                let r = value / &own;
                if let Some(current) = alpha_prime.as_mut() {
                    if r > *current {
                        *current = r;
                    }
                }
            }
        }
        // α′ unbounded leaves only the trivial bound 0.
        let step = alpha_prime.map_or(Rational::zero(), |a| Rational::one() / (Rational::one() + a));
        let bound = match alpha {
            Factor::Unbounded => step,
            Factor::Finite(a) => a.min(step),
        };
        Ok(Self {
            notion,
            bound,
            target: mode.guarantee(),
        })
    }

    pub(crate) fn check(&self, instance: &Instance, allocation: &Allocation) -> Result<Check> {
        let factor = fairness_factor(instance, allocation, self.notion)?.factor;
        if let Factor::Finite(f) = &factor {
            if *f < self.bound {
                return Ok(Err(format!("factor {f} fell below elimination bound {}", self.bound)));
            }
        }
        if !factor.meets(&self.target) {
            return Ok(Err(format!("factor {factor} below {}", self.target)));
        }
        Ok(Ok(()))
    }
}
