//! Instances, allocations and exact fairness factors.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::rational::{Rational, Threshold};
use crate::{Error, Result};

pub type Bundle = BTreeSet<usize>;

/// Additive valuation profile: `valuations[agent][item]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    valuations: Vec<Vec<Rational>>,
    item_count: usize,
}

impl Instance {
    pub fn new(valuations: Vec<Vec<Rational>>) -> Result<Self> {
        let agents = valuations.len();
        let items = valuations.first().map_or(0, Vec::len);
        if agents == 0 || items == 0 {
            return Err(Error::EmptyInstance);
        }
        if valuations.iter().any(|row| row.len() != items) {
            return Err(Error::DimensionMismatch { agents, items });
        }
        for (agent, row) in valuations.iter().enumerate() {
            for (item, value) in row.iter().enumerate() {
                if value.is_negative() {
                    return Err(Error::NegativeValuation {
                        agent,
                        item,
                        value: value.to_string(),
                    });
                }
            }
        }
        Ok(Self {
            valuations,
            item_count: items,
        })
    }

    pub fn from_integers<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        Self::new(
            rows.iter()
                .map(|row| {
                    row.as_ref()
                        .iter()
                        .map(|&v| Rational::from_integer(BigInt::from(v)))
                        .collect()
                })
                .collect(),
        )
    }

    pub fn agent_count(&self) -> usize {
        self.valuations.len()
    }

    pub fn item_count(&self) -> usize {
        self.item_count
    }

    pub fn valuations(&self) -> &[Vec<Rational>] {
        &self.valuations
    }

    /// Value of a single item. Panics on out-of-range indices.
    pub fn value(&self, agent: usize, item: usize) -> &Rational {
        &self.valuations[agent][item]
    }

    pub fn agents(&self) -> std::ops::Range<usize> {
        0..self.agent_count()
    }

    pub(crate) fn check_agent(&self, agent: usize) -> Result<()> {
        if agent < self.agent_count() {
            Ok(())
        } else {
            Err(Error::AgentOutOfRange(agent))
        }
    }

    pub(crate) fn check_bundle(&self, bundle: &Bundle) -> Result<()> {
        match bundle.iter().find(|&&item| item >= self.item_count) {
            Some(&item) => Err(Error::ItemOutOfRange(item)),
            None => Ok(()),
        }
    }

    /// Unchecked additive value; indices must already be validated.
    pub(crate) fn value_of(&self, agent: usize, bundle: &Bundle) -> Rational {
        let row = &self.valuations[agent];
        bundle
            .iter()
            .fold(Rational::zero(), |acc, &item| acc + &row[item])
    }
}

/// `v_agent(bundle)`, the sum of the agent's item values.
pub fn bundle_value(instance: &Instance, agent: usize, bundle: &Bundle) -> Result<Rational> {
    instance.check_agent(agent)?;
    instance.check_bundle(bundle)?;
    Ok(instance.value_of(agent, bundle))
}

/// Expected value of `bundle` to `observer` after removing one uniformly random
/// item: `(k − 1)/k · v(bundle)` for `k = |bundle|`, and 0 for empty bundles.
pub fn removal_expectation(instance: &Instance, observer: usize, bundle: &Bundle) -> Result<Rational> {
    instance.check_agent(observer)?;
    instance.check_bundle(bundle)?;
    Ok(expected_after_removal(instance, observer, bundle))
}

pub(crate) fn expected_after_removal(instance: &Instance, observer: usize, bundle: &Bundle) -> Rational {
    let k = bundle.len();
    if k <= 1 {
        return Rational::zero();
    }
    let k = BigInt::from(k);
    instance.value_of(observer, bundle) * Rational::new(&k - 1, k)
}

/// Bundles for each agent over a fixed item set; unassigned items form the pool.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Allocation {
    item_count: usize,
    bundles: Vec<Bundle>,
}

impl Allocation {
    pub fn new(item_count: usize, bundles: Vec<Bundle>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for bundle in &bundles {
            for &item in bundle {
                if item >= item_count {
                    return Err(Error::ItemOutOfRange(item));
                }
                if !seen.insert(item) {
                    return Err(Error::MalformedAllocation(format!(
                        "item {item} assigned to more than one agent"
                    )));
                }
            }
        }
        Ok(Self { item_count, bundles })
    }

    pub fn from_bundles<B: AsRef<[usize]>>(item_count: usize, bundles: &[B]) -> Result<Self> {
        Self::new(
            item_count,
            bundles
                .iter()
                .map(|b| b.as_ref().iter().copied().collect())
                .collect(),
        )
    }

    pub fn empty(agent_count: usize, item_count: usize) -> Self {
        Self {
            item_count,
            bundles: vec![Bundle::new(); agent_count],
        }
    }

    pub fn agent_count(&self) -> usize {
        self.bundles.len()
    }

    pub fn item_count(&self) -> usize {
        self.item_count
    }

    pub fn bundles(&self) -> &[Bundle] {
        &self.bundles
    }

    pub fn bundle(&self, agent: usize) -> &Bundle {
        &self.bundles[agent]
    }

    pub fn remaining(&self) -> Bundle {
        let mut pool: Bundle = (0..self.item_count).collect();
        for bundle in &self.bundles {
            for item in bundle {
                pool.remove(item);
            }
        }
        pool
    }

    pub fn is_complete(&self) -> bool {
        self.bundles.iter().map(BTreeSet::len).sum::<usize>() == self.item_count
    }

    /// Checks that the allocation has the instance's shape.
    pub fn validate_for(&self, instance: &Instance) -> Result<()> {
        if self.agent_count() != instance.agent_count() {
            return Err(Error::MalformedAllocation(format!(
                "{} bundles for {} agents",
                self.agent_count(),
                instance.agent_count()
            )));
        }
        if self.item_count != instance.item_count() {
            return Err(Error::MalformedAllocation(format!(
                "allocation over {} items, instance has {}",
                self.item_count,
                instance.item_count()
            )));
        }
        Ok(())
    }

    /// Moves a pooled item into an agent's bundle.
    pub(crate) fn assign(&mut self, agent: usize, item: usize) {
        debug_assert!(item < self.item_count);
        debug_assert!(self.bundles.iter().all(|b| !b.contains(&item)));
        self.bundles[agent].insert(item);
    }

    pub(crate) fn bundles_mut(&mut self) -> &mut [Bundle] {
        &mut self.bundles
    }
}

impl fmt::Display for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for (agent, bundle) in self.bundles.iter().enumerate() {
            if agent > 0 {
                f.write_str(", ")?;
            }
            f.write_str("{")?;
            for (k, item) in bundle.iter().enumerate() {
                if k > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{item}")?;
            }
            f.write_str("}")?;
        }
        f.write_str(">")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FairnessNotion {
    Ef,
    Ef1,
    Efx,
    Efr,
}

impl FairnessNotion {
    pub const ALL: [FairnessNotion; 4] = [Self::Ef, Self::Ef1, Self::Efx, Self::Efr];

    pub fn name(self) -> &'static str {
        match self {
            Self::Ef => "ef",
            Self::Ef1 => "ef1",
            Self::Efx => "efx",
            Self::Efr => "efr",
        }
    }
}

impl fmt::Display for FairnessNotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name().to_uppercase())
    }
}

impl std::str::FromStr for FairnessNotion {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|n| n.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown fairness notion {s:?}"))
    }
}

/// Approximation factor; `Unbounded` sorts above every finite value.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Factor {
    Finite(Rational),
    Unbounded,
}

impl Factor {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Factor::Finite(f) => Some(f),
            Factor::Unbounded => None,
        }
    }

    pub fn meets(&self, threshold: &Threshold) -> bool {
        match self {
            Factor::Unbounded => true,
            Factor::Finite(f) => threshold.is_met_by(f),
        }
    }
}

impl PartialOrd for Factor {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Factor {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Factor::Unbounded, Factor::Unbounded) => Ordering::Equal,
            (Factor::Unbounded, _) => Ordering::Greater,
            (_, Factor::Unbounded) => Ordering::Less,
            (Factor::Finite(a), Factor::Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::Finite(v) => write!(f, "{v}"),
            Factor::Unbounded => f.write_str("unbounded"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FairnessReport {
    pub notion: FairnessNotion,
    pub factor: Factor,
    /// `(envier, envied)` pair attaining the factor.
    pub witness: Option<(usize, usize)>,
}

/// Right-hand side `D_ij` of agent `i`'s constraint against bundle `rival`.
pub(crate) fn rival_value(instance: &Instance, agent: usize, rival: &Bundle, notion: FairnessNotion) -> Rational {
    let row = &instance.valuations()[agent];
    match notion {
        FairnessNotion::Ef => instance.value_of(agent, rival),
        FairnessNotion::Ef1 => match rival.iter().map(|&b| &row[b]).max() {
            Some(best) => instance.value_of(agent, rival) - best,
            None => Rational::zero(),
        },
        FairnessNotion::Efx => match rival.iter().map(|&b| &row[b]).min() {
            Some(worst) => instance.value_of(agent, rival) - worst,
            None => Rational::zero(),
        },
        FairnessNotion::Efr => expected_after_removal(instance, agent, rival),
    }
}

/// Largest `c` such that the allocation is `c`-approximately fair under `notion`.
pub fn fairness_factor(instance: &Instance, allocation: &Allocation, notion: FairnessNotion) -> Result<FairnessReport> {
    allocation.validate_for(instance)?;
    let mut best: Option<(Rational, (usize, usize))> = None;
    for i in instance.agents() {
        let own = instance.value_of(i, allocation.bundle(i));
        for j in instance.agents().filter(|&j| j != i) {
            let rhs = rival_value(instance, i, allocation.bundle(j), notion);
            if rhs.is_zero() {
                continue;
            }
            let ratio = &own / &rhs;
            if best.as_ref().is_none_or(|(b, _)| ratio < *b) {
                best = Some((ratio, (i, j)));
            }
        }
    }
    Ok(match best {
        Some((factor, pair)) => FairnessReport {
            notion,
            factor: Factor::Finite(factor),
            witness: Some(pair),
        },
        None => FairnessReport {
            notion,
            factor: Factor::Unbounded,
            witness: None,
        },
    })
}

pub fn meets_threshold(report: &FairnessReport, threshold: &Threshold) -> bool {
    report.factor.meets(threshold)
}

/// Checks `v_i(A_i) ≥ c · D_ij` for every envier selected by `enviers` and
/// every other agent `j`; returns the first violating pair.
pub(crate) fn first_violation(
    instance: &Instance,
    allocation: &Allocation,
    notion: FairnessNotion,
    threshold: &Threshold,
    mut enviers: impl FnMut(usize) -> bool,
) -> Option<(usize, usize)> {
    for i in instance.agents().filter(|&i| enviers(i)) {
        let own = instance.value_of(i, allocation.bundle(i));
        for j in instance.agents().filter(|&j| j != i) {
            let rhs = rival_value(instance, i, allocation.bundle(j), notion);
            if !threshold.admits(&own, &rhs) {
                return Some((i, j));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn small() -> Instance {
        Instance::from_integers(&[[3, 3, 1, 1, 1], [5, 5, 1, 4, 3]]).unwrap()
    }

    fn set(items: &[usize]) -> Bundle {
        items.iter().copied().collect()
    }

    #[test]
    fn bundle_values() {
        let inst = small();
        assert_eq!(bundle_value(&inst, 0, &set(&[0, 1, 2])).unwrap(), int(7));
        assert_eq!(bundle_value(&inst, 1, &set(&[0, 1, 2])).unwrap(), int(11));
        assert_eq!(bundle_value(&inst, 0, &Bundle::new()).unwrap(), int(0));
        assert_eq!(bundle_value(&inst, 2, &Bundle::new()), Err(Error::AgentOutOfRange(2)));
        assert_eq!(bundle_value(&inst, 0, &set(&[5])), Err(Error::ItemOutOfRange(5)));
    }

    #[test]
    fn removal_expectations() {
        let inst = small();
        assert_eq!(removal_expectation(&inst, 1, &set(&[0, 1, 2])).unwrap(), ratio(22, 3));
        assert_eq!(removal_expectation(&inst, 1, &set(&[3])).unwrap(), int(0));
        assert_eq!(removal_expectation(&inst, 1, &Bundle::new()).unwrap(), int(0));
        let pair = Instance::from_integers(&[[4, 2]]).unwrap();
        assert_eq!(removal_expectation(&pair, 0, &set(&[0, 1])).unwrap(), int(3));
    }

    #[test]
    fn example_factors() {
        let inst = small();
        let alloc = Allocation::from_bundles(5, &[vec![0, 1, 2], vec![3, 4]]).unwrap();
        let efr = fairness_factor(&inst, &alloc, FairnessNotion::Efr).unwrap();
        assert_eq!(efr.factor, Factor::Finite(ratio(21, 22)));
        assert_eq!(efr.witness, Some((1, 0)));
        let ef1 = fairness_factor(&inst, &alloc, FairnessNotion::Ef1).unwrap();
        assert_eq!(ef1.factor, Factor::Finite(ratio(7, 6)));
        assert_eq!(ef1.witness, Some((1, 0)));
        assert!(!meets_threshold(&efr, &Threshold::Rational(int(1))));
        assert!(meets_threshold(&efr, &Threshold::SqrtThreeMinusOne));
    }

    #[test]
    fn singleton_bundles_are_efx() {
        let inst = Instance::from_integers(&[[1, 9, 4], [7, 7, 7], [0, 3, 2]]).unwrap();
        let alloc = Allocation::from_bundles(3, &[vec![2], vec![0], vec![1]]).unwrap();
        let report = fairness_factor(&inst, &alloc, FairnessNotion::Efx).unwrap();
        assert_eq!(report.factor, Factor::Unbounded);
        assert_eq!(report.witness, None);
    }

    #[test]
    fn malformed_allocations() {
        assert!(matches!(
            Allocation::from_bundles(3, &[vec![0, 1], vec![1]]),
            Err(Error::MalformedAllocation(_))
        ));
        assert_eq!(Allocation::from_bundles(3, &[vec![3]]), Err(Error::ItemOutOfRange(3)));
        let inst = small();
        let wrong = Allocation::from_bundles(5, &[vec![0]]).unwrap();
        assert!(fairness_factor(&inst, &wrong, FairnessNotion::Ef).is_err());
    }

    #[test]
    fn instance_validation() {
        assert_eq!(Instance::new(vec![]), Err(Error::EmptyInstance));
        assert!(matches!(
            Instance::from_integers(&[vec![1, 2], vec![3]]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            Instance::from_integers(&[[1, -2]]),
            Err(Error::NegativeValuation { agent: 0, item: 1, .. })
        ));
    }

    #[test]
    fn remaining_pool() {
        let alloc = Allocation::from_bundles(5, &[vec![0, 4], vec![2]]).unwrap();
        assert_eq!(alloc.remaining(), set(&[1, 3]));
        assert!(!alloc.is_complete());
        assert_eq!(alloc.to_string(), "<{0,4}, {2}>");
    }
}
