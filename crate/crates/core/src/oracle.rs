//! Exhaustive reference implementations for small instances.
//!
//! Nothing here calls into the matching, envy-rank or allocation pipeline;
//! results are obtained by plain enumeration so they can be used to check it.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::envy::{Cycle, EnvyRatioGraph, Weight};
use crate::matching::NswObjective;
use crate::model::{Allocation, Bundle, Factor, FairnessNotion, Instance};
use crate::rational::Rational;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_agents: usize,
    pub max_items: usize,
    pub max_allocations: u64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_agents: 7,
            max_items: 8,
            max_allocations: 2_000_000,
        }
    }
}

impl OracleLimits {
    fn check_agents(&self, agents: usize) -> Result<()> {
        if agents > self.max_agents {
            return Err(Error::LimitExceeded(format!(
                "{agents} agents (limit {})",
                self.max_agents
            )));
        }
        Ok(())
    }

    fn check_instance(&self, instance: &Instance) -> Result<()> {
        self.check_agents(instance.agent_count())?;
        if instance.item_count() > self.max_items {
            return Err(Error::LimitExceeded(format!(
                "{} items (limit {})",
                instance.item_count(),
                self.max_items
            )));
        }
        Ok(())
    }

    fn check_count(&self, count: Option<u64>) -> Result<()> {
        match count {
            Some(c) if c <= self.max_allocations => Ok(()),
            _ => Err(Error::LimitExceeded(format!(
                "more than {} candidates",
                self.max_allocations
            ))),
        }
    }
}

fn objective_of(values: impl Iterator<Item = Rational>) -> NswObjective {
    let mut positive_count = 0;
    let mut product = Rational::one();
    for v in values {
        if !v.is_zero() {
            positive_count += 1;
            product *= v;
        }
    }
    NswObjective {
        positive_count,
        product,
    }
}

/// Best one-item-per-agent assignment by enumeration; the witness maps each
/// agent to its item and is the lexicographically smallest maximiser.
pub fn oracle_nsw_matching(instance: &Instance, limits: &OracleLimits) -> Result<(NswObjective, Vec<usize>)> {
    limits.check_instance(instance)?;
    let (n, m) = (instance.agent_count(), instance.item_count());
    if m < n {
        return Err(Error::InstanceTooSmall { agents: n, items: m });
    }
    let count = (0..n as u64).try_fold(1u64, |acc, k| acc.checked_mul(m as u64 - k));
    limits.check_count(count)?;

    let mut best: Option<(NswObjective, Vec<usize>)> = None;
    let mut current = Vec::with_capacity(n);
    let mut used = vec![false; m];
    fn search(
        instance: &Instance,
        current: &mut Vec<usize>,
        used: &mut [bool],
        best: &mut Option<(NswObjective, Vec<usize>)>,
    ) {
        let agent = current.len();
        if agent == instance.agent_count() {
            let objective = objective_of(current.iter().enumerate().map(|(a, &b)| instance.value(a, b).clone()));
            if best.as_ref().is_none_or(|(o, _)| objective > *o) {
                *best = Some((objective, current.clone()));
            }
            return;
        }
        for item in 0..used.len() {
            if !used[item] {
                used[item] = true;
                current.push(item);
                search(instance, current, used, best);
                current.pop();
                used[item] = false;
            }
        }
    }
    search(instance, &mut current, &mut used, &mut best);
    Ok(best.expect("at least one assignment exists"))
}

/// Maximum-product simple cycle, returned only if its product exceeds 1.
pub fn oracle_improving_cycle(graph: &EnvyRatioGraph, limits: &OracleLimits) -> Result<Option<(Cycle, Weight)>> {
    let n = graph.agent_count();
    limits.check_agents(n)?;
    let mut best: Option<(Vec<usize>, Weight)> = None;
    fn extend(
        graph: &EnvyRatioGraph,
        path: &mut Vec<usize>,
        product: Weight,
        best: &mut Option<(Vec<usize>, Weight)>,
    ) {
        let start = path[0];
        let last = *path.last().unwrap();
        if path.len() >= 2 {
            let closed = &product * graph.weight(last, start);
            if best.as_ref().is_none_or(|(_, b)| closed > *b) {
                *best = Some((path.clone(), closed));
            }
        }
        for next in (start + 1)..graph.agent_count() {
            if !path.contains(&next) {
                let extended = &product * graph.weight(last, next);
                path.push(next);
                extend(graph, path, extended, best);
                path.pop();
            }
        }
    }
    for start in 0..n {
        extend(graph, &mut vec![start], Weight::one(), &mut best);
    }
    Ok(match best {
        Some((agents, product)) if product > Weight::one() => {
            Some((Cycle::new(agents, n)?, product))
        }
        _ => None,
    })
}

/// `max(1, max product over simple paths ending at agent)`.
pub fn oracle_envy_rank(graph: &EnvyRatioGraph, agent: usize, limits: &OracleLimits) -> Result<Weight> {
    let n = graph.agent_count();
    limits.check_agents(n)?;
    if agent >= n {
        return Err(Error::AgentOutOfRange(agent));
    }
    // Walk backwards from `agent` so every prefix is a simple path into it.
    fn extend(graph: &EnvyRatioGraph, path: &mut Vec<usize>, product: Weight, best: &mut Weight) {
        if product > *best {
            *best = product.clone();
        }
        let head = *path.last().unwrap();
        for prev in 0..graph.agent_count() {
            if !path.contains(&prev) {
                let extended = graph.weight(prev, head) * &product;
                path.push(prev);
                extend(graph, path, extended, best);
                path.pop();
            }
        }
    }
    let mut best = Weight::one();
    extend(graph, &mut vec![agent], Weight::one(), &mut best);
    Ok(best)
}

/// Mean of the observer's value over every single-item removal.
pub fn oracle_removal_expectation(instance: &Instance, observer: usize, bundle: &Bundle) -> Result<Rational> {
    if observer >= instance.agent_count() {
        return Err(Error::AgentOutOfRange(observer));
    }
    if let Some(&item) = bundle.iter().find(|&&b| b >= instance.item_count()) {
        return Err(Error::ItemOutOfRange(item));
    }
    if bundle.is_empty() {
        return Err(Error::EmptyBundle);
    }
    let total = removal_values(instance, observer, bundle)
        .fold(Rational::zero(), |acc, v| acc + v);
    Ok(total / Rational::from_integer(BigInt::from(bundle.len())))
}

/// Values of `bundle \ {b}` for each `b` in the bundle.
fn removal_values<'a>(instance: &'a Instance, observer: usize, bundle: &'a Bundle) -> impl Iterator<Item = Rational> + 'a {
    bundle.iter().map(move |&removed| {
        bundle
            .iter()
            .filter(|&&b| b != removed)
            .fold(Rational::zero(), |acc, &b| acc + instance.value(observer, b))
    })
}

/// Fairness factor by explicit removal enumeration.
pub fn oracle_fairness_factor(instance: &Instance, allocation: &Allocation, notion: FairnessNotion) -> Factor {
    let mut best: Option<Rational> = None;
    for i in instance.agents() {
        let own = allocation
            .bundle(i)
            .iter()
            .fold(Rational::zero(), |acc, &b| acc + instance.value(i, b));
        for j in instance.agents().filter(|&j| j != i) {
            let rival = allocation.bundle(j);
            let rhs = match notion {
                FairnessNotion::Ef => rival.iter().fold(Rational::zero(), |acc, &b| acc + instance.value(i, b)),
                _ if rival.is_empty() => Rational::zero(),
                FairnessNotion::Ef1 => removal_values(instance, i, rival).min().unwrap(),
                FairnessNotion::Efx => removal_values(instance, i, rival).max().unwrap(),
                FairnessNotion::Efr => oracle_removal_expectation(instance, i, rival).unwrap(),
            };
            if rhs.is_zero() {
                continue;
            }
            let ratio = &own / &rhs;
            if best.as_ref().is_none_or(|b| ratio < *b) {
                best = Some(ratio);
            }
        }
    }
    best.map_or(Factor::Unbounded, Factor::Finite)
}

fn complete_allocations(instance: &Instance, limits: &OracleLimits) -> Result<impl Iterator<Item = Allocation>> {
    let (n, m) = (instance.agent_count(), instance.item_count());
    let count = (n as u64).checked_pow(m as u32);
    limits.check_count(count)?;
    let total = count.unwrap();
    Ok((0..total).map(move |mut code| {
        let mut bundles = vec![Bundle::new(); n];
        for item in 0..m {
            bundles[(code % n as u64) as usize].insert(item);
            code /= n as u64;
        }
        Allocation::new(m, bundles).expect("each item placed once")
    }))
}

/// Best achievable fairness factor over all complete allocations.
pub fn oracle_best_factor(
    instance: &Instance,
    notion: FairnessNotion,
    limits: &OracleLimits,
) -> Result<(Factor, Allocation)> {
    let mut best: Option<(Factor, Allocation)> = None;
    for allocation in complete_allocations(instance, limits)? {
        let factor = oracle_fairness_factor(instance, &allocation, notion);
        if best.as_ref().is_none_or(|(f, _)| factor > *f) {
            best = Some((factor, allocation));
        }
    }
    Ok(best.expect("at least one allocation exists"))
}

/// All complete allocations maximising the Nash welfare objective.
pub fn oracle_nsw_allocations(instance: &Instance, limits: &OracleLimits) -> Result<(NswObjective, Vec<Allocation>)> {
    let mut best: Option<NswObjective> = None;
    let mut winners = Vec::new();
    for allocation in complete_allocations(instance, limits)? {
        let objective = objective_of(instance.agents().map(|a| {
            allocation
                .bundle(a)
                .iter()
                .fold(Rational::zero(), |acc, &b| acc + instance.value(a, b))
        }));
        match best.as_ref().map(|b| objective.cmp(b)) {
            Some(std::cmp::Ordering::Less) => {}
            Some(std::cmp::Ordering::Equal) => winners.push(allocation),
            _ => {
                best = Some(objective);
                winners = vec![allocation];
            }
        }
    }
    Ok((best.expect("at least one allocation exists"), winners))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envy::build_envy_ratio_graph;
    use crate::rational::{int, ratio};

    fn four() -> Instance {
        Instance::from_integers(&[[8, 2, 4, 3], [4, 2, 0, 2], [0, 3, 2, 2], [1, 6, 3, 9]]).unwrap()
    }

    fn small() -> Instance {
        Instance::from_integers(&[[3, 3, 1, 1, 1], [5, 5, 1, 4, 3]]).unwrap()
    }

    #[test]
    fn nsw_matching_examples() {
        let limits = OracleLimits::default();
        let (objective, witness) = oracle_nsw_matching(&four(), &limits).unwrap();
        assert_eq!(objective.product, int(432));
        assert_eq!(witness, vec![2, 0, 1, 3]);
        let (objective, witness) = oracle_nsw_matching(&Instance::from_integers(&[[5, 9]]).unwrap(), &limits).unwrap();
        assert_eq!(objective.product, int(9));
        assert_eq!(witness, vec![1]);
        let zeros = Instance::from_integers(&[[0, 0], [0, 0]]).unwrap();
        let (objective, _) = oracle_nsw_matching(&zeros, &limits).unwrap();
        assert_eq!(objective.positive_count, 0);
        assert_eq!(objective.product, int(1));
        let (objective, _) = oracle_nsw_matching(&small(), &limits).unwrap();
        assert_eq!(objective.product, int(15));
    }

    #[test]
    fn improving_cycle_examples() {
        let limits = OracleLimits::default();
        let identity = Allocation::from_bundles(4, &[vec![0], vec![1], vec![2], vec![3]]).unwrap();
        let graph = build_envy_ratio_graph(&four(), &identity).unwrap();
        let (cycle, product) = oracle_improving_cycle(&graph, &limits).unwrap().unwrap();
        assert_eq!(cycle.agents(), &[0, 2, 1]);
        assert_eq!(product, Weight::finite(ratio(3, 2)));
        let improved = Allocation::from_bundles(4, &[vec![2], vec![0], vec![1], vec![3]]).unwrap();
        let graph = build_envy_ratio_graph(&four(), &improved).unwrap();
        assert_eq!(oracle_improving_cycle(&graph, &limits).unwrap(), None);
        let single = Instance::from_integers(&[[1]]).unwrap();
        let alloc = Allocation::from_bundles(1, &[vec![0]]).unwrap();
        let graph = build_envy_ratio_graph(&single, &alloc).unwrap();
        assert_eq!(oracle_improving_cycle(&graph, &limits).unwrap(), None);
    }

    #[test]
    fn envy_rank_examples() {
        let limits = OracleLimits::default();
        let identity = Allocation::from_bundles(4, &[vec![0], vec![1], vec![2], vec![3]]).unwrap();
        let graph = build_envy_ratio_graph(&four(), &identity).unwrap();
        assert_eq!(oracle_envy_rank(&graph, 0, &limits).unwrap(), Weight::finite(int(3)));
        let improved = Allocation::from_bundles(4, &[vec![2], vec![0], vec![1], vec![3]]).unwrap();
        let graph = build_envy_ratio_graph(&four(), &improved).unwrap();
        assert_eq!(oracle_envy_rank(&graph, 1, &limits).unwrap(), Weight::finite(int(2)));
        let flat = Instance::from_integers(&[[5, 1], [1, 5]]).unwrap();
        let alloc = Allocation::from_bundles(2, &[vec![0], vec![1]]).unwrap();
        let graph = build_envy_ratio_graph(&flat, &alloc).unwrap();
        assert_eq!(oracle_envy_rank(&graph, 0, &limits).unwrap(), Weight::one());
    }

    #[test]
    fn removal_expectation_examples() {
        let inst = small();
        assert_eq!(oracle_removal_expectation(&inst, 1, &Bundle::from([0, 1, 2])).unwrap(), ratio(22, 3));
        assert_eq!(oracle_removal_expectation(&inst, 1, &Bundle::from([3])).unwrap(), int(0));
        assert_eq!(oracle_removal_expectation(&inst, 1, &Bundle::new()), Err(Error::EmptyBundle));
        let pair = Instance::from_integers(&[[4, 2]]).unwrap();
        assert_eq!(oracle_removal_expectation(&pair, 0, &Bundle::from([0, 1])).unwrap(), int(3));
    }

    #[test]
    fn best_factor_examples() {
        let limits = OracleLimits::default();
        let (objective, winners) = oracle_nsw_allocations(&small(), &limits).unwrap();
        assert_eq!(objective.product, int(49));
        assert_eq!(winners, vec![Allocation::from_bundles(5, &[vec![0, 1, 2], vec![3, 4]]).unwrap()]);
        assert_eq!(
            oracle_fairness_factor(&small(), &winners[0], FairnessNotion::Efr),
            Factor::Finite(ratio(21, 22))
        );

        let one = Instance::from_integers(&[[1, 2, 3]]).unwrap();
        let (factor, alloc) = oracle_best_factor(&one, FairnessNotion::Efr, &limits).unwrap();
        assert_eq!(factor, Factor::Unbounded);
        assert!(alloc.is_complete());

        let twin = Instance::from_integers(&[[1, 1], [1, 1]]).unwrap();
        let (factor, alloc) = oracle_best_factor(&twin, FairnessNotion::Ef, &limits).unwrap();
        assert_eq!(factor, Factor::Finite(int(1)));
        assert!(alloc.bundles().iter().all(|b| b.len() == 1));
    }

    #[test]
    fn limits_enforced() {
        let limits = OracleLimits::default();
        let big = Instance::from_integers(&vec![vec![1; 8]; 8]).unwrap();
        assert!(matches!(oracle_nsw_matching(&big, &limits), Err(Error::LimitExceeded(_))));
        let wide = Instance::from_integers(&vec![vec![1; 30]; 3]).unwrap();
        assert!(matches!(
            oracle_best_factor(&wide, FairnessNotion::Ef, &limits),
            Err(Error::LimitExceeded(_))
        ));
    }
}
