//! Envy-ratio graphs, envy-ranks and envy-cycle manipulation.
//!
//! A zero value is treated as an infinitesimal `ε`, so every edge weight is a
//! positive monomial `coeff · ε^order`. An order of 0 is an ordinary positive
//! ratio, a positive order reads as 0 and a negative order as `+∞`. Products
//! of these weights compare exactly like the lexicographic objective "number
//! of agents with positive value, then product of positive values", which is
//! what makes improving cycles and envy-ranks well defined with zeros.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::ops::Mul;

use num_traits::{One, Zero};

use crate::model::{Allocation, Instance};
use crate::rational::Rational;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Weight {
    order: i32,
    coeff: Rational,
}

/// Real-valued reading of a [`Weight`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Extended {
    Finite(Rational),
    Infinite,
}

impl Weight {
    pub fn one() -> Self {
        Self::finite(Rational::one())
    }

    /// Panics unless `value > 0`.
    pub fn finite(value: Rational) -> Self {
        assert!(value > Rational::zero(), "weight coefficients must be positive");
        Self {
            order: 0,
            coeff: value,
        }
    }

    pub fn monomial(coeff: Rational, order: i32) -> Self {
        assert!(coeff > Rational::zero(), "weight coefficients must be positive");
        Self { order, coeff }
    }

    /// Lifts a non-negative value: positive values stay, zero becomes `ε`.
    pub fn lift(value: &Rational) -> Self {
        if value.is_zero() {
            Self {
                order: 1,
                coeff: Rational::one(),
            }
        } else {
            Self::finite(value.clone())
        }
    }

    pub fn ratio(numer: &Rational, denom: &Rational) -> Self {
        let n = Self::lift(numer);
        let d = Self::lift(denom);
        Self {
            order: n.order - d.order,
            coeff: n.coeff / d.coeff,
        }
    }

    pub fn order(&self) -> i32 {
        self.order
    }

    pub fn coeff(&self) -> &Rational {
        &self.coeff
    }

    pub fn is_infinite(&self) -> bool {
        self.order < 0
    }

    pub fn extended(&self) -> Extended {
        match self.order.cmp(&0) {
            Ordering::Less => Extended::Infinite,
            Ordering::Equal => Extended::Finite(self.coeff.clone()),
            Ordering::Greater => Extended::Finite(Rational::zero()),
        }
    }

    /// Finite value when the order is 0.
    pub fn as_finite(&self) -> Option<&Rational> {
        (self.order == 0).then_some(&self.coeff)
    }

    pub fn is_above_one(&self) -> bool {
        *self > Self::one()
    }
}

impl Ord for Weight {
    fn cmp(&self, other: &Self) -> Ordering {
        // smaller order = larger magnitude
        other
            .order
            .cmp(&self.order)
            .then_with(|| self.coeff.cmp(&other.coeff))
    }
}

impl PartialOrd for Weight {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Mul for &Weight {
    type Output = Weight;

    fn mul(self, rhs: &Weight) -> Weight {
        Weight {
            order: self.order + rhs.order,
            coeff: &self.coeff * &rhs.coeff,
        }
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.order == 0 {
            write!(f, "{}", self.coeff)
        } else {
            write!(f, "{}*eps^{}", self.coeff, self.order)
        }
    }
}

/// Complete digraph with `w[i][j] = v_i(A_j) / v_i(A_i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvyRatioGraph {
    weights: Vec<Vec<Option<Weight>>>,
}

impl EnvyRatioGraph {
    /// Builds a graph from an explicit off-diagonal weight table; diagonal
    /// entries of `table` are ignored.
    pub fn from_table(table: Vec<Vec<Weight>>) -> Result<Self> {
        let n = table.len();
        if table.iter().any(|row| row.len() != n) {
            return Err(Error::DimensionMismatch { agents: n, items: n });
        }
        let weights = table
            .into_iter()
            .enumerate()
            .map(|(i, row)| {
                row.into_iter()
                    .enumerate()
                    .map(|(j, w)| (i != j).then_some(w))
                    .collect()
            })
            .collect();
        Ok(Self { weights })
    }

    pub fn agent_count(&self) -> usize {
        self.weights.len()
    }

    /// Weight of edge `i → j`; panics if `i == j`.
    pub fn weight(&self, i: usize, j: usize) -> &Weight {
        self.weights[i][j].as_ref().expect("no self loops in envy-ratio graph")
    }

    fn edges(&self) -> impl Iterator<Item = (usize, usize, &Weight)> + '_ {
        self.weights.iter().enumerate().flat_map(|(i, row)| {
            row.iter()
                .enumerate()
                .filter_map(move |(j, w)| w.as_ref().map(|w| (i, j, w)))
        })
    }

    pub fn path_product(&self, path: &[usize]) -> Weight {
        path.windows(2)
            .fold(Weight::one(), |acc, e| &acc * self.weight(e[0], e[1]))
    }

    pub fn cycle_product(&self, cycle: &Cycle) -> Weight {
        let agents = cycle.agents();
        (0..agents.len()).fold(Weight::one(), |acc, k| {
            &acc * self.weight(agents[k], agents[(k + 1) % agents.len()])
        })
    }
}

pub fn build_envy_ratio_graph(instance: &Instance, allocation: &Allocation) -> Result<EnvyRatioGraph> {
    allocation.validate_for(instance)?;
    let n = instance.agent_count();
    let weights = (0..n)
        .map(|i| {
            let own = instance.value_of(i, allocation.bundle(i));
            (0..n)
                .map(|j| {
                    (i != j).then(|| Weight::ratio(&instance.value_of(i, allocation.bundle(j)), &own))
                })
                .collect()
        })
        .collect();
    Ok(EnvyRatioGraph { weights })
}

/// Edges with weight strictly above 1.
pub fn envy_edges(graph: &EnvyRatioGraph) -> BTreeSet<(usize, usize)> {
    graph
        .edges()
        .filter(|(_, _, w)| w.is_above_one())
        .map(|(i, j, _)| (i, j))
        .collect()
}

/// Directed cycle of at least two distinct agents, read cyclically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cycle(Vec<usize>);

impl Cycle {
    pub fn new(agents: Vec<usize>, agent_count: usize) -> Result<Self> {
        if agents.len() < 2 {
            return Err(Error::MalformedCycle("fewer than two agents".into()));
        }
        if let Some(&a) = agents.iter().find(|&&a| a >= agent_count) {
            return Err(Error::AgentOutOfRange(a));
        }
        let distinct: BTreeSet<_> = agents.iter().collect();
        if distinct.len() != agents.len() {
            return Err(Error::MalformedCycle("repeated agent".into()));
        }
        Ok(Self(agents))
    }

    pub fn agents(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The same cycle rotated so that its smallest agent comes first.
    pub fn canonical(&self) -> Cycle {
        let start = (0..self.0.len()).min_by_key(|&k| self.0[k]).unwrap_or(0);
        let mut agents = self.0[start..].to_vec();
        agents.extend_from_slice(&self.0[..start]);
        Cycle(agents)
    }
}

impl fmt::Display for Cycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "({})", parts.join(" -> "))
    }
}

/// Max-product relaxation state, every vertex starting from the empty path.
struct Relaxation {
    best: Vec<Weight>,
    pred: Vec<Option<usize>>,
}

impl Relaxation {
    fn new(n: usize) -> Self {
        Self {
            best: vec![Weight::one(); n],
            pred: vec![None; n],
        }
    }

    /// One in-place round; returns the last vertex whose value improved.
    fn round(&mut self, graph: &EnvyRatioGraph) -> Option<usize> {
        let mut changed = None;
        for (u, v, w) in graph.edges() {
            let candidate = &self.best[u] * w;
            if candidate > self.best[v] {
                self.best[v] = candidate;
                self.pred[v] = Some(u);
                changed = Some(v);
            }
        }
        changed
    }

    fn cycle_through(&self, start: usize) -> Vec<usize> {
        let n = self.best.len();
        let mut v = start;
        for _ in 0..n {
            v = self.pred[v].expect("improved vertex has a predecessor");
        }
        let anchor = v;
        let mut reversed = vec![anchor];
        let mut u = self.pred[anchor].expect("cycle vertex has a predecessor");
        while u != anchor {
            reversed.push(u);
            u = self.pred[u].expect("cycle vertex has a predecessor");
        }
        reversed.reverse();
        reversed
    }
}

/// Some cycle whose weight product exceeds 1, if one exists.
pub fn find_improving_cycle(graph: &EnvyRatioGraph) -> Option<Cycle> {
    let n = graph.agent_count();
    if n < 2 {
        return None;
    }
    let mut relax = Relaxation::new(n);
    let mut last = None;
    for _ in 0..n {
        last = relax.round(graph);
        last?;
    }
    let agents = relax.cycle_through(last?);
    let cycle = Cycle(agents);
    debug_assert!(graph.cycle_product(&cycle).is_above_one());
    Some(cycle)
}

/// Per-agent envy-ranks with the maximising paths that realise them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvyRanks {
    ranks: Vec<Weight>,
    pred: Vec<Option<usize>>,
}

impl EnvyRanks {
    pub fn ranks(&self) -> &[Weight] {
        &self.ranks
    }

    pub fn rank(&self, agent: usize) -> &Weight {
        &self.ranks[agent]
    }

    /// Agents of a maximum-product simple path ending at `agent`, in edge order.
    /// A single-element path means the empty path (rank 1).
    pub fn best_path(&self, agent: usize) -> Vec<usize> {
        let mut path = vec![agent];
        let mut v = agent;
        while let Some(u) = self.pred[v] {
            if path.contains(&u) {
                break;
            }
            path.push(u);
            v = u;
        }
        path.reverse();
        path
    }
}

/// `r_i = max(1, max product over simple paths ending at i)`; requires a
/// graph without improving cycles.
pub fn envy_ranks(graph: &EnvyRatioGraph) -> Result<EnvyRanks> {
    let n = graph.agent_count();
    let mut relax = Relaxation::new(n);
    for _ in 1..n {
        if relax.round(graph).is_none() {
            break;
        }
    }
    if relax.round(graph).is_some() {
        return Err(Error::ImprovingCycleExists);
    }
    Ok(EnvyRanks {
        ranks: relax.best,
        pred: relax.pred,
    })
}

/// Kahn ordering with the smallest available source emitted first.
pub fn topological_order(agent_count: usize, edges: &BTreeSet<(usize, usize)>) -> Result<Vec<usize>> {
    let mut indegree = vec![0usize; agent_count];
    let mut successors = vec![Vec::new(); agent_count];
    for &(i, j) in edges {
        if i >= agent_count {
            return Err(Error::AgentOutOfRange(i));
        }
        if j >= agent_count {
            return Err(Error::AgentOutOfRange(j));
        }
        successors[i].push(j);
        indegree[j] += 1;
    }
    let mut ready: BTreeSet<usize> = (0..agent_count).filter(|&v| indegree[v] == 0).collect();
    let mut order = Vec::with_capacity(agent_count);
    while let Some(v) = ready.pop_first() {
        order.push(v);
        for &w in &successors[v] {
            indegree[w] -= 1;
            if indegree[w] == 0 {
                ready.insert(w);
            }
        }
    }
    if order.len() == agent_count {
        Ok(order)
    } else {
        Err(Error::CyclicEnvyGraph)
    }
}

/// Pairs `(i, j)` with `v_i(A_i) < v_i(A_j)`.
pub fn strict_envy_edges(instance: &Instance, allocation: &Allocation) -> BTreeSet<(usize, usize)> {
    let n = instance.agent_count();
    let mut edges = BTreeSet::new();
    for i in 0..n {
        let own = instance.value_of(i, allocation.bundle(i));
        for j in (0..n).filter(|&j| j != i) {
            if own < instance.value_of(i, allocation.bundle(j)) {
                edges.insert((i, j));
            }
        }
    }
    edges
}

/// A directed cycle of strict envy, found by depth-first search from the
/// smallest agent index.
pub fn find_envy_cycle(instance: &Instance, allocation: &Allocation) -> Result<Option<Cycle>> {
    allocation.validate_for(instance)?;
    let n = instance.agent_count();
    let mut successors = vec![Vec::new(); n];
    for (i, j) in strict_envy_edges(instance, allocation) {
        successors[i].push(j);
    }
    Ok(cycle_in(&successors).map(Cycle))
}

fn cycle_in(successors: &[Vec<usize>]) -> Option<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Unseen,
        OnStack,
        Done,
    }
    let n = successors.len();
    let mut mark = vec![Mark::Unseen; n];
    for root in 0..n {
        if mark[root] != Mark::Unseen {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        mark[root] = Mark::OnStack;
        while let Some(top) = stack.last_mut() {
            let (v, next) = *top;
            if let Some(&w) = successors[v].get(next) {
                top.1 += 1;
                match mark[w] {
                    Mark::Unseen => {
                        mark[w] = Mark::OnStack;
                        stack.push((w, 0));
                    }
                    Mark::OnStack => {
                        let start = stack.iter().position(|&(u, _)| u == w).unwrap();
                        return Some(stack[start..].iter().map(|&(u, _)| u).collect());
                    }
                    Mark::Done => {}
                }
            } else {
                mark[v] = Mark::Done;
                stack.pop();
            }
        }
    }
    None
}

/// Each agent on the cycle receives its successor's bundle.
pub fn rotate_bundles(allocation: &Allocation, cycle: &Cycle) -> Result<Allocation> {
    let checked = Cycle::new(cycle.agents().to_vec(), allocation.agent_count())?;
    let mut rotated = allocation.clone();
    let agents = checked.agents();
    let bundles = rotated.bundles_mut();
    for (k, &agent) in agents.iter().enumerate() {
        let next = agents[(k + 1) % agents.len()];
        bundles[agent] = allocation.bundle(next).clone();
    }
    Ok(rotated)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn four() -> Instance {
        Instance::from_integers(&[[8, 2, 4, 3], [4, 2, 0, 2], [0, 3, 2, 2], [1, 6, 3, 9]]).unwrap()
    }

    fn identity() -> Allocation {
        Allocation::from_bundles(4, &[vec![0], vec![1], vec![2], vec![3]]).unwrap()
    }

    fn improved() -> Allocation {
        Allocation::from_bundles(4, &[vec![2], vec![0], vec![1], vec![3]]).unwrap()
    }

    #[test]
    fn example_weights() {
        let g = build_envy_ratio_graph(&four(), &identity()).unwrap();
        assert_eq!(g.weight(2, 1).extended(), Extended::Finite(ratio(3, 2)));
        assert_eq!(g.weight(1, 0).extended(), Extended::Finite(int(2)));
        assert_eq!(g.weight(1, 2).extended(), Extended::Finite(int(0)));
        assert_eq!(g.weight(0, 2).extended(), Extended::Finite(ratio(1, 2)));
    }

    #[test]
    fn equal_values_give_unit_weight() {
        let inst = Instance::from_integers(&[[2, 2], [2, 2]]).unwrap();
        let alloc = Allocation::from_bundles(2, &[vec![0], vec![1]]).unwrap();
        let g = build_envy_ratio_graph(&inst, &alloc).unwrap();
        assert_eq!(*g.weight(0, 1), Weight::one());
        assert!(envy_edges(&g).is_empty());
    }

    #[test]
    fn zero_conventions() {
        let inst = Instance::from_integers(&[[0, 5], [0, 0]]).unwrap();
        let alloc = Allocation::from_bundles(2, &[vec![0], vec![1]]).unwrap();
        let g = build_envy_ratio_graph(&inst, &alloc).unwrap();
        assert_eq!(g.weight(0, 1).extended(), Extended::Infinite);
        assert_eq!(*g.weight(1, 0), Weight::one());
        assert_eq!(envy_edges(&g), BTreeSet::from([(0, 1)]));
    }

    #[test]
    fn example_envy_edges() {
        let g = build_envy_ratio_graph(&four(), &identity()).unwrap();
        assert_eq!(envy_edges(&g), BTreeSet::from([(1, 0), (2, 1)]));
        let small = Instance::from_integers(&[[3, 3, 1, 1, 1], [5, 5, 1, 4, 3]]).unwrap();
        let alloc = Allocation::from_bundles(5, &[vec![0, 1, 2], vec![3, 4]]).unwrap();
        let g = build_envy_ratio_graph(&small, &alloc).unwrap();
        assert_eq!(envy_edges(&g), BTreeSet::from([(1, 0)]));
    }

    #[test]
    fn example_improving_cycle() {
        let g = build_envy_ratio_graph(&four(), &identity()).unwrap();
        let cycle = find_improving_cycle(&g).unwrap();
        assert_eq!(cycle.canonical().agents(), &[0, 2, 1]);
        assert_eq!(g.cycle_product(&cycle), Weight::finite(ratio(3, 2)));
        let g = build_envy_ratio_graph(&four(), &improved()).unwrap();
        assert_eq!(find_improving_cycle(&g), None);
        let single = Instance::from_integers(&[[1, 2]]).unwrap();
        let alloc = Allocation::from_bundles(2, &[vec![0]]).unwrap();
        assert_eq!(find_improving_cycle(&build_envy_ratio_graph(&single, &alloc).unwrap()), None);
    }

    #[test]
    fn example_ranks() {
        let g = build_envy_ratio_graph(&four(), &improved()).unwrap();
        let ranks = envy_ranks(&g).unwrap();
        assert_eq!(*ranks.rank(1), Weight::finite(int(2)));
        assert_eq!(ranks.best_path(1), vec![0, 1]);
        let cyclic = build_envy_ratio_graph(&four(), &identity()).unwrap();
        assert_eq!(envy_ranks(&cyclic), Err(Error::ImprovingCycleExists));
    }

    #[test]
    fn ranks_without_envy_are_one() {
        let inst = Instance::from_integers(&[[5, 1, 1], [1, 5, 1], [1, 1, 5]]).unwrap();
        let alloc = Allocation::from_bundles(3, &[vec![0], vec![1], vec![2]]).unwrap();
        let ranks = envy_ranks(&build_envy_ratio_graph(&inst, &alloc).unwrap()).unwrap();
        assert!(ranks.ranks().iter().all(|r| *r == Weight::one()));
        assert_eq!(ranks.best_path(2), vec![2]);
    }

    #[test]
    fn topological_orders() {
        let edges = BTreeSet::from([(1, 0), (2, 1)]);
        assert_eq!(topological_order(4, &edges).unwrap(), vec![2, 1, 0, 3]);
        assert_eq!(topological_order(3, &BTreeSet::new()).unwrap(), vec![0, 1, 2]);
        assert_eq!(topological_order(2, &BTreeSet::from([(0, 1)])).unwrap(), vec![0, 1]);
        assert_eq!(
            topological_order(2, &BTreeSet::from([(0, 1), (1, 0)])),
            Err(Error::CyclicEnvyGraph)
        );
    }

    #[test]
    fn envy_cycles() {
        let inst = Instance::from_integers(&[[1, 5], [5, 1]]).unwrap();
        let alloc = Allocation::from_bundles(2, &[vec![0], vec![1]]).unwrap();
        let cycle = find_envy_cycle(&inst, &alloc).unwrap().unwrap();
        assert_eq!(cycle.agents(), &[0, 1]);
        let swapped = rotate_bundles(&alloc, &cycle).unwrap();
        assert_eq!(find_envy_cycle(&inst, &swapped).unwrap(), None);
        assert_eq!(rotate_bundles(&swapped, &cycle).unwrap(), alloc);
        assert_eq!(find_envy_cycle(&four(), &identity()).unwrap(), None);
    }

    #[test]
    fn example_rotation() {
        let cycle = Cycle::new(vec![0, 2, 1], 4).unwrap();
        let rotated = rotate_bundles(&identity(), &cycle).unwrap();
        assert_eq!(rotated, improved());
        assert!(Cycle::new(vec![0, 0], 4).is_err());
        assert!(Cycle::new(vec![0, 4], 4).is_err());
        assert!(Cycle::new(vec![1], 4).is_err());
    }

    #[test]
    fn weight_order() {
        let inf = Weight::monomial(int(1), -1);
        let tiny = Weight::monomial(int(100), 1);
        assert!(inf > Weight::finite(int(1_000_000)));
        assert!(tiny < Weight::finite(ratio(1, 1_000_000)));
        assert_eq!(&inf * &tiny, Weight::finite(int(100)));
    }
}
