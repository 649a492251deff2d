//! The worked examples, end to end. Agents and items are 0-indexed, so the
//! 1-indexed cycle (1,3,2) appears here as [0, 2, 1].

mod common;

use fairdiv::algorithms::{solve_efr, solve_efx};
use fairdiv::envy::{build_envy_ratio_graph, envy_edges, find_improving_cycle, rotate_bundles, topological_order, Cycle};
use fairdiv::matching::{nsw_matching, verify_nsw_certificate};
use fairdiv::model::{fairness_factor, meets_threshold, removal_expectation};
use fairdiv::oracle::{
    oracle_best_factor, oracle_envy_rank, oracle_improving_cycle, oracle_nsw_allocations, OracleLimits,
};
use fairdiv::rational::{int, ratio};
use fairdiv::{Allocation, Bundle, Factor, FairnessNotion, Threshold};

use common::{four_agents, two_agents};

fn identity() -> Allocation {
    Allocation::from_bundles(4, &[[0], [1], [2], [3]]).unwrap()
}

fn rotated() -> Allocation {
    Allocation::from_bundles(4, &[[2], [0], [1], [3]]).unwrap()
}

#[test]
fn four_agent_identity_allocation() {
    let inst = four_agents();
    let graph = build_envy_ratio_graph(&inst, &identity()).unwrap();
    let limits = OracleLimits::default();

    assert_eq!(oracle_envy_rank(&graph, 0, &limits).unwrap().as_finite(), Some(&int(3)));
    assert_eq!(envy_edges(&graph).into_iter().collect::<Vec<_>>(), vec![(1, 0), (2, 1)]);
    assert_eq!(
        topological_order(4, &envy_edges(&graph)).unwrap(),
        vec![2, 1, 0, 3]
    );

    let cycle = find_improving_cycle(&graph).expect("identity allocation is improvable");
    assert_eq!(cycle.canonical().agents(), &[0, 2, 1]);
    assert_eq!(graph.cycle_product(&cycle).as_finite(), Some(&ratio(3, 2)));
    let (_, product) = oracle_improving_cycle(&graph, &limits).unwrap().unwrap();
    assert!(product.is_above_one());

    let cycle = Cycle::new(vec![0, 2, 1], 4).unwrap();
    assert_eq!(rotate_bundles(&identity(), &cycle).unwrap(), rotated());
    assert!(!verify_nsw_certificate(&inst, &identity()).unwrap());
}

#[test]
fn four_agent_rotated_allocation_is_certified() {
    let inst = four_agents();
    let graph = build_envy_ratio_graph(&inst, &rotated()).unwrap();
    let limits = OracleLimits::default();
    assert!(oracle_improving_cycle(&graph, &limits).unwrap().is_none());
    assert!(find_improving_cycle(&graph).is_none());
    assert_eq!(oracle_envy_rank(&graph, 1, &limits).unwrap().as_finite(), Some(&int(2)));
    assert!(verify_nsw_certificate(&inst, &rotated()).unwrap());

    let matching = nsw_matching(&inst).unwrap();
    assert_eq!(matching.allocation, rotated());
    assert_eq!(matching.objective().product, int(432));
}

#[test]
fn two_agent_example() {
    let inst = two_agents();
    let limits = OracleLimits::default();
    let (objective, winners) = oracle_nsw_allocations(&inst, &limits).unwrap();
    assert_eq!(objective.product, int(49));
    let nsw = Allocation::from_bundles(5, &[vec![0, 1, 2], vec![3, 4]]).unwrap();
    assert_eq!(winners, vec![nsw.clone()]);

    assert_eq!(
        removal_expectation(&inst, 1, &Bundle::from([0, 1, 2])).unwrap(),
        ratio(22, 3)
    );
    let report = fairness_factor(&inst, &nsw, FairnessNotion::Efr).unwrap();
    assert_eq!(report.factor, Factor::Finite(ratio(21, 22)));
    assert_eq!(report.witness, Some((1, 0)));
    assert!(!meets_threshold(&report, &Threshold::Rational(int(1))));
    assert!(meets_threshold(&report, &Threshold::SqrtThreeMinusOne));

    let ef1 = fairness_factor(&inst, &nsw, FairnessNotion::Ef1).unwrap();
    assert_eq!(ef1.factor, Factor::Finite(ratio(7, 6)));
    assert_eq!(nsw_matching(&inst).unwrap().objective().product, int(15));
}

#[test]
fn two_agent_example_solved() {
    let inst = two_agents();
    let (allocation, trace) = solve_efr(&inst).unwrap();
    assert_eq!(trace.replay().unwrap(), allocation);
    let report = fairness_factor(&inst, &allocation, FairnessNotion::Efr).unwrap();
    assert!(meets_threshold(&report, &Threshold::SqrtThreeMinusOne));
    let (best, _) = oracle_best_factor(&inst, FairnessNotion::Efr, &OracleLimits::default()).unwrap();
    assert!(best >= report.factor);
    let golden = Allocation::from_bundles(5, &[vec![0, 2, 4], vec![1, 3]]).unwrap();
    assert_eq!(allocation, golden);
    assert_eq!(report.factor, Factor::Finite(ratio(3, 2)));

    let (allocation, _) = solve_efx(&inst).unwrap();
    let report = fairness_factor(&inst, &allocation, FairnessNotion::Efx).unwrap();
    assert!(meets_threshold(&report, &Threshold::GoldenRatioMinusOne));
    assert_eq!(allocation, golden);
    assert_eq!(report.factor, Factor::Finite(ratio(9, 8)));
}

#[test]
fn trivial_solves() {
    let single = fairdiv::Instance::from_integers(&[[4, 0, 7]]).unwrap();
    let (allocation, _) = solve_efx(&single).unwrap();
    assert_eq!(allocation.bundle(0), &Bundle::from([0, 1, 2]));
    assert_eq!(
        fairness_factor(&single, &allocation, FairnessNotion::Efx).unwrap().factor,
        Factor::Unbounded
    );

    let square = fairdiv::Instance::from_integers(&[[3, 1, 2], [3, 1, 2], [3, 1, 2]]).unwrap();
    let (allocation, _) = solve_efr(&square).unwrap();
    assert!(allocation.bundles().iter().all(|b| b.len() == 1));
    assert_eq!(
        fairness_factor(&square, &allocation, FairnessNotion::Efr).unwrap().factor,
        Factor::Unbounded
    );
}
