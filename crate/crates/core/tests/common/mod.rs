#![allow(dead_code)]

use fairdiv::{Allocation, Bundle, Instance};
use proptest::prelude::*;

/// Values in `0..20` with roughly a quarter of them zero.
pub fn value() -> impl Strategy<Value = i64> {
    prop_oneof![1 => Just(0i64), 3 => 1i64..20]
}

/// Instances with `1..=max_agents` agents and `agents..=max_items` items.
pub fn instance(max_agents: usize, max_items: usize) -> impl Strategy<Value = Instance> {
    (1..=max_agents)
        .prop_flat_map(move |n| (Just(n), n..=max_items.max(n)))
        .prop_flat_map(|(n, m)| prop::collection::vec(prop::collection::vec(value(), m), n))
        .prop_map(|rows| Instance::from_integers(&rows).unwrap())
}

/// An instance together with an arbitrary, possibly partial, allocation.
pub fn instance_with_allocation(max_agents: usize, max_items: usize) -> impl Strategy<Value = (Instance, Allocation)> {
    instance(max_agents, max_items).prop_flat_map(|inst| {
        let (n, m) = (inst.agent_count(), inst.item_count());
        // Owner `n` means the item stays unallocated.
        prop::collection::vec(0..=n, m).prop_map(move |owners| {
            let mut bundles = vec![Bundle::new(); n];
            for (item, &owner) in owners.iter().enumerate() {
                if owner < n {
                    bundles[owner].insert(item);
                }
            }
            (inst.clone(), Allocation::new(m, bundles).unwrap())
        })
    })
}

/// An instance together with an injective one-item-per-agent allocation.
pub fn instance_with_matching(max_agents: usize, max_items: usize) -> impl Strategy<Value = (Instance, Allocation)> {
    instance(max_agents, max_items).prop_flat_map(|inst| {
        let (n, m) = (inst.agent_count(), inst.item_count());
        Just((0..m).collect::<Vec<_>>())
            .prop_shuffle()
            .prop_map(move |items| {
                let bundles: Vec<Bundle> = items[..n].iter().map(|&b| Bundle::from([b])).collect();
                (inst.clone(), Allocation::new(m, bundles).unwrap())
            })
    })
}

/// The four-agent, four-item running example (items 0-indexed).
pub fn four_agents() -> Instance {
    Instance::from_integers(&[[8, 2, 4, 3], [4, 2, 0, 2], [0, 3, 2, 2], [1, 6, 3, 9]]).unwrap()
}

/// The two-agent, five-item example whose NSW allocation is not EFR.
pub fn two_agents() -> Instance {
    Instance::from_integers(&[[3, 3, 1, 1, 1], [5, 5, 1, 4, 3]]).unwrap()
}
