mod common;

use std::collections::BTreeSet;

use common::{all_minimum_hitting_sets, circuits, hitting_set_mfvs};
use groundkit::kernel::kernel;
use groundkit::oracle::mfvs_size;
use groundkit::reduce::{apply, applicable_targets, pred_in, pred_out, Action};
use groundkit::scc::{arc_is_acyclic, strongly_connected_components};
use groundkit::{Digraph, ReductionKind, Reducer, VertexId, VisitOrder};
use proptest::prelude::*;

fn digraph(max_n: usize, loops: bool) -> impl Strategy<Value = Digraph> {
    (1..=max_n, prop::sample::select(vec![0.1, 0.2, 0.3, 0.45])).prop_flat_map(move |(n, p)| {
        prop::collection::vec(prop::bool::weighted(p), n * n).prop_map(move |bits| {
            let arcs = (0..n * n).filter(|&k| bits[k] && (loops || k / n != k % n)).map(|k| (k / n, k % n));
            Digraph::from_index_arcs(n, arcs)
        })
    })
}

/// Every circuit of `g` meets `set`, checked by circuit enumeration.
fn hits_all_circuits(g: &Digraph, set: &BTreeSet<String>) -> bool {
    let ids: Vec<VertexId> = g.vertices().collect();
    let mask: u64 = ids.iter().enumerate().filter(|(_, &v)| set.contains(g.label(v))).map(|(i, _)| 1u64 << i).sum();
    circuits(g).iter().all(|c| c & mask != 0)
}

fn labels(g: &Digraph, set: &BTreeSet<VertexId>) -> BTreeSet<String> {
    set.iter().map(|&v| g.label(v).to_owned()).collect()
}

/// `mfvs(G) = |U| + mfvs(G')` and every minimum solution of `G'` lifts, by
/// the test-side oracle.
fn preserved(g: &Digraph, reduced: &Digraph, partial: &BTreeSet<String>) -> Result<(), TestCaseError> {
    prop_assert_eq!(hitting_set_mfvs(g), partial.len() + hitting_set_mfvs(reduced));
    for w in all_minimum_hitting_sets(reduced) {
        let lifted: BTreeSet<String> = w.union(partial).cloned().collect();
        prop_assert!(hits_all_circuits(g, &lifted));
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn removal_and_contraction_drop_one_vertex(g in digraph(9, true), pick in any::<prop::sample::Index>()) {
        let u = g.vertices().nth(pick.index(g.vertex_count())).unwrap();
        let mut removed = g.clone();
        removed.remove_vertex(u).unwrap();
        prop_assert_eq!(removed.vertex_count(), g.vertex_count() - 1);
        prop_assert_eq!(removed.arcs().count(), removed.arc_count());
        let mut contracted = g.clone();
        contracted.contract(u).unwrap();
        prop_assert_eq!(contracted.vertex_count(), g.vertex_count() - 1);
        prop_assert_eq!(contracted.arcs().count(), contracted.arc_count());
    }

    #[test]
    fn clique_contraction_keeps_mfvs(g in digraph(8, true)) {
        for u in g.vertices() {
            if !g.has_loop(u) && (pred_in(&g, u).unwrap() || pred_out(&g, u).unwrap()) {
                let mut h = g.clone();
                h.contract(u).unwrap();
                prop_assert_eq!(hitting_set_mfvs(&h), hitting_set_mfvs(&g));
            }
        }
    }

    #[test]
    fn scc_blocks_partition_the_vertices(g in digraph(12, true)) {
        let blocks = strongly_connected_components(&g);
        let mut seen = BTreeSet::new();
        for b in &blocks {
            prop_assert!(!b.is_empty());
            for &v in b {
                prop_assert!(seen.insert(v), "vertex in two blocks");
            }
        }
        prop_assert_eq!(seen, g.vertices().collect::<BTreeSet<_>>());
    }

    #[test]
    fn acyclic_arcs_are_on_no_circuit(g in digraph(8, true)) {
        let total = circuits(&g).len();
        for (u, v) in g.arcs() {
            // the circuits through (u, v) are exactly those lost by deleting it
            let mut h = g.clone();
            h.remove_arc(u, v).unwrap();
            let on_some = circuits(&h).len() < total;
            prop_assert_eq!(arc_is_acyclic(&g, (u, v)).unwrap(), !on_some);
        }
    }

    #[test]
    fn bidirectional_set_is_symmetric(g in digraph(10, true)) {
        let both = g.bidirectional_arcs();
        for &(u, v) in &both {
            prop_assert!(both.contains(&(v, u)));
            prop_assert!(g.has_arc(u, v) && g.has_arc(v, u));
        }
    }

    #[test]
    fn adding_an_arc_never_lowers_mfvs(g in digraph(9, true), a in any::<prop::sample::Index>(), b in any::<prop::sample::Index>()) {
        let ids: Vec<VertexId> = g.vertices().collect();
        let (u, v) = (ids[a.index(ids.len())], ids[b.index(ids.len())]);
        let mut h = g.clone();
        h.add_arc(u, v);
        prop_assert!(mfvs_size(&h).unwrap() >= mfvs_size(&g).unwrap());
    }

    #[test]
    fn every_pointed_reduction_preserves_mfvs(g in digraph(8, true)) {
        for kind in ReductionKind::ALL {
            for target in applicable_targets(kind, &g) {
                let mut h = g.clone();
                let delta = apply(kind, &mut h, target).unwrap().expect("target was applicable");
                let partial: BTreeSet<VertexId> = delta.included.into_iter().collect();
                preserved(&g, &h, &labels(&g, &partial))?;
            }
        }
    }

    #[test]
    fn pipelines_preserve_mfvs(g in digraph(9, true), seed in any::<u64>()) {
        for reducer in [Reducer::confluent(), Reducer::nonconfluent(), Reducer::nonconfluent().order(VisitOrder::Shuffled(seed))] {
            let (h, trace) = reducer.run(g.clone());
            preserved(&g, &h, &labels(&g, &trace.included))?;
        }
    }

    #[test]
    fn applications_shrink_the_graph_lexicographically(g in digraph(10, true), seed in any::<u64>()) {
        let (_, trace) = Reducer::nonconfluent().order(VisitOrder::Shuffled(seed)).run(g.clone());
        let mut h = g.clone();
        let mut applications = 0;
        for event in &trace.log {
            let before = (h.vertex_count(), h.arc_count());
            match event.action {
                Action::Applied { kind, target } => {
                    applications += 1;
                    prop_assert!(apply(kind, &mut h, target).unwrap().is_some());
                }
                Action::Isolated(v) => h.remove_vertex(v).unwrap(),
            }
            let after = (h.vertex_count(), h.arc_count());
            prop_assert!(after.0 < before.0 || (after.0 == before.0 && after.1 < before.1));
        }
        prop_assert_eq!(applications, trace.reductions_total());
        prop_assert!(trace.log.len() <= g.vertex_count() + g.arc_count() + trace.created_arcs);
    }

    #[test]
    fn dome_subsumes_pie(g in digraph(6, true)) {
        for (u, v) in g.arcs() {
            if !g.has_arc(v, u) && groundkit::reduce::pred_pie(&g, (u, v)).unwrap() {
                prop_assert!(groundkit::reduce::pred_dome(&g, (u, v)).unwrap());
            }
        }
    }

    #[test]
    fn kernel_properties(g in digraph(10, true)) {
        let k = kernel(&g);
        prop_assert_eq!(k.nb_undefined + k.nb_undefining + k.kernel.vertex_count(), g.vertex_count());
        prop_assert_eq!(&kernel(&k.kernel).kernel, &k.kernel);
        prop_assert_eq!(hitting_set_mfvs(&k.kernel), hitting_set_mfvs(&g));
        let on_circuit = |h: &Digraph| -> BTreeSet<String> {
            let ids: Vec<VertexId> = h.vertices().collect();
            let union = circuits(h).into_iter().fold(0u64, |a, c| a | c);
            (0..ids.len()).filter(|i| union & (1 << i) != 0).map(|i| h.label(ids[i]).to_owned()).collect()
        };
        prop_assert_eq!(on_circuit(&g), on_circuit(&k.kernel));
    }
}
