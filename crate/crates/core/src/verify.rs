//! Seeded batch checks of the reductions against the exact oracle. Each
//! instance draws from its own ChaCha stream, so results do not depend on how
//! the batch is split across threads.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::gen::{random_amr, random_digraph};
use crate::graph::{Digraph, VertexId};
use crate::kernel::kernel;
use crate::oracle::{check_preservation_with, check_reducer, MfvsSolver, OracleError};
use crate::par::{self, Execution};
use crate::penman::{parse_penman, serialize_penman};
use crate::reduce::{applicable_targets, apply, is_irreducible, ReductionKind, Reducer, VisitOrder};

/// Failure messages kept per suite; the count is always exact.
const KEPT_FAILURES: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub cases: usize,
    pub failure_count: usize,
    pub failures: Vec<String>,
}

impl SuiteReport {
    fn collect(name: &str, per_instance: Vec<(usize, Vec<String>)>) -> Self {
        let cases = per_instance.iter().map(|(c, _)| c).sum();
        let all: Vec<String> = per_instance.into_iter().flat_map(|(_, f)| f).collect();
        Self {
            name: name.to_owned(),
            cases,
            failure_count: all.len(),
            failures: all.into_iter().take(KEPT_FAILURES).collect(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failure_count == 0
    }
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub instances: usize,
    pub max_n: usize,
    pub densities: Vec<f64>,
    pub seed: u64,
    pub exec: Execution,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { instances: 500, max_n: 10, densities: vec![0.1, 0.2, 0.3], seed: 0, exec: Execution::default() }
    }
}

impl SuiteConfig {
    fn rng(&self, i: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(i as u64);
        rng
    }

    /// Instance `i`: size uniform in `1..=max_n`, densities used round-robin.
    pub fn instance(&self, i: usize) -> Digraph {
        let mut rng = self.rng(i);
        let n = rng.gen_range(1..=self.max_n.max(1));
        let p = self.densities[i % self.densities.len()];
        random_digraph(&mut rng, n, p)
    }
}

fn describe(g: &Digraph) -> String {
    let arcs: Vec<String> = g.arcs().map(|(u, v)| format!("{}>{}", g.label(u), g.label(v))).collect();
    format!("n={} [{}]", g.vertex_count(), arcs.join(" "))
}

/// Every applicable target of every reduction, and both full pipelines,
/// checked for `mfvs(G) = |U| + mfvs(G')` with all lifted witnesses.
pub fn preservation_suite(cfg: &SuiteConfig) -> SuiteReport {
    let cap = cfg.max_n;
    let results = par::map_range(cfg.exec, cfg.instances, |i| {
        let g = cfg.instance(i);
        let mut cases = 0;
        let mut failures = Vec::new();
        let mut record = |what: String, res: Result<bool, OracleError>| {
            cases += 1;
            match res {
                Ok(true) => {}
                Ok(false) => failures.push(format!("instance {i}: {what} breaks preservation on {}", describe(&g))),
                Err(e) => failures.push(format!("instance {i}: {what}: {e}")),
            }
        };
        for kind in ReductionKind::ALL {
            for target in applicable_targets(kind, &g) {
                let res = check_preservation_with(&g, cap, |h| {
                    let delta = apply(kind, h, target)?;
                    Ok(delta.and_then(|d| d.included).into_iter().collect())
                });
                record(format!("{kind} at {target:?}"), res.map(|c| c.holds()));
            }
        }
        for (name, reducer) in [("confluent pipeline", Reducer::confluent()), ("non-confluent pipeline", Reducer::nonconfluent())] {
            record(name.to_owned(), check_reducer(&g, &reducer, cap).map(|c| c.holds()));
        }
        (cases, failures)
    });
    SuiteReport::collect("mfvs-preservation", results)
}

/// Outcome of running the confluent set under many visit orders.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConfluenceReport {
    pub graphs: usize,
    pub orders: usize,
    /// Graphs whose remaining labels, arcs or `U` differ between orders.
    pub exact_mismatches: usize,
    /// Graphs whose order-independent invariants differ between orders.
    pub invariant_mismatches: usize,
    /// Runs that stopped on a graph that is not irreducible.
    pub not_irreducible: usize,
    pub examples: Vec<String>,
}

impl ConfluenceReport {
    pub fn exact(&self) -> bool {
        self.exact_mismatches == 0 && self.not_irreducible == 0
    }

    pub fn up_to_invariants(&self) -> bool {
        self.invariant_mismatches == 0 && self.not_irreducible == 0
    }
}

type Outcome = (BTreeSet<String>, BTreeSet<(String, String)>, BTreeSet<String>);

/// `(|U|, |V'|, |A'|, sorted (in, out, loop) degree triples)`.
type Invariants = (usize, usize, usize, Vec<(usize, usize, bool)>);

fn outcome(initial: &Digraph, reduced: &Digraph, included: &BTreeSet<VertexId>) -> (Outcome, Invariants) {
    let u: BTreeSet<String> = included.iter().map(|&v| initial.label(v).to_owned()).collect();
    let mut degrees: Vec<(usize, usize, bool)> =
        reduced.vertices().map(|v| (reduced.in_degree(v), reduced.out_degree(v), reduced.has_loop(v))).collect();
    degrees.sort_unstable();
    let inv = (u.len(), reduced.vertex_count(), reduced.arc_count(), degrees);
    ((reduced.label_set(), reduced.labeled_arcs(), u), inv)
}

/// Runs the confluent set on each instance under `orders` shuffled visit
/// orders and compares the results exactly and by invariants.
pub fn confluence_suite(cfg: &SuiteConfig, orders: usize) -> ConfluenceReport {
    let results = par::map_range(cfg.exec, cfg.instances, |i| {
        let g = cfg.instance(i);
        let mut outcomes = Vec::with_capacity(orders);
        let mut stuck = 0;
        for k in 0..orders {
            let order_seed = cfg.seed ^ ((i as u64) << 20) ^ k as u64;
            let (reduced, trace) = Reducer::confluent().order(VisitOrder::Shuffled(order_seed)).run(g.clone());
            if !is_irreducible(&reduced, ReductionKind::CONFLUENT) {
                stuck += 1;
            }
            outcomes.push(outcome(&g, &reduced, &trace.included));
        }
        let exact = outcomes.iter().all(|o| o.0 == outcomes[0].0);
        let inv = outcomes.iter().all(|o| o.1 == outcomes[0].1);
        let example = (!exact).then(|| {
            let sizes: BTreeSet<String> = outcomes.iter().map(|o| format!("U={:?}", o.0 .2)).collect();
            format!("instance {i}: {} -> {}", describe(&g), sizes.into_iter().collect::<Vec<_>>().join(" | "))
        });
        (exact, inv, stuck, example)
    });
    let mut report = ConfluenceReport {
        graphs: cfg.instances,
        orders,
        exact_mismatches: 0,
        invariant_mismatches: 0,
        not_irreducible: 0,
        examples: Vec::new(),
    };
    for (exact, inv, stuck, example) in results {
        report.exact_mismatches += usize::from(!exact);
        report.invariant_mismatches += usize::from(!inv);
        report.not_irreducible += stuck;
        if let Some(e) = example {
            if report.examples.len() < 5 {
                report.examples.push(e);
            }
        }
    }
    report
}

/// Kernel idempotence, the count identity, and MFVS invariance.
pub fn kernel_suite(cfg: &SuiteConfig) -> SuiteReport {
    let solver = MfvsSolver::new().cap(cfg.max_n).first_only().execution(Execution::Sequential);
    let results = par::map_range(cfg.exec, cfg.instances, |i| {
        let g = cfg.instance(i);
        (1, kernel_failures(&g, &solver).into_iter().map(|f| format!("instance {i}: {f} on {}", describe(&g))).collect())
    });
    SuiteReport::collect("kernel", results)
}

/// Kernel properties of a single graph; empty when all hold.
pub fn kernel_failures(g: &Digraph, solver: &MfvsSolver) -> Vec<String> {
    let mut out = Vec::new();
    let k = kernel(g);
    if k.nb_undefined + k.nb_undefining + k.kernel.vertex_count() != g.vertex_count() {
        out.push("count identity".to_owned());
    }
    let again = kernel(&k.kernel);
    if again.kernel != k.kernel || again.nb_undefined + again.nb_undefining != 0 {
        out.push("idempotence".to_owned());
    }
    match (solver.solve(g), solver.solve(&k.kernel)) {
        (Ok(a), Ok(b)) if a.size == b.size => {}
        (Ok(a), Ok(b)) => out.push(format!("mfvs {} vs kernel {}", a.size, b.size)),
        (Err(e), _) | (_, Err(e)) => out.push(e.to_string()),
    }
    out
}

/// A Subset rule that forgets to commit `u` must be caught on the 2-cycle.
pub fn negative_control() -> SuiteReport {
    let g = Digraph::from_labeled_arcs([("a", "b"), ("b", "a")]);
    let (a, b) = (g.vertex("a").expect("built above"), g.vertex("b").expect("built above"));
    let check = check_preservation_with(&g, 2, |h| {
        if crate::reduce::pred_subset(h, a, b)? {
            h.remove_vertex(a)?;
        }
        Ok(BTreeSet::new())
    });
    let failures = match check {
        Ok(c) if !c.holds() => Vec::new(),
        Ok(_) => vec!["broken Subset was not detected".to_owned()],
        Err(e) => vec![e.to_string()],
    };
    SuiteReport::collect("negative-control", vec![(1, failures)])
}

/// `parse(serialize(g)) == g` on random rooted concept graphs.
pub fn penman_suite(cfg: &SuiteConfig) -> SuiteReport {
    let results = par::map_range(cfg.exec, cfg.instances, |i| {
        let mut rng = cfg.rng(i);
        let n = rng.gen_range(1..=cfg.max_n.max(1) * 2);
        let doc = random_amr(&mut rng, n);
        let text = serialize_penman(&doc);
        let failures = match parse_penman(&text) {
            Ok(back) if back.graph == doc.graph => Vec::new(),
            Ok(_) => vec![format!("instance {i}: round trip changed the graph:\n{text}")],
            Err(e) => vec![format!("instance {i}: {e}:\n{text}")],
        };
        (1, failures)
    });
    SuiteReport::collect("penman-round-trip", results)
}
