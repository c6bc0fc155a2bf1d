//! Acceptance gate. Prints one PASS/FAIL line per criterion, then fails if
//! any criterion failed. Run with `--nocapture` to see the lines.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use common::{all_minimum_hitting_sets, circuits, graph_from_code, hitting_set_mfvs, slots};
use groundkit::amr::{build_amr_digraph, AmrCorpus, PreprocessMetrics, ValidityStatus};
use groundkit::gen::{dictionary_like, kernel_with_counts, random_amr};
use groundkit::kernel::{kernel, MetricsReport};
use groundkit::oracle::{check_preservation_with, MfvsSolver};
use groundkit::penman::{parse_corpus, parse_penman, serialize_penman};
use groundkit::reduce::{applicable_targets, apply, is_irreducible, ReductionKind, Target};
use groundkit::verify::{confluence_suite, kernel_failures, negative_control, preservation_suite, SuiteConfig};
use groundkit::{Digraph, Execution, Reducer, VertexId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PRESERVATION_GRAPHS: usize = 500;
const PRESERVATION_MAX_N: usize = 10;
const DENSITIES: [f64; 3] = [0.1, 0.2, 0.3];
const CONFLUENCE_GRAPHS: usize = 200;
const CONFLUENCE_MAX_N: usize = 40;
const CONFLUENCE_ORDERS: usize = 20;
const KERNEL_RANDOM: usize = 200;
const KERNEL_SAMPLED_N6: usize = 20_000;
const ANCHOR_KERNEL_VERTICES: usize = 7131;
const ANCHOR_KERNEL_ARCS: usize = 33284;
const ANCHOR_DENSITY: f64 = 0.0007;
const RANDOM_DOCUMENTS: usize = 50;
const FUZZ_INPUTS: usize = 100_000;
const SCALE_VERTICES: usize = 100_000;
const SCALE_ARCS: usize = 750_000;
const SCALE_BUDGET: Duration = Duration::from_secs(600);
const SEED: u64 = 2024;

type Criterion = fn() -> Outcome;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn labels(g: &Digraph, set: &BTreeSet<VertexId>) -> BTreeSet<String> {
    set.iter().map(|&v| g.label(v).to_owned()).collect()
}

fn hits_all_circuits(g: &Digraph, set: &BTreeSet<String>) -> bool {
    let ids: Vec<VertexId> = g.vertices().collect();
    let mask: u64 = ids.iter().enumerate().filter(|(_, &v)| set.contains(g.label(v))).map(|(i, _)| 1u64 << i).sum();
    circuits(g).iter().all(|c| c & mask != 0)
}

/// Test-side check of `mfvs(G) = |U| + mfvs(G')` with every lifted witness.
fn independently_preserved(g: &Digraph, reduced: &Digraph, partial: &BTreeSet<String>) -> bool {
    hitting_set_mfvs(g) == partial.len() + hitting_set_mfvs(reduced)
        && all_minimum_hitting_sets(reduced).iter().all(|w| hits_all_circuits(g, &w.union(partial).cloned().collect()))
}

fn criterion_1() -> Outcome {
    let cfg = SuiteConfig {
        instances: PRESERVATION_GRAPHS,
        max_n: PRESERVATION_MAX_N,
        densities: DENSITIES.to_vec(),
        seed: SEED,
        exec: Execution::Parallel,
    };
    let start = Instant::now();
    let suite = preservation_suite(&cfg);
    let mut independent_failures = 0;
    for i in 0..cfg.instances {
        let g = cfg.instance(i);
        for reducer in [Reducer::confluent(), Reducer::nonconfluent()] {
            let (h, trace) = reducer.run(g.clone());
            if !independently_preserved(&g, &h, &labels(&g, &trace.included)) {
                independent_failures += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        suite.passed() && independent_failures == 0,
        format!(
            "{} graphs, {} checks, {} library-oracle failures, {} circuit-oracle pipeline failures, {:.1?}",
            cfg.instances, suite.cases, suite.failure_count, independent_failures, elapsed
        ),
    )
}

fn criterion_2() -> Outcome {
    let cfg = SuiteConfig {
        instances: CONFLUENCE_GRAPHS,
        max_n: CONFLUENCE_MAX_N,
        densities: DENSITIES.to_vec(),
        seed: SEED,
        exec: Execution::Parallel,
    };
    let start = Instant::now();
    let report = confluence_suite(&cfg, CONFLUENCE_ORDERS);
    let elapsed = start.elapsed();
    let mut detail = format!(
        "{} graphs x {} orders: {} differ in labels/arcs/U, {} differ in isomorphism invariants, {} stuck, {:.1?}",
        report.graphs, report.orders, report.exact_mismatches, report.invariant_mismatches, report.not_irreducible, elapsed
    );
    if let Some(example) = report.examples.first() {
        detail.push_str(&format!("; e.g. {example}"));
    }
    outcome(report.exact() && elapsed < Duration::from_secs(120), detail)
}

fn criterion_3() -> Outcome {
    let solver = MfvsSolver::new().first_only().execution(Execution::Sequential);
    let mut failures = Vec::new();
    let mut exhaustive = 0;
    let with_loops = (0..=4usize).flat_map(|n| (0..1u64 << slots(n, true)).map(move |c| (n, c, true)));
    let loop_free = (0..1u64 << slots(5, false)).map(|c| (5, c, false));
    for (n, code, loops) in with_loops.chain(loop_free) {
        exhaustive += 1;
        let g = graph_from_code(n, code, loops);
        failures.extend(kernel_failures(&g, &solver).into_iter().map(|f| format!("n={n} code={code}: {f}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for _ in 0..KERNEL_SAMPLED_N6 {
        let code = rng.gen_range(0..1u64 << slots(6, true));
        let g = graph_from_code(6, code, true);
        failures.extend(kernel_failures(&g, &solver).into_iter().map(|f| format!("n=6 code={code}: {f}")));
        if hitting_set_mfvs(&kernel(&g).kernel) != hitting_set_mfvs(&g) {
            failures.push(format!("n=6 code={code}: circuit oracle disagrees"));
        }
    }
    let cfg = SuiteConfig { instances: KERNEL_RANDOM, max_n: 10, seed: SEED, ..SuiteConfig::default() };
    let random = groundkit::verify::kernel_suite(&cfg);
    let pass = failures.is_empty() && random.passed();
    outcome(
        pass,
        format!(
            "{exhaustive} exhaustive (n<=4 with loops, loop-free n=5), {KERNEL_SAMPLED_N6} sampled n=6, {} random n<=10; {} failures{}",
            random.cases,
            failures.len() + random.failure_count,
            failures.first().map(|f| format!(", first: {f}")).unwrap_or_default()
        ),
    )
}

fn criterion_4() -> Outcome {
    let g = kernel_with_counts(ANCHOR_KERNEL_VERTICES, ANCHOR_KERNEL_ARCS, SEED);
    let report = MetricsReport::compute(&g);
    let shown = format!("{:.4}", report.kernel_density);
    let pass = report.size_kernel == ANCHOR_KERNEL_VERTICES
        && report.kernel_nb_arcs == ANCHOR_KERNEL_ARCS
        && report.kernel_density == ANCHOR_DENSITY
        && shown == "0.0007"
        && report.to_table().lines().any(|l| l.starts_with("Kernel Density") && l.ends_with("0.0007"));
    outcome(pass, format!("kernel {} vertices, {} arcs, density {shown}", report.size_kernel, report.kernel_nb_arcs))
}

fn v(g: &Digraph, label: &str) -> VertexId {
    g.vertex(label).unwrap_or_else(|| panic!("no vertex {label}"))
}

fn pairs(list: &[(&str, &str)]) -> BTreeSet<(String, String)> {
    list.iter().map(|&(a, b)| (a.to_owned(), b.to_owned())).collect()
}

fn criterion_5() -> Outcome {
    let mut problems = Vec::new();

    // u's predecessors p1..p3 form a diclique; w is u's only successor and
    // closes circuits back through p1
    let mut diclique: Vec<(&str, &str)> = Vec::new();
    for a in ["p1", "p2", "p3"] {
        for b in ["p1", "p2", "p3"] {
            if a != b {
                diclique.push((a, b));
            }
        }
    }
    let mut arcs = diclique.clone();
    arcs.extend([("p1", "u"), ("p2", "u"), ("p3", "u"), ("u", "w"), ("w", "p1")]);
    let g = Digraph::from_labeled_arcs(arcs.iter().copied());
    let mut h = g.clone();
    match apply(ReductionKind::InClique, &mut h, Target::Vertex(v(&g, "u"))) {
        Ok(Some(delta)) => {
            let mut expected = diclique.clone();
            expected.extend([("p1", "w"), ("p2", "w"), ("p3", "w"), ("w", "p1")]);
            if h.labeled_arcs() != pairs(&expected) || h.vertex("u").is_some() {
                problems.push("InClique result differs from the contraction".to_owned());
            }
            if delta.included.is_some() || delta.created_arcs.len() != 3 {
                problems.push("InClique should exclude u and create three arcs".to_owned());
            }
            if !independently_preserved(&g, &h, &BTreeSet::new()) || hitting_set_mfvs(&g) != 2 {
                problems.push("InClique figure fails the oracle".to_owned());
            }
        }
        other => problems.push(format!("InClique not applicable: {other:?}")),
    }
    // in-neighbourhoods: u {p1,p2,p3}, p2 {p1,p3}, p3 {p1,p2} are dicliques,
    // w {u} is a singleton; p1 {p2,p3,w} is not, since w and p2 are one-way
    let in_clique: BTreeSet<String> = applicable_targets(ReductionKind::InClique, &g)
        .into_iter()
        .map(|t| match t {
            Target::Vertex(x) => g.label(x).to_owned(),
            other => panic!("vertex target expected, got {other:?}"),
        })
        .collect();
    let want: BTreeSet<String> = ["p2", "p3", "u", "w"].map(String::from).into();
    if in_clique != want {
        problems.push(format!("InClique applies at {in_clique:?}"));
    }

    // (b, v) and (a, w) lie on no circuit; (v, w) and (w, u) only close a
    // circuit through the bidirectional pair u <-> v
    let g = Digraph::from_labeled_arcs([
        ("a", "b"),
        ("b", "a"),
        ("b", "v"),
        ("a", "w"),
        ("u", "v"),
        ("v", "u"),
        ("v", "w"),
        ("w", "u"),
    ]);
    let pie: BTreeSet<(String, String)> = applicable_targets(ReductionKind::Pie, &g)
        .into_iter()
        .map(|t| match t {
            Target::Arc(x, y) => (g.label(x).to_owned(), g.label(y).to_owned()),
            other => panic!("arc target expected, got {other:?}"),
        })
        .collect();
    let removed = pairs(&[("b", "v"), ("a", "w"), ("v", "w"), ("w", "u")]);
    if pie != removed {
        problems.push(format!("Pie applies to {pie:?}"));
    }
    let mut h = g.clone();
    for (x, y) in &removed {
        let arc = Target::Arc(v(&g, x), v(&g, y));
        if !matches!(apply(ReductionKind::Pie, &mut h, arc), Ok(Some(_))) {
            problems.push(format!("Pie did not remove ({x}, {y})"));
        }
    }
    if h.labeled_arcs() != pairs(&[("a", "b"), ("b", "a"), ("u", "v"), ("v", "u")]) {
        problems.push("Pie result differs from the figure".to_owned());
    }
    if !independently_preserved(&g, &h, &BTreeSet::new()) {
        problems.push("Pie figure fails the oracle".to_owned());
    }
    let check = check_preservation_with(&g, 10, |x| {
        for (a, b) in &removed {
            let (a, b) = (x.vertex(a).expect("present"), x.vertex(b).expect("present"));
            apply(ReductionKind::Pie, x, Target::Arc(a, b))?;
        }
        Ok(BTreeSet::new())
    });
    if !matches!(check, Ok(ref c) if c.holds()) {
        problems.push("Pie figure fails the library oracle".to_owned());
    }
    let pass = problems.is_empty();
    outcome(pass, if pass { "InClique and Pie figures reproduced".to_owned() } else { problems.join("; ") })
}

const SET: &str = "(d / define-01
    :ARG1 (s / set)
    :ARG2 (g / group
        :consist-of (t / thing
            :ARG0-of (f / form-01
                :ARG1 (w / whole)))))";

fn eight_entry_corpus() -> String {
    [
        "# ::id apple.0\n(d / define-01 :ARG1 (a / apple) :ARG2 (f / fruit :mod (r / red) :mod (r2 / round)))".to_owned(),
        "# ::id apple.1\n(d / define-01 :ARG1 (a / apple) :ARG2 (c / computer :mod (b / brand)))".to_owned(),
        format!("# ::id set.0\n{SET}"),
        "# ::id somehow.0\n(d / define-01 :manner (s / somehow) :ARG2 (w / way :mod (u / unknown)))".to_owned(),
        "# ::id hereto.0\n(d / define-01 :ARG1 (h / hereto) :topic (d2 / document :mod (t / this)))".to_owned(),
        "# ::id sometimes.0\n(c / contrast-01 :ARG1 (d1 / define-01 :ARG1 (s / sometimes) :ARG2 (o / occasion)) :ARG2 (d2 / define-01 :ARG1 (s2 / sometimes) :ARG2 (t / time)))".to_owned(),
        "# ::id guardhouse.0\n(d / define-01 :ARG1 (g / guardhouse :mod (h / house)) :ARG2 (b / building :purpose (g2 / guard-01)))".to_owned(),
        "# ::id wacky.0\n(d / define-01 :ARG1 (w / wacky) :manner (s / silly))".to_owned(),
        "# ::def-amr wacky.0\n(s / silly :manner (w / way :mod (e / excite-01) :mod (a / amuse-01)))".to_owned(),
    ]
    .join("\n\n")
}

fn criterion_6() -> Outcome {
    use ValidityStatus::*;
    let expected = [
        ("apple", 0, Valid, Valid),
        ("apple", 1, Valid, Valid),
        ("set", 0, Valid, Valid),
        ("somehow", 0, MissingArg1, Rejected(String::new())),
        ("hereto", 0, MissingArg2, Rejected(String::new())),
        ("sometimes", 0, WrongRoot, Rejected(String::new())),
        ("guardhouse", 0, NonAtomicDefined, Rejected(String::new())),
        ("wacky", 0, MissingArg2, Patched),
    ];
    let corpus = match AmrCorpus::parse(&eight_entry_corpus()) {
        Ok(c) => c,
        Err(e) => return outcome(false, format!("corpus does not parse: {e}")),
    };
    let build = match build_amr_digraph(&corpus, Execution::Parallel) {
        Ok(b) => b,
        Err(e) => return outcome(false, format!("build failed: {e}")),
    };
    let mut problems = Vec::new();
    if build.reports.len() != expected.len() {
        problems.push(format!("{} entries", build.reports.len()));
    }
    for (r, (lexeme, sense, initial, fin)) in build.reports.iter().zip(&expected) {
        let fin_ok = match (fin, &r.final_status) {
            (Rejected(_), Rejected(_)) => true,
            (a, b) => a == b,
        };
        if r.lexeme != *lexeme || r.sense != *sense || r.initial != *initial || !fin_ok {
            problems.push(format!("{}.{}: {} -> {}", r.lexeme, r.sense, r.initial, r.final_status));
        }
    }
    let want = PreprocessMetrics {
        definition_quantity: 8,
        initial_invalid: 5,
        saved: 1,
        final_invalid: 4,
        polysemy_filtered: 1,
        symbol_collisions: 0,
        final_quantity: 3,
    };
    if build.metrics != want {
        problems.push(format!("metrics {:?}", build.metrics));
    }
    if !build.metrics.is_conserved() {
        problems.push("conservation identity fails".to_owned());
    }
    let wacky = build.graph.vertex("wacky");
    let patched_arcs = ["silly", "way", "excite-01", "amuse-01"]
        .iter()
        .all(|c| matches!((build.graph.vertex(c), wacky), (Some(x), Some(w)) if build.graph.has_arc(x, w)));
    if !patched_arcs {
        problems.push("patched wacky definition missing from the graph".to_owned());
    }
    let pass = problems.is_empty();
    outcome(
        pass,
        if pass {
            format!("8 entries classified as expected; metrics {}", serde_json::to_string(&build.metrics).unwrap())
        } else {
            problems.join("; ")
        },
    )
}

fn criterion_7() -> Outcome {
    let mut problems = Vec::new();
    let apple = "(d / define-01 :ARG1 (a / apple) :ARG2 (f / fruit :mod (r / red) :mod (r2 / round)))";
    for text in [apple, SET] {
        let doc = parse_penman(text).expect("figure graph parses");
        let back = parse_penman(&serialize_penman(&doc)).expect("serialised figure parses");
        if back.graph != doc.graph {
            problems.push(format!("figure round trip changed {}", doc.graph.root_concept()));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for i in 0..RANDOM_DOCUMENTS {
        let n = rng.gen_range(1..40);
        let doc = random_amr(&mut rng, n);
        match parse_penman(&serialize_penman(&doc)) {
            Ok(back) if back.graph == doc.graph && back.metadata == doc.metadata => {}
            _ => problems.push(format!("random document {i}")),
        }
    }
    let alphabet = b"()/:- \n\"#abcdefgxyz0123456789";
    let mut errors = 0;
    let panics = std::panic::catch_unwind(move || {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
        for _ in 0..FUZZ_INPUTS {
            let len = rng.gen_range(0..64);
            let bytes: Vec<u8> = (0..len)
                .map(|_| if rng.gen_bool(0.8) { alphabet[rng.gen_range(0..alphabet.len())] } else { rng.gen() })
                .collect();
            let text = String::from_utf8_lossy(&bytes);
            if let Err(e) = parse_corpus(&text) {
                assert!(e.pos().line >= 1);
                errors += 1;
            }
        }
        errors
    });
    let errors = match panics {
        Ok(n) => n,
        Err(_) => {
            problems.push("parser panicked on fuzz input".to_owned());
            0
        }
    };
    let pass = problems.is_empty();
    outcome(
        pass,
        if pass {
            format!("2 figures, {RANDOM_DOCUMENTS} random documents, {FUZZ_INPUTS} fuzz inputs ({errors} positioned errors, no panic)")
        } else {
            problems.join("; ")
        },
    )
}

fn criterion_8() -> Outcome {
    let g = dictionary_like(SCALE_VERTICES, SCALE_ARCS, SEED);
    let (n, m) = (g.vertex_count(), g.arc_count());
    let start = Instant::now();
    let (reduced, trace) = Reducer::confluent().run(g);
    let elapsed = start.elapsed();
    let consistent = trace.remaining_vertices == reduced.vertex_count()
        && n == reduced.vertex_count() + trace.included.len() + trace.excluded.len()
        && is_irreducible(&reduced, ReductionKind::CONFLUENT);
    outcome(
        elapsed <= SCALE_BUDGET && consistent,
        format!(
            "{n} vertices, {m} arcs -> {} vertices, {} arcs, |U| = {} in {:.1?} (budget {:?})",
            reduced.vertex_count(),
            reduced.arc_count(),
            trace.included.len(),
            elapsed,
            SCALE_BUDGET
        ),
    )
}

fn criterion_9() -> Outcome {
    let suite = negative_control();
    let g = Digraph::from_labeled_arcs([("a", "b"), ("b", "a")]);
    let honest = check_preservation_with(&g, 2, |h| {
        let (a, b) = (h.vertex("a").expect("present"), h.vertex("b").expect("present"));
        let delta = apply(ReductionKind::Subset, h, Target::Pair(a, b))?;
        Ok(delta.and_then(|d| d.included).into_iter().collect())
    });
    let honest_ok = matches!(honest, Ok(ref c) if c.holds());
    outcome(
        suite.passed() && honest_ok,
        format!(
            "broken Subset {}, correct Subset {}",
            if suite.passed() { "caught" } else { "NOT caught" },
            if honest_ok { "accepted" } else { "rejected" }
        ),
    )
}

#[test]
fn acceptance() {
    let criteria: [(&str, Criterion); 9] = [
        ("mfvs preservation", criterion_1),
        ("confluence", criterion_2),
        ("kernel correctness", criterion_3),
        ("density anchor", criterion_4),
        ("worked figures", criterion_5),
        ("corpus pipeline", criterion_6),
        ("penman round trip", criterion_7),
        ("performance envelope", criterion_8),
        ("negative control", criterion_9),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        println!("{} criterion {} ({name}): {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
        if !o.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
