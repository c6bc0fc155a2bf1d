use std::collections::BTreeSet;

use groundkit::amr::{
    build_amr_digraph, bypass_root, patch, select_senses, validate, AmrCorpus, DefinitionEntry, ValidityStatus,
};
use groundkit::dictionary::{build_dictionary_digraph, tokenize, RawDictionary, Stoplist};
use groundkit::gen::random_amr;
use groundkit::penman::{parse_corpus, parse_penman, serialize_penman, AmrGraph, PenmanDocument};
use groundkit::Execution;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn body(seed: u64, size: usize) -> AmrGraph {
    random_amr(&mut ChaCha8Rng::seed_from_u64(seed), size).graph
}

/// Copies `part` into `g` with variables prefixed by `prefix`; returns the
/// copied root.
fn embed(g: &mut AmrGraph, part: &AmrGraph, prefix: &str) -> String {
    let var = |v: &str| format!("{prefix}{v}");
    for (v, c) in &part.instances {
        g.add_instance(&var(v), c);
    }
    for e in &part.edges {
        g.add_edge(&var(&e.source), &e.role, &var(&e.target));
    }
    for a in &part.attributes {
        g.add_attribute(&var(&a.source), &a.role, &a.value);
    }
    var(&part.root)
}

#[derive(Clone, Copy, Debug)]
enum Shape {
    Valid,
    WrongRoot,
    MissingArg1,
    NonAtomic,
    MissingArg2,
}

fn shaped(shape: Shape, defined: &str, def: &AmrGraph) -> AmrGraph {
    if let Shape::WrongRoot = shape {
        return def.clone();
    }
    let mut g = AmrGraph::new("d", "define-01");
    if !matches!(shape, Shape::MissingArg1) {
        g.add_instance("s", defined);
        g.add_edge("d", ":ARG1", "s");
        if let Shape::NonAtomic = shape {
            g.add_instance("m", "red");
            g.add_edge("s", ":mod", "m");
        }
    }
    if !matches!(shape, Shape::MissingArg2) {
        let root = embed(&mut g, def, "b");
        g.add_edge("d", ":ARG2", &root);
    }
    g
}

const LEXEMES: [&str; 5] = ["apple", "pear", "plum", "fig", "date"];
const LABELS: [&str; 4] = ["apple", "pear", "plum", "fig"];
const SHAPES: [Shape; 5] = [Shape::Valid, Shape::WrongRoot, Shape::MissingArg1, Shape::NonAtomic, Shape::MissingArg2];

/// `(lexeme, defined label, shape, body seed, has replacement)` per entry.
fn corpus_plan() -> impl Strategy<Value = Vec<(usize, usize, usize, u64, bool)>> {
    prop::collection::vec((0..5usize, 0..4usize, 0..5usize, any::<u64>(), any::<bool>()), 0..24)
}

fn corpus_of(plan: &[(usize, usize, usize, u64, bool)]) -> AmrCorpus {
    let mut corpus = AmrCorpus::default();
    let mut senses = [0u32; 5];
    for &(lex, label, shape, seed, replace) in plan {
        let sense = senses[lex];
        senses[lex] += 1;
        let def = body(seed, 1 + (seed % 5) as usize);
        corpus.entries.push(DefinitionEntry::new(LEXEMES[lex], sense, shaped(SHAPES[shape], LABELS[label], &def)));
        if replace {
            corpus.replacements.insert((LEXEMES[lex].to_owned(), sense), body(seed ^ 1, 3));
        }
    }
    corpus
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn penman_round_trip_and_determinism(seed in any::<u64>(), n in 1usize..40) {
        let doc = random_amr(&mut ChaCha8Rng::seed_from_u64(seed), n);
        let text = serialize_penman(&doc);
        let back = parse_penman(&text).unwrap();
        prop_assert_eq!(&back.graph, &doc.graph);
        prop_assert_eq!(&back.metadata, &doc.metadata);
        prop_assert_eq!(parse_penman(&text).unwrap(), back);
    }

    #[test]
    fn penman_errors_carry_positions(text in "[()/: a-z0-9\"\n#-]{0,60}") {
        match parse_corpus(&text) {
            Ok(docs) => {
                for d in docs {
                    prop_assert!(d.graph.check().is_ok());
                }
            }
            Err(e) => {
                let pos = e.pos();
                prop_assert!(pos.line >= 1 && pos.col >= 1);
                prop_assert!(pos.line <= text.lines().count().max(1) + 1);
            }
        }
    }

    #[test]
    fn corpus_metrics_are_conserved(plan in corpus_plan()) {
        let corpus = corpus_of(&plan);
        let build = build_amr_digraph(&corpus, Execution::Sequential).unwrap();
        prop_assert!(build.metrics.is_conserved(), "{:?}", build.metrics);
        prop_assert_eq!(build.metrics.definition_quantity, plan.len());
        let par = build_amr_digraph(&corpus, Execution::Parallel).unwrap();
        prop_assert_eq!(par.metrics, build.metrics);
        prop_assert_eq!(par.graph, build.graph);
        for (r, &(_, _, shape, _, _)) in build.reports.iter().zip(&plan) {
            let expected = match SHAPES[shape] {
                Shape::Valid => ValidityStatus::Valid,
                Shape::WrongRoot => ValidityStatus::WrongRoot,
                Shape::MissingArg1 => ValidityStatus::MissingArg1,
                Shape::NonAtomic => ValidityStatus::NonAtomicDefined,
                Shape::MissingArg2 => ValidityStatus::MissingArg2,
            };
            prop_assert_eq!(&r.initial, &expected);
        }
    }

    #[test]
    fn patched_entries_validate(seed in any::<u64>(), label in 0..4usize) {
        let entry = DefinitionEntry::new("x", 0, shaped(Shape::MissingArg2, LABELS[label], &body(seed, 1)));
        let patched = patch(&entry, &body(seed ^ 7, 1 + (seed % 6) as usize)).unwrap();
        prop_assert_eq!(&patched.status, &ValidityStatus::Patched);
        prop_assert_eq!(validate(&patched), ValidityStatus::Valid);
        prop_assert!(patched.amr.check().is_ok());
    }

    #[test]
    fn sense_selection_is_idempotent_and_order_free(plan in corpus_plan(), rot in 0usize..24) {
        let usable: Vec<DefinitionEntry> =
            corpus_of(&plan).entries.into_iter().filter(|e| e.status == ValidityStatus::Valid).collect();
        let once = select_senses(&usable);
        let twice = select_senses(&once.kept);
        prop_assert_eq!(&twice.kept, &once.kept);
        prop_assert_eq!((twice.polysemy_filtered, twice.symbol_collisions), (0, 0));
        let mut rotated = usable.clone();
        rotated.reverse();
        if !rotated.is_empty() {
            let k = rot % rotated.len();
            rotated.rotate_left(k);
        }
        prop_assert_eq!(select_senses(&rotated), once);
    }

    #[test]
    fn bypass_gives_one_arc_per_concept(seed in any::<u64>(), label in 0..4usize) {
        let def = body(seed, 1 + (seed % 8) as usize);
        let entry = DefinitionEntry::new("x", 0, shaped(Shape::Valid, LABELS[label], &def));
        let b = bypass_root(&entry).unwrap();
        let concepts: BTreeSet<&str> = def.instances.values().map(String::as_str).collect();
        let tails: Vec<&str> = b.arcs.iter().map(|(t, _)| t.as_str()).collect();
        prop_assert!(b.arcs.iter().all(|(_, h)| h == LABELS[label]));
        prop_assert_eq!(tails.iter().copied().collect::<BTreeSet<_>>().len(), tails.len());
        prop_assert_eq!(tails.into_iter().collect::<BTreeSet<_>>(), concepts);
    }

    #[test]
    fn dictionary_graph_properties(
        entries in prop::collection::btree_map("[a-d]{1,3}", prop::collection::vec("[a-d ]{0,12}", 1..3), 0..10),
        repeat in "[a-d]{1,3}",
    ) {
        let mut dict = RawDictionary::new();
        for (lex, defs) in &entries {
            dict.add(lex, defs.iter().map(String::as_str));
        }
        let stop = Stoplist::new(["a"]);
        let g = build_dictionary_digraph(&dict, &stop);
        prop_assert_eq!(&build_dictionary_digraph(&dict, &stop), &g);
        for (_, v) in g.arcs() {
            prop_assert!(dict.entries.contains_key(g.label(v)));
        }
        for v in g.vertices() {
            prop_assert!(dict.entries.contains_key(g.label(v)) || g.out_degree(v) > 0);
        }
        let mut twice = RawDictionary::new();
        twice.add("target", [format!("{repeat} {repeat} {repeat}").as_str()]);
        let h = build_dictionary_digraph(&twice, &Stoplist::new(Vec::<String>::new()));
        prop_assert_eq!(h.arc_count(), tokenize(&repeat).len());
    }
}

#[test]
fn bare_documents_keep_metadata() {
    let mut doc = PenmanDocument::new(AmrGraph::new("a", "apple"));
    doc.metadata.insert("id".into(), "apple.0".into());
    let back = parse_penman(&serialize_penman(&doc)).unwrap();
    assert_eq!(back.metadata, doc.metadata);
}
