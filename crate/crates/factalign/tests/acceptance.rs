//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any gating criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod corefix;
mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use std::time::{Duration, Instant};

use proptest::test_runner::{Config as PtConfig, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value as Json;
use factalign::annotation::service::{AnnotationService, ServiceConfig};
use factalign::annotation::{AnnotationError, Coverage, SubmissionRequest};
use factalign::config::PipelineConfig;
use factalign::formats::read_jsonl_file;
use factalign::pipeline::Pipeline;
use factalign::report;
use factalign_core::facts::FactKey;
use factalign_core::filter::{check_sentence, LengthBounds, RejectReason};
use factalign_core::metrics::{cohen_kappa, corpus_bleu, dataset_stats, selection_f1, BleuTokenizer, TOP_PREDICATES};
use factalign_core::providers::{HashEmbedder, IdentityTranslator, LexiconTagger, PosTag, ScriptDetector};
use factalign_core::stage1::{build_indexes, generate_candidates, prepare_bundle, Stage1Providers};
use factalign_core::stage2::{build_distant_dataset, AlignedInstance, DistantConfig, PairLabel};
use factalign_core::tfidf::Analyzer;
use factalign_core::{CandidateSet, EntityBundle, Language, Sentence, Stage1Config};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn seeded_runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        PtConfig {
            cases,
            failure_persistence: None,
            ..PtConfig::default()
        },
        TestRng::from_seed(RngAlgorithm::ChaCha, &[7; 32]),
    )
}

/// Copies the fixture into a fresh directory and runs ingest through stage 2.
fn run_fixture(workers: usize) -> Result<(tempfile::TempDir, Duration), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg_path = common::copy_fixture(dir.path());
    let cfg = PipelineConfig::load(&cfg_path).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let pipeline = Pipeline::new(cfg, workers).map_err(|e| e.to_string())?;
    let reports = pipeline.run_all().map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    for r in &reports {
        ensure!(r.errors.is_empty(), "{} reported {} item errors", r.command, r.errors.len());
    }
    Ok((dir, elapsed))
}

fn fixture_pipeline() -> Outcome {
    let (dir, elapsed) = run_fixture(1)?;
    let out = dir.path().join("out");
    ensure!(elapsed < Duration::from_secs(10), "single-worker run took {elapsed:?}");
    let mut sentences = 0;
    for lang in ["en", "hi"] {
        let s: Vec<Sentence> = read_jsonl_file(&out.join(format!("sentences.{lang}.jsonl"))).map_err(|e| e.to_string())?;
        let entities: BTreeSet<&str> = s.iter().map(|x| x.entity_id.as_str()).collect();
        ensure!(entities.len() >= 5, "{lang}: sentences from {} entities", entities.len());
        sentences += s.len();
    }
    let facts = std::fs::read_to_string(out.join("facts.jsonl")).map_err(|e| e.to_string())?.lines().count();
    ensure!((30..=60).contains(&sentences), "{sentences} kept sentences");
    ensure!((50..=70).contains(&facts), "{facts} facts");
    let mut sets = 0;
    for lang in ["en", "hi"] {
        let cs: Vec<CandidateSet> =
            read_jsonl_file(&out.join(format!("candidates.{lang}.jsonl"))).map_err(|e| e.to_string())?;
        for c in &cs {
            let head = c.candidates.first().map_or(f64::NEG_INFINITY, |x| x.score);
            ensure!(head >= 0.65, "{lang} {}#{}: head score {head}", c.sentence.page_id, c.sentence.ordinal);
            ensure!(c.candidates.len() <= 10, "{} candidates", c.candidates.len());
            ensure!(c.candidates.windows(2).all(|w| w[0].score >= w[1].score), "scores not descending");
        }
        sets += cs.len();
    }
    ensure!(sets > 0, "no candidate sets");
    let first = common::snapshot(&out);
    let (again, _) = run_fixture(1)?;
    ensure!(common::snapshot(&again.path().join("out")) == first, "second run differs");
    let (four, _) = run_fixture(4)?;
    ensure!(common::snapshot(&four.path().join("out")) == first, "4-worker run differs");
    Ok(format!(
        "{sentences} sentences, {facts} facts, {sets} candidate sets in {:.2}s; identical across runs and 1/4 workers",
        elapsed.as_secs_f64()
    ))
}

fn stage1_oracle() -> Outcome {
    const CASES: u32 = 200;
    let strategy = (corefix::bundle_strategy(), 0.45f64..0.75, 1usize..12);
    let mut runner = seeded_runner(CASES);
    runner
        .run(&strategy, |((facts, sentences), tau, k)| {
            let e = HashEmbedder::new(32).unwrap();
            let t = IdentityTranslator;
            let p = Stage1Providers {
                embedder: &e,
                translator: &t,
            };
            let bundle = EntityBundle::new(corefix::subject(), Language::Hi, facts, sentences).unwrap();
            let prepared = prepare_bundle(&bundle, p).unwrap();
            let idx = build_indexes(&[prepared], Analyzer::default()).unwrap();
            for cfg in [
                Stage1Config { tau, k, ..Stage1Config::default() },
                Stage1Config::default(),
            ] {
                let got: Vec<(u32, Vec<(FactKey, f64)>)> = generate_candidates(&bundle, &cfg, &idx, p)
                    .unwrap()
                    .iter()
                    .map(|cs| {
                        let c = cs.candidates.iter().map(|c| (c.fact_ref.clone(), c.score)).collect();
                        (cs.sentence.ordinal, c)
                    })
                    .collect();
                let want = corefix::oracles::stage1_brute_force(&bundle, &cfg, &idx, p);
                if got != want {
                    return Err(TestCaseError::fail(format!("tau {} k {}: {got:?} != {want:?}", cfg.tau, cfg.k)));
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!("{CASES} random bundles up to 20x20 equal the brute-force gate and cut"))
}

fn filter_boundaries() -> Outcome {
    let mut tagger = LexiconTagger::new();
    tagger.insert(Language::En, "wrote", PosTag::Verb);
    tagger.insert(Language::Hi, "लिखा", PosTag::Verb);
    let bounds = LengthBounds::default();
    let en = |n: usize| {
        let mut words = vec!["wrote"];
        words.extend(std::iter::repeat_n("it", n - 1));
        corefix::page_sentence("p", &words.join(" "), 0)
    };
    let check = |s: &Sentence, lang| check_sentence(s, lang, bounds, &ScriptDetector, &tagger);
    let cases = [
        (4, Some(RejectReason::TooShort)),
        (5, None),
        (100, None),
        (101, Some(RejectReason::TooLong)),
    ];
    for (n, want) in cases {
        let got = check(&en(n), Language::En);
        ensure!(got == want, "{n} tokens: {got:?}, expected {want:?}");
    }
    let mut hindi = corefix::page_sentence("p", "उन्होंने कई उपन्यास लिखा और पुरस्कार जीते", 0);
    ensure!(check(&hindi, Language::En) == Some(RejectReason::WrongLanguage), "Devanagari kept on an English page");
    hindi.language = Language::Hi;
    ensure!(check(&hindi, Language::Hi).is_none(), "Devanagari rejected on a Hindi page");
    ensure!(check(&en(6), Language::Hi) == Some(RejectReason::WrongLanguage), "Latin kept on a Hindi page");
    let flat = corefix::page_sentence("p", "it it it it it it", 0);
    ensure!(check(&flat, Language::En) == Some(RejectReason::NoContentWord), "no content word kept");
    Ok("4/101 tokens rejected, 5/100 kept, wrong script rejected".into())
}

fn distant_builder() -> Outcome {
    let e = HashEmbedder::new(64).unwrap();
    let page = corefix::oracles::five_sentence_page();
    let legal = corefix::oracles::legal_negatives(&page, &e, &DistantConfig::with_seed(0));
    ensure!(DistantConfig::with_seed(0).skip_top == 2, "skip_top is not 2");
    let mut seen = BTreeSet::new();
    const SEEDS: u64 = 200;
    for seed in 0..SEEDS {
        let cfg = DistantConfig::with_seed(seed);
        let ds = build_distant_dataset(std::slice::from_ref(&page), &e, &cfg).map_err(|e| e.to_string())?;
        ensure!(ds.counts.positives == 4 && ds.counts.negatives == 4, "seed {seed}: counts {:?}", ds.counts);
        let n = ds.train.len() + ds.validation.len();
        ensure!(n == 8, "seed {seed}: {n} examples");
        ensure!((ds.train.len() as f64 - 0.9 * n as f64).abs() <= 1.0, "seed {seed}: train {}", ds.train.len());
        let again = build_distant_dataset(std::slice::from_ref(&page), &e, &cfg).map_err(|e| e.to_string())?;
        ensure!(again == ds, "seed {seed}: two builds differ");
        let oracle = corefix::oracles::distant_brute_force(std::slice::from_ref(&page), &e, &cfg);
        ensure!(oracle == ds, "seed {seed}: differs from brute force");
        for ex in ds.train.iter().chain(&ds.validation) {
            if ex.label != PairLabel::Negative {
                continue;
            }
            let key = (ex.sentence_ordinal, ex.pair_text.clone());
            ensure!(legal.contains(&key), "seed {seed}: negative {key:?} uses its own fact or a top-2 donor");
            seen.insert(key);
        }
    }
    ensure!(seen == legal, "{} of {} legal negatives drawn over {SEEDS} seeds", seen.len(), legal.len());
    const CASES: u32 = 128;
    let mut runner = seeded_runner(CASES);
    runner
        .run(&(corefix::page_strategy(), 0u64..u64::MAX), |(pages, seed)| {
            let e = HashEmbedder::new(64).unwrap();
            let cfg = DistantConfig::with_seed(seed);
            let got = build_distant_dataset(&pages, &e, &cfg).unwrap();
            if got != corefix::oracles::distant_brute_force(&pages, &e, &cfg) {
                return Err(TestCaseError::fail(format!("seed {seed}: differs from brute force")));
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!(
        "4 positives / 4 negatives over {SEEDS} seeds, all {} legal negatives reachable, {CASES} random pages equal brute force",
        legal.len()
    ))
}

/// Reference-side perturbation: each token may be dropped, swapped for
/// another vocabulary word, or followed by an inserted word.
fn perturb(reference: &[&'static str], vocab: &[&'static str], rng: &mut ChaCha8Rng) -> Vec<&'static str> {
    let mut out = Vec::new();
    for &w in reference {
        let r: f64 = rng.random();
        if r < 0.15 {
            continue;
        }
        out.push(if r < 0.3 { *vocab.choose(rng).unwrap() } else { w });
        if rng.random::<f64>() < 0.15 {
            out.push(*vocab.choose(rng).unwrap());
        }
    }
    out
}

fn metrics() -> Outcome {
    let a = [1, 1, 1, 1, 1, 0, 0, 0, 0, 0].map(|x| x == 1);
    let b = [1, 1, 1, 1, 0, 1, 0, 0, 0, 0].map(|x| x == 1);
    let kappa = cohen_kappa(&a, &b).map_err(|e| e.to_string())?;
    ensure!((kappa - 0.6).abs() <= 1e-9, "kappa {kappa:.9}");
    let key = |s: &str| FactKey {
        pid: "P1".into(),
        object: s.into(),
    };
    let p: BTreeSet<FactKey> = [key("a"), key("b")].into_iter().collect();
    let g: BTreeSet<FactKey> = [key("b"), key("c")].into_iter().collect();
    let f1 = selection_f1(&[p], &[g], &[Language::Hi]).map_err(|e| e.to_string())?;
    let prf = (f1.micro.precision, f1.micro.recall, f1.micro.f1);
    ensure!(prf == (0.5, 0.5, 0.5), "selection P/R/F1 {prf:?}");

    let vocab: Vec<&'static str> = corefix::WORDS
        .iter()
        .copied()
        .chain(["the", "in", "and", "was", "a", "of", "he", "she", "his", "her"])
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_b1e0);
    let tok = BleuTokenizer::default();
    let mut checked = 0;
    let mut violations = Vec::new();
    let mut match_drops = 0;
    for fixture in 0..100 {
        let n = rng.random_range(3..=8);
        let refs: Vec<String> = (0..n)
            .map(|_| {
                let len = rng.random_range(5..=15);
                (0..len).map(|_| *vocab.choose(&mut rng).unwrap()).collect::<Vec<_>>().join(" ")
            })
            .collect();
        let hyps: Vec<String> = refs
            .iter()
            .map(|r| {
                let words: Vec<&'static str> = r.split(' ').map(|w| *vocab.iter().find(|v| **v == w).unwrap()).collect();
                perturb(&words, &vocab, &mut rng).join(" ")
            })
            .collect();
        let same = corpus_bleu(&refs, &refs, tok).map_err(|e| e.to_string())?;
        ensure!((same.bleu - 1.0).abs() <= 1e-9, "fixture {fixture}: identical corpora score {}", same.bleu);
        let before = corpus_bleu(&hyps, &refs, tok).map_err(|e| e.to_string())?;
        for i in 0..n {
            let mut fixed = hyps.clone();
            fixed[i] = refs[i].clone();
            let after = corpus_bleu(&fixed, &refs, tok).map_err(|e| e.to_string())?;
            checked += 1;
            if (0..4).any(|k| after.matches[k] < before.matches[k]) {
                match_drops += 1;
            }
            if after.bleu < before.bleu {
                violations.push(format!(
                    "fixture {fixture} line {i}: {:.6} -> {:.6} (length {} -> {} vs {}, brevity {:.4} -> {:.4})",
                    before.bleu,
                    after.bleu,
                    before.hypothesis_length,
                    after.hypothesis_length,
                    before.reference_length,
                    before.brevity_penalty,
                    after.brevity_penalty
                ));
            }
        }
    }
    ensure!(match_drops == 0, "clipped n-gram matches dropped in {match_drops} replacements");
    ensure!(
        violations.is_empty(),
        "BLEU fell in {} of {checked} replacements, e.g. {}",
        violations.len(),
        violations[0]
    );
    Ok(format!(
        "kappa {kappa:.6}, P/R/F1 0.5/0.5/0.5, identical corpora 1.0, BLEU never fell over {checked} replacements in 100 fixtures"
    ))
}

fn stats_recount() -> Outcome {
    let (dir, _) = run_fixture(1)?;
    let mut checked = Vec::new();
    for lang in [Language::En, Language::Hi] {
        let path = dir.path().join(format!("out/aligned.{lang}.jsonl"));
        let inst: Vec<AlignedInstance> = read_jsonl_file(&path).map_err(|e| e.to_string())?;
        if inst.is_empty() {
            continue;
        }
        compare_stats(&inst, lang)?;
        checked.push(format!("{lang} ({})", inst.len()));
    }
    ensure!(!checked.is_empty(), "no aligned instances in the fixture run");
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let rows = rng.random_range(1..25);
        let inst: Vec<AlignedInstance> = (0..rows)
            .map(|i| {
                let words: Vec<usize> = (0..rng.random_range(1..10)).map(|_| rng.random_range(0..16)).collect();
                let facts = (0..rng.random_range(1..5))
                    .map(|_| corefix::item_fact(rng.random_range(0..6), &[rng.random_range(0..16)]))
                    .collect();
                AlignedInstance {
                    sentence: corefix::sentence(&words, i as u32, Language::Kn),
                    facts,
                    method: factalign_core::stage2::SelectionMethod::Entailment,
                    section: String::new(),
                }
            })
            .collect();
        compare_stats(&inst, Language::Kn)?;
    }
    Ok(format!("fixture {} and 100 random sets match a recount", checked.join(", ")))
}

fn compare_stats(inst: &[AlignedInstance], lang: Language) -> Result<(), String> {
    let r = dataset_stats(inst, lang).map_err(|e| e.to_string())?;
    let want = corefix::oracles::recount_stats(inst, TOP_PREDICATES);
    ensure!(r.instance_count == want.instances, "instance count");
    ensure!(r.vocabulary_size == want.vocabulary, "vocabulary {} vs {}", r.vocabulary_size, want.vocabulary);
    ensure!(r.word_count.min == want.min_words && r.word_count.max == want.max_words, "word count range");
    ensure!(r.top_predicates == want.top_predicates, "top predicates");
    let total: f64 = r.fact_count_histogram.values().sum();
    ensure!((total - 1.0).abs() <= 1e-9, "histogram sums to {total}");
    ensure!(r.fact_count_histogram.len() == want.histogram.len(), "histogram buckets");
    for (k, v) in &want.histogram {
        ensure!((r.fact_count_histogram[k] - v).abs() <= 1e-12, "histogram bucket {k}");
    }
    Ok(())
}

fn shape(v: &Json) -> Json {
    match v {
        Json::Object(m) => Json::Object(m.iter().map(|(k, v)| (k.clone(), shape(v))).collect()),
        Json::Array(a) => Json::Array(a.iter().map(shape).collect()),
        Json::String(_) => Json::String("string".into()),
        Json::Number(_) => Json::String("number".into()),
        Json::Bool(_) => Json::String("bool".into()),
        Json::Null => Json::Null,
    }
}

fn answer(marked: BTreeSet<String>) -> SubmissionRequest {
    SubmissionRequest {
        annotator_id: None,
        marked_fact_ids: marked.into_iter().collect(),
        coverage: Some(Coverage::Complete),
        issue_text: String::new(),
    }
}

fn annotation_service() -> Outcome {
    let clock: factalign::annotation::Clock = Arc::new(|| 1_700_000_000);
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = ServiceConfig {
        event_log: Some(dir.path().join("events.jsonl")),
        ..ServiceConfig::default()
    };
    ensure!(config.golden_quota == 60 && config.top_n == 4, "default quota {} top_n {}", config.golden_quota, config.top_n);
    let all = common::tasks(Language::Hi, 75, 20);
    let golden_shape = all.iter().filter(|t| t.is_golden).map(|t| shape(&serde_json::to_value(t.payload()).unwrap()));
    let regular_shape = shape(&serde_json::to_value(all.iter().find(|t| !t.is_golden).unwrap().payload()).unwrap());
    for g in golden_shape {
        ensure!(g == regular_shape, "golden payload shape differs");
    }
    for t in &all {
        let text = serde_json::to_string(&t.payload()).unwrap();
        ensure!(!text.contains("gold"), "payload of {} mentions gold", t.task_id);
    }

    let svc = AnnotationService::open(config.clone(), clock.clone()).map_err(|e| e.to_string())?;
    svc.add_tasks(all).map_err(|e| e.to_string())?;
    let state = svc.state();
    let annotators = ["perfect", "noisy", "inverse", "lazy"];
    for id in annotators {
        svc.register(id, Language::Hi).map_err(|e| e.to_string())?;
    }
    let mut served = BTreeMap::new();
    for id in annotators {
        let mut n = 0;
        while let Some(p) = svc.next_task(id).map_err(|e| e.to_string())? {
            let task = &state.tasks[&p.task_id];
            ensure!(task.is_golden, "{id}: regular task {} served during the golden phase", p.task_id);
            let gold = task.gold.clone().unwrap();
            let all_ids: BTreeSet<String> = p.facts.iter().map(|f| f.fact_id.clone()).collect();
            let marked = match id {
                "perfect" => gold,
                "noisy" if n % 3 == 0 => all_ids,
                "noisy" => gold,
                _ => all_ids.difference(&gold).cloned().collect(),
            };
            svc.submit(&p.task_id, id, answer(marked)).map_err(|e| e.to_string())?;
            if n == 0 {
                let dup = svc.submit(&p.task_id, id, answer(BTreeSet::new()));
                ensure!(matches!(dup, Err(AnnotationError::Duplicate { .. })), "{id}: duplicate accepted: {dup:?}");
            }
            n += 1;
            if id == "lazy" && n == 5 {
                break;
            }
        }
        served.insert(id, n);
    }
    for id in ["perfect", "noisy", "inverse"] {
        ensure!(served[id] == 60, "{id} was served {} golden tasks", served[id]);
    }
    let report = svc.qualify(Language::Hi, 4).map_err(|e| e.to_string())?;
    let top = &report.ranking[0];
    ensure!(top.annotator_id == "perfect", "ranked first: {}", top.annotator_id);
    ensure!(top.golden_kappa == Some(1.0), "perfect annotator kappa {:?}", top.golden_kappa);
    let next = svc.next_task("perfect").map_err(|e| e.to_string())?;
    ensure!(next.is_some_and(|p| !state.tasks[&p.task_id].is_golden), "qualified annotator got no regular task");

    let final_state = svc.state();
    let events = svc.events();
    drop(svc);
    let replayed = AnnotationService::replay(config.clone(), clock.clone(), &events);
    ensure!(replayed.state() == final_state, "replay from events differs");
    let reopened = AnnotationService::open(config, clock).map_err(|e| e.to_string())?;
    ensure!(reopened.state() == final_state, "reopening from the log differs");
    Ok(format!(
        "blind payloads, 60 golden tasks before regular work, perfect annotator first with kappa 1.0, duplicates rejected, {} events replay exactly",
        events.len()
    ))
}

fn reference_table() -> Outcome {
    let key = |s: &str| FactKey {
        pid: "P1".into(),
        object: s.into(),
    };
    let p: BTreeSet<FactKey> = [key("a"), key("b")].into_iter().collect();
    let g: BTreeSet<FactKey> = [key("b"), key("c")].into_iter().collect();
    let rep = selection_f1(&[p], &[g], &[Language::Hi]).map_err(|e| e.to_string())?;
    let table = report::f1_table("fixture", &rep, true);
    let row = table.lines().find(|l| l.contains("published")).ok_or("no published row")?.to_string();
    for v in ["0.902", "0.831", "0.841", "0.886", "0.845", "0.851", "0.751", "0.785", "0.837"] {
        ensure!(row.contains(v), "published row lacks {v}");
    }
    Ok(row.split_whitespace().collect::<Vec<_>>().join(" "))
}

fn main() {
    let gating: [(&str, fn() -> Outcome); 7] = [
        ("1 fixture pipeline", fixture_pipeline),
        ("2 stage-1 oracle", stage1_oracle),
        ("3 filter boundaries", filter_boundaries),
        ("4 distant supervision builder", distant_builder),
        ("5 metrics", metrics),
        ("6 statistics recount", stats_recount),
        ("7 annotation service", annotation_service),
    ];
    let mut failed = 0;
    for (name, f) in gating {
        match std::panic::catch_unwind(f) {
            Ok(Ok(detail)) => println!("PASS {name}: {detail}"),
            Ok(Err(why)) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
            Err(_) => {
                failed += 1;
                println!("FAIL {name}: panicked");
            }
        }
    }
    match reference_table() {
        Ok(row) => println!("PASS 8 reference table (optional): {row}"),
        Err(why) => println!("FAIL 8 reference table (optional): {why}"),
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
