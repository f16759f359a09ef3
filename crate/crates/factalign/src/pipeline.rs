//! Pipeline commands over the on-disk formats.
//!
//! Every command reads and writes JSONL under the output directory, records
//! a manifest, and logs per-item failures to `errors.<command>.jsonl` while
//! still writing every valid item. Output order is canonical: by page id,
//! then sentence ordinal, whatever the number of workers.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use factalign_core::facts::Datatype;
use factalign_core::filter::{filter_sentences, FilterReport, RejectReason};
use factalign_core::providers::{
    AlignmentClassifierProvider, ContentTagger, EmbeddingProvider, EntailmentProvider, HashEmbedder,
    IdentityTranslator, LexicalEntailment, LexiconTagger, OverlapClassifier, PosTag, ProviderError,
    ScriptDetector, TranslationProvider,
};
use factalign_core::stage1::{build_indexes, prepare_bundle, select_candidates, Stage1Providers};
use factalign_core::stage2::{
    assemble_distant_dataset, baseline_overlap_select, mention_alignment, page_examples,
    select_by_classifier, select_by_entailment, AlignedInstance, DistantCounts, DistantPage,
};
use factalign_core::text::SentenceSplitter;
use factalign_core::tfidf::Analyzer;
use factalign_core::{CandidateSet, EntityBundle, Fact, Language, Sentence, WikiPage};

use crate::annotation::{create_tasks, AnnotationTask, SentenceKey};
use crate::config::{ConfigError, PipelineConfig, Selector};
use crate::glossary::GlossaryTranslator;
use crate::dump::{extract_pages, DumpStats};
use crate::entity_dump::{doc_sitelinks, parse_entity_facts, read_entity_docs, LabelIndex, ParseCounts};
use crate::formats::{
    open_input, read_jsonl_file, write_json_file, write_jsonl_file, FactRecord, FormatError,
    GoldRecord, PairRecord, RejectedRecord, TranslationRecord,
};
use crate::http_providers::{HttpClassifier, HttpClient, HttpEmbedder, HttpEntailment, HttpTranslator};
use crate::manifest::Manifest;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("missing input: {0}")]
    MissingInput(String),
    #[error("provider setup: {0}")]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Other(String),
}

impl PipelineError {
    /// 2 for problems with the configuration or its inputs, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) | PipelineError::MissingInput(_) | PipelineError::Provider(_) => 2,
            _ => 1,
        }
    }
}

/// One item that could not be processed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemError {
    pub item: String,
    pub error: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StepReport {
    pub command: String,
    pub outputs: Vec<String>,
    pub errors: Vec<ItemError>,
}

impl StepReport {
    pub fn exit_code(&self) -> i32 {
        i32::from(!self.errors.is_empty())
    }
}

/// Content tagger used when no lexicon is configured: any non-empty text
/// passes.
#[derive(Clone, Copy, Debug, Default)]
pub struct PermissiveTagger;

impl ContentTagger for PermissiveTagger {
    fn has_content_word(&self, text: &str, _: Language) -> bool {
        !text.trim().is_empty()
    }
}

/// Reads `language<TAB>word<TAB>TAG` lines; `#` starts a comment.
pub fn load_lexicon(path: &Path) -> Result<LexiconTagger, PipelineError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| PipelineError::MissingInput(format!("{}: {e}", path.display())))?;
    let mut tagger = LexiconTagger::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split('\t').collect();
        let bad = || PipelineError::Other(format!("{}:{}: expected language, word and tag", path.display(), i + 1));
        if parts.len() != 3 {
            return Err(bad());
        }
        let lang: Language = parts[0].parse().map_err(|_| bad())?;
        let tag = match parts[2] {
            "NOUN" | "PROPN" => PosTag::Noun,
            "VERB" => PosTag::Verb,
            "OTHER" => PosTag::Other,
            _ => return Err(bad()),
        };
        tagger.insert(lang, parts[1], tag);
    }
    Ok(tagger)
}

pub struct Providers {
    pub embedder: Box<dyn EmbeddingProvider>,
    pub translator: Box<dyn TranslationProvider>,
    pub entailment: Box<dyn EntailmentProvider>,
    pub classifier: Box<dyn AlignmentClassifierProvider>,
}

impl Providers {
    pub fn from_config(cfg: &PipelineConfig) -> Result<Self, ProviderError> {
        let s = &cfg.providers;
        let client = |url: &str| HttpClient::new(url, s.timeout());
        Ok(Providers {
            embedder: match s.embedding.as_str() {
                "mock" => Box::new(HashEmbedder::new(s.embedding_dim)?),
                url => Box::new(HttpEmbedder(client(url)?)),
            },
            translator: match s.translation.as_str() {
                "mock" => Box::new(IdentityTranslator),
                "glossary" => {
                    let path = cfg.paths.glossary.as_deref().ok_or_else(|| ProviderError::Config("paths.glossary is not set".into()))?;
                    Box::new(GlossaryTranslator::load(path)?)
                }
                url => Box::new(HttpTranslator(client(url)?)),
            },
            entailment: match s.entailment.as_str() {
                "mock" => Box::new(LexicalEntailment),
                url => Box::new(HttpEntailment(client(url)?)),
            },
            classifier: match s.classifier.as_str() {
                "mock" => Box::new(OverlapClassifier),
                url => Box::new(HttpClassifier(client(url)?)),
            },
        })
    }

    pub fn stage1(&self) -> Stage1Providers<'_> {
        Stage1Providers {
            embedder: self.embedder.as_ref(),
            translator: self.translator.as_ref(),
        }
    }
}

pub struct Pipeline {
    pub config: PipelineConfig,
    pool: rayon::ThreadPool,
    providers: Providers,
}

fn sentence_order(a: &Sentence, b: &Sentence) -> std::cmp::Ordering {
    (&a.page_id, a.ordinal).cmp(&(&b.page_id, b.ordinal))
}

fn require(path: &Path) -> Result<(), PipelineError> {
    if path.exists() {
        Ok(())
    } else {
        Err(PipelineError::MissingInput(path.display().to_string()))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub dump: DumpStats,
    pub sentences: usize,
    pub kept: usize,
    pub rejected: BTreeMap<String, usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistantManifest {
    pub seed: u64,
    pub counts: DistantCounts,
}

impl Pipeline {
    pub fn new(config: PipelineConfig, workers: usize) -> Result<Self, PipelineError> {
        config.validate()?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .map_err(|e| PipelineError::Other(e.to_string()))?;
        let providers = Providers::from_config(&config)?;
        Ok(Pipeline {
            config,
            pool,
            providers,
        })
    }

    /// Replaces the configured providers, for callers embedding the pipeline.
    pub fn with_providers(mut self, providers: Providers) -> Self {
        self.providers = providers;
        self
    }

    pub fn out_dir(&self) -> &Path {
        &self.config.paths.output_dir
    }

    fn out(&self, name: &str) -> PathBuf {
        self.out_dir().join(name)
    }

    fn finish(&self, mut manifest: Manifest, report: &mut StepReport) -> Result<(), PipelineError> {
        let dir = self.out_dir().to_path_buf();
        for o in &report.outputs {
            manifest.output(&dir, o)?;
        }
        let err_path = self.out(&format!("errors.{}.jsonl", report.command));
        if report.errors.is_empty() {
            if err_path.exists() {
                std::fs::remove_file(&err_path)?;
            }
        } else {
            for e in &report.errors {
                log::error!("{}: {}", e.item, e.error);
            }
            write_jsonl_file(&err_path, &report.errors)?;
        }
        write_json_file(&self.out(&format!("manifest.{}.json", report.command)), &manifest)?;
        Ok(())
    }

    fn manifest(&self, command: &str) -> Manifest {
        Manifest::new(command, self.config.hash(), self.config.seed)
    }

    fn load_entity_docs(&self) -> Result<(PathBuf, Vec<serde_json::Value>), PipelineError> {
        let path = self
            .config
            .paths
            .entity_dump
            .clone()
            .ok_or_else(|| PipelineError::MissingInput("paths.entity_dump is not configured".into()))?;
        require(&path)?;
        let docs = read_entity_docs(open_input(&path)?).map_err(|e| PipelineError::Other(format!("{}: {e}", path.display())))?;
        Ok((path, docs))
    }

    /// Dump pages to filtered sentences, per language.
    pub fn ingest(&self) -> Result<StepReport, PipelineError> {
        let mut report = StepReport {
            command: "ingest".into(),
            ..Default::default()
        };
        let mut manifest = self.manifest("ingest");
        let sitelinks = match &self.config.paths.entity_dump {
            Some(_) => {
                let (path, docs) = self.load_entity_docs()?;
                manifest.input(&path)?;
                let mut m: BTreeMap<(String, String), String> = BTreeMap::new();
                for d in &docs {
                    if let Some(id) = d.get("id").and_then(|v| v.as_str()) {
                        for (site, title) in doc_sitelinks(d) {
                            m.insert((site, title), id.to_string());
                        }
                    }
                }
                Some(m)
            }
            None => None,
        };
        let tagger: Box<dyn ContentTagger> = match &self.config.paths.lexicon {
            Some(p) => {
                let t = load_lexicon(p)?;
                manifest.input(p)?;
                Box::new(t)
            }
            None => {
                log::warn!("no lexicon configured; the content-word filter accepts every sentence");
                Box::new(PermissiveTagger)
            }
        };
        let splitter = SentenceSplitter::default();
        let detector = ScriptDetector;
        let bounds = self.config.filter.bounds();
        for &lang in &self.config.languages {
            let Some(dump) = self.config.paths.dumps.get(&lang) else {
                log::warn!("no dump configured for {lang}, skipping");
                continue;
            };
            require(dump)?;
            manifest.input(dump)?;
            let site = format!("{}wiki", lang.code());
            let mut reader = extract_pages(open_input(dump)?, lang);
            if let Some(m) = &sitelinks {
                reader = reader.with_titles(
                    m.iter()
                        .filter(|((s, _), _)| *s == site)
                        .map(|((_, t), q)| (t.clone(), q.clone()))
                        .collect(),
                );
            }
            let mut pages: Vec<WikiPage> = Vec::new();
            for item in reader.by_ref() {
                match item {
                    Ok(p) => pages.push(p),
                    Err(e) => report.errors.push(ItemError {
                        item: format!("{}", dump.display()),
                        error: e.to_string(),
                    }),
                }
            }
            let filtered: Vec<FilterReport> = self.pool.install(|| {
                pages
                    .par_iter()
                    .map(|p| filter_sentences(p.sentences(&splitter), lang, bounds, &detector, tagger.as_ref()))
                    .collect()
            });
            let mut kept: Vec<Sentence> = Vec::new();
            let mut rejected: Vec<RejectedRecord> = Vec::new();
            for f in filtered {
                kept.extend(f.kept);
                rejected.extend(f.rejected.into_iter().map(|(sentence, reason)| RejectedRecord { sentence, reason }));
            }
            kept.sort_by(sentence_order);
            rejected.sort_by(|a, b| sentence_order(&a.sentence, &b.sentence));
            let mut stats = IngestStats {
                dump: reader.stats(),
                sentences: kept.len() + rejected.len(),
                kept: kept.len(),
                ..Default::default()
            };
            for r in &rejected {
                *stats.rejected.entry(format!("{:?}", r.reason)).or_default() += 1;
            }
            let names = [
                format!("sentences.{lang}.jsonl"),
                format!("rejected.{lang}.jsonl"),
                format!("ingest.{lang}.stats.json"),
            ];
            write_jsonl_file(&self.out(&names[0]), &kept)?;
            write_jsonl_file(&self.out(&names[1]), &rejected)?;
            write_json_file(&self.out(&names[2]), &stats)?;
            log::info!(
                "{lang}: {} pages, {} sentences kept, {} rejected",
                stats.dump.emitted,
                stats.kept,
                rejected.len()
            );
            report.outputs.extend(names);
        }
        self.finish(manifest, &mut report)?;
        Ok(report)
    }

    /// Entity dump to facts of every entity with a page in a configured
    /// language.
    pub fn extract_facts(&self) -> Result<StepReport, PipelineError> {
        let mut report = StepReport {
            command: "extract-facts".into(),
            ..Default::default()
        };
        let mut manifest = self.manifest("extract-facts");
        let (path, docs) = self.load_entity_docs()?;
        manifest.input(&path)?;
        let mut labels = LabelIndex::default();
        for d in &docs {
            labels.insert_doc(d);
        }
        let sites: BTreeSet<String> = self.config.languages.iter().map(|l| format!("{}wiki", l.code())).collect();
        let subjects: Vec<&serde_json::Value> = docs
            .iter()
            .filter(|d| doc_sitelinks(d).keys().any(|s| sites.contains(s)))
            .collect();
        let allowlist: BTreeSet<Datatype> = Datatype::ALL.into_iter().collect();
        let parsed: Vec<Result<(Vec<Fact>, ParseCounts), ItemError>> = self.pool.install(|| {
            subjects
                .par_iter()
                .map(|d| {
                    parse_entity_facts(d, &allowlist, &labels).map_err(|e| ItemError {
                        item: d.get("id").and_then(|v| v.as_str()).unwrap_or("?").to_string(),
                        error: e.to_string(),
                    })
                })
                .collect()
        });
        let mut records = Vec::new();
        let mut counts = ParseCounts::default();
        for p in parsed {
            match p {
                Ok((facts, c)) => {
                    counts.merge(&c);
                    records.extend(facts.iter().map(FactRecord::from));
                }
                Err(e) => report.errors.push(e),
            }
        }
        write_jsonl_file(&self.out("facts.jsonl"), &records)?;
        write_json_file(&self.out("facts.counts.json"), &counts)?;
        log::info!("{} facts from {} entities", records.len(), subjects.len());
        report.outputs = vec!["facts.jsonl".into(), "facts.counts.json".into()];
        self.finish(manifest, &mut report)?;
        Ok(report)
    }

    fn load_facts(&self, manifest: &mut Manifest) -> Result<BTreeMap<String, Vec<Fact>>, PipelineError> {
        let path = self.out("facts.jsonl");
        require(&path)?;
        manifest.input(&path)?;
        let mut by_subject: BTreeMap<String, Vec<Fact>> = BTreeMap::new();
        for r in read_jsonl_file::<FactRecord>(&path)? {
            let f = Fact::from(r);
            by_subject.entry(f.subject.qid.clone()).or_default().push(f);
        }
        Ok(by_subject)
    }

    fn load_sentences(&self, lang: Language, manifest: &mut Manifest) -> Result<Vec<Sentence>, PipelineError> {
        let path = self.out(&format!("sentences.{lang}.jsonl"));
        require(&path)?;
        manifest.input(&path)?;
        Ok(read_jsonl_file(&path)?)
    }

    /// Candidate generation for every (entity, language) bundle.
    pub fn stage1(&self) -> Result<StepReport, PipelineError> {
        let mut report = StepReport {
            command: "stage1".into(),
            ..Default::default()
        };
        let mut manifest = self.manifest("stage1");
        let facts = self.load_facts(&mut manifest)?;
        let cfg = self.config.stage1;
        let p = self.providers.stage1();
        for &lang in &self.config.languages {
            let sentences = self.load_sentences(lang, &mut manifest)?;
            let mut by_entity: BTreeMap<String, Vec<Sentence>> = BTreeMap::new();
            for s in sentences {
                if facts.contains_key(&s.entity_id) {
                    by_entity.entry(s.entity_id.clone()).or_default().push(s);
                }
            }
            let mut bundles = Vec::new();
            for (qid, sents) in by_entity {
                let fs = facts[&qid].clone();
                let entity = fs[0].subject.clone();
                match EntityBundle::new(entity, lang, fs, sents) {
                    Ok(b) => bundles.push(b),
                    Err(e) => report.errors.push(ItemError {
                        item: format!("{qid}/{lang}"),
                        error: e.to_string(),
                    }),
                }
            }
            let prepared: Vec<_> = self.pool.install(|| {
                bundles
                    .par_iter()
                    .map(|b| {
                        prepare_bundle(b, p).map_err(|e| ItemError {
                            item: format!("{}/{lang}", b.entity.qid),
                            error: e.to_string(),
                        })
                    })
                    .collect()
            });
            let mut ok = Vec::new();
            for r in prepared {
                match r {
                    Ok(b) => ok.push(b),
                    Err(e) => report.errors.push(e),
                }
            }
            let mut sets: Vec<CandidateSet> = Vec::new();
            if !ok.is_empty() {
                let idx = build_indexes(&ok, Analyzer::default()).map_err(|e| PipelineError::Other(e.to_string()))?;
                let results: Vec<_> = self.pool.install(|| ok.par_iter().map(|b| select_candidates(b, &idx, &cfg)).collect());
                for r in results {
                    match r {
                        Ok(s) => sets.extend(s),
                        Err(e) => report.errors.push(ItemError {
                            item: lang.to_string(),
                            error: e.to_string(),
                        }),
                    }
                }
            }
            sets.sort_by(|a, b| sentence_order(&a.sentence, &b.sentence));
            let name = format!("candidates.{lang}.jsonl");
            write_jsonl_file(&self.out(&name), &sets)?;
            log::info!("{lang}: {} candidate sets from {} bundles", sets.len(), ok.len());
            report.outputs.push(name);
        }
        self.finish(manifest, &mut report)?;
        Ok(report)
    }

    fn select(&self, cs: &CandidateSet) -> Result<Option<AlignedInstance>, String> {
        let s2 = self.config.stage2;
        match s2.selector {
            Selector::Entailment => select_by_entailment(cs, self.providers.entailment.as_ref()).map_err(|e| e.to_string()),
            Selector::Classifier => {
                select_by_classifier(cs, self.providers.classifier.as_ref(), s2.cutoff).map_err(|e| e.to_string())
            }
            Selector::Overlap => Ok(baseline_overlap_select(cs, s2.cutoff)),
        }
    }

    /// Candidate selection over the stage-1 output.
    pub fn stage2(&self) -> Result<StepReport, PipelineError> {
        let mut report = StepReport {
            command: "stage2".into(),
            ..Default::default()
        };
        let mut manifest = self.manifest("stage2");
        for &lang in &self.config.languages {
            let path = self.out(&format!("candidates.{lang}.jsonl"));
            require(&path)?;
            manifest.input(&path)?;
            let sets: Vec<CandidateSet> = read_jsonl_file(&path)?;
            let results: Vec<_> = self.pool.install(|| sets.par_iter().map(|cs| self.select(cs)).collect());
            let mut aligned = Vec::new();
            for (cs, r) in sets.iter().zip(results) {
                match r {
                    Ok(Some(a)) => aligned.push(a),
                    Ok(None) => {}
                    Err(e) => report.errors.push(ItemError {
                        item: format!("{}#{}", cs.sentence.page_id, cs.sentence.ordinal),
                        error: e,
                    }),
                }
            }
            let name = format!("aligned.{lang}.jsonl");
            write_jsonl_file(&self.out(&name), &aligned)?;
            log::info!("{lang}: {} of {} sentences aligned", aligned.len(), sets.len());
            report.outputs.push(name);
        }
        self.finish(manifest, &mut report)?;
        Ok(report)
    }

    /// Distant-supervision pairs, from a pages file or from mention matching
    /// of ingested sentences against the facts.
    pub fn build_distant(&self, pages_path: Option<&Path>, language: Language) -> Result<StepReport, PipelineError> {
        let mut report = StepReport {
            command: "build-distant".into(),
            ..Default::default()
        };
        let seed = self.config.require_seed()?;
        let mut manifest = self.manifest("build-distant");
        let pages: Vec<DistantPage> = match pages_path {
            Some(p) => {
                require(p)?;
                manifest.input(p)?;
                read_jsonl_file(p)?
            }
            None => {
                let by_subject = self.load_facts(&mut manifest)?;
                let facts: Vec<Fact> = by_subject.into_values().flatten().collect();
                let sentences = self.load_sentences(language, &mut manifest)?;
                mention_alignment(&sentences, &facts)
            }
        };
        let cfg = self.config.distant.with_seed(seed);
        let embedder = self.providers.embedder.as_ref();
        let results: Vec<_> = self.pool.install(|| {
            pages
                .par_iter()
                .map(|p| (p.page_id.clone(), page_examples(p, embedder, &cfg)))
                .collect()
        });
        let mut per_page = Vec::new();
        for (id, r) in results {
            match r {
                Ok(ex) => per_page.push((id, ex)),
                Err(e) => report.errors.push(ItemError {
                    item: id,
                    error: e.to_string(),
                }),
            }
        }
        let ds = assemble_distant_dataset(per_page, &cfg);
        let to_records = |v: &[factalign_core::PairExample]| -> Vec<PairRecord> {
            v.iter()
                .map(|e| PairRecord {
                    pair_text: e.pair_text.clone(),
                    label: e.label,
                })
                .collect()
        };
        write_jsonl_file(&self.out("distant/train.jsonl"), &to_records(&ds.train))?;
        write_jsonl_file(&self.out("distant/validation.jsonl"), &to_records(&ds.validation))?;
        write_json_file(
            &self.out("distant/manifest.json"),
            &DistantManifest {
                seed,
                counts: ds.counts,
            },
        )?;
        log::info!(
            "distant: {} positives, {} negatives, {} train, {} validation",
            ds.counts.positives,
            ds.counts.negatives,
            ds.counts.train,
            ds.counts.validation
        );
        report.outputs = vec![
            "distant/train.jsonl".into(),
            "distant/validation.jsonl".into(),
            "distant/manifest.json".into(),
        ];
        self.finish(manifest, &mut report)?;
        Ok(report)
    }

    /// Annotation tasks from stage-1 output, reference translations and
    /// optional expert answers.
    pub fn create_tasks(
        &self,
        language: Language,
        translations: &Path,
        gold: Option<&Path>,
    ) -> Result<StepReport, PipelineError> {
        let mut report = StepReport {
            command: format!("create-tasks.{language}"),
            ..Default::default()
        };
        let mut manifest = self.manifest(&report.command);
        let cands = self.out(&format!("candidates.{language}.jsonl"));
        for p in [Some(cands.as_path()), Some(translations), gold].into_iter().flatten() {
            require(p)?;
            manifest.input(p)?;
        }
        let sets: Vec<CandidateSet> = read_jsonl_file(&cands)?;
        let tr: BTreeMap<SentenceKey, String> = read_jsonl_file::<TranslationRecord>(translations)?
            .into_iter()
            .map(|t| ((t.page_id, t.ordinal), t.translation))
            .collect();
        let golden: BTreeMap<SentenceKey, BTreeSet<String>> = match gold {
            Some(g) => read_jsonl_file::<GoldRecord>(g)?
                .into_iter()
                .map(|r| ((r.page_id, r.ordinal), r.facts.into_iter().collect()))
                .collect(),
            None => BTreeMap::new(),
        };
        let tasks = create_tasks(&sets, &tr, &golden).map_err(|e| PipelineError::Other(e.to_string()))?;
        let name = format!("tasks.{language}.jsonl");
        write_jsonl_file(&self.out(&name), &tasks)?;
        report.outputs.push(name);
        self.finish(manifest, &mut report)?;
        Ok(report)
    }

    /// ingest, extract-facts, stage1 and stage2 in sequence.
    pub fn run_all(&self) -> Result<Vec<StepReport>, PipelineError> {
        Ok(vec![self.ingest()?, self.extract_facts()?, self.stage1()?, self.stage2()?])
    }
}

/// Reads annotation tasks written by `create-tasks`.
pub fn load_tasks(paths: &[PathBuf]) -> Result<Vec<AnnotationTask>, PipelineError> {
    let mut out = Vec::new();
    for p in paths {
        require(p)?;
        out.extend(read_jsonl_file::<AnnotationTask>(p)?);
    }
    Ok(out)
}

/// Lines of a plain-text file, for BLEU inputs.
pub fn read_lines(path: &Path) -> Result<Vec<String>, PipelineError> {
    use std::io::BufRead;
    require(path)?;
    let f = File::open(path)?;
    Ok(BufReader::new(f).lines().collect::<Result<_, _>>()?)
}

/// Tallies rejection reasons of a filter run, in a fixed order.
pub fn reason_counts(report: &FilterReport) -> [(RejectReason, usize); 4] {
    [
        RejectReason::WrongLanguage,
        RejectReason::TooShort,
        RejectReason::TooLong,
        RejectReason::NoContentWord,
    ]
    .map(|r| (r, report.count(r)))
}
