//! Task assignment, submission storage and annotator qualification.
//!
//! Every state change is an [`Event`]. Live operations validate, append the
//! event to the log and then apply it, all under one lock, so replaying the
//! log rebuilds exactly the same state.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard};

use serde::{Deserialize, Serialize};
use factalign_core::metrics::cohen_kappa;
use factalign_core::stage2::{AlignedInstance, SelectionMethod};
use factalign_core::Language;

use super::{
    aggregate, Aggregation, AnnotationError, AnnotationSubmission, AnnotationTask,
    AnnotatorProfile, SubmissionRequest, TaskPayload,
};

pub const DEFAULT_GOLDEN_QUOTA: usize = 60;
pub const DEFAULT_TOP_N: usize = 4;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServiceConfig {
    /// Golden tasks an annotator must complete before qualification.
    pub golden_quota: usize,
    pub top_n: usize,
    pub admin_token: Option<String>,
    pub event_log: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            golden_quota: DEFAULT_GOLDEN_QUOTA,
            top_n: DEFAULT_TOP_N,
            admin_token: None,
            event_log: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    TaskAdded { task: AnnotationTask },
    AnnotatorRegistered { annotator_id: String, language: Language },
    Assigned { task_id: String, annotator_id: String },
    Submitted { submission: AnnotationSubmission },
    Qualified { language: Language, profiles: Vec<AnnotatorProfile> },
}

/// Full service state; two services are equivalent iff their states are equal.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct State {
    pub tasks: BTreeMap<String, AnnotationTask>,
    /// Task ids in insertion order.
    pub task_order: Vec<String>,
    pub annotators: BTreeMap<String, AnnotatorProfile>,
    /// Task ids served to each annotator, in serving order.
    pub served: BTreeMap<String, Vec<String>>,
    pub serve_count: BTreeMap<String, usize>,
    pub submissions: Vec<AnnotationSubmission>,
    /// Serialized form of every submission, keyed by record id.
    pub stored: BTreeMap<String, String>,
    /// `(task, annotator)` to record id.
    pub by_pair: BTreeMap<(String, String), String>,
}

impl State {
    fn apply(&mut self, event: &Event) {
        match event {
            Event::TaskAdded { task } => {
                if !self.tasks.contains_key(&task.task_id) {
                    self.task_order.push(task.task_id.clone());
                }
                self.tasks.insert(task.task_id.clone(), task.clone());
            }
            Event::AnnotatorRegistered {
                annotator_id,
                language,
            } => {
                self.annotators.insert(
                    annotator_id.clone(),
                    AnnotatorProfile {
                        annotator_id: annotator_id.clone(),
                        language: *language,
                        golden_kappa: None,
                        qualified: false,
                    },
                );
            }
            Event::Assigned {
                task_id,
                annotator_id,
            } => {
                self.served
                    .entry(annotator_id.clone())
                    .or_default()
                    .push(task_id.clone());
                *self.serve_count.entry(task_id.clone()).or_default() += 1;
            }
            Event::Submitted { submission } => {
                let line = serde_json::to_string(submission).expect("submission serializes");
                self.stored.insert(submission.record_id.clone(), line);
                self.by_pair.insert(
                    (submission.task_id.clone(), submission.annotator_id.clone()),
                    submission.record_id.clone(),
                );
                self.submissions.push(submission.clone());
            }
            Event::Qualified { profiles, .. } => {
                for p in profiles {
                    self.annotators.insert(p.annotator_id.clone(), p.clone());
                }
            }
        }
    }

    fn was_served(&self, annotator: &str, task: &str) -> bool {
        self.served
            .get(annotator)
            .is_some_and(|v| v.iter().any(|t| t == task))
    }

    fn golden_in(&self, language: Language) -> usize {
        self.tasks
            .values()
            .filter(|t| t.is_golden && t.language == language)
            .count()
    }

    fn effective_quota(&self, quota: usize, language: Language) -> usize {
        quota.min(self.golden_in(language))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    pub annotator_id: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QualificationReport {
    pub language: Language,
    /// Best first.
    pub ranking: Vec<AnnotatorProfile>,
    pub excluded: Vec<Exclusion>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkippedTask {
    pub task_id: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExportReport {
    pub language: Language,
    pub rule: Aggregation,
    pub instances: Vec<AlignedInstance>,
    /// Tasks whose aggregated fact set was empty.
    pub empty: usize,
    pub skipped: Vec<SkippedTask>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageStats {
    pub tasks: usize,
    pub golden_tasks: usize,
    pub annotators: usize,
    pub qualified: usize,
    pub submissions: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServiceStats {
    pub per_language: BTreeMap<Language, LanguageStats>,
    pub events: usize,
}

pub type Clock = Arc<dyn Fn() -> u64 + Send + Sync>;

pub fn system_clock() -> Clock {
    Arc::new(|| {
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    })
}

struct Inner {
    state: State,
    events: Vec<Event>,
    log: Option<File>,
}

pub struct AnnotationService {
    inner: Mutex<Inner>,
    config: ServiceConfig,
    clock: Clock,
}

fn read_log(path: &Path) -> Result<Vec<Event>, AnnotationError> {
    let file = File::open(path).map_err(|e| AnnotationError::Log(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| AnnotationError::Log(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| AnnotationError::Log(format!("{}:{}: {e}", path.display(), i + 1)))?,
        );
    }
    Ok(out)
}

impl AnnotationService {
    /// Opens the service, replaying the configured event log if it exists.
    pub fn open(config: ServiceConfig, clock: Clock) -> Result<Self, AnnotationError> {
        let mut events = Vec::new();
        let mut log = None;
        if let Some(path) = &config.event_log {
            if path.exists() {
                events = read_log(path)?;
            } else if let Some(dir) = path.parent() {
                std::fs::create_dir_all(dir).map_err(|e| AnnotationError::Log(e.to_string()))?;
            }
            log = Some(
                OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(path)
                    .map_err(|e| AnnotationError::Log(format!("{}: {e}", path.display())))?,
            );
        }
        let mut state = State::default();
        for e in &events {
            state.apply(e);
        }
        Ok(AnnotationService {
            inner: Mutex::new(Inner { state, events, log }),
            config,
            clock,
        })
    }

    /// An in-memory service rebuilt from events.
    pub fn replay(config: ServiceConfig, clock: Clock, events: &[Event]) -> Self {
        let mut state = State::default();
        for e in events {
            state.apply(e);
        }
        AnnotationService {
            inner: Mutex::new(Inner {
                state,
                events: events.to_vec(),
                log: None,
            }),
            config: ServiceConfig {
                event_log: None,
                ..config
            },
            clock,
        }
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    fn lock(&self) -> MutexGuard<'_, Inner> {
        self.inner.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn commit(inner: &mut Inner, event: Event) -> Result<(), AnnotationError> {
        if let Some(f) = inner.log.as_mut() {
            let mut line = serde_json::to_string(&event).map_err(|e| AnnotationError::Log(e.to_string()))?;
            line.push('\n');
            f.write_all(line.as_bytes())
                .and_then(|_| f.flush())
                .map_err(|e| AnnotationError::Log(e.to_string()))?;
        }
        inner.state.apply(&event);
        inner.events.push(event);
        Ok(())
    }

    pub fn events(&self) -> Vec<Event> {
        self.lock().events.clone()
    }

    pub fn state(&self) -> State {
        self.lock().state.clone()
    }

    /// Adds tasks. Re-adding an identical task is a no-op; a different task
    /// under an existing id is rejected. Returns the number of new tasks.
    pub fn add_tasks(&self, tasks: Vec<AnnotationTask>) -> Result<usize, AnnotationError> {
        let mut inner = self.lock();
        let mut fresh = BTreeSet::new();
        for t in &tasks {
            if t.facts.is_empty() {
                return Err(AnnotationError::Invalid(format!("task {} has no facts", t.task_id)));
            }
            match inner.state.tasks.get(&t.task_id) {
                Some(existing) if existing == t => {}
                Some(_) => return Err(AnnotationError::DuplicateTask(t.task_id.clone())),
                None => {
                    if !fresh.insert(t.task_id.clone()) {
                        return Err(AnnotationError::DuplicateTask(t.task_id.clone()));
                    }
                }
            }
        }
        let mut added = 0;
        for t in tasks {
            if fresh.contains(&t.task_id) {
                Self::commit(&mut inner, Event::TaskAdded { task: t })?;
                added += 1;
            }
        }
        Ok(added)
    }

    /// Registers an annotator. Registering again with the same language is a
    /// no-op.
    pub fn register(&self, annotator_id: &str, language: Language) -> Result<AnnotatorProfile, AnnotationError> {
        if annotator_id.trim().is_empty() {
            return Err(AnnotationError::Invalid("empty annotator id".into()));
        }
        let mut inner = self.lock();
        if let Some(p) = inner.state.annotators.get(annotator_id) {
            return if p.language == language {
                Ok(p.clone())
            } else {
                Err(AnnotationError::AnnotatorConflict(annotator_id.into()))
            };
        }
        Self::commit(
            &mut inner,
            Event::AnnotatorRegistered {
                annotator_id: annotator_id.into(),
                language,
            },
        )?;
        Ok(inner.state.annotators[annotator_id].clone())
    }

    /// Serves the next task. Unqualified annotators only get golden tasks,
    /// up to the quota; qualified annotators get regular tasks they have not
    /// seen, least served first.
    pub fn next_task(&self, annotator_id: &str) -> Result<Option<TaskPayload>, AnnotationError> {
        let mut inner = self.lock();
        let state = &inner.state;
        let profile = state
            .annotators
            .get(annotator_id)
            .ok_or_else(|| AnnotationError::UnknownAnnotator(annotator_id.into()))?;
        let lang = profile.language;
        let seen: BTreeSet<&str> = state
            .served
            .get(annotator_id)
            .map(|v| v.iter().map(String::as_str).collect())
            .unwrap_or_default();
        let pick = if profile.qualified {
            state
                .task_order
                .iter()
                .enumerate()
                .map(|(i, id)| (i, &state.tasks[id]))
                .filter(|(_, t)| !t.is_golden && t.language == lang && !seen.contains(t.task_id.as_str()))
                .min_by_key(|(i, t)| (state.serve_count.get(&t.task_id).copied().unwrap_or(0), *i))
                .map(|(_, t)| t.task_id.clone())
        } else {
            let golden_served = seen.iter().filter(|id| state.tasks[**id].is_golden).count();
            if golden_served >= state.effective_quota(self.config.golden_quota, lang) {
                None
            } else {
                state
                    .task_order
                    .iter()
                    .map(|id| &state.tasks[id])
                    .find(|t| t.is_golden && t.language == lang && !seen.contains(t.task_id.as_str()))
                    .map(|t| t.task_id.clone())
            }
        };
        let Some(task_id) = pick else {
            return Ok(None);
        };
        Self::commit(
            &mut inner,
            Event::Assigned {
                task_id: task_id.clone(),
                annotator_id: annotator_id.into(),
            },
        )?;
        Ok(Some(inner.state.tasks[&task_id].payload()))
    }

    /// Validates and stores a submission, returning its record id.
    pub fn submit(
        &self,
        task_id: &str,
        annotator_id: &str,
        request: SubmissionRequest,
    ) -> Result<String, AnnotationError> {
        if let Some(body_id) = &request.annotator_id {
            if body_id != annotator_id {
                return Err(AnnotationError::Invalid(format!(
                    "annotator {body_id} in body does not match {annotator_id}"
                )));
            }
        }
        let mut inner = self.lock();
        let state = &inner.state;
        let task = state
            .tasks
            .get(task_id)
            .ok_or_else(|| AnnotationError::UnknownTask(task_id.into()))?;
        if !state.annotators.contains_key(annotator_id) {
            return Err(AnnotationError::UnknownAnnotator(annotator_id.into()));
        }
        if state.by_pair.contains_key(&(task_id.to_string(), annotator_id.to_string())) {
            return Err(AnnotationError::Duplicate {
                task_id: task_id.into(),
                annotator_id: annotator_id.into(),
            });
        }
        if !state.was_served(annotator_id, task_id) {
            return Err(AnnotationError::NotServed {
                task_id: task_id.into(),
                annotator_id: annotator_id.into(),
            });
        }
        let mut marked = BTreeSet::new();
        for id in &request.marked_fact_ids {
            if !task.fact_ids().any(|f| f == id) {
                return Err(AnnotationError::Invalid(format!("fact {id} is not part of task {task_id}")));
            }
            if !marked.insert(id.clone()) {
                return Err(AnnotationError::Invalid(format!("fact {id} marked twice")));
            }
        }
        if request.coverage.is_none() && request.issue_text.trim().is_empty() {
            return Err(AnnotationError::Invalid(
                "either a coverage choice or an issue description is required".into(),
            ));
        }
        let record_id = format!("r{:08}", state.submissions.len() + 1);
        let submission = AnnotationSubmission {
            record_id: record_id.clone(),
            task_id: task_id.into(),
            annotator_id: annotator_id.into(),
            marked_fact_ids: marked,
            coverage: request.coverage,
            issue_text: request.issue_text,
            timestamp: (self.clock)(),
        };
        Self::commit(&mut inner, Event::Submitted { submission })?;
        Ok(record_id)
    }

    /// The stored serialization of a submission.
    pub fn stored_submission(&self, record_id: &str) -> Option<String> {
        self.lock().state.stored.get(record_id).cloned()
    }

    /// Scores every annotator of `language` against the golden answers and
    /// marks the best `top_n` as qualified.
    pub fn qualify(&self, language: Language, top_n: usize) -> Result<QualificationReport, AnnotationError> {
        let mut inner = self.lock();
        let report = qualification(&inner.state, language, top_n, self.config.golden_quota);
        let mut profiles = report.ranking.clone();
        for ex in &report.excluded {
            let mut p = inner.state.annotators[&ex.annotator_id].clone();
            p.golden_kappa = None;
            p.qualified = false;
            profiles.push(p);
        }
        Self::commit(&mut inner, Event::Qualified { language, profiles })?;
        Ok(report)
    }

    pub fn export_gold(&self, language: Language, rule: Aggregation) -> ExportReport {
        let inner = self.lock();
        let state = &inner.state;
        let mut report = ExportReport {
            language,
            rule,
            instances: Vec::new(),
            empty: 0,
            skipped: Vec::new(),
        };
        for id in &state.task_order {
            let task = &state.tasks[id];
            if task.is_golden || task.language != language {
                continue;
            }
            let sets: Vec<&BTreeSet<String>> = state
                .submissions
                .iter()
                .filter(|s| {
                    &s.task_id == id
                        && state
                            .annotators
                            .get(&s.annotator_id)
                            .is_some_and(|a| a.qualified)
                })
                .map(|s| &s.marked_fact_ids)
                .collect();
            if sets.is_empty() {
                report.skipped.push(SkippedTask {
                    task_id: id.clone(),
                    reason: "no qualified submissions".into(),
                });
                continue;
            }
            let keep = aggregate(&sets, rule);
            if keep.is_empty() {
                report.empty += 1;
                continue;
            }
            let facts = task
                .facts
                .iter()
                .zip(&task.source_facts)
                .filter(|(tf, _)| keep.contains(&tf.fact_id))
                .map(|(_, f)| f.clone())
                .collect();
            report.instances.push(AlignedInstance {
                sentence: task.sentence.clone(),
                facts,
                method: SelectionMethod::Gold,
                section: task.sentence.section.clone(),
            });
        }
        report
    }

    pub fn stats(&self) -> ServiceStats {
        let inner = self.lock();
        let state = &inner.state;
        let mut per: BTreeMap<Language, LanguageStats> = BTreeMap::new();
        for t in state.tasks.values() {
            let e = per.entry(t.language).or_default();
            e.tasks += 1;
            e.golden_tasks += usize::from(t.is_golden);
        }
        for a in state.annotators.values() {
            let e = per.entry(a.language).or_default();
            e.annotators += 1;
            e.qualified += usize::from(a.qualified);
        }
        for s in &state.submissions {
            if let Some(t) = state.tasks.get(&s.task_id) {
                per.entry(t.language).or_default().submissions += 1;
            }
        }
        ServiceStats {
            per_language: per,
            events: inner.events.len(),
        }
    }
}

/// Qualification as a pure function of the state.
///
/// Each annotator's marks on the golden tasks they submitted (tasks by id,
/// facts in task order) are compared with the gold answers by Cohen's kappa.
/// Annotators with fewer golden submissions than the quota are excluded.
pub fn qualification(state: &State, language: Language, top_n: usize, quota: usize) -> QualificationReport {
    let quota = state.effective_quota(quota, language);
    let mut scored = Vec::new();
    let mut excluded = Vec::new();
    for a in state.annotators.values().filter(|a| a.language == language) {
        let mut golden: Vec<(&AnnotationTask, &AnnotationSubmission)> = state
            .submissions
            .iter()
            .filter(|s| s.annotator_id == a.annotator_id)
            .filter_map(|s| state.tasks.get(&s.task_id).filter(|t| t.is_golden).map(|t| (t, s)))
            .collect();
        if quota == 0 {
            excluded.push(Exclusion {
                annotator_id: a.annotator_id.clone(),
                reason: "no golden tasks in this language".into(),
            });
            continue;
        }
        if golden.len() < quota {
            excluded.push(Exclusion {
                annotator_id: a.annotator_id.clone(),
                reason: format!("completed {} of {quota} golden tasks", golden.len()),
            });
            continue;
        }
        golden.sort_by(|x, y| x.0.task_id.cmp(&y.0.task_id));
        let mut marks = Vec::new();
        let mut gold = Vec::new();
        for (t, s) in golden {
            let answer = t.gold.clone().unwrap_or_default();
            for id in t.fact_ids() {
                marks.push(s.marked_fact_ids.contains(id));
                gold.push(answer.contains(id));
            }
        }
        match cohen_kappa(&marks, &gold) {
            Ok(k) => scored.push((a.annotator_id.clone(), k)),
            Err(e) => excluded.push(Exclusion {
                annotator_id: a.annotator_id.clone(),
                reason: e.to_string(),
            }),
        }
    }
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let ranking = scored
        .into_iter()
        .enumerate()
        .map(|(i, (id, k))| AnnotatorProfile {
            annotator_id: id,
            language,
            golden_kappa: Some(k),
            qualified: i < top_n,
        })
        .collect();
    QualificationReport {
        language,
        ranking,
        excluded,
    }
}
