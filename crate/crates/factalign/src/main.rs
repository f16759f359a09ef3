use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use factalign::annotation::{system_clock, AnnotationService};
use factalign::config::PipelineConfig;
use factalign::formats::{read_jsonl_file, FactSetRecord};
use factalign::pipeline::{load_tasks, read_lines, Pipeline, PipelineError, StepReport};
use factalign::report;
use factalign_core::metrics::{average_pairwise_kappa, corpus_bleu, dataset_stats, selection_f1, BleuTokenizer};
use factalign_core::stage2::AlignedInstance;
use factalign_core::{FactKey, Language};

#[derive(Parser)]
#[command(name = "factalign", version, about = "Cross-lingual fact-to-text alignment toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, default_value = "factalign.toml")]
    config: PathBuf,
    /// Worker threads; output does not depend on it.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    /// Four comma-separated component weights: native embedding, TF-IDF in the
    /// sentence language, TF-IDF in English, translated embedding.
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
}

#[derive(Subcommand)]
enum Command {
    /// Dump pages to filtered sentences.
    Ingest(Common),
    /// Facts from the entity dump.
    ExtractFacts(Common),
    /// Candidate facts per sentence.
    Stage1(Common),
    /// Fact selection from the candidates.
    Stage2(Common),
    /// ingest, extract-facts, stage1 and stage2.
    Run(Common),
    /// Distant-supervision pairs for the alignment classifier.
    BuildDistant {
        #[command(flatten)]
        common: Common,
        /// Pre-aligned pages; defaults to mention matching over ingested sentences.
        #[arg(long)]
        pages: Option<PathBuf>,
        #[arg(long, default_value = "en")]
        language: Language,
    },
    /// Annotation tasks from stage-1 candidates.
    CreateTasks {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        language: Language,
        #[arg(long)]
        translations: PathBuf,
        #[arg(long)]
        gold: Option<PathBuf>,
    },
    /// Runs the annotation service over task files.
    Serve {
        #[command(flatten)]
        common: Common,
        tasks: Vec<PathBuf>,
        #[arg(long)]
        bind: Option<String>,
    },
    #[command(subcommand)]
    Eval(Eval),
}

#[derive(Subcommand)]
enum Eval {
    /// Fact-selection F1 of predicted against gold fact sets.
    F1 {
        #[arg(long)]
        predicted: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long, default_value = "system")]
        method: String,
        /// Adds the published transfer-learning row.
        #[arg(long)]
        reference: bool,
        #[arg(long)]
        json: bool,
    },
    /// Average pairwise Cohen's kappa from `{annotator: [0|1, ...]}`.
    Kappa {
        marks: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Corpus BLEU of hypothesis lines against reference lines.
    Bleu {
        #[arg(long)]
        hypotheses: PathBuf,
        #[arg(long)]
        references: PathBuf,
        #[arg(long, default_value = "en")]
        language: Language,
        #[arg(long, default_value = "model")]
        model: String,
        #[arg(long)]
        json: bool,
    },
    /// Dataset statistics of an aligned file.
    Stats {
        aligned: PathBuf,
        #[arg(long)]
        language: Language,
        #[arg(long)]
        json: bool,
    },
}

fn load_config(c: &Common) -> Result<PipelineConfig, PipelineError> {
    let mut cfg = PipelineConfig::load(&c.config)?;
    cfg.apply_env(|k| std::env::var(k).ok());
    if let Some(s) = c.seed {
        cfg.seed = Some(s);
    }
    if let Some(t) = c.tau {
        cfg.stage1.tau = t;
    }
    if let Some(k) = c.k {
        cfg.stage1.k = k;
    }
    if let Some(w) = &c.weights {
        if w.len() != 4 {
            return Err(PipelineError::Config(factalign::config::ConfigError::Invalid(
                "--weights needs four values".into(),
            )));
        }
        cfg.stage1.weights = [w[0], w[1], w[2], w[3]];
    }
    Ok(cfg)
}

fn pipeline(c: &Common) -> Result<Pipeline, PipelineError> {
    let cfg = load_config(c)?;
    std::fs::create_dir_all(&cfg.paths.output_dir)?;
    Pipeline::new(cfg, c.workers)
}

fn steps(r: Result<Vec<StepReport>, PipelineError>) -> ExitCode {
    match r {
        Ok(reports) => {
            let code = reports.iter().map(StepReport::exit_code).max().unwrap_or(0);
            for rep in &reports {
                if !rep.errors.is_empty() {
                    eprintln!(
                        "{}: {} item(s) failed, see errors.{}.jsonl",
                        rep.command,
                        rep.errors.len(),
                        rep.command
                    );
                }
            }
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn fact_sets(path: &Path) -> anyhow::Result<BTreeMap<String, (Language, BTreeSet<FactKey>)>> {
    let mut out = BTreeMap::new();
    for r in read_jsonl_file::<FactSetRecord>(path)? {
        let keys = r
            .facts
            .iter()
            .map(|f| f.parse::<FactKey>())
            .collect::<Result<BTreeSet<_>, _>>()
            .with_context(|| format!("{}: record {}", path.display(), r.id))?;
        out.insert(r.id, (r.language, keys));
    }
    Ok(out)
}

fn print_json<T: serde::Serialize>(v: &T) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn eval(cmd: Eval) -> anyhow::Result<()> {
    match cmd {
        Eval::F1 {
            predicted,
            gold,
            method,
            reference,
            json,
        } => {
            let pred = fact_sets(&predicted)?;
            let gold = fact_sets(&gold)?;
            let mut p = Vec::new();
            let mut g = Vec::new();
            let mut langs = Vec::new();
            for (id, (lang, facts)) in &gold {
                g.push(facts.clone());
                langs.push(*lang);
                p.push(pred.get(id).map(|x| x.1.clone()).unwrap_or_default());
            }
            let rep = selection_f1(&p, &g, &langs)?;
            if json {
                print_json(&rep)?;
            } else {
                print!("{}", report::f1_table(&method, &rep, reference));
            }
        }
        Eval::Kappa { marks, json } => {
            let text = std::fs::read_to_string(&marks).with_context(|| marks.display().to_string())?;
            let raw: BTreeMap<String, Vec<u8>> = serde_json::from_str(&text)?;
            let m: BTreeMap<String, Vec<bool>> =
                raw.into_iter().map(|(k, v)| (k, v.into_iter().map(|x| x != 0).collect())).collect();
            let rep = average_pairwise_kappa(&m)?;
            if json {
                let pairs: BTreeMap<String, f64> =
                    rep.pairwise_kappa.iter().map(|((a, b), k)| (format!("{a}/{b}"), *k)).collect();
                print_json(&serde_json::json!({
                    "average_kappa": rep.average_kappa,
                    "item_count": rep.item_count,
                    "pairwise_kappa": pairs,
                }))?;
            } else {
                print!("{}", report::kappa_table(&rep));
            }
        }
        Eval::Bleu {
            hypotheses,
            references,
            language,
            model,
            json,
        } => {
            let h = read_lines(&hypotheses)?;
            let r = read_lines(&references)?;
            let score = corpus_bleu(&h, &r, BleuTokenizer::default())?;
            if json {
                print_json(&score)?;
            } else {
                print!("{}", report::bleu_table(&model, &BTreeMap::from([(language, score)])));
            }
        }
        Eval::Stats { aligned, language, json } => {
            let inst: Vec<AlignedInstance> = read_jsonl_file(&aligned)?;
            let rep = dataset_stats(&inst, language)?;
            if json {
                print_json(&rep)?;
            } else {
                print!("{}", report::stats_table(&[rep]));
            }
        }
    }
    Ok(())
}

fn serve(common: &Common, tasks: &[PathBuf], bind: Option<String>) -> Result<(), PipelineError> {
    let cfg = load_config(common)?;
    let tasks = load_tasks(tasks)?;
    let service =
        AnnotationService::open(cfg.annotation.service.clone(), system_clock()).map_err(|e| PipelineError::Other(e.to_string()))?;
    let added = service.add_tasks(tasks).map_err(|e| PipelineError::Other(e.to_string()))?;
    log::info!("{added} new task(s) loaded");
    let addr = bind
        .unwrap_or(cfg.annotation.bind)
        .parse()
        .map_err(|e| PipelineError::Other(format!("bind address: {e}")))?;
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(factalign::annotation::http::serve(Arc::new(service), addr))?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Ingest(c) => steps(pipeline(&c).and_then(|p| p.ingest().map(|r| vec![r]))),
        Command::ExtractFacts(c) => steps(pipeline(&c).and_then(|p| p.extract_facts().map(|r| vec![r]))),
        Command::Stage1(c) => steps(pipeline(&c).and_then(|p| p.stage1().map(|r| vec![r]))),
        Command::Stage2(c) => steps(pipeline(&c).and_then(|p| p.stage2().map(|r| vec![r]))),
        Command::Run(c) => steps(pipeline(&c).and_then(|p| p.run_all())),
        Command::BuildDistant { common, pages, language } => {
            steps(pipeline(&common).and_then(|p| p.build_distant(pages.as_deref(), language).map(|r| vec![r])))
        }
        Command::CreateTasks {
            common,
            language,
            translations,
            gold,
        } => steps(
            pipeline(&common).and_then(|p| p.create_tasks(language, &translations, gold.as_deref()).map(|r| vec![r])),
        ),
        Command::Serve { common, tasks, bind } => match serve(&common, &tasks, bind) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(e.exit_code() as u8)
            }
        },
        Command::Eval(e) => match eval(e) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(2)
            }
        },
    }
}
