//! Command-line front end: `split`, `train`, `assign`, `evaluate` and
//! `extract-baseline`.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use crate::assigner::assign;
use crate::baseline::LabelMatcher;
use crate::config::RunConfig;
use crate::corpus::{split_stratified, Corpus};
use crate::error::{Error, Result};
use crate::evaluator::{evaluate, evaluate_rankings, EvalReport, RankedDocument};
use crate::persist::{load_model, save_model};
use crate::preprocess::{preprocess, PreprocessConfig};
use crate::thesaurus::Thesaurus;
use crate::trainer::{train_with_summary, Model, SkipReason, TrainSummary};

#[derive(Debug, Parser)]
#[command(name = "assoc-index", version, about = "Assign thesaurus descriptors to documents")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stratified train/test split of a corpus by document type.
    Split(SplitArgs),
    /// Learn associate lists and write a model file.
    Train(TrainArgs),
    /// Rank descriptors for each input document.
    Assign(AssignArgs),
    /// Score a model against the gold descriptors of a test corpus.
    Evaluate(EvaluateArgs),
    /// Propose descriptors whose labels occur verbatim in the text.
    ExtractBaseline(BaselineArgs),
}

#[derive(Debug, Args, Default)]
pub struct Overrides {
    /// Run configuration file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub language: Option<String>,
    #[arg(long)]
    pub p_value: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub min_texts_per_descriptor: Option<usize>,
    #[arg(long)]
    pub min_chars_per_text: Option<usize>,
    #[arg(long)]
    pub min_texts_per_lemma: Option<usize>,
    #[arg(long)]
    pub min_associate_weight: Option<f64>,
    #[arg(long)]
    pub min_associates_per_descriptor: Option<usize>,
    #[arg(long)]
    pub min_associates_present: Option<usize>,
    /// Cosine, okapi and dot-product weights, e.g. `0.4,0.2,0.4`
    #[arg(long, value_delimiter = ',', num_args = 3)]
    pub combo_weights: Option<Vec<f64>>,
    #[arg(long)]
    pub okapi_k1: Option<f64>,
    #[arg(long)]
    pub okapi_b: Option<f64>,
    #[arg(long)]
    pub top_k: Option<usize>,
    #[arg(long)]
    pub require_label_in_text: bool,
    /// Ranks to report, e.g. `1,3,5,8,10,11`
    #[arg(long, value_delimiter = ',')]
    pub ranks: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[command(flatten)]
    pub common: Overrides,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub train_out: Option<PathBuf>,
    #[arg(long)]
    pub test_out: Option<PathBuf>,
    #[arg(long)]
    pub test_fraction: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Overrides,
    /// Training corpus (defaults to `paths.train`, then `paths.corpus`)
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Also write the training summary as JSON
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AssignArgs {
    #[command(flatten)]
    pub common: Overrides,
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Documents to index (defaults to `paths.test`)
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output file (defaults to `paths.output`, then standard output)
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub thesaurus: Option<PathBuf>,
    /// Append the descriptor label as a fifth column
    #[arg(long)]
    pub with_labels: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub common: Overrides,
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Test corpus (defaults to `paths.test`)
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long)]
    pub thesaurus: Option<PathBuf>,
    /// JSON report file (defaults to `paths.report`)
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[command(flatten)]
    pub common: Overrides,
    #[arg(long)]
    pub thesaurus: Option<PathBuf>,
    /// Documents to scan (defaults to `paths.test`)
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub use_lemmas: bool,
    #[arg(long)]
    pub use_stopwords: bool,
    #[arg(long)]
    pub use_non_descriptors: bool,
}

impl Overrides {
    fn load(&self) -> Result<RunConfig> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(lang) = &self.language {
            config.language = lang.clone();
        }
        let t = &mut config.training;
        set(&mut t.p_value, self.p_value);
        set(&mut t.beta, self.beta);
        set(&mut t.min_texts_per_descriptor, self.min_texts_per_descriptor);
        set(&mut t.min_chars_per_text, self.min_chars_per_text);
        set(&mut t.min_texts_per_lemma, self.min_texts_per_lemma);
        set(&mut t.min_associate_weight, self.min_associate_weight);
        set(&mut t.min_associates_per_descriptor, self.min_associates_per_descriptor);
        let a = &mut config.assign;
        set(&mut a.min_associates_present, self.min_associates_present);
        if let Some(w) = &self.combo_weights {
            a.combo_weights = [w[0], w[1], w[2]];
        }
        set(&mut a.okapi_k1, self.okapi_k1);
        set(&mut a.okapi_b, self.okapi_b);
        set(&mut a.top_k, self.top_k);
        a.require_label_in_text |= self.require_label_in_text;
        if let Some(ranks) = &self.ranks {
            config.evaluation.ranks = ranks.clone();
        }
        config.validate()?;
        Ok(config)
    }
}

fn set<T: Copy>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn pick(flag: &Option<PathBuf>, fallbacks: &[&Option<PathBuf>], what: &str) -> Result<PathBuf> {
    flag.iter()
        .chain(fallbacks.iter().copied().flatten())
        .next()
        .cloned()
        .ok_or_else(|| Error::InvalidConfig(format!("no {what} path given")))
}

fn must_exist(path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::io(path, std::io::Error::new(std::io::ErrorKind::NotFound, "file not found")))
    }
}

fn write_output(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(path) => std::fs::write(path, content).map_err(|e| Error::io(path, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(content.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn write_report(path: Option<&Path>, report: &EvalReport) -> Result<()> {
    if let Some(path) = path {
        let mut json = serde_json::to_string_pretty(report).expect("report serialises");
        json.push('\n');
        std::fs::write(path, json).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

fn check_pipeline(model: &Model, preprocess: &PreprocessConfig) -> Result<()> {
    let current = preprocess.fingerprint();
    if current != model.training_config.preprocess {
        return Err(Error::PipelineMismatch(format!(
            "model {:?}, configuration {:?}",
            model.training_config.preprocess, current
        )));
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Split(args) => run_split(args),
        Command::Train(args) => run_train(args),
        Command::Assign(args) => run_assign(args),
        Command::Evaluate(args) => run_evaluate(args),
        Command::ExtractBaseline(args) => run_baseline(args),
    }
}

fn run_split(args: SplitArgs) -> Result<()> {
    let config = args.common.load()?;
    let corpus_path = pick(&args.corpus, &[&config.paths.corpus], "corpus")?;
    let train_path = pick(&args.train_out, &[&config.paths.train], "train output")?;
    let test_path = pick(&args.test_out, &[&config.paths.test], "test output")?;
    let fraction = args.test_fraction.unwrap_or(config.split.test_fraction);
    let seed = args.seed.unwrap_or(config.split.seed);

    let corpus = Corpus::load(&corpus_path)?;
    let (train, test) = split_stratified(&corpus, fraction, seed)?;
    train.save(&train_path)?;
    test.save(&test_path)?;
    println!("train\t{}\ntest\t{}", train.len(), test.len());
    Ok(())
}

pub fn render_summary(summary: &TrainSummary) -> String {
    let mut text_quota = 0;
    let mut few_associates = 0;
    for reason in summary.skipped.values() {
        match reason {
            SkipReason::InsufficientTexts { .. } => text_quota += 1,
            SkipReason::TooFewAssociates { .. } => few_associates += 1,
        }
    }
    let mut out = String::new();
    let _ = writeln!(out, "trained\t{}", summary.trained.len());
    let _ = writeln!(out, "skipped (too few qualifying texts)\t{text_quota}");
    let _ = writeln!(out, "skipped (too few associates)\t{few_associates}");
    for (id, reason) in &summary.skipped {
        let detail = match reason {
            SkipReason::InsufficientTexts { qualifying } => format!("qualifying texts: {qualifying}"),
            SkipReason::TooFewAssociates { associates } => format!("associates: {associates}"),
        };
        let _ = writeln!(out, "skip\t{id}\t{detail}");
    }
    out
}

fn run_train(args: TrainArgs) -> Result<()> {
    let config = args.common.load()?;
    let corpus_path = pick(&args.corpus, &[&config.paths.train, &config.paths.corpus], "training corpus")?;
    let model_path = pick(&args.model, &[&config.paths.model], "model")?;
    must_exist(&corpus_path)?;

    let corpus = Corpus::load(&corpus_path)?;
    let training = config.training_config()?;
    let (model, summary) = train_with_summary(&corpus, &training)?;
    save_model(&model, &model_path)?;
    info!("wrote {}", model_path.display());
    if let Some(path) = &args.summary {
        let json = serde_json::to_string_pretty(&summary).expect("summary serialises");
        std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))?;
    }
    write_output(None, &render_summary(&summary))
}

fn run_assign(args: AssignArgs) -> Result<()> {
    let config = args.common.load()?;
    let model_path = pick(&args.model, &[&config.paths.model], "model")?;
    let input_path = pick(&args.input, &[&config.paths.test], "input")?;
    let output_path = args.output.clone().or(config.paths.output.clone());
    must_exist(&model_path)?;
    must_exist(&input_path)?;

    let model = load_model(&model_path)?;
    let preprocess_config = config.preprocess.build()?;
    check_pipeline(&model, &preprocess_config)?;
    let documents = Corpus::load(&input_path)?;

    let need_thesaurus = args.with_labels || config.assign.require_label_in_text;
    let thesaurus = if need_thesaurus {
        let path = pick(&args.thesaurus, &[&config.paths.thesaurus], "thesaurus")?;
        Some(Thesaurus::load(&path)?)
    } else {
        None
    };
    let matcher = match (&thesaurus, config.assign.require_label_in_text) {
        (Some(th), true) => Some(LabelMatcher::new(th, &config.language, config.baseline, &preprocess_config)?),
        _ => None,
    };

    let mut out = String::new();
    if model.is_empty() {
        warn!("model has no associate lists; every ranking is empty");
    } else {
        for doc in documents.documents() {
            let v = preprocess(&doc.text, &preprocess_config);
            let present = matcher.as_ref().map(|m| m.extract(&doc.text));
            let result = assign(&doc.id, &v, &model, &config.assign, present.as_ref())?;
            for (rank, r) in result.ranked.iter().enumerate() {
                let _ = write!(out, "{}\t{}\t{}\t{:.6}", doc.id, rank + 1, r.descriptor_id, r.score);
                if let Some(th) = thesaurus.as_ref().filter(|_| args.with_labels) {
                    let label = th.label(r.descriptor_id.as_str(), &config.language).unwrap_or("");
                    let _ = write!(out, "\t{label}");
                }
                out.push('\n');
            }
        }
    }
    write_output(output_path.as_deref(), &out)
}

fn run_evaluate(args: EvaluateArgs) -> Result<()> {
    let config = args.common.load()?;
    let model_path = pick(&args.model, &[&config.paths.model], "model")?;
    let test_path = pick(&args.test, &[&config.paths.test], "test corpus")?;
    let report_path = args.report.clone().or(config.paths.report.clone());
    must_exist(&model_path)?;
    must_exist(&test_path)?;

    let model = load_model(&model_path)?;
    let preprocess_config = config.preprocess.build()?;
    check_pipeline(&model, &preprocess_config)?;
    let test = Corpus::load(&test_path)?;

    let thesaurus = if config.assign.require_label_in_text {
        let path = pick(&args.thesaurus, &[&config.paths.thesaurus], "thesaurus")?;
        Some(Thesaurus::load(&path)?)
    } else {
        None
    };
    let matcher = thesaurus
        .as_ref()
        .map(|th| LabelMatcher::new(th, &config.language, config.baseline, &preprocess_config))
        .transpose()?;

    let report = evaluate(
        &model,
        &test,
        &preprocess_config,
        &config.assign,
        &config.evaluation.ranks,
        matcher.as_ref(),
    )?;
    write_report(report_path.as_deref(), &report)?;
    write_output(None, &report.render_table())
}

fn run_baseline(args: BaselineArgs) -> Result<()> {
    let config = args.common.load()?;
    let thesaurus_path = pick(&args.thesaurus, &[&config.paths.thesaurus], "thesaurus")?;
    let input_path = pick(&args.input, &[&config.paths.test], "input")?;
    let output_path = args.output.clone().or(config.paths.output.clone());
    let report_path = args.report.clone().or(config.paths.report.clone());

    let mut options = config.baseline;
    options.use_lemmas |= args.use_lemmas;
    options.use_stopwords |= args.use_stopwords;
    options.use_non_descriptors |= args.use_non_descriptors;

    let mut preprocess_config = config.preprocess.clone();
    preprocess_config.use_lemmas |= options.use_lemmas;
    preprocess_config.use_stopwords |= options.use_stopwords;
    let preprocess_config = preprocess_config.build()?;

    let thesaurus = Thesaurus::load(&thesaurus_path)?;
    let documents = Corpus::load(&input_path)?;
    let matcher = LabelMatcher::new(&thesaurus, &config.language, options, &preprocess_config)?;

    let mut out = String::new();
    let mut ranked = Vec::new();
    for doc in documents.documents() {
        let found = matcher.extract_ranked(&doc.text);
        let ids: Vec<&str> = found.iter().map(|d| d.as_str()).collect();
        let _ = writeln!(out, "{}\t{}", doc.id, ids.join(","));
        ranked.push(RankedDocument {
            document_id: doc.id.clone(),
            ranked: found,
            gold: doc.gold_descriptors.clone(),
        });
    }
    write_output(output_path.as_deref(), &out)?;

    if ranked.iter().any(|d| !d.gold.is_empty()) {
        let report = evaluate_rankings(&ranked, &config.evaluation.ranks)?;
        write_report(report_path.as_deref(), &report)?;
        eprint!("{}", report.render_table());
    }
    Ok(())
}
