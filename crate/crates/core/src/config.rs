//! Run configuration file: every tunable of the pipeline plus the paths of
//! its inputs and outputs. Relative paths resolve against the directory that
//! holds the configuration file.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::assigner::AssignConfig;
use crate::baseline::ExtractionOptions;
use crate::error::{Error, Result};
use crate::evaluator::DEFAULT_RANKS;
use crate::preprocess::{LemmaDictionary, MultiwordLexicon, PreprocessConfig, StopList, StopListKind};
use crate::trainer::{TrainingConfig, TrainingParams};

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessSection {
    pub use_lemmas: bool,
    pub lemma_dictionary: Option<PathBuf>,
    pub use_stopwords: bool,
    pub stopwords: Option<PathBuf>,
    pub stopword_kind: StopListKind,
    pub use_multiwords: bool,
    pub multiwords: Option<PathBuf>,
}

impl PreprocessSection {
    /// Loads the resource files of the enabled steps.
    pub fn build(&self) -> Result<PreprocessConfig> {
        fn required<'a>(flag: &str, path: &'a Option<PathBuf>) -> Result<&'a Path> {
            path.as_deref()
                .ok_or_else(|| Error::InvalidConfig(format!("{flag} is set but no resource file is given")))
        }
        let mut config = PreprocessConfig {
            use_lemmas: self.use_lemmas,
            use_stopwords: self.use_stopwords,
            use_multiwords: self.use_multiwords,
            ..Default::default()
        };
        if self.use_lemmas {
            config.lemmas = LemmaDictionary::load(required("use_lemmas", &self.lemma_dictionary)?)?;
        }
        if self.use_stopwords {
            config.stopwords = StopList::load(required("use_stopwords", &self.stopwords)?, self.stopword_kind)?;
        } else {
            config.stopwords = StopList::new(self.stopword_kind);
        }
        if self.use_multiwords {
            config.multiwords = MultiwordLexicon::load(required("use_multiwords", &self.multiwords)?)?;
        }
        Ok(config)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSection {
    pub test_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSection {
    fn default() -> Self {
        Self {
            test_fraction: 0.1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationSection {
    pub ranks: Vec<usize>,
}

impl Default for EvaluationSection {
    fn default() -> Self {
        Self {
            ranks: DEFAULT_RANKS.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub thesaurus: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub train: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub language: String,
    pub preprocess: PreprocessSection,
    pub training: TrainingParams,
    pub assign: AssignConfig,
    pub baseline: ExtractionOptions,
    pub split: SplitSection,
    pub evaluation: EvaluationSection,
    pub paths: Paths,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            language: "en".into(),
            preprocess: PreprocessSection::default(),
            training: TrainingParams::default(),
            assign: AssignConfig::default(),
            baseline: ExtractionOptions::default(),
            split: SplitSection::default(),
            evaluation: EvaluationSection::default(),
            paths: Paths::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::parse(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        config.resolve_paths(base);
        Ok(config)
    }

    pub fn parse(source: &str) -> Result<Self> {
        serde_json::from_str(source).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    fn resolve_paths(&mut self, base: &Path) {
        let resolve = |p: &mut Option<PathBuf>| {
            if let Some(path) = p {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        };
        let pre = &mut self.preprocess;
        for p in [&mut pre.lemma_dictionary, &mut pre.stopwords, &mut pre.multiwords] {
            resolve(p);
        }
        let paths = &mut self.paths;
        for p in [
            &mut paths.thesaurus,
            &mut paths.corpus,
            &mut paths.train,
            &mut paths.test,
            &mut paths.model,
            &mut paths.report,
            &mut paths.output,
        ] {
            resolve(p);
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.training.validate()?;
        self.assign.validate()?;
        if !(0.0..=1.0).contains(&self.split.test_fraction) {
            return Err(Error::InvalidFraction(self.split.test_fraction));
        }
        if self.evaluation.ranks.is_empty() || self.evaluation.ranks.contains(&0) {
            return Err(Error::InvalidConfig("ranks must be a non-empty list of positive integers".into()));
        }
        Ok(())
    }

    pub fn training_config(&self) -> Result<TrainingConfig> {
        Ok(TrainingConfig {
            params: self.training.clone(),
            preprocess: self.preprocess.build()?,
        })
    }
}
