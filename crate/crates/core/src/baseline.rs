//! Keyword-extraction baseline: a descriptor is proposed when one of its
//! surface forms occurs verbatim, as a token sequence, in the text.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::{lemmatize, remove_stopwords, tokenize, PreprocessConfig};
use crate::thesaurus::{DescriptorId, Thesaurus};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractionOptions {
    pub use_lemmas: bool,
    pub use_stopwords: bool,
    pub use_non_descriptors: bool,
}

/// Surface forms of every descriptor in one language, pre-tokenised with the
/// extraction pipeline.
#[derive(Debug, Clone)]
pub struct LabelMatcher<'a> {
    options: ExtractionOptions,
    preprocess: &'a PreprocessConfig,
    forms: Vec<(DescriptorId, Vec<String>)>,
}

impl<'a> LabelMatcher<'a> {
    pub fn new(
        thesaurus: &Thesaurus,
        lang: &str,
        options: ExtractionOptions,
        preprocess: &'a PreprocessConfig,
    ) -> Result<Self> {
        if !thesaurus.languages().contains(lang) {
            return Err(Error::UnknownLanguage(lang.to_string()));
        }
        let mut matcher = Self {
            options,
            preprocess,
            forms: Vec::new(),
        };
        for desc in thesaurus.descriptors() {
            for form in thesaurus.surface_forms(desc.id.as_str(), lang, options.use_non_descriptors)? {
                let tokens = matcher.tokens(form);
                // a form made only of stop words can never be matched
                if !tokens.is_empty() {
                    matcher.forms.push((desc.id.clone(), tokens));
                }
            }
        }
        Ok(matcher)
    }

    fn tokens(&self, text: &str) -> Vec<String> {
        let mut tokens = tokenize(text);
        if self.options.use_lemmas {
            tokens = lemmatize(tokens, &self.preprocess.lemmas);
        }
        if self.options.use_stopwords {
            tokens = remove_stopwords(tokens, &self.preprocess.stopwords);
        }
        tokens
    }

    /// Matched descriptors ordered by the position of their first match,
    /// ties by id.
    pub fn extract_ranked(&self, text: &str) -> Vec<DescriptorId> {
        let tokens = self.tokens(text);
        let mut positions: HashMap<&str, Vec<usize>> = HashMap::new();
        for (i, t) in tokens.iter().enumerate() {
            positions.entry(t.as_str()).or_default().push(i);
        }
        let mut first: HashMap<&DescriptorId, usize> = HashMap::new();
        for (id, form) in &self.forms {
            let Some(starts) = positions.get(form[0].as_str()) else {
                continue;
            };
            let hit = starts.iter().copied().find(|&s| {
                s + form.len() <= tokens.len() && tokens[s..s + form.len()] == form[..]
            });
            if let Some(pos) = hit {
                let slot = first.entry(id).or_insert(pos);
                *slot = (*slot).min(pos);
            }
        }
        let mut ranked: Vec<(usize, &DescriptorId)> = first.into_iter().map(|(id, p)| (p, id)).collect();
        ranked.sort();
        ranked.into_iter().map(|(_, id)| id.clone()).collect()
    }

    pub fn extract(&self, text: &str) -> BTreeSet<DescriptorId> {
        self.extract_ranked(text).into_iter().collect()
    }
}

pub fn extract_descriptors(
    text: &str,
    thesaurus: &Thesaurus,
    lang: &str,
    options: ExtractionOptions,
    preprocess: &PreprocessConfig,
) -> Result<BTreeSet<DescriptorId>> {
    Ok(LabelMatcher::new(thesaurus, lang, options, preprocess)?.extract(text))
}
