//! Text normalisation: tokenisation, dictionary lemmatisation, multi-word
//! mark-up and stop-word removal, producing a bag of lemma counts.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Joins the parts of a marked-up multi-word expression.
pub const MULTIWORD_JOINER: char = '_';

/// Lowercases `text` and splits it on every non-alphanumeric character.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|piece| !piece.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Token to lemma lookup table.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LemmaDictionary {
    map: HashMap<String, String>,
}

impl LemmaDictionary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, token: &str, lemma: &str) {
        self.map.insert(token.to_lowercase(), lemma.to_lowercase());
    }

    pub fn get(&self, token: &str) -> Option<&str> {
        self.map.get(token).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Parses `token<TAB>lemma` lines. Blank lines and `#` comments are skipped.
    pub fn parse(source: &str, origin: &str) -> Result<Self> {
        let mut dict = Self::new();
        for (idx, line) in content_lines(source) {
            let mut parts = line.split('\t');
            match (parts.next(), parts.next(), parts.next()) {
                (Some(token), Some(lemma), None)
                    if !token.trim().is_empty() && !lemma.trim().is_empty() =>
                {
                    dict.insert(token.trim(), lemma.trim());
                }
                _ => {
                    return Err(Error::Resource {
                        path: origin.to_string(),
                        line: idx,
                        message: "expected `token<TAB>lemma`".into(),
                    })
                }
            }
        }
        Ok(dict)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = read_resource(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    fn digest(&self) -> String {
        let mut entries: Vec<_> = self.map.iter().collect();
        entries.sort();
        let mut hasher = Sha256::new();
        for (token, lemma) in entries {
            hasher.update(token.as_bytes());
            hasher.update(b"\t");
            hasher.update(lemma.as_bytes());
            hasher.update(b"\n");
        }
        hex::encode(hasher.finalize())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopListKind {
    #[default]
    Standard,
    CorpusTuned,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StopList {
    words: HashSet<String>,
    kind: StopListKind,
}

impl StopList {
    pub fn new(kind: StopListKind) -> Self {
        Self {
            words: HashSet::new(),
            kind,
        }
    }

    /// Builds a list from single-token entries; anything that tokenises to
    /// more or less than one token is rejected.
    pub fn from_words<'a>(
        kind: StopListKind,
        words: impl IntoIterator<Item = &'a str>,
    ) -> Result<Self> {
        let mut list = Self::new(kind);
        for (idx, word) in words.into_iter().enumerate() {
            list.insert_checked(word, "<inline>", idx + 1)?;
        }
        Ok(list)
    }

    fn insert_checked(&mut self, word: &str, origin: &str, line: usize) -> Result<()> {
        let mut tokens = tokenize(word);
        if tokens.len() != 1 {
            return Err(Error::Resource {
                path: origin.to_string(),
                line,
                message: format!("stop word {word:?} is not a single token"),
            });
        }
        self.words.insert(tokens.remove(0));
        Ok(())
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token)
    }

    pub fn kind(&self) -> StopListKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// One token per line; `#` starts a comment line.
    pub fn parse(source: &str, kind: StopListKind, origin: &str) -> Result<Self> {
        let mut list = Self::new(kind);
        for (idx, line) in content_lines(source) {
            list.insert_checked(line, origin, idx)?;
        }
        Ok(list)
    }

    pub fn load(path: &Path, kind: StopListKind) -> Result<Self> {
        let text = read_resource(path)?;
        Self::parse(&text, kind, &path.display().to_string())
    }

    fn digest(&self) -> String {
        let mut words: Vec<_> = self.words.iter().collect();
        words.sort();
        let mut hasher = Sha256::new();
        for word in words {
            hasher.update(word.as_bytes());
            hasher.update(b"\n");
        }
        hex::encode(hasher.finalize())
    }
}

/// Lexicon of multi-word expressions, stored as lemma sequences of length >= 2.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MultiwordLexicon {
    // first lemma -> continuations, longest first
    by_first: HashMap<String, Vec<Vec<String>>>,
    len: usize,
}

impl MultiwordLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_phrases<'a>(phrases: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        let mut lexicon = Self::new();
        for (idx, phrase) in phrases.into_iter().enumerate() {
            lexicon.insert_checked(phrase, "<inline>", idx + 1)?;
        }
        Ok(lexicon)
    }

    fn insert_checked(&mut self, phrase: &str, origin: &str, line: usize) -> Result<()> {
        let parts: Vec<String> = phrase.split_whitespace().map(str::to_lowercase).collect();
        if parts.len() < 2 {
            return Err(Error::Resource {
                path: origin.to_string(),
                line,
                message: format!("multi-word entry {phrase:?} has fewer than two lemmas"),
            });
        }
        let continuations = self.by_first.entry(parts[0].clone()).or_default();
        if !continuations.contains(&parts) {
            continuations.push(parts);
            continuations.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
            self.len += 1;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// One space-separated lemma sequence per line; `#` starts a comment line.
    pub fn parse(source: &str, origin: &str) -> Result<Self> {
        let mut lexicon = Self::new();
        for (idx, line) in content_lines(source) {
            lexicon.insert_checked(line, origin, idx)?;
        }
        Ok(lexicon)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = read_resource(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Longest entry matching `tokens` at `start`, as a length.
    fn longest_match(&self, tokens: &[String], start: usize) -> Option<usize> {
        let candidates = self.by_first.get(&tokens[start])?;
        candidates
            .iter()
            .find(|entry| {
                start + entry.len() <= tokens.len()
                    && entry.iter().zip(&tokens[start..]).all(|(a, b)| a == b)
            })
            .map(Vec::len)
    }

    fn digest(&self) -> String {
        let mut phrases: Vec<String> = self.by_first.values().flatten().map(|p| p.join(" ")).collect();
        phrases.sort();
        let mut hasher = Sha256::new();
        for phrase in phrases {
            hasher.update(phrase.as_bytes());
            hasher.update(b"\n");
        }
        hex::encode(hasher.finalize())
    }
}

/// Maps each token through the dictionary, leaving unknown tokens as they are.
pub fn lemmatize(tokens: Vec<String>, dictionary: &LemmaDictionary) -> Vec<String> {
    if dictionary.is_empty() {
        return tokens;
    }
    tokens
        .into_iter()
        .map(|token| match dictionary.get(&token) {
            Some(lemma) => lemma.to_string(),
            None => token,
        })
        .collect()
}

/// Greedy left-to-right longest-match mark-up of lexicon entries.
pub fn mark_multiwords(tokens: Vec<String>, lexicon: &MultiwordLexicon) -> Vec<String> {
    if lexicon.is_empty() {
        return tokens;
    }
    let mut out = Vec::with_capacity(tokens.len());
    let mut i = 0;
    while i < tokens.len() {
        match lexicon.longest_match(&tokens, i) {
            Some(len) => {
                let mut joined = String::new();
                for (j, part) in tokens[i..i + len].iter().enumerate() {
                    if j > 0 {
                        joined.push(MULTIWORD_JOINER);
                    }
                    joined.push_str(part);
                }
                out.push(joined);
                i += len;
            }
            None => {
                out.push(tokens[i].clone());
                i += 1;
            }
        }
    }
    out
}

/// Drops stop words. Marked-up multi-word tokens always survive.
pub fn remove_stopwords(tokens: Vec<String>, stoplist: &StopList) -> Vec<String> {
    if stoplist.is_empty() {
        return tokens;
    }
    tokens
        .into_iter()
        .filter(|t| t.contains(MULTIWORD_JOINER) || !stoplist.contains(t))
        .collect()
}

/// Bag of lemma counts for one text.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaVector {
    counts: BTreeMap<String, u64>,
    length: u64,
}

impl LemmaVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut v = Self::new();
        for t in tokens {
            v.add(t, 1);
        }
        v
    }

    /// Builds a vector from explicit counts; zero counts are skipped.
    pub fn from_counts<I, S>(counts: I) -> Self
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        let mut v = Self::new();
        for (lemma, n) in counts {
            v.add(lemma, n);
        }
        v
    }

    pub fn add(&mut self, lemma: impl Into<String>, n: u64) {
        if n == 0 {
            return;
        }
        *self.counts.entry(lemma.into()).or_insert(0) += n;
        self.length += n;
    }

    pub fn count(&self, lemma: &str) -> u64 {
        self.counts.get(lemma).copied().unwrap_or(0)
    }

    pub fn contains(&self, lemma: &str) -> bool {
        self.counts.contains_key(lemma)
    }

    /// Total number of lemma occurrences.
    pub fn length(&self) -> u64 {
        self.length
    }

    /// Number of distinct lemmas.
    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.length == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn norm(&self) -> f64 {
        self.counts
            .values()
            .map(|&c| (c as f64) * (c as f64))
            .sum::<f64>()
            .sqrt()
    }
}

/// The LEM / SW / MW switches together with the resources they use.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PreprocessConfig {
    pub use_lemmas: bool,
    pub lemmas: LemmaDictionary,
    pub use_stopwords: bool,
    pub stopwords: StopList,
    pub use_multiwords: bool,
    pub multiwords: MultiwordLexicon,
}

impl PreprocessConfig {
    /// Plain tokenisation, every switch off.
    pub fn plain() -> Self {
        Self::default()
    }

    /// Token sequence after the enabled steps, before counting.
    pub fn tokens(&self, text: &str) -> Vec<String> {
        let mut tokens = tokenize(text);
        if self.use_lemmas {
            tokens = lemmatize(tokens, &self.lemmas);
        }
        if self.use_multiwords {
            tokens = mark_multiwords(tokens, &self.multiwords);
        }
        if self.use_stopwords {
            tokens = remove_stopwords(tokens, &self.stopwords);
        }
        tokens
    }

    pub fn fingerprint(&self) -> PreprocessFingerprint {
        PreprocessFingerprint {
            use_lemmas: self.use_lemmas,
            lemma_digest: self.use_lemmas.then(|| self.lemmas.digest()),
            use_stopwords: self.use_stopwords,
            stopword_kind: self.use_stopwords.then(|| self.stopwords.kind()),
            stopword_digest: self.use_stopwords.then(|| self.stopwords.digest()),
            use_multiwords: self.use_multiwords,
            multiword_digest: self.use_multiwords.then(|| self.multiwords.digest()),
        }
    }
}

/// Runs the full pipeline on `text`: tokenize, lemmatize, mark multi-words,
/// remove stop words, count.
pub fn preprocess(text: &str, config: &PreprocessConfig) -> LemmaVector {
    LemmaVector::from_tokens(config.tokens(text))
}

/// Identity of a preprocessing pipeline as stored alongside a model: the
/// switches plus SHA-256 digests of the resources that are switched on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreprocessFingerprint {
    pub use_lemmas: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lemma_digest: Option<String>,
    pub use_stopwords: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stopword_kind: Option<StopListKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stopword_digest: Option<String>,
    pub use_multiwords: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiword_digest: Option<String>,
}

fn content_lines(source: &str) -> impl Iterator<Item = (usize, &str)> {
    source
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
}

fn read_resource(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(words: &[&str]) -> Vec<String> {
        words.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(
            tokenize("Fishing vessels, 2 boats."),
            toks(&["fishing", "vessels", "2", "boats"])
        );
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("état—membre"), toks(&["état", "membre"]));
    }

    #[test]
    fn lemmatize_examples() {
        let mut dict = LemmaDictionary::new();
        dict.insert("vessels", "vessel");
        assert_eq!(lemmatize(toks(&["vessels"]), &dict), toks(&["vessel"]));
        assert_eq!(lemmatize(toks(&["boats"]), &dict), toks(&["boats"]));
        let empty = LemmaDictionary::new();
        assert_eq!(lemmatize(toks(&["a", "b"]), &empty), toks(&["a", "b"]));
    }

    #[test]
    fn multiword_examples() {
        let lex = MultiwordLexicon::from_phrases(["fishery resource"]).unwrap();
        assert_eq!(
            mark_multiwords(toks(&["fishery", "resource", "x"]), &lex),
            toks(&["fishery_resource", "x"])
        );

        let lex = MultiwordLexicon::from_phrases(["a b", "a b c"]).unwrap();
        assert_eq!(mark_multiwords(toks(&["a", "b", "c"]), &lex), toks(&["a_b_c"]));
        assert_eq!(mark_multiwords(toks(&["a", "b", "d"]), &lex), toks(&["a_b", "d"]));
        assert_eq!(mark_multiwords(toks(&["x", "y"]), &lex), toks(&["x", "y"]));
    }

    #[test]
    fn multiword_entries_need_two_lemmas() {
        let err = MultiwordLexicon::parse("fish\n", "lex.txt").unwrap_err();
        assert!(matches!(err, Error::Resource { line: 1, .. }));
    }

    #[test]
    fn stopword_examples() {
        let sw = StopList::from_words(StopListKind::Standard, ["the"]).unwrap();
        assert_eq!(
            remove_stopwords(toks(&["fly_the_flag", "the"]), &sw),
            toks(&["fly_the_flag"])
        );
        let empty = StopList::default();
        assert_eq!(remove_stopwords(toks(&["the", "a"]), &empty), toks(&["the", "a"]));
        assert!(remove_stopwords(toks(&["the", "the"]), &sw).is_empty());
    }

    #[test]
    fn stopword_file_rejects_phrases() {
        let err = StopList::parse("# header\nthe\nof the\n", StopListKind::Standard, "sw").unwrap_err();
        assert!(matches!(err, Error::Resource { line: 3, .. }));
    }

    #[test]
    fn lemma_dictionary_parses_tsv() {
        let dict = LemmaDictionary::parse("# c\nvessels\tvessel\n\nBoats\tboat\n", "d").unwrap();
        assert_eq!(dict.get("vessels"), Some("vessel"));
        assert_eq!(dict.get("boats"), Some("boat"));
        assert!(LemmaDictionary::parse("novalue\n", "d").is_err());
    }

    #[test]
    fn preprocess_flags_off() {
        let v = preprocess("Fish fish.", &PreprocessConfig::plain());
        assert_eq!(v.count("fish"), 2);
        assert_eq!(v.length(), 2);
        assert_eq!(v.distinct(), 1);
    }

    #[test]
    fn preprocess_full_pipeline() {
        // the fishing vessels -> lemmatize: the fishing vessel
        // -> multiwords: the fishing_vessel -> stop words: fishing_vessel
        let mut cfg = PreprocessConfig {
            use_lemmas: true,
            use_stopwords: true,
            use_multiwords: true,
            ..Default::default()
        };
        cfg.lemmas.insert("vessels", "vessel");
        cfg.multiwords = MultiwordLexicon::from_phrases(["fishing vessel"]).unwrap();
        cfg.stopwords = StopList::from_words(StopListKind::Standard, ["the"]).unwrap();
        let v = preprocess("the fishing vessels", &cfg);
        assert_eq!(v, LemmaVector::from_counts([("fishing_vessel", 1)]));
    }

    #[test]
    fn preprocess_empty_text() {
        let cfg = PreprocessConfig {
            use_stopwords: true,
            stopwords: StopList::from_words(StopListKind::Standard, ["the"]).unwrap(),
            ..Default::default()
        };
        let v = preprocess("", &cfg);
        assert!(v.is_empty());
        assert_eq!(v.length(), 0);
    }

    #[test]
    fn fingerprint_tracks_resources() {
        let mut a = PreprocessConfig::plain();
        a.use_stopwords = true;
        a.stopwords = StopList::from_words(StopListKind::Standard, ["the"]).unwrap();
        let mut b = a.clone();
        assert_eq!(a.fingerprint(), b.fingerprint());
        b.stopwords = StopList::from_words(StopListKind::Standard, ["of"]).unwrap();
        assert_ne!(a.fingerprint(), b.fingerprint());
        // resources of disabled steps are ignored
        let mut c = PreprocessConfig::plain();
        c.lemmas.insert("x", "y");
        assert_eq!(c.fingerprint(), PreprocessConfig::plain().fingerprint());
    }

    fn word() -> impl Strategy<Value = String> {
        prop::sample::select(vec!["a", "b", "c", "the", "of", "x1", "Éta"]).prop_map(String::from)
    }

    fn sentence() -> impl Strategy<Value = String> {
        prop::collection::vec((word(), prop::sample::select(vec![" ", ", ", ".", "-", "—"])), 0..30)
            .prop_map(|parts| parts.into_iter().map(|(w, s)| format!("{w}{s}")).collect())
    }

    proptest! {
        #[test]
        fn pipeline_is_deterministic(text in sentence()) {
            let mut cfg = PreprocessConfig { use_multiwords: true, use_stopwords: true, ..Default::default() };
            cfg.multiwords = MultiwordLexicon::from_phrases(["a b", "b the c"]).unwrap();
            cfg.stopwords = StopList::from_words(StopListKind::Standard, ["the", "of"]).unwrap();
            prop_assert_eq!(preprocess(&text, &cfg), preprocess(&text, &cfg));
        }

        #[test]
        fn flags_off_length_is_token_count(text in sentence()) {
            let v = preprocess(&text, &PreprocessConfig::plain());
            prop_assert_eq!(v.length() as usize, tokenize(&text).len());
        }

        #[test]
        fn stopwords_never_touch_multiwords(words in prop::collection::vec(word(), 0..20)) {
            let tokens: Vec<String> = words.iter().map(|w| w.to_lowercase()).collect();
            let lex = MultiwordLexicon::from_phrases(["of the", "a b"]).unwrap();
            let marked = mark_multiwords(tokens, &lex);
            let sw = StopList::from_words(StopListKind::Standard, ["of", "the", "a"]).unwrap();
            let joined: Vec<&String> = marked.iter().filter(|t| t.contains('_')).collect();
            let kept = remove_stopwords(marked.clone(), &sw);
            for t in joined {
                prop_assert!(kept.contains(t));
            }
        }

        #[test]
        fn multiword_markup_loses_no_tokens(words in prop::collection::vec(word(), 0..20)) {
            let tokens: Vec<String> = words.iter().map(|w| w.to_lowercase()).collect();
            let lex = MultiwordLexicon::from_phrases(["a b", "a b c", "c the", "the of x1"]).unwrap();
            let marked = mark_multiwords(tokens.clone(), &lex);
            let expanded = marked.join(" ").replace('_', " ");
            prop_assert_eq!(tokenize(&expanded), tokens);
        }
    }
}
