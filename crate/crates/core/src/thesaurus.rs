//! The controlled vocabulary: descriptors, their per-language labels and
//! non-descriptors, and the BT/NT/RT links between them.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::error::{Error, Result};

/// Opaque descriptor identifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DescriptorId(String);

impl DescriptorId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for DescriptorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Borrow<str> for DescriptorId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl From<&str> for DescriptorId {
    fn from(s: &str) -> Self {
        Self(s.to_string())
    }
}

impl From<String> for DescriptorId {
    fn from(s: String) -> Self {
        Self(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Descriptor {
    pub id: DescriptorId,
    pub labels: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub non_descriptors: BTreeMap<String, Vec<String>>,
    #[serde(default, rename = "bt", skip_serializing_if = "Vec::is_empty")]
    pub broader: Vec<DescriptorId>,
    #[serde(default, rename = "nt", skip_serializing_if = "Vec::is_empty")]
    pub narrower: Vec<DescriptorId>,
    #[serde(default, rename = "rt", skip_serializing_if = "Vec::is_empty")]
    pub related: Vec<DescriptorId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Thesaurus {
    descriptors: BTreeMap<DescriptorId, Descriptor>,
    languages: BTreeSet<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawThesaurus<'a> {
    languages: Vec<String>,
    #[serde(borrow)]
    descriptors: Vec<&'a RawValue>,
}

#[derive(Serialize)]
struct ThesaurusOut<'a> {
    languages: &'a BTreeSet<String>,
    descriptors: Vec<&'a Descriptor>,
}

impl Thesaurus {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Parses and validates a thesaurus document. All-or-nothing: the first
    /// violation aborts the load.
    pub fn parse(source: &str) -> Result<Self> {
        let raw: RawThesaurus<'_> = serde_json::from_str(source).map_err(|e| Error::ThesaurusParse {
            line: e.line(),
            message: e.to_string(),
        })?;
        let languages: BTreeSet<String> = raw.languages.into_iter().collect();

        let mut descriptors = BTreeMap::new();
        let mut lines = BTreeMap::new();
        for value in raw.descriptors {
            let line = line_of(source, value.get());
            let desc: Descriptor =
                serde_json::from_str(value.get()).map_err(|e| Error::ThesaurusParse {
                    line: line + e.line() - 1,
                    message: e.to_string(),
                })?;
            if descriptors.contains_key(&desc.id) {
                return Err(Error::DuplicateDescriptor {
                    id: desc.id.0,
                    line,
                });
            }
            for lang in &languages {
                if !desc.labels.contains_key(lang) {
                    return Err(Error::MissingLabel {
                        id: desc.id.0,
                        language: lang.clone(),
                        line,
                    });
                }
            }
            lines.insert(desc.id.clone(), line);
            descriptors.insert(desc.id.clone(), desc);
        }

        for desc in descriptors.values() {
            let links = [
                ("BT", &desc.broader),
                ("NT", &desc.narrower),
                ("RT", &desc.related),
            ];
            for (relation, targets) in links {
                if let Some(target) = targets.iter().find(|t| !descriptors.contains_key(*t)) {
                    return Err(Error::DanglingReference {
                        id: desc.id.0.clone(),
                        relation,
                        target: target.0.clone(),
                        line: lines[&desc.id],
                    });
                }
            }
        }

        let mut thesaurus = Self {
            descriptors,
            languages,
        };
        thesaurus.close_links();
        Ok(thesaurus)
    }

    /// Adds the missing inverse of every BT/NT link and the missing mirror of
    /// every RT link, then sorts and dedups all link lists.
    fn close_links(&mut self) {
        let mut add_broader = Vec::new();
        let mut add_narrower = Vec::new();
        let mut add_related = Vec::new();
        for d in self.descriptors.values() {
            for b in &d.broader {
                add_narrower.push((b.clone(), d.id.clone()));
            }
            for n in &d.narrower {
                add_broader.push((n.clone(), d.id.clone()));
            }
            for r in &d.related {
                add_related.push((r.clone(), d.id.clone()));
            }
        }
        for (target, id) in add_broader {
            self.descriptors.get_mut(&target).unwrap().broader.push(id);
        }
        for (target, id) in add_narrower {
            self.descriptors.get_mut(&target).unwrap().narrower.push(id);
        }
        for (target, id) in add_related {
            self.descriptors.get_mut(&target).unwrap().related.push(id);
        }
        for d in self.descriptors.values_mut() {
            for list in [&mut d.broader, &mut d.narrower, &mut d.related] {
                list.sort();
                list.dedup();
            }
        }
    }

    pub fn to_json(&self) -> String {
        let out = ThesaurusOut {
            languages: &self.languages,
            descriptors: self.descriptors.values().collect(),
        };
        serde_json::to_string_pretty(&out).expect("thesaurus serialises")
    }

    pub fn len(&self) -> usize {
        self.descriptors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptors.is_empty()
    }

    pub fn languages(&self) -> &BTreeSet<String> {
        &self.languages
    }

    pub fn get(&self, id: &str) -> Option<&Descriptor> {
        self.descriptors.get(id)
    }

    pub fn descriptors(&self) -> impl Iterator<Item = &Descriptor> {
        self.descriptors.values()
    }

    pub fn label(&self, id: &str, lang: &str) -> Result<&str> {
        let desc = self.lookup(id, lang)?;
        Ok(desc.labels[lang].as_str())
    }

    /// The label of `id` in `lang`, followed by its non-descriptors when
    /// `include_non_descriptors` is set. Phrases are returned as written.
    pub fn surface_forms(
        &self,
        id: &str,
        lang: &str,
        include_non_descriptors: bool,
    ) -> Result<Vec<&str>> {
        let desc = self.lookup(id, lang)?;
        let mut forms = vec![desc.labels[lang].as_str()];
        if include_non_descriptors {
            if let Some(extra) = desc.non_descriptors.get(lang) {
                forms.extend(extra.iter().map(String::as_str));
            }
        }
        Ok(forms)
    }

    fn lookup(&self, id: &str, lang: &str) -> Result<&Descriptor> {
        let desc = self
            .descriptors
            .get(id)
            .ok_or_else(|| Error::UnknownDescriptor(id.to_string()))?;
        if !self.languages.contains(lang) {
            return Err(Error::UnknownLanguage(lang.to_string()));
        }
        Ok(desc)
    }
}

/// 1-based line of `slice`, which must point into `source`.
fn line_of(source: &str, slice: &str) -> usize {
    let offset = slice.as_ptr() as usize - source.as_ptr() as usize;
    source.as_bytes()[..offset].iter().filter(|&&b| b == b'\n').count() + 1
}
