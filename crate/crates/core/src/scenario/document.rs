//! Line-based `[section]` / `key = value` documents.

use super::ScenarioError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    pub name: String,
    pub line: usize,
    pub entries: Vec<Entry>,
}

impl Section {
    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Document {
    pub sections: Vec<Section>,
}

impl Document {
    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }
}

fn is_ident(s: &str, extra: &[char]) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || extra.contains(&c))
}

/// Parses the raw structure. Keys must be unique within a section and
/// sections unique within the document.
pub fn parse_document(text: &str) -> Result<Document, ScenarioError> {
    let mut doc = Document::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len();
        let col = indent + 1;
        if let Some(rest) = trimmed.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or(ScenarioError::Syntax {
                line,
                col: col + trimmed.len(),
                msg: "expected `]`".into(),
            })?;
            let name = name.trim();
            if !is_ident(name, &[]) {
                return Err(ScenarioError::Syntax {
                    line,
                    col: col + 1,
                    msg: format!("bad section name `{name}`"),
                });
            }
            if doc.section(name).is_some() {
                return Err(ScenarioError::Syntax {
                    line,
                    col,
                    msg: format!("section `{name}` repeated"),
                });
            }
            doc.sections.push(Section {
                name: name.to_string(),
                line,
                entries: Vec::new(),
            });
            continue;
        }
        let Some(eq) = trimmed.find('=') else {
            return Err(ScenarioError::Syntax {
                line,
                col,
                msg: "expected `key = value` or `[section]`".into(),
            });
        };
        let key = trimmed[..eq].trim();
        if !is_ident(key, &['.']) {
            return Err(ScenarioError::Syntax {
                line,
                col,
                msg: format!("bad key `{key}`"),
            });
        }
        let value = trimmed[eq + 1..].trim();
        let Some(section) = doc.sections.last_mut() else {
            return Err(ScenarioError::Syntax {
                line,
                col,
                msg: "entry before any section".into(),
            });
        };
        if section.get(key).is_some() {
            return Err(ScenarioError::UnknownKey {
                line,
                section: section.name.clone(),
                key: key.to_string(),
                duplicate: true,
            });
        }
        section.entries.push(Entry {
            key: key.to_string(),
            value: value.to_string(),
            line,
            col,
        });
    }
    Ok(doc)
}
