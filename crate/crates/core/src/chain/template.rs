//! Prompt templates with `{name}` placeholders (`{{` / `}}` escape braces).

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Piece {
    Literal(String),
    Slot(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Template {
    source: String,
    pieces: Vec<Piece>,
}

impl Template {
    pub fn parse(source: &str) -> Result<Self> {
        let mut pieces = Vec::new();
        let mut literal = String::new();
        let mut chars = source.char_indices().peekable();
        while let Some((pos, c)) = chars.next() {
            match c {
                '{' if chars.peek().map(|(_, n)| *n) == Some('{') => {
                    chars.next();
                    literal.push('{');
                }
                '}' if chars.peek().map(|(_, n)| *n) == Some('}') => {
                    chars.next();
                    literal.push('}');
                }
                '{' => {
                    let mut name = String::new();
                    loop {
                        match chars.next() {
                            Some((_, '}')) => break,
                            Some((_, ch)) if ch.is_ascii_alphanumeric() || ch == '_' => name.push(ch),
                            _ => {
                                return Err(Error::Template(format!(
                                    "unterminated or invalid placeholder at byte {pos}"
                                )))
                            }
                        }
                    }
                    if name.is_empty() {
                        return Err(Error::Template(format!("empty placeholder at byte {pos}")));
                    }
                    if !literal.is_empty() {
                        pieces.push(Piece::Literal(std::mem::take(&mut literal)));
                    }
                    pieces.push(Piece::Slot(name));
                }
                '}' => {
                    return Err(Error::Template(format!("unmatched '}}' at byte {pos}")));
                }
                c => literal.push(c),
            }
        }
        if !literal.is_empty() {
            pieces.push(Piece::Literal(literal));
        }
        Ok(Template {
            source: source.to_string(),
            pieces,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn placeholders(&self) -> impl Iterator<Item = &str> {
        self.pieces.iter().filter_map(|p| match p {
            Piece::Slot(name) => Some(name.as_str()),
            Piece::Literal(_) => None,
        })
    }

    pub fn render(&self, vars: &BTreeMap<&str, &str>) -> Result<String> {
        let mut out = String::with_capacity(self.source.len());
        for piece in &self.pieces {
            match piece {
                Piece::Literal(text) => out.push_str(text),
                Piece::Slot(name) => out.push_str(
                    vars.get(name.as_str())
                        .ok_or_else(|| Error::Template(format!("unresolved placeholder {{{name}}}")))?,
                ),
            }
        }
        Ok(out)
    }
}

/// One editable template file of the chain engine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TemplateId {
    Conversation,
    StateSpan,
    StateOpinion,
    StateAnswer,
    CauseSpan,
    CauseOpinion,
    CauseAnswer,
    CauseRrSourceState,
    CauseRrAnswer,
    Baseline,
}

impl TemplateId {
    pub const ALL: [TemplateId; 10] = [
        TemplateId::Conversation,
        TemplateId::StateSpan,
        TemplateId::StateOpinion,
        TemplateId::StateAnswer,
        TemplateId::CauseSpan,
        TemplateId::CauseOpinion,
        TemplateId::CauseAnswer,
        TemplateId::CauseRrSourceState,
        TemplateId::CauseRrAnswer,
        TemplateId::Baseline,
    ];

    pub fn file_name(self) -> &'static str {
        match self {
            TemplateId::Conversation => "conversation.txt",
            TemplateId::StateSpan => "state_1.txt",
            TemplateId::StateOpinion => "state_2.txt",
            TemplateId::StateAnswer => "state_3.txt",
            TemplateId::CauseSpan => "cause_1.txt",
            TemplateId::CauseOpinion => "cause_2.txt",
            TemplateId::CauseAnswer => "cause_3.txt",
            TemplateId::CauseRrSourceState => "cause_rr_3_1.txt",
            TemplateId::CauseRrAnswer => "cause_rr_3.txt",
            TemplateId::Baseline => "baseline.txt",
        }
    }

    /// Placeholders this template may use.
    pub fn allowed(self) -> &'static [&'static str] {
        const STEP1: &[&str] = &["conversation", "context", "source", "target"];
        const STEP2: &[&str] = &["conversation", "context", "source", "target", "prompt_1", "span"];
        const STEP3: &[&str] = &[
            "conversation", "context", "source", "target", "prompt_1", "span", "prompt_2", "opinion",
        ];
        const RR3: &[&str] = &[
            "conversation", "context", "source", "target", "prompt_1", "span", "prompt_2", "opinion",
            "source_state",
        ];
        match self {
            TemplateId::Conversation => &["context"],
            TemplateId::StateSpan | TemplateId::CauseSpan => STEP1,
            TemplateId::StateOpinion | TemplateId::CauseOpinion => STEP2,
            TemplateId::StateAnswer | TemplateId::CauseAnswer | TemplateId::CauseRrSourceState => STEP3,
            TemplateId::CauseRrAnswer => RR3,
            TemplateId::Baseline => &["conversation", "context", "source", "target", "choices"],
        }
    }

    pub fn default_source(self) -> &'static str {
        match self {
            TemplateId::Conversation => "Given the conversation: {context}.",
            TemplateId::StateSpan => {
                "{conversation} Which text spans are possibly causes emotion on \"{target}\"?"
            }
            TemplateId::StateOpinion => {
                "{prompt_1} {span}. Based on the common sense, what is the implicit opinion towards the mentioned text spans that causes emotion on \"{target}\", and why?"
            }
            TemplateId::StateAnswer => {
                "{prompt_2} {opinion}. Based on such opinion, what is the emotion state of \"{target}\"?"
            }
            TemplateId::CauseSpan => {
                "{conversation} Which specific text span of \"{source}\" is possibly causes emotion?"
            }
            TemplateId::CauseOpinion => {
                "{prompt_1} {span}. Based on the common sense, what is the implicit opinion towards the cause of mentioned text span of \"{source}\", and why?"
            }
            TemplateId::CauseAnswer => {
                "{prompt_2} {opinion}. Based on such opinion, what is the emotion caused by \"{source}\" towards the last conversation utterance?"
            }
            TemplateId::CauseRrSourceState => {
                "{prompt_2} {opinion}. Based on such opinion, what is the emotion state of \"{source}\"?"
            }
            TemplateId::CauseRrAnswer => {
                "{prompt_2} {opinion}. The speaker's emotion state is {source_state}. Based on such opinion, what is the emotion caused by \"{source}\" towards the last conversation utterance?"
            }
            TemplateId::Baseline => {
                "{conversation} What emotion causes \"{source}\" towards the last conversation utterance? Choose from: {choices}"
            }
        }
    }
}

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.file_name())
    }
}

/// Every template the chain engine needs, validated against its placeholder set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TemplateSet {
    templates: BTreeMap<TemplateId, Template>,
}

impl Default for TemplateSet {
    fn default() -> Self {
        let templates = TemplateId::ALL
            .into_iter()
            .map(|id| (id, Template::parse(id.default_source()).expect("built-in templates parse")))
            .collect();
        TemplateSet { templates }
    }
}

impl TemplateSet {
    pub fn with(mut self, id: TemplateId, source: &str) -> Result<Self> {
        let template = Template::parse(source).map_err(|e| Error::Template(format!("{id}: {e}")))?;
        if let Some(bad) = template.placeholders().find(|p| !id.allowed().contains(p)) {
            return Err(Error::Template(format!(
                "{id}: placeholder {{{bad}}} is not available here (allowed: {})",
                id.allowed().join(", ")
            )));
        }
        self.templates.insert(id, template);
        Ok(self)
    }

    /// Loads overrides from `dir`; files that are absent keep their defaults.
    /// One trailing newline per file is ignored.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        if !dir.is_dir() {
            return Err(Error::Config(format!("template directory {} does not exist", dir.display())));
        }
        let mut set = TemplateSet::default();
        for id in TemplateId::ALL {
            let path = dir.join(id.file_name());
            if !path.exists() {
                continue;
            }
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let text = text.strip_suffix('\n').unwrap_or(&text);
            let text = text.strip_suffix('\r').unwrap_or(text);
            set = set.with(id, text)?;
        }
        Ok(set)
    }

    /// Writes every template to `dir`, one file each.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (id, template) in &self.templates {
            let path = dir.join(id.file_name());
            std::fs::write(&path, format!("{}\n", template.source())).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }

    pub fn get(&self, id: TemplateId) -> &Template {
        &self.templates[&id]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_render() {
        let t = Template::parse("Hi {name}, {{literal}} {name}!").unwrap();
        assert_eq!(t.placeholders().collect::<Vec<_>>(), vec!["name", "name"]);
        let vars = BTreeMap::from([("name", "Ann")]);
        assert_eq!(t.render(&vars).unwrap(), "Hi Ann, {literal} Ann!");
        assert!(t.render(&BTreeMap::new()).is_err());
    }

    #[test]
    fn malformed_templates() {
        assert!(Template::parse("{open").is_err());
        assert!(Template::parse("close}").is_err());
        assert!(Template::parse("{}").is_err());
        assert!(Template::parse("{bad name}").is_err());
    }

    #[test]
    fn defaults_respect_allowed_placeholders() {
        let set = TemplateSet::default();
        for id in TemplateId::ALL {
            for p in set.get(id).placeholders() {
                assert!(id.allowed().contains(&p), "{id} uses {p}");
            }
        }
    }

    #[test]
    fn override_with_unknown_placeholder_rejected() {
        let err = TemplateSet::default().with(TemplateId::CauseSpan, "{opinion}").unwrap_err();
        assert!(err.to_string().contains("opinion"));
    }

    #[test]
    fn directory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let set = TemplateSet::default()
            .with(TemplateId::Conversation, "Context:\n{context}")
            .unwrap();
        set.write_dir(dir.path()).unwrap();
        assert_eq!(TemplateSet::load_dir(dir.path()).unwrap(), set);
        std::fs::remove_file(dir.path().join("baseline.txt")).unwrap();
        let partial = TemplateSet::load_dir(dir.path()).unwrap();
        assert_eq!(partial.get(TemplateId::Baseline), TemplateSet::default().get(TemplateId::Baseline));
    }
}
