//! Conversations, utterances and cause-pair annotations, plus ingestion from
//! competition-style JSON through a configurable field-name mapping.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::label::EmotionLabel;

/// Conversation identifier as found in the source file (numeric or textual).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConversationId {
    Num(u64),
    Text(String),
}

impl fmt::Display for ConversationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConversationId::Num(n) => write!(f, "{n}"),
            ConversationId::Text(s) => f.write_str(s),
        }
    }
}

impl From<u64> for ConversationId {
    fn from(n: u64) -> Self {
        ConversationId::Num(n)
    }
}

impl ConversationId {
    /// Inverse of `Display`: all-digit strings become numeric ids.
    pub fn parse(s: &str) -> Self {
        match s.parse::<u64>() {
            Ok(n) if n.to_string() == s => ConversationId::Num(n),
            _ => ConversationId::Text(s.to_string()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Utterance {
    /// 1-based index within the conversation.
    pub id: u32,
    pub speaker: String,
    pub text: String,
    /// Absent on unannotated evaluation data.
    pub state: Option<EmotionLabel>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CausePair {
    pub src_id: u32,
    pub tgt_id: u32,
    pub emotion: EmotionLabel,
    /// Gold cause span inside the source utterance, when annotated.
    pub span: Option<String>,
}

impl CausePair {
    /// `tgt_id - src_id`; negative when the cause lies in the future.
    pub fn delta(&self) -> i64 {
        i64::from(self.tgt_id) - i64::from(self.src_id)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Conversation {
    pub id: ConversationId,
    pub utterances: Vec<Utterance>,
    pub pairs: Vec<CausePair>,
}

impl Conversation {
    /// Looks an utterance up by its 1-based id.
    pub fn utterance(&self, id: u32) -> Option<&Utterance> {
        let idx = usize::try_from(id).ok()?.checked_sub(1)?;
        self.utterances.get(idx)
    }
}

/// A validated collection of conversations.
///
/// A corpus is annotated when every utterance carries an emotion state
/// (vacuously true for an empty corpus).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Corpus {
    conversations: Vec<Conversation>,
    annotated: bool,
}

impl Corpus {
    pub fn new(conversations: Vec<Conversation>) -> Result<Self> {
        let mut seen = HashSet::new();
        for conv in &conversations {
            if !seen.insert(&conv.id) {
                return Err(Error::Validation(format!(
                    "duplicate conversation id {}",
                    conv.id
                )));
            }
            validate_conversation(conv)?;
        }

        let with_state = conversations
            .iter()
            .flat_map(|c| &c.utterances)
            .filter(|u| u.state.is_some())
            .count();
        let total: usize = conversations.iter().map(|c| c.utterances.len()).sum();
        if with_state != 0 && with_state != total {
            let (conv, utt) = conversations
                .iter()
                .flat_map(|c| c.utterances.iter().map(move |u| (c, u)))
                .find(|(_, u)| u.state.is_none())
                .expect("some utterance lacks a state");
            return Err(Error::Validation(format!(
                "conversation {}, utterance {}: missing emotion state in an annotated corpus",
                conv.id, utt.id
            )));
        }

        Ok(Corpus {
            conversations,
            annotated: with_state == total,
        })
    }

    pub fn conversations(&self) -> &[Conversation] {
        &self.conversations
    }

    pub fn into_conversations(self) -> Vec<Conversation> {
        self.conversations
    }

    pub fn is_annotated(&self) -> bool {
        self.annotated
    }

    pub fn len(&self) -> usize {
        self.conversations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.conversations.is_empty()
    }

    pub fn conversation(&self, id: &ConversationId) -> Option<&Conversation> {
        self.conversations.iter().find(|c| &c.id == id)
    }

    pub fn utterance_count(&self) -> usize {
        self.conversations.iter().map(|c| c.utterances.len()).sum()
    }

    pub fn pair_count(&self) -> usize {
        self.conversations.iter().map(|c| c.pairs.len()).sum()
    }

    /// Copy of this corpus with every conversation's pair list replaced.
    pub fn with_pairs<F>(&self, mut pairs_for: F) -> Result<Corpus>
    where
        F: FnMut(&Conversation) -> Vec<CausePair>,
    {
        let conversations = self
            .conversations
            .iter()
            .map(|c| Conversation {
                id: c.id.clone(),
                utterances: c.utterances.clone(),
                pairs: pairs_for(c),
            })
            .collect();
        Corpus::new(conversations)
    }
}

fn validate_conversation(conv: &Conversation) -> Result<()> {
    if conv.utterances.is_empty() {
        return Err(Error::Validation(format!(
            "conversation {} has no utterances",
            conv.id
        )));
    }
    for (pos, utt) in conv.utterances.iter().enumerate() {
        let expected = pos as u64 + 1;
        if u64::from(utt.id) != expected {
            return Err(Error::Validation(format!(
                "conversation {}: utterance ids must be 1-based and consecutive, found {} at position {}",
                conv.id, utt.id, expected
            )));
        }
        if utt.speaker.is_empty() {
            return Err(Error::Validation(format!(
                "conversation {}, utterance {}: empty speaker",
                conv.id, utt.id
            )));
        }
    }
    let n = conv.utterances.len() as u64;
    for pair in &conv.pairs {
        for id in [pair.src_id, pair.tgt_id] {
            if id == 0 || u64::from(id) > n {
                return Err(Error::Validation(format!(
                    "conversation {}: pair ({} -> {}) references missing utterance {}",
                    conv.id, pair.src_id, pair.tgt_id, id
                )));
            }
        }
        if !pair.emotion.is_cause() {
            return Err(Error::Validation(format!(
                "conversation {}: pair ({} -> {}) carries neutral",
                conv.id, pair.src_id, pair.tgt_id
            )));
        }
    }
    Ok(())
}

/// How cause pairs are laid out inside a conversation object.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairEncoding {
    /// `["<tgt_id>_<emotion>", "<src_id>_<span text>"]`; the `_<span>` part is optional.
    #[default]
    Competition,
    /// `{ <pair_source>: id, <pair_target>: id, <pair_emotion>: "...", <pair_span>: "..." }`.
    Object,
}

/// Maps logical fields onto concrete JSON key names.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Schema {
    pub conversation_id: String,
    pub utterances: String,
    pub utterance_id: String,
    pub speaker: String,
    pub text: String,
    pub emotion: String,
    pub pairs: String,
    pub pair_encoding: PairEncoding,
    pub pair_source: String,
    pub pair_target: String,
    pub pair_emotion: String,
    pub pair_span: String,
}

impl Default for Schema {
    fn default() -> Self {
        Schema {
            conversation_id: "conversation_ID".into(),
            utterances: "conversation".into(),
            utterance_id: "utterance_ID".into(),
            speaker: "speaker".into(),
            text: "text".into(),
            emotion: "emotion".into(),
            pairs: "emotion-cause_pairs".into(),
            pair_encoding: PairEncoding::Competition,
            pair_source: "source".into(),
            pair_target: "target".into(),
            pair_emotion: "emotion".into(),
            pair_span: "span".into(),
        }
    }
}

impl Schema {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("schema mapping: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Schema::from_toml(&text)
    }
}

pub fn parse_corpus(raw: &[u8], schema: &Schema) -> Result<Corpus> {
    let root: Value = serde_json::from_slice(raw).map_err(|e| Error::json(raw, &e))?;
    let Value::Array(items) = root else {
        return Err(Error::Validation("top level must be a list of conversations".into()));
    };
    let conversations = items
        .iter()
        .enumerate()
        .map(|(pos, item)| parse_conversation(item, pos, schema))
        .collect::<Result<Vec<_>>>()?;
    Corpus::new(conversations)
}

pub fn load_corpus(path: &Path, schema: &Schema) -> Result<Corpus> {
    let raw = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(&raw, schema).map_err(|e| match e {
        Error::Validation(msg) => Error::Validation(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn parse_conversation(item: &Value, pos: usize, schema: &Schema) -> Result<Conversation> {
    let obj = item
        .as_object()
        .ok_or_else(|| Error::Validation(format!("conversation #{pos} is not an object")))?;
    let id = match obj.get(&schema.conversation_id) {
        Some(Value::Number(n)) if n.is_u64() => ConversationId::Num(n.as_u64().unwrap()),
        Some(Value::String(s)) => ConversationId::Text(s.clone()),
        _ => {
            return Err(Error::Validation(format!(
                "conversation #{pos}: missing or invalid {:?}",
                schema.conversation_id
            )))
        }
    };
    let utterances = obj
        .get(&schema.utterances)
        .and_then(Value::as_array)
        .ok_or_else(|| {
            Error::Validation(format!(
                "conversation {id}: missing utterance list {:?}",
                schema.utterances
            ))
        })?
        .iter()
        .map(|u| parse_utterance(u, &id, schema))
        .collect::<Result<Vec<_>>>()?;

    let pairs = match obj.get(&schema.pairs) {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Array(raw_pairs)) => raw_pairs
            .iter()
            .map(|p| parse_pair(p, &id, schema))
            .collect::<Result<Vec<_>>>()?,
        Some(_) => {
            return Err(Error::Validation(format!(
                "conversation {id}: {:?} must be a list",
                schema.pairs
            )))
        }
    };

    Ok(Conversation {
        id,
        utterances,
        pairs,
    })
}

fn parse_utterance(value: &Value, conv: &ConversationId, schema: &Schema) -> Result<Utterance> {
    let obj = value.as_object().ok_or_else(|| {
        Error::Validation(format!("conversation {conv}: utterance is not an object"))
    })?;
    let id = obj
        .get(&schema.utterance_id)
        .and_then(json_u32)
        .ok_or_else(|| {
            Error::Validation(format!(
                "conversation {conv}: utterance without a valid {:?}",
                schema.utterance_id
            ))
        })?;
    let string_field = |key: &str| -> Result<String> {
        obj.get(key)
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| {
                Error::Validation(format!(
                    "conversation {conv}, utterance {id}: missing string field {key:?}"
                ))
            })
    };
    let speaker = string_field(&schema.speaker)?;
    let text = string_field(&schema.text)?;
    let state = match obj.get(&schema.emotion) {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.parse::<EmotionLabel>().map_err(|_| {
            Error::Validation(format!(
                "conversation {conv}, utterance {id}: unknown emotion {s:?}"
            ))
        })?),
        Some(other) => {
            return Err(Error::Validation(format!(
                "conversation {conv}, utterance {id}: emotion must be a string, got {other}"
            )))
        }
    };
    Ok(Utterance {
        id,
        speaker,
        text,
        state,
    })
}

fn json_u32(v: &Value) -> Option<u32> {
    match v {
        Value::Number(n) => n.as_u64().and_then(|n| u32::try_from(n).ok()),
        Value::String(s) => s.parse().ok(),
        _ => None,
    }
}

fn parse_pair(value: &Value, conv: &ConversationId, schema: &Schema) -> Result<CausePair> {
    let bad = |why: &str| Error::Validation(format!("conversation {conv}: bad pair {value}: {why}"));
    let emotion_of = |s: &str| -> Result<EmotionLabel> {
        s.parse::<EmotionLabel>()
            .map_err(|_| Error::Validation(format!("conversation {conv}: unknown emotion {s:?} in pair {value}")))
    };
    match schema.pair_encoding {
        PairEncoding::Competition => {
            let items = value.as_array().ok_or_else(|| bad("expected a two-element list"))?;
            let [tgt, src] = items.as_slice() else {
                return Err(bad("expected a two-element list"));
            };
            let (tgt, src) = (
                tgt.as_str().ok_or_else(|| bad("target must be a string"))?,
                src.as_str().ok_or_else(|| bad("source must be a string"))?,
            );
            let (tgt_id, emotion) = tgt.split_once('_').ok_or_else(|| bad("target must be <id>_<emotion>"))?;
            let (src_id, span) = match src.split_once('_') {
                Some((id, span)) => (id, Some(span.to_string())),
                None => (src, None),
            };
            Ok(CausePair {
                src_id: src_id.parse().map_err(|_| bad("non-numeric source id"))?,
                tgt_id: tgt_id.parse().map_err(|_| bad("non-numeric target id"))?,
                emotion: emotion_of(emotion)?,
                span,
            })
        }
        PairEncoding::Object => {
            let obj = value.as_object().ok_or_else(|| bad("expected an object"))?;
            let id = |key: &str| obj.get(key).and_then(json_u32).ok_or_else(|| bad(&format!("missing id {key:?}")));
            let emotion = obj
                .get(&schema.pair_emotion)
                .and_then(Value::as_str)
                .ok_or_else(|| bad("missing emotion"))?;
            Ok(CausePair {
                src_id: id(&schema.pair_source)?,
                tgt_id: id(&schema.pair_target)?,
                emotion: emotion_of(emotion)?,
                span: obj.get(&schema.pair_span).and_then(Value::as_str).map(str::to_string),
            })
        }
    }
}

/// Serializes a corpus back to JSON under the given key mapping.
pub fn serialize_corpus(corpus: &Corpus, schema: &Schema) -> Vec<u8> {
    let items: Vec<Value> = corpus
        .conversations()
        .iter()
        .map(|c| conversation_to_json(c, schema))
        .collect();
    let mut out = serde_json::to_vec_pretty(&Value::Array(items)).expect("JSON values always serialize");
    out.push(b'\n');
    out
}

fn conversation_to_json(conv: &Conversation, schema: &Schema) -> Value {
    let mut obj = Map::new();
    obj.insert(
        schema.conversation_id.clone(),
        serde_json::to_value(&conv.id).expect("id serializes"),
    );
    let utterances = conv
        .utterances
        .iter()
        .map(|u| {
            let mut m = Map::new();
            m.insert(schema.utterance_id.clone(), Value::from(u.id));
            m.insert(schema.text.clone(), Value::from(u.text.clone()));
            m.insert(schema.speaker.clone(), Value::from(u.speaker.clone()));
            if let Some(state) = u.state {
                m.insert(schema.emotion.clone(), Value::from(state.as_str()));
            }
            Value::Object(m)
        })
        .collect();
    obj.insert(schema.utterances.clone(), Value::Array(utterances));
    let pairs = conv.pairs.iter().map(|p| pair_to_json(p, schema)).collect();
    obj.insert(schema.pairs.clone(), Value::Array(pairs));
    Value::Object(obj)
}

fn pair_to_json(pair: &CausePair, schema: &Schema) -> Value {
    match schema.pair_encoding {
        PairEncoding::Competition => {
            let src = match &pair.span {
                Some(span) => format!("{}_{}", pair.src_id, span),
                None => pair.src_id.to_string(),
            };
            Value::Array(vec![
                Value::from(format!("{}_{}", pair.tgt_id, pair.emotion)),
                Value::from(src),
            ])
        }
        PairEncoding::Object => {
            let mut m = Map::new();
            m.insert(schema.pair_source.clone(), Value::from(pair.src_id));
            m.insert(schema.pair_target.clone(), Value::from(pair.tgt_id));
            m.insert(schema.pair_emotion.clone(), Value::from(pair.emotion.as_str()));
            if let Some(span) = &pair.span {
                m.insert(schema.pair_span.clone(), Value::from(span.clone()));
            }
            Value::Object(m)
        }
    }
}

/// `<speaker> : <text>`
pub fn render_utterance(u: &Utterance) -> String {
    format!("{} : {}", u.speaker, u.text)
}

/// Utterance renderings joined by single newlines, in the given order.
pub fn render_context(context: &[Utterance]) -> Result<String> {
    if context.is_empty() {
        return Err(Error::Contract("cannot render an empty context".into()));
    }
    Ok(context
        .iter()
        .map(render_utterance)
        .collect::<Vec<_>>()
        .join("\n"))
}
