//! Three-hop chain-of-thought prompting.
//!
//! Each chain asks for a span, then an implicit opinion about it, then the
//! final emotion, with every prompt carrying the previous prompts and their
//! completions. The reasoning-revision variant inserts one extra step asking
//! for the source speaker's own state before the final answer.

mod template;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{Backend, BackendError, CompletionRequest, GenerationParams};
use crate::dataset::DatasetRecord;
use crate::error::{Error, Result};
use crate::label::EmotionLabel;

pub use template::{Template, TemplateId, TemplateSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ChainKind {
    State,
    Cause,
    CauseRr,
    BaselinePrompt,
}

impl ChainKind {
    pub fn steps(self) -> &'static [StepId] {
        match self {
            ChainKind::State | ChainKind::Cause => &[StepId::Span, StepId::Opinion, StepId::Answer],
            ChainKind::CauseRr => &[StepId::Span, StepId::Opinion, StepId::SourceState, StepId::Answer],
            ChainKind::BaselinePrompt => &[StepId::Answer],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ChainKind::State => "state",
            ChainKind::Cause => "cause",
            ChainKind::CauseRr => "cause_rr",
            ChainKind::BaselinePrompt => "baseline_prompt",
        }
    }

    fn template(self, step: StepId) -> TemplateId {
        match (self, step) {
            (ChainKind::BaselinePrompt, _) => TemplateId::Baseline,
            (ChainKind::State, StepId::Span) => TemplateId::StateSpan,
            (ChainKind::State, StepId::Opinion) => TemplateId::StateOpinion,
            (ChainKind::State, _) => TemplateId::StateAnswer,
            (_, StepId::Span) => TemplateId::CauseSpan,
            (_, StepId::Opinion) => TemplateId::CauseOpinion,
            (_, StepId::SourceState) => TemplateId::CauseRrSourceState,
            (ChainKind::CauseRr, StepId::Answer) => TemplateId::CauseRrAnswer,
            (_, StepId::Answer) => TemplateId::CauseAnswer,
        }
    }
}

impl fmt::Display for ChainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ChainKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "state" => Ok(ChainKind::State),
            "cause" => Ok(ChainKind::Cause),
            "cause_rr" | "cause-rr" => Ok(ChainKind::CauseRr),
            "baseline_prompt" | "baseline" | "prompt" => Ok(ChainKind::BaselinePrompt),
            other => Err(Error::Config(format!("unknown chain kind {other:?}"))),
        }
    }
}

/// Position of a prompt within a chain. Displayed as `1`, `2`, `3.1`, `3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StepId {
    #[serde(rename = "1")]
    Span,
    #[serde(rename = "2")]
    Opinion,
    #[serde(rename = "3.1")]
    SourceState,
    #[serde(rename = "3")]
    Answer,
}

impl fmt::Display for StepId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StepId::Span => "1",
            StepId::Opinion => "2",
            StepId::SourceState => "3.1",
            StepId::Answer => "3",
        })
    }
}

/// What a chain is asked about. For state chains source and target coincide.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChainInput<'a> {
    /// Rendered context window.
    pub context: &'a str,
    pub source: &'a str,
    pub target: &'a str,
}

impl<'a> From<&'a DatasetRecord> for ChainInput<'a> {
    fn from(r: &'a DatasetRecord) -> Self {
        ChainInput {
            context: &r.context,
            source: &r.src_text,
            target: &r.tgt_text,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepTranscript {
    pub step: StepId,
    pub prompt: String,
    pub completion: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainResult {
    pub kind: ChainKind,
    /// Step-1 completion.
    pub span: Option<String>,
    /// Step-2 completion.
    pub opinion: Option<String>,
    /// Parsed step-3.1 completion (reasoning revision only).
    pub revised_source_state: Option<EmotionLabel>,
    /// `None` when the final completion names no label.
    pub final_label: Option<EmotionLabel>,
    pub transcripts: Vec<StepTranscript>,
}

impl ChainResult {
    pub fn is_parsed(&self) -> bool {
        self.final_label.is_some()
    }

    /// Unparsable answers count as neutral, i.e. "no emotion caused".
    pub fn label_or_neutral(&self) -> EmotionLabel {
        self.final_label.unwrap_or(EmotionLabel::Neutral)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("step {step}: {source}")]
    Backend {
        step: StepId,
        #[source]
        source: BackendError,
    },
    #[error("step {step}: {message}")]
    Render { step: StepId, message: String },
}

impl ChainError {
    pub fn step(&self) -> StepId {
        match self {
            ChainError::Backend { step, .. } | ChainError::Render { step, .. } => *step,
        }
    }

    pub fn is_retriable(&self) -> bool {
        matches!(self, ChainError::Backend { source, .. } if source.is_retriable())
    }
}

/// Maps a free-text completion to a label: the last label word that occurs,
/// matched case-insensitively on whole words.
pub fn parse_emotion(completion: &str) -> Option<EmotionLabel> {
    completion
        .split(|c: char| !c.is_alphabetic())
        .rev()
        .filter(|w| !w.is_empty())
        .find_map(|w| w.parse::<EmotionLabel>().ok())
}

/// Lowercase label words in their canonical order, comma-separated.
pub fn label_choices() -> String {
    EmotionLabel::ALL.map(EmotionLabel::as_str).join(", ")
}

/// Renders one prompt. `prior` must hold the transcripts of every earlier
/// step of `kind`, in order.
pub fn render_step(
    templates: &TemplateSet,
    kind: ChainKind,
    step: StepId,
    input: &ChainInput<'_>,
    prior: &[StepTranscript],
) -> Result<String> {
    let steps = kind.steps();
    let position = steps
        .iter()
        .position(|s| *s == step)
        .ok_or_else(|| Error::Contract(format!("{kind} chain has no step {step}")))?;
    if prior.len() < position || prior.iter().zip(steps).any(|(t, s)| t.step != *s) {
        return Err(Error::Contract(format!(
            "step {step} of the {kind} chain needs the outputs of steps {}",
            steps[..position].iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
        )));
    }

    let conversation = templates
        .get(TemplateId::Conversation)
        .render(&BTreeMap::from([("context", input.context)]))?;
    let choices = label_choices();
    let mut vars: BTreeMap<&str, &str> = BTreeMap::from([
        ("conversation", conversation.as_str()),
        ("context", input.context),
        ("source", input.source),
        ("target", input.target),
        ("choices", choices.as_str()),
    ]);
    let find = |s: StepId| prior[..position].iter().find(|t| t.step == s);
    if let Some(t) = find(StepId::Span) {
        vars.insert("prompt_1", &t.prompt);
        vars.insert("span", &t.completion);
    }
    if let Some(t) = find(StepId::Opinion) {
        vars.insert("prompt_2", &t.prompt);
        vars.insert("opinion", &t.completion);
    }
    let revised;
    if let Some(t) = find(StepId::SourceState) {
        revised = parse_emotion(&t.completion).map_or_else(|| t.completion.trim().to_string(), |l| l.to_string());
        vars.insert("source_state", &revised);
    }
    templates.get(kind.template(step)).render(&vars)
}

/// Baseline single prompt for a cause entry.
pub fn render_baseline(templates: &TemplateSet, input: &ChainInput<'_>) -> Result<String> {
    render_step(templates, ChainKind::BaselinePrompt, StepId::Answer, input, &[])
}

/// Runs every step of `kind` sequentially against `backend`.
pub fn run_chain<B: Backend + ?Sized>(
    templates: &TemplateSet,
    kind: ChainKind,
    input: &ChainInput<'_>,
    backend: &B,
    params: &GenerationParams,
) -> std::result::Result<ChainResult, ChainError> {
    let mut transcripts: Vec<StepTranscript> = Vec::with_capacity(kind.steps().len());
    for &step in kind.steps() {
        let prompt = render_step(templates, kind, step, input, &transcripts)
            .map_err(|e| ChainError::Render { step, message: e.to_string() })?;
        let completion = backend
            .complete(&CompletionRequest::new(prompt.clone(), params))
            .map_err(|source| ChainError::Backend { step, source })?;
        transcripts.push(StepTranscript { step, prompt, completion });
    }
    let completion_of = |s: StepId| transcripts.iter().find(|t| t.step == s).map(|t| t.completion.clone());
    let final_label = parse_emotion(&transcripts.last().expect("every chain has a step").completion);
    Ok(ChainResult {
        kind,
        span: completion_of(StepId::Span),
        opinion: completion_of(StepId::Opinion),
        revised_source_state: completion_of(StepId::SourceState).and_then(|c| parse_emotion(&c)),
        final_label,
        transcripts,
    })
}

pub type ChainOutcome = std::result::Result<ChainResult, ChainError>;

/// Runs one chain per input with at most `limit` chains in flight.
/// Outcomes come back in input order; failures do not stop the batch.
pub fn run_batch<B: Backend + ?Sized>(
    templates: &TemplateSet,
    kind: ChainKind,
    inputs: &[ChainInput<'_>],
    backend: &B,
    params: &GenerationParams,
    limit: usize,
) -> Result<Vec<ChainOutcome>> {
    if limit == 0 {
        return Err(Error::Contract("concurrency limit must be at least 1".into()));
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<ChainOutcome>>> = Mutex::new(vec![None; inputs.len()]);
    std::thread::scope(|scope| {
        for _ in 0..limit.min(inputs.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(input) = inputs.get(i) else { break };
                let outcome = run_chain(templates, kind, input, backend, params);
                slots.lock().unwrap()[i] = Some(outcome);
            });
        }
    });
    Ok(slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|o| o.expect("every slot filled"))
        .collect())
}
