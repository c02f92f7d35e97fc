use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{Backend, BackendError, CompletionRequest};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MockReply {
    Text(String),
    Fail {
        fail: u16,
        #[serde(default)]
        message: String,
    },
}

impl MockReply {
    fn resolve(&self) -> Result<String, BackendError> {
        match self {
            MockReply::Text(t) => Ok(t.clone()),
            MockReply::Fail { fail, message } => Err(BackendError::Scripted {
                status: *fail,
                message: message.clone(),
            }),
        }
    }
}

impl From<&str> for MockReply {
    fn from(s: &str) -> Self {
        MockReply::Text(s.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternRule {
    pub pattern: String,
    pub reply: MockReply,
}

/// Response table of a [`MockBackend`].
///
/// In `pattern` mode the rule whose pattern occurs latest in the prompt wins
/// (earliest-declared on ties), so a rule keyed on a step's question matches
/// that step even though later prompts repeat earlier ones.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum MockScript {
    Ordered {
        responses: Vec<MockReply>,
    },
    Pattern {
        rules: Vec<PatternRule>,
        #[serde(default)]
        default: Option<MockReply>,
    },
}

impl MockScript {
    pub fn ordered<I, R>(responses: I) -> Self
    where
        I: IntoIterator<Item = R>,
        R: Into<MockReply>,
    {
        MockScript::Ordered {
            responses: responses.into_iter().map(Into::into).collect(),
        }
    }

    pub fn pattern<I, P, R>(rules: I, default: Option<MockReply>) -> Self
    where
        I: IntoIterator<Item = (P, R)>,
        P: Into<String>,
        R: Into<MockReply>,
    {
        MockScript::Pattern {
            rules: rules
                .into_iter()
                .map(|(p, r)| PatternRule {
                    pattern: p.into(),
                    reply: r.into(),
                })
                .collect(),
            default,
        }
    }

    pub fn load(path: &Path) -> Result<Self, BackendError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BackendError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| BackendError::Config(format!("{}: {e}", path.display())))
    }
}

/// Deterministic scripted backend. Records every prompt it receives.
#[derive(Debug)]
pub struct MockBackend {
    script: MockScript,
    cursor: Mutex<usize>,
    calls: AtomicUsize,
    prompts: Mutex<Vec<String>>,
}

impl MockBackend {
    pub fn new(script: MockScript) -> Self {
        MockBackend {
            script,
            cursor: Mutex::new(0),
            calls: AtomicUsize::new(0),
            prompts: Mutex::new(Vec::new()),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn prompts(&self) -> Vec<String> {
        self.prompts.lock().unwrap().clone()
    }

    fn match_rule<'s>(rules: &'s [PatternRule], prompt: &str) -> Option<&'s PatternRule> {
        let mut best: Option<(usize, &PatternRule)> = None;
        for rule in rules {
            if let Some(pos) = prompt.rfind(&rule.pattern) {
                let end = pos + rule.pattern.len();
                if best.is_none_or(|(b, _)| end > b) {
                    best = Some((end, rule));
                }
            }
        }
        best.map(|(_, r)| r)
    }
}

impl Backend for MockBackend {
    fn complete(&self, request: &CompletionRequest) -> Result<String, BackendError> {
        request.validate()?;
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.prompts.lock().unwrap().push(request.prompt.clone());
        match &self.script {
            MockScript::Ordered { responses } => {
                let mut cursor = self.cursor.lock().unwrap();
                let reply = responses
                    .get(*cursor)
                    .ok_or(BackendError::ScriptExhausted { calls: *cursor })?;
                *cursor += 1;
                reply.resolve()
            }
            MockScript::Pattern { rules, default } => {
                match Self::match_rule(rules, &request.prompt) {
                    Some(rule) => rule.reply.resolve(),
                    None => default
                        .as_ref()
                        .ok_or_else(|| BackendError::NoRuleMatched {
                            prompt_head: request.prompt.chars().take(60).collect(),
                        })?
                        .resolve(),
                }
            }
        }
    }

    fn describe(&self) -> String {
        match self.script {
            MockScript::Ordered { .. } => "mock (ordered script)".into(),
            MockScript::Pattern { .. } => "mock (pattern script)".into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::GenerationParams;

    fn req(prompt: &str) -> CompletionRequest {
        CompletionRequest::new(prompt, &GenerationParams::default())
    }

    #[test]
    fn ordered_script_then_exhaustion() {
        let mock = MockBackend::new(MockScript::ordered(["a", "b"]));
        assert_eq!(mock.complete(&req("1")).unwrap(), "a");
        assert_eq!(mock.complete(&req("2")).unwrap(), "b");
        assert_eq!(
            mock.complete(&req("3")).unwrap_err(),
            BackendError::ScriptExhausted { calls: 2 }
        );
        assert_eq!(mock.calls(), 3);
        assert_eq!(mock.prompts(), vec!["1", "2", "3"]);
    }

    #[test]
    fn pattern_latest_occurrence_wins() {
        let mock = MockBackend::new(MockScript::pattern(
            [("step one?", "span"), ("step three?", "joy")],
            None,
        ));
        assert_eq!(mock.complete(&req("ctx step one?")).unwrap(), "span");
        assert_eq!(mock.complete(&req("ctx step one? span. step three?")).unwrap(), "joy");
        assert!(matches!(
            mock.complete(&req("nothing")),
            Err(BackendError::NoRuleMatched { .. })
        ));
    }

    #[test]
    fn pattern_default_and_failure() {
        let mock = MockBackend::new(MockScript::pattern(
            [("boom", MockReply::Fail { fail: 503, message: "down".into() })],
            Some("neutral".into()),
        ));
        assert_eq!(mock.complete(&req("hello")).unwrap(), "neutral");
        let err = mock.complete(&req("boom")).unwrap_err();
        assert!(err.is_retriable());
    }

    #[test]
    fn same_requests_same_responses() {
        let script = MockScript::ordered(["x", "y", "z"]);
        let run = || {
            let m = MockBackend::new(script.clone());
            ["p", "q", "r"].iter().map(|p| m.complete(&req(p)).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn script_json_forms() {
        let s: MockScript = serde_json::from_str(
            r#"{"mode": "pattern", "rules": [{"pattern": "a", "reply": "joy"},
                {"pattern": "b", "reply": {"fail": 500}}], "default": "neutral"}"#,
        )
        .unwrap();
        let MockScript::Pattern { rules, default } = s else { panic!() };
        assert_eq!(rules[1].reply, MockReply::Fail { fail: 500, message: String::new() });
        assert_eq!(default, Some(MockReply::Text("neutral".into())));
    }
}
