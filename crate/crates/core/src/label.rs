use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The closed emotion set: six cause emotions plus `neutral` for absence of emotion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmotionLabel {
    Surprise,
    Sadness,
    Joy,
    Disgust,
    Fear,
    Anger,
    Neutral,
}

impl EmotionLabel {
    /// Every label, `neutral` last.
    pub const ALL: [EmotionLabel; 7] = [
        EmotionLabel::Surprise,
        EmotionLabel::Sadness,
        EmotionLabel::Joy,
        EmotionLabel::Disgust,
        EmotionLabel::Fear,
        EmotionLabel::Anger,
        EmotionLabel::Neutral,
    ];

    /// The six labels a cause pair may carry.
    pub const CAUSES: [EmotionLabel; 6] = [
        EmotionLabel::Surprise,
        EmotionLabel::Sadness,
        EmotionLabel::Joy,
        EmotionLabel::Disgust,
        EmotionLabel::Fear,
        EmotionLabel::Anger,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EmotionLabel::Surprise => "surprise",
            EmotionLabel::Sadness => "sadness",
            EmotionLabel::Joy => "joy",
            EmotionLabel::Disgust => "disgust",
            EmotionLabel::Fear => "fear",
            EmotionLabel::Anger => "anger",
            EmotionLabel::Neutral => "neutral",
        }
    }

    pub fn is_cause(self) -> bool {
        self != EmotionLabel::Neutral
    }

    /// Position in [`EmotionLabel::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for EmotionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownLabel(pub String);

impl fmt::Display for UnknownLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown emotion label {:?}", self.0)
    }
}

impl std::error::Error for UnknownLabel {}

impl FromStr for EmotionLabel {
    type Err = UnknownLabel;

    /// Case-insensitive; surrounding whitespace is ignored.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let word = s.trim();
        EmotionLabel::ALL
            .into_iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(word))
            .ok_or_else(|| UnknownLabel(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn seven_distinct_values_six_causes() {
        let all: HashSet<_> = EmotionLabel::ALL.iter().collect();
        assert_eq!(all.len(), 7);
        assert_eq!(EmotionLabel::CAUSES.len(), 6);
        assert!(!EmotionLabel::CAUSES.contains(&EmotionLabel::Neutral));
    }

    #[test]
    fn lowercase_round_trip() {
        for label in EmotionLabel::ALL {
            let text = label.to_string();
            assert_eq!(text, text.to_lowercase());
            assert_eq!(text.parse::<EmotionLabel>().unwrap(), label);
            let json = serde_json::to_string(&label).unwrap();
            assert_eq!(json, format!("\"{text}\""));
            assert_eq!(serde_json::from_str::<EmotionLabel>(&json).unwrap(), label);
        }
        assert_eq!(EmotionLabel::Surprise.to_string(), "surprise");
    }

    #[test]
    fn index_matches_all_order() {
        for (i, label) in EmotionLabel::ALL.into_iter().enumerate() {
            assert_eq!(label.index(), i);
        }
    }

    #[test]
    fn rejects_unknown() {
        assert!("happiness".parse::<EmotionLabel>().is_err());
        assert_eq!(" Joy ".parse::<EmotionLabel>().unwrap(), EmotionLabel::Joy);
    }
}
