//! Run configuration shared by every subcommand.
//!
//! Values come from built-in defaults, then an optional TOML file, then
//! command-line flags; each layer overrides the one before it.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::backend::{BackendDescriptor, GenerationParams};
use crate::chain::ChainKind;
use crate::correction::CorrectionMode;
use crate::dataset::{DEFAULT_SPLIT_RATIO, DEFAULT_WINDOW};
use crate::error::{Error, Result};

/// Largest source-target distance tabulated by the distance report.
pub const DEFAULT_MAX_DELTA: u32 = 4;
pub const DEFAULT_CONCURRENCY: usize = 4;

/// Which text becomes the span of an emitted pair.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SpanSource {
    /// Source utterance with surrounding punctuation and whitespace removed.
    #[default]
    Punct,
    /// Source utterance verbatim.
    Raw,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Annotated corpus (training data for `build`, gold for `score`).
    pub corpus: Option<PathBuf>,
    /// Evaluation corpus, annotated or not.
    pub test_corpus: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub templates: Option<PathBuf>,
    pub vocabulary: Option<PathBuf>,
    pub predictions: Option<PathBuf>,
    /// TOML mapping of JSON key names; the competition layout when absent.
    pub schema: Option<PathBuf>,
}

impl Paths {
    fn rebase(&mut self, base: &Path) {
        for p in [
            &mut self.corpus,
            &mut self.test_corpus,
            &mut self.out_dir,
            &mut self.dataset,
            &mut self.templates,
            &mut self.vocabulary,
            &mut self.predictions,
            &mut self.schema,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub k: usize,
    pub split_ratio: f64,
    pub exclude_same_speaker_cross: bool,
    pub max_delta: u32,
    pub chain: ChainKind,
    pub concurrency: usize,
    pub correction: CorrectionMode,
    pub span_source: SpanSource,
    pub generation: GenerationParams,
    pub backend: Option<BackendDescriptor>,
    pub paths: Paths,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            k: DEFAULT_WINDOW,
            split_ratio: DEFAULT_SPLIT_RATIO,
            exclude_same_speaker_cross: true,
            max_delta: DEFAULT_MAX_DELTA,
            chain: ChainKind::CauseRr,
            concurrency: DEFAULT_CONCURRENCY,
            correction: CorrectionMode::Semantic,
            span_source: SpanSource::Punct,
            generation: GenerationParams::default(),
            backend: None,
            paths: Paths::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("run configuration: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a configuration file; relative paths inside it resolve against
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config =
            RunConfig::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.paths.rebase(base);
        if let Some(backend) = &mut config.backend {
            backend.rebase(base);
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(Error::Config(format!("split_ratio must lie in (0, 1), got {}", self.split_ratio)));
        }
        if self.concurrency == 0 {
            return Err(Error::Config("concurrency must be at least 1".into()));
        }
        Ok(())
    }

    /// One-line summary of the effective settings, printed at startup.
    pub fn banner(&self) -> String {
        format!(
            "k={} split_ratio={} exclude_same_speaker_cross={} max_delta={} chain={} concurrency={} \
             correction={:?} span_source={:?} temperature={} max_new_tokens={} backend={}",
            self.k,
            self.split_ratio,
            self.exclude_same_speaker_cross,
            self.max_delta,
            self.chain,
            self.concurrency,
            self.correction,
            self.span_source,
            self.generation.temperature,
            self.generation.max_new_tokens,
            self.backend.as_ref().map_or_else(|| "<none>".to_string(), BackendDescriptor::describe),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = RunConfig::default();
        assert_eq!(c.k, 3);
        assert_eq!(c.split_ratio, 0.9);
        assert_eq!(c.generation.temperature, 1.0);
        assert!(c.exclude_same_speaker_cross);
        assert_eq!(RunConfig::from_toml("").unwrap(), c);
    }

    #[test]
    fn file_values_and_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(
            &path,
            "k = 2\nchain = \"cause\"\n[paths]\ncorpus = \"train.json\"\n[backend]\nkind = \"mock\"\nscript = \"s.json\"\n",
        )
        .unwrap();
        let c = RunConfig::load(&path).unwrap();
        assert_eq!(c.k, 2);
        assert_eq!(c.chain, ChainKind::Cause);
        assert_eq!(c.paths.corpus, Some(dir.path().join("train.json")));
        assert_eq!(c.backend, Some(BackendDescriptor::Mock { script: dir.path().join("s.json") }));
    }

    #[test]
    fn rejects_bad_values() {
        assert!(RunConfig::from_toml("split_ratio = 1.0").is_err());
        assert!(RunConfig::from_toml("concurrency = 0").is_err());
        assert!(RunConfig::from_toml("unknown = 1").is_err());
    }
}
