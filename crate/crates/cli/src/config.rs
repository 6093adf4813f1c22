//! Experiment configuration: one JSON document, with file references
//! resolved relative to the config file and echoed back inline in reports.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use stability_lab::corpus::{ingest_corpus, Tokenization};
use stability_lab::naf::{safe_leave_one_out, safe_sharded, SafeEntry};
use stability_lab::{
    ConstantLearner, ContentDomain, Dataset, DiscreteDistribution, DistributionLiteral, EmpiricalLearner, Learner,
    SafeAssignment,
};

/// Configuration problem, located by a dotted path to the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl fmt::Display) -> Self {
        ConfigError {
            path: path.into(),
            message: message.to_string(),
        }
    }

    pub fn missing(path: &str, subcommand: &str) -> Self {
        Self::new(path, format!("required by `{subcommand}`"))
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error at `{}`: {}", self.path, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// A distribution given inline or as a path to a JSON literal file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DistSpec {
    Inline(DistributionLiteral),
    Path(PathBuf),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SafeSpec {
    pub content: String,
    pub model: DistSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum LearnerSpec {
    Empirical {
        #[serde(default)]
        lambda: f64,
    },
    Constant {
        model: DistSpec,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SafeConstruction {
    LeaveOneOut,
    Sharded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSpec {
    pub path: PathBuf,
    #[serde(default)]
    pub tokenization: Tokenization,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DpSpec {
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub eta: Option<f64>,
    pub beta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditSpec {
    pub k: usize,
    pub domain_size: usize,
    #[serde(default = "default_tail")]
    pub tail: f64,
}

fn default_tail() -> f64 {
    1e-12
}

/// Every field any subcommand reads. Subcommands check for the fields they
/// need and ignore the rest.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<DistSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q1: Option<DistSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q2: Option<DistSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub safes: Option<Vec<SafeSpec>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub safe_construction: Option<SafeConstruction>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corpus: Option<CorpusSpec>,
    /// One symbol per line, over the domain of `corpus` (or its own symbols).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub learner: Option<LearnerSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data_distribution: Option<DistSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dp: Option<DpSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outer_trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inner_trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub premise_trials: Option<usize>,
    /// Extra slack allowed on the `prop1` bound comparison.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_denominator: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub audit: Option<AuditSpec>,
}

/// A parsed config plus the directory its relative paths resolve against.
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    base: PathBuf,
}

impl LoadedConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text =
            fs::read_to_string(path).map_err(|e| ConfigError::new("<file>", format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_str(&text, base)
    }

    pub fn from_str(text: &str, base: PathBuf) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            ConfigError::new(if path == "." { "<root>".to_string() } else { path }, e.into_inner())
        })?;
        Ok(LoadedConfig { config, base })
    }

    pub fn empty() -> Self {
        LoadedConfig {
            config: ExperimentConfig::default(),
            base: PathBuf::new(),
        }
    }

    fn resolve_path(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base.join(path)
        }
    }

    fn read_literal(&self, spec: &DistSpec, field: &str) -> Result<DistributionLiteral, ConfigError> {
        match spec {
            DistSpec::Inline(lit) => Ok(lit.clone()),
            DistSpec::Path(path) => {
                let full = self.resolve_path(path);
                let text = fs::read_to_string(&full)
                    .map_err(|e| ConfigError::new(field, format!("{}: {e}", full.display())))?;
                serde_json::from_str(&text).map_err(|e| ConfigError::new(field, format!("{}: {e}", full.display())))
            }
        }
    }

    /// Loads a distribution, mapped onto `domain` by symbol name when given.
    pub fn distribution(
        &self,
        spec: &DistSpec,
        field: &str,
        domain: Option<&Arc<ContentDomain>>,
    ) -> Result<DiscreteDistribution, ConfigError> {
        let literal = self.read_literal(spec, field)?;
        let result = match domain {
            Some(d) => literal.into_distribution_on(d),
            None => literal.into_distribution(),
        };
        result.map_err(|e| ConfigError::new(field, e))
    }

    pub fn required_distribution(
        &self,
        spec: &Option<DistSpec>,
        field: &str,
        subcommand: &str,
        domain: Option<&Arc<ContentDomain>>,
    ) -> Result<DiscreteDistribution, ConfigError> {
        let spec = spec.as_ref().ok_or_else(|| ConfigError::missing(field, subcommand))?;
        self.distribution(spec, field, domain)
    }

    pub fn corpus(&self) -> Result<Option<(Arc<ContentDomain>, Dataset)>, ConfigError> {
        match &self.config.corpus {
            None => Ok(None),
            Some(spec) => ingest_corpus(self.resolve_path(&spec.path), spec.tokenization)
                .map(Some)
                .map_err(|e| ConfigError::new("corpus.path", e)),
        }
    }

    /// The `dataset` file, over `domain` if given, else over its own sorted
    /// distinct symbols.
    pub fn dataset(&self, domain: Option<&Arc<ContentDomain>>) -> Result<Option<Dataset>, ConfigError> {
        let Some(path) = &self.config.dataset else {
            return Ok(None);
        };
        let full = self.resolve_path(path);
        let err = |e: stability_lab::Error| ConfigError::new("dataset", format!("{}: {e}", full.display()));
        match domain {
            Some(d) => Dataset::from_text_file(d.clone(), &full).map(Some).map_err(err),
            None => ingest_corpus(&full, Tokenization::Line)
                .map(|(_, s)| Some(s))
                .map_err(err),
        }
    }

    pub fn learner(
        &self,
        subcommand: &str,
        domain: Option<&Arc<ContentDomain>>,
    ) -> Result<Box<dyn Learner>, ConfigError> {
        match self
            .config
            .learner
            .as_ref()
            .ok_or_else(|| ConfigError::missing("learner", subcommand))?
        {
            LearnerSpec::Empirical { lambda } => Ok(Box::new(
                EmpiricalLearner::new(*lambda).map_err(|e| ConfigError::new("learner.lambda", e))?,
            )),
            LearnerSpec::Constant { model } => Ok(Box::new(ConstantLearner::new(self.distribution(
                model,
                "learner.model",
                domain,
            )?))),
        }
    }

    /// Explicit `safes`, or a construction over `corpus` with `learner`.
    pub fn safes(
        &self,
        subcommand: &str,
        domain: Option<&Arc<ContentDomain>>,
        seed: u64,
    ) -> Result<SafeAssignment, ConfigError> {
        if let Some(specs) = &self.config.safes {
            let mut entries = Vec::with_capacity(specs.len());
            for (i, spec) in specs.iter().enumerate() {
                let field = format!("safes[{i}].model");
                entries.push(SafeEntry {
                    content: spec.content.clone(),
                    model: self.distribution(&spec.model, &field, domain)?,
                });
            }
            return SafeAssignment::new(entries).map_err(|e| ConfigError::new("safes", e));
        }
        let construction = self
            .config
            .safe_construction
            .ok_or_else(|| ConfigError::missing("safes", subcommand))?;
        let (_, corpus) = self
            .corpus()?
            .ok_or_else(|| ConfigError::missing("corpus", subcommand))?;
        if let Some(d) = domain {
            if d.symbols() != corpus.domain().symbols() {
                return Err(ConfigError::new(
                    "corpus",
                    "corpus domain differs from the distribution's symbols",
                ));
            }
        }
        let learner = self.learner(subcommand, Some(corpus.domain()))?;
        let built = match construction {
            SafeConstruction::LeaveOneOut => safe_leave_one_out(learner.as_ref(), &corpus, seed),
            SafeConstruction::Sharded => safe_sharded(learner.as_ref(), &corpus, seed),
        };
        built.map_err(|e| ConfigError::new("safe_construction", e))
    }

    /// Copy of the config with every file-backed distribution inlined.
    pub fn resolved(&self) -> Result<ExperimentConfig, ConfigError> {
        let mut out = self.config.clone();
        let inline = |spec: &mut Option<DistSpec>, field: &str| -> Result<(), ConfigError> {
            if let Some(s) = spec.as_mut() {
                *s = DistSpec::Inline(self.read_literal(s, field)?);
            }
            Ok(())
        };
        inline(&mut out.p, "p")?;
        inline(&mut out.q1, "q1")?;
        inline(&mut out.q2, "q2")?;
        inline(&mut out.data_distribution, "data_distribution")?;
        if let Some(safes) = out.safes.as_mut() {
            for (i, s) in safes.iter_mut().enumerate() {
                s.model = DistSpec::Inline(self.read_literal(&s.model, &format!("safes[{i}].model"))?);
            }
        }
        if let Some(LearnerSpec::Constant { model }) = out.learner.as_mut() {
            *model = DistSpec::Inline(self.read_literal(model, "learner.model")?);
        }
        Ok(out)
    }
}

pub fn require<T: Copy>(value: Option<T>, path: &str, subcommand: &str) -> Result<T, ConfigError> {
    value.ok_or_else(|| ConfigError::missing(path, subcommand))
}

pub fn require_range(value: f64, path: &str, ok: bool, expected: &str) -> Result<f64, ConfigError> {
    if ok {
        Ok(value)
    } else {
        Err(ConfigError::new(path, format!("{value} is out of range: {expected}")))
    }
}
