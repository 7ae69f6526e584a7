use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value as Json};
use thiserror::Error;

use super::{PipelineError, Registry, RegistryError, SequentialProcessor, Step};

/// `{"name": ..., "processors": [{"type": ..., "params": {...}}, ...]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub name: String,
    pub processors: Vec<ProcessorSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessorSpec {
    #[serde(rename = "type")]
    pub type_name: String,
    #[serde(default)]
    pub params: Map<String, Json>,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed pipeline config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("processor {index}: {source}")]
    Registry {
        index: usize,
        #[source]
        source: RegistryError,
    },
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

impl PipelineConfig {
    pub fn from_json_str(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    /// Instantiates every processor in order and chains them.
    pub fn build(&self, registry: &Registry) -> Result<SequentialProcessor, ConfigError> {
        let steps = self
            .processors
            .iter()
            .enumerate()
            .map(|(index, spec)| {
                registry
                    .instantiate(&spec.type_name, &spec.params)
                    .map(Step::Leaf)
                    .map_err(|source| ConfigError::Registry { index, source })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SequentialProcessor::from_steps(self.name.clone(), steps)?)
    }
}
