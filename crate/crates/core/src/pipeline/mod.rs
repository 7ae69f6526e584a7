//! Processors, packets and sequential pipelines.
//!
//! A [`Processor`] maps a [`DataPacket`] (an ordered list of [`Value`]s) to
//! a new packet. [`SequentialProcessor`] chains processors positionally: the
//! output packet of one step is the input packet of the next.

mod builtins;
mod config;
mod processor;
mod registry;
mod sequential;
mod value;

pub use builtins::{
    BoxesToMessages, FilterByScore, MatchAnchors, NonMaximumSuppression, Normalize, Photometric, RandomFlipLeftRight,
    RandomPhotometric, Resize,
};
pub use config::{ConfigError, PipelineConfig, ProcessorSpec};
pub use processor::{from_fn, Arity, FnProcessor, ProcessError, Processor};
pub use registry::{registry_instantiate, Params, Registry, RegistryError};
pub use sequential::{Position, SequentialProcessor, Step};
pub use value::{BoxArray, DataPacket, DenseMatrix, Value};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("arity mismatch at step {index} ({name}): expected {expected}, found {found}")]
    ArityMismatch {
        index: usize,
        name: String,
        expected: Arity,
        found: Arity,
    },
    #[error("index {index} out of range for pipeline of {len} steps")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("no step named {0:?}")]
    NameNotFound(String),
    #[error("{count} steps are named {name:?}")]
    NameAmbiguous { name: String, count: usize },
    #[error("step {index} ({name}) failed: {source}")]
    Step {
        index: usize,
        name: String,
        #[source]
        source: Box<ProcessError>,
    },
}
