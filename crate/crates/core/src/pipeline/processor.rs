use std::fmt;

use thiserror::Error;

use crate::boxes::BoxError;
use crate::geometry::GeometryError;
use crate::image::ImageError;
use crate::rng::RngStream;

use super::{DataPacket, PipelineError};

/// How many values a processor consumes or produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Arity {
    Exact(usize),
    Variadic,
}

impl Arity {
    /// Adjacent arities are compatible when equal or when either is variadic.
    pub fn compatible(self, next: Arity) -> bool {
        match (self, next) {
            (Arity::Exact(a), Arity::Exact(b)) => a == b,
            _ => true,
        }
    }

    pub fn accepts_len(self, len: usize) -> bool {
        self.compatible(Arity::Exact(len))
    }
}

impl fmt::Display for Arity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arity::Exact(n) => write!(f, "{n}"),
            Arity::Variadic => f.write_str("*"),
        }
    }
}

/// Failure raised from inside a processor.
#[derive(Debug, Error)]
pub enum ProcessError {
    #[error("value {position}: expected {expected}, found {found}")]
    TypeMismatch {
        position: usize,
        expected: &'static str,
        found: &'static str,
    },
    #[error("{0}")]
    Boxes(#[from] BoxError),
    #[error("{0}")]
    Image(#[from] ImageError),
    #[error("{0}")]
    Geometry(#[from] GeometryError),
    #[error("{0}")]
    Pipeline(Box<PipelineError>),
    #[error("{0}")]
    Other(String),
}

impl From<PipelineError> for ProcessError {
    fn from(e: PipelineError) -> Self {
        ProcessError::Pipeline(Box::new(e))
    }
}

/// A named unit of computation over a packet.
///
/// `apply` must be deterministic for a given packet and stream state, and
/// must return `out_arity` values when given `in_arity` values.
pub trait Processor: Send + Sync {
    fn name(&self) -> &str;

    fn in_arity(&self) -> Arity {
        Arity::Variadic
    }

    fn out_arity(&self) -> Arity {
        Arity::Variadic
    }

    fn apply(&self, packet: DataPacket, rng: &mut RngStream) -> Result<DataPacket, ProcessError>;
}

/// Wraps a plain function as a processor. Arities default to variadic and
/// the name to `lambda`.
pub struct FnProcessor<F> {
    name: String,
    in_arity: Arity,
    out_arity: Arity,
    f: F,
}

pub fn from_fn<F>(f: F) -> FnProcessor<F>
where
    F: Fn(DataPacket, &mut RngStream) -> Result<DataPacket, ProcessError> + Send + Sync,
{
    FnProcessor {
        name: "lambda".to_string(),
        in_arity: Arity::Variadic,
        out_arity: Arity::Variadic,
        f,
    }
}

impl<F> FnProcessor<F> {
    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_arity(mut self, input: Arity, output: Arity) -> Self {
        self.in_arity = input;
        self.out_arity = output;
        self
    }
}

impl<F> Processor for FnProcessor<F>
where
    F: Fn(DataPacket, &mut RngStream) -> Result<DataPacket, ProcessError> + Send + Sync,
{
    fn name(&self) -> &str {
        &self.name
    }

    fn in_arity(&self) -> Arity {
        self.in_arity
    }

    fn out_arity(&self) -> Arity {
        self.out_arity
    }

    fn apply(&self, packet: DataPacket, rng: &mut RngStream) -> Result<DataPacket, ProcessError> {
        (self.f)(packet, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arity_compatibility() {
        assert!(Arity::Exact(2).compatible(Arity::Exact(2)));
        assert!(!Arity::Exact(2).compatible(Arity::Exact(1)));
        assert!(Arity::Variadic.compatible(Arity::Exact(1)));
        assert!(Arity::Exact(3).compatible(Arity::Variadic));
        assert_eq!(Arity::Variadic.to_string(), "*");
    }
}
