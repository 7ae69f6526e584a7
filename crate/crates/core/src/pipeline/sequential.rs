use std::fmt::Write as _;
use std::sync::Arc;

use crate::rng::RngStream;

use super::{Arity, DataPacket, PipelineError, ProcessError, Processor};

/// A pipeline step: either a leaf processor or a nested pipeline.
#[derive(Clone)]
pub enum Step {
    Leaf(Arc<dyn Processor>),
    Nested(SequentialProcessor),
}

impl Step {
    pub fn leaf(p: impl Processor + 'static) -> Self {
        Step::Leaf(Arc::new(p))
    }

    pub fn name(&self) -> &str {
        match self {
            Step::Leaf(p) => p.name(),
            Step::Nested(s) => s.name(),
        }
    }

    pub fn in_arity(&self) -> Arity {
        match self {
            Step::Leaf(p) => p.in_arity(),
            Step::Nested(s) => Processor::in_arity(s),
        }
    }

    pub fn out_arity(&self) -> Arity {
        match self {
            Step::Leaf(p) => p.out_arity(),
            Step::Nested(s) => Processor::out_arity(s),
        }
    }

    /// Same underlying processors, compared by identity.
    pub fn same_as(&self, other: &Step) -> bool {
        match (self, other) {
            (Step::Leaf(a), Step::Leaf(b)) => Arc::ptr_eq(a, b),
            (Step::Nested(a), Step::Nested(b)) => a.same_steps(b),
            _ => false,
        }
    }
}

impl From<Arc<dyn Processor>> for Step {
    fn from(p: Arc<dyn Processor>) -> Self {
        Step::Leaf(p)
    }
}

impl From<SequentialProcessor> for Step {
    fn from(s: SequentialProcessor) -> Self {
        Step::Nested(s)
    }
}

/// Where [`SequentialProcessor::extend_with`] inserts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Position {
    At(usize),
    End,
}

/// Ordered composition of processors; itself a [`Processor`].
///
/// Pipelines are immutable: editing methods return a new pipeline. When
/// called, the steps are run in depth-first leaf order and leaf `i` (counted
/// over the flattened pipeline) receives `rng.fork("{i}:{name}")`, so a
/// nested pipeline and its flattened form behave identically and inserting a
/// step only perturbs the randomness of the steps after it.
#[derive(Clone)]
pub struct SequentialProcessor {
    name: String,
    steps: Vec<Step>,
}

impl SequentialProcessor {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            steps: Vec::new(),
        }
    }

    /// Builds a pipeline from steps, checking arity compatibility.
    pub fn from_steps(name: impl Into<String>, steps: Vec<Step>) -> Result<Self, PipelineError> {
        let p = Self {
            name: name.into(),
            steps,
        };
        p.check_arities()?;
        Ok(p)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a Arc<dyn Processor>>) {
        for step in &self.steps {
            match step {
                Step::Leaf(p) => out.push(p),
                Step::Nested(s) => s.collect_leaves(out),
            }
        }
    }

    /// Leaf processors in depth-first order.
    pub fn leaves(&self) -> Vec<&Arc<dyn Processor>> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn check_arities(&self) -> Result<(), PipelineError> {
        let leaves = self.leaves();
        for (i, pair) in leaves.windows(2).enumerate() {
            let (out, inp) = (pair[0].out_arity(), pair[1].in_arity());
            if !out.compatible(inp) {
                return Err(PipelineError::ArityMismatch {
                    index: i + 1,
                    name: pair[1].name().to_string(),
                    expected: out,
                    found: inp,
                });
            }
        }
        Ok(())
    }

    /// Inserts a step at `position`.
    pub fn extend_with(&self, step: impl Into<Step>, position: Position) -> Result<Self, PipelineError> {
        let index = match position {
            Position::End => self.steps.len(),
            Position::At(i) if i <= self.steps.len() => i,
            Position::At(i) => {
                return Err(PipelineError::IndexOutOfRange {
                    index: i,
                    len: self.steps.len(),
                })
            }
        };
        let mut steps = self.steps.clone();
        steps.insert(index, step.into());
        Self::from_steps(self.name.clone(), steps)
    }

    /// Appends a step.
    pub fn push(&self, step: impl Into<Step>) -> Result<Self, PipelineError> {
        self.extend_with(step, Position::End)
    }

    /// Removes the single top-level step called `name`.
    pub fn remove(&self, name: &str) -> Result<Self, PipelineError> {
        let hits: Vec<usize> = self
            .steps
            .iter()
            .enumerate()
            .filter(|(_, s)| s.name() == name)
            .map(|(i, _)| i)
            .collect();
        match hits.as_slice() {
            [] => Err(PipelineError::NameNotFound(name.to_string())),
            [i] => {
                let mut steps = self.steps.clone();
                steps.remove(*i);
                Self::from_steps(self.name.clone(), steps)
            }
            _ => Err(PipelineError::NameAmbiguous {
                name: name.to_string(),
                count: hits.len(),
            }),
        }
    }

    /// Steps of `self` followed by steps of `other`.
    pub fn concat(&self, other: &SequentialProcessor) -> Result<Self, PipelineError> {
        let mut steps = self.steps.clone();
        steps.extend(other.steps.iter().cloned());
        Self::from_steps(self.name.clone(), steps)
    }

    /// Same pipeline with every nested pipeline expanded in place.
    pub fn flatten(&self) -> Self {
        Self {
            name: self.name.clone(),
            steps: self.leaves().into_iter().cloned().map(Step::Leaf).collect(),
        }
    }

    /// Runs the pipeline. An empty pipeline returns the packet unchanged.
    pub fn call(&self, packet: DataPacket, rng: &RngStream) -> Result<DataPacket, PipelineError> {
        self.call_from(packet, rng, 0)
    }

    /// Runs the pipeline as if its first leaf sat at global index `start`.
    /// `P.concat(Q).call(x)` equals `Q.call_from(P.call(x), P.leaves().len())`.
    pub fn call_from(
        &self,
        mut packet: DataPacket,
        rng: &RngStream,
        start: usize,
    ) -> Result<DataPacket, PipelineError> {
        for (offset, leaf) in self.leaves().into_iter().enumerate() {
            let index = start + offset;
            let name = leaf.name();
            if !leaf.in_arity().accepts_len(packet.len()) {
                return Err(PipelineError::ArityMismatch {
                    index,
                    name: name.to_string(),
                    expected: leaf.in_arity(),
                    found: Arity::Exact(packet.len()),
                });
            }
            let mut step_rng = rng.fork(&format!("{index}:{name}"));
            packet = leaf
                .apply(packet, &mut step_rng)
                .map_err(|source| PipelineError::Step {
                    index,
                    name: name.to_string(),
                    source: Box::new(source),
                })?;
            if !leaf.out_arity().accepts_len(packet.len()) {
                return Err(PipelineError::ArityMismatch {
                    index,
                    name: name.to_string(),
                    expected: leaf.out_arity(),
                    found: Arity::Exact(packet.len()),
                });
            }
        }
        Ok(packet)
    }

    /// Header line plus one `index  name  in -> out` line per top-level step.
    pub fn describe(&self) -> String {
        let mut out = format!("{} ({} steps)\n", self.name, self.steps.len());
        for (i, step) in self.steps.iter().enumerate() {
            let _ = writeln!(
                out,
                "{i:>3}  {}  {} -> {}",
                step.name(),
                step.in_arity(),
                step.out_arity()
            );
        }
        out
    }

    /// Step-wise identity comparison.
    pub fn same_steps(&self, other: &SequentialProcessor) -> bool {
        self.steps.len() == other.steps.len() && self.steps.iter().zip(&other.steps).all(|(a, b)| a.same_as(b))
    }
}

impl Processor for SequentialProcessor {
    fn name(&self) -> &str {
        &self.name
    }

    fn in_arity(&self) -> Arity {
        self.leaves().first().map_or(Arity::Variadic, |p| p.in_arity())
    }

    fn out_arity(&self) -> Arity {
        self.leaves().last().map_or(Arity::Variadic, |p| p.out_arity())
    }

    fn apply(&self, packet: DataPacket, rng: &mut RngStream) -> Result<DataPacket, ProcessError> {
        Ok(self.call(packet, rng)?)
    }
}

impl std::fmt::Debug for SequentialProcessor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SequentialProcessor")
            .field("name", &self.name)
            .field("steps", &self.steps.iter().map(Step::name).collect::<Vec<_>>())
            .finish()
    }
}
