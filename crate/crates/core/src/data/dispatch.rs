use rayon::prelude::*;
use thiserror::Error;

use crate::boxes::BoxError;
use crate::image::load_image;
use crate::pipeline::{BoxArray, DataPacket, PipelineError, SequentialProcessor, Value};
use crate::rng::{Fnv1a64, RngStream};

use super::DatasetManifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchPlan {
    pub seed: u64,
    pub batch_size: usize,
    pub drop_last: bool,
    pub epoch: u64,
}

#[derive(Debug, Error)]
pub enum BatchError {
    #[error("batch size must be at least 1")]
    ZeroBatchSize,
    #[error("sample {sample}: cannot load: {reason}")]
    Load { sample: usize, reason: String },
    #[error("sample {sample}: {source}")]
    Pipeline {
        sample: usize,
        #[source]
        source: PipelineError,
    },
    #[error("sample {sample} produced {found:?} but the batch started with {expected:?}")]
    ShapeMismatch {
        sample: usize,
        expected: Vec<String>,
        found: Vec<String>,
    },
}

/// Anything that can produce the input packet of sample `index`.
pub trait SampleSource: Sync {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn load(&self, index: usize) -> Result<DataPacket, String>;
}

impl SampleSource for DatasetManifest {
    fn len(&self) -> usize {
        self.samples.len()
    }

    /// `[ImageU8, Boxes]`, boxes carrying the class ids.
    fn load(&self, index: usize) -> Result<DataPacket, String> {
        let s = &self.samples[index];
        let image = load_image(&s.image_path).map_err(|e| e.to_string())?;
        let boxes =
            BoxArray::new(s.boxes.clone(), Some(s.labels.clone()), None).map_err(|e: BoxError| e.to_string())?;
        Ok(DataPacket::new(vec![Value::ImageU8(image), Value::Boxes(boxes)]))
    }
}

impl SampleSource for [DataPacket] {
    fn len(&self) -> usize {
        <[DataPacket]>::len(self)
    }

    fn load(&self, index: usize) -> Result<DataPacket, String> {
        Ok(self[index].clone())
    }
}

impl SampleSource for Vec<DataPacket> {
    fn len(&self) -> usize {
        self.as_slice().len()
    }

    fn load(&self, index: usize) -> Result<DataPacket, String> {
        self.as_slice().load(index)
    }
}

/// Seeded Fisher–Yates shuffle of `0..n` for one epoch.
pub fn epoch_permutation(seed: u64, epoch: u64, n: usize) -> Vec<usize> {
    let mut rng = epoch_rng(seed, epoch).fork("permutation");
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.below(i as u64 + 1) as usize;
        perm.swap(i, j);
    }
    perm
}

fn epoch_rng(seed: u64, epoch: u64) -> RngStream {
    RngStream::new(seed).fork(&format!("epoch:{epoch}"))
}

/// The stream a sample is processed with. Depends only on seed, epoch and
/// the sample's dataset index.
pub fn sample_rng(seed: u64, epoch: u64, sample: usize) -> RngStream {
    epoch_rng(seed, epoch).fork(&format!("sample:{sample}"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub epoch: u64,
    pub index: usize,
    pub sample_indices: Vec<usize>,
    pub outputs: Vec<DataPacket>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.sample_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sample_indices.is_empty()
    }

    /// Signatures of the (uniform) per-sample outputs.
    pub fn shapes(&self) -> Vec<String> {
        self.outputs.first().map(DataPacket::signatures).unwrap_or_default()
    }

    pub fn sample_checksums(&self) -> Vec<u64> {
        self.outputs.iter().map(DataPacket::digest).collect()
    }

    /// FNV-1a over the sample indices and per-sample digests, in batch order.
    pub fn checksum(&self) -> u64 {
        let mut h = Fnv1a64::default();
        for (&i, d) in self.sample_indices.iter().zip(self.sample_checksums()) {
            h.write_u64(i as u64);
            h.write_u64(d);
        }
        h.finish()
    }
}

/// Batch sizes for `n` samples.
pub fn batch_sizes(n: usize, batch_size: usize, drop_last: bool) -> Vec<usize> {
    if batch_size == 0 {
        return Vec::new();
    }
    let mut sizes = vec![batch_size; n / batch_size];
    if !n.is_multiple_of(batch_size) && !drop_last {
        sizes.push(n % batch_size);
    }
    sizes
}

/// Ordered batch stream for one epoch. Samples inside a batch are processed
/// in parallel; the results do not depend on the thread count.
pub struct Batches<'a, S: SampleSource + ?Sized> {
    source: &'a S,
    pipeline: &'a SequentialProcessor,
    plan: BatchPlan,
    order: Vec<usize>,
    next_batch: usize,
    num_batches: usize,
    failed: bool,
}

pub fn batches<'a, S: SampleSource + ?Sized>(
    source: &'a S,
    pipeline: &'a SequentialProcessor,
    plan: BatchPlan,
) -> Result<Batches<'a, S>, BatchError> {
    if plan.batch_size == 0 {
        return Err(BatchError::ZeroBatchSize);
    }
    let n = source.len();
    Ok(Batches {
        source,
        pipeline,
        plan,
        order: epoch_permutation(plan.seed, plan.epoch, n),
        next_batch: 0,
        num_batches: batch_sizes(n, plan.batch_size, plan.drop_last).len(),
        failed: false,
    })
}

impl<S: SampleSource + ?Sized> Batches<'_, S> {
    fn process(&self, sample: usize) -> Result<DataPacket, BatchError> {
        let packet = self
            .source
            .load(sample)
            .map_err(|reason| BatchError::Load { sample, reason })?;
        self.pipeline
            .call(packet, &sample_rng(self.plan.seed, self.plan.epoch, sample))
            .map_err(|source| BatchError::Pipeline { sample, source })
    }

    fn build(&self, index: usize) -> Result<Batch, BatchError> {
        let start = index * self.plan.batch_size;
        let end = (start + self.plan.batch_size).min(self.order.len());
        let sample_indices = self.order[start..end].to_vec();
        let outputs = sample_indices
            .par_iter()
            .map(|&s| self.process(s))
            .collect::<Vec<_>>()
            .into_iter()
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(first) = outputs.first() {
            let expected = first.signatures();
            for (&sample, out) in sample_indices.iter().zip(&outputs).skip(1) {
                let found = out.signatures();
                if found != expected {
                    return Err(BatchError::ShapeMismatch {
                        sample,
                        expected,
                        found,
                    });
                }
            }
        }
        Ok(Batch {
            epoch: self.plan.epoch,
            index,
            sample_indices,
            outputs,
        })
    }
}

impl<S: SampleSource + ?Sized> Iterator for Batches<'_, S> {
    type Item = Result<Batch, BatchError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed || self.next_batch >= self.num_batches {
            return None;
        }
        let result = self.build(self.next_batch);
        self.next_batch += 1;
        self.failed = result.is_err();
        Some(result)
    }
}
