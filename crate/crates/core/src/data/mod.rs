//! Perception messages, dataset manifests and the batch dispatcher.

mod dispatch;
mod manifest;
mod messages;

pub use dispatch::{
    batch_sizes, batches, epoch_permutation, sample_rng, Batch, BatchError, BatchPlan, Batches, SampleSource,
};
pub use manifest::{load_manifest, DatasetManifest, ManifestError, ManifestSample};
pub use messages::{parse_message, serialize_message, Box2DMsg, Keypoints3DMsg, Message, MessageError, Pose6DMsg};
