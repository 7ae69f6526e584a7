//! Composable perception pipelines.
//!
//! Three layers: pure backend functions ([`boxes`], [`image`], [`geometry`]),
//! [`pipeline`] processors built on them, and ready-made flows such as
//! [`detection::postprocess`] and the [`data`] batch dispatcher.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boxes;
pub mod data;
pub mod detection;
pub mod geometry;
pub mod image;
pub mod pipeline;
pub mod rng;

pub use boxes::{BoxCenter, BoxCorner, BoxError, PixelBox};
pub use data::{Box2DMsg, Keypoints3DMsg, Message, Pose6DMsg};
pub use geometry::{CameraIntrinsics, GeometryError, Pose, Quaternion};
pub use image::{ImageError, ImageU8};
pub use pipeline::{DataPacket, Processor, SequentialProcessor, Value};
pub use rng::RngStream;
