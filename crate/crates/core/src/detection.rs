//! Detector post-processing over raw per-anchor predictions.

use thiserror::Error;

use crate::boxes::{decode, AnchorSet, BoxCorner};
use crate::data::{Box2DMsg, Message};
use crate::pipeline::{
    BoxArray, BoxesToMessages, DataPacket, FilterByScore, NonMaximumSuppression, PipelineError, SequentialProcessor,
    Step, Value,
};
use crate::rng::RngStream;

#[derive(Debug, Error)]
pub enum DetectionError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("row {row}, column {col}: score {value} outside [0, 1]")]
    InvalidScore { row: usize, col: usize, value: f64 },
    #[error("row {row}, column {col}: non-finite offset")]
    InvalidOffset { row: usize, col: usize },
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PostprocessParams {
    pub iou_threshold: f64,
    pub score_threshold: f64,
    pub top_k: usize,
    pub width: u32,
    pub height: u32,
}

impl Default for PostprocessParams {
    fn default() -> Self {
        Self {
            iou_threshold: 0.45,
            score_threshold: 0.45,
            top_k: 200,
            width: 1,
            height: 1,
        }
    }
}

/// `FilterByScore -> NonMaximumSuppression -> BoxesToMessages`.
pub fn postprocess_pipeline(params: &PostprocessParams, class_names: &[String]) -> SequentialProcessor {
    SequentialProcessor::from_steps(
        "postprocess",
        vec![
            Step::leaf(FilterByScore {
                threshold: params.score_threshold,
            }),
            Step::leaf(NonMaximumSuppression {
                iou_threshold: params.iou_threshold,
                top_k: params.top_k,
            }),
            Step::leaf(BoxesToMessages {
                width: params.width,
                height: params.height,
                class_names: class_names.to_vec(),
            }),
        ],
    )
    .expect("single-value steps chain")
}

/// Decodes every anchor and expands it into one candidate per foreground
/// class (column 0 of the class scores is background).
pub fn candidates(rows: &[Vec<f64>], anchors: &AnchorSet) -> Result<BoxArray, DetectionError> {
    if rows.len() != anchors.len() {
        return Err(DetectionError::ShapeMismatch(format!(
            "{} score rows for {} anchors",
            rows.len(),
            anchors.len()
        )));
    }
    let width = rows.first().map_or(5, Vec::len);
    if width < 5 {
        return Err(DetectionError::ShapeMismatch(format!(
            "rows need 4 offsets and at least one class score, got {width} columns"
        )));
    }
    let mut offsets = Vec::with_capacity(rows.len());
    for (row, r) in rows.iter().enumerate() {
        if r.len() != width {
            return Err(DetectionError::ShapeMismatch(format!(
                "row {row} has {} columns, row 0 has {width}",
                r.len()
            )));
        }
        if let Some(col) = r[..4].iter().position(|v| !v.is_finite()) {
            return Err(DetectionError::InvalidOffset { row, col });
        }
        if let Some(col) = (4..width).find(|&c| !(0.0..=1.0).contains(&r[c])) {
            return Err(DetectionError::InvalidScore {
                row,
                col,
                value: r[col],
            });
        }
        offsets.push([r[0], r[1], r[2], r[3]]);
    }
    let decoded = decode(&offsets, anchors).expect("offset count equals anchor count");

    let mut boxes: Vec<BoxCorner> = Vec::new();
    let mut ids = Vec::new();
    let mut scores = Vec::new();
    for (r, b) in rows.iter().zip(&decoded) {
        for (c, &s) in r.iter().enumerate().skip(5) {
            boxes.push(*b);
            ids.push((c - 4) as u32);
            scores.push(s);
        }
    }
    Ok(BoxArray::new(boxes, Some(ids), Some(scores)).expect("equal lengths"))
}

/// Raw predictions to Box2D messages, sorted by descending score then class
/// name. `class_names` is index-ordered with background at 0.
pub fn postprocess(
    rows: &[Vec<f64>],
    anchors: &AnchorSet,
    class_names: &[String],
    params: &PostprocessParams,
) -> Result<Vec<Box2DMsg>, DetectionError> {
    let cands = candidates(rows, anchors)?;
    let num_classes = rows.first().map_or(0, |r| r.len() - 4);
    if !rows.is_empty() && class_names.len() != num_classes {
        return Err(DetectionError::ShapeMismatch(format!(
            "{} class names for {num_classes} score columns",
            class_names.len()
        )));
    }
    let out =
        postprocess_pipeline(params, class_names).call(DataPacket::single(Value::Boxes(cands)), &RngStream::new(0))?;
    let Some(Value::Messages(msgs)) = out.into_values().into_iter().next() else {
        unreachable!("BoxesToMessages emits one message list")
    };
    Ok(msgs
        .into_iter()
        .map(|m| match m {
            Message::Box2D(b) => b,
            _ => unreachable!("BoxesToMessages emits Box2D only"),
        })
        .collect())
}
