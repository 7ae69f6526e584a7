use crate::boxes::{denormalize, flip_boxes_horizontal, match_to_anchors, nms, nms_per_class, AnchorSet};
use crate::data::{Box2DMsg, Message};
use crate::image::{
    adjust_brightness, adjust_contrast, adjust_hue, adjust_saturation, flip_left_right, normalize, resize_bilinear,
    ImageU8, Range,
};
use crate::rng::RngStream;

use super::{Arity, BoxArray, DataPacket, DenseMatrix, ProcessError, Processor, Value};

fn type_error(position: usize, expected: &'static str, found: &Value) -> ProcessError {
    ProcessError::TypeMismatch {
        position,
        expected,
        found: found.kind(),
    }
}

/// Applies `f` to every 8-bit image in the packet; float images are an error.
fn map_u8_images(packet: DataPacket, mut f: impl FnMut(&ImageU8) -> ImageU8) -> Result<DataPacket, ProcessError> {
    packet
        .into_values()
        .into_iter()
        .enumerate()
        .map(|(i, v)| match v {
            Value::ImageU8(img) => Ok(Value::ImageU8(f(&img))),
            Value::ImageF32(_) => Err(type_error(i, "ImageU8", &v)),
            other => Ok(other),
        })
        .collect::<Result<Vec<_>, _>>()
        .map(DataPacket::new)
}

fn single_boxes(packet: DataPacket) -> Result<BoxArray, ProcessError> {
    match packet.into_values().into_iter().next() {
        Some(Value::Boxes(b)) => Ok(b),
        Some(other) => Err(type_error(0, "Boxes", &other)),
        None => Err(ProcessError::Other("empty packet".into())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Photometric {
    Contrast,
    Brightness,
    Saturation,
    Hue,
}

impl Photometric {
    pub fn processor_name(self) -> &'static str {
        match self {
            Photometric::Contrast => "RandomContrast",
            Photometric::Brightness => "RandomBrightness",
            Photometric::Saturation => "RandomSaturation",
            Photometric::Hue => "RandomHue",
        }
    }

    pub fn adjust(self, image: &ImageU8, value: f64) -> ImageU8 {
        match self {
            Photometric::Contrast => adjust_contrast(image, value),
            Photometric::Brightness => adjust_brightness(image, value),
            Photometric::Saturation => adjust_saturation(image, value),
            Photometric::Hue => adjust_hue(image, value),
        }
    }
}

/// Samples `(apply, value)` from its range once per call and adjusts every
/// 8-bit image in the packet with the same value.
#[derive(Debug, Clone)]
pub struct RandomPhotometric {
    pub kind: Photometric,
    pub range: Range,
}

impl Processor for RandomPhotometric {
    fn name(&self) -> &str {
        self.kind.processor_name()
    }

    fn apply(&self, packet: DataPacket, rng: &mut RngStream) -> Result<DataPacket, ProcessError> {
        let s = self.range.sample(rng);
        if !s.apply {
            return map_u8_images(packet, Clone::clone);
        }
        map_u8_images(packet, |img| self.kind.adjust(img, s.value))
    }
}

/// Mirrors images, boxes and normalized 2D keypoints together.
#[derive(Debug, Clone)]
pub struct RandomFlipLeftRight {
    pub probability: f64,
}

impl Processor for RandomFlipLeftRight {
    fn name(&self) -> &str {
        "RandomFlipLeftRight"
    }

    fn apply(&self, packet: DataPacket, rng: &mut RngStream) -> Result<DataPacket, ProcessError> {
        if !rng.bernoulli(self.probability) {
            return Ok(packet);
        }
        packet
            .into_values()
            .into_iter()
            .map(|v| {
                Ok(match v {
                    Value::ImageU8(img) => Value::ImageU8(flip_left_right(&img)),
                    Value::Boxes(b) => Value::Boxes(b.with_boxes(flip_boxes_horizontal(b.boxes()))?),
                    Value::Keypoints2D(k) => Value::Keypoints2D(k.into_iter().map(|[x, y]| [1.0 - x, y]).collect()),
                    other => other,
                })
            })
            .collect::<Result<Vec<_>, ProcessError>>()
            .map(DataPacket::new)
    }
}

#[derive(Debug, Clone)]
pub struct Resize {
    pub width: u32,
    pub height: u32,
}

impl Processor for Resize {
    fn name(&self) -> &str {
        "Resize"
    }

    fn apply(&self, packet: DataPacket, _rng: &mut RngStream) -> Result<DataPacket, ProcessError> {
        map_u8_images(packet, |img| resize_bilinear(img, self.width, self.height))
    }
}

/// Converts 8-bit images to floats in `[0, 1]`.
#[derive(Debug, Clone)]
pub struct Normalize;

impl Processor for Normalize {
    fn name(&self) -> &str {
        "Normalize"
    }

    fn apply(&self, packet: DataPacket, _rng: &mut RngStream) -> Result<DataPacket, ProcessError> {
        Ok(DataPacket::new(
            packet
                .into_values()
                .into_iter()
                .map(|v| match v {
                    Value::ImageU8(img) => Value::ImageF32(normalize(&img)),
                    other => other,
                })
                .collect(),
        ))
    }
}

/// Keeps boxes whose score is strictly above `threshold`.
#[derive(Debug, Clone)]
pub struct FilterByScore {
    pub threshold: f64,
}

impl Processor for FilterByScore {
    fn name(&self) -> &str {
        "FilterByScore"
    }

    fn in_arity(&self) -> Arity {
        Arity::Exact(1)
    }

    fn out_arity(&self) -> Arity {
        Arity::Exact(1)
    }

    fn apply(&self, packet: DataPacket, _rng: &mut RngStream) -> Result<DataPacket, ProcessError> {
        let boxes = single_boxes(packet)?;
        let scores = boxes
            .scores()
            .ok_or_else(|| ProcessError::Other("boxes carry no scores".into()))?;
        let keep: Vec<usize> = (0..boxes.len()).filter(|&i| scores[i] > self.threshold).collect();
        Ok(DataPacket::single(Value::Boxes(boxes.select(&keep))))
    }
}

/// Greedy suppression; class-wise when the boxes carry class ids.
#[derive(Debug, Clone)]
pub struct NonMaximumSuppression {
    pub iou_threshold: f64,
    pub top_k: usize,
}

impl Processor for NonMaximumSuppression {
    fn name(&self) -> &str {
        "NonMaximumSuppression"
    }

    fn in_arity(&self) -> Arity {
        Arity::Exact(1)
    }

    fn out_arity(&self) -> Arity {
        Arity::Exact(1)
    }

    fn apply(&self, packet: DataPacket, _rng: &mut RngStream) -> Result<DataPacket, ProcessError> {
        let boxes = single_boxes(packet)?;
        let scores = boxes
            .scores()
            .ok_or_else(|| ProcessError::Other("boxes carry no scores".into()))?;
        let keep = match boxes.class_ids() {
            Some(labels) => nms_per_class(boxes.boxes(), scores, labels, self.iou_threshold, self.top_k)?,
            None => nms(boxes.boxes(), scores, self.iou_threshold, self.top_k)?,
        };
        Ok(DataPacket::single(Value::Boxes(boxes.select(&keep))))
    }
}

/// Replaces each box array with an `anchors x 5` target matrix: four
/// encoded offsets then the label (0 for background). Boxes without class
/// ids are labelled 1.
#[derive(Debug, Clone)]
pub struct MatchAnchors {
    pub anchors: AnchorSet,
    pub positive_iou: f64,
}

impl Processor for MatchAnchors {
    fn name(&self) -> &str {
        "MatchAnchors"
    }

    fn apply(&self, packet: DataPacket, _rng: &mut RngStream) -> Result<DataPacket, ProcessError> {
        packet
            .into_values()
            .into_iter()
            .map(|v| match v {
                Value::Boxes(b) => {
                    let labels = b.class_ids().map(<[u32]>::to_vec).unwrap_or_else(|| vec![1; b.len()]);
                    let m = match_to_anchors(b.boxes(), &labels, &self.anchors, self.positive_iou)?;
                    let mut data = Vec::with_capacity(self.anchors.len() * 5);
                    for (o, &l) in m.offsets.iter().zip(&m.labels) {
                        data.extend_from_slice(o);
                        data.push(f64::from(l));
                    }
                    let rows = self.anchors.len();
                    Ok(Value::Matrix(
                        DenseMatrix::new(rows, 5, data).expect("rows * 5 entries"),
                    ))
                }
                other => Ok(other),
            })
            .collect::<Result<Vec<_>, ProcessError>>()
            .map(DataPacket::new)
    }
}

/// Converts scored, labelled boxes into pixel-space Box2D messages sorted by
/// descending score, then class name.
#[derive(Debug, Clone)]
pub struct BoxesToMessages {
    pub width: u32,
    pub height: u32,
    pub class_names: Vec<String>,
}

impl BoxesToMessages {
    fn class_name(&self, id: u32) -> String {
        self.class_names
            .get(id as usize)
            .cloned()
            .unwrap_or_else(|| id.to_string())
    }
}

impl Processor for BoxesToMessages {
    fn name(&self) -> &str {
        "BoxesToMessages"
    }

    fn in_arity(&self) -> Arity {
        Arity::Exact(1)
    }

    fn out_arity(&self) -> Arity {
        Arity::Exact(1)
    }

    fn apply(&self, packet: DataPacket, _rng: &mut RngStream) -> Result<DataPacket, ProcessError> {
        let boxes = single_boxes(packet)?;
        let pixels = denormalize(boxes.boxes(), self.width, self.height);
        let mut msgs: Vec<Box2DMsg> = pixels
            .iter()
            .enumerate()
            .map(|(i, px)| {
                let id = boxes.class_ids().map_or(0, |c| c[i]);
                let score = boxes.scores().map_or(1.0, |s| s[i]);
                Box2DMsg {
                    class_name: self.class_name(id),
                    score,
                    coordinates: px.to_array(),
                }
            })
            .collect();
        msgs.sort_by(|a, b| {
            b.score
                .total_cmp(&a.score)
                .then_with(|| a.class_name.cmp(&b.class_name))
        });
        Ok(DataPacket::single(Value::Messages(
            msgs.into_iter().map(Message::Box2D).collect(),
        )))
    }
}
