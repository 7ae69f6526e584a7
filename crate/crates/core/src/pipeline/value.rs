use crate::boxes::{BoxCorner, BoxError};
use crate::data::{serialize_message, Message};
use crate::geometry::Pose;
use crate::image::{ImageF32, ImageU8};
use crate::rng::Fnv1a64;

/// Normalized corner boxes with optional per-box class ids and scores.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BoxArray {
    boxes: Vec<BoxCorner>,
    class_ids: Option<Vec<u32>>,
    scores: Option<Vec<f64>>,
}

impl BoxArray {
    pub fn new(boxes: Vec<BoxCorner>, class_ids: Option<Vec<u32>>, scores: Option<Vec<f64>>) -> Result<Self, BoxError> {
        for extra in [class_ids.as_ref().map(Vec::len), scores.as_ref().map(Vec::len)]
            .into_iter()
            .flatten()
        {
            if extra != boxes.len() {
                return Err(BoxError::LengthMismatch {
                    left: boxes.len(),
                    right: extra,
                });
            }
        }
        Ok(Self {
            boxes,
            class_ids,
            scores,
        })
    }

    pub fn from_boxes(boxes: Vec<BoxCorner>) -> Self {
        Self {
            boxes,
            class_ids: None,
            scores: None,
        }
    }

    pub fn boxes(&self) -> &[BoxCorner] {
        &self.boxes
    }

    pub fn class_ids(&self) -> Option<&[u32]> {
        self.class_ids.as_deref()
    }

    pub fn scores(&self) -> Option<&[f64]> {
        self.scores.as_deref()
    }

    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> BoxArray {
        BoxArray {
            boxes: indices.iter().map(|&i| self.boxes[i]).collect(),
            class_ids: self.class_ids.as_ref().map(|c| indices.iter().map(|&i| c[i]).collect()),
            scores: self.scores.as_ref().map(|s| indices.iter().map(|&i| s[i]).collect()),
        }
    }

    pub fn with_boxes(&self, boxes: Vec<BoxCorner>) -> Result<BoxArray, BoxError> {
        BoxArray::new(boxes, self.class_ids.clone(), self.scores.clone())
    }
}

/// Dense row-major matrix of floats, e.g. per-anchor training targets.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Option<Self> {
        (data.len() == rows * cols).then_some(Self { rows, cols, data })
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
}

/// One tagged item flowing through a pipeline.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    ImageU8(ImageU8),
    ImageF32(ImageF32),
    Boxes(BoxArray),
    Keypoints2D(Vec<[f64; 2]>),
    Keypoints3D(Vec<[f64; 3]>),
    Pose(Pose),
    Scalar(f64),
    Text(String),
    Messages(Vec<Message>),
    Matrix(DenseMatrix),
}

impl Value {
    pub fn kind(&self) -> &'static str {
        match self {
            Value::ImageU8(_) => "ImageU8",
            Value::ImageF32(_) => "ImageF32",
            Value::Boxes(_) => "Boxes",
            Value::Keypoints2D(_) => "Keypoints2D",
            Value::Keypoints3D(_) => "Keypoints3D",
            Value::Pose(_) => "Pose",
            Value::Scalar(_) => "Scalar",
            Value::Text(_) => "Text",
            Value::Messages(_) => "Messages",
            Value::Matrix(_) => "Matrix",
        }
    }

    pub fn shape(&self) -> Vec<usize> {
        match self {
            Value::ImageU8(img) => vec![img.height() as usize, img.width() as usize, 3],
            Value::ImageF32(img) => vec![img.height() as usize, img.width() as usize, img.channels() as usize],
            Value::Boxes(b) => vec![b.len(), 4],
            Value::Keypoints2D(k) => vec![k.len(), 2],
            Value::Keypoints3D(k) => vec![k.len(), 3],
            Value::Pose(_) => vec![7],
            Value::Scalar(_) => vec![],
            Value::Text(t) => vec![t.len()],
            Value::Messages(m) => vec![m.len()],
            Value::Matrix(m) => vec![m.rows, m.cols],
        }
    }

    /// `Kind[d0,d1,...]`.
    pub fn signature(&self) -> String {
        let dims: Vec<String> = self.shape().iter().map(usize::to_string).collect();
        format!("{}[{}]", self.kind(), dims.join(","))
    }

    /// Feeds a canonical byte encoding into `hasher`: the kind, the shape,
    /// then the content with floats as little-endian bit patterns.
    pub fn hash_into(&self, hasher: &mut Fnv1a64) {
        hasher.write(self.kind().as_bytes());
        for d in self.shape() {
            hasher.write_u64(d as u64);
        }
        fn floats(hasher: &mut Fnv1a64, vs: impl Iterator<Item = f64>) {
            for v in vs {
                hasher.write_u64(v.to_bits());
            }
        }
        match self {
            Value::ImageU8(img) => hasher.write(img.data()),
            Value::ImageF32(img) => {
                for v in img.data() {
                    hasher.write(&v.to_bits().to_le_bytes());
                }
            }
            Value::Boxes(b) => {
                floats(hasher, b.boxes.iter().flat_map(|x| x.to_array()));
                hasher.write(&[u8::from(b.class_ids.is_some()), u8::from(b.scores.is_some())]);
                if let Some(ids) = &b.class_ids {
                    for &id in ids {
                        hasher.write(&id.to_le_bytes());
                    }
                }
                if let Some(s) = &b.scores {
                    for v in s {
                        hasher.write_u64(v.to_bits());
                    }
                }
            }
            Value::Keypoints2D(k) => floats(hasher, k.iter().flatten().copied()),
            Value::Keypoints3D(k) => floats(hasher, k.iter().flatten().copied()),
            Value::Pose(p) => floats(hasher, p.rotation.to_array().into_iter().chain(p.translation)),
            Value::Scalar(v) => hasher.write_u64(v.to_bits()),
            Value::Text(t) => hasher.write(t.as_bytes()),
            Value::Messages(ms) => {
                for m in ms {
                    hasher.write(serialize_message(m).as_bytes());
                    hasher.write(b"\n");
                }
            }
            Value::Matrix(m) => floats(hasher, m.data.iter().copied()),
        }
    }
}

/// Ordered values threaded positionally from one processor to the next.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DataPacket(pub Vec<Value>);

impl DataPacket {
    pub fn new(values: Vec<Value>) -> Self {
        Self(values)
    }

    pub fn single(value: Value) -> Self {
        Self(vec![value])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[Value] {
        &self.0
    }

    pub fn into_values(self) -> Vec<Value> {
        self.0
    }

    pub fn get(&self, index: usize) -> Option<&Value> {
        self.0.get(index)
    }

    pub fn signatures(&self) -> Vec<String> {
        self.0.iter().map(Value::signature).collect()
    }

    /// 64-bit FNV-1a content checksum.
    pub fn digest(&self) -> u64 {
        let mut h = Fnv1a64::default();
        h.write_u64(self.0.len() as u64);
        for v in &self.0 {
            v.hash_into(&mut h);
        }
        h.finish()
    }
}

impl From<Vec<Value>> for DataPacket {
    fn from(values: Vec<Value>) -> Self {
        Self(values)
    }
}
