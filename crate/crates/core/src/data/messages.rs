use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MessageError {
    #[error("unknown message type {0:?}")]
    UnknownMessageType(String),
    #[error("schema violation: {0}")]
    SchemaViolation(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Box2DMsg {
    pub class_name: String,
    pub score: f64,
    pub coordinates: [i64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pose6DMsg {
    pub class_name: String,
    /// `[w, x, y, z]`, unit norm, `w >= 0`.
    pub quaternion: [f64; 4],
    pub translation: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Keypoints3DMsg {
    pub class_name: String,
    pub points: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type")]
pub enum Message {
    Box2D(Box2DMsg),
    Pose6D(Pose6DMsg),
    Keypoints3D(Keypoints3DMsg),
}

impl Message {
    pub fn type_name(&self) -> &'static str {
        match self {
            Message::Box2D(_) => "Box2D",
            Message::Pose6D(_) => "Pose6D",
            Message::Keypoints3D(_) => "Keypoints3D",
        }
    }

    pub fn class_name(&self) -> &str {
        match self {
            Message::Box2D(m) => &m.class_name,
            Message::Pose6D(m) => &m.class_name,
            Message::Keypoints3D(m) => &m.class_name,
        }
    }

    pub fn validate(&self) -> Result<(), MessageError> {
        let bad = |s: String| Err(MessageError::SchemaViolation(s));
        match self {
            Message::Box2D(m) => {
                let [x0, y0, x1, y1] = m.coordinates;
                if !(0.0..=1.0).contains(&m.score) {
                    return bad(format!("score {} outside [0, 1]", m.score));
                }
                if x0 > x1 || y0 > y1 {
                    return bad(format!("coordinates {:?} are not ordered", m.coordinates));
                }
            }
            Message::Pose6D(m) => {
                let q = m.quaternion;
                if q.iter().chain(&m.translation).any(|v| !v.is_finite()) {
                    return bad("non-finite pose component".into());
                }
                let norm = q.iter().map(|v| v * v).sum::<f64>().sqrt();
                if (norm - 1.0).abs() > 1e-6 {
                    return bad(format!("quaternion norm {norm} is not 1"));
                }
                if q[0] < 0.0 {
                    return bad("quaternion is not canonical (w < 0)".into());
                }
            }
            Message::Keypoints3D(m) => {
                if m.points.iter().flatten().any(|v| !v.is_finite()) {
                    return bad("non-finite keypoint".into());
                }
            }
        }
        Ok(())
    }
}

/// One JSON object with `"type"` first, no trailing newline.
pub fn serialize_message(msg: &Message) -> String {
    serde_json::to_string(msg).expect("messages contain only finite numbers and strings")
}

pub fn parse_message(line: &str) -> Result<Message, MessageError> {
    let value: Json =
        serde_json::from_str(line).map_err(|e| MessageError::SchemaViolation(format!("invalid JSON: {e}")))?;
    let Json::Object(mut obj) = value else {
        return Err(MessageError::SchemaViolation("expected a JSON object".into()));
    };
    let type_name = match obj.remove("type") {
        Some(Json::String(s)) => s,
        Some(other) => {
            return Err(MessageError::SchemaViolation(format!(
                "field \"type\" must be a string, got {other}"
            )))
        }
        None => return Err(MessageError::SchemaViolation("missing field \"type\"".into())),
    };
    let rest = Json::Object(obj);
    let msg = match type_name.as_str() {
        "Box2D" => Message::Box2D(fields(rest)?),
        "Pose6D" => Message::Pose6D(fields(rest)?),
        "Keypoints3D" => Message::Keypoints3D(fields(rest)?),
        _ => return Err(MessageError::UnknownMessageType(type_name)),
    };
    msg.validate()?;
    Ok(msg)
}

fn fields<T: DeserializeOwned>(v: Json) -> Result<T, MessageError> {
    serde_json::from_value(v).map_err(|e| MessageError::SchemaViolation(e.to_string()))
}
