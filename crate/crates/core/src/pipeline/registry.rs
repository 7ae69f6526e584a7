use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Arc;

use serde_json::{Map, Value as Json};
use thiserror::Error;

use crate::boxes::{AnchorSet, BoxCenter, Variances};
use crate::image::{AugmentationConfig, Range};

use super::builtins::{
    BoxesToMessages, FilterByScore, MatchAnchors, NonMaximumSuppression, Normalize, Photometric, RandomFlipLeftRight,
    RandomPhotometric, Resize,
};
use super::Processor;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegistryError {
    #[error("unknown processor type {0:?}")]
    UnknownProcessorType(String),
    #[error("invalid parameter {param:?} for {processor}: {reason}")]
    InvalidParam {
        processor: String,
        param: String,
        reason: String,
    },
}

/// Typed access to a processor's JSON parameters. Every key must be read
/// before [`Params::finish`], otherwise it is reported as unknown.
pub struct Params<'a> {
    processor: &'a str,
    map: &'a Map<String, Json>,
    seen: BTreeSet<&'a str>,
}

impl<'a> Params<'a> {
    pub fn new(processor: &'a str, map: &'a Map<String, Json>) -> Self {
        Self {
            processor,
            map,
            seen: BTreeSet::new(),
        }
    }

    pub fn invalid(&self, param: &str, reason: impl Into<String>) -> RegistryError {
        RegistryError::InvalidParam {
            processor: self.processor.to_string(),
            param: param.to_string(),
            reason: reason.into(),
        }
    }

    fn get(&mut self, key: &'a str) -> Option<&'a Json> {
        self.seen.insert(key);
        self.map.get(key)
    }

    pub fn f64_or(&mut self, key: &'a str, default: f64) -> Result<f64, RegistryError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_f64()
                .filter(|x| x.is_finite())
                .ok_or_else(|| self.invalid(key, format!("expected a number, got {v}"))),
        }
    }

    pub fn u32_required(&mut self, key: &'a str) -> Result<u32, RegistryError> {
        match self.get(key) {
            None => Err(self.invalid(key, "required")),
            Some(v) => v
                .as_u64()
                .and_then(|x| u32::try_from(x).ok())
                .filter(|&x| x > 0)
                .ok_or_else(|| self.invalid(key, format!("expected a positive integer, got {v}"))),
        }
    }

    pub fn usize_or(&mut self, key: &'a str, default: usize) -> Result<usize, RegistryError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_u64()
                .map(|x| x as usize)
                .ok_or_else(|| self.invalid(key, format!("expected a non-negative integer, got {v}"))),
        }
    }

    pub fn json(&mut self, key: &'a str) -> Option<&'a Json> {
        self.get(key)
    }

    pub fn finish(self) -> Result<(), RegistryError> {
        if let Some(k) = self.map.keys().find(|k| !self.seen.contains(k.as_str())) {
            return Err(self.invalid(k, "unknown parameter"));
        }
        Ok(())
    }
}

pub type Factory = Box<dyn Fn(&Map<String, Json>) -> Result<Arc<dyn Processor>, RegistryError> + Send + Sync>;

/// Processor constructors by type name.
pub struct Registry {
    factories: BTreeMap<String, Factory>,
}

impl Default for Registry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl Registry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    /// Registry with every built-in processor.
    pub fn builtin() -> Self {
        let mut r = Self::empty();
        let defaults = AugmentationConfig::default();
        for (kind, range) in [
            (Photometric::Contrast, defaults.contrast),
            (Photometric::Brightness, defaults.brightness),
            (Photometric::Saturation, defaults.saturation),
            (Photometric::Hue, defaults.hue),
        ] {
            r.register(kind.processor_name(), move |m| photometric(kind, range, m));
        }
        r.register("RandomFlipLeftRight", |m| {
            let mut p = Params::new("RandomFlipLeftRight", m);
            let probability = p.f64_or("probability", 0.5)?;
            if !(0.0..=1.0).contains(&probability) {
                return Err(p.invalid("probability", "must lie in [0, 1]"));
            }
            p.finish()?;
            Ok(Arc::new(RandomFlipLeftRight { probability }))
        });
        r.register("Resize", |m| {
            let mut p = Params::new("Resize", m);
            let width = p.u32_required("width")?;
            let height = p.u32_required("height")?;
            p.finish()?;
            Ok(Arc::new(Resize { width, height }))
        });
        r.register("Normalize", |m| {
            Params::new("Normalize", m).finish()?;
            Ok(Arc::new(Normalize))
        });
        r.register("FilterByScore", |m| {
            let mut p = Params::new("FilterByScore", m);
            let threshold = p.f64_or("threshold", 0.45)?;
            p.finish()?;
            Ok(Arc::new(FilterByScore { threshold }))
        });
        r.register("NonMaximumSuppression", |m| {
            let mut p = Params::new("NonMaximumSuppression", m);
            let iou_threshold = p.f64_or("iou_threshold", 0.45)?;
            if !(0.0..=1.0).contains(&iou_threshold) {
                return Err(p.invalid("iou_threshold", "must lie in [0, 1]"));
            }
            let top_k = p.usize_or("top_k", 200)?;
            if top_k == 0 {
                return Err(p.invalid("top_k", "must be positive"));
            }
            p.finish()?;
            Ok(Arc::new(NonMaximumSuppression { iou_threshold, top_k }))
        });
        r.register("MatchAnchors", match_anchors);
        r.register("BoxesToMessages", |m| {
            let mut p = Params::new("BoxesToMessages", m);
            let width = p.u32_required("width")?;
            let height = p.u32_required("height")?;
            let class_names = match p.json("class_names") {
                None => Vec::new(),
                Some(v) => serde_json::from_value::<Vec<String>>(v.clone())
                    .map_err(|e| p.invalid("class_names", e.to_string()))?,
            };
            p.finish()?;
            Ok(Arc::new(BoxesToMessages {
                width,
                height,
                class_names,
            }))
        });
        r
    }

    pub fn register<F>(&mut self, type_name: &str, factory: F)
    where
        F: Fn(&Map<String, Json>) -> Result<Arc<dyn Processor>, RegistryError> + Send + Sync + 'static,
    {
        self.factories.insert(type_name.to_string(), Box::new(factory));
    }

    pub fn type_names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    pub fn instantiate(
        &self,
        type_name: &str,
        params: &Map<String, Json>,
    ) -> Result<Arc<dyn Processor>, RegistryError> {
        let factory = self
            .factories
            .get(type_name)
            .ok_or_else(|| RegistryError::UnknownProcessorType(type_name.to_string()))?;
        factory(params)
    }
}

/// Instantiates a built-in processor by type name.
pub fn registry_instantiate(type_name: &str, params: &Map<String, Json>) -> Result<Arc<dyn Processor>, RegistryError> {
    Registry::builtin().instantiate(type_name, params)
}

fn photometric(kind: Photometric, default: Range, m: &Map<String, Json>) -> Result<Arc<dyn Processor>, RegistryError> {
    let mut p = Params::new(kind.processor_name(), m);
    let range = Range::new(
        p.f64_or("lower", default.lower)?,
        p.f64_or("upper", default.upper)?,
        p.f64_or("probability", default.probability)?,
    );
    if let Err(reason) = range.validate() {
        let param = if range.lower > range.upper {
            "lower"
        } else {
            "probability"
        };
        return Err(p.invalid(param, reason));
    }
    if matches!(kind, Photometric::Contrast | Photometric::Saturation) && range.lower < 0.0 {
        return Err(p.invalid("lower", "scaling factors must be non-negative"));
    }
    p.finish()?;
    Ok(Arc::new(RandomPhotometric { kind, range }))
}

fn match_anchors(m: &Map<String, Json>) -> Result<Arc<dyn Processor>, RegistryError> {
    let mut p = Params::new("MatchAnchors", m);
    let positive_iou = p.f64_or("positive_iou", 0.5)?;
    let inline = p.json("anchors");
    let file = p.json("anchors_file");
    let variances = match p.json("variances") {
        None => Variances::default(),
        Some(v) => {
            let [center, size] =
                serde_json::from_value::<[f64; 2]>(v.clone()).map_err(|e| p.invalid("variances", e.to_string()))?;
            Variances { center, size }
        }
    };
    let anchors = match (inline, file) {
        (Some(a), None) => {
            let rows =
                serde_json::from_value::<Vec<[f64; 4]>>(a.clone()).map_err(|e| p.invalid("anchors", e.to_string()))?;
            AnchorSet::new(
                rows.into_iter()
                    .map(|[cx, cy, w, h]| BoxCenter::new(cx, cy, w, h))
                    .collect(),
                variances,
            )
            .map_err(|e| p.invalid("anchors", e.to_string()))?
        }
        (None, Some(f)) => {
            let path = f
                .as_str()
                .ok_or_else(|| p.invalid("anchors_file", "expected a path string"))?;
            AnchorSet::load(Path::new(path)).map_err(|e| p.invalid("anchors_file", e.to_string()))?
        }
        _ => return Err(p.invalid("anchors", "exactly one of anchors or anchors_file is required")),
    };
    p.finish()?;
    Ok(Arc::new(MatchAnchors { anchors, positive_iou }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn obj(v: Json) -> Map<String, Json> {
        v.as_object().unwrap().clone()
    }

    #[test]
    fn contrast_from_params() {
        let p = registry_instantiate("RandomContrast", &obj(json!({"lower": 0.5, "upper": 1.5}))).unwrap();
        assert_eq!(p.name(), "RandomContrast");
    }

    #[test]
    fn unknown_type() {
        assert_eq!(
            registry_instantiate("NoSuch", &Map::new()).err(),
            Some(RegistryError::UnknownProcessorType("NoSuch".into()))
        );
    }

    #[test]
    fn invalid_params() {
        let e = registry_instantiate("RandomContrast", &obj(json!({"lower": 2.0, "upper": 1.0})))
            .err()
            .unwrap();
        assert!(matches!(e, RegistryError::InvalidParam { ref param, .. } if param == "lower"));
        let e = registry_instantiate("RandomHue", &obj(json!({"speed": 2.0})))
            .err()
            .unwrap();
        assert!(matches!(e, RegistryError::InvalidParam { ref param, .. } if param == "speed"));
        let e = registry_instantiate("Resize", &obj(json!({"width": "big", "height": 2})))
            .err()
            .unwrap();
        assert!(matches!(e, RegistryError::InvalidParam { ref param, .. } if param == "width"));
        assert!(registry_instantiate("Resize", &obj(json!({"width": 0, "height": 2}))).is_err());
        assert!(registry_instantiate("RandomBrightness", &obj(json!({"probability": 2.0}))).is_err());
        assert!(registry_instantiate("MatchAnchors", &Map::new()).is_err());
    }

    #[test]
    fn all_builtins_construct_with_defaults() {
        let r = Registry::builtin();
        let needs_params = ["Resize", "BoxesToMessages", "MatchAnchors"];
        for name in r.type_names() {
            if !needs_params.contains(&name) {
                assert_eq!(r.instantiate(name, &Map::new()).unwrap().name(), name);
            }
        }
        let m = r
            .instantiate(
                "MatchAnchors",
                &obj(json!({"anchors": [[0.5, 0.5, 0.2, 0.2]], "variances": [0.1, 0.2]})),
            )
            .unwrap();
        assert_eq!(m.name(), "MatchAnchors");
    }
}
