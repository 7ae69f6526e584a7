use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{compute_ious, BoxCenter, BoxCorner, BoxError};

/// Scaling constants used inside the offset encoding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Variances {
    pub center: f64,
    pub size: f64,
}

impl Default for Variances {
    fn default() -> Self {
        Self { center: 0.1, size: 0.2 }
    }
}

/// Prior boxes in center form plus their variances.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorSet {
    anchors: Vec<BoxCenter>,
    variances: Variances,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnchorFile {
    #[serde(default = "default_variances")]
    variances: [f64; 2],
    anchors: Vec<[f64; 4]>,
}

fn default_variances() -> [f64; 2] {
    [0.1, 0.2]
}

impl AnchorSet {
    pub fn new(anchors: Vec<BoxCenter>, variances: Variances) -> Result<Self, BoxError> {
        if anchors.is_empty() {
            return Err(BoxError::InvalidAnchors("no anchors".into()));
        }
        if !(variances.center > 0.0 && variances.size > 0.0) {
            return Err(BoxError::InvalidAnchors(format!(
                "variances must be positive, got ({}, {})",
                variances.center, variances.size
            )));
        }
        if let Some(i) = anchors
            .iter()
            .position(|a| !(a.w > 0.0 && a.h > 0.0 && a.cx.is_finite() && a.cy.is_finite()))
        {
            return Err(BoxError::InvalidAnchors(format!(
                "anchor {i} has non-positive size or non-finite center"
            )));
        }
        Ok(Self { anchors, variances })
    }

    pub fn from_json_str(text: &str) -> Result<Self, BoxError> {
        let file: AnchorFile = serde_json::from_str(text).map_err(|e| BoxError::InvalidAnchors(e.to_string()))?;
        let anchors = file
            .anchors
            .into_iter()
            .map(|[cx, cy, w, h]| BoxCenter::new(cx, cy, w, h))
            .collect();
        let variances = Variances {
            center: file.variances[0],
            size: file.variances[1],
        };
        Self::new(anchors, variances)
    }

    pub fn load(path: &Path) -> Result<Self, BoxError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| BoxError::InvalidAnchors(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        let file = AnchorFile {
            variances: [self.variances.center, self.variances.size],
            anchors: self.anchors.iter().map(|a| a.to_array()).collect(),
        };
        serde_json::to_string(&file).expect("anchor file serializes")
    }

    pub fn anchors(&self) -> &[BoxCenter] {
        &self.anchors
    }

    pub fn variances(&self) -> Variances {
        self.variances
    }

    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    pub fn corners(&self) -> Vec<BoxCorner> {
        self.anchors.iter().map(BoxCenter::to_corner).collect()
    }
}

/// Regular grid of anchors: one cell center per feature-map location, one
/// box per `(size, aspect_ratio)` pair at each location.
pub fn grid_anchors(
    feature_map_sizes: &[usize],
    sizes: &[f64],
    aspect_ratios: &[f64],
    variances: Variances,
) -> Result<AnchorSet, BoxError> {
    let mut anchors = Vec::new();
    for (level, &fm) in feature_map_sizes.iter().enumerate() {
        let size = sizes.get(level).copied().unwrap_or(0.0);
        for row in 0..fm {
            for col in 0..fm {
                let cx = (col as f64 + 0.5) / fm as f64;
                let cy = (row as f64 + 0.5) / fm as f64;
                for &ratio in aspect_ratios {
                    let r = ratio.sqrt();
                    anchors.push(BoxCenter::new(cx, cy, size * r, size / r));
                }
            }
        }
    }
    AnchorSet::new(anchors, variances)
}

/// Offsets of `gt` relative to `anchor`.
pub fn encode(gt: &BoxCenter, anchor: &BoxCenter, variances: Variances) -> Result<[f64; 4], BoxError> {
    if !(gt.w > 0.0 && gt.h > 0.0) {
        return Err(BoxError::DegenerateBox {
            width: gt.w,
            height: gt.h,
        });
    }
    if !(anchor.w > 0.0 && anchor.h > 0.0) {
        return Err(BoxError::DegenerateBox {
            width: anchor.w,
            height: anchor.h,
        });
    }
    Ok([
        (gt.cx - anchor.cx) / (anchor.w * variances.center),
        (gt.cy - anchor.cy) / (anchor.h * variances.center),
        (gt.w / anchor.w).ln() / variances.size,
        (gt.h / anchor.h).ln() / variances.size,
    ])
}

/// Inverse of [`encode`] without any clipping.
pub fn decode_unclipped(offsets: &[[f64; 4]], anchors: &AnchorSet) -> Result<Vec<BoxCenter>, BoxError> {
    if offsets.len() != anchors.len() {
        return Err(BoxError::LengthMismatch {
            left: offsets.len(),
            right: anchors.len(),
        });
    }
    let v = anchors.variances;
    Ok(offsets
        .iter()
        .zip(&anchors.anchors)
        .map(|(o, a)| BoxCenter {
            cx: a.cx + o[0] * a.w * v.center,
            cy: a.cy + o[1] * a.h * v.center,
            w: a.w * (o[2] * v.size).exp(),
            h: a.h * (o[3] * v.size).exp(),
        })
        .collect())
}

fn clip_unit(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, 1.0)
    }
}

/// Decodes offsets against their anchors and clips to the unit square.
pub fn decode(offsets: &[[f64; 4]], anchors: &AnchorSet) -> Result<Vec<BoxCorner>, BoxError> {
    const LIMIT: f64 = f64::MAX / 4.0;
    Ok(decode_unclipped(offsets, anchors)?
        .into_iter()
        .map(|c| {
            // Keep the center finite so `center -/+ inf` cannot produce NaN.
            let cx = c.cx.clamp(-LIMIT, LIMIT);
            let cy = c.cy.clamp(-LIMIT, LIMIT);
            let hw = c.w / 2.0;
            let hh = c.h / 2.0;
            BoxCorner {
                x_min: clip_unit(cx - hw),
                y_min: clip_unit(cy - hh),
                x_max: clip_unit(cx + hw),
                y_max: clip_unit(cy + hh),
            }
        })
        .collect())
}

/// Per-anchor matching targets.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    /// Ground-truth index per anchor, `None` for background.
    pub assignments: Vec<Option<usize>>,
    /// Label per anchor, 0 for background.
    pub labels: Vec<u32>,
    /// Encoded offsets per anchor, zeros for background.
    pub offsets: Vec<[f64; 4]>,
}

impl MatchResult {
    pub fn num_positive(&self) -> usize {
        self.assignments.iter().filter(|a| a.is_some()).count()
    }
}

/// Assigns ground-truth boxes to anchors.
///
/// An anchor whose best IoU against the ground truth is at least
/// `positive_iou` takes that best box (lowest index on ties). Then every
/// ground-truth box claims its own best anchor regardless of the threshold.
/// When two boxes claim the same anchor, the one overlapping it more wins,
/// the lower index on ties. Zero-area ground-truth boxes cannot be encoded
/// and are ignored.
pub fn match_to_anchors(
    gt_boxes: &[BoxCorner],
    gt_labels: &[u32],
    anchors: &AnchorSet,
    positive_iou: f64,
) -> Result<MatchResult, BoxError> {
    if gt_boxes.len() != gt_labels.len() {
        return Err(BoxError::LengthMismatch {
            left: gt_boxes.len(),
            right: gt_labels.len(),
        });
    }
    let n = anchors.len();
    let mut assignments: Vec<Option<usize>> = vec![None; n];
    let valid: Vec<usize> = (0..gt_boxes.len())
        .filter(|&g| gt_boxes[g].width() > 0.0 && gt_boxes[g].height() > 0.0)
        .collect();

    if !valid.is_empty() {
        let corners = anchors.corners();
        let gts: Vec<BoxCorner> = valid.iter().map(|&g| gt_boxes[g]).collect();
        let ious = compute_ious(&corners, &gts);

        for (a, slot) in assignments.iter_mut().enumerate() {
            let mut best: Option<(usize, f64)> = None;
            for k in 0..gts.len() {
                let v = ious[(a, k)];
                if best.is_none_or(|(_, bv)| v > bv) {
                    best = Some((k, v));
                }
            }
            if let Some((k, v)) = best {
                if v >= positive_iou {
                    *slot = Some(valid[k]);
                }
            }
        }

        let mut owner: Vec<Option<(usize, f64)>> = vec![None; n];
        for k in 0..gts.len() {
            let mut best_anchor = 0;
            for a in 1..n {
                if ious[(a, k)] > ious[(best_anchor, k)] {
                    best_anchor = a;
                }
            }
            let v = ious[(best_anchor, k)];
            if owner[best_anchor].is_none_or(|(_, ov)| v > ov) {
                owner[best_anchor] = Some((valid[k], v));
            }
        }
        for (a, o) in owner.into_iter().enumerate() {
            if let Some((g, _)) = o {
                assignments[a] = Some(g);
            }
        }
    }

    let mut labels = vec![0u32; n];
    let mut offsets = vec![[0.0; 4]; n];
    for (a, assigned) in assignments.iter().enumerate() {
        if let Some(g) = *assigned {
            labels[a] = gt_labels[g];
            offsets[a] = encode(
                &BoxCenter::from_corner(&gt_boxes[g]),
                &anchors.anchors[a],
                anchors.variances,
            )?;
        }
    }
    Ok(MatchResult {
        assignments,
        labels,
        offsets,
    })
}
