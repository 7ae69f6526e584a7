use std::collections::BTreeMap;

use super::{iou, BoxCorner, BoxError};

/// Indices sorted by descending score, lower index first on ties.
fn score_order(indices: impl Iterator<Item = usize>, scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = indices.collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

fn greedy(order: Vec<usize>, boxes: &[BoxCorner], iou_threshold: f64, top_k: usize) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::new();
    let mut suppressed = vec![false; order.len()];
    for (pos, &idx) in order.iter().enumerate() {
        if kept.len() >= top_k {
            break;
        }
        if suppressed[pos] {
            continue;
        }
        kept.push(idx);
        for (later, &other) in order.iter().enumerate().skip(pos + 1) {
            if !suppressed[later] && iou(&boxes[idx], &boxes[other]) > iou_threshold {
                suppressed[later] = true;
            }
        }
    }
    kept
}

/// Greedy non-maximum suppression.
///
/// Keeps the highest scoring remaining box and drops every remaining box
/// whose IoU with it exceeds `iou_threshold`, until `top_k` boxes are kept.
/// Returned indices are in descending score order, lower index first on ties.
pub fn nms(boxes: &[BoxCorner], scores: &[f64], iou_threshold: f64, top_k: usize) -> Result<Vec<usize>, BoxError> {
    if boxes.len() != scores.len() {
        return Err(BoxError::LengthMismatch {
            left: boxes.len(),
            right: scores.len(),
        });
    }
    let order = score_order(0..boxes.len(), scores);
    Ok(greedy(order, boxes, iou_threshold, top_k))
}

/// Class-wise suppression: [`nms`] runs independently inside each label,
/// keeping at most `top_k` boxes per label. The merged result is ordered by
/// descending score, lower index first on ties.
pub fn nms_per_class(
    boxes: &[BoxCorner],
    scores: &[f64],
    labels: &[u32],
    iou_threshold: f64,
    top_k: usize,
) -> Result<Vec<usize>, BoxError> {
    if boxes.len() != scores.len() {
        return Err(BoxError::LengthMismatch {
            left: boxes.len(),
            right: scores.len(),
        });
    }
    if boxes.len() != labels.len() {
        return Err(BoxError::LengthMismatch {
            left: boxes.len(),
            right: labels.len(),
        });
    }
    let mut by_label: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, &label) in labels.iter().enumerate() {
        by_label.entry(label).or_default().push(i);
    }
    let mut kept = Vec::new();
    for members in by_label.into_values() {
        let order = score_order(members.into_iter(), scores);
        kept.extend(greedy(order, boxes, iou_threshold, top_k));
    }
    Ok(score_order(kept.into_iter(), scores))
}
