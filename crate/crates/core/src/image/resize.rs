use super::{quantize, ImageU8};

/// Source sample positions and weights along one axis, half-pixel centers,
/// edge-clamped.
fn axis_taps(src: u32, dst: u32) -> Vec<(usize, usize, f64)> {
    let scale = f64::from(src) / f64::from(dst);
    let last = f64::from(src - 1);
    (0..dst)
        .map(|d| {
            let s = ((f64::from(d) + 0.5) * scale - 0.5).clamp(0.0, last);
            let i0 = s.floor() as usize;
            let i1 = (i0 + 1).min(src as usize - 1);
            (i0, i1, s - i0 as f64)
        })
        .collect()
}

/// Bilinear resampling; output dimensions below 1 are raised to 1.
pub fn resize_bilinear(image: &ImageU8, out_w: u32, out_h: u32) -> ImageU8 {
    let out_w = out_w.max(1);
    let out_h = out_h.max(1);
    if out_w == image.width() && out_h == image.height() {
        return image.clone();
    }
    let xs = axis_taps(image.width(), out_w);
    let ys = axis_taps(image.height(), out_h);
    let w = image.width() as usize;
    let src = image.data();
    let mut data = Vec::with_capacity(out_w as usize * out_h as usize * 3);
    for &(y0, y1, fy) in &ys {
        for &(x0, x1, fx) in &xs {
            for c in 0..3 {
                let at = |x: usize, y: usize| f64::from(src[(y * w + x) * 3 + c]);
                let top = at(x0, y0) * (1.0 - fx) + at(x1, y0) * fx;
                let bottom = at(x0, y1) * (1.0 - fx) + at(x1, y1) * fx;
                data.push(quantize(top * (1.0 - fy) + bottom * fy));
            }
        }
    }
    ImageU8::new(out_w, out_h, data).expect("dimensions are positive")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gray(w: u32, h: u32, values: &[u8]) -> ImageU8 {
        ImageU8::new(w, h, values.iter().flat_map(|&v| [v, v, v]).collect()).unwrap()
    }

    #[test]
    fn identity_resize() {
        let img = gray(3, 2, &[1, 2, 3, 4, 5, 6]);
        assert_eq!(resize_bilinear(&img, 3, 2), img);
    }

    #[test]
    fn two_by_two_to_one() {
        let img = gray(2, 2, &[0, 2, 4, 6]);
        let out = resize_bilinear(&img, 1, 1);
        assert_eq!(out.pixel(0, 0), [3, 3, 3]);
    }

    #[test]
    fn constant_stays_constant() {
        let img = ImageU8::filled(5, 3, [17, 200, 3]);
        for (w, h) in [(1, 1), (10, 7), (2, 9), (5, 3)] {
            let out = resize_bilinear(&img, w, h);
            assert_eq!(out, ImageU8::filled(w, h, [17, 200, 3]));
        }
    }

    #[test]
    fn upsample_row_hand_values() {
        // 2x1 -> 4x1: source x = -0.25, 0.25, 0.75, 1.25 clamped to [0, 1]
        let img = gray(2, 1, &[0, 100]);
        let out = resize_bilinear(&img, 4, 1);
        let row: Vec<u8> = (0..4).map(|x| out.pixel(x, 0)[0]).collect();
        assert_eq!(row, vec![0, 25, 75, 100]);
    }
}
