use crate::rng::RngStream;

/// A sampling range plus the probability the augmentation fires at all.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub lower: f64,
    pub upper: f64,
    pub probability: f64,
}

impl Range {
    pub const fn new(lower: f64, upper: f64, probability: f64) -> Self {
        Self {
            lower,
            upper,
            probability,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.lower.is_finite() && self.upper.is_finite()) {
            return Err("range bounds must be finite".into());
        }
        if self.lower > self.upper {
            return Err(format!("lower {} exceeds upper {}", self.lower, self.upper));
        }
        if !(0.0..=1.0).contains(&self.probability) {
            return Err(format!("probability {} outside [0, 1]", self.probability));
        }
        Ok(())
    }

    /// Draws the apply flag, then the value. Both draws always happen.
    pub fn sample(&self, rng: &mut RngStream) -> SampledParam {
        let apply = rng.bernoulli(self.probability);
        let value = rng.uniform(self.lower, self.upper);
        SampledParam { apply, value }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledParam {
    pub apply: bool,
    pub value: f64,
}

/// Photometric augmentation ranges. Brightness is on the 8-bit scale and hue
/// in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentationConfig {
    pub contrast: Range,
    pub brightness: Range,
    pub saturation: Range,
    pub hue: Range,
}

impl Default for AugmentationConfig {
    fn default() -> Self {
        Self {
            contrast: Range::new(0.5, 1.5, 0.5),
            brightness: Range::new(-32.0, 32.0, 0.5),
            saturation: Range::new(0.5, 1.5, 0.5),
            hue: Range::new(-18.0, 18.0, 0.5),
        }
    }
}

impl AugmentationConfig {
    pub fn validate(&self) -> Result<(), String> {
        for (name, r) in [
            ("contrast", &self.contrast),
            ("brightness", &self.brightness),
            ("saturation", &self.saturation),
            ("hue", &self.hue),
        ] {
            r.validate().map_err(|e| format!("{name}: {e}"))?;
        }
        if self.contrast.lower < 0.0 || self.saturation.lower < 0.0 {
            return Err("contrast and saturation factors must be non-negative".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentationParams {
    pub contrast: SampledParam,
    pub brightness: SampledParam,
    pub saturation: SampledParam,
    pub hue: SampledParam,
}

/// Samples all four augmentations in the fixed order contrast, brightness,
/// saturation, hue. Each consumes exactly two draws (flag, value) whether or
/// not it fires.
pub fn sample_params(config: &AugmentationConfig, rng: &mut RngStream) -> AugmentationParams {
    AugmentationParams {
        contrast: config.contrast.sample(rng),
        brightness: config.brightness.sample(rng),
        saturation: config.saturation.sample(rng),
        hue: config.hue.sample(rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_range_exact() {
        let cfg = AugmentationConfig {
            contrast: Range::new(1.0, 1.0, 1.0),
            ..Default::default()
        };
        let mut rng = RngStream::new(5);
        for _ in 0..100 {
            assert_eq!(sample_params(&cfg, &mut rng).contrast.value, 1.0);
        }
    }

    #[test]
    fn zero_probability_never_applies() {
        let mut cfg = AugmentationConfig::default();
        cfg.hue.probability = 0.0;
        let mut rng = RngStream::new(6);
        for _ in 0..10_000 {
            assert!(!sample_params(&cfg, &mut rng).hue.apply);
        }
    }

    #[test]
    fn monte_carlo_mean() {
        let cfg = AugmentationConfig {
            saturation: Range::new(0.5, 1.5, 1.0),
            ..Default::default()
        };
        let mut rng = RngStream::new(11);
        let n = 10_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let p = sample_params(&cfg, &mut rng).saturation;
            assert!(p.apply);
            assert!((0.5..1.5).contains(&p.value));
            sum += p.value;
        }
        assert!((sum / n as f64 - 1.0).abs() <= 0.02);
    }

    #[test]
    fn consumes_eight_draws() {
        let mut rng = RngStream::new(0);
        sample_params(&AugmentationConfig::default(), &mut rng);
        assert_eq!(rng.position(), 8);
    }

    #[test]
    fn validation() {
        assert!(AugmentationConfig::default().validate().is_ok());
        let cfg = AugmentationConfig {
            contrast: Range::new(2.0, 1.0, 0.5),
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let mut cfg = AugmentationConfig::default();
        cfg.hue.probability = 1.5;
        assert!(cfg.validate().is_err());
    }
}
