use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::{Kernel, Polarity};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CannyConfig {
    pub aperture: usize,
    pub low: f64,
    pub high: f64,
}

impl Default for CannyConfig {
    fn default() -> Self {
        CannyConfig {
            aperture: 5,
            low: 50.0,
            high: 100.0,
        }
    }
}

/// Tunables for the whole pipeline. Every field has a default, so a config
/// file only needs to name what it overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub median_window: usize,
    pub polarity: Polarity,
    pub canny: CannyConfig,
    /// Morphological-gradient kernel size `[width, height]`, anchored at its centre.
    pub gradient_kernel: [usize; 2],
    /// Minimum enclosed contour area in pixels.
    pub min_area: usize,
    /// White border kept around each crop, clamped to the image.
    pub crop_margin: usize,
    /// Branch points closer than this (pixels) are merged.
    pub merge_radius: f64,
    /// Skeleton end branches up to this multiple of the junction depth are pruned.
    pub spur_ratio: f64,
    pub classes: usize,
    pub expected_total: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            median_window: 3,
            polarity: Polarity::DarkForeground,
            canny: CannyConfig::default(),
            gradient_kernel: [2, 2],
            min_area: 40,
            crop_margin: 4,
            merge_radius: 3.0,
            spur_ratio: 1.5,
            classes: 23,
            expected_total: 46,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.median_window < 3 || self.median_window.is_multiple_of(2) {
            return Err(Error::invalid("median_window must be odd and >= 3"));
        }
        if ![3, 5, 7].contains(&self.canny.aperture) {
            return Err(Error::invalid("canny.aperture must be 3, 5 or 7"));
        }
        if !(self.canny.low >= 0.0 && self.canny.low <= self.canny.high) {
            return Err(Error::invalid("canny thresholds must satisfy 0 <= low <= high"));
        }
        self.gradient_kernel()?;
        if !(self.merge_radius >= 0.0) || !(self.spur_ratio >= 0.0) {
            return Err(Error::invalid("merge_radius and spur_ratio must be >= 0"));
        }
        if self.classes == 0 {
            return Err(Error::invalid("classes must be >= 1"));
        }
        Ok(())
    }

    pub fn gradient_kernel(&self) -> Result<Kernel> {
        let [w, h] = self.gradient_kernel;
        Kernel::rect(w, h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_json_fills_defaults() {
        let cfg: PipelineConfig = serde_json::from_str(r#"{"min_area": 12, "canny": {"low": 20}}"#).unwrap();
        assert_eq!(cfg.min_area, 12);
        assert_eq!(cfg.canny.aperture, 5);
        assert_eq!(cfg.canny.low, 20.0);
        assert_eq!(cfg.gradient_kernel, [2, 2]);
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_even_median() {
        let cfg = PipelineConfig { median_window: 4, ..Default::default() };
        assert!(cfg.validate().is_err());
    }
}
