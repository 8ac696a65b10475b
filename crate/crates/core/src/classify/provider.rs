use std::collections::HashMap;

use super::scores::{ScoreMatrix, ScoresFile};
use crate::error::{Error, Result};
use crate::imgcore::{BinaryMask, GrayImage, Pos};
use crate::segmentation::mask_rect;
use crate::synth::class_template;

/// Source of per-class scores for one crop image.
pub trait ScoreProvider {
    fn classes(&self) -> usize;

    /// Finite nonnegative scores, one per class.
    fn score(&self, id: &str, image: &GrayImage) -> Result<Vec<f64>>;

    /// Scores for a batch of crops, in the given order.
    fn score_all<'a>(&self, crops: impl IntoIterator<Item = (&'a str, &'a GrayImage)>) -> Result<ScoreMatrix<f64>>
    where
        Self: Sized,
    {
        let rows = crops
            .into_iter()
            .map(|(id, img)| Ok((id.to_string(), self.score(id, img)?)))
            .collect::<Result<Vec<_>>>()?;
        ScoreMatrix::new(self.classes(), rows)
    }
}

/// Replays stored rows by crop id.
#[derive(Debug, Clone)]
pub struct FileScoreProvider {
    classes: usize,
    rows: HashMap<String, Vec<f64>>,
}

impl FileScoreProvider {
    pub fn new(file: &ScoresFile) -> Result<Self> {
        let m = ScoreMatrix::<f64>::from_file(file)?;
        let rows = m.ids().iter().enumerate().map(|(i, id)| (id.clone(), m.row(i).to_vec())).collect();
        Ok(FileScoreProvider { classes: m.classes(), rows })
    }
}

impl ScoreProvider for FileScoreProvider {
    fn classes(&self) -> usize {
        self.classes
    }

    fn score(&self, id: &str, _image: &GrayImage) -> Result<Vec<f64>> {
        self.rows.get(id).cloned().ok_or_else(|| Error::MissingScore(id.to_string()))
    }
}

/// Nearest-centroid scorer on (length, area) of the non-white pixels, both
/// normalised by the class-1 template. Centroids are the straight templates
/// of the synthetic generator.
#[derive(Debug, Clone)]
pub struct GeometricScoreProvider {
    centroids: Vec<(f64, f64)>,
    scale: (f64, f64),
}

const LENGTH_WEIGHT: f64 = 0.5;
const SPREAD: f64 = 0.03;

fn template_features(length: f64, width: f64) -> (f64, f64) {
    let r = width / 2.0;
    (length + width, 2.0 * r * length + std::f64::consts::PI * r * r)
}

impl GeometricScoreProvider {
    pub fn new(classes: usize) -> Result<Self> {
        if classes == 0 {
            return Err(Error::invalid("classes must be >= 1"));
        }
        let raw: Vec<(f64, f64)> = (1..=classes as u32)
            .map(|c| {
                let (l, w) = class_template(c, classes as u32);
                template_features(l, w)
            })
            .collect();
        let scale = raw[0];
        let centroids = raw.iter().map(|&(l, a)| (l / scale.0, a / scale.1)).collect();
        Ok(GeometricScoreProvider { centroids, scale })
    }

    /// Normalised (length, area) of an image's non-white pixels.
    pub fn features(&self, image: &GrayImage) -> (f64, f64) {
        let mask = BinaryMask::from_fn(image.width(), image.height(), |x, y| image.get(x, y) < 255);
        let length = mask_rect(&mask, Pos::new(0, 0)).map_or(0.0, |r| r.length());
        (length / self.scale.0, mask.count() as f64 / self.scale.1)
    }
}

impl ScoreProvider for GeometricScoreProvider {
    fn classes(&self) -> usize {
        self.centroids.len()
    }

    fn score(&self, _id: &str, image: &GrayImage) -> Result<Vec<f64>> {
        let (l, a) = self.features(image);
        Ok(self
            .centroids
            .iter()
            .map(|&(cl, ca)| {
                let d2 = LENGTH_WEIGHT * (l - cl).powi(2) + (a - ca).powi(2);
                1.0 / (1.0 + d2 / (SPREAD * SPREAD))
            })
            .collect())
    }
}
