use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::raster::{BinaryMask, GrayImage};
use crate::error::{Error, Result};

/// Which side of the threshold is foreground.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Polarity {
    /// Dark objects on a light background: foreground is `value <= t`.
    #[default]
    DarkForeground,
    /// Light objects on a dark background: foreground is `value > t`.
    BrightForeground,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Threshold {
    pub threshold: u8,
    pub mask: BinaryMask,
}

pub fn histogram(img: &GrayImage) -> [u64; 256] {
    let mut hist = [0u64; 256];
    for &v in img.as_raw() {
        hist[v as usize] += 1;
    }
    hist
}

/// Otsu level of a histogram.
///
/// Between-class variance for a split at `t` is proportional to
/// `(S0*N - S*n0)^2 / (n0*n1)`, where `n0`/`S0` are the count and intensity sum
/// at or below `t`. The ratio is compared exactly in integers; the smallest
/// maximising `t` wins.
pub fn otsu_level(hist: &[u64; 256]) -> Result<u8> {
    let total: u64 = hist.iter().sum();
    let sum: u128 = hist
        .iter()
        .enumerate()
        .map(|(v, &c)| v as u128 * c as u128)
        .sum();
    let n = total as u128;

    let mut best: Option<(u8, BigUint, BigUint)> = None;
    let (mut n0, mut s0) = (0u128, 0u128);
    for t in 0..256usize {
        n0 += hist[t] as u128;
        s0 += t as u128 * hist[t] as u128;
        let n1 = n - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let diff = (s0 * n).abs_diff(sum * n0);
        let num = BigUint::from(diff) * BigUint::from(diff);
        let den = BigUint::from(n0 * n1);
        let better = match &best {
            None => true,
            Some((_, bn, bd)) => &num * bd > bn * &den,
        };
        if better {
            best = Some((t as u8, num, den));
        }
    }
    match best {
        Some((t, num, _)) if num > BigUint::from(0u8) => Ok(t),
        _ => Err(Error::DegenerateHistogram),
    }
}

/// Otsu binarisation with dark foreground.
pub fn otsu_threshold(img: &GrayImage) -> Result<Threshold> {
    otsu_threshold_with(img, Polarity::DarkForeground)
}

pub fn otsu_threshold_with(img: &GrayImage, polarity: Polarity) -> Result<Threshold> {
    let t = otsu_level(&histogram(img))?;
    let mask = match polarity {
        Polarity::DarkForeground => img.mask_where(|v| v <= t),
        Polarity::BrightForeground => img.mask_where(|v| v > t),
    };
    Ok(Threshold { threshold: t, mask })
}
