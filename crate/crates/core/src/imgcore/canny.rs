//! Canny edge detector.
//!
//! Derivatives use separable Sobel-family kernels (edge replication):
//!
//! | aperture | smoothing              | derivative              | gain |
//! |----------|------------------------|-------------------------|------|
//! | 3        | `1 2 1`                | `-1 0 1`                | 4    |
//! | 5        | `1 4 6 4 1`            | `-1 -2 0 2 1`           | 48   |
//! | 7        | `1 6 15 20 15 6 1`     | `-1 -4 -5 0 5 4 1`      | 640  |
//!
//! Responses are divided by the gain (smoothing sum times the sum of the
//! positive derivative taps) so an ideal step of height `h` has magnitude `h`
//! for every aperture, and the hysteresis thresholds are in intensity units.

use std::collections::VecDeque;

use super::raster::{BinaryMask, GrayImage, RING8};
use crate::error::{Error, Result};

fn kernels(aperture: usize) -> Result<(&'static [f64], &'static [f64], f64)> {
    match aperture {
        3 => Ok((&[1.0, 2.0, 1.0], &[-1.0, 0.0, 1.0], 4.0)),
        5 => Ok((&[1.0, 4.0, 6.0, 4.0, 1.0], &[-1.0, -2.0, 0.0, 2.0, 1.0], 48.0)),
        7 => Ok((
            &[1.0, 6.0, 15.0, 20.0, 15.0, 6.0, 1.0],
            &[-1.0, -4.0, -5.0, 0.0, 5.0, 4.0, 1.0],
            640.0,
        )),
        _ => Err(Error::invalid(format!("aperture must be 3, 5 or 7, got {aperture}"))),
    }
}

/// Normalised x/y derivatives.
pub struct Gradient {
    pub width: usize,
    pub height: usize,
    pub gx: Vec<f64>,
    pub gy: Vec<f64>,
}

impl Gradient {
    pub fn magnitude(&self, x: usize, y: usize) -> f64 {
        let i = y * self.width + x;
        self.gx[i].hypot(self.gy[i])
    }
}

pub fn gradient(img: &GrayImage, aperture: usize) -> Result<Gradient> {
    let (smooth, deriv, gain) = kernels(aperture)?;
    let (w, h) = (img.width(), img.height());
    let r = (aperture / 2) as isize;

    // separable passes: horizontal then vertical
    let mut hs = vec![0.0; w * h];
    let mut hd = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let (mut s, mut d) = (0.0, 0.0);
            for (i, (&ks, &kd)) in smooth.iter().zip(deriv).enumerate() {
                let v = img.get_clamped(x as isize + i as isize - r, y as isize) as f64;
                s += ks * v;
                d += kd * v;
            }
            hs[y * w + x] = s;
            hd[y * w + x] = d;
        }
    }
    let at = |buf: &[f64], x: usize, y: isize| buf[y.clamp(0, h as isize - 1) as usize * w + x];
    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let (mut sx, mut sy) = (0.0, 0.0);
            for (j, (&ks, &kd)) in smooth.iter().zip(deriv).enumerate() {
                let yy = y as isize + j as isize - r;
                sx += ks * at(&hd, x, yy);
                sy += kd * at(&hs, x, yy);
            }
            gx[y * w + x] = sx / gain;
            gy[y * w + x] = sy / gain;
        }
    }
    Ok(Gradient {
        width: w,
        height: h,
        gx,
        gy,
    })
}

pub fn canny_edges(img: &GrayImage, aperture: usize, low: f64, high: f64) -> Result<BinaryMask> {
    if !(low >= 0.0 && low <= high) {
        return Err(Error::invalid(format!(
            "thresholds must satisfy 0 <= low <= high, got low={low} high={high}"
        )));
    }
    let g = gradient(img, aperture)?;
    let (w, h) = (g.width, g.height);
    let mag: Vec<f64> = g.gx.iter().zip(&g.gy).map(|(a, b)| a.hypot(*b)).collect();
    let mag_at = |x: isize, y: isize| {
        if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
            0.0
        } else {
            mag[y as usize * w + x as usize]
        }
    };

    let tan22 = std::f64::consts::FRAC_PI_8.tan();
    let tan67 = (3.0 * std::f64::consts::FRAC_PI_8).tan();
    let mut thin = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let m = mag[i];
            if m < low || m == 0.0 {
                continue;
            }
            let (ax, ay) = (g.gx[i].abs(), g.gy[i].abs());
            let (dx, dy): (isize, isize) = if ay <= tan22 * ax {
                (1, 0)
            } else if ay > tan67 * ax {
                (0, 1)
            } else if g.gx[i] * g.gy[i] > 0.0 {
                (1, 1)
            } else {
                (-1, 1)
            };
            let (xi, yi) = (x as isize, y as isize);
            let before = mag_at(xi - dx, yi - dy);
            let after = mag_at(xi + dx, yi + dy);
            // strict on one side so a two-pixel plateau keeps exactly one pixel
            thin[i] = m > before && m >= after;
        }
    }

    let mut edges = BinaryMask::empty(w, h);
    let mut queue = VecDeque::new();
    for y in 0..h {
        for x in 0..w {
            if thin[y * w + x] && mag[y * w + x] >= high {
                edges.set(x, y, true);
                queue.push_back((x, y));
            }
        }
    }
    while let Some((x, y)) = queue.pop_front() {
        for (dx, dy) in RING8 {
            let (nx, ny) = (x as isize + dx, y as isize + dy);
            if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                continue;
            }
            let (nx, ny) = (nx as usize, ny as usize);
            if thin[ny * w + nx] && !edges.get(nx, ny) {
                edges.set(nx, ny, true);
                queue.push_back((nx, ny));
            }
        }
    }
    Ok(edges)
}
