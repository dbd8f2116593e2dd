use rand::Rng;

use crate::error::{shape_err, Error, Result};
use crate::tensor::Tensor;
use crate::{seeded_rng, Rng as SeededRng};

/// Supplier of content/style training pairs, in a fixed order.
pub trait PairSource {
    /// One `(content, style)` pair, each `1×c×crop×crop`.
    fn next_pair(&mut self, crop: usize) -> Result<(Tensor, Tensor)>;
}

fn random_crop(img: &Tensor, crop: usize, rng: &mut SeededRng) -> Result<Tensor> {
    let (h, w) = (img.height(), img.width());
    if crop > h || crop > w {
        return shape_err(format!("crop {crop} exceeds image {h}x{w}"));
    }
    let y0 = rng.random_range(0..=h - crop);
    let x0 = rng.random_range(0..=w - crop);
    img.crop(y0, x0, crop, crop)
}

/// Cycles through fixed image lists; larger images are randomly cropped.
#[derive(Clone, Debug)]
pub struct PairPool {
    contents: Vec<Tensor>,
    styles: Vec<Tensor>,
    cursor: usize,
    rng: SeededRng,
}

impl PairPool {
    pub fn new(contents: Vec<Tensor>, styles: Vec<Tensor>, seed: u64) -> Result<Self> {
        if contents.is_empty() || styles.is_empty() {
            return Err(Error::Invalid("pair pool needs at least one content and one style image".into()));
        }
        Ok(PairPool {
            contents,
            styles,
            cursor: 0,
            rng: seeded_rng(seed),
        })
    }
}

impl PairSource for PairPool {
    fn next_pair(&mut self, crop: usize) -> Result<(Tensor, Tensor)> {
        let c = &self.contents[self.cursor % self.contents.len()];
        let s = &self.styles[self.cursor % self.styles.len()];
        self.cursor += 1;
        Ok((random_crop(c, crop, &mut self.rng)?, random_crop(s, crop, &mut self.rng)?))
    }
}

/// Endless stream of freshly generated procedural pairs.
#[derive(Clone, Debug)]
pub struct SyntheticPairs {
    rng: SeededRng,
}

impl SyntheticPairs {
    pub fn new(seed: u64) -> Self {
        SyntheticPairs { rng: seeded_rng(seed) }
    }
}

impl PairSource for SyntheticPairs {
    fn next_pair(&mut self, crop: usize) -> Result<(Tensor, Tensor)> {
        Ok((
            synth_content(crop, crop, &mut self.rng),
            synth_style(crop, crop, &mut self.rng),
        ))
    }
}

fn color<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    [rng.random(), rng.random(), rng.random()]
}

fn paint(h: usize, w: usize, f: impl Fn(f64, f64) -> [f64; 3]) -> Tensor {
    let mut data = vec![0.0; 3 * h * w];
    for y in 0..h {
        for x in 0..w {
            let v = f((y as f64 + 0.5) / h as f64, (x as f64 + 0.5) / w as f64);
            for c in 0..3 {
                data[(c * h + y) * w + x] = v[c].clamp(0.0, 1.0);
            }
        }
    }
    Tensor::from_raw([1, 3, h, w], data)
}

/// Smooth gradient background with a few flat discs and rectangles.
pub fn synth_content<R: Rng + ?Sized>(h: usize, w: usize, rng: &mut R) -> Tensor {
    let (top, bottom) = (color(rng), color(rng));
    let n = rng.random_range(2..=4);
    let shapes: Vec<(bool, f64, f64, f64, f64, [f64; 3])> = (0..n)
        .map(|_| {
            (
                rng.random_bool(0.5),
                rng.random_range(0.1..0.9),
                rng.random_range(0.1..0.9),
                rng.random_range(0.1..0.35),
                rng.random_range(0.1..0.35),
                color(rng),
            )
        })
        .collect();
    paint(h, w, |y, x| {
        let mut px = [0.0; 3];
        for c in 0..3 {
            px[c] = top[c] * (1.0 - y) + bottom[c] * y;
        }
        for &(disc, cy, cx, ry, rx, col) in &shapes {
            let inside = if disc {
                ((y - cy) / ry).powi(2) + ((x - cx) / ry).powi(2) < 1.0
            } else {
                (y - cy).abs() < ry && (x - cx).abs() < rx
            };
            if inside {
                px = col;
            }
        }
        px
    })
}

/// Oriented sinusoidal texture mixing two palette colors.
pub fn synth_style<R: Rng + ?Sized>(h: usize, w: usize, rng: &mut R) -> Tensor {
    let (a, b) = (color(rng), color(rng));
    let theta: f64 = rng.random_range(0.0..std::f64::consts::PI);
    let freq: f64 = rng.random_range(2.0..8.0);
    let freq2: f64 = rng.random_range(1.0..4.0);
    let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let (s, c) = theta.sin_cos();
    paint(h, w, |y, x| {
        let u = c * x + s * y;
        let v = -s * x + c * y;
        let t = 0.5 + 0.35 * (std::f64::consts::TAU * freq * u + phase).sin()
            + 0.15 * (std::f64::consts::TAU * freq2 * v).cos();
        let t = t.clamp(0.0, 1.0);
        [0, 1, 2].map(|k| a[k] * (1.0 - t) + b[k] * t)
    })
}

/// `n` seeded procedural pairs of size `size × size`.
pub fn synthetic_pairs(n: usize, size: usize, seed: u64) -> (Vec<Tensor>, Vec<Tensor>) {
    let mut rng = seeded_rng(seed);
    (0..n)
        .map(|_| (synth_content(size, size, &mut rng), synth_style(size, size, &mut rng)))
        .unzip()
}
