//! Dense rank-4 tensors in `(batch, channels, height, width)` layout.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{shape_err, Error, Result};

/// Extents of a rank-4 tensor: batch, channels, height, width.
pub type Shape = [usize; 4];

/// Row-major `f64` tensor with batch outermost and width innermost.
///
/// Construction through [`Tensor::from_vec`] rejects NaN and infinities, so
/// every tensor handed out by a public operation holds finite values.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    shape: Shape,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: Shape) -> Self {
        Self::full(shape, 0.0)
    }

    pub fn full(shape: Shape, value: f64) -> Self {
        Tensor {
            shape,
            data: vec![value; shape.iter().product()],
        }
    }

    pub fn from_vec(shape: Shape, data: Vec<f64>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if data.len() != n {
            return shape_err(format!(
                "data length {} does not match shape {:?} ({} elements)",
                data.len(),
                shape,
                n
            ));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("tensor construction (element {i})")));
        }
        Ok(Tensor { shape, data })
    }

    /// Builds without the finiteness scan. Callers guarantee the invariant.
    pub(crate) fn from_raw(shape: Shape, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), shape.iter().product::<usize>());
        Tensor { shape, data }
    }

    /// Standard normal entries scaled by `std`.
    pub fn randn<R: Rng + ?Sized>(shape: Shape, std: f64, rng: &mut R) -> Self {
        let n = shape.iter().product();
        let data = (0..n)
            .map(|_| std * rng.sample::<f64, _>(StandardNormal))
            .collect();
        Tensor { shape, data }
    }

    /// Uniform entries in `[lo, hi)`.
    pub fn rand_uniform<R: Rng + ?Sized>(shape: Shape, lo: f64, hi: f64, rng: &mut R) -> Self {
        let n = shape.iter().product();
        let data = (0..n).map(|_| rng.random_range(lo..hi)).collect();
        Tensor { shape, data }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn batch(&self) -> usize {
        self.shape[0]
    }

    pub fn channels(&self) -> usize {
        self.shape[1]
    }

    pub fn height(&self) -> usize {
        self.shape[2]
    }

    pub fn width(&self) -> usize {
        self.shape[3]
    }

    /// Number of spatial positions per channel per batch item.
    pub fn plane(&self) -> usize {
        self.shape[2] * self.shape[3]
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn offset(&self, b: usize, c: usize, y: usize, x: usize) -> usize {
        ((b * self.shape[1] + c) * self.shape[2] + y) * self.shape[3] + x
    }

    #[inline]
    pub fn at(&self, b: usize, c: usize, y: usize, x: usize) -> f64 {
        self.data[self.offset(b, c, y, x)]
    }

    /// The contiguous `height × width` plane of one channel of one batch item.
    pub fn channel_plane(&self, b: usize, c: usize) -> &[f64] {
        let p = self.plane();
        let start = (b * self.shape[1] + c) * p;
        &self.data[start..start + p]
    }

    pub(crate) fn channel_plane_mut(&mut self, b: usize, c: usize) -> &mut [f64] {
        let p = self.plane();
        let start = (b * self.shape[1] + c) * p;
        &mut self.data[start..start + p]
    }

    pub fn reshape(self, shape: Shape) -> Result<Self> {
        if shape.iter().product::<usize>() != self.data.len() {
            return shape_err(format!("cannot reshape {:?} into {:?}", self.shape, shape));
        }
        Ok(Tensor { shape, data: self.data })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor {
            shape: self.shape,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Tensor, f: impl Fn(f64, f64) -> f64) -> Result<Tensor> {
        self.expect_shape(other.shape, "elementwise operand")?;
        Ok(Tensor {
            shape: self.shape,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, k: f64) -> Tensor {
        self.map(|v| v * k)
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn sum_squares(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    /// `max |a - b|`; infinite when shapes differ.
    pub fn max_abs_diff(&self, other: &Tensor) -> f64 {
        if self.shape != other.shape {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub(crate) fn ensure_finite(self, context: &str) -> Result<Tensor> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(Error::NonFinite(context.to_string()))
        }
    }

    pub(crate) fn expect_shape(&self, shape: Shape, what: &str) -> Result<()> {
        if self.shape != shape {
            return shape_err(format!("{what}: expected {:?}, got {:?}", shape, self.shape));
        }
        Ok(())
    }

    /// Channels `[start, start + len)` as a new tensor.
    pub fn slice_channels(&self, start: usize, len: usize) -> Result<Tensor> {
        let [b, c, h, w] = self.shape;
        if start + len > c {
            return shape_err(format!("channel slice {start}..{} exceeds {c}", start + len));
        }
        let mut out = Tensor::zeros([b, len, h, w]);
        for bi in 0..b {
            for ci in 0..len {
                out.channel_plane_mut(bi, ci)
                    .copy_from_slice(self.channel_plane(bi, start + ci));
            }
        }
        Ok(out)
    }

    /// Concatenation along the channel axis.
    pub fn concat_channels(a: &Tensor, b: &Tensor) -> Result<Tensor> {
        let [ba, ca, ha, wa] = a.shape;
        let [bb, cb, hb, wb] = b.shape;
        if ba != bb || ha != hb || wa != wb {
            return shape_err(format!("cannot concat {:?} with {:?}", a.shape, b.shape));
        }
        let mut out = Tensor::zeros([ba, ca + cb, ha, wa]);
        for bi in 0..ba {
            for ci in 0..ca {
                out.channel_plane_mut(bi, ci).copy_from_slice(a.channel_plane(bi, ci));
            }
            for ci in 0..cb {
                out.channel_plane_mut(bi, ca + ci)
                    .copy_from_slice(b.channel_plane(bi, ci));
            }
        }
        Ok(out)
    }

    /// Batch item `index` as a batch-of-one tensor.
    pub fn batch_item(&self, index: usize) -> Result<Tensor> {
        let [b, c, h, w] = self.shape;
        if index >= b {
            return shape_err(format!("batch index {index} out of range {b}"));
        }
        let n = c * h * w;
        Ok(Tensor::from_raw(
            [1, c, h, w],
            self.data[index * n..(index + 1) * n].to_vec(),
        ))
    }

    /// Stacks equally shaped tensors along the batch axis.
    pub fn stack(items: &[Tensor]) -> Result<Tensor> {
        let first = items
            .first()
            .ok_or_else(|| Error::Shape("cannot stack zero tensors".into()))?;
        let [_, c, h, w] = first.shape;
        let mut data = Vec::with_capacity(items.len() * c * h * w);
        let mut total = 0;
        for t in items {
            if t.shape[1..] != first.shape[1..] {
                return shape_err(format!("cannot stack {:?} with {:?}", first.shape, t.shape));
            }
            total += t.shape[0];
            data.extend_from_slice(&t.data);
        }
        Ok(Tensor::from_raw([total, c, h, w], data))
    }

    /// Clamps every element into `[lo, hi]`.
    pub fn clamp(&self, lo: f64, hi: f64) -> Tensor {
        self.map(|v| v.clamp(lo, hi))
    }

    /// Center crop of the spatial extents.
    pub fn center_crop(&self, height: usize, width: usize) -> Result<Tensor> {
        let [_, _, h, w] = self.shape;
        if height > h || width > w {
            return shape_err(format!("crop {height}x{width} larger than {h}x{w}"));
        }
        let (y0, x0) = ((h - height) / 2, (w - width) / 2);
        self.crop(y0, x0, height, width)
    }

    pub fn crop(&self, y0: usize, x0: usize, height: usize, width: usize) -> Result<Tensor> {
        let [b, c, h, w] = self.shape;
        if y0 + height > h || x0 + width > w {
            return shape_err(format!(
                "crop {height}x{width} at ({y0},{x0}) exceeds {h}x{w}"
            ));
        }
        let mut out = Tensor::zeros([b, c, height, width]);
        for bi in 0..b {
            for ci in 0..c {
                for y in 0..height {
                    for x in 0..width {
                        let v = self.at(bi, ci, y0 + y, x0 + x);
                        let o = out.offset(bi, ci, y, x);
                        out.data[o] = v;
                    }
                }
            }
        }
        Ok(out)
    }
}
