use rand::Rng;

use crate::error::{shape_err, Result};
use crate::ops::{conv2d, relu, ConvGeom};
use crate::tensor::Tensor;

use super::Direction;

/// Standard deviation of the Gaussian init for the first two coupling convs.
pub const COUPLING_INIT_STD: f64 = 0.05;

/// Weights of the coupling network `conv3×3 → ReLU → conv1×1 → ReLU → conv3×3`.
///
/// The network maps `half` channels to `half` channels through `hidden`
/// intermediate channels. The final conv starts at exactly zero, so a fresh
/// coupling is the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingParams {
    pub k1: Tensor,
    pub b1: Tensor,
    pub k2: Tensor,
    pub b2: Tensor,
    pub k3: Tensor,
    pub b3: Tensor,
}

impl CouplingParams {
    pub fn new<R: Rng + ?Sized>(half: usize, hidden: usize, rng: &mut R) -> Self {
        CouplingParams {
            k1: Tensor::randn([hidden, half, 3, 3], COUPLING_INIT_STD, rng),
            b1: Tensor::zeros([1, hidden, 1, 1]),
            k2: Tensor::randn([hidden, hidden, 1, 1], COUPLING_INIT_STD, rng),
            b2: Tensor::zeros([1, hidden, 1, 1]),
            k3: Tensor::zeros([half, hidden, 3, 3]),
            b3: Tensor::zeros([1, half, 1, 1]),
        }
    }

    /// All six tensors zero: the network outputs zeros.
    pub fn zeros(half: usize, hidden: usize) -> Self {
        CouplingParams {
            k1: Tensor::zeros([hidden, half, 3, 3]),
            b1: Tensor::zeros([1, hidden, 1, 1]),
            k2: Tensor::zeros([hidden, hidden, 1, 1]),
            b2: Tensor::zeros([1, hidden, 1, 1]),
            k3: Tensor::zeros([half, hidden, 3, 3]),
            b3: Tensor::zeros([1, half, 1, 1]),
        }
    }

    /// Redraws every tensor from `N(0, std²)`.
    pub fn randomize<R: Rng + ?Sized>(&mut self, std: f64, rng: &mut R) {
        for t in self.tensors_mut() {
            *t = Tensor::randn(t.shape(), std, rng);
        }
    }

    /// Kernels drawn with deviation `gain / √fan_in`, biases with `0.1 · gain`,
    /// so each conv roughly preserves activation scale.
    pub fn randomize_scaled<R: Rng + ?Sized>(&mut self, gain: f64, rng: &mut R) {
        for (k, b) in [(&mut self.k1, &mut self.b1), (&mut self.k2, &mut self.b2), (&mut self.k3, &mut self.b3)] {
            let [_, cin, kh, kw] = k.shape();
            *k = Tensor::randn(k.shape(), gain / ((cin * kh * kw) as f64).sqrt(), rng);
            *b = Tensor::randn(b.shape(), 0.1 * gain, rng);
        }
    }

    pub fn half(&self) -> usize {
        self.k1.channels()
    }

    pub fn hidden(&self) -> usize {
        self.k1.batch()
    }

    pub fn tensors(&self) -> [&Tensor; 6] {
        [&self.k1, &self.b1, &self.k2, &self.b2, &self.k3, &self.b3]
    }

    pub fn tensors_mut(&mut self) -> [&mut Tensor; 6] {
        [
            &mut self.k1,
            &mut self.b1,
            &mut self.k2,
            &mut self.b2,
            &mut self.k3,
            &mut self.b3,
        ]
    }

    pub fn is_final_layer_zero(&self) -> bool {
        self.k3.max_abs() == 0.0 && self.b3.max_abs() == 0.0
    }
}

pub fn nn_forward(x_a: &Tensor, p: &CouplingParams) -> Result<Tensor> {
    if x_a.channels() != p.half() {
        return shape_err(format!(
            "coupling network expects {} channels, got {}",
            p.half(),
            x_a.channels()
        ));
    }
    let h1 = relu(&conv2d(x_a, &p.k1, Some(&p.b1), ConvGeom::SAME3)?);
    let h2 = relu(&conv2d(&h1, &p.k2, Some(&p.b2), ConvGeom::POINTWISE)?);
    conv2d(&h2, &p.k3, Some(&p.b3), ConvGeom::SAME3)
}

/// Additive coupling: the second channel half is shifted by `NN(first half)`.
pub fn coupling_apply(x: &Tensor, p: &CouplingParams, direction: Direction) -> Result<Tensor> {
    let c = x.channels();
    if c % 2 != 0 {
        return shape_err(format!("coupling needs an even channel count, got {c}"));
    }
    let half = c / 2;
    let xa = x.slice_channels(0, half)?;
    let xb = x.slice_channels(half, half)?;
    let shift = nn_forward(&xa, p)?;
    let yb = match direction {
        Direction::Forward => xb.add(&shift)?,
        Direction::Inverse => xb.sub(&shift)?,
    };
    Tensor::concat_channels(&xa, &yb)?.ensure_finite("coupling")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fresh_coupling_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = CouplingParams::new(2, 8, &mut rng);
        assert!(p.is_final_layer_zero());
        let x = Tensor::randn([1, 4, 5, 5], 1.0, &mut rng);
        assert_eq!(nn_forward(&x.slice_channels(0, 2).unwrap(), &p).unwrap().max_abs(), 0.0);
        assert_eq!(coupling_apply(&x, &p, Direction::Forward).unwrap(), x);
    }

    #[test]
    fn constant_network_shifts_second_half() {
        let mut p = CouplingParams::zeros(1, 2);
        p.b3 = Tensor::full([1, 1, 1, 1], 0.75);
        let x = Tensor::from_vec([1, 2, 1, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let y = coupling_apply(&x, &p, Direction::Forward).unwrap();
        assert_eq!(y.data(), &[1.0, 2.0, 3.75, 4.75]);
    }

    #[test]
    fn hand_trace_single_pixel() {
        // 1x1 input: only the kernel centers see data under zero padding.
        let mut p = CouplingParams::zeros(1, 1);
        p.k1 = Tensor::from_vec([1, 1, 3, 3], vec![9.0, 9.0, 9.0, 9.0, 3.0, 9.0, 9.0, 9.0, 9.0]).unwrap();
        p.b1 = Tensor::full([1, 1, 1, 1], -1.0);
        p.k2 = Tensor::full([1, 1, 1, 1], 0.5);
        p.b2 = Tensor::full([1, 1, 1, 1], -1.0);
        p.k3 = Tensor::from_vec([1, 1, 3, 3], vec![7.0, 7.0, 7.0, 7.0, -2.0, 7.0, 7.0, 7.0, 7.0]).unwrap();
        p.b3 = Tensor::full([1, 1, 1, 1], 0.25);
        let x = Tensor::full([1, 1, 1, 1], 2.0);
        // relu(3*2 - 1) = 5; relu(0.5*5 - 1) = 1.5; -2*1.5 + 0.25 = -2.75
        assert_eq!(nn_forward(&x, &p).unwrap().data(), &[-2.75]);
    }

    #[test]
    fn network_preserves_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut p = CouplingParams::new(3, 5, &mut rng);
        p.randomize(0.3, &mut rng);
        for shape in [[1, 3, 1, 1], [2, 3, 4, 7], [1, 3, 9, 2]] {
            let x = Tensor::randn(shape, 1.0, &mut rng);
            assert_eq!(nn_forward(&x, &p).unwrap().shape(), shape);
        }
    }

    #[test]
    fn random_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let mut p = CouplingParams::new(2, 6, &mut rng);
            p.randomize(0.5, &mut rng);
            let x = Tensor::randn([2, 4, 4, 4], 1.0, &mut rng);
            let y = coupling_apply(&x, &p, Direction::Forward).unwrap();
            let back = coupling_apply(&y, &p, Direction::Inverse).unwrap();
            assert!(back.max_abs_diff(&x) < 1e-12);
        }
    }

    #[test]
    fn odd_channels_rejected() {
        let p = CouplingParams::zeros(1, 1);
        let x = Tensor::zeros([1, 3, 2, 2]);
        assert!(matches!(
            coupling_apply(&x, &p, Direction::Forward),
            Err(Error::Shape(_))
        ));
    }
}
