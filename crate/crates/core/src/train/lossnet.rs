use crate::error::{shape_err, Result};
use crate::grad::{Tape, Var};
use crate::ops::{conv2d, relu, ConvGeom};
use crate::seeded_rng;
use crate::tensor::Tensor;

pub const LOSSNET_WIDTHS: [usize; 4] = [16, 32, 64, 64];
pub const LOSSNET_GEOM: ConvGeom = ConvGeom { stride: 2, pad: 1 };

/// One fixed convolution stage.
#[derive(Clone, Debug, PartialEq)]
pub struct Stage {
    pub kernel: Tensor,
    pub bias: Tensor,
    pub geom: ConvGeom,
    pub relu: bool,
}

/// Frozen random feature extractor standing in for a pretrained encoder.
#[derive(Clone, Debug, PartialEq)]
pub struct LossNet {
    stages: Vec<Stage>,
    seed: u64,
}

impl LossNet {
    /// Four 3×3 stride-2 stages of widths 16/32/64/64 with ReLU, He-scaled
    /// Gaussian kernels and zero biases.
    pub fn new(in_channels: usize, seed: u64) -> Self {
        Self::with_widths(in_channels, &LOSSNET_WIDTHS, seed)
    }

    pub fn with_widths(in_channels: usize, widths: &[usize], seed: u64) -> Self {
        let mut rng = seeded_rng(seed);
        let mut cin = in_channels;
        let stages = widths
            .iter()
            .map(|&cout| {
                let std = (2.0 / (cin * 9) as f64).sqrt();
                let stage = Stage {
                    kernel: Tensor::randn([cout, cin, 3, 3], std, &mut rng),
                    bias: Tensor::zeros([1, cout, 1, 1]),
                    geom: LOSSNET_GEOM,
                    relu: true,
                };
                cin = cout;
                stage
            })
            .collect();
        LossNet { stages, seed }
    }

    /// Custom stages, e.g. a single linear kernel for hand-checked fixtures.
    pub fn from_stages(stages: Vec<Stage>) -> Result<Self> {
        for (i, s) in stages.iter().enumerate() {
            let cout = s.kernel.batch();
            s.bias.expect_shape([1, cout, 1, 1], "lossnet bias")?;
            if i > 0 && stages[i - 1].kernel.batch() != s.kernel.channels() {
                return shape_err(format!("lossnet stage {i} input channels do not chain"));
            }
        }
        Ok(LossNet { stages, seed: 0 })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn depth(&self) -> usize {
        self.stages.len()
    }

    /// Activations after every stage.
    pub fn features(&self, x: &Tensor) -> Result<Vec<Tensor>> {
        let mut out = Vec::with_capacity(self.stages.len());
        let mut cur = x.clone();
        for s in &self.stages {
            cur = conv2d(&cur, &s.kernel, Some(&s.bias), s.geom)?;
            if s.relu {
                cur = relu(&cur);
            }
            out.push(cur.clone());
        }
        Ok(out)
    }

    pub fn top(&self, x: &Tensor) -> Result<Tensor> {
        Ok(self.features(x)?.pop().unwrap_or_else(|| x.clone()))
    }

    /// [`LossNet::features`] recorded on a tape; kernels enter as constants.
    pub fn features_on_tape(&self, tape: &mut Tape, x: Var) -> Result<Vec<Var>> {
        let mut out = Vec::with_capacity(self.stages.len());
        let mut cur = x;
        for s in &self.stages {
            let k = tape.constant(s.kernel.clone());
            let b = tape.constant(s.bias.clone());
            cur = tape.conv2d(cur, k, Some(b), s.geom)?;
            if s.relu {
                cur = tape.relu(cur);
            }
            out.push(cur);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_extents_halve() {
        let net = LossNet::new(3, 1);
        let f = net.features(&Tensor::zeros([1, 3, 32, 32])).unwrap();
        let shapes: Vec<_> = f.iter().map(|t| t.shape()).collect();
        assert_eq!(shapes, vec![[1, 16, 16, 16], [1, 32, 8, 8], [1, 64, 4, 4], [1, 64, 2, 2]]);
    }

    #[test]
    fn same_seed_same_net() {
        assert_eq!(LossNet::new(3, 9), LossNet::new(3, 9));
        assert_ne!(LossNet::new(3, 9), LossNet::new(3, 10));
    }

    #[test]
    fn tape_features_match() {
        let net = LossNet::new(3, 2);
        let x = Tensor::randn([1, 3, 16, 16], 1.0, &mut seeded_rng(4));
        let mut tape = Tape::new();
        let xv = tape.constant(x.clone());
        let vars = net.features_on_tape(&mut tape, xv).unwrap();
        for (v, t) in vars.iter().zip(net.features(&x).unwrap()) {
            assert_eq!(tape.value(*v), &t);
        }
    }
}
