use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{shape_err, Error, Result};
use crate::linalg::Matrix;
use crate::tensor::{Shape, Tensor};
use crate::seeded_rng;

use super::{
    actnorm_apply, actnorm_init, coupling_apply, invconv_apply, squeeze_apply, ActnormParams,
    CouplingParams, Direction, InvConvParams,
};

pub const SQUEEZE_FACTOR: usize = 2;
pub const DEFAULT_HIDDEN: usize = 64;

/// Architecture of a projection network: `n_blocks` blocks, each a squeeze
/// followed by `n_flows` (actnorm, invconv, coupling) triples.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PfnConfig {
    pub n_blocks: usize,
    pub n_flows: usize,
    pub hidden: usize,
    pub in_channels: usize,
    pub in_height: usize,
    pub in_width: usize,
}

impl PfnConfig {
    pub fn new(n_flows: usize, n_blocks: usize, in_shape: [usize; 3]) -> Self {
        PfnConfig {
            n_blocks,
            n_flows,
            hidden: DEFAULT_HIDDEN,
            in_channels: in_shape[0],
            in_height: in_shape[1],
            in_width: in_shape[2],
        }
    }

    /// Eight flows in each of two blocks on RGB input.
    pub fn flow8_block2(height: usize, width: usize) -> Self {
        Self::new(8, 2, [3, height, width])
    }

    pub fn with_hidden(mut self, hidden: usize) -> Self {
        self.hidden = hidden;
        self
    }

    pub fn spatial_divisor(&self) -> usize {
        SQUEEZE_FACTOR.pow(self.n_blocks as u32)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_blocks == 0 || self.n_flows == 0 || self.hidden == 0 || self.in_channels == 0 {
            return Err(Error::Invalid(format!(
                "blocks, flows, hidden width and channels must be positive: {self:?}"
            )));
        }
        let d = self.spatial_divisor();
        if self.in_height % d != 0 || self.in_width % d != 0 || self.in_height == 0 || self.in_width == 0 {
            return shape_err(format!(
                "input {}x{} must be a positive multiple of {d} for {} blocks",
                self.in_height, self.in_width, self.n_blocks
            ));
        }
        Ok(())
    }

    pub fn latent_channels(&self) -> usize {
        self.in_channels * 4usize.pow(self.n_blocks as u32)
    }

    /// Latent shape for a batch of images of the configured size.
    pub fn latent_shape(&self, batch: usize) -> Shape {
        let d = self.spatial_divisor();
        [batch, self.latent_channels(), self.in_height / d, self.in_width / d]
    }

    /// Name in the `Flow<N>-Block<M>` scheme.
    pub fn name(&self) -> String {
        format!("Flow{}-Block{}", self.n_flows, self.n_blocks)
    }
}

impl fmt::Display for PfnConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Architecture name without input extents, e.g. `Flow8-Block2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ArchName {
    pub n_flows: usize,
    pub n_blocks: usize,
}

impl FromStr for ArchName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Invalid(format!("expected Flow<N>-Block<M>, got {s:?}"));
        let (flow, block) = s.split_once('-').ok_or_else(bad)?;
        let n_flows = flow.strip_prefix("Flow").ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let n_blocks = block.strip_prefix("Block").ok_or_else(bad)?.parse().map_err(|_| bad())?;
        Ok(ArchName { n_flows, n_blocks })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LayerKind {
    Squeeze,
    Actnorm,
    InvConv,
    Coupling,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FlowLayer {
    Squeeze,
    Actnorm(ActnormParams),
    InvConv(InvConvParams),
    Coupling(CouplingParams),
}

impl FlowLayer {
    pub fn kind(&self) -> LayerKind {
        match self {
            FlowLayer::Squeeze => LayerKind::Squeeze,
            FlowLayer::Actnorm(_) => LayerKind::Actnorm,
            FlowLayer::InvConv(_) => LayerKind::InvConv,
            FlowLayer::Coupling(_) => LayerKind::Coupling,
        }
    }

    pub fn apply(&self, x: &Tensor, direction: Direction) -> Result<Tensor> {
        match self {
            FlowLayer::Squeeze => squeeze_apply(x, direction),
            FlowLayer::Actnorm(p) => actnorm_apply(x, p, direction),
            FlowLayer::InvConv(p) => invconv_apply(x, p, direction),
            FlowLayer::Coupling(p) => coupling_apply(x, p, direction),
        }
    }

    /// Trainable tensors in serialization order.
    pub fn params(&self) -> Vec<&Tensor> {
        match self {
            FlowLayer::Squeeze => vec![],
            FlowLayer::Actnorm(p) => vec![&p.scale, &p.bias],
            FlowLayer::InvConv(p) => vec![&p.weight],
            FlowLayer::Coupling(p) => p.tensors().to_vec(),
        }
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        match self {
            FlowLayer::Squeeze => vec![],
            FlowLayer::Actnorm(p) => vec![&mut p.scale, &mut p.bias],
            FlowLayer::InvConv(p) => vec![&mut p.weight],
            FlowLayer::Coupling(p) => p.tensors_mut().into_iter().collect(),
        }
    }
}

/// A built projection network. `forward` is the encoder, `inverse` the decoder.
#[derive(Clone, Debug, PartialEq)]
pub struct PfnModel {
    config: PfnConfig,
    layers: Vec<FlowLayer>,
}

impl PfnModel {
    /// Fresh model: pending actnorms, random orthogonal invconvs and
    /// couplings whose final conv is zero.
    pub fn new(config: PfnConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = seeded_rng(seed);
        let mut layers = Vec::new();
        let mut c = config.in_channels;
        for _ in 0..config.n_blocks {
            layers.push(FlowLayer::Squeeze);
            c *= 4;
            for _ in 0..config.n_flows {
                layers.push(FlowLayer::Actnorm(ActnormParams::new(c)));
                layers.push(FlowLayer::InvConv(InvConvParams::random_orthogonal(c, &mut rng)));
                layers.push(FlowLayer::Coupling(CouplingParams::new(c / 2, config.hidden, &mut rng)));
            }
        }
        Ok(PfnModel { config, layers })
    }

    /// Every layer an identity: unit actnorm, `W = I`, all-zero couplings.
    pub fn identity(config: PfnConfig) -> Result<Self> {
        let mut model = Self::new(config, 0)?;
        for layer in &mut model.layers {
            match layer {
                FlowLayer::Squeeze => {}
                FlowLayer::Actnorm(p) => {
                    let c = p.channels();
                    *p = ActnormParams::from_values(vec![1.0; c], vec![0.0; c])?;
                }
                FlowLayer::InvConv(p) => *p = InvConvParams::identity(p.channels()),
                FlowLayer::Coupling(p) => *p = CouplingParams::zeros(p.half(), p.hidden()),
            }
        }
        Ok(model)
    }

    /// Model with every parameter drawn at random (and every actnorm marked
    /// initialized). Invconv weights are perturbed orthogonal matrices.
    pub fn randomized(config: PfnConfig, seed: u64) -> Result<Self> {
        let mut model = Self::new(config, seed)?;
        let mut rng = seeded_rng(seed ^ 0x9e37_79b9_7f4a_7c15);
        for layer in &mut model.layers {
            match layer {
                FlowLayer::Squeeze => {}
                FlowLayer::Actnorm(p) => {
                    let c = p.channels();
                    let scale = (0..c)
                        .map(|_| {
                            let m: f64 = rng.random_range(0.5..1.5);
                            if rng.random_bool(0.5) { m } else { -m }
                        })
                        .collect();
                    let bias = Tensor::randn([1, c, 1, 1], 0.2, &mut rng).into_vec();
                    *p = ActnormParams::from_values(scale, bias)?;
                }
                FlowLayer::InvConv(p) => {
                    let c = p.channels();
                    let q = p.matrix();
                    let noise = Matrix::randn(c, c, &mut rng);
                    let k = 0.2 / (c as f64).sqrt();
                    let w: Vec<f64> = q.data().iter().zip(noise.data()).map(|(a, b)| a + k * b).collect();
                    *p = InvConvParams::from_matrix(&Matrix::from_vec(c, c, w)?);
                }
                FlowLayer::Coupling(p) => p.randomize_scaled(1.0, &mut rng),
            }
        }
        Ok(model)
    }

    pub fn from_parts(config: PfnConfig, layers: Vec<FlowLayer>) -> Result<Self> {
        config.validate()?;
        let reference = Self::new(config, 0)?;
        if reference.layers.len() != layers.len() {
            return shape_err(format!(
                "{} needs {} layers, got {}",
                config.name(),
                reference.layers.len(),
                layers.len()
            ));
        }
        for (i, (a, b)) in reference.layers.iter().zip(&layers).enumerate() {
            if a.kind() != b.kind() {
                return shape_err(format!("layer {i}: expected {:?}, got {:?}", a.kind(), b.kind()));
            }
            for (pa, pb) in a.params().iter().zip(b.params()) {
                if pa.shape() != pb.shape() {
                    return shape_err(format!(
                        "layer {i}: parameter shape {:?} where {:?} expected",
                        pb.shape(),
                        pa.shape()
                    ));
                }
            }
        }
        Ok(PfnModel { config, layers })
    }

    pub fn config(&self) -> &PfnConfig {
        &self.config
    }

    pub fn layers(&self) -> &[FlowLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [FlowLayer] {
        &mut self.layers
    }

    pub fn params(&self) -> Vec<&Tensor> {
        self.layers.iter().flat_map(|l| l.params()).collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        self.layers.iter_mut().flat_map(|l| l.params_mut()).collect()
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|t| t.numel()).sum()
    }

    pub fn is_initialized(&self) -> bool {
        self.layers.iter().all(|l| match l {
            FlowLayer::Actnorm(p) => p.initialized,
            _ => true,
        })
    }

    /// Data-dependent actnorm initialization: propagates `batch` through the
    /// network, initializing each pending actnorm on the activations it sees.
    /// Returns the `(layer, channel)` pairs whose deviation was clamped.
    pub fn initialize(&mut self, batch: &Tensor) -> Result<Vec<(usize, usize)>> {
        self.check_input(batch)?;
        let mut clamped = Vec::new();
        let mut x = batch.clone();
        for (i, layer) in self.layers.iter_mut().enumerate() {
            if let FlowLayer::Actnorm(p) = layer {
                if !p.initialized {
                    let (fresh, diag) = actnorm_init(p, &x)?;
                    clamped.extend(diag.clamped_channels.into_iter().map(|c| (i, c)));
                    *p = fresh;
                }
            }
            x = layer.apply(&x, Direction::Forward)?;
        }
        Ok(clamped)
    }

    pub(crate) fn check_ready(&self) -> Result<()> {
        for (layer, l) in self.layers.iter().enumerate() {
            if let FlowLayer::Actnorm(p) = l {
                if !p.initialized {
                    return Err(Error::Uninitialized { layer });
                }
            }
        }
        Ok(())
    }

    /// Images must carry the configured channel count and spatial extents
    /// divisible by `2^n_blocks`.
    pub fn check_input(&self, x: &Tensor) -> Result<()> {
        let d = self.config.spatial_divisor();
        if x.channels() != self.config.in_channels {
            return shape_err(format!(
                "model expects {} input channels, got {}",
                self.config.in_channels,
                x.channels()
            ));
        }
        if x.height() % d != 0 || x.width() % d != 0 || x.height() == 0 || x.width() == 0 {
            let pad_h = (d - x.height() % d) % d;
            let pad_w = (d - x.width() % d) % d;
            return shape_err(format!(
                "image {}x{} is not divisible by {d}; crop or pad by {pad_h} rows and {pad_w} columns",
                x.height(),
                x.width()
            ));
        }
        Ok(())
    }

    pub(crate) fn check_latent(&self, z: &Tensor) -> Result<()> {
        if z.channels() != self.config.latent_channels() {
            return shape_err(format!(
                "model expects {} latent channels, got {}",
                self.config.latent_channels(),
                z.channels()
            ));
        }
        Ok(())
    }

    /// Image to latent feature.
    pub fn forward(&self, image: &Tensor) -> Result<Tensor> {
        self.check_ready()?;
        self.check_input(image)?;
        self.layers
            .iter()
            .try_fold(image.clone(), |x, layer| layer.apply(&x, Direction::Forward))
    }

    /// Latent feature to image.
    pub fn inverse(&self, latent: &Tensor) -> Result<Tensor> {
        self.check_ready()?;
        self.check_latent(latent)?;
        self.layers
            .iter()
            .rev()
            .try_fold(latent.clone(), |x, layer| layer.apply(&x, Direction::Inverse))
    }
}

pub fn pfn_forward(model: &PfnModel, image: &Tensor) -> Result<Tensor> {
    model.forward(image)
}

pub fn pfn_inverse(model: &PfnModel, latent: &Tensor) -> Result<Tensor> {
    model.inverse(latent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::LayerKind;

    fn small() -> PfnConfig {
        PfnConfig::new(2, 2, [3, 8, 8]).with_hidden(4)
    }

    #[test]
    fn latent_shapes_by_name() {
        assert_eq!(PfnConfig::flow8_block2(256, 256).latent_shape(1), [1, 48, 64, 64]);
        assert_eq!(PfnConfig::new(4, 4, [3, 256, 256]).latent_shape(1), [1, 768, 16, 16]);
        assert_eq!(PfnConfig::new(8, 1, [3, 256, 256]).latent_shape(1), [1, 12, 128, 128]);
        assert_eq!(PfnConfig::flow8_block2(256, 256).name(), "Flow8-Block2");
        let a: ArchName = "Flow16-Block1".parse().unwrap();
        assert_eq!((a.n_flows, a.n_blocks), (16, 1));
        assert!("Flow-Block".parse::<ArchName>().is_err());
    }

    #[test]
    fn layer_order_follows_config() {
        let m = PfnModel::new(small(), 1).unwrap();
        let kinds: Vec<LayerKind> = m.layers().iter().map(|l| l.kind()).collect();
        let block = [
            LayerKind::Squeeze,
            LayerKind::Actnorm,
            LayerKind::InvConv,
            LayerKind::Coupling,
            LayerKind::Actnorm,
            LayerKind::InvConv,
            LayerKind::Coupling,
        ];
        assert_eq!(kinds, [block, block].concat());
    }

    #[test]
    fn uninitialized_forward_is_a_state_error() {
        let m = PfnModel::new(small(), 1).unwrap();
        let x = Tensor::zeros([1, 3, 8, 8]);
        assert!(matches!(m.forward(&x), Err(Error::Uninitialized { layer: 1 })));
    }

    #[test]
    fn indivisible_input_reports_padding() {
        let m = PfnModel::identity(small()).unwrap();
        let err = m.forward(&Tensor::zeros([1, 3, 6, 8])).unwrap_err();
        assert!(err.to_string().contains("2 rows"), "{err}");
    }

    #[test]
    fn identity_model_inverse_is_unsqueeze() {
        let m = PfnModel::identity(small()).unwrap();
        let mut rng = seeded_rng(3);
        let z = Tensor::randn([1, 48, 2, 2], 1.0, &mut rng);
        let expected = squeeze_apply(&squeeze_apply(&z, Direction::Inverse).unwrap(), Direction::Inverse).unwrap();
        assert_eq!(m.inverse(&z).unwrap(), expected);
    }

    #[test]
    fn randomized_round_trip() {
        for seed in 0..5 {
            let m = PfnModel::randomized(small(), seed).unwrap();
            let mut rng = seeded_rng(100 + seed);
            let x = Tensor::rand_uniform([2, 3, 8, 8], 0.0, 1.0, &mut rng);
            let z = m.forward(&x).unwrap();
            assert_eq!(z.shape(), [2, 48, 2, 2]);
            assert!(m.inverse(&z).unwrap().max_abs_diff(&x) < 1e-9);
        }
    }

    #[test]
    fn forward_is_fold_of_layers() {
        let m = PfnModel::randomized(small(), 7).unwrap();
        let mut rng = seeded_rng(8);
        let x = Tensor::randn([1, 3, 8, 8], 1.0, &mut rng);
        let mut y = x.clone();
        for l in m.layers() {
            let next = l.apply(&y, Direction::Forward).unwrap();
            assert_eq!(next.numel(), y.numel());
            y = next;
        }
        assert_eq!(m.forward(&x).unwrap(), y);
    }

    #[test]
    fn zero_init_model_only_standardizes_and_permutes() {
        let mut m = PfnModel::new(PfnConfig::new(1, 1, [3, 4, 4]).with_hidden(4), 5).unwrap();
        let mut rng = seeded_rng(6);
        let x = Tensor::randn([2, 3, 4, 4], 2.0, &mut rng);
        m.initialize(&x).unwrap();
        // squeeze, standardize, rotate; the coupling adds nothing
        let s = squeeze_apply(&x, Direction::Forward).unwrap();
        let FlowLayer::Actnorm(an) = &m.layers()[1] else { panic!() };
        let FlowLayer::InvConv(ic) = &m.layers()[2] else { panic!() };
        let expected = invconv_apply(&actnorm_apply(&s, an, Direction::Forward).unwrap(), ic, Direction::Forward).unwrap();
        assert_eq!(m.forward(&x).unwrap(), expected);
    }

    #[test]
    fn from_parts_checks_layout() {
        let m = PfnModel::new(small(), 2).unwrap();
        assert!(PfnModel::from_parts(*m.config(), m.layers().to_vec()).is_ok());
        let mut layers = m.layers().to_vec();
        layers.swap(1, 2);
        assert!(PfnModel::from_parts(*m.config(), layers).is_err());
    }
}
