//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use flowstyle::flow::Direction;
use flowstyle::grad::{check_gradients, CheckOptions, GradCheckReport, Tape, Var};
use flowstyle::linalg::Matrix;
use flowstyle::ops::ConvGeom;
use flowstyle::{seeded_rng, Result, Tensor};

pub const SEEDS: u64 = 10;

pub type Inputs = Box<dyn Fn(u64) -> Vec<Tensor>>;
pub type Build = Box<dyn Fn(&mut Tape, &[Var]) -> Result<Var>>;

/// One differentiable op under test: seeded inputs and the graph to record.
pub struct OpCase {
    pub name: String,
    pub inputs: Inputs,
    pub build: Build,
}

impl OpCase {
    fn new(
        name: impl Into<String>,
        inputs: impl Fn(u64) -> Vec<Tensor> + 'static,
        build: impl Fn(&mut Tape, &[Var]) -> Result<Var> + 'static,
    ) -> Self {
        OpCase { name: name.into(), inputs: Box::new(inputs), build: Box::new(build) }
    }

    /// Finite-difference check at one seed, output contracted with a fixed
    /// random weight.
    pub fn check(&self, seed: u64) -> Result<GradCheckReport> {
        let inputs = (self.inputs)(seed);
        check_gradients(&inputs, |t, v| (self.build)(t, v).and_then(|o| contract(t, o, seed)), &CheckOptions::default())
    }
}

/// Contracts `out` with a fixed random weight so every output entry carries a
/// distinct upstream gradient.
pub fn contract(tape: &mut Tape, out: Var, seed: u64) -> Result<Var> {
    let w = Tensor::randn(tape.value(out).shape(), 1.0, &mut seeded_rng(seed ^ 0xabc));
    let w = tape.constant(w);
    tape.dot(out, w)
}

pub fn randn(shape: [usize; 4], seed: u64) -> Tensor {
    Tensor::randn(shape, 1.0, &mut seeded_rng(seed))
}

pub fn well_conditioned(c: usize, seed: u64) -> Tensor {
    let mut rng = seeded_rng(seed);
    let q = Matrix::random_orthogonal(c, &mut rng);
    let noise = Matrix::randn(c, c, &mut rng);
    let w: Vec<f64> = q.data().iter().zip(noise.data()).map(|(a, b)| a + 0.2 * b).collect();
    Tensor::from_vec([c, c, 1, 1], w).unwrap()
}

/// Magnitudes in `[0.5, 1.5)` with mixed signs.
pub fn scale_vec(c: usize, seed: u64) -> Tensor {
    let t = Tensor::rand_uniform([1, c, 1, 1], 0.5, 1.5, &mut seeded_rng(seed));
    t.map(|v| if (v * 1000.0) as i64 % 2 == 0 { v } else { -v })
}

/// Every differentiable tape op, each direction and geometry separately.
pub fn op_cases() -> Vec<OpCase> {
    let pair = |s| vec![randn([2, 3, 2, 3], s), randn([2, 3, 2, 3], s + 100)];
    let one = |s| vec![randn([1, 2, 3, 3], s)];
    let mut cases = vec![
        OpCase::new("add", pair, |t, v| t.add(v[0], v[1])),
        OpCase::new("sub", pair, |t, v| t.sub(v[0], v[1])),
        OpCase::new("scale", one, |t, v| Ok(t.scale(v[0], -1.7))),
        OpCase::new("relu", |s| vec![randn([1, 2, 4, 4], s)], |t, v| Ok(t.relu(v[0]))),
        OpCase::new("dot", pair, |t, v| t.dot(v[0], v[1])),
        OpCase::new("sum", one, |t, v| Ok(t.sum(v[0]))),
        OpCase::new("sum_squares", one, |t, v| Ok(t.sum_squares(v[0]))),
    ];
    for (label, geom) in [
        ("same3", ConvGeom::SAME3),
        ("pointwise", ConvGeom::POINTWISE),
        ("stride2", ConvGeom { stride: 2, pad: 1 }),
    ] {
        let k = if geom == ConvGeom::POINTWISE { 1 } else { 3 };
        cases.push(OpCase::new(
            format!("conv2d_{label}"),
            move |s| vec![randn([2, 2, 5, 4], s), randn([3, 2, k, k], s + 7), randn([1, 3, 1, 1], s + 9)],
            move |t, v| t.conv2d(v[0], v[1], Some(v[2]), geom),
        ));
    }
    for (label, dir) in [("forward", Direction::Forward), ("inverse", Direction::Inverse)] {
        cases.push(OpCase::new(
            format!("actnorm_{label}"),
            |s| vec![randn([2, 3, 2, 2], s), scale_vec(3, s + 1), randn([1, 3, 1, 1], s + 2)],
            move |t, v| t.actnorm(v[0], v[1], v[2], dir),
        ));
        cases.push(OpCase::new(
            format!("invconv_{label}"),
            |s| vec![randn([2, 4, 2, 3], s), well_conditioned(4, s + 3)],
            move |t, v| t.invconv(v[0], v[1], dir),
        ));
    }
    let feat = |s| vec![randn([2, 3, 3, 3], s).map(|v| 2.0 * v + 0.5)];
    let dist = |s| vec![randn([1, 3, 3, 3], s), randn([1, 3, 3, 3], s + 1)];
    cases.extend([
        OpCase::new("slice_channels", |s| vec![randn([2, 5, 2, 2], s)], |t, v| t.slice_channels(v[0], 1, 3)),
        OpCase::new(
            "concat_channels",
            |s| vec![randn([2, 2, 3, 2], s), randn([2, 3, 3, 2], s + 1)],
            |t, v| t.concat_channels(v[0], v[1]),
        ),
        OpCase::new("squeeze", |s| vec![randn([1, 2, 4, 6], s)], |t, v| t.squeeze(v[0], Direction::Forward)),
        OpCase::new("unsqueeze", |s| vec![randn([1, 8, 2, 3], s)], |t, v| t.squeeze(v[0], Direction::Inverse)),
        OpCase::new("channel_mean", feat, |t, v| Ok(t.channel_mean(v[0]))),
        OpCase::new("channel_std", feat, |t, v| Ok(t.channel_std(v[0]))),
        OpCase::new(
            "adain",
            |s| vec![randn([2, 3, 3, 3], s), randn([1, 3, 4, 4], s + 50).map(|v| 3.0 * v - 1.0)],
            |t, v| t.adain(v[0], v[1]),
        ),
        OpCase::new("l2_distance", dist, |t, v| t.l2_distance(v[0], v[1])),
        OpCase::new("rms_distance", dist, |t, v| t.rms_distance(v[0], v[1])),
    ]);
    cases
}

/// Uniform noise image.
pub fn noise_image(side: usize, seed: u64) -> Tensor {
    Tensor::rand_uniform([1, 3, side, side], 0.0, 1.0, &mut seeded_rng(seed))
}

