//! Browser demo: stylize, repeated-stylization drift and reverse transfer on a
//! small seeded flow model. [`Demo`] is plain Rust; [`FlowDemo`] exposes it to
//! JavaScript.

use flowstyle::flow::{FlowLayer, PfnConfig, PfnModel};
use flowstyle::harness::{leak_test, reverse_transfer, stylize};
use flowstyle::io::quantize;
use flowstyle::train::{synth_content, synth_style};
use flowstyle::transfer::TransferKind;
use flowstyle::{seeded_rng, Error, Result, Tensor};
use wasm_bindgen::prelude::*;

pub const DEMO_SIDE: usize = 64;
const DEMO_HIDDEN: usize = 8;
const COUPLING_GAIN: f64 = 0.5;

/// Converts a `1×3×H×W` tensor to row-major RGBA bytes (alpha 255).
pub fn to_rgba(t: &Tensor) -> Vec<u8> {
    let (h, w) = (t.height(), t.width());
    let mut out = Vec::with_capacity(4 * h * w);
    for y in 0..h {
        for x in 0..w {
            for c in 0..3 {
                out.push(quantize(t.at(0, c, y, x)));
            }
            out.push(255);
        }
    }
    out
}

/// Inverse of [`to_rgba`]; alpha is ignored.
pub fn from_rgba(rgba: &[u8], width: usize, height: usize) -> Result<Tensor> {
    if rgba.len() != 4 * width * height {
        return Err(Error::Invalid(format!(
            "expected {} RGBA bytes for {width}x{height}, got {}",
            4 * width * height,
            rgba.len()
        )));
    }
    let plane = width * height;
    let mut data = vec![0.0; 3 * plane];
    for (i, px) in rgba.chunks_exact(4).enumerate() {
        for c in 0..3 {
            data[c * plane + i] = px[c] as f64 / 255.0;
        }
    }
    Tensor::from_vec([1, 3, height, width], data)
}

#[derive(Clone, Debug)]
pub struct Demo {
    model: PfnModel,
    content: Tensor,
    style: Tensor,
}

/// Images from a reverse transfer plus the recovery error before quantization.
#[derive(Clone, Debug)]
pub struct Reversal {
    pub stylized: Tensor,
    pub recovered: Tensor,
    pub error: f64,
}

impl Demo {
    /// Flow2-Block2 with randomized couplings, actnorms initialized on the
    /// seeded content and style images.
    pub fn new(seed: u64) -> Result<Self> {
        let mut rng = seeded_rng(seed);
        let content = synth_content(DEMO_SIDE, DEMO_SIDE, &mut rng);
        let style = synth_style(DEMO_SIDE, DEMO_SIDE, &mut rng);
        let config = PfnConfig::new(2, 2, [3, DEMO_SIDE, DEMO_SIDE]).with_hidden(DEMO_HIDDEN);
        let mut model = PfnModel::new(config, seed)?;
        for layer in model.layers_mut() {
            if let FlowLayer::Coupling(p) = layer {
                p.randomize_scaled(COUPLING_GAIN, &mut rng);
            }
        }
        model.initialize(&Tensor::stack(&[content.clone(), style.clone()])?)?;
        Ok(Demo { model, content, style })
    }

    pub fn content(&self) -> &Tensor {
        &self.content
    }

    pub fn style(&self) -> &Tensor {
        &self.style
    }

    pub fn set_content(&mut self, image: Tensor) -> Result<()> {
        self.model.check_input(&image)?;
        self.content = image;
        Ok(())
    }

    pub fn set_style(&mut self, image: Tensor) -> Result<()> {
        self.model.check_input(&image)?;
        self.style = image;
        Ok(())
    }

    pub fn stylize(&self, kind: TransferKind, alpha: f64) -> Result<Tensor> {
        stylize(&self.model, kind, &self.content, &self.style, alpha)
    }

    /// Drift of each round from the first.
    pub fn drift_curve(&self, kind: TransferKind, rounds: usize) -> Result<Vec<f64>> {
        Ok(leak_test(&self.model, kind, &self.content, &self.style, rounds)?.drift)
    }

    pub fn reverse(&self, kind: TransferKind) -> Result<Reversal> {
        let (stylized, recovered) = reverse_transfer(&self.model, kind, &self.content, &self.style)?;
        let error = recovered.max_abs_diff(&self.content);
        Ok(Reversal { stylized, recovered, error })
    }
}

fn js_err(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

fn kind(name: &str) -> std::result::Result<TransferKind, JsError> {
    name.parse().map_err(js_err)
}

#[wasm_bindgen]
pub struct FlowDemo {
    inner: Demo,
    last_reversal: Option<Reversal>,
}

#[wasm_bindgen]
impl FlowDemo {
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32) -> std::result::Result<FlowDemo, JsError> {
        Ok(FlowDemo { inner: Demo::new(seed as u64).map_err(js_err)?, last_reversal: None })
    }

    pub fn side() -> usize {
        DEMO_SIDE
    }

    pub fn content_rgba(&self) -> Vec<u8> {
        to_rgba(self.inner.content())
    }

    pub fn style_rgba(&self) -> Vec<u8> {
        to_rgba(self.inner.style())
    }

    pub fn set_content_rgba(&mut self, rgba: &[u8]) -> std::result::Result<(), JsError> {
        let image = from_rgba(rgba, DEMO_SIDE, DEMO_SIDE).map_err(js_err)?;
        self.inner.set_content(image).map_err(js_err)
    }

    pub fn set_style_rgba(&mut self, rgba: &[u8]) -> std::result::Result<(), JsError> {
        let image = from_rgba(rgba, DEMO_SIDE, DEMO_SIDE).map_err(js_err)?;
        self.inner.set_style(image).map_err(js_err)
    }

    /// `transfer` is `adain`, `wct` or `patchswap`.
    pub fn stylize(&self, transfer: &str, alpha: f64) -> std::result::Result<Vec<u8>, JsError> {
        Ok(to_rgba(&self.inner.stylize(kind(transfer)?, alpha).map_err(js_err)?))
    }

    pub fn drift_curve(&self, transfer: &str, rounds: usize) -> std::result::Result<Vec<f64>, JsError> {
        self.inner.drift_curve(kind(transfer)?, rounds).map_err(js_err)
    }

    /// Runs a reverse transfer and returns the recovery error; the images are
    /// then available from [`FlowDemo::reversed_stylized`] and
    /// [`FlowDemo::reversed_recovered`].
    pub fn reverse(&mut self, transfer: &str) -> std::result::Result<f64, JsError> {
        let r = self.inner.reverse(kind(transfer)?).map_err(js_err)?;
        let error = r.error;
        self.last_reversal = Some(r);
        Ok(error)
    }

    pub fn reversed_stylized(&self) -> Vec<u8> {
        self.last_reversal.as_ref().map(|r| to_rgba(&r.stylized)).unwrap_or_default()
    }

    pub fn reversed_recovered(&self) -> Vec<u8> {
        self.last_reversal.as_ref().map(|r| to_rgba(&r.recovered)).unwrap_or_default()
    }
}
