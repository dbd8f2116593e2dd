use std::fmt;

use crate::error::{Error, Result};
use crate::flow::PfnModel;
use crate::tensor::Tensor;

use super::flow::tape_forward;
use super::tape::{OpKind, Tape, Var};

/// Central-difference step.
pub const FD_STEP: f64 = 1e-5;
/// Maximum accepted relative error.
pub const GRAD_TOL: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOptions {
    pub step: f64,
    pub tolerance: f64,
    /// Magnitudes below `abs_floor · max(1, |loss|)` count as zero when
    /// forming relative errors.
    pub abs_floor: f64,
    /// Evenly spaced subset of entries per tensor; `None` checks all.
    pub max_entries: Option<usize>,
    /// Re-measure a failing entry at `step / 100`. Agreement there marks a
    /// kink (a ReLU switching inside the probe interval), counted separately.
    pub kink_retry: bool,
    #[doc(hidden)]
    pub fault: Option<OpKind>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            step: FD_STEP,
            tolerance: GRAD_TOL,
            abs_floor: 1e-6,
            max_entries: None,
            kink_retry: false,
            fault: None,
        }
    }
}

/// Agreement for one checked tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorCheck {
    pub index: usize,
    pub checked: usize,
    pub max_rel_error: f64,
    pub worst_entry: usize,
    pub analytic: f64,
    pub numeric: f64,
    /// Entries that only agreed at the reduced step.
    pub kinks: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    pub loss: f64,
    pub tolerance: f64,
    pub tensors: Vec<TensorCheck>,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.tensors.iter().all(|t| t.max_rel_error < self.tolerance)
    }

    pub fn failures(&self) -> Vec<&TensorCheck> {
        self.tensors
            .iter()
            .filter(|t| t.max_rel_error >= self.tolerance)
            .collect()
    }

    pub fn max_rel_error(&self) -> f64 {
        self.tensors.iter().map(|t| t.max_rel_error).fold(0.0, f64::max)
    }

    pub fn checked(&self) -> usize {
        self.tensors.iter().map(|t| t.checked).sum()
    }

    pub fn kinks(&self) -> usize {
        self.tensors.iter().map(|t| t.kinks).sum()
    }
}

impl fmt::Display for GradCheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "gradcheck {} max_rel_error={:e} tolerance={:e} kinks={}",
            if self.passed() { "pass" } else { "fail" },
            self.max_rel_error(),
            self.tolerance,
            self.kinks()
        )?;
        for t in &self.tensors {
            writeln!(
                f,
                "param {}\tchecked={}\tmax_rel_error={:e}\tentry={}\tanalytic={:e}\tnumeric={:e}\tkinks={}",
                t.index, t.checked, t.max_rel_error, t.worst_entry, t.analytic, t.numeric, t.kinks
            )?;
        }
        Ok(())
    }
}

fn evaluate<F>(inputs: &[Tensor], f: &F, fault: Option<OpKind>) -> Result<(Tape, Vec<Var>, Var)>
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var>,
{
    let mut tape = Tape::new();
    if let Some(kind) = fault {
        tape.inject_fault(kind);
    }
    let vars: Vec<Var> = inputs
        .iter()
        .enumerate()
        .map(|(i, t)| tape.param(i, t.clone()))
        .collect();
    let root = f(&mut tape, &vars)?;
    Ok((tape, vars, root))
}

fn entries(numel: usize, max: Option<usize>) -> Vec<usize> {
    match max {
        Some(k) if k < numel => (0..k).map(|i| i * numel / k).collect(),
        _ => (0..numel).collect(),
    }
}

/// Compares tape gradients of the scalar `f(inputs)` against central
/// differences, entry by entry, for every input tensor.
pub fn check_gradients<F>(inputs: &[Tensor], f: F, opts: &CheckOptions) -> Result<GradCheckReport>
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var>,
{
    let (tape, _, root) = evaluate(inputs, &f, opts.fault)?;
    let loss = tape.scalar(root);
    let analytic = tape.backward(root)?.param_grads()?;
    let floor = opts.abs_floor * loss.abs().max(1.0);
    let mut work: Vec<Tensor> = inputs.to_vec();
    let mut tensors = Vec::with_capacity(inputs.len());
    for (ti, grad) in analytic.iter().enumerate() {
        let mut check = TensorCheck {
            index: ti,
            checked: 0,
            max_rel_error: 0.0,
            worst_entry: 0,
            analytic: 0.0,
            numeric: 0.0,
            kinks: 0,
        };
        for e in entries(inputs[ti].numel(), opts.max_entries) {
            let orig = inputs[ti].data()[e];
            let mut probe = |v: f64| -> Result<f64> {
                work[ti].data_mut()[e] = v;
                let (t, _, r) = evaluate(&work, &f, None)?;
                Ok(t.scalar(r))
            };
            let mut central = |h: f64| -> Result<f64> {
                let d = (probe(orig + h)? - probe(orig - h)?) / (2.0 * h);
                if !d.is_finite() {
                    return Err(Error::NonFinite(format!("finite difference of tensor {ti}")));
                }
                Ok(d)
            };
            let a = grad.data()[e];
            let rel_of = |n: f64| (a - n).abs() / a.abs().max(n.abs()).max(floor);
            let mut numeric = central(opts.step)?;
            let mut rel = rel_of(numeric);
            if rel >= opts.tolerance && opts.kink_retry {
                let fine = central(opts.step / 100.0)?;
                if rel_of(fine) < opts.tolerance {
                    check.kinks += 1;
                    numeric = fine;
                    rel = rel_of(fine);
                }
            }
            work[ti].data_mut()[e] = orig;
            check.checked += 1;
            if rel > check.max_rel_error || check.checked == 1 {
                check.max_rel_error = rel;
                check.worst_entry = e;
                check.analytic = a;
                check.numeric = numeric;
            }
        }
        tensors.push(check);
    }
    Ok(GradCheckReport {
        loss,
        tolerance: opts.tolerance,
        tensors,
    })
}

/// Largest model accepted by [`grad_check`]: flows per block and input
/// elements per image.
pub const GRAD_CHECK_MAX_FLOWS: usize = 2;
pub const GRAD_CHECK_MAX_PIXELS: usize = 3 * 8 * 8;

/// Finite-difference check of every model parameter under
/// `loss_fn(encoder(input))`.
pub fn grad_check(
    model: &PfnModel,
    loss_fn: &dyn Fn(&mut Tape, Var) -> Result<Var>,
    input: &Tensor,
    opts: &CheckOptions,
) -> Result<GradCheckReport> {
    let cfg = model.config();
    let per_image = input.channels() * input.plane();
    if cfg.n_flows > GRAD_CHECK_MAX_FLOWS || per_image > GRAD_CHECK_MAX_PIXELS {
        return Err(Error::Invalid(format!(
            "grad_check is for tiny models: at most {GRAD_CHECK_MAX_FLOWS} flows and \
             {GRAD_CHECK_MAX_PIXELS} values per image, got {} flows and {per_image}",
            cfg.n_flows
        )));
    }
    let params: Vec<Tensor> = model.params().into_iter().cloned().collect();
    check_gradients(
        &params,
        |tape, vars| {
            let x = tape.constant(input.clone());
            let z = tape_forward(tape, model, vars, x)?;
            loss_fn(tape, z)
        },
        opts,
    )
}

/// `‖z‖² / 2`.
pub fn half_squared_norm(tape: &mut Tape, z: Var) -> Result<Var> {
    let s = tape.sum_squares(z);
    Ok(tape.scale(s, 0.5))
}
