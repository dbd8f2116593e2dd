use crate::error::{shape_err, Result};
use crate::flow::mix_channels;
use crate::linalg::{matmul, sym_eig, sym_pow_from_eig, SymMatrix};
use crate::tensor::Tensor;

/// Relative eigenvalue floor: `eps_cov = 1e-5 · trace(Σ) / c`.
pub const EPS_COV_REL: f64 = 1e-5;

/// Second-order style factor: mean, covariance and its symmetric square
/// roots.
#[derive(Clone, Debug)]
pub struct CovFactor {
    pub mean: Vec<f64>,
    /// Population covariance of the centered feature.
    pub cov: SymMatrix,
    /// Eigenvalue floor used for both square roots.
    pub eps: f64,
    /// `Σ^{-1/2}`.
    pub whitener: SymMatrix,
    /// `Σ^{1/2}`.
    pub colorer: SymMatrix,
}

impl CovFactor {
    /// Zero mean, identity covariance.
    pub fn neutral(channels: usize) -> Self {
        CovFactor {
            mean: vec![0.0; channels],
            cov: SymMatrix::identity(channels),
            eps: EPS_COV_REL,
            whitener: SymMatrix::identity(channels),
            colorer: SymMatrix::identity(channels),
        }
    }

    pub fn channels(&self) -> usize {
        self.mean.len()
    }
}

fn channel_means(f: &Tensor) -> Vec<f64> {
    let [b, c, _, _] = f.shape();
    let n = (b * f.plane()) as f64;
    (0..c)
        .map(|ci| (0..b).map(|bi| f.channel_plane(bi, ci).iter().sum::<f64>()).sum::<f64>() / n)
        .collect()
}

fn shift_channels(f: &Tensor, delta: &[f64]) -> Tensor {
    let mut out = f.clone();
    let [b, c, _, _] = f.shape();
    for bi in 0..b {
        for ci in 0..c {
            let d = delta[ci];
            out.channel_plane_mut(bi, ci).iter_mut().for_each(|v| *v += d);
        }
    }
    out
}

/// Mean, covariance and whitening/coloring roots of a feature, with samples
/// taken over batch and spatial positions.
pub fn cov_factor(f: &Tensor) -> Result<CovFactor> {
    let [b, c, _, _] = f.shape();
    let n = b * f.plane();
    if n < 2 {
        return shape_err(format!("covariance needs at least 2 samples, got {n}"));
    }
    let mean = channel_means(f);
    let mut cov = SymMatrix::zeros(c);
    for i in 0..c {
        for j in 0..=i {
            let mut acc = 0.0;
            for bi in 0..b {
                let pi = f.channel_plane(bi, i);
                let pj = f.channel_plane(bi, j);
                for (x, y) in pi.iter().zip(pj) {
                    acc += (x - mean[i]) * (y - mean[j]);
                }
            }
            cov.set(i, j, acc / n as f64);
        }
    }
    let trace = cov.trace();
    let eps = EPS_COV_REL * trace / c as f64;
    let eig = sym_eig(&cov)?;
    let whitener = sym_pow_from_eig(&eig, trace, -0.5, eps)?;
    let colorer = sym_pow_from_eig(&eig, trace, 0.5, eps)?;
    Ok(CovFactor {
        mean,
        cov,
        eps,
        whitener,
        colorer,
    })
}

/// `Σ^{-1/2} (f - μ)`: the whitened content factor.
pub fn wct_content_factor(f: &Tensor) -> Result<Tensor> {
    let factor = cov_factor(f)?;
    whiten(f, &factor)
}

pub(crate) fn whiten(f: &Tensor, factor: &CovFactor) -> Result<Tensor> {
    let neg: Vec<f64> = factor.mean.iter().map(|m| -m).collect();
    mix_channels(&shift_channels(f, &neg), &factor.whitener.to_matrix())
}

/// `Σ^{1/2} content + μ`.
pub fn wct_recombine(content: &Tensor, style: &CovFactor) -> Result<Tensor> {
    if content.channels() != style.channels() {
        return shape_err(format!(
            "style factor has {} channels, content factor {}",
            style.channels(),
            content.channels()
        ));
    }
    let colored = mix_channels(content, &style.colorer.to_matrix())?;
    shift_channels(&colored, &style.mean).ensure_finite("wct recombination")
}

/// Whitening and coloring transform:
/// `Σ_s^{1/2} Σ_c^{-1/2} (f_c - μ_c) + μ_s`.
pub fn wct(f_c: &Tensor, f_s: &Tensor) -> Result<Tensor> {
    if f_c.channels() != f_s.channels() {
        return shape_err(format!(
            "wct channel mismatch: content {}, style {}",
            f_c.channels(),
            f_s.channels()
        ));
    }
    let fc = cov_factor(f_c)?;
    let fs = cov_factor(f_s)?;
    wct_with_factors(f_c, &fc, &fs)
}

pub(crate) fn wct_with_factors(f_c: &Tensor, content: &CovFactor, style: &CovFactor) -> Result<Tensor> {
    let transfer = matmul(&style.colorer.to_matrix(), &content.whitener.to_matrix())?;
    let neg: Vec<f64> = content.mean.iter().map(|m| -m).collect();
    let mixed = mix_channels(&shift_channels(f_c, &neg), &transfer)?;
    shift_channels(&mixed, &style.mean).ensure_finite("wct")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeded_rng;

    #[test]
    fn independent_noise_has_identity_covariance() {
        let mut rng = seeded_rng(12);
        let f = Tensor::randn([1, 2, 64, 64], 1.0, &mut rng);
        let cf = cov_factor(&f).unwrap();
        assert!(cf.cov.max_abs_diff(&SymMatrix::identity(2)) < 0.1);
    }

    #[test]
    fn constant_feature_has_zero_covariance() {
        let cf = cov_factor(&Tensor::full([1, 3, 4, 4], 2.0)).unwrap();
        assert_eq!(cf.cov, SymMatrix::zeros(3));
        assert!(cf.whitener.to_matrix().data().iter().all(|v| v.is_finite()));
        let out = wct(&Tensor::full([1, 3, 4, 4], 2.0), &Tensor::full([1, 3, 4, 4], -1.0)).unwrap();
        assert!(out.max_abs_diff(&Tensor::full([1, 3, 4, 4], -1.0)) < 1e-12);
    }

    #[test]
    fn rank_deficient_covariance_by_hand() {
        // channel 2 = 2 · channel 1, channel 1 = (1, -1, 1, -1)
        // Σ = [[1, 2], [2, 4]]: eigenvalues 5 and 0
        let f = Tensor::from_vec([1, 2, 2, 2], vec![1.0, -1.0, 1.0, -1.0, 2.0, -2.0, 2.0, -2.0]).unwrap();
        let cf = cov_factor(&f).unwrap();
        assert_eq!((cf.cov.get(0, 0), cf.cov.get(0, 1), cf.cov.get(1, 1)), (1.0, 2.0, 4.0));
        assert!((cf.eps - EPS_COV_REL * 5.0 / 2.0).abs() < 1e-18);
        let w = cf.whitener.to_matrix();
        assert!(w.data().iter().all(|v| v.is_finite()));
        let white = whiten(&f, &cf).unwrap();
        assert!(white.is_finite());
    }

    #[test]
    fn self_transfer_is_identity() {
        let mut rng = seeded_rng(13);
        let f = Tensor::randn([1, 4, 8, 8], 1.0, &mut rng);
        assert!(wct(&f, &f).unwrap().max_abs_diff(&f) < 1e-8);
    }

    #[test]
    fn diagonal_style_by_hand() {
        // content whitened exactly: channels (1,-1,1,-1) and (1,1,-1,-1)
        let fc = Tensor::from_vec([1, 2, 2, 2], vec![1.0, -1.0, 1.0, -1.0, 1.0, 1.0, -1.0, -1.0]).unwrap();
        // style with Σ_s = diag(4, 1), mean (3, -2)
        let fs = Tensor::from_vec([1, 2, 2, 2], vec![5.0, 1.0, 5.0, 1.0, -1.0, -1.0, -3.0, -3.0]).unwrap();
        let out = wct(&fc, &fs).unwrap();
        let expected = Tensor::from_vec([1, 2, 2, 2], vec![5.0, 1.0, 5.0, 1.0, -1.0, -1.0, -3.0, -3.0]).unwrap();
        assert!(out.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn factor_recombination_round_trip() {
        let mut rng = seeded_rng(14);
        let f = Tensor::randn([1, 3, 6, 6], 2.0, &mut rng);
        let cf = cov_factor(&f).unwrap();
        let back = wct_recombine(&whiten(&f, &cf).unwrap(), &cf).unwrap();
        assert!(back.max_abs_diff(&f) < 1e-10);
    }

    #[test]
    fn single_sample_rejected() {
        assert!(cov_factor(&Tensor::zeros([1, 2, 1, 1])).is_err());
    }
}
