use crate::error::{shape_err, Error, Result};
use crate::tensor::Tensor;

/// Grid origins along one axis: every `stride` steps, plus the last position
/// so the grid always reaches the border.
fn grid(extent: usize, patch: usize, stride: usize) -> Vec<usize> {
    let last = extent - patch;
    let mut g: Vec<usize> = (0..=last).step_by(stride).collect();
    if *g.last().unwrap() != last {
        g.push(last);
    }
    g
}

fn extract(f: &Tensor, b: usize, y: usize, x: usize, patch: usize, buf: &mut Vec<f64>) {
    buf.clear();
    for c in 0..f.channels() {
        for dy in 0..patch {
            let row = f.offset(b, c, y + dy, x);
            buf.extend_from_slice(&f.data()[row..row + patch]);
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Patch replacement: every content patch on the stride grid is replaced by
/// the style patch (any position) with the highest cosine similarity, and
/// overlapping replacements are averaged. Ties go to the lowest style-patch
/// index in row-major order.
pub fn patch_swap(f_c: &Tensor, f_s: &Tensor, patch_size: usize, stride: usize) -> Result<Tensor> {
    if patch_size == 0 || patch_size % 2 == 0 || stride == 0 {
        return Err(Error::Invalid(format!(
            "patch size must be odd and positive, stride positive (got {patch_size}, {stride})"
        )));
    }
    if f_c.channels() != f_s.channels() {
        return shape_err(format!(
            "patch swap channel mismatch: content {}, style {}",
            f_c.channels(),
            f_s.channels()
        ));
    }
    let fits = |t: &Tensor| t.height() >= patch_size && t.width() >= patch_size;
    if !fits(f_c) || !fits(f_s) {
        return shape_err(format!(
            "patch {patch_size} larger than feature ({}x{} content, {}x{} style)",
            f_c.height(),
            f_c.width(),
            f_s.height(),
            f_s.width()
        ));
    }
    if f_s.batch() != 1 && f_s.batch() != f_c.batch() {
        return shape_err(format!(
            "style batch {} must be 1 or match content batch {}",
            f_s.batch(),
            f_c.batch()
        ));
    }

    let [batch, _, h, w] = f_c.shape();
    let mut out = Tensor::zeros(f_c.shape());
    let mut count = vec![0u32; batch * h * w];
    let mut cbuf = Vec::new();
    let mut sbuf = Vec::new();

    for b in 0..batch {
        let sb = if f_s.batch() == 1 { 0 } else { b };
        // style patches at every position, with their norms
        let mut style_patches = Vec::new();
        for y in 0..=f_s.height() - patch_size {
            for x in 0..=f_s.width() - patch_size {
                extract(f_s, sb, y, x, patch_size, &mut sbuf);
                let n2 = dot(&sbuf, &sbuf);
                style_patches.push((sbuf.clone(), n2));
            }
        }
        for &y in &grid(h, patch_size, stride) {
            for &x in &grid(w, patch_size, stride) {
                extract(f_c, b, y, x, patch_size, &mut cbuf);
                let cn2 = dot(&cbuf, &cbuf);
                let mut best = 0;
                let mut best_sim = f64::NEG_INFINITY;
                for (i, (sp, sn2)) in style_patches.iter().enumerate() {
                    let denom = (cn2 * sn2).sqrt();
                    let sim = if denom > 0.0 { dot(&cbuf, sp) / denom } else { 0.0 };
                    if sim > best_sim {
                        best_sim = sim;
                        best = i;
                    }
                }
                let chosen = &style_patches[best].0;
                let mut k = 0;
                for c in 0..f_c.channels() {
                    for dy in 0..patch_size {
                        for dx in 0..patch_size {
                            let o = out.offset(b, c, y + dy, x + dx);
                            out.data_mut()[o] += chosen[k];
                            k += 1;
                        }
                    }
                }
                for dy in 0..patch_size {
                    for dx in 0..patch_size {
                        count[(b * h + y + dy) * w + x + dx] += 1;
                    }
                }
            }
        }
    }
    let plane = h * w;
    let channels = f_c.channels();
    for b in 0..batch {
        for c in 0..channels {
            let counts = &count[b * plane..(b + 1) * plane];
            for (v, &n) in out.channel_plane_mut(b, c).iter_mut().zip(counts) {
                *v /= n as f64;
            }
        }
    }
    out.ensure_finite("patch swap")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeded_rng;

    #[test]
    fn grid_reaches_border() {
        assert_eq!(grid(8, 3, 2), vec![0, 2, 4, 5]);
        assert_eq!(grid(9, 3, 3), vec![0, 3, 6]);
        assert_eq!(grid(3, 3, 1), vec![0]);
    }

    #[test]
    fn self_match_reproduces_input() {
        let mut rng = seeded_rng(20);
        let f = Tensor::randn([1, 4, 9, 9], 1.0, &mut rng);
        assert_eq!(patch_swap(&f, &f, 3, 3).unwrap(), f);
    }

    #[test]
    fn single_patch_takes_best_style_patch() {
        let mut rng = seeded_rng(21);
        let fc = Tensor::randn([1, 2, 3, 3], 1.0, &mut rng);
        let fs = Tensor::randn([1, 2, 5, 5], 1.0, &mut rng);
        let out = patch_swap(&fc, &fs, 3, 1).unwrap();
        // brute force over the 9 style positions
        let mut best = (f64::NEG_INFINITY, 0, 0);
        for y in 0..3 {
            for x in 0..3 {
                let s = fs.crop(y, x, 3, 3).unwrap();
                let cos = fc.data().iter().zip(s.data()).map(|(a, b)| a * b).sum::<f64>()
                    / (fc.sum_squares() * s.sum_squares()).sqrt();
                if cos > best.0 {
                    best = (cos, y, x);
                }
            }
        }
        assert_eq!(out, fs.crop(best.1, best.2, 3, 3).unwrap());
    }

    #[test]
    fn output_patches_are_style_patches() {
        let mut rng = seeded_rng(22);
        let fc = Tensor::randn([1, 3, 6, 6], 1.0, &mut rng);
        let fs = Tensor::randn([1, 3, 7, 7], 1.0, &mut rng);
        let out = patch_swap(&fc, &fs, 3, 3).unwrap();
        for y in [0, 3] {
            for x in [0, 3] {
                let p = out.crop(y, x, 3, 3).unwrap();
                let found = (0..5).any(|sy| (0..5).any(|sx| fs.crop(sy, sx, 3, 3).unwrap() == p));
                assert!(found, "patch at ({y},{x}) is not a style patch");
            }
        }
    }

    #[test]
    fn rejects_bad_geometry() {
        let f = Tensor::zeros([1, 1, 2, 2]);
        assert!(matches!(patch_swap(&f, &f, 3, 1), Err(Error::Shape(_))));
        assert!(matches!(patch_swap(&f, &f, 2, 1), Err(Error::Invalid(_))));
    }
}
