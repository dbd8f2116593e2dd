//! Small dense linear algebra: products, symmetric eigendecomposition,
//! symmetric matrix powers and general inverses.
//!
//! Everything runs in `f64` with a fixed summation order so identical inputs
//! produce bit-identical outputs.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{shape_err, Error, Result};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return shape_err(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            ));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return shape_err("ragged rows");
        }
        Self::from_vec(rows.len(), cols, rows.concat())
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m.data[i * values.len() + i] = *v;
        }
        m
    }

    pub fn randn<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let data = (0..rows * cols)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        Matrix { rows, cols, data }
    }

    /// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
    /// signs of `diag(R)` folded into `Q`.
    pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let a = Self::randn(n, n, rng);
        let (q, r) = a.qr();
        let mut q = q;
        for j in 0..n {
            if r.get(j, j) < 0.0 {
                for i in 0..n {
                    q.data[i * n + j] = -q.data[i * n + j];
                }
            }
        }
        q
    }

    /// Householder QR of a square matrix. `R` is exactly upper triangular.
    pub fn qr(&self) -> (Matrix, Matrix) {
        let n = self.rows;
        let mut r = self.clone();
        let mut reflectors = Vec::with_capacity(n);
        let mut dots = vec![0.0; n];
        for k in 0..n.saturating_sub(1) {
            let norm: f64 = (k..n).map(|i| r.get(i, k).powi(2)).sum::<f64>().sqrt();
            if norm == 0.0 {
                continue;
            }
            let alpha = if r.get(k, k) > 0.0 { -norm } else { norm };
            let mut v: Vec<f64> = (k..n).map(|i| r.get(i, k)).collect();
            v[0] -= alpha;
            let vnorm2: f64 = v.iter().map(|x| x * x).sum();
            if vnorm2 == 0.0 {
                continue;
            }
            // R <- H R with H = I - 2 v v^T / |v|^2, on the trailing block
            reflect_rows(&mut r.data, n, k, &v, vnorm2, &mut dots);
            for i in k + 1..n {
                r.data[i * n + k] = 0.0;
            }
            reflectors.push((k, v, vnorm2));
        }
        // Q = H_0 H_1 ... accumulated from the right end
        let mut q = Matrix::identity(n);
        for (k, v, vnorm2) in reflectors.iter().rev() {
            reflect_rows(&mut q.data, n, *k, v, *vnorm2, &mut dots);
        }
        (q, r)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }
}

/// Applies `I - 2 v vᵀ / vnorm2` to rows and columns `k..n` of a row-major
/// `n × n` buffer.
fn reflect_rows(data: &mut [f64], n: usize, k: usize, v: &[f64], vnorm2: f64, dots: &mut [f64]) {
    let dots = &mut dots[k..n];
    dots.fill(0.0);
    for (i, vi) in (k..n).zip(v) {
        for (d, x) in dots.iter_mut().zip(&data[i * n + k..(i + 1) * n]) {
            *d += vi * x;
        }
    }
    for d in dots.iter_mut() {
        *d = 2.0 * *d / vnorm2;
    }
    for (i, vi) in (k..n).zip(v) {
        for (x, f) in data[i * n + k..(i + 1) * n].iter_mut().zip(dots.iter()) {
            *x -= f * vi;
        }
    }
}

/// Symmetric matrix stored once as its lower triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    order: usize,
    packed: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(order: usize) -> Self {
        SymMatrix {
            order,
            packed: vec![0.0; order * (order + 1) / 2],
        }
    }

    pub fn identity(order: usize) -> Self {
        let mut m = Self::zeros(order);
        for i in 0..order {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Takes the lower triangle of a square matrix; the upper triangle is ignored.
    pub fn from_lower(m: &Matrix) -> Result<Self> {
        if m.rows != m.cols {
            return shape_err(format!("{}x{} is not square", m.rows, m.cols));
        }
        let mut s = Self::zeros(m.rows);
        for i in 0..m.rows {
            for j in 0..=i {
                s.set(i, j, m.get(i, j));
            }
        }
        Ok(s)
    }

    /// Symmetrizes as `(m + mᵀ) / 2`.
    pub fn from_matrix(m: &Matrix) -> Result<Self> {
        if m.rows != m.cols {
            return shape_err(format!("{}x{} is not square", m.rows, m.cols));
        }
        let mut s = Self::zeros(m.rows);
        for i in 0..m.rows {
            for j in 0..=i {
                s.set(i, j, 0.5 * (m.get(i, j) + m.get(j, i)));
            }
        }
        Ok(s)
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m.set(i, i, *v);
        }
        m
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    fn index(i: usize, j: usize) -> usize {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        r * (r + 1) / 2 + c
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.packed[Self::index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.packed[Self::index(i, j)] = v;
    }

    pub fn to_matrix(&self) -> Matrix {
        let n = self.order;
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = self.get(i, j);
            }
        }
        m
    }

    pub fn trace(&self) -> f64 {
        (0..self.order).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.to_matrix().frobenius()
    }

    pub fn max_abs_diff(&self, other: &SymMatrix) -> f64 {
        self.to_matrix().max_abs_diff(&other.to_matrix())
    }
}

/// `a · b` with the inner sum accumulated left to right.
pub fn matmul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols != b.rows {
        return shape_err(format!(
            "matmul inner extents differ: {}x{} · {}x{}",
            a.rows, a.cols, b.rows, b.cols
        ));
    }
    let mut out = Matrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        for j in 0..b.cols {
            let mut acc = 0.0;
            for k in 0..a.cols {
                acc += a.data[i * a.cols + k] * b.data[k * b.cols + j];
            }
            out.data[i * b.cols + j] = acc;
        }
    }
    Ok(out)
}

/// Eigenpairs of a symmetric matrix, eigenvalues descending and
/// eigenvectors stored as the columns of `vectors`.
#[derive(Clone, Debug)]
pub struct SymEig {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl SymEig {
    /// `E · diag(f(λ)) · Eᵀ`.
    pub fn recompose(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let n = self.values.len();
        let fl: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let mut out = SymMatrix::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += self.vectors.get(i, k) * fl[k] * self.vectors.get(j, k);
                }
                out.set(i, j, acc);
            }
        }
        out
    }
}

pub const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_REL_TOL: f64 = 1e-12;

/// Cyclic Jacobi eigendecomposition.
///
/// Iterates full sweeps over the upper triangle until the off-diagonal
/// Frobenius norm drops below `1e-12 · ‖m‖F`. Each eigenvector is
/// sign-normalized so its first nonzero component is positive.
pub fn sym_eig(m: &SymMatrix) -> Result<SymEig> {
    let n = m.order;
    let mut a = m.to_matrix();
    let mut v = Matrix::identity(n);
    let tol = JACOBI_REL_TOL * a.frobenius();

    let off_norm = |a: &Matrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a.get(i, j) * a.get(i, j);
                }
            }
        }
        s.sqrt()
    };

    let mut converged = off_norm(&a) <= tol;
    let mut sweeps = 0;
    while !converged {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps });
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                a.set(p, q, 0.0);
                a.set(q, p, 0.0);
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
        sweeps += 1;
        converged = off_norm(&a) <= tol;
    }

    let mut order: Vec<usize> = (0..n).collect();
    // stable sort keeps ties in original index order
    order.sort_by(|&i, &j| a.get(j, j).total_cmp(&a.get(i, i)));
    let values: Vec<f64> = order.iter().map(|&i| a.get(i, i)).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let sign = (0..n)
            .map(|k| v.get(k, src))
            .find(|x| x.abs() > 1e-12)
            .map_or(1.0, |x| x.signum());
        for k in 0..n {
            vectors.set(k, col, sign * v.get(k, src));
        }
    }
    Ok(SymEig { values, vectors })
}

const MIN_POW_FLOOR: f64 = 1e-30;

/// Default eigenvalue floor for [`sym_pow`]: `1e-8 · trace(m) / order`.
pub fn default_pow_floor(m: &SymMatrix) -> f64 {
    let c = m.order.max(1) as f64;
    (1e-8 * m.trace() / c).max(MIN_POW_FLOOR)
}

/// `E · diag(max(λ, eps)^p) · Eᵀ` for a positive semidefinite `m`.
///
/// Fails when an eigenvalue falls below `-max(eps, 1e-9·|trace|)`.
pub fn sym_pow(m: &SymMatrix, p: f64, eps: f64) -> Result<SymMatrix> {
    let eig = sym_eig(m)?;
    sym_pow_from_eig(&eig, m.trace(), p, eps)
}

pub(crate) fn sym_pow_from_eig(eig: &SymEig, trace: f64, p: f64, eps: f64) -> Result<SymMatrix> {
    let eps = eps.max(MIN_POW_FLOOR);
    let tolerance = eps.max(1e-9 * trace.abs());
    if let Some(&lowest) = eig.values.last() {
        if lowest < -tolerance {
            return Err(Error::NotPsd {
                eigenvalue: lowest,
                tolerance: -tolerance,
            });
        }
    }
    Ok(eig.recompose(|l| l.max(eps).powf(p)))
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn mat_inverse(m: &Matrix) -> Result<Matrix> {
    if m.rows != m.cols {
        return shape_err(format!("cannot invert {}x{} matrix", m.rows, m.cols));
    }
    let n = m.rows;
    let mut a = m.clone();
    let mut inv = Matrix::identity(n);
    for col in 0..n {
        let (pivot_row, pivot) = (col..n)
            .map(|r| (r, a.get(r, col)))
            .fold((col, 0.0f64), |best, (r, v)| {
                if v.abs() > best.1.abs() {
                    (r, v)
                } else {
                    best
                }
            });
        if pivot.abs() < 1e-12 {
            return Err(Error::Singular { column: col, pivot: pivot.abs() });
        }
        if pivot_row != col {
            for j in 0..n {
                a.data.swap(col * n + j, pivot_row * n + j);
                inv.data.swap(col * n + j, pivot_row * n + j);
            }
        }
        let scale = 1.0 / pivot;
        for j in 0..n {
            a.data[col * n + j] *= scale;
            inv.data[col * n + j] *= scale;
        }
        // columns left of `col` are already eliminated in every row
        let pivot_a = a.data[col * n + col..(col + 1) * n].to_vec();
        let pivot_inv = inv.data[col * n..(col + 1) * n].to_vec();
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a.get(r, col);
            if f == 0.0 {
                continue;
            }
            for (x, p) in a.data[r * n + col..(r + 1) * n].iter_mut().zip(&pivot_a) {
                *x -= f * p;
            }
            for (x, p) in inv.data[r * n..(r + 1) * n].iter_mut().zip(&pivot_inv) {
                *x -= f * p;
            }
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn naive_product(a: &Matrix, b: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(a.rows(), b.cols());
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                let mut s = 0.0;
                for k in 0..a.cols() {
                    s += a.get(i, k) * b.get(k, j);
                }
                out.set(i, j, s);
            }
        }
        out
    }

    fn random_sym(n: usize, rng: &mut ChaCha8Rng) -> SymMatrix {
        SymMatrix::from_matrix(&Matrix::randn(n, n, rng)).unwrap()
    }

    fn random_psd(n: usize, rng: &mut ChaCha8Rng) -> SymMatrix {
        let a = Matrix::randn(n, n, rng);
        SymMatrix::from_matrix(&matmul(&a, &a.transpose()).unwrap()).unwrap()
    }

    #[test]
    fn matmul_identity_and_permutation() {
        let m = Matrix::from_rows(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], &[7.0, 8.0, 9.0]]).unwrap();
        assert_eq!(matmul(&Matrix::identity(3), &m).unwrap(), m);
        let a = Matrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let p = Matrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let expected = Matrix::from_rows(&[&[2.0, 1.0], &[4.0, 3.0]]).unwrap();
        assert_eq!(matmul(&a, &p).unwrap(), expected);
    }

    #[test]
    fn matmul_matches_triple_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = Matrix::randn(5, 5, &mut rng);
        let b = Matrix::randn(5, 5, &mut rng);
        assert!(matmul(&a, &b).unwrap().max_abs_diff(&naive_product(&a, &b)) < 1e-12);
    }

    #[test]
    fn matmul_rejects_mismatch() {
        assert!(matches!(
            matmul(&Matrix::zeros(2, 3), &Matrix::zeros(2, 3)),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn eig_diagonal() {
        let e = sym_eig(&SymMatrix::diag(&[3.0, 1.0])).unwrap();
        assert_eq!(e.values, vec![3.0, 1.0]);
        assert_eq!(e.vectors, Matrix::identity(2));
        // ascending input is reordered
        let e = sym_eig(&SymMatrix::diag(&[1.0, 3.0])).unwrap();
        assert_eq!(e.values, vec![3.0, 1.0]);
        assert_eq!(e.vectors.get(1, 0), 1.0);
    }

    #[test]
    fn eig_two_by_two_by_hand() {
        // characteristic polynomial (2-λ)^2 - 1 = 0 gives λ = 3, 1
        let m = SymMatrix::from_lower(&Matrix::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap()).unwrap();
        let e = sym_eig(&m).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((e.vectors.get(0, 0) - r).abs() < 1e-14);
        assert!((e.vectors.get(1, 0) - r).abs() < 1e-14);
        assert!((e.vectors.get(0, 1) - r).abs() < 1e-14);
        assert!((e.vectors.get(1, 1) + r).abs() < 1e-14);
    }

    #[test]
    fn eig_reconstructs_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1, 2, 8, 17, 64] {
            let m = random_sym(n, &mut rng);
            let e = sym_eig(&m).unwrap();
            let rec = e.recompose(|l| l);
            assert!(rec.max_abs_diff(&m) < 1e-10, "order {n}");
            let vtv = matmul(&e.vectors.transpose(), &e.vectors).unwrap();
            assert!(vtv.max_abs_diff(&Matrix::identity(n)) < 1e-10);
            assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn eig_zero_matrix() {
        let e = sym_eig(&SymMatrix::zeros(3)).unwrap();
        assert_eq!(e.values, vec![0.0; 3]);
    }

    #[test]
    fn eig_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random_sym(12, &mut rng);
        let a = sym_eig(&m).unwrap();
        let b = sym_eig(&m).unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.vectors, b.vectors);
    }

    #[test]
    fn pow_identity_and_diagonal() {
        let i = SymMatrix::identity(4);
        assert!(sym_pow(&i, -0.5, 1e-12).unwrap().max_abs_diff(&i) < 1e-15);
        let d = sym_pow(&SymMatrix::diag(&[4.0, 1.0]), 0.5, 1e-12).unwrap();
        assert!(d.max_abs_diff(&SymMatrix::diag(&[2.0, 1.0])) < 1e-15);
    }

    #[test]
    fn pow_square_root_squares_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = random_psd(6, &mut rng);
        let r = sym_pow(&m, 0.5, default_pow_floor(&m)).unwrap().to_matrix();
        let sq = matmul(&r, &r).unwrap();
        assert!(sq.max_abs_diff(&m.to_matrix()) < 1e-9);
    }

    #[test]
    fn pow_whitener_times_colorer_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = random_psd(5, &mut rng);
        let eps = default_pow_floor(&m);
        let w = sym_pow(&m, -0.5, eps).unwrap().to_matrix();
        let c = sym_pow(&m, 0.5, eps).unwrap().to_matrix();
        assert!(matmul(&w, &c).unwrap().max_abs_diff(&Matrix::identity(5)) < 1e-9);
    }

    #[test]
    fn pow_rejects_indefinite() {
        let m = SymMatrix::diag(&[1.0, -1.0]);
        assert!(matches!(sym_pow(&m, 0.5, 1e-8), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn pow_rank_deficient_stays_finite() {
        let m = SymMatrix::diag(&[1.0, 0.0]);
        let w = sym_pow(&m, -0.5, default_pow_floor(&m)).unwrap();
        assert!(w.to_matrix().data().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn inverse_cases() {
        assert_eq!(mat_inverse(&Matrix::identity(3)).unwrap(), Matrix::identity(3));
        let d = mat_inverse(&Matrix::diag(&[2.0, 4.0])).unwrap();
        assert_eq!(d, Matrix::diag(&[0.5, 0.25]));
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut a = Matrix::randn(8, 8, &mut rng);
        for i in 0..8 {
            a.set(i, i, a.get(i, i) + 8.0);
        }
        let inv = mat_inverse(&a).unwrap();
        assert!(matmul(&a, &inv).unwrap().max_abs_diff(&Matrix::identity(8)) < 1e-9);
        assert!(matmul(&inv, &a).unwrap().max_abs_diff(&Matrix::identity(8)) < 1e-9);
    }

    #[test]
    fn inverse_singular() {
        let m = Matrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        assert!(matches!(mat_inverse(&m), Err(Error::Singular { .. })));
    }

    #[test]
    fn qr_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in [1, 2, 5, 16] {
            let a = Matrix::randn(n, n, &mut rng);
            let (q, r) = a.qr();
            assert!(matmul(&q, &r).unwrap().max_abs_diff(&a) < 1e-12);
            assert!(matmul(&q.transpose(), &q).unwrap().max_abs_diff(&Matrix::identity(n)) < 1e-12);
            for i in 0..n {
                for j in 0..i {
                    assert_eq!(r.get(i, j), 0.0);
                }
            }
        }
    }

    #[test]
    fn random_orthogonal_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q = Matrix::random_orthogonal(7, &mut rng);
        let qtq = matmul(&q.transpose(), &q).unwrap();
        assert!(qtq.max_abs_diff(&Matrix::identity(7)) < 1e-12);
    }

    #[test]
    fn sym_storage_mirrors() {
        let mut s = SymMatrix::zeros(3);
        s.set(0, 2, 5.0);
        assert_eq!(s.get(2, 0), 5.0);
        assert_eq!(s.to_matrix(), s.to_matrix().transpose());
    }
}
