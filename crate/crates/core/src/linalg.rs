//! Small dense complex linear algebra: inner products, Gram–Schmidt, a
//! row-major square matrix with a matrix exponential, and Haar sampling.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::ops::{Index, IndexMut, Mul};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// `<a|b>`, conjugate-linear in the first argument.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sqr(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    norm_sqr(a).sqrt()
}

pub fn scale(a: &[C64], s: C64) -> Vec<C64> {
    a.iter().map(|x| x * s).collect()
}

/// `a -= s * b`
pub fn axpy_sub(a: &mut [C64], s: C64, b: &[C64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x -= s * y;
    }
}

/// Result of orthonormalising a list of vectors.
#[derive(Debug, Clone)]
pub struct GramSchmidt {
    pub vectors: Vec<Vec<C64>>,
    /// Norm of each input after removing its projection onto the earlier
    /// ones, relative to its own norm.
    pub residuals: Vec<f64>,
}

impl GramSchmidt {
    pub fn min_residual(&self) -> f64 {
        self.residuals.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Modified Gram–Schmidt with one re-orthogonalisation pass.
///
/// Inputs whose relative residual falls below `drop_tol` are skipped (their
/// residual is still recorded).
pub fn gram_schmidt(inputs: &[Vec<C64>], drop_tol: f64) -> GramSchmidt {
    let mut vectors: Vec<Vec<C64>> = Vec::with_capacity(inputs.len());
    let mut residuals = Vec::with_capacity(inputs.len());
    for v in inputs {
        let n0 = norm(v);
        if n0 == 0.0 {
            residuals.push(0.0);
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &vectors {
                let p = inner(q, &w);
                axpy_sub(&mut w, p, q);
            }
        }
        let n = norm(&w);
        residuals.push(n / n0);
        if n / n0 > drop_tol {
            vectors.push(scale(&w, C64::new(1.0 / n, 0.0)));
        }
    }
    GramSchmidt { vectors, residuals }
}

/// Completes an orthonormal set in `C^dim` with standard-basis directions.
pub fn orthogonal_complement(set: &[Vec<C64>], dim: usize) -> Vec<Vec<C64>> {
    let mut all: Vec<Vec<C64>> = set.to_vec();
    let mut extra = Vec::new();
    for k in 0..dim {
        if all.len() == dim {
            break;
        }
        let mut e = vec![ZERO; dim];
        e[k] = ONE;
        let gs = gram_schmidt(&[e], 0.0);
        let mut w = gs.vectors[0].clone();
        for _ in 0..2 {
            for q in &all {
                let p = inner(q, &w);
                axpy_sub(&mut w, p, q);
            }
        }
        let n = norm(&w);
        if n > 1e-6 {
            let w = scale(&w, C64::new(1.0 / n, 0.0));
            all.push(w.clone());
            extra.push(w);
        }
    }
    extra
}

/// Dense square complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix whose `j`-th column is `columns[j]`.
    pub fn from_columns(columns: &[Vec<C64>]) -> Self {
        let n = columns.len();
        let mut m = Self::zeros(n);
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), n, "from_columns needs a square layout");
            for (i, &x) in col.iter().enumerate() {
                m[(i, j)] = x;
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }

    pub fn columns(&self) -> Vec<Vec<C64>> {
        (0..self.n).map(|j| self.column(j)).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Max-row-sum norm.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest entry of `|U^† U - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let p = &self.adjoint() * self;
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                let target = if i == j { ONE } else { ZERO };
                worst = worst.max((p[(i, j)] - target).norm());
            }
        }
        worst
    }

    /// Matrix exponential by scaling and squaring of a truncated Taylor series.
    pub fn expm(&self) -> Self {
        let norm = self.norm_inf();
        let mut squarings = 0u32;
        if norm > 0.25 {
            squarings = (norm / 0.25).log2().ceil() as u32;
        }
        let a = self.scaled(C64::new(0.5f64.powi(squarings as i32), 0.0));
        let mut result = Self::identity(self.n);
        let mut term = Self::identity(self.n);
        // ||a|| <= 1/4, so the tail after term k is below 2 * 4^-k / k!
        for k in 1..=18 {
            term = (&term * &a).scaled(C64::new(1.0 / k as f64, 0.0));
            result = result.add(&term);
            if term.norm_inf() < 1e-18 {
                break;
            }
        }
        for _ in 0..squarings {
            result = &result * &result;
        }
        result
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

/// Hermitian matrix with zero diagonal built from `n(n-1)` real parameters,
/// consumed as (re, im) pairs of the strict upper triangle in row order.
pub fn offdiag_hermitian(n: usize, params: &[f64]) -> CMatrix {
    assert_eq!(params.len(), n * (n - 1));
    let mut h = CMatrix::zeros(n);
    let mut k = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            let z = C64::new(params[k], params[k + 1]);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
            k += 2;
        }
    }
    h
}

/// Hermitian matrix with i.i.d. standard complex Gaussian off-diagonal
/// entries and real Gaussian diagonal.
pub fn gaussian_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let mut h = CMatrix::zeros(n);
    for i in 0..n {
        h[(i, i)] = C64::new(rng.sample(StandardNormal), 0.0);
        for j in (i + 1)..n {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let z = C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

/// Haar-distributed unitary: Gaussian matrix orthonormalised column by
/// column. Gram–Schmidt yields a QR factor with positive real diagonal in R,
/// which is exactly the phase fix that makes Q Haar.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    loop {
        let cols: Vec<Vec<C64>> = (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        C64::new(re, im)
                    })
                    .collect()
            })
            .collect();
        let gs = gram_schmidt(&cols, 1e-9);
        if gs.vectors.len() == n {
            return CMatrix::from_columns(&gs.vectors);
        }
    }
}

/// Haar-random unit vector.
pub fn haar_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..n)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                C64::new(re, im)
            })
            .collect();
        let n0 = norm(&v);
        if n0 > 1e-12 {
            return scale(&v, C64::new(1.0 / n0, 0.0));
        }
    }
}
