//! Elementary symmetric functions of vectors and symmetric matrices.
//!
//! `S_k(λ)` is the k-th elementary symmetric polynomial of the entries of λ;
//! for a symmetric matrix `A`, `S_k(A) = S_k(λ(A))`. The derivative tensor
//! `S_k^{ij}(A) = ∂S_k/∂a_ij` is built with the classical recursion
//!
//! ```text
//! S_1^{ij} = δ_ij,    S_k^{ij} = S_{k-1} δ_ij − Σ_l S_{k-1}^{il} a_jl
//! ```
//!
//! and the Gårding cone `Γ_k = {λ : S_1(λ) > 0, …, S_k(λ) > 0}` is exposed
//! through [`cone_membership`].

use thiserror::Error;

use crate::scalar::{binomial, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymError {
    #[error("vector must have at least one entry")]
    Empty,
    #[error("entry {index} is not finite")]
    NonFinite { index: usize },
    #[error("order {order} outside 1..={n}")]
    InvalidOrder { order: usize, n: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("vector lies outside Γ_{order} (margin {margin:e})")]
    OutsideCone { order: usize, margin: f64 },
}

/// Eigenvalue-like vector λ = (λ_1, …, λ_n).
#[derive(Debug, Clone, PartialEq)]
pub struct SymVec<T>(Vec<T>);

impl<T: Real> SymVec<T> {
    pub fn new(entries: Vec<T>) -> Result<Self, SymError> {
        if entries.is_empty() {
            return Err(SymError::Empty);
        }
        if let Some(index) = entries.iter().position(|x| !x.is_finite()) {
            return Err(SymError::NonFinite { index });
        }
        Ok(Self(entries))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    /// Copy of λ with entry `i` removed, written `λ|i`.
    pub fn without(&self, i: usize) -> Vec<T> {
        self.0
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &x)| x)
            .collect()
    }
}

/// Dense symmetric matrix, stored row-major and symmetrized on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMat<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> SymMat<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![T::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![T::one(); n])
    }

    pub fn diag(d: &[T]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n);
        for (i, &x) in d.iter().enumerate() {
            m.data[i * n + i] = x;
        }
        m
    }

    /// Builds from a row-major `n × n` buffer; entries are replaced by
    /// `(a_ij + a_ji) / 2`.
    pub fn from_row_major(n: usize, data: Vec<T>) -> Result<Self, SymError> {
        if data.len() != n * n {
            return Err(SymError::DimensionMismatch { expected: n * n, got: data.len() });
        }
        if let Some(index) = data.iter().position(|x| !x.is_finite()) {
            return Err(SymError::NonFinite { index });
        }
        let mut m = Self { n, data };
        m.symmetrize();
        Ok(m)
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        let mut m = Self { n, data };
        m.symmetrize();
        m
    }

    fn symmetrize(&mut self) {
        let n = self.n;
        let half = T::lit(0.5);
        for i in 0..n {
            for j in (i + 1)..n {
                let s = (self.data[i * n + j] + self.data[j * n + i]) * half;
                self.data[i * n + j] = s;
                self.data[j * n + i] = s;
            }
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn trace(&self) -> T {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn scaled(&self, c: T) -> Self {
        Self { n: self.n, data: self.data.iter().map(|&x| x * c).collect() }
    }

    pub fn add_diag(&self, c: T) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            m.data[i * self.n + i] = m.data[i * self.n + i] + c;
        }
        m
    }

    /// Plain matrix product; the result is not assumed symmetric.
    pub fn mul_dense(&self, other: &Self) -> Vec<T> {
        let n = self.n;
        let mut out = vec![T::zero(); n * n];
        for i in 0..n {
            for l in 0..n {
                let a = self.data[i * n + l];
                if a == T::zero() {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] = out[i * n + j] + a * other.data[l * n + j];
                }
            }
        }
        out
    }

    /// `v^T A w`.
    pub fn bilinear(&self, v: &[T], w: &[T]) -> T {
        let n = self.n;
        let mut acc = T::zero();
        for i in 0..n {
            let mut row = T::zero();
            for j in 0..n {
                row = row + self.data[i * n + j] * w[j];
            }
            acc = acc + v[i] * row;
        }
        acc
    }

    /// `A v`.
    pub fn apply(&self, v: &[T]) -> Vec<T> {
        let n = self.n;
        (0..n)
            .map(|i| (0..n).map(|j| self.data[i * n + j] * v[j]).sum())
            .collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max)
    }

    pub fn frobenius(&self) -> T {
        self.data.iter().map(|&x| x * x).sum::<T>().sqrt()
    }

    /// Symmetric eigendecomposition by cyclic Jacobi rotations.
    ///
    /// Returns eigenvalues in ascending order and the matching eigenvectors
    /// as columns of a row-major matrix.
    pub fn eigen(&self) -> (Vec<T>, Vec<T>) {
        jacobi_eigen(self.n, self.data.clone())
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        self.eigen().0
    }
}

fn jacobi_eigen<T: Real>(n: usize, mut a: Vec<T>) -> (Vec<T>, Vec<T>) {
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    let scale = a.iter().map(|x| x.abs()).fold(T::zero(), T::max);
    if scale == T::zero() {
        return (vec![T::zero(); n], v);
    }
    let tiny = T::epsilon() * T::epsilon() * scale * scale;
    for _sweep in 0..100 {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off + a[p * n + q] * a[p * n + q];
            }
        }
        if off <= tiny {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let sign = if theta >= T::zero() { T::one() } else { -T::one() };
                let t = sign / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for r in 0..n {
                    let arp = a[r * n + p];
                    let arq = a[r * n + q];
                    a[r * n + p] = c * arp - s * arq;
                    a[r * n + q] = s * arp + c * arq;
                }
                for r in 0..n {
                    let apr = a[p * n + r];
                    let aqr = a[q * n + r];
                    a[p * n + r] = c * apr - s * aqr;
                    a[q * n + r] = s * apr + c * aqr;
                }
                for r in 0..n {
                    let vrp = v[r * n + p];
                    let vrq = v[r * n + q];
                    v[r * n + p] = c * vrp - s * vrq;
                    v[r * n + q] = s * vrp + c * vrq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].partial_cmp(&a[j * n + j]).unwrap());
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = vec![T::zero(); n * n];
    for (col, &src) in order.iter().enumerate() {
        for r in 0..n {
            vectors[r * n + col] = v[r * n + src];
        }
    }
    (values, vectors)
}

/// Order pair (n, k) defining the cone Γ_k ⊂ R^n.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConeSpec {
    pub n: usize,
    pub k: usize,
}

impl ConeSpec {
    pub fn new(n: usize, k: usize) -> Result<Self, SymError> {
        if k == 0 || k > n {
            return Err(SymError::InvalidOrder { order: k, n });
        }
        Ok(Self { n, k })
    }
}

/// `S_k` of a plain slice by the prefix recurrence `e_j ← e_j + x e_{j-1}`.
pub fn sigma_slice<T: Real>(v: &[T], k: usize) -> T {
    if k == 0 {
        return T::one();
    }
    if k > v.len() {
        return T::zero();
    }
    let mut e = vec![T::zero(); k + 1];
    e[0] = T::one();
    for (i, &x) in v.iter().enumerate() {
        for j in (1..=k.min(i + 1)).rev() {
            e[j] = e[j] + x * e[j - 1];
        }
    }
    e[k]
}

/// All of `S_0, …, S_kmax` in one pass.
pub fn sigma_all<T: Real>(v: &[T], kmax: usize) -> Vec<T> {
    let mut e = vec![T::zero(); kmax + 1];
    e[0] = T::one();
    for (i, &x) in v.iter().enumerate() {
        for j in (1..=kmax.min(i + 1)).rev() {
            e[j] = e[j] + x * e[j - 1];
        }
    }
    e
}

pub fn sigma<T: Real>(v: &SymVec<T>, k: usize) -> T {
    sigma_slice(v.as_slice(), k)
}

/// Dimension up to which `sigma_matrix` sums principal minors.
pub const MINOR_SUM_MAX_DIM: usize = 6;

/// `S_k(A)`: principal-minor sum for small matrices, eigenvalues beyond.
pub fn sigma_matrix<T: Real>(a: &SymMat<T>, k: usize) -> T {
    let n = a.dim();
    if k == 0 {
        return T::one();
    }
    if k > n {
        return T::zero();
    }
    if n <= MINOR_SUM_MAX_DIM {
        sigma_matrix_minors(a, k)
    } else {
        sigma_slice(&a.eigenvalues(), k)
    }
}

/// Sum of all k × k principal minors.
pub fn sigma_matrix_minors<T: Real>(a: &SymMat<T>, k: usize) -> T {
    let n = a.dim();
    if k == 0 {
        return T::one();
    }
    if k > n {
        return T::zero();
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut sub = vec![T::zero(); k * k];
    let mut total = T::zero();
    loop {
        for (r, &i) in idx.iter().enumerate() {
            for (c, &j) in idx.iter().enumerate() {
                sub[r * k + c] = a.get(i, j);
            }
        }
        total = total + determinant(k, &mut sub);
        // next k-combination in lexicographic order
        let mut pos = k;
        while pos > 0 && idx[pos - 1] == n - k + pos - 1 {
            pos -= 1;
        }
        if pos == 0 {
            break;
        }
        idx[pos - 1] += 1;
        for p in pos..k {
            idx[p] = idx[p - 1] + 1;
        }
    }
    total
}

/// Determinant by Gaussian elimination with partial pivoting (destroys `m`).
fn determinant<T: Real>(k: usize, m: &mut [T]) -> T {
    let mut det = T::one();
    for col in 0..k {
        let mut piv = col;
        for r in (col + 1)..k {
            if m[r * k + col].abs() > m[piv * k + col].abs() {
                piv = r;
            }
        }
        if m[piv * k + col] == T::zero() {
            return T::zero();
        }
        if piv != col {
            for c in 0..k {
                m.swap(col * k + c, piv * k + c);
            }
            det = -det;
        }
        let p = m[col * k + col];
        det = det * p;
        for r in (col + 1)..k {
            let f = m[r * k + col] / p;
            if f == T::zero() {
                continue;
            }
            for c in col..k {
                m[r * k + c] = m[r * k + c] - f * m[col * k + c];
            }
        }
    }
    det
}

/// Derivative tensor `S_k^{ij}(A)` together with `S_0(A), …, S_k(A)`.
///
/// The intermediate `S_j` needed by the recursion are read off the previous
/// stage through Euler's relation `S_j^{ab} a_ab = j S_j`.
pub fn sigma_grad_with_values<T: Real>(a: &SymMat<T>, k: usize) -> (SymMat<T>, Vec<T>) {
    let n = a.dim();
    let mut values = vec![T::one()];
    if k == 0 {
        return (SymMat::zeros(n), values);
    }
    let mut g = SymMat::identity(n);
    values.push(a.trace());
    for j in 2..=k {
        let ga = g.mul_dense(a);
        let s_prev = values[j - 1];
        let mut next = vec![T::zero(); n * n];
        for r in 0..n {
            for c in 0..n {
                let delta = if r == c { s_prev } else { T::zero() };
                next[r * n + c] = delta - ga[r * n + c];
            }
        }
        g = SymMat::from_fn(n, |r, c| next[r * n + c]);
        let sj = trace_product(&g, a) / T::from_usize_lossy(j);
        values.push(sj);
    }
    (g, values)
}

/// `S_k^{ij}(A)`, zero matrix when k = 0.
pub fn sigma_grad<T: Real>(a: &SymMat<T>, k: usize) -> SymMat<T> {
    sigma_grad_with_values(a, k).0
}

/// `S_k^{ij}(A)` from the eigendecomposition: `Q diag(S_{k-1}(λ|i)) Q^T`.
pub fn sigma_grad_spectral<T: Real>(a: &SymMat<T>, k: usize) -> SymMat<T> {
    let n = a.dim();
    if k == 0 {
        return SymMat::zeros(n);
    }
    let (lam, q) = a.eigen();
    let lam = SymVec(lam);
    let d: Vec<T> = (0..n).map(|i| sigma_slice(&lam.without(i), k - 1)).collect();
    SymMat::from_fn(n, |r, c| (0..n).map(|i| q[r * n + i] * d[i] * q[c * n + i]).sum())
}

/// `tr(B A) = Σ_ij b_ij a_ij` for symmetric arguments.
pub fn trace_product<T: Real>(b: &SymMat<T>, a: &SymMat<T>) -> T {
    b.as_slice().iter().zip(a.as_slice()).map(|(&x, &y)| x * y).sum()
}

/// Position of a vector relative to Γ_k.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeVerdict {
    Inside,
    Boundary,
    Outside,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeMembership<T> {
    pub verdict: ConeVerdict,
    /// `min_{1≤i≤k} S_i(v)`.
    pub margin: T,
}

/// Classifies `v` against Γ_k with slack `tau` (`tau = 0` is the open cone).
pub fn cone_membership<T: Real>(
    v: &SymVec<T>,
    spec: ConeSpec,
    tau: T,
) -> Result<ConeMembership<T>, SymError> {
    if v.len() != spec.n {
        return Err(SymError::DimensionMismatch { expected: spec.n, got: v.len() });
    }
    let s = sigma_all(v.as_slice(), spec.k);
    let margin = s[1..].iter().copied().fold(T::infinity(), T::min);
    let verdict = if margin > tau {
        ConeVerdict::Inside
    } else if margin >= -tau {
        ConeVerdict::Boundary
    } else {
        ConeVerdict::Outside
    };
    Ok(ConeMembership { verdict, margin })
}

/// True iff `v ∈ Γ_k` (open cone).
pub fn gamma_cone_contains<T: Real>(v: &SymVec<T>, spec: ConeSpec) -> Result<bool, SymError> {
    Ok(cone_membership(v, spec, T::zero())?.verdict == ConeVerdict::Inside)
}

/// `(S_m/C(n,m))^{1/m} − (S_l/C(n,l))^{1/l}` for `v ∈ Γ_l`, `1 ≤ m ≤ l ≤ n`.
pub fn newton_maclaurin_gap<T: Real>(v: &SymVec<T>, m: usize, l: usize) -> Result<T, SymError> {
    let n = v.len();
    if m == 0 || m > l {
        return Err(SymError::InvalidOrder { order: m, n: l });
    }
    if l > n {
        return Err(SymError::InvalidOrder { order: l, n });
    }
    let cm = cone_membership(v, ConeSpec { n, k: l }, T::zero())?;
    if cm.verdict != ConeVerdict::Inside {
        return Err(SymError::OutsideCone { order: l, margin: cm.margin.to_f64().unwrap_or(f64::NAN) });
    }
    let s = sigma_all(v.as_slice(), l);
    let norm = |j: usize| (s[j] / binomial::<T>(n, j)).powf(T::one() / T::from_usize_lossy(j));
    Ok(norm(m) - norm(l))
}

/// Max-abs residuals of the three matrix identities for `S_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixIdentityResiduals<T> {
    /// Recursive `S_k^{ij}` against the spectral closed form.
    pub recursion: T,
    /// `S_k^{ij} a_il a_lj − (S_1 S_k − (k+1) S_{k+1})`.
    pub reilly: T,
    /// `S_k^{ij} δ_ij − (n−k+1) S_{k−1}`.
    pub trace: T,
}

impl<T: Real> MatrixIdentityResiduals<T> {
    pub fn max(&self) -> T {
        self.recursion.max(self.reilly).max(self.trace)
    }
}

pub fn verify_matrix_identities<T: Real>(
    a: &SymMat<T>,
    k: usize,
) -> Result<MatrixIdentityResiduals<T>, SymError> {
    let n = a.dim();
    if k == 0 || k > n {
        return Err(SymError::InvalidOrder { order: k, n });
    }
    let g = sigma_grad(a, k);
    let recursion = g.max_abs_diff(&sigma_grad_spectral(a, k));

    let a2 = SymMat::from_fn(n, {
        let p = a.mul_dense(a);
        move |i, j| p[i * n + j]
    });
    let lhs = trace_product(&g, &a2);
    let rhs = sigma_matrix(a, 1) * sigma_matrix(a, k)
        - T::from_usize_lossy(k + 1) * sigma_matrix(a, k + 1);
    let reilly = (lhs - rhs).abs();

    let trace = (g.trace() - T::from_usize_lossy(n - k + 1) * sigma_matrix(a, k - 1)).abs();
    Ok(MatrixIdentityResiduals { recursion, reilly, trace })
}

/// `k S_k(λ) = Σ_α S_{k−1}(λ|α) λ_α`; returns the absolute residual.
pub fn euler_sum_residual<T: Real>(v: &SymVec<T>, k: usize) -> T {
    let lhs = T::from_usize_lossy(k) * sigma(v, k);
    let rhs: T = (0..v.len())
        .map(|i| sigma_slice(&v.without(i), k.saturating_sub(1)) * v.as_slice()[i])
        .sum();
    if k == 0 {
        lhs
    } else {
        (lhs - rhs).abs()
    }
}
