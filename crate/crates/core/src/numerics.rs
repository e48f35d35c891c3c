//! Minimal dense linear algebra over small complex and real square matrices.
//!
//! Everything here targets the dimensions this crate actually uses (local
//! dimensions 2..4, so matrices up to 16x16 and oracle workspaces up to
//! 256x256). The eigensolver is a cyclic Jacobi iteration for Hermitian
//! matrices; singular values of the small real correlation blocks are routed
//! through it. All operations are pure: inputs are borrowed, outputs are
//! fresh values.

// Index loops mirror the textbook matrix formulas throughout.
#![allow(clippy::needless_range_loop)]

use num_complex::Complex64 as C64;
use thiserror::Error;

/// Absolute tolerance for Hermiticity checks.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Eigenvalues in `[-PSD_TOL, 0)` are clamped to zero; below that is an error.
pub const PSD_TOL: f64 = 1e-10;

/// Off-diagonal Frobenius norm at which the Jacobi sweep stops.
const JACOBI_OFF_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("matrix is not Hermitian: max |m - m^dag| = {0:.3e}")]
    NonHermitian(f64),
    #[error("matrix is not positive semidefinite: eigenvalue {0:.3e}")]
    NotPsd(f64),
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
    #[error(
        "complex eigenvalue pair (|Im| = {0:.3e}) on a matrix expected to have a real spectrum"
    )]
    ComplexSpectrum(f64),
}

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

/// Dense square real matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        Self {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, C64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Self {
        let dim = rows.len();
        assert!(
            rows.iter().all(|r| r.len() == dim),
            "rows must form a square matrix"
        );
        Self {
            dim,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Diagonal matrix from real entries.
    pub fn diag(entries: &[f64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m.set(i, i, C64::new(e, 0.0));
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch in matrix product");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Self {
            dim: self.dim,
            data,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Self {
            dim: self.dim,
            data,
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i).conj())
    }

    /// Entrywise complex conjugate (no transpose).
    pub fn conjugate(&self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|a| a.conj()).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i))
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Max deviation from Hermiticity, `max_ij |m_ij - conj(m_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `(m + m^dag) / 2`: exact Hermitian projection, used to scrub rounding noise.
    pub fn hermitize(&self) -> Self {
        self.add(&self.adjoint()).scale_re(0.5)
    }

    pub fn finite(&self) -> bool {
        self.data
            .iter()
            .all(|a| a.re.is_finite() && a.im.is_finite())
    }
}

impl RealMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let dim = rows.len();
        assert!(
            rows.iter().all(|r| r.len() == dim),
            "rows must form a square matrix"
        );
        Self {
            dim,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn diag(entries: &[f64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m.set(i, i, e);
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch in matrix product");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i))
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.abs()).fold(0.0, f64::max)
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.dim, |i, j| C64::new(self.get(i, j), 0.0))
    }

    pub fn finite(&self) -> bool {
        self.data.iter().all(|a| a.is_finite())
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues sorted descending and the matching orthonormal
/// eigenvectors as the columns of the returned matrix, so that
/// `m = V diag(lambda) V^dag`.
pub fn herm_eig(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix), NumericsError> {
    let defect = m.hermiticity_defect();
    if defect > HERMITICITY_TOL {
        return Err(NumericsError::NonHermitian(defect));
    }
    let n = m.dim();
    // Exact Hermitian projection so the iteration sees a clean input.
    let mut a = m.hermitize();
    let mut v = ComplexMatrix::identity(n);

    let off_norm = |a: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                s += 2.0 * a.get(p, q).norm_sqr();
            }
        }
        s.sqrt()
    };

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_norm(&a) <= JACOBI_OFF_TOL {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let beta = a.get(p, q);
                let beta_abs = beta.norm();
                if beta_abs < 1e-300 {
                    continue;
                }
                let phase = beta / beta_abs; // e^{i phi}
                let alpha = a.get(p, p).re;
                let gamma = a.get(q, q).re;
                let theta = (alpha - gamma) / (2.0 * beta_abs);
                // Smaller-magnitude tangent root of |b| t^2 + (alpha-gamma) t - |b| = 0.
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = phase.conj() * (t * c); // s = t c e^{-i phi}
                let s_conj = s.conj();

                // A <- U^dag A U with U = I except U_pp=c, U_pq=-conj(s), U_qp=s, U_qq=c.
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, akp * c + akq * s);
                    a.set(k, q, akp * (-s_conj) + akq * c);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, apk * c + aqk * s_conj);
                    a.set(q, k, apk * (-s) + aqk * c);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, vkp * c + vkq * s);
                    v.set(k, q, vkp * (-s_conj) + vkq * c);
                }
            }
        }
    }
    if !converged && off_norm(&a) > JACOBI_OFF_TOL {
        return Err(NumericsError::NoConvergence);
    }

    let mut order: Vec<usize> = (0..n).collect();
    let vals: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
    order.sort_by(|&i, &j| vals[j].partial_cmp(&vals[i]).unwrap());
    let sorted_vals: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
    let sorted_vecs = ComplexMatrix::from_fn(n, |i, j| v.get(i, order[j]));
    Ok((sorted_vals, sorted_vecs))
}

/// Eigenvalues only, for callers that do not need the basis.
pub fn herm_eigvals(m: &ComplexMatrix) -> Result<Vec<f64>, NumericsError> {
    herm_eig(m).map(|(vals, _)| vals)
}

/// Singular values of a real square matrix, descending and nonnegative.
///
/// Computed as the square roots of the eigenvalues of `m^T m`; the blocks
/// handled here are 3x3 or 4x4 correlation matrices.
pub fn singular_values_desc(m: &RealMatrix) -> Vec<f64> {
    let mtm = m.transpose().mul(m);
    let (vals, _) = herm_eig(&mtm.to_complex()).expect("m^T m is symmetric by construction");
    vals.into_iter().map(|x| x.max(0.0).sqrt()).collect()
}

/// Hermitian PSD square root via eigendecomposition.
///
/// Eigenvalues in `[-PSD_TOL, 0)` are clamped to zero; anything lower is
/// rejected as not positive semidefinite.
pub fn psd_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix, NumericsError> {
    let (vals, vecs) = herm_eig(m)?;
    if let Some(&bad) = vals.iter().find(|&&x| x < -PSD_TOL) {
        return Err(NumericsError::NotPsd(bad));
    }
    let n = m.dim();
    let mut root = ComplexMatrix::zeros(n);
    // V sqrt(Lambda) V^dag
    for i in 0..n {
        for j in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                let lam = vals[k].max(0.0).sqrt();
                acc += vecs.get(i, k) * lam * vecs.get(j, k).conj();
            }
            root.set(i, j, acc);
        }
    }
    Ok(root.hermitize())
}

/// Kronecker product; block `(i, j)` of the result is `a_ij * b`.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (na, nb) = (a.dim(), b.dim());
    let n = na * nb;
    let mut out = ComplexMatrix::zeros(n);
    for ia in 0..na {
        for ja in 0..na {
            let aij = a.get(ia, ja);
            if aij.norm_sqr() == 0.0 {
                continue;
            }
            for ib in 0..nb {
                for jb in 0..nb {
                    out.set(ia * nb + ib, ja * nb + jb, aij * b.get(ib, jb));
                }
            }
        }
    }
    out
}

/// Partial trace over the factors *not* listed in `keep`.
///
/// `factor_dims` lists the tensor factors in row-major (big-endian) order;
/// their product must equal the matrix dimension. Kept factors stay in their
/// original relative order.
pub fn partial_trace(
    m: &ComplexMatrix,
    factor_dims: &[usize],
    keep: &[usize],
) -> Result<ComplexMatrix, NumericsError> {
    let total: usize = factor_dims.iter().product();
    if total != m.dim() {
        return Err(NumericsError::DimMismatch(format!(
            "factor dims {:?} give {}, matrix has dim {}",
            factor_dims,
            total,
            m.dim()
        )));
    }
    let k = factor_dims.len();
    let mut sorted_keep = keep.to_vec();
    sorted_keep.sort_unstable();
    sorted_keep.dedup();
    if sorted_keep.iter().any(|&i| i >= k) || sorted_keep.len() != keep.len() {
        return Err(NumericsError::DimMismatch(format!(
            "keep set {:?} invalid for {} factors",
            keep, k
        )));
    }
    let kept_dim: usize = sorted_keep.iter().map(|&i| factor_dims[i]).product();
    let mut out = ComplexMatrix::zeros(kept_dim);

    let decompose = |mut idx: usize, digits: &mut [usize]| {
        for f in (0..k).rev() {
            digits[f] = idx % factor_dims[f];
            idx /= factor_dims[f];
        }
    };
    let mut rdig = vec![0usize; k];
    let mut cdig = vec![0usize; k];
    for row in 0..m.dim() {
        decompose(row, &mut rdig);
        'cols: for col in 0..m.dim() {
            decompose(col, &mut cdig);
            let mut out_r = 0usize;
            let mut out_c = 0usize;
            for f in 0..k {
                if sorted_keep.contains(&f) {
                    out_r = out_r * factor_dims[f] + rdig[f];
                    out_c = out_c * factor_dims[f] + cdig[f];
                } else if rdig[f] != cdig[f] {
                    continue 'cols;
                }
            }
            let v = out.get(out_r, out_c) + m.get(row, col);
            out.set(out_r, out_c, v);
        }
    }
    Ok(out)
}

/// Determinant by LU decomposition with partial pivoting.
pub fn determinant(m: &ComplexMatrix) -> C64 {
    let n = m.dim();
    let mut lu = m.clone();
    let mut det = C64::new(1.0, 0.0);
    for col in 0..n {
        let mut pivot = col;
        let mut best = lu.get(col, col).norm();
        for r in (col + 1)..n {
            let mag = lu.get(r, col).norm();
            if mag > best {
                best = mag;
                pivot = r;
            }
        }
        if best == 0.0 {
            return C64::new(0.0, 0.0);
        }
        if pivot != col {
            for j in 0..n {
                let tmp = lu.get(col, j);
                lu.set(col, j, lu.get(pivot, j));
                lu.set(pivot, j, tmp);
            }
            det = -det;
        }
        let p = lu.get(col, col);
        det *= p;
        for r in (col + 1)..n {
            let factor = lu.get(r, col) / p;
            if factor.norm_sqr() == 0.0 {
                continue;
            }
            for j in col..n {
                let v = lu.get(r, j) - factor * lu.get(col, j);
                lu.set(r, j, v);
            }
        }
    }
    det
}

/// Real determinant, same LU scheme.
pub fn determinant_real(m: &RealMatrix) -> f64 {
    let n = m.dim();
    let mut lu = m.clone();
    let mut det = 1.0;
    for col in 0..n {
        let mut pivot = col;
        let mut best = lu.get(col, col).abs();
        for r in (col + 1)..n {
            let mag = lu.get(r, col).abs();
            if mag > best {
                best = mag;
                pivot = r;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for j in 0..n {
                let tmp = lu.get(col, j);
                lu.set(col, j, lu.get(pivot, j));
                lu.set(pivot, j, tmp);
            }
            det = -det;
        }
        let p = lu.get(col, col);
        det *= p;
        for r in (col + 1)..n {
            let factor = lu.get(r, col) / p;
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                let v = lu.get(r, j) - factor * lu.get(col, j);
                lu.set(r, j, v);
            }
        }
    }
    det
}

/// Eigenvalues of a small real matrix whose spectrum is expected to be real,
/// sorted descending.
///
/// The matrix is split into irreducible blocks by its sparsity pattern, each
/// block is reduced to Hessenberg form and iterated with shifted QR steps.
/// A terminal 2x2 block with a conjugate pair of magnitude above `im_tol`
/// is reported as `ComplexSpectrum`; below that the pair collapses onto its
/// common real part (a doubly degenerate real eigenvalue seen through
/// rounding noise).
pub(crate) fn real_spectrum_eigenvalues(
    m: &RealMatrix,
    im_tol: f64,
) -> Result<Vec<f64>, NumericsError> {
    let n = m.dim();
    let scale = m.max_abs();
    if scale == 0.0 {
        return Ok(vec![0.0; n]);
    }

    // Union-find on the symmetrized support: independent blocks are solved
    // separately, which keeps the common X-form case on exact 2x2 formulas.
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let support_tol = 1e-14 * scale;
    for i in 0..n {
        for j in (i + 1)..n {
            if m.get(i, j).abs() > support_tol || m.get(j, i).abs() > support_tol {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
    let mut blocks: Vec<(usize, Vec<usize>)> = Vec::new();
    for (i, &r) in roots.iter().enumerate() {
        match blocks.iter_mut().find(|(root, _)| *root == r) {
            Some((_, b)) => b.push(i),
            None => blocks.push((r, vec![i])),
        }
    }
    let blocks: Vec<Vec<usize>> = blocks.into_iter().map(|(_, b)| b).collect();

    let mut vals = Vec::with_capacity(n);
    for block in &blocks {
        let b = block.len();
        let sub = RealMatrix::from_fn(b, |i, j| m.get(block[i], block[j]));
        match b {
            1 => vals.push(sub.get(0, 0)),
            2 => {
                let (x, y) = eig2(&sub, im_tol)?;
                vals.push(x);
                vals.push(y);
            }
            _ => vals.extend(qr_eigenvalues(&sub, im_tol)?),
        }
    }
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(vals)
}

/// Eigenvalues of a real 2x2 block; near-real conjugate pairs collapse onto
/// their common real part.
fn eig2(m: &RealMatrix, im_tol: f64) -> Result<(f64, f64), NumericsError> {
    let (a, b, c, d) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
    let half_tr = 0.5 * (a + d);
    let disc = 0.25 * (a - d) * (a - d) + b * c;
    if disc >= 0.0 {
        let r = disc.sqrt();
        Ok((half_tr + r, half_tr - r))
    } else {
        let im = (-disc).sqrt();
        if im > im_tol {
            Err(NumericsError::ComplexSpectrum(im))
        } else {
            Ok((half_tr, half_tr))
        }
    }
}

fn qr_eigenvalues(m: &RealMatrix, im_tol: f64) -> Result<Vec<f64>, NumericsError> {
    let n = m.dim();
    let mut h = hessenberg(m);
    let scale = h.max_abs().max(1.0);
    let eps = f64::EPSILON * scale;
    let mut vals = Vec::with_capacity(n);
    let mut hi = n - 1;
    let mut iters_since_deflate = 0usize;
    let mut total_iters = 0usize;

    loop {
        // Deflate vanished subdiagonals.
        for i in 0..hi {
            let s = h.get(i, i).abs() + h.get(i + 1, i + 1).abs();
            if h.get(i + 1, i).abs() <= f64::EPSILON * s + 1e-300 {
                h.set(i + 1, i, 0.0);
            }
        }
        // Peel converged eigenvalues off the bottom.
        loop {
            if hi == 0 {
                vals.push(h.get(0, 0));
                vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
                return Ok(vals);
            }
            if h.get(hi, hi - 1) == 0.0 {
                vals.push(h.get(hi, hi));
                hi -= 1;
                iters_since_deflate = 0;
            } else if hi >= 1 && (hi == 1 || h.get(hi - 1, hi - 2) == 0.0) {
                // Trailing 2x2 block is isolated.
                let sub = RealMatrix::from_rows(vec![
                    vec![h.get(hi - 1, hi - 1), h.get(hi - 1, hi)],
                    vec![h.get(hi, hi - 1), h.get(hi, hi)],
                ]);
                let (x, y) = eig2(&sub, im_tol)?;
                vals.push(x);
                vals.push(y);
                if hi == 1 {
                    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
                    return Ok(vals);
                }
                hi -= 2;
                iters_since_deflate = 0;
            } else {
                break;
            }
        }

        total_iters += 1;
        iters_since_deflate += 1;
        if total_iters > 200 * n {
            return Err(NumericsError::NoConvergence);
        }

        // Shift: trailing 2x2 eigenvalue closest to the corner entry, or its
        // real part when the pair is transiently complex. An occasional
        // exceptional shift breaks symmetric stalls.
        let corner = h.get(hi, hi);
        let mut mu = if iters_since_deflate.is_multiple_of(12) {
            corner + 0.75 * h.get(hi, hi - 1).abs()
        } else {
            let a = h.get(hi - 1, hi - 1);
            let b = h.get(hi - 1, hi);
            let c = h.get(hi, hi - 1);
            let d = h.get(hi, hi);
            let half = 0.5 * (a + d);
            let disc = 0.25 * (a - d) * (a - d) + b * c;
            if disc >= 0.0 {
                let r = disc.sqrt();
                if (half + r - corner).abs() < (half - r - corner).abs() {
                    half + r
                } else {
                    half - r
                }
            } else {
                half
            }
        };
        if !mu.is_finite() {
            mu = 0.0;
        }

        // Explicit shifted QR step on the active window via Givens rotations.
        let lo = {
            let mut lo = hi;
            while lo > 0 && h.get(lo, lo - 1) != 0.0 {
                lo -= 1;
            }
            lo
        };
        let mut rot = Vec::with_capacity(hi - lo);
        for i in lo..=hi {
            h.set(i, i, h.get(i, i) - mu);
        }
        for i in lo..hi {
            let (x, y) = (h.get(i, i), h.get(i + 1, i));
            let r = x.hypot(y);
            let (c, s) = if r <= eps * 1e-3 {
                (1.0, 0.0)
            } else {
                (x / r, y / r)
            };
            rot.push((c, s));
            for j in lo..n.min(hi + 1) {
                let u = h.get(i, j);
                let v = h.get(i + 1, j);
                h.set(i, j, c * u + s * v);
                h.set(i + 1, j, -s * u + c * v);
            }
        }
        for (idx, &(c, s)) in rot.iter().enumerate() {
            let i = lo + idx;
            for r in lo..=(i + 1).min(hi) {
                let u = h.get(r, i);
                let v = h.get(r, i + 1);
                h.set(r, i, c * u + s * v);
                h.set(r, i + 1, -s * u + c * v);
            }
        }
        for i in lo..=hi {
            h.set(i, i, h.get(i, i) + mu);
        }
    }
}

/// Householder reduction to upper Hessenberg form.
fn hessenberg(m: &RealMatrix) -> RealMatrix {
    let n = m.dim();
    let mut h = m.clone();
    for k in 0..n.saturating_sub(2) {
        let mut norm2 = 0.0;
        for i in (k + 1)..n {
            norm2 += h.get(i, k) * h.get(i, k);
        }
        let alpha = norm2.sqrt();
        if alpha <= 1e-300 {
            continue;
        }
        let pivot = h.get(k + 1, k);
        let alpha = if pivot > 0.0 { -alpha } else { alpha };
        let mut v = vec![0.0; n];
        v[k + 1] = pivot - alpha;
        for i in (k + 2)..n {
            v[i] = h.get(i, k);
        }
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 <= 1e-300 {
            continue;
        }
        // H <- P H P with P = I - 2 v v^T / (v^T v)
        for j in 0..n {
            let dot: f64 = (k + 1..n).map(|i| v[i] * h.get(i, j)).sum();
            let f = 2.0 * dot / vnorm2;
            for i in (k + 1)..n {
                h.set(i, j, h.get(i, j) - f * v[i]);
            }
        }
        for i in 0..n {
            let dot: f64 = (k + 1..n).map(|j| v[j] * h.get(i, j)).sum();
            let f = 2.0 * dot / vnorm2;
            for j in (k + 1)..n {
                h.set(i, j, h.get(i, j) - f * v[j]);
            }
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_complex(rng: &mut impl Rng, dim: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(dim, |_, _| {
            c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        })
    }

    fn random_hermitian(rng: &mut impl Rng, dim: usize) -> ComplexMatrix {
        random_complex(rng, dim).hermitize()
    }

    fn random_real(rng: &mut impl Rng, dim: usize) -> RealMatrix {
        RealMatrix::from_fn(dim, |_, _| rng.random::<f64>() - 0.5)
    }

    #[test]
    fn herm_eig_identity() {
        let (vals, _) = herm_eig(&ComplexMatrix::identity(4)).unwrap();
        assert_eq!(vals, vec![1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn herm_eig_diagonal_sorted() {
        let (vals, _) = herm_eig(&ComplexMatrix::diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(vals, vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn herm_eig_rejects_non_hermitian() {
        let mut m = ComplexMatrix::identity(3);
        m.set(0, 1, c(0.5, 0.0));
        assert!(matches!(herm_eig(&m), Err(NumericsError::NonHermitian(_))));
    }

    #[test]
    fn herm_eig_reconstructs_random_matrices() {
        let mut rng = ChaCha12Rng::seed_from_u64(0xA11CE);
        for dim in 2..=9 {
            for _ in 0..125 {
                let m = random_hermitian(&mut rng, dim);
                let (vals, vecs) = herm_eig(&m).unwrap();
                // V Lambda V^dag = m
                let mut rebuilt = ComplexMatrix::zeros(dim);
                for i in 0..dim {
                    for j in 0..dim {
                        let mut acc = c(0.0, 0.0);
                        for k in 0..dim {
                            acc += vecs.get(i, k) * vals[k] * vecs.get(j, k).conj();
                        }
                        rebuilt.set(i, j, acc);
                    }
                }
                assert!(rebuilt.max_abs_diff(&m) <= 1e-9, "dim {dim}");
                // Orthonormal columns.
                let gram = vecs.adjoint().mul(&vecs);
                assert!(gram.max_abs_diff(&ComplexMatrix::identity(dim)) <= 1e-9);
                // m v_i = lambda_i v_i
                let mv = m.mul(&vecs);
                for k in 0..dim {
                    for i in 0..dim {
                        let resid = (mv.get(i, k) - vecs.get(i, k) * vals[k]).norm();
                        assert!(resid <= 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn singular_values_of_orthogonal_and_diagonal() {
        let neg_identity = RealMatrix::identity(3).scale(-1.0);
        let s = singular_values_desc(&neg_identity);
        for v in s {
            assert!((v - 1.0).abs() <= 1e-12);
        }
        let s = singular_values_desc(&RealMatrix::diag(&[0.5, -0.2, 0.1]));
        assert!((s[0] - 0.5).abs() <= 1e-12);
        assert!((s[1] - 0.2).abs() <= 1e-12);
        assert!((s[2] - 0.1).abs() <= 1e-12);
    }

    #[test]
    fn singular_values_match_moment_oracle() {
        // Independent cross-check: sum s^2 = tr(m^T m), sum s^4 = tr((m^T m)^2),
        // prod s = |det m| pin down all three values of a 3x3.
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..200 {
            let m = random_real(&mut rng, 3);
            let s = singular_values_desc(&m);
            assert!(s.windows(2).all(|w| w[0] >= w[1] - 1e-15));
            let mtm = m.transpose().mul(&m);
            let sum2: f64 = s.iter().map(|x| x * x).sum();
            let sum4: f64 = s.iter().map(|x| x.powi(4)).sum();
            assert!((sum2 - mtm.trace()).abs() <= 1e-10);
            assert!((sum4 - mtm.mul(&mtm).trace()).abs() <= 1e-10);
            let prod: f64 = s.iter().product();
            assert!((prod - determinant_real(&m).abs()).abs() <= 1e-10);
        }
    }

    #[test]
    fn psd_sqrt_diagonal() {
        let root = psd_sqrt(&ComplexMatrix::diag(&[4.0, 9.0, 0.0, 1.0])).unwrap();
        assert!(root.max_abs_diff(&ComplexMatrix::diag(&[2.0, 3.0, 0.0, 1.0])) <= 1e-12);
        let id = psd_sqrt(&ComplexMatrix::identity(3)).unwrap();
        assert!(id.max_abs_diff(&ComplexMatrix::identity(3)) <= 1e-12);
    }

    #[test]
    fn psd_sqrt_squares_back() {
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        for _ in 0..50 {
            let g = random_complex(&mut rng, 4);
            let psd = g.mul(&g.adjoint());
            let root = psd_sqrt(&psd).unwrap();
            assert!(root.mul(&root).max_abs_diff(&psd) <= 1e-9);
        }
    }

    #[test]
    fn psd_sqrt_rejects_indefinite() {
        assert!(matches!(
            psd_sqrt(&ComplexMatrix::diag(&[1.0, -0.5])),
            Err(NumericsError::NotPsd(_))
        ));
    }

    #[test]
    fn tensor_product_basics() {
        let id2 = ComplexMatrix::identity(2);
        assert!(tensor_product(&id2, &id2).max_abs_diff(&ComplexMatrix::identity(4)) == 0.0);
        let sz = ComplexMatrix::diag(&[1.0, -1.0]);
        let zz = tensor_product(&sz, &sz);
        assert!(zz.max_abs_diff(&ComplexMatrix::diag(&[1.0, -1.0, -1.0, 1.0])) == 0.0);
    }

    #[test]
    fn tensor_product_trace_multiplicative() {
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        for _ in 0..50 {
            let a = random_complex(&mut rng, 3);
            let b = random_complex(&mut rng, 2);
            let lhs = tensor_product(&a, &b).trace();
            let rhs = a.trace() * b.trace();
            assert!((lhs - rhs).norm() <= 1e-12);
        }
    }

    #[test]
    fn partial_trace_product_state() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let a = random_complex(&mut rng, 2);
        let b = random_complex(&mut rng, 2);
        let ab = tensor_product(&a, &b);
        let reduced = partial_trace(&ab, &[2, 2], &[0]).unwrap();
        let expect = a.scale(b.trace());
        assert!(reduced.max_abs_diff(&expect) <= 1e-12);
    }

    #[test]
    fn partial_trace_keep_all_is_identity() {
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        let m = random_complex(&mut rng, 4);
        let kept = partial_trace(&m, &[2, 2], &[0, 1]).unwrap();
        assert!(kept.max_abs_diff(&m) == 0.0);
    }

    #[test]
    fn partial_trace_four_factor_product_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let parts: Vec<ComplexMatrix> = (0..4).map(|_| random_complex(&mut rng, 2)).collect();
        let whole = tensor_product(
            &tensor_product(&parts[0], &parts[1]),
            &tensor_product(&parts[2], &parts[3]),
        );
        let kept = partial_trace(&whole, &[2, 2, 2, 2], &[0, 3]).unwrap();
        let expect =
            tensor_product(&parts[0], &parts[3]).scale(parts[1].trace() * parts[2].trace());
        assert!(kept.max_abs_diff(&expect) <= 1e-12);
    }

    #[test]
    fn partial_trace_preserves_trace_and_composes() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        for _ in 0..20 {
            let m = random_complex(&mut rng, 16);
            let kept = partial_trace(&m, &[2, 2, 2, 2], &[1, 2]).unwrap();
            assert!((kept.trace() - m.trace()).norm() <= 1e-12);
            // Tracing out {0} then {3} equals tracing out {0,3} at once.
            let step1 = partial_trace(&m, &[2, 2, 2, 2], &[1, 2, 3]).unwrap();
            let step2 = partial_trace(&step1, &[2, 2, 2], &[0, 1]).unwrap();
            assert!(step2.max_abs_diff(&kept) <= 1e-12);
        }
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let m = ComplexMatrix::identity(6);
        assert!(partial_trace(&m, &[2, 2], &[0]).is_err());
    }

    #[test]
    fn determinant_known_values() {
        let eta = ComplexMatrix::diag(&[1.0, -1.0, -1.0, -1.0]);
        assert!((determinant(&eta) - c(-1.0, 0.0)).norm() <= 1e-15);
        let singular = ComplexMatrix::from_rows(vec![
            vec![c(1.0, 0.0), c(2.0, 0.0)],
            vec![c(2.0, 0.0), c(4.0, 0.0)],
        ]);
        assert!(determinant(&singular).norm() <= 1e-12);
    }

    #[test]
    fn determinant_matches_cofactor_expansion() {
        fn cofactor_det(m: &ComplexMatrix) -> C64 {
            let n = m.dim();
            if n == 1 {
                return m.get(0, 0);
            }
            let mut acc = c(0.0, 0.0);
            for j in 0..n {
                let minor = ComplexMatrix::from_fn(n - 1, |r, col| {
                    m.get(r + 1, if col < j { col } else { col + 1 })
                });
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                acc += m.get(0, j) * sign * cofactor_det(&minor);
            }
            acc
        }
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        for _ in 0..50 {
            let m = random_complex(&mut rng, 4);
            assert!((determinant(&m) - cofactor_det(&m)).norm() <= 1e-9);
        }
    }

    #[test]
    fn determinant_multiplicative() {
        let mut rng = ChaCha12Rng::seed_from_u64(33);
        for _ in 0..100 {
            let a = random_complex(&mut rng, 4);
            let b = random_complex(&mut rng, 4);
            let lhs = determinant(&a.mul(&b));
            let rhs = determinant(&a) * determinant(&b);
            let scale = rhs.norm().max(1e-30);
            assert!((lhs - rhs).norm() / scale <= 1e-8);
        }
    }

    #[test]
    fn real_spectrum_eigenvalues_recovers_known_spectra() {
        // Similarity transform of a diagonal: spectrum is known exactly.
        let mut rng = ChaCha12Rng::seed_from_u64(44);
        for _ in 0..200 {
            let d = RealMatrix::diag(&[
                rng.random::<f64>(),
                rng.random::<f64>(),
                rng.random::<f64>(),
                rng.random::<f64>(),
            ]);
            // Random well-conditioned similarity.
            let mut p = RealMatrix::identity(4);
            for i in 0..4 {
                for j in 0..4 {
                    if i != j {
                        p.set(i, j, 0.3 * (rng.random::<f64>() - 0.5));
                    }
                }
            }
            // Invert p by Gauss-Jordan through the complex path.
            let pc = p.to_complex();
            let det = determinant(&pc);
            assert!(det.norm() > 1e-3);
            let pinv = invert_for_test(&p);
            let m = p.mul(&d).mul(&pinv);
            let mut expect: Vec<f64> = (0..4).map(|i| d.get(i, i)).collect();
            expect.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let got = real_spectrum_eigenvalues(&m, 1e-8).unwrap();
            for (g, e) in got.iter().zip(&expect) {
                assert!((g - e).abs() <= 1e-8, "got {got:?} expect {expect:?}");
            }
        }
    }

    #[test]
    fn real_spectrum_eigenvalues_flags_rotation() {
        // A rotation by 90 degrees has eigenvalues +-i.
        let rot = RealMatrix::from_rows(vec![vec![0.0, -1.0], vec![1.0, 0.0]]);
        assert!(matches!(
            real_spectrum_eigenvalues(&rot, 1e-8),
            Err(NumericsError::ComplexSpectrum(_))
        ));
    }

    #[test]
    fn real_spectrum_eigenvalues_handles_degenerate() {
        let m = RealMatrix::diag(&[0.5, 0.5, 0.5, 0.2]);
        let vals = real_spectrum_eigenvalues(&m, 1e-8).unwrap();
        assert_eq!(vals, vec![0.5, 0.5, 0.5, 0.2]);
    }

    fn invert_for_test(p: &RealMatrix) -> RealMatrix {
        let n = p.dim();
        let mut a = p.clone();
        let mut inv = RealMatrix::identity(n);
        for col in 0..n {
            let mut pivot = col;
            for r in (col + 1)..n {
                if a.get(r, col).abs() > a.get(pivot, col).abs() {
                    pivot = r;
                }
            }
            for j in 0..n {
                let t = a.get(col, j);
                a.set(col, j, a.get(pivot, j));
                a.set(pivot, j, t);
                let t = inv.get(col, j);
                inv.set(col, j, inv.get(pivot, j));
                inv.set(pivot, j, t);
            }
            let piv = a.get(col, col);
            for j in 0..n {
                a.set(col, j, a.get(col, j) / piv);
                inv.set(col, j, inv.get(col, j) / piv);
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a.get(r, col);
                for j in 0..n {
                    a.set(r, j, a.get(r, j) - f * a.get(col, j));
                    inv.set(r, j, inv.get(r, j) - f * inv.get(col, j));
                }
            }
        }
        inv
    }
}
