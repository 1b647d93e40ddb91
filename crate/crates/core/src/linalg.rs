//! Dense symmetric linear algebra: eigendecomposition, pseudo-inverse square
//! roots and covariance estimation.
//!
//! The eigensolver is nalgebra's symmetric QR iteration; this module wraps it
//! with the conventions the rest of the crate relies on (descending order,
//! deterministic eigenvector signs, clipping of round-off negatives).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Eigenvalues above `-NEG_EIG_TOL * max(1, |λ|_max)` are treated as round-off and clipped to 0.
pub const NEG_EIG_TOL: f64 = 1e-10;

/// Default relative threshold below which eigenvalues count as zero in
/// pseudo-inverse computations.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// A real symmetric matrix with finite entries.
///
/// Construction symmetrizes the input as `(M + Mᵀ) / 2`, so
/// `m[(i, j)] == m[(j, i)]` holds bit-for-bit afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::dim(format!(
                "symmetric matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("matrix has non-finite entries".into()));
        }
        Ok(Self::symmetrized(m))
    }

    fn symmetrized(mut m: DMatrix<f64>) -> Self {
        let n = m.nrows();
        for j in 0..n {
            for i in (j + 1)..n {
                let v = 0.5 * (m[(i, j)] + m[(j, i)]);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        SymMatrix(m)
    }

    pub fn zeros(dim: usize) -> Self {
        SymMatrix(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        SymMatrix(DMatrix::identity(dim, dim))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    /// `A Aᵀ`, symmetric by construction.
    pub fn gram(a: &DMatrix<f64>) -> Self {
        Self::symmetrized(a * a.transpose())
    }

    /// `Aᵀ A`, symmetric by construction.
    pub fn gram_transpose(a: &DMatrix<f64>) -> Self {
        Self::symmetrized(a.tr_mul(a))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// `self + c * I`.
    pub fn add_ridge(mut self, c: f64) -> Self {
        for i in 0..self.dim() {
            self.0[(i, i)] += c;
        }
        self
    }

    /// `self + c * other`.
    pub fn add_scaled(mut self, c: f64, other: &SymMatrix) -> Result<Self> {
        if other.dim() != self.dim() {
            return Err(Error::dim(format!(
                "cannot add {}x{} to {}x{}",
                other.dim(),
                other.dim(),
                self.dim(),
                self.dim()
            )));
        }
        self.0 += other.0.scale(c);
        Ok(self)
    }

    /// `Qᵀ M Q` for a square `Q` of matching size.
    pub fn conjugate(&self, q: &DMatrix<f64>) -> Result<Self> {
        if q.nrows() != self.dim() {
            return Err(Error::dim("conjugating matrix has wrong row count"));
        }
        Ok(Self::symmetrized(q.tr_mul(&(&self.0 * q))))
    }

    /// Quadratic form `wᵀ M w`.
    pub fn quadratic_form(&self, w: &DVector<f64>) -> f64 {
        w.dot(&(&self.0 * w))
    }

    /// Eigenvalues only, descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.0.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }
}

/// Eigendecomposition of a symmetric matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    /// Column `j` is the unit eigenvector paired with `eigenvalues[j]`.
    pub eigenvectors: DMatrix<f64>,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V diag(g(λ)) Vᵀ`.
    pub fn reconstruct_with(&self, g: impl Fn(f64) -> f64) -> SymMatrix {
        let mut scaled = self.eigenvectors.clone();
        for (j, &lam) in self.eigenvalues.iter().enumerate() {
            let s = g(lam);
            scaled.column_mut(j).scale_mut(s);
        }
        SymMatrix::symmetrized(scaled * self.eigenvectors.transpose())
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.reconstruct_with(|l| l)
    }

    /// Orthogonal projector onto the span of the top `m` eigenvectors.
    pub fn top_projector(&self, m: usize) -> SymMatrix {
        let vm = self.eigenvectors.columns(0, m.min(self.dim()));
        SymMatrix::symmetrized(vm * vm.transpose())
    }
}

/// Symmetric eigendecomposition with descending eigenvalues and each
/// eigenvector's largest-magnitude entry made positive.
pub fn sym_eig(m: &SymMatrix) -> EigenSystem {
    let n = m.dim();
    if n == 0 {
        return EigenSystem { eigenvalues: Vec::new(), eigenvectors: DMatrix::zeros(0, 0) };
    }
    let eig = m.matrix().clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut vectors = DMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        let col = eig.eigenvectors.column(src);
        let mut pivot = 0;
        for i in 1..n {
            if col[i].abs() > col[pivot].abs() + 1e-14 {
                pivot = i;
            }
        }
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        vectors.column_mut(dst).copy_from(&(col * sign));
    }
    EigenSystem { eigenvalues: values, eigenvectors: vectors }
}

/// Clips round-off negatives of a numerically PSD spectrum, rejecting
/// genuinely indefinite ones.
pub fn clip_psd_spectrum(eigenvalues: &mut [f64]) -> Result<()> {
    let scale = eigenvalues.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
    for v in eigenvalues.iter_mut() {
        if *v < 0.0 {
            if *v < -NEG_EIG_TOL * scale {
                return Err(Error::Numerical(format!(
                    "matrix is not positive semidefinite (eigenvalue {v:e})"
                )));
            }
            *v = 0.0;
        }
    }
    Ok(())
}

/// Moore–Penrose inverse square root of a PSD matrix.
///
/// Eigenvalues at or below `rank_tol * λ_max` map to zero. An all-zero input
/// returns the zero matrix.
pub fn inv_sqrt_psd(m: &SymMatrix, rank_tol: f64) -> Result<SymMatrix> {
    let mut es = sym_eig(m);
    clip_psd_spectrum(&mut es.eigenvalues)?;
    let lmax = es.eigenvalues.first().copied().unwrap_or(0.0);
    if lmax <= 0.0 {
        return Ok(SymMatrix::zeros(m.dim()));
    }
    let cut = rank_tol * lmax;
    Ok(es.reconstruct_with(|l| if l > cut { l.powf(-0.5) } else { 0.0 }))
}

/// Column means of a `T × d` matrix.
pub fn column_means(rows: &DMatrix<f64>) -> DVector<f64> {
    let t = rows.nrows().max(1) as f64;
    DVector::from_iterator(rows.ncols(), rows.column_iter().map(|c| c.sum() / t))
}

/// Subtracts column means in place.
pub fn center_columns(rows: &mut DMatrix<f64>) {
    let t = rows.nrows();
    if t == 0 {
        return;
    }
    for mut col in rows.column_iter_mut() {
        let mean = col.sum() / t as f64;
        col.add_scalar_mut(-mean);
    }
}

fn check_rows(rows: &DMatrix<f64>) -> Result<()> {
    if rows.nrows() < 2 {
        return Err(Error::InsufficientData { needed: 2, available: rows.nrows() });
    }
    if rows.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("observation matrix has non-finite entries".into()));
    }
    Ok(())
}

/// `(1/T) Σ_t z_t z_tᵀ` over the rows of a `T × d` matrix, optionally after
/// centering each column, plus `ridge · I`.
pub fn sample_covariance(rows: &DMatrix<f64>, center: bool, ridge: f64) -> Result<SymMatrix> {
    check_rows(rows)?;
    let t = rows.nrows() as f64;
    let gram = if center {
        let mut c = rows.clone();
        center_columns(&mut c);
        c.tr_mul(&c)
    } else {
        rows.tr_mul(rows)
    };
    Ok(SymMatrix::symmetrized(gram / t).add_ridge(ridge))
}

/// `(1/T) Σ_t a_t b_tᵀ` for row-aligned matrices, optionally centered.
pub fn cross_covariance(a: &DMatrix<f64>, b: &DMatrix<f64>, center: bool) -> Result<DMatrix<f64>> {
    if a.nrows() != b.nrows() {
        return Err(Error::dim(format!("row counts differ: {} vs {}", a.nrows(), b.nrows())));
    }
    check_rows(a)?;
    check_rows(b)?;
    let t = a.nrows() as f64;
    let out = if center {
        let mut ac = a.clone();
        let mut bc = b.clone();
        center_columns(&mut ac);
        center_columns(&mut bc);
        ac.tr_mul(&bc)
    } else {
        a.tr_mul(b)
    };
    Ok(out / t)
}

/// Spectral norm of a general matrix (largest singular value).
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let g = if m.nrows() <= m.ncols() { m * m.transpose() } else { m.tr_mul(m) };
    let top = SymMatrix::symmetrized(g).eigenvalues().first().copied().unwrap_or(0.0);
    top.max(0.0).sqrt()
}
