//! Complex dense linear-algebra primitives shared by the whole crate:
//! Hermitian symmetrization, Hermitian eigendecomposition, the
//! log-determinant `ln|I + H X H^H|`, and diagonal extraction.

use nalgebra::{Cholesky, Complex, DMatrix, DVector, Dyn};

use crate::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = Complex<f64>;
/// Dense complex matrix.
pub type CMat = DMatrix<C64>;
/// Dense complex column vector.
pub type CVec = DVector<C64>;

/// Relative tolerance used when checking that a matrix is Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-9;

/// Spectral decomposition of a Hermitian matrix with eigenvalues sorted
/// descending and eigenvectors as the matching columns.
#[derive(Debug, Clone)]
pub struct HermEig {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: CMat,
}

impl HermEig {
    /// Rebuilds `V diag(lambda) V^H`.
    pub fn reconstruct(&self) -> CMat {
        let lambda = CMat::from_diagonal(&self.eigenvalues.map(|v| C64::new(v, 0.0)));
        &self.eigenvectors * lambda * self.eigenvectors.adjoint()
    }
}

fn require_square(m: &CMat) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NonSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(())
}

/// `(M + M^H)/2`.
pub fn herm_part(m: &CMat) -> Result<CMat> {
    require_square(m)?;
    Ok((m + m.adjoint()).scale(0.5))
}

/// Relative Hermiticity residual `||M - (M + M^H)/2|| / max(1, ||M||)`.
pub fn hermitian_residual(m: &CMat) -> Result<f64> {
    let h = herm_part(m)?;
    Ok((m - h).norm() / m.norm().max(1.0))
}

/// Full spectral decomposition of a Hermitian matrix. Eigenvalues are real
/// and returned in descending order.
pub fn hermitian_eig(m: &CMat) -> Result<HermEig> {
    let residual = hermitian_residual(m)?;
    if residual > HERMITIAN_TOL {
        return Err(Error::NotHermitian { residual });
    }
    let sym = herm_part(m)?;
    let eig = sym.symmetric_eigen();

    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let eigenvectors = CMat::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).clone_owned())
            .collect::<Vec<_>>(),
    );
    Ok(HermEig {
        eigenvalues,
        eigenvectors,
    })
}

/// `ln|I + H X H^H|` in nats, computed through a Cholesky factorization of
/// `I + H X H^H`. Fails if `X` is not PSD within factorization tolerance.
pub fn logdet_ipgram(h: &CMat, x: &CMat) -> Result<f64> {
    if h.ncols() != x.nrows() || x.nrows() != x.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "H is {}x{}, X is {}x{}",
            h.nrows(),
            h.ncols(),
            x.nrows(),
            x.ncols()
        )));
    }
    let gram = CMat::identity(h.nrows(), h.nrows()) + h * x * h.adjoint();
    // Round-off can leave a tiny skew part; the factorization needs the exact
    // Hermitian representative.
    let gram = herm_part(&gram)?;
    let chol = Cholesky::new(gram).ok_or(Error::NotPositiveDefinite)?;
    Ok(2.0 * chol.l_dirty().diagonal().iter().map(|d| d.re.ln()).sum::<f64>())
}

/// Solves `(I + H X H^H) S = B` for `S`, reusing one Cholesky factorization.
pub(crate) fn ipgram_solve(h: &CMat, x: &CMat, b: &CMat) -> Result<CMat> {
    let gram = CMat::identity(h.nrows(), h.nrows()) + h * x * h.adjoint();
    let gram = herm_part(&gram)?;
    let chol: Cholesky<C64, Dyn> = Cholesky::new(gram).ok_or(Error::NotPositiveDefinite)?;
    Ok(chol.solve(b))
}

/// Main diagonal of a square matrix as a column vector.
pub fn vecd(m: &CMat) -> Result<CVec> {
    require_square(m)?;
    Ok(CVec::from_iterator(m.nrows(), m.diagonal().iter().copied()))
}
