//! Small dense complex matrices and a one-sided Jacobi SVD.
//!
//! The truncations handled here stay below a few hundred rows, and the
//! spectrum reports need small singular values at high relative accuracy
//! (the decay fits reach down to `1e-12 * s_0`), which is exactly the
//! regime where Hestenes' one-sided Jacobi iteration is the right tool.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Self {
        let r = rows.len();
        let c = if r > 0 { rows[0].len() } else { 0 };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c);
            data.extend(row);
        }
        Self {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// Top-left `n x n` block.
    pub fn leading_block(&self, n: usize) -> Self {
        assert!(n <= self.rows && n <= self.cols);
        Self::from_fn(n, n, |i, j| self[(i, j)])
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| a * c).collect(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Frobenius inner product `tr(self^H rhs)`.
    pub fn frobenius_inner(&self, rhs: &Self) -> Complex64 {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows);
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    /// Hermitian part `(A + A^H)/2`; returns the part together with the
    /// largest entrywise deviation `max |A - A^H|/2`.
    pub fn hermitian_part(&self) -> (Self, f64) {
        assert_eq!(self.rows, self.cols);
        let adj = self.adjoint();
        let sym = self.add(&adj).scale(Complex64::new(0.5, 0.0));
        let dev = self
            .sub(&adj)
            .data
            .iter()
            .map(|c| c.norm() * 0.5)
            .fold(0.0f64, f64::max);
        (sym, dev)
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Singular values in descending order, by one-sided Jacobi on columns.
#[allow(clippy::needless_range_loop)] // lockstep mutation of two columns
pub fn svd_values(a: &CMatrix) -> Result<Vec<f64>> {
    if !a.is_finite() {
        return Err(Error::NumericRange("matrix has non-finite entries".into()));
    }
    let m = a.rows();
    let n = a.cols();
    if n == 0 || m == 0 {
        return Ok(vec![]);
    }
    // column-major working copy
    let mut cols: Vec<Vec<Complex64>> = (0..n)
        .map(|j| (0..m).map(|i| a[(i, j)]).collect())
        .collect();

    let scale: f64 = a.frobenius_norm();
    if scale == 0.0 {
        return Ok(vec![0.0; n.min(m)]);
    }
    let tol = 1e-15 * scale * scale;

    for _sweep in 0..64 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = Complex64::new(0.0, 0.0);
                for (cp, cq) in cols[p].iter().zip(&cols[q]) {
                    app += cp.norm_sqr();
                    aqq += cq.norm_sqr();
                    apq += cp.conj() * cq;
                }
                if apq.norm() <= tol.min(1e-30 + 1e-16 * (app * aqq).sqrt()) {
                    continue;
                }
                rotated = true;
                // phase-align column q, then a real Jacobi rotation
                let alpha = apq / apq.norm();
                let g = apq.norm();
                let tau = (aqq - app) / (2.0 * g);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let vp = cols[p][i];
                    let vq = cols[q][i] * alpha.conj();
                    cols[p][i] = c * vp - s * vq;
                    cols[q][i] = (s * vp + c * vq) * alpha;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sv: Vec<f64> = cols
        .iter()
        .map(|col| col.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(sv)
}

/// Largest singular value.
pub fn operator_norm(a: &CMatrix) -> Result<f64> {
    Ok(svd_values(a)?.first().copied().unwrap_or(0.0))
}

/// Smallest eigenvalue of a Hermitian matrix, via the shift
/// `λ_min = ‖A‖ - ‖(‖A‖ I - A)‖` (both norms are largest singular values,
/// exact for Hermitian input).
pub fn min_eigenvalue_hermitian(a: &CMatrix) -> Result<f64> {
    assert_eq!(a.rows(), a.cols());
    let norm = operator_norm(a)?;
    if norm == 0.0 {
        return Ok(0.0);
    }
    let shifted = CMatrix::from_fn(a.rows(), a.cols(), |i, j| {
        let id = if i == j {
            Complex64::new(norm, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        };
        id - a[(i, j)]
    });
    Ok(norm - operator_norm(&shifted)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_matrix() {
        let a = CMatrix::zeros(4, 4);
        assert_eq!(svd_values(&a).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn diagonal() {
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 0)] = Complex64::new(3.0, 0.0);
        a[(1, 1)] = Complex64::new(4.0, 0.0);
        let sv = svd_values(&a).unwrap();
        assert_relative_eq!(sv[0], 4.0, epsilon = 1e-14);
        assert_relative_eq!(sv[1], 3.0, epsilon = 1e-14);
    }

    #[test]
    fn rank_one_outer_product() {
        // u v^*: singular values [|u||v|, 0, ...]
        let u = [
            Complex64::new(1.0, 2.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(0.5, 0.0),
        ];
        let v = [
            Complex64::new(2.0, 1.0),
            Complex64::new(-1.0, 1.0),
            Complex64::new(0.0, 3.0),
        ];
        let a = CMatrix::from_fn(3, 3, |i, j| u[i] * v[j].conj());
        let sv = svd_values(&a).unwrap();
        let nu: f64 = u.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let nv: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        assert_relative_eq!(sv[0], nu * nv, epsilon = 1e-13);
        assert!(sv[1] < 1e-13 * sv[0]);
    }

    #[test]
    fn tiny_singular_values_resolved() {
        // diag with huge dynamic range: Jacobi keeps relative accuracy
        let d = [1.0, 1e-6, 1e-12, 1e-14];
        let a = CMatrix::from_fn(4, 4, |i, j| {
            if i == j {
                Complex64::new(d[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let sv = svd_values(&a).unwrap();
        for (k, &x) in d.iter().enumerate() {
            assert_relative_eq!(sv[k], x, max_relative = 1e-12);
        }
    }

    #[test]
    fn non_finite_rejected() {
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 1)] = Complex64::new(f64::NAN, 0.0);
        assert!(svd_values(&a).is_err());
    }

    #[test]
    fn min_eigenvalue() {
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 0)] = Complex64::new(2.0, 0.0);
        a[(1, 1)] = Complex64::new(-0.5, 0.0);
        a[(0, 1)] = Complex64::new(0.0, 1.0);
        a[(1, 0)] = Complex64::new(0.0, -1.0);
        // eigenvalues of [[2, i], [-i, -0.5]]: (0.75 +- sqrt(1.5625+1))
        let lam_min = 0.75 - (1.5625f64 + 1.0).sqrt();
        assert_relative_eq!(
            min_eigenvalue_hermitian(&a).unwrap(),
            lam_min,
            epsilon = 1e-12
        );
    }
}
