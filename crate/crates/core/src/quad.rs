//! Quadrature rules and spectral utilities.
//!
//! Integrals over the half-plane are transferred to the unit disk through
//! the Möbius isometry and evaluated by tensorized Gauss-Legendre (radial)
//! x trapezoid (angular) quadrature. Line measures use Gauss-Legendre on
//! geometric panels scaled by the line height; improper full-line integrals
//! are truncated where the integrand class falls below `1e-16` of its peak.

use crate::error::{Error, Result};
use crate::linalg::{svd_values, CMatrix};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Node counts for the quadrature backends. All counts must be at least 8.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Gauss-Legendre nodes on the radial interval `[0, 1]`.
    pub radial: usize,
    /// Uniform angular nodes on `[0, 2π)`.
    pub angular: usize,
    /// Gauss-Legendre nodes per line panel.
    pub line_nodes: usize,
    /// Line panels extend to `2^panel_span * max(1, y)`; the widest basis
    /// integrands decay like `x^-4`, so 16 octaves reach the `1e-16` floor.
    pub panel_span: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            radial: 128,
            angular: 256,
            line_nodes: 48,
            panel_span: 16,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.radial < 8 || self.angular < 8 || self.line_nodes < 8 {
            return Err(Error::Grid(
                "quadrature node counts must be at least 8".into(),
            ));
        }
        Ok(())
    }

    pub fn halved(&self) -> Self {
        Self {
            radial: (self.radial / 2).max(8),
            angular: (self.angular / 2).max(8),
            line_nodes: (self.line_nodes / 2).max(8),
            panel_span: self.panel_span,
        }
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j as f64 + 1.0) * z * p1 - j as f64 * p2) / (j as f64 + 1.0);
            }
            pp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / pp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Gauss-Legendre nodes mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let c = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|&t| mid + c * t).collect(),
        w.iter().map(|&t| c * t).collect(),
    )
}

/// Gauss-Laguerre nodes and weights for `∫_0^∞ f(x) e^{-x} dx`.
pub fn gauss_laguerre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    let mut z = 0.0;
    for i in 0..n {
        // standard initial guesses, then Newton on the Laguerre recurrence
        if i == 0 {
            z = 3.0 / (1.0 + 2.4 * nf);
        } else if i == 1 {
            z += 15.0 / (1.0 + 2.5 * nf);
        } else {
            let ai = i as f64 - 1.0;
            z += (1.0 + 2.55 * ai) / (1.9 * ai) * (z - x[i - 2]);
        }
        let mut pp = 0.0;
        for _ in 0..200 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j as f64 + 1.0 - z) * p1 - j as f64 * p2) / (j as f64 + 1.0);
            }
            pp = nf * (p0 - p1) / z;
            let dz = p0 / pp;
            z -= dz;
            if dz.abs() < 1e-14 * z.max(1.0) {
                break;
            }
        }
        x[i] = z;
        // w = -1/(n * L'_n(x) * L_{n-1}(x)) in the monic-free normalization
        let mut p0 = 1.0;
        let mut p1 = 0.0;
        for j in 0..n {
            let p2 = p1;
            p1 = p0;
            p0 = ((2.0 * j as f64 + 1.0 - z) * p1 - j as f64 * p2) / (j as f64 + 1.0);
        }
        w[i] = -1.0 / (pp * nf * p1);
    }
    (x, w)
}

/// One node of the disk-transferred half-plane rule.
#[derive(Debug, Clone, Copy)]
pub struct DiskNode {
    /// Node on the unit disk.
    pub zeta: Complex64,
    /// Image point in the half-plane, `W(ζ) = (ζ+i)/(1+iζ)`.
    pub w: Complex64,
    /// Quadrature weight including the polar element and `|W'(ζ)|²`.
    pub weight: f64,
}

/// Tensorized disk rule pulled back to the half-plane:
/// `∫_Π f dA ≈ Σ weight * f(w)`.
#[derive(Debug, Clone)]
pub struct DiskRule {
    pub nodes: Vec<DiskNode>,
    spec: QuadratureSpec,
}

impl DiskRule {
    pub fn new(spec: &QuadratureSpec) -> Result<Self> {
        spec.validate()?;
        let (r, wr) = gauss_legendre_on(spec.radial, 0.0, 1.0);
        let nt = spec.angular;
        let wt = 2.0 * PI / nt as f64;
        let i = Complex64::i();
        let one = Complex64::new(1.0, 0.0);
        let mut nodes = Vec::with_capacity(spec.radial * nt);
        for (ri, &rho) in r.iter().enumerate() {
            for k in 0..nt {
                let theta = wt * k as f64;
                let zeta = Complex64::from_polar(rho, theta);
                let denom = one + i * zeta;
                let w = (zeta + i) / denom;
                let jac = 4.0 / denom.norm_sqr().powi(2);
                nodes.push(DiskNode {
                    zeta,
                    w,
                    weight: wr[ri] * wt * rho * jac,
                });
            }
        }
        Ok(Self { nodes, spec: *spec })
    }

    pub fn spec(&self) -> &QuadratureSpec {
        &self.spec
    }

    pub fn integrate(&self, mut f: impl FnMut(Complex64) -> Complex64) -> Complex64 {
        self.nodes.iter().map(|n| f(n.w) * n.weight).sum()
    }
}

/// A quadrature value with an a-posteriori residual estimate.
#[derive(Debug, Clone, Copy)]
pub struct QuadValue {
    pub value: Complex64,
    /// Difference against the half-node rule; a coarse error proxy.
    pub residual: f64,
}

impl QuadValue {
    /// Accuracy check: error when the residual exceeds `tol`.
    pub fn require(self, tol: f64) -> Result<Complex64> {
        if self.residual > tol {
            return Err(Error::Accuracy(format!(
                "residual {:.3e} above tolerance {:.3e}",
                self.residual, tol
            )));
        }
        Ok(self.value)
    }
}

/// `⟨f, g⟩ = ∫_Π f(w) conj(g(w)) dA(w)` via the disk transfer, with a
/// residual estimate from node doubling (fine rule vs. halved rule).
pub fn inner_product(
    f: impl Fn(Complex64) -> Complex64,
    g: impl Fn(Complex64) -> Complex64,
    spec: &QuadratureSpec,
) -> Result<QuadValue> {
    let fine = DiskRule::new(spec)?;
    let coarse = DiskRule::new(&spec.halved())?;
    let vf = fine.integrate(|w| f(w) * g(w).conj());
    let vc = coarse.integrate(|w| f(w) * g(w).conj());
    Ok(QuadValue {
        value: vf,
        residual: (vf - vc).norm(),
    })
}

/// Quadrature nodes along a horizontal line `y = const`, on geometric
/// panels `[0, y], [y, 2y], ...` mirrored to the negative axis. The panel
/// width tracks the line height so integrand structure at scale `y` stays
/// resolved; the span covers the `1e-16` relative tail of `x^-4` decay.
#[derive(Debug, Clone)]
pub struct LineRule {
    pub y: f64,
    pub x: Vec<f64>,
    pub w: Vec<f64>,
}

impl LineRule {
    pub fn full_line(y: f64, spec: &QuadratureSpec) -> Result<Self> {
        spec.validate()?;
        if y <= 0.0 || !y.is_finite() {
            return Err(Error::Domain(format!("line height {y} must be positive")));
        }
        let mut xs = Vec::new();
        let mut ws = Vec::new();
        let top = (2.0f64).powi(spec.panel_span as i32) * y.max(1.0);
        let mut a = 0.0;
        let mut b = y;
        while a < top {
            let (px, pw) = gauss_legendre_on(spec.line_nodes, a, b.min(top));
            xs.extend(px);
            ws.extend(pw);
            a = b;
            b *= 2.0;
        }
        let mut x = Vec::with_capacity(2 * xs.len());
        let mut w = Vec::with_capacity(2 * xs.len());
        for (&xi, &wi) in xs.iter().zip(&ws) {
            x.push(-xi);
            w.push(wi);
        }
        x.extend(xs);
        w.extend(ws);
        Ok(Self { y, x, w })
    }

    /// Rule restricted to `[x0, x1]`, for truncated line measures.
    pub fn segment(y: f64, x0: f64, x1: f64, spec: &QuadratureSpec) -> Result<Self> {
        spec.validate()?;
        if y <= 0.0 || x1 <= x0 {
            return Err(Error::Domain("invalid line segment".into()));
        }
        // split into panels of width <= max(y, 1) for resolution
        let width = y.max(1.0);
        let panels = (((x1 - x0) / width).ceil() as usize).max(1);
        let mut x = Vec::new();
        let mut w = Vec::new();
        for p in 0..panels {
            let a = x0 + (x1 - x0) * p as f64 / panels as f64;
            let b = x0 + (x1 - x0) * (p + 1) as f64 / panels as f64;
            let (px, pw) = gauss_legendre_on(spec.line_nodes, a, b);
            x.extend(px);
            w.extend(pw);
        }
        Ok(Self { y, x, w })
    }

    pub fn integrate(&self, mut f: impl FnMut(Complex64) -> Complex64) -> Complex64 {
        self.x
            .iter()
            .zip(&self.w)
            .map(|(&x, &w)| f(Complex64::new(x, self.y)) * w)
            .sum()
    }
}

/// Result of a least-squares exponential fit `s_n ≈ C exp(-n σ)`.
#[derive(Debug, Clone)]
pub struct DecayFit {
    pub sigma: f64,
    pub c: f64,
    pub range: std::ops::Range<usize>,
    /// Max deviation of `log s_n` from the fitted line, relative to
    /// `max(1, |log s_n|)`.
    pub residual: f64,
}

/// Least-squares line through `(n, log s_n)` on `range`; `sigma = -slope`.
pub fn fit_exponential_decay(s: &[f64], range: std::ops::Range<usize>) -> Result<DecayFit> {
    if range.end > s.len() || range.len() < 2 {
        return Err(Error::Domain(format!(
            "fit range {range:?} invalid for {} singular values",
            s.len()
        )));
    }
    let mut xs = Vec::with_capacity(range.len());
    let mut ys = Vec::with_capacity(range.len());
    for n in range.clone() {
        if s[n] <= 0.0 {
            return Err(Error::Domain(format!(
                "non-positive value s[{n}] = {} in fit range; choose the range above the numerical floor",
                s[n]
            )));
        }
        xs.push(n as f64);
        ys.push(s[n].ln());
    }
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let det = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / det;
    let intercept = (sy * sxx - sx * sxy) / det;
    let residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (slope * x + intercept)).abs() / y.abs().max(1.0))
        .fold(0.0f64, f64::max);
    Ok(DecayFit {
        sigma: -slope,
        c: intercept.exp(),
        range,
        residual,
    })
}

/// Longest initial range of values above `floor_rel * s_0`, for fits that
/// must stay clear of the numerical floor.
pub fn range_above_floor(s: &[f64], floor_rel: f64) -> std::ops::Range<usize> {
    if s.is_empty() || s[0] <= 0.0 {
        return 0..0;
    }
    let floor = floor_rel * s[0];
    let mut end = 0;
    while end < s.len() && s[end] > floor {
        end += 1;
    }
    0..end
}

pub use crate::linalg::operator_norm;

/// Singular values of a dense complex matrix, descending.
pub fn singular_values(a: &CMatrix) -> Result<Vec<f64>> {
    svd_values(a)
}
