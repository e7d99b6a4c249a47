//! Reproducing kernel and the transferred orthonormal basis of the Bergman
//! space on the upper half-plane.
//!
//! The basis comes from the disk monomials `e_n(ζ) = sqrt((n+1)/π) ζ^n`
//! through the conformal transfer `(U f)(z) = f(M(z)) M'(z)` with
//! `M(z) = (z-i)/(1-iz)` and `M'(z) = 2/(1-iz)²`. The conformal weight is
//! `M'` itself (not `1/(1-iz)²`), so the transfer is an exact isometry and
//! all basis norms are exactly one.

use crate::error::{Error, Result};
use crate::geometry::HalfPlanePoint;
use crate::quad::{gauss_laguerre, DiskRule};
use crate::taylor::Jet;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Reproducing kernel `k(z, w) = -1/(π (z - w̄)²)`.
pub fn kernel(z: Complex64, w: Complex64) -> Complex64 {
    let d = z - w.conj();
    -1.0 / (PI * d * d)
}

/// Kernel section `k_z(w) = conj(k(z, w)) = k(w, z)` anchored at `z`.
#[derive(Debug, Clone, Copy)]
pub struct KernelPoint {
    pub anchor: HalfPlanePoint,
}

impl KernelPoint {
    pub fn new(anchor: HalfPlanePoint) -> Self {
        Self { anchor }
    }

    pub fn eval(&self, w: Complex64) -> Complex64 {
        kernel(w, self.anchor.to_complex())
    }

    /// Holomorphic derivative `∂_w^β k_z(w)` in closed form.
    pub fn deriv(&self, beta: u32, w: Complex64) -> Complex64 {
        // d^β/dw^β [-(π (w - z̄)²)^{-1}] = -(-1)^β (β+1)! / (π (w - z̄)^{β+2})
        let zbar = self.anchor.to_complex().conj();
        let mut fact = 1.0f64;
        for i in 2..=(beta as u64 + 1) {
            fact *= i as f64;
        }
        let sign = if beta.is_multiple_of(2) { 1.0 } else { -1.0 };
        -sign * fact / (PI * (w - zbar).powu(beta + 2))
    }
}

/// Orthonormal basis `φ_n = U e_n` of the Bergman space, `n < max_index`.
#[derive(Debug, Clone)]
pub struct BasisFamily {
    max_index: usize,
}

impl BasisFamily {
    pub fn new(max_index: usize) -> Self {
        Self { max_index }
    }

    pub fn max_index(&self) -> usize {
        self.max_index
    }

    fn norm_const(n: usize) -> f64 {
        ((n as f64 + 1.0) / PI).sqrt()
    }

    /// `φ_n(z) = sqrt((n+1)/π) M(z)^n M'(z)`. Evaluated in factored form,
    /// so `|M| < 1` keeps powers stable for any `z` in the half-plane.
    pub fn eval(&self, n: usize, z: Complex64) -> Complex64 {
        debug_assert!(z.im > 0.0);
        let i = Complex64::i();
        let denom = Complex64::new(1.0, 0.0) - i * z;
        let m = (z - i) / denom;
        let jweight = 2.0 / (denom * denom);
        Self::norm_const(n) * m.powu(n as u32) * jweight
    }

    /// Taylor jet of `φ_n` at `z` up to `order`, for exact derivatives.
    pub fn jet(&self, n: usize, z: Complex64, order: usize) -> Result<Jet> {
        let i = Complex64::i();
        let num = {
            let mut j = Jet::variable(z, order);
            j = j.add(&Jet::constant(-i, order));
            j
        };
        let den = {
            let mut j = Jet::variable(z, order).scale(-i);
            j = j.add(&Jet::constant(Complex64::new(1.0, 0.0), order));
            j
        };
        let rden = den.recip()?;
        let m = num.mul(&rden);
        let jweight = rden.mul(&rden).scale(Complex64::new(2.0, 0.0));
        let jet = m
            .powi(n as u32)
            .mul(&jweight)
            .scale(Complex64::new(Self::norm_const(n), 0.0));
        if !jet.is_finite() {
            return Err(Error::NumericRange(format!(
                "basis jet overflow at n = {n}, z = {z}, order = {order}"
            )));
        }
        Ok(jet)
    }

    /// `∂^α φ_n(z)`, exact to machine precision via Taylor-mode
    /// differentiation of the closed form.
    pub fn deriv(&self, n: usize, alpha: u32, z: Complex64) -> Result<Complex64> {
        let jet = self.jet(n, z, alpha as usize)?;
        let d = jet.derivative(alpha as usize);
        if !d.re.is_finite() || !d.im.is_finite() {
            return Err(Error::NumericRange(format!(
                "derivative overflow at n = {n}, alpha = {alpha}, z = {z}"
            )));
        }
        Ok(d)
    }

    /// Weighted pairing `⟨y^m ∂^a φ_{n1}, ∂^b φ_{n2}⟩` over the half-plane,
    /// evaluated on the Laplace-transform side where the basis becomes the
    /// Laguerre family `γ_n(t) ∝ t e^{-t} L_n^{(1)}(2t)`:
    ///
    /// `⟨y^m ∂^a f, ∂^b g⟩ = 2π m! 2^{-(m+1)} i^{a-b} ∫ t^{a+b-m-1} γ_f conj(γ_g) dt`.
    ///
    /// The integrand is a polynomial times `e^{-2t}`, so Gauss-Laguerre of
    /// matching degree is exact; the disk-transfer rule would only converge
    /// algebraically for these weights (see the quadrature design notes).
    pub fn weighted_pair(&self, m: u32, a: u32, b: u32, n1: usize, n2: usize) -> Result<Complex64> {
        if m > a + b + 1 {
            return Err(Error::Domain(format!(
                "weight power m = {m} too high for derivative orders ({a}, {b})"
            )));
        }
        // t-power in the integrand: t^{a+b-m-1} * t^2 from gamma factors
        let p = (a + b + 1 - m) as usize;
        let degree = p + n1 + n2;
        let nodes = (degree / 2 + 6).max(24);
        let (u, w) = gauss_laguerre(nodes);

        // ∫ t^{p+...} e^{-2t} L_{n1}(2t) L_{n2}(2t) dt with u = 2t
        let nmax = n1.max(n2);
        let mut integral = 0.0f64;
        for (&ui, &wi) in u.iter().zip(&w) {
            let t = ui / 2.0;
            let l = laguerre1_values(nmax, ui);
            integral += wi * t.powi(p as i32) * l[n1] * l[n2];
        }
        integral /= 2.0;

        let cn = 4.0 / (PI * (((n1 + 1) * (n2 + 1)) as f64).sqrt());
        let mut fact_m = 1.0f64;
        for i in 2..=(m as u64) {
            fact_m *= i as f64;
        }
        let phase = Complex64::i().powu((a + 4 * ((b / 4) + 1) - b) % 4)
            * Complex64::i().powu(((n1 + 4 * ((n2 / 4) + 1) - n2) % 4) as u32);
        Ok(2.0 * PI * fact_m * 0.5f64.powi(m as i32 + 1) * phase * cn * integral)
    }
}

/// Values `L_k^{(1)}(x)` for `k = 0..=nmax` by the forward recurrence.
fn laguerre1_values(nmax: usize, x: f64) -> Vec<f64> {
    let mut vals = Vec::with_capacity(nmax + 1);
    vals.push(1.0);
    if nmax >= 1 {
        vals.push(2.0 - x);
    }
    for k in 1..nmax {
        let kf = k as f64;
        let next = ((2.0 * kf + 2.0 - x) * vals[k] - (kf + 1.0) * vals[k - 1]) / (kf + 1.0);
        vals.push(next);
    }
    vals
}

/// Result of a Bergman projection evaluated by quadrature.
#[derive(Debug, Clone, Copy)]
pub struct Projection {
    pub value: Complex64,
    /// Difference against the halved-node rule.
    pub residual: f64,
}

/// `(P h)(z) = ∫_Π k(z, w) h(w) dA(w)` by the disk-transferred rule.
pub fn bergman_project(
    h: impl Fn(Complex64) -> Complex64,
    z: &HalfPlanePoint,
    rule: &DiskRule,
) -> Result<Projection> {
    let zc = z.to_complex();
    let coarse = DiskRule::new(&rule.spec().halved())?;
    let fine_val = rule.integrate(|w| kernel(zc, w) * h(w));
    let coarse_val = coarse.integrate(|w| kernel(zc, w) * h(w));
    Ok(Projection {
        value: fine_val,
        residual: (fine_val - coarse_val).norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::QuadratureSpec;
    use approx::assert_relative_eq;

    fn z(x: f64, y: f64) -> Complex64 {
        Complex64::new(x, y)
    }

    #[test]
    fn kernel_values() {
        let k = kernel(z(0.0, 1.0), z(0.0, 1.0));
        assert_relative_eq!(k.re, 1.0 / (4.0 * PI), epsilon = 1e-15);
        assert!(k.im.abs() < 1e-18);

        let k2 = kernel(z(0.0, 2.0), z(0.0, 1.0));
        assert_relative_eq!(k2.re, 1.0 / (9.0 * PI), epsilon = 1e-15);
    }

    #[test]
    fn kernel_conjugate_symmetry() {
        let pairs = [(z(0.3, 0.7), z(-1.2, 2.0)), (z(5.0, 0.1), z(0.0, 1.0))];
        for (a, b) in pairs {
            let k1 = kernel(a, b);
            let k2 = kernel(b, a);
            assert_relative_eq!(k1.re, k2.re, epsilon = 1e-15);
            assert_relative_eq!(k1.im, -k2.im, epsilon = 1e-15);
        }
    }

    #[test]
    fn phi0_at_i() {
        let basis = BasisFamily::new(8);
        let v = basis.eval(0, z(0.0, 1.0));
        // M(i) = 0, J(i) = 1/2: phi_0(i) = 1/(2 sqrt(pi))
        assert_relative_eq!(v.re, 0.5 / PI.sqrt(), epsilon = 1e-15);
        assert!(v.im.abs() < 1e-16);
        for n in 1..8 {
            assert!(basis.eval(n, z(0.0, 1.0)).norm() < 1e-16);
        }
    }

    #[test]
    fn deriv_order_zero_is_eval() {
        let basis = BasisFamily::new(8);
        for n in [0usize, 3, 7] {
            let p = z(0.4, 1.3);
            let a = basis.eval(n, p);
            let b = basis.deriv(n, 0, p).unwrap();
            assert_relative_eq!(a.re, b.re, epsilon = 1e-14);
            assert_relative_eq!(a.im, b.im, epsilon = 1e-14);
        }
    }

    #[test]
    fn deriv_matches_finite_difference() {
        let basis = BasisFamily::new(4);
        let p = z(0.0, 1.0);
        let h = 1e-6;
        let fd = (basis.eval(0, p + Complex64::new(h, 0.0)) - basis.eval(0, p)) / h;
        let d = basis.deriv(0, 1, p).unwrap();
        assert!((fd - d).norm() < 1e-5);
        // exact value: phi_0' = (1/sqrt(pi)) 4i/(1-iz)^3 -> i/(2 sqrt(pi)) at i
        assert_relative_eq!(d.im, 0.5 / PI.sqrt(), epsilon = 1e-13);
        assert!(d.re.abs() < 1e-15);
    }

    #[test]
    fn cauchy_estimate() {
        // |d^a phi_n(z)| <= a! max_{|w-z|=rho} |phi_n| / rho^a for rho < Im z
        let basis = BasisFamily::new(12);
        let p = z(0.5, 1.5);
        let rho = 0.7;
        for (n, a) in [(3usize, 2u32), (9, 4)] {
            let mut sup: f64 = 0.0;
            for k in 0..256 {
                let th = 2.0 * PI * k as f64 / 256.0;
                let w = p + Complex64::from_polar(rho, th);
                sup = sup.max(basis.eval(n, w).norm());
            }
            let mut fact = 1.0f64;
            for i in 2..=a as u64 {
                fact *= i as f64;
            }
            let lhs = basis.deriv(n, a, p).unwrap().norm();
            assert!(lhs <= fact * sup / rho.powi(a as i32) * (1.0 + 1e-9));
        }
    }

    #[test]
    fn stable_far_from_origin() {
        let basis = BasisFamily::new(30);
        let v = basis.eval(20, z(32768.0, 1.0));
        assert!(v.norm().is_finite());
        assert!(v.norm() < 1e-6);
        let d = basis.deriv(20, 3, z(32768.0, 1.0)).unwrap();
        assert!(d.norm().is_finite());
    }

    #[test]
    fn weighted_pair_orthonormality() {
        let basis = BasisFamily::new(30);
        for (n, m) in [(0usize, 0usize), (5, 5), (29, 29)] {
            let v = basis.weighted_pair(0, 0, 0, n, m).unwrap();
            assert_relative_eq!(v.re, 1.0, epsilon = 1e-11);
            assert!(v.im.abs() < 1e-12);
        }
        for (n, m) in [(0usize, 1usize), (3, 11), (2, 29)] {
            assert!(basis.weighted_pair(0, 0, 0, n, m).unwrap().norm() < 1e-11);
        }
    }

    #[test]
    fn weighted_pair_hand_value() {
        // <y phi_0, phi_0> = 2pi * 1! * 2^{-2} * (4/pi) * ∫ e^{-2t} dt = 1,
        // independently: (4/pi) ∫_Π y/|z+i|^4 dA = 2 ∫_0^∞ y/(y+1)^3 dy = 1.
        let basis = BasisFamily::new(4);
        let v = basis.weighted_pair(1, 0, 0, 0, 0).unwrap();
        assert_relative_eq!(v.re, 1.0, epsilon = 1e-12);
        assert!(v.im.abs() < 1e-14);
    }

    #[test]
    fn weighted_pair_rejects_high_weight() {
        let basis = BasisFamily::new(4);
        assert!(basis.weighted_pair(3, 0, 1, 0, 0).is_err());
    }

    #[test]
    fn extreme_order_reports_numeric_range() {
        // factorial overflow at order ~171 must surface as an error, not inf
        let basis = BasisFamily::new(4);
        assert!(basis.deriv(0, 300, z(0.0, 1.0)).is_err());
    }

    #[test]
    fn projection_reproduces_basis() {
        let spec = QuadratureSpec {
            radial: 64,
            angular: 128,
            ..Default::default()
        };
        let rule = DiskRule::new(&spec).unwrap();
        let basis = BasisFamily::new(8);
        let zs = [
            HalfPlanePoint::new(0.5, 0.8).unwrap(),
            HalfPlanePoint::new(-1.0, 1.5).unwrap(),
        ];
        for n in [0usize, 2, 7] {
            for zp in &zs {
                let p = bergman_project(|w| basis.eval(n, w), zp, &rule).unwrap();
                let direct = basis.eval(n, zp.to_complex());
                assert!(
                    (p.value - direct).norm() < 1e-6,
                    "n={n} err={}",
                    (p.value - direct).norm()
                );
            }
        }
    }

    #[test]
    fn projection_kills_antianalytic() {
        let spec = QuadratureSpec::default();
        let rule = DiskRule::new(&spec).unwrap();
        let basis = BasisFamily::new(4);
        let zp = HalfPlanePoint::new(0.5, 0.8).unwrap();
        let p = bergman_project(|w| basis.eval(1, w).conj(), &zp, &rule).unwrap();
        assert!(p.value.norm() < 1e-3);
    }

    #[test]
    fn projection_of_zero() {
        let spec = QuadratureSpec {
            radial: 16,
            angular: 32,
            ..Default::default()
        };
        let rule = DiskRule::new(&spec).unwrap();
        let zp = HalfPlanePoint::new(0.0, 1.0).unwrap();
        let p = bergman_project(|_| Complex64::new(0.0, 0.0), &zp, &rule).unwrap();
        assert_eq!(p.value, Complex64::new(0.0, 0.0));
    }
}
