//! Pseudo-hyperbolic geometry of the upper half-plane.
//!
//! Points live in `Π = { x + iy : y > 0 }`. The pseudo-hyperbolic distance
//! `d(z, w) = |(z - w)/(z - w̄)|` takes values in `[0, 1)`, and every
//! pseudo-hyperbolic disk coincides with a Euclidean disk sitting strictly
//! inside `Π`; both conversions are implemented in closed form, together
//! with the Möbius transfer `z ↦ (z - i)/(1 - iz)` onto the unit disk.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// A point `z = x + iy` of the open upper half-plane (`y > 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlanePoint {
    x: f64,
    y: f64,
}

impl HalfPlanePoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::Domain(format!("non-finite point ({x}, {y})")));
        }
        if y <= 0.0 {
            return Err(Error::Domain(format!(
                "point ({x}, {y}) has non-positive imaginary part"
            )));
        }
        Ok(Self { x, y })
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        Self::new(z.re, z.im)
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }
}

/// Pseudo-hyperbolic disk `D(center, radius)` with radius in `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhypDisk {
    pub center: HalfPlanePoint,
    radius: f64,
}

impl PhypDisk {
    pub fn new(center: HalfPlanePoint, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius < 1.0) {
            return Err(Error::Domain(format!(
                "pseudo-hyperbolic radius {radius} outside (0, 1)"
            )));
        }
        Ok(Self { center, radius })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// Euclidean disk `B(center, radius)` lying strictly inside the half-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EuclidDisk {
    pub center: HalfPlanePoint,
    radius: f64,
}

impl EuclidDisk {
    pub fn new(center: HalfPlanePoint, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Domain(format!(
                "euclidean radius {radius} must be positive"
            )));
        }
        if radius >= center.y() {
            return Err(Error::Domain(format!(
                "disk of radius {radius} at height {} touches the real axis",
                center.y()
            )));
        }
        Ok(Self { center, radius })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn contains(&self, z: Complex64) -> bool {
        let dx = z.re - self.center.x();
        let dy = z.im - self.center.y();
        // closed disk: boundary points count as inside
        dx * dx + dy * dy <= self.radius * self.radius * (1.0 + 1e-14)
    }
}

/// `d(z, w) = |(z - w)/(z - w̄)|`, symmetric, in `[0, 1)`.
pub fn phyp_distance(z: &HalfPlanePoint, w: &HalfPlanePoint) -> f64 {
    let zc = z.to_complex();
    let wc = w.to_complex();
    ((zc - wc) / (zc - wc.conj())).norm()
}

/// Disk form of the pseudo-hyperbolic distance, `|(ζ - ω)/(1 - ω̄ζ)|`.
pub fn disk_phyp_distance(zeta: Complex64, omega: Complex64) -> f64 {
    ((zeta - omega) / (Complex64::new(1.0, 0.0) - omega.conj() * zeta)).norm()
}

/// `D(x + iy, R) = B(x + iy(1+R²)/(1-R²), 2Ry/(1-R²))`.
pub fn phyp_to_euclid(d: &PhypDisk) -> EuclidDisk {
    let r = d.radius();
    let y = d.center.y();
    let denom = 1.0 - r * r;
    let cy = y * (1.0 + r * r) / denom;
    let rad = 2.0 * r * y / denom;
    // rad < cy is automatic: 2Ry < (1+R²)y for R in (0,1)
    EuclidDisk {
        center: HalfPlanePoint {
            x: d.center.x(),
            y: cy,
        },
        radius: rad,
    }
}

/// Inverse of [`phyp_to_euclid`]: `R = η/r - √(η²/r² - 1)`, `y = η(1-R²)/(1+R²)`.
pub fn euclid_to_phyp(b: &EuclidDisk) -> PhypDisk {
    let eta = b.center.y();
    let r = b.radius();
    let q = eta / r;
    let radius = q - (q * q - 1.0).sqrt();
    let y = (1.0 - radius * radius) / (1.0 + radius * radius) * eta;
    PhypDisk {
        center: HalfPlanePoint { x: b.center.x(), y },
        radius,
    }
}

/// Area of the pseudo-hyperbolic disk, `4πR²y²/(1-R²)²`.
pub fn phyp_area(d: &PhypDisk) -> f64 {
    let r = d.radius();
    let y = d.center.y();
    let denom = 1.0 - r * r;
    4.0 * std::f64::consts::PI * r * r * y * y / (denom * denom)
}

/// Möbius map `M(z) = (z - i)/(1 - iz)` onto the unit disk.
pub fn mobius_to_disk(z: &HalfPlanePoint) -> Complex64 {
    let zc = z.to_complex();
    let i = Complex64::i();
    (zc - i) / (Complex64::new(1.0, 0.0) - i * zc)
}

/// Möbius map on raw complex input; no domain check.
pub fn mobius_to_disk_raw(z: Complex64) -> Complex64 {
    let i = Complex64::i();
    (z - i) / (Complex64::new(1.0, 0.0) - i * z)
}

/// Inverse Möbius map `ζ ↦ (ζ + i)/(1 + iζ)`; requires `|ζ| < 1`.
pub fn mobius_to_halfplane(zeta: Complex64) -> Result<HalfPlanePoint> {
    if zeta.norm() >= 1.0 {
        return Err(Error::Domain(format!(
            "|ζ| = {} is not inside the unit disk",
            zeta.norm()
        )));
    }
    let i = Complex64::i();
    let z = (zeta + i) / (Complex64::new(1.0, 0.0) + i * zeta);
    HalfPlanePoint::from_complex(z)
}
