//! Singular symbols (measures and their distributional derivatives) and the
//! Carleson k-norm machinery.
//!
//! A symbol measure is a finite sum of weighted atoms, weighted horizontal
//! lines (Lebesgue measure on `y = const`, optionally truncated in `x`),
//! and an optional smooth density. The k-norm
//! `ϖ_{k,γ}(μ) = sup_z |μ|(D(z,γ)) (Im z)^{-2(k+1)} Γ(k+1)² γ^{-2k}`
//! is evaluated by a certified-from-below grid search over disk centers
//! with pseudo-hyperbolic spacing, followed by multistart pattern
//! refinement around the best candidates.

use crate::error::{Error, Result};
use crate::geometry::{phyp_to_euclid, EuclidDisk, HalfPlanePoint, PhypDisk};
use crate::quad::{gauss_legendre_on, QuadratureSpec};
use num_complex::Complex64;
use serde::Deserialize;
use std::f64::consts::PI;

/// Built-in smooth densities with closed-form Wirtinger derivatives.
#[derive(Debug, Clone, PartialEq)]
pub enum Density {
    /// `a(z) = exp(-(x-x0)²/(2σx²) - (y-y0)²/(2σy²))`, derivatives of any
    /// order via the polynomial recursion.
    Gaussian {
        x0: f64,
        y0: f64,
        sigma_x: f64,
        sigma_y: f64,
    },
    /// Normalized area measure of a Euclidean disk, density `1/(π r²)`.
    /// Not smooth: derivative requests fail.
    UniformDisk { disk: EuclidDisk },
    /// Constant density on a compact axis-aligned box inside the half-plane.
    Box {
        x0: f64,
        x1: f64,
        y0: f64,
        y1: f64,
        value: f64,
    },
}

impl Density {
    pub fn eval(&self, z: Complex64) -> f64 {
        match self {
            Density::Gaussian {
                x0,
                y0,
                sigma_x,
                sigma_y,
            } => {
                let dx = z.re - x0;
                let dy = z.im - y0;
                (-dx * dx / (2.0 * sigma_x * sigma_x) - dy * dy / (2.0 * sigma_y * sigma_y)).exp()
            }
            Density::UniformDisk { disk } => {
                if disk.contains(z) {
                    1.0 / (PI * disk.radius() * disk.radius())
                } else {
                    0.0
                }
            }
            Density::Box {
                x0,
                x1,
                y0,
                y1,
                value,
            } => {
                if z.re >= *x0 && z.re <= *x1 && z.im >= *y0 && z.im <= *y1 {
                    *value
                } else {
                    0.0
                }
            }
        }
    }

    /// Wirtinger derivative `∂^p ∂̄^q a` at `z`.
    ///
    /// For the Gaussian the derivative is `P(dx, dy) a(z)` with `P` built by
    /// the exact recursion `∂ = (∂_x - i ∂_y)/2`, `∂̄ = (∂_x + i ∂_y)/2`.
    pub fn wirtinger(&self, p: u32, q: u32, z: Complex64) -> Result<Complex64> {
        match self {
            Density::Gaussian {
                x0,
                y0,
                sigma_x,
                sigma_y,
            } => {
                let poly = gaussian_deriv_poly(p, q, *sigma_x, *sigma_y);
                let dx = z.re - x0;
                let dy = z.im - y0;
                let mut acc = Complex64::new(0.0, 0.0);
                for ((i, j), c) in poly {
                    acc += c * dx.powi(i as i32) * dy.powi(j as i32);
                }
                Ok(acc * self.eval(z))
            }
            _ => {
                if p == 0 && q == 0 {
                    Ok(Complex64::new(self.eval(z), 0.0))
                } else {
                    Err(Error::Domain(
                        "derivatives are only available for the smooth density family".into(),
                    ))
                }
            }
        }
    }

    /// Quadrature nodes covering the support (or effective support), as
    /// `(point, dA-weight)` pairs. Gaussians are truncated at eight sigmas
    /// clipped to the half-plane.
    pub fn quad_nodes(&self, spec: &QuadratureSpec) -> Vec<(Complex64, f64)> {
        match self {
            Density::UniformDisk { disk } => {
                polar_nodes(disk.center.to_complex(), disk.radius(), spec)
            }
            Density::Box { x0, x1, y0, y1, .. } => box_nodes(*x0, *x1, *y0, *y1, spec),
            Density::Gaussian {
                x0,
                y0,
                sigma_x,
                sigma_y,
            } => {
                let lo_y = (y0 - 8.0 * sigma_y).max(1e-12);
                box_nodes(
                    x0 - 8.0 * sigma_x,
                    x0 + 8.0 * sigma_x,
                    lo_y,
                    y0 + 8.0 * sigma_y,
                    spec,
                )
            }
        }
    }

    /// Bounding box of the (effective) support: `(xmin, xmax, ymin, ymax)`.
    /// Gaussian tails are cut at eight sigmas; the lower edge stays a
    /// positive fraction of the center height so grids over the support
    /// remain finite.
    pub fn support_box(&self) -> (f64, f64, f64, f64) {
        match self {
            Density::Gaussian {
                x0,
                y0,
                sigma_x,
                sigma_y,
            } => (
                x0 - 8.0 * sigma_x,
                x0 + 8.0 * sigma_x,
                (y0 - 8.0 * sigma_y).max(y0 * 0.01),
                y0 + 8.0 * sigma_y,
            ),
            Density::UniformDisk { disk } => {
                let c = disk.center.to_complex();
                let r = disk.radius();
                (c.re - r, c.re + r, c.im - r, c.im + r)
            }
            Density::Box { x0, x1, y0, y1, .. } => (*x0, *x1, *y0, *y1),
        }
    }
}

fn polar_nodes(center: Complex64, radius: f64, spec: &QuadratureSpec) -> Vec<(Complex64, f64)> {
    let nr = (spec.radial / 2).max(16);
    let nt = (spec.angular / 2).max(32);
    let (r, wr) = gauss_legendre_on(nr, 0.0, radius);
    let wt = 2.0 * PI / nt as f64;
    let mut out = Vec::with_capacity(nr * nt);
    for (ri, &rho) in r.iter().enumerate() {
        for k in 0..nt {
            let theta = wt * k as f64;
            out.push((
                center + Complex64::from_polar(rho, theta),
                wr[ri] * wt * rho,
            ));
        }
    }
    out
}

fn box_nodes(x0: f64, x1: f64, y0: f64, y1: f64, spec: &QuadratureSpec) -> Vec<(Complex64, f64)> {
    let n = (spec.radial / 2).max(24);
    let (xs, wx) = gauss_legendre_on(n, x0, x1);
    let (ys, wy) = gauss_legendre_on(n, y0, y1);
    let mut out = Vec::with_capacity(n * n);
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in ys.iter().enumerate() {
            out.push((Complex64::new(x, y), wx[i] * wy[j]));
        }
    }
    out
}

/// Polynomial prefactor of `∂^p ∂̄^q` applied to the Gaussian, as monomials
/// `c * dx^i dy^j`.
fn gaussian_deriv_poly(p: u32, q: u32, sx: f64, sy: f64) -> Vec<((u32, u32), Complex64)> {
    use std::collections::BTreeMap;
    type Poly = BTreeMap<(u32, u32), Complex64>;
    // log-derivatives of the Gaussian: Qx = -dx/sx², Qy = -dy/sy²
    // ∂(P a) = (Px/2 - i Py/2 + P (Qx/2 - i Qy/2)) a, and ∂̄ with +i.
    let step = |poly: &Poly, conj: bool| -> Poly {
        let iy = if conj {
            Complex64::i()
        } else {
            -Complex64::i()
        };
        let mut out: Poly = BTreeMap::new();
        let mut add = |k: (u32, u32), v: Complex64| {
            let e = out.entry(k).or_insert(Complex64::new(0.0, 0.0));
            *e += v;
        };
        for (&(i, j), &c) in poly {
            // formal x- and y-derivatives of the monomial
            if i > 0 {
                add((i - 1, j), c * i as f64 * 0.5);
            }
            if j > 0 {
                add((i, j - 1), c * j as f64 * 0.5 * iy);
            }
            // product with the log-derivative
            add((i + 1, j), c * (-0.5 / (sx * sx)));
            add((i, j + 1), c * (-0.5 / (sy * sy)) * iy);
        }
        out
    };
    let mut poly: Poly = BTreeMap::new();
    poly.insert((0, 0), Complex64::new(1.0, 0.0));
    for _ in 0..p {
        poly = step(&poly, false);
    }
    for _ in 0..q {
        poly = step(&poly, true);
    }
    poly.into_iter().collect()
}

/// Weighted Lebesgue measure on a horizontal line, optionally truncated.
#[derive(Debug, Clone, PartialEq)]
pub struct LineMeasure {
    pub y: f64,
    pub weight: Complex64,
    pub x_span: Option<(f64, f64)>,
}

/// A complex measure on the half-plane: atoms + weighted lines + density.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SymbolMeasure {
    pub atoms: Vec<(HalfPlanePoint, Complex64)>,
    pub lines: Vec<LineMeasure>,
    pub density: Option<Density>,
}

impl SymbolMeasure {
    pub fn from_atoms(atoms: Vec<(HalfPlanePoint, Complex64)>) -> Self {
        Self {
            atoms,
            ..Default::default()
        }
    }

    pub fn from_lines(lines: Vec<LineMeasure>) -> Self {
        Self {
            lines,
            ..Default::default()
        }
    }

    pub fn from_density(density: Density) -> Self {
        Self {
            density: Some(density),
            ..Default::default()
        }
    }

    pub fn point_mass(z: HalfPlanePoint, weight: Complex64) -> Self {
        Self::from_atoms(vec![(z, weight)])
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty() && self.lines.is_empty() && self.density.is_none()
    }

    /// All weights real non-negative and the density a non-negative family.
    pub fn is_positive(&self) -> bool {
        self.atoms.iter().all(|(_, w)| w.im == 0.0 && w.re >= 0.0)
            && self
                .lines
                .iter()
                .all(|l| l.weight.im == 0.0 && l.weight.re >= 0.0)
    }

    /// Bounding box of the support: `(xmin, xmax, ymin, ymax)`.
    pub fn support_box(&self) -> Option<(f64, f64, f64, f64)> {
        let mut bb: Option<(f64, f64, f64, f64)> = None;
        let mut absorb = |x0: f64, x1: f64, y0: f64, y1: f64| {
            bb = Some(match bb {
                None => (x0, x1, y0, y1),
                Some((a, b, c, d)) => (a.min(x0), b.max(x1), c.min(y0), d.max(y1)),
            });
        };
        for (z, _) in &self.atoms {
            absorb(z.x(), z.x(), z.y(), z.y());
        }
        for l in &self.lines {
            let (x0, x1) = l.x_span.unwrap_or((-1.0, 1.0));
            absorb(x0, x1, l.y, l.y);
        }
        if let Some(d) = &self.density {
            let (x0, x1, y0, y1) = d.support_box();
            absorb(x0, x1, y0, y1);
        }
        bb
    }

    /// Parse the measure description document.
    ///
    /// Schema: `{"atoms": [[x, y, re, im], ...],
    ///           "lines": [[y, re, im] | [y, re, im, x0, x1], ...],
    ///           "density": {"kind": "gaussian", ...} | null}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawMeasure = serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("measure document: {e}")))?;
        let mut atoms = Vec::new();
        for (idx, a) in raw.atoms.iter().enumerate() {
            if a.len() != 4 {
                return Err(Error::Parse(format!(
                    "atoms[{idx}]: expected [x, y, re, im]"
                )));
            }
            let p = HalfPlanePoint::new(a[0], a[1])
                .map_err(|e| Error::Parse(format!("atoms[{idx}]: {e}")))?;
            atoms.push((p, Complex64::new(a[2], a[3])));
        }
        let mut lines = Vec::new();
        for (idx, l) in raw.lines.iter().enumerate() {
            if l.len() != 3 && l.len() != 5 {
                return Err(Error::Parse(format!(
                    "lines[{idx}]: expected [y, re, im] or [y, re, im, x0, x1]"
                )));
            }
            if l[0] <= 0.0 {
                return Err(Error::Parse(format!(
                    "lines[{idx}]: height {} must be positive",
                    l[0]
                )));
            }
            lines.push(LineMeasure {
                y: l[0],
                weight: Complex64::new(l[1], l[2]),
                x_span: if l.len() == 5 {
                    Some((l[3], l[4]))
                } else {
                    None
                },
            });
        }
        let density = match raw.density {
            None => None,
            Some(d) => Some(d.build()?),
        };
        Ok(Self {
            atoms,
            lines,
            density,
        })
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMeasure {
    #[serde(default)]
    atoms: Vec<Vec<f64>>,
    #[serde(default)]
    lines: Vec<Vec<f64>>,
    #[serde(default)]
    density: Option<RawDensity>,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum RawDensity {
    Gaussian {
        x0: f64,
        y0: f64,
        sigma: f64,
    },
    UniformDisk {
        x0: f64,
        y0: f64,
        radius: f64,
    },
    Box {
        x0: f64,
        x1: f64,
        y0: f64,
        y1: f64,
        value: f64,
    },
}

impl RawDensity {
    fn build(self) -> Result<Density> {
        match self {
            RawDensity::Gaussian { x0, y0, sigma } => {
                if y0 <= 0.0 {
                    return Err(Error::Parse(format!(
                        "density: center height {y0} must be positive"
                    )));
                }
                if sigma <= 0.0 {
                    return Err(Error::Parse("density: sigma must be positive".into()));
                }
                Ok(Density::Gaussian {
                    x0,
                    y0,
                    sigma_x: sigma,
                    sigma_y: sigma,
                })
            }
            RawDensity::UniformDisk { x0, y0, radius } => {
                let center = HalfPlanePoint::new(x0, y0)
                    .map_err(|e| Error::Parse(format!("density: {e}")))?;
                let disk = EuclidDisk::new(center, radius)
                    .map_err(|e| Error::Parse(format!("density: {e}")))?;
                Ok(Density::UniformDisk { disk })
            }
            RawDensity::Box {
                x0,
                x1,
                y0,
                y1,
                value,
            } => {
                if y0 <= 0.0 || y1 <= y0 || x1 <= x0 {
                    return Err(Error::Parse(
                        "density: box must be non-empty and above the axis".into(),
                    ));
                }
                Ok(Density::Box {
                    x0,
                    x1,
                    y0,
                    y1,
                    value,
                })
            }
        }
    }
}

/// Distributional derivative `∂^α ∂̄^β μ` of a base measure.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeSymbol {
    pub base: SymbolMeasure,
    pub alpha: u32,
    pub beta: u32,
}

impl DerivativeSymbol {
    pub fn new(base: SymbolMeasure, alpha: u32, beta: u32) -> Self {
        Self { base, alpha, beta }
    }

    pub fn plain(base: SymbolMeasure) -> Self {
        Self {
            base,
            alpha: 0,
            beta: 0,
        }
    }

    /// The targeted class index `k = (α + β)/2`, a half-integer.
    pub fn k(&self) -> f64 {
        (self.alpha + self.beta) as f64 / 2.0
    }
}

/// Lanczos gamma evaluation (g = 7, 9 terms), relative error below 1e-12.
pub fn gamma_fn(x: f64) -> f64 {
    const G: [f64; 9] = [
        0.999_999_999_999_81,
        676.520_368_121_885,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        PI / ((PI * x).sin() * gamma_fn(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut a = G[0];
        let t = x + 7.5;
        for (i, &g) in G.iter().enumerate().skip(1) {
            a += g / (x + i as f64);
        }
        (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
    }
}

/// Total-variation mass of the measure on a pseudo-hyperbolic disk.
///
/// Atoms on the boundary circle count as inside (closed-disk convention);
/// lines contribute `|W| *` chord length; the density contributes the
/// integral of its absolute value over the Euclidean disk.
pub fn mass_on_disk(mu: &SymbolMeasure, d: &PhypDisk) -> f64 {
    let b = phyp_to_euclid(d);
    mass_on_euclid(mu, b.center.x(), b.center.y(), b.radius())
}

fn mass_on_euclid(mu: &SymbolMeasure, cx: f64, cy: f64, r: f64) -> f64 {
    let mut mass = 0.0;
    for (z, w) in &mu.atoms {
        let dx = z.x() - cx;
        let dy = z.y() - cy;
        if dx * dx + dy * dy <= r * r * (1.0 + 1e-14) {
            mass += w.norm();
        }
    }
    for l in &mu.lines {
        let dist = (l.y - cy).abs();
        if dist < r {
            let half = (r * r - dist * dist).sqrt();
            let (mut a, mut b) = (cx - half, cx + half);
            if let Some((x0, x1)) = l.x_span {
                a = a.max(x0);
                b = b.min(x1);
            }
            if b > a {
                mass += l.weight.norm() * (b - a);
            }
        }
    }
    if let Some(density) = &mu.density {
        // skip the quadrature when the disk misses the effective support
        let (x0, x1, y0, y1) = density.support_box();
        let intersects = cx + r >= x0 && cx - r <= x1 && cy + r >= y0 && cy - r <= y1;
        if intersects {
            // polar rule on the euclidean disk keeps the integrand smooth
            let spec = QuadratureSpec {
                radial: 16,
                angular: 32,
                ..Default::default()
            };
            let nodes = polar_nodes(Complex64::new(cx, cy), r, &spec);
            let mut acc = 0.0;
            for (z, w) in nodes {
                if z.im > 0.0 {
                    acc += density.eval(z).abs() * w;
                }
            }
            mass += acc;
        }
    }
    mass
}

/// Grid-search controls for the Carleson sup.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    /// Multiplies the base pseudo-hyperbolic spacing `γ/2`; must be <= 1 so
    /// the grid keeps the covering property.
    pub spacing_factor: f64,
    /// Number of best coarse candidates refined by pattern search.
    pub multistart: usize,
    /// Iteration budget for each pattern search.
    pub refine_iters: usize,
    /// Upper bound on coarse grid size; larger requests are rejected.
    pub max_centers: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            spacing_factor: 1.0,
            multistart: 24,
            refine_iters: 400,
            max_centers: 4_000_000,
        }
    }
}

impl GridSpec {
    fn validate(&self) -> Result<()> {
        if !(self.spacing_factor > 0.0 && self.spacing_factor <= 1.0) {
            return Err(Error::Grid(format!(
                "spacing factor {} must be in (0, 1] to keep pseudo-hyperbolic spacing <= gamma/2",
                self.spacing_factor
            )));
        }
        if self.multistart == 0 || self.refine_iters == 0 {
            return Err(Error::Grid("empty grid refinement request".into()));
        }
        Ok(())
    }
}

/// Description of the grid actually used, for the report.
#[derive(Debug, Clone)]
pub struct GridDescription {
    pub coarse_centers: usize,
    pub y_levels: usize,
    pub spacing_factor: f64,
}

/// Result of a Carleson k-norm computation.
#[derive(Debug, Clone)]
pub struct CarlesonReport {
    pub k: f64,
    pub gamma: f64,
    /// `ϖ_{k,γ}(μ)`, the grid maximum of the defining expression.
    pub norm: f64,
    pub argmax_center: HalfPlanePoint,
    pub grid: GridDescription,
}

/// The Carleson expression at center `z0`:
/// `|μ|(D(z0, γ)) (Im z0)^{-2(k+1)} Γ(k+1)² γ^{-2k}`.
fn carleson_expr(mu: &SymbolMeasure, k: f64, gamma: f64, x0: f64, y0: f64) -> f64 {
    let denom = 1.0 - gamma * gamma;
    let cy = y0 * (1.0 + gamma * gamma) / denom;
    let r = 2.0 * gamma * y0 / denom;
    let gk = gamma_fn(k + 1.0);
    mass_on_euclid(mu, x0, cy, r) * y0.powf(-2.0 * (k + 1.0)) * gk * gk * gamma.powf(-2.0 * k)
}

struct Candidate {
    value: f64,
    x: f64,
    y: f64,
}

/// Carleson k-norm `ϖ_{k,γ}(μ)` by grid search with pattern refinement.
///
/// The grid covers the support region expanded by one `γ`-disk: y-levels in
/// geometric progression with log-step `γ/2 * spacing_factor`, x-steps
/// `γ y / 2 * spacing_factor`. With positive weights every evaluation is a
/// certified lower bound for the sup.
pub fn carleson_norm(
    mu: &SymbolMeasure,
    k: f64,
    gamma: f64,
    grid: &GridSpec,
) -> Result<CarlesonReport> {
    validate_k_gamma(k, gamma)?;
    grid.validate()?;
    if mu.is_empty() {
        return Ok(CarlesonReport {
            k,
            gamma,
            norm: 0.0,
            argmax_center: HalfPlanePoint::new(0.0, 1.0).unwrap(),
            grid: GridDescription {
                coarse_centers: 0,
                y_levels: 0,
                spacing_factor: grid.spacing_factor,
            },
        });
    }
    let (cands, desc) = coarse_candidates(mu, k, gamma, grid, None)?;
    let best = refine(mu, k, gamma, grid, cands, None);
    Ok(CarlesonReport {
        k,
        gamma,
        norm: best.value,
        argmax_center: HalfPlanePoint::new(best.x, best.y)
            .unwrap_or_else(|_| HalfPlanePoint::new(0.0, 1.0).unwrap()),
        grid: desc,
    })
}

fn validate_k_gamma(k: f64, gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Domain(format!("gamma = {gamma} outside (0, 1)")));
    }
    let two_k = 2.0 * k;
    if k < 0.0 || (two_k - two_k.round()).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "k = {k} is not a non-negative half-integer"
        )));
    }
    Ok(())
}

/// Rectangle `Q_R = {x in (-R, R), y in (1/R, R)}` used by the vanishing
/// profile; the sup is restricted to its complement.
fn inside_qr(x: f64, y: f64, r: f64) -> bool {
    x > -r && x < r && y > 1.0 / r && y < r
}

/// Analytically motivated starting centers: for every atom the lowest
/// center whose closed disk still contains it (where single-atom suprema
/// sit), plus log-spaced heights over each line and the density support.
/// Seeding them keeps the search monotone under adding atoms and immune to
/// plateau stalls of the pattern refinement.
fn corner_seeds(mu: &SymbolMeasure, gamma: f64) -> Vec<(f64, f64)> {
    let low = (1.0 - gamma) / (1.0 + gamma);
    let high = (1.0 + gamma) / (1.0 - gamma);
    let mut seeds = Vec::new();
    for (z, _) in &mu.atoms {
        seeds.push((z.x(), z.y() * low));
        seeds.push((z.x(), z.y()));
    }
    for l in &mu.lines {
        let x = l.x_span.map(|(a, b)| 0.5 * (a + b)).unwrap_or(0.0);
        let lo = l.y * low * (1.0 + 1e-12);
        let ratio: f64 = high / low;
        for i in 0..8 {
            seeds.push((x, lo * ratio.powf(i as f64 / 7.0 * 0.999)));
        }
    }
    if let Some(d) = &mu.density {
        let (x0, x1, y0, y1) = d.support_box();
        for i in 0..5 {
            let x = x0 + (x1 - x0) * i as f64 / 4.0;
            seeds.push((x, y0 * low.max(1e-12)));
            seeds.push((x, 0.5 * (y0 + y1)));
        }
    }
    seeds.retain(|&(x, y)| x.is_finite() && y > 0.0 && y.is_finite());
    seeds
}

fn coarse_candidates(
    mu: &SymbolMeasure,
    k: f64,
    gamma: f64,
    grid: &GridSpec,
    exclude_qr: Option<f64>,
) -> Result<(Vec<Candidate>, GridDescription)> {
    let (xmin, xmax, ymin, ymax) = mu.support_box().expect("non-empty measure");
    // centers whose gamma-disk can reach the support
    let lo = ymin * (1.0 - gamma) / (1.0 + gamma) * 0.999;
    let hi = ymax * (1.0 + gamma) / (1.0 - gamma) * 1.001;
    if !(lo > 0.0 && hi.is_finite()) {
        return Err(Error::Grid(
            "support region cannot be covered by a finite grid".into(),
        ));
    }
    let hlog = gamma / 2.0 * grid.spacing_factor;
    let mut cands: Vec<Candidate> = Vec::new();
    let mut count: usize = 0;
    let mut levels = 0;
    let mut y = lo;
    while y <= hi {
        levels += 1;
        let step = gamma * y / 2.0 * grid.spacing_factor;
        let pad = 3.0 * y;
        let mut x = xmin - pad;
        while x <= xmax + pad {
            count += 1;
            if count > grid.max_centers {
                return Err(Error::Grid(format!(
                    "grid request exceeds {} centers; widen the spacing or shrink the support",
                    grid.max_centers
                )));
            }
            let excluded = exclude_qr.map(|r| inside_qr(x, y, r)).unwrap_or(false);
            if !excluded {
                let v = carleson_expr(mu, k, gamma, x, y);
                if v > 0.0 {
                    cands.push(Candidate { value: v, x, y });
                }
            }
            x += step;
        }
        y *= hlog.exp();
    }
    cands.sort_by(|a, b| b.value.partial_cmp(&a.value).unwrap());
    // keep spatially diverse starts so one basin cannot crowd out the rest
    let mut kept: Vec<Candidate> = Vec::new();
    for c in cands {
        if kept.len() >= grid.multistart {
            break;
        }
        let distinct = kept.iter().all(|k0| {
            let a = HalfPlanePoint::new(k0.x, k0.y);
            let b = HalfPlanePoint::new(c.x, c.y);
            match (a, b) {
                (Ok(a), Ok(b)) => crate::geometry::phyp_distance(&a, &b) > gamma / 4.0,
                _ => true,
            }
        });
        if distinct {
            kept.push(c);
        }
    }
    // corner seeds are always refined, independent of their coarse rank
    for (x, y) in corner_seeds(mu, gamma) {
        if exclude_qr.map(|r| inside_qr(x, y, r)).unwrap_or(false) {
            continue;
        }
        kept.push(Candidate {
            value: carleson_expr(mu, k, gamma, x, y),
            x,
            y,
        });
    }
    Ok((
        kept,
        GridDescription {
            coarse_centers: count,
            y_levels: levels,
            spacing_factor: grid.spacing_factor,
        },
    ))
}

fn refine(
    mu: &SymbolMeasure,
    k: f64,
    gamma: f64,
    grid: &GridSpec,
    cands: Vec<Candidate>,
    exclude_qr: Option<f64>,
) -> Candidate {
    let mut best = Candidate {
        value: 0.0,
        x: 0.0,
        y: 1.0,
    };
    for start in cands {
        let mut v = start.value;
        let mut bx = start.x;
        let mut by = start.y;
        let mut dx = gamma * by / 2.0;
        let mut dly = gamma / 2.0;
        for _ in 0..grid.refine_iters {
            let mut improved = false;
            for (ix, iy) in [
                (-1.0, 0.0),
                (1.0, 0.0),
                (0.0, -1.0),
                (0.0, 1.0),
                (-1.0, -1.0),
                (1.0, 1.0),
                (-1.0, 1.0),
                (1.0, -1.0),
            ] {
                let x = bx + ix * dx;
                let y = by * (iy * dly).exp();
                if y <= 0.0 {
                    continue;
                }
                if exclude_qr.map(|r| inside_qr(x, y, r)).unwrap_or(false) {
                    continue;
                }
                let cand = carleson_expr(mu, k, gamma, x, y);
                if cand > v {
                    v = cand;
                    bx = x;
                    by = y;
                    improved = true;
                }
            }
            if !improved {
                dx *= 0.5;
                dly *= 0.5;
                if dx < 1e-13 * by.max(1.0) && dly < 1e-14 {
                    break;
                }
            }
        }
        if v > best.value {
            best = Candidate {
                value: v,
                x: bx,
                y: by,
            };
        }
    }
    best
}

/// Sup of the Carleson expression outside the rectangles `Q_R` for each `R`
/// in `r_list`. A profile decreasing to zero certifies the compactness
/// hypothesis; compactly supported measures hit exactly zero once `Q_R`
/// swallows the support.
pub fn vanishing_profile(
    mu: &SymbolMeasure,
    k: f64,
    gamma: f64,
    r_list: &[f64],
    grid: &GridSpec,
) -> Result<Vec<f64>> {
    validate_k_gamma(k, gamma)?;
    grid.validate()?;
    if r_list.is_empty() {
        return Err(Error::Grid("empty R list".into()));
    }
    for w in r_list.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Grid("R list must be strictly increasing".into()));
        }
    }
    if r_list[0] <= 1.0 {
        return Err(Error::Grid("each R must exceed 1".into()));
    }
    if mu.is_empty() {
        return Ok(vec![0.0; r_list.len()]);
    }
    let mut out = Vec::with_capacity(r_list.len());
    for &r in r_list {
        let (cands, _) = coarse_candidates(mu, k, gamma, grid, Some(r))?;
        if cands.is_empty() {
            out.push(0.0);
        } else {
            out.push(refine(mu, k, gamma, grid, cands, Some(r)).value);
        }
    }
    Ok(out)
}

/// Rescaled k-norm for the measure `(Im z)^{2(l-k)} μ`:
/// `ϖ_k(μ) = γ^{2(l-k)} (Γ(k+1)/Γ(l+1))² ϖ_l(μ)`.
pub fn rescale_norm(report: &CarlesonReport, l: f64) -> f64 {
    let k = report.k;
    let ratio = gamma_fn(k + 1.0) / gamma_fn(l + 1.0);
    report.gamma.powf(2.0 * (l - k)) * ratio * ratio * report.norm
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pt(x: f64, y: f64) -> HalfPlanePoint {
        HalfPlanePoint::new(x, y).unwrap()
    }

    fn unit_atom_at_i() -> SymbolMeasure {
        SymbolMeasure::point_mass(pt(0.0, 1.0), Complex64::new(1.0, 0.0))
    }

    #[test]
    fn gamma_reference_values() {
        assert_relative_eq!(gamma_fn(1.0), 1.0, max_relative = 1e-12);
        assert_relative_eq!(gamma_fn(0.5), PI.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(gamma_fn(1.5), PI.sqrt() / 2.0, max_relative = 1e-12);
        assert_relative_eq!(gamma_fn(5.0), 24.0, max_relative = 1e-12);
        assert_relative_eq!(gamma_fn(2.5), 1.329_340_388_179_137_0, max_relative = 1e-12);
    }

    #[test]
    fn mass_atom_inside_and_outside() {
        let mu = unit_atom_at_i();
        let d = PhypDisk::new(pt(0.0, 1.0), 0.5).unwrap();
        assert_relative_eq!(mass_on_disk(&mu, &d), 1.0);
        let far = PhypDisk::new(pt(10.0, 10.0), 0.5).unwrap();
        assert_eq!(mass_on_disk(&mu, &far), 0.0);
    }

    #[test]
    fn mass_atom_on_boundary_counts() {
        // atom i sits exactly on the boundary of D(i/3-ish disk): center
        // (0, 1/3), gamma 1/2 puts the atom on the circle.
        let mu = unit_atom_at_i();
        let d = PhypDisk::new(pt(0.0, 1.0 / 3.0), 0.5).unwrap();
        assert_relative_eq!(mass_on_disk(&mu, &d), 1.0);
    }

    #[test]
    fn mass_line_chord() {
        // line weight 1 at y=1, disk D(i, 1/2) = B(5i/3, 4/3):
        // chord half-length sqrt((4/3)^2 - (2/3)^2) = sqrt(4/3)
        let mu = SymbolMeasure::from_lines(vec![LineMeasure {
            y: 1.0,
            weight: Complex64::new(1.0, 0.0),
            x_span: None,
        }]);
        let d = PhypDisk::new(pt(0.0, 1.0), 0.5).unwrap();
        assert_relative_eq!(
            mass_on_disk(&mu, &d),
            2.0 * (4.0f64 / 3.0).sqrt(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn carleson_anchor_is_nine() {
        // unit atom at i, k=0, gamma=1/2: sup of (Im z)^{-2} over the
        // pseudo-hyperbolic ball, attained at Im z = 1/3.
        let mu = unit_atom_at_i();
        let rep = carleson_norm(&mu, 0.0, 0.5, &GridSpec::default()).unwrap();
        assert_relative_eq!(rep.norm, 9.0, max_relative = 1e-6);
        assert_relative_eq!(rep.argmax_center.y(), 1.0 / 3.0, max_relative = 1e-4);
    }

    #[test]
    fn carleson_zero_measure() {
        let rep = carleson_norm(&SymbolMeasure::default(), 0.0, 0.5, &GridSpec::default()).unwrap();
        assert_eq!(rep.norm, 0.0);
    }

    #[test]
    fn carleson_single_line_closed_form() {
        // optimum of (2/3) sqrt(-9s^2 + 30s - 9)/s^2 at s = (5 - sqrt(17))/2
        let mu = SymbolMeasure::from_lines(vec![LineMeasure {
            y: 1.0,
            weight: Complex64::new(1.0, 0.0),
            x_span: None,
        }]);
        let rep = carleson_norm(&mu, 0.0, 0.5, &GridSpec::default()).unwrap();
        let s = (5.0 - 17.0f64.sqrt()) / 2.0;
        let expect = (2.0 / 3.0) * (-9.0 * s * s + 30.0 * s - 9.0).sqrt() / (s * s);
        assert_relative_eq!(rep.norm, expect, max_relative = 1e-8);
    }

    #[test]
    fn carleson_scales_linearly_in_weight() {
        let mut mu = unit_atom_at_i();
        let r1 = carleson_norm(&mu, 0.0, 0.5, &GridSpec::default()).unwrap();
        mu.atoms[0].1 = Complex64::new(3.5, 0.0);
        let r2 = carleson_norm(&mu, 0.0, 0.5, &GridSpec::default()).unwrap();
        assert_relative_eq!(r2.norm, 3.5 * r1.norm, max_relative = 1e-9);
    }

    #[test]
    fn rescale_factors() {
        let rep = CarlesonReport {
            k: 0.0,
            gamma: 0.5,
            norm: 1.0,
            argmax_center: pt(0.0, 1.0),
            grid: GridDescription {
                coarse_centers: 0,
                y_levels: 0,
                spacing_factor: 1.0,
            },
        };
        assert_relative_eq!(rescale_norm(&rep, 0.0), 1.0);
        assert_relative_eq!(rescale_norm(&rep, 1.0), 0.25, max_relative = 1e-12);
        let rep_half = CarlesonReport { k: 0.5, ..rep };
        assert_relative_eq!(
            rescale_norm(&rep_half, 1.5),
            1.0 / 9.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn vanishing_profile_compact_support_hits_zero() {
        let mu = unit_atom_at_i();
        let prof =
            vanishing_profile(&mu, 0.0, 0.5, &[2.0, 4.0, 16.0], &GridSpec::default()).unwrap();
        assert!(prof[2] == 0.0, "profile {prof:?}");
        assert!(prof[0] >= prof[1] && prof[1] >= prof[2]);
    }

    #[test]
    fn vanishing_profile_validates_input() {
        let mu = unit_atom_at_i();
        assert!(vanishing_profile(&mu, 0.0, 0.5, &[], &GridSpec::default()).is_err());
        assert!(vanishing_profile(&mu, 0.0, 0.5, &[0.5], &GridSpec::default()).is_err());
        assert!(vanishing_profile(&mu, 0.0, 0.5, &[4.0, 2.0], &GridSpec::default()).is_err());
    }

    #[test]
    fn parse_measure_document() {
        let text = r#"{
            "atoms": [[0.0, 1.0, 1.0, 0.0], [2.0, 3.0, 0.0, -1.0]],
            "lines": [[0.5, 1.0, 0.0], [0.25, 0.5, 0.0, -10.0, 10.0]],
            "density": {"kind": "gaussian", "x0": 0.0, "y0": 2.0, "sigma": 0.25}
        }"#;
        let mu = SymbolMeasure::from_json(text).unwrap();
        assert_eq!(mu.atoms.len(), 2);
        assert_eq!(mu.lines.len(), 2);
        assert_eq!(mu.lines[1].x_span, Some((-10.0, 10.0)));
        assert!(mu.density.is_some());
    }

    #[test]
    fn parse_rejects_bad_height() {
        assert!(SymbolMeasure::from_json(r#"{"atoms": [[0.0, -1.0, 1.0, 0.0]]}"#).is_err());
        assert!(SymbolMeasure::from_json(r#"{"lines": [[0.0, 1.0, 0.0]]}"#).is_err());
        assert!(SymbolMeasure::from_json(r#"{"unknown_key": 3}"#).is_err());
    }

    #[test]
    fn gaussian_wirtinger_matches_finite_difference() {
        let d = Density::Gaussian {
            x0: 0.0,
            y0: 2.0,
            sigma_x: 0.25,
            sigma_y: 0.25,
        };
        let z = Complex64::new(-0.2, 2.2);
        let h = 1e-6;
        let fx =
            (d.eval(z + Complex64::new(h, 0.0)) - d.eval(z - Complex64::new(h, 0.0))) / (2.0 * h);
        let fy =
            (d.eval(z + Complex64::new(0.0, h)) - d.eval(z - Complex64::new(0.0, h))) / (2.0 * h);
        let dbar = Complex64::new(fx, fy) * 0.5;
        let del = Complex64::new(fx, -fy) * 0.5;
        assert!((d.wirtinger(0, 1, z).unwrap() - dbar).norm() < 1e-8);
        assert!((d.wirtinger(1, 0, z).unwrap() - del).norm() < 1e-8);
    }

    #[test]
    fn uniform_disk_rejects_derivatives() {
        let d = Density::UniformDisk {
            disk: EuclidDisk::new(pt(0.0, 2.0), 0.5).unwrap(),
        };
        assert!(d.wirtinger(1, 0, Complex64::new(0.0, 2.0)).is_err());
        assert!(d.wirtinger(0, 0, Complex64::new(0.0, 2.0)).is_ok());
    }
}
