//! Truncated Toeplitz operators from sesquilinear forms with singular
//! symbols.
//!
//! The form is `F_{α,β,μ}[f, g] = (-1)^{α+β} ∫ ∂^α f conj(∂^β g) dμ` and the
//! truncation has entries `T_{mn} = F[φ_n, φ_m]`, so `⟨T f, g⟩ = F[f, g]`
//! on the span of the first `N` basis functions. Atomic parts are exact
//! (closed-form derivatives); line and density parts use the shared
//! quadrature rules through per-node value tables.

use crate::basis::{BasisFamily, KernelPoint};
use crate::error::{Error, Result};
use crate::geometry::HalfPlanePoint;
use crate::linalg::{operator_norm, svd_values, CMatrix};
use crate::quad::{fit_exponential_decay, range_above_floor, DecayFit, LineRule, QuadratureSpec};
use crate::symbols::{carleson_norm, CarlesonReport, DerivativeSymbol, GridSpec};
use num_complex::Complex64;
use rayon::prelude::*;

/// Dense truncation of the Toeplitz operator defined by a derivative symbol.
#[derive(Debug, Clone)]
pub struct TruncatedToeplitz {
    pub symbol: DerivativeSymbol,
    pub size: usize,
    pub entries: CMatrix,
    /// Set when the positive/Hermitian symmetrization was applied; holds the
    /// largest entrywise deviation that was averaged away.
    pub hermitized: Option<f64>,
    pub warnings: Vec<String>,
}

impl TruncatedToeplitz {
    pub fn norm(&self) -> Result<f64> {
        operator_norm(&self.entries)
    }

    pub fn singular_values(&self) -> Result<Vec<f64>> {
        svd_values(&self.entries)
    }
}

/// Per-basis value tables of `∂^α φ_n` at the symbol's quadrature nodes.
struct NodeTables {
    /// `f_values[n][node]` for the ∂^α side.
    f_values: Vec<Vec<Complex64>>,
    /// `g_values[m][node]` for the ∂^β side.
    g_values: Vec<Vec<Complex64>>,
    /// complex measure weight per node (quadrature weight times density).
    weights: Vec<Complex64>,
}

fn tables_for_nodes(
    basis: &BasisFamily,
    n: usize,
    alpha: u32,
    beta: u32,
    nodes: &[(Complex64, Complex64)],
) -> Result<NodeTables> {
    let order = alpha.max(beta) as usize;
    let jets: Vec<(Complex64, Complex64, Complex64)> = (0..n)
        .into_par_iter()
        .map(|idx| {
            nodes
                .iter()
                .map(|&(z, _)| {
                    let jet = basis.jet(idx, z, order)?;
                    Ok((
                        jet.derivative(alpha as usize),
                        jet.derivative(beta as usize),
                    ))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<Vec<_>>>>()?
        .into_iter()
        .flatten()
        .map(|(f, g)| (f, g, Complex64::new(0.0, 0.0)))
        .collect();
    // unflatten
    let per = nodes.len();
    let mut f_values = vec![vec![Complex64::new(0.0, 0.0); per]; n];
    let mut g_values = vec![vec![Complex64::new(0.0, 0.0); per]; n];
    for idx in 0..n {
        for k in 0..per {
            let (f, g, _) = jets[idx * per + k];
            f_values[idx][k] = f;
            g_values[idx][k] = g;
        }
    }
    Ok(NodeTables {
        f_values,
        g_values,
        weights: nodes.iter().map(|&(_, w)| w).collect(),
    })
}

fn accumulate(t: &mut CMatrix, tables: &NodeTables, sign: f64) {
    let n = t.rows();
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|m| {
            let gm = &tables.g_values[m];
            (0..n)
                .map(|j| {
                    let fj = &tables.f_values[j];
                    let mut acc = Complex64::new(0.0, 0.0);
                    for ((fv, gv), w) in fj.iter().zip(gm).zip(&tables.weights) {
                        acc += w * fv * gv.conj();
                    }
                    acc * sign
                })
                .collect()
        })
        .collect();
    for (m, row) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            t[(m, j)] += v;
        }
    }
}

/// Single entry `F_{α,β,μ}[φ_f, φ_g]` of the sesquilinear form.
pub fn form_value(
    sym: &DerivativeSymbol,
    basis: &BasisFamily,
    f_index: usize,
    g_index: usize,
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    let t = toeplitz_matrix_raw(sym, basis, f_index.max(g_index) + 1, spec, false)?;
    Ok(t.entries[(g_index, f_index)])
}

/// Assemble the `N x N` truncation.
pub fn toeplitz_matrix(
    sym: &DerivativeSymbol,
    basis: &BasisFamily,
    n: usize,
    spec: &QuadratureSpec,
) -> Result<TruncatedToeplitz> {
    toeplitz_matrix_raw(sym, basis, n, spec, true)
}

fn toeplitz_matrix_raw(
    sym: &DerivativeSymbol,
    basis: &BasisFamily,
    n: usize,
    spec: &QuadratureSpec,
    symmetrize: bool,
) -> Result<TruncatedToeplitz> {
    if n == 0 {
        return Err(Error::Domain("truncation size must be at least 1".into()));
    }
    spec.validate()?;
    let sign = if (sym.alpha + sym.beta).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    };
    let mut t = CMatrix::zeros(n, n);
    let mut warnings = Vec::new();

    // atoms: exact closed-form derivatives, rank-one updates
    if !sym.base.atoms.is_empty() {
        let nodes: Vec<(Complex64, Complex64)> = sym
            .base
            .atoms
            .iter()
            .map(|(z, w)| (z.to_complex(), *w))
            .collect();
        let tables = tables_for_nodes(basis, n, sym.alpha, sym.beta, &nodes)?;
        accumulate(&mut t, &tables, sign);
    }

    // lines: Gauss-Legendre panels along each line
    for line in &sym.base.lines {
        let rule = match line.x_span {
            None => LineRule::full_line(line.y, spec)?,
            Some((x0, x1)) => LineRule::segment(line.y, x0, x1, spec)?,
        };
        let nodes: Vec<(Complex64, Complex64)> = rule
            .x
            .iter()
            .zip(&rule.w)
            .map(|(&x, &w)| (Complex64::new(x, line.y), line.weight * w))
            .collect();
        let tables = tables_for_nodes(basis, n, sym.alpha, sym.beta, &nodes)?;
        accumulate(&mut t, &tables, sign);
    }

    // density: quadrature over the (effective) support
    if let Some(density) = &sym.base.density {
        let nodes: Vec<(Complex64, Complex64)> = density
            .quad_nodes(spec)
            .into_iter()
            .filter(|&(z, _)| z.im > 0.0)
            .map(|(z, w)| (z, Complex64::new(density.eval(z) * w, 0.0)))
            .collect();
        let tables = tables_for_nodes(basis, n, sym.alpha, sym.beta, &nodes)?;
        accumulate(&mut t, &tables, sign);
    }

    let mut hermitized = None;
    if symmetrize && sym.base.is_positive() && sym.alpha == sym.beta {
        let (sym_part, dev) = t.hermitian_part();
        t = sym_part;
        hermitized = Some(dev);
        if dev > 1e-8 {
            warnings.push(format!("hermitian deviation {dev:.3e} averaged away"));
        }
    }

    if !t.is_finite() {
        return Err(Error::NumericRange(
            "non-finite entries in assembled truncation".into(),
        ));
    }
    Ok(TruncatedToeplitz {
        symbol: sym.clone(),
        size: n,
        entries: t,
        hermitized,
        warnings,
    })
}

/// Pointwise value `(T_F f)(z) = F[f, k_z]` without basis truncation on the
/// output side; `f = φ_{f_index}`.
pub fn apply_via_kernel(
    sym: &DerivativeSymbol,
    basis: &BasisFamily,
    f_index: usize,
    z: &HalfPlanePoint,
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    let sign = if (sym.alpha + sym.beta).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    };
    let kz = KernelPoint::new(*z);
    let mut acc = Complex64::new(0.0, 0.0);
    for (w, weight) in &sym.base.atoms {
        let fd = basis.deriv(f_index, sym.alpha, w.to_complex())?;
        let kd = kz.deriv(sym.beta, w.to_complex());
        acc += weight * fd * kd.conj();
    }
    for line in &sym.base.lines {
        let rule = match line.x_span {
            None => LineRule::full_line(line.y, spec)?,
            Some((x0, x1)) => LineRule::segment(line.y, x0, x1, spec)?,
        };
        for (&x, &w) in rule.x.iter().zip(&rule.w) {
            let p = Complex64::new(x, line.y);
            let fd = basis.deriv(f_index, sym.alpha, p)?;
            let kd = kz.deriv(sym.beta, p);
            acc += line.weight * w * fd * kd.conj();
        }
    }
    if let Some(density) = &sym.base.density {
        for (p, w) in density.quad_nodes(spec) {
            if p.im <= 0.0 {
                continue;
            }
            let fd = basis.deriv(f_index, sym.alpha, p)?;
            let kd = kz.deriv(sym.beta, p);
            acc += density.eval(p) * w * fd * kd.conj();
        }
    }
    Ok(acc * sign)
}

/// One row of a boundedness report.
#[derive(Debug, Clone)]
pub struct BoundednessRow {
    pub n: usize,
    pub norm: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Table of truncation norms against the Carleson bound `ϖ_k(μ)`.
///
/// The truncation norm is the largest singular value of `T_N`, a lower
/// bound for the operator norm; the verdict checks `‖T_N‖ <= ϖ_k(μ)` for
/// every listed `N`. A violated bound is reported as a failed row, not an
/// error.
#[derive(Debug, Clone)]
pub struct BoundednessReport {
    pub rows: Vec<BoundednessRow>,
    pub carleson: CarlesonReport,
    pub all_pass: bool,
}

impl BoundednessReport {
    /// CSV: `N,norm,carleson_bound,verdict` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,norm,carleson_bound,verdict\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.12e},{:.12e},{}\n",
                r.n,
                r.norm,
                r.bound,
                if r.pass { "PASS" } else { "FAIL" }
            ));
        }
        out
    }
}

pub fn boundedness_report(
    sym: &DerivativeSymbol,
    basis: &BasisFamily,
    n_list: &[usize],
    gamma: f64,
    grid: &GridSpec,
    spec: &QuadratureSpec,
) -> Result<BoundednessReport> {
    if n_list.is_empty() {
        return Err(Error::Domain("empty truncation list".into()));
    }
    let carleson = carleson_norm(&sym.base, sym.k(), gamma, grid)?;
    // assemble once at the largest size; nesting gives the smaller blocks
    let max_n = *n_list.iter().max().unwrap();
    let full = toeplitz_matrix(sym, basis, max_n, spec)?;
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let norm = operator_norm(&full.entries.leading_block(n))?;
        rows.push(BoundednessRow {
            n,
            norm,
            bound: carleson.norm,
            pass: norm <= carleson.norm * (1.0 + 1e-12),
        });
    }
    let all_pass = rows.iter().all(|r| r.pass);
    Ok(BoundednessReport {
        rows,
        carleson,
        all_pass,
    })
}

/// Singular values plus an exponential decay fit.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub singular_values: Vec<f64>,
    pub fit: Option<DecayFit>,
    /// Too few values above the floor for a meaningful fit.
    pub degraded: bool,
}

impl SpectrumReport {
    /// CSV: `n,s_n` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,s_n\n");
        for (n, s) in self.singular_values.iter().enumerate() {
            out.push_str(&format!("{},{:.12e}\n", n, s));
        }
        out
    }
}

/// Spectrum of the truncation and the decay fit on the range above the
/// `1e-12 * s_0` floor.
pub fn spectrum_report(
    sym: &DerivativeSymbol,
    basis: &BasisFamily,
    n: usize,
    spec: &QuadratureSpec,
) -> Result<SpectrumReport> {
    let t = toeplitz_matrix(sym, basis, n, spec)?;
    let sv = t.singular_values()?;
    let range = range_above_floor(&sv, 1e-12);
    if range.len() < 3 {
        return Ok(SpectrumReport {
            singular_values: sv,
            fit: None,
            degraded: true,
        });
    }
    let fit = fit_exponential_decay(&sv, range)?;
    Ok(SpectrumReport {
        singular_values: sv,
        fit: Some(fit),
        degraded: false,
    })
}
