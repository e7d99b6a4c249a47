//! Creation operators on true-polyanalytic spaces and the symbolic
//! integration-by-parts engine.
//!
//! On analytic `u` the j-th creation power acts as
//! `S^j u = ∂^j[(z - z̄)^j u]/j!`, a finite sum of terms
//! `(z - z̄)^l ∂^l u` with exact combinatorial coefficients. Pairing
//! `⟨a S^j f, S^j g⟩` against a symbol `a` and moving all derivatives off
//! `f` and `ḡ` (legal because `∂̄f = 0` and `∂ḡ = 0`) produces a derived
//! symbol `K_(j) a` through the single rewrite rule
//!
//! `(h, ∂^l f · ∂̄^m ḡ) = -(∂h, ∂^{l-1} f · ∂̄^m ḡ)`  (and its ∂̄ twin),
//!
//! applied until no derivatives sit on `f` or `ḡ`. The engine works in
//! exact Gaussian-rational arithmetic, terminates because each step strictly
//! reduces the derivative count on the pair, and emits the operator in the
//! regrouped form `Σ b ∂^p ∂̄^p̄ (y^{p+p̄} ·)` whose terms all carry weight
//! zero under the grading (y ↦ +1, derivative ↦ -1).

use crate::basis::BasisFamily;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::quad::{DiskRule, QuadratureSpec};
use crate::symbols::Density;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use std::collections::BTreeMap;

// ---------------------------------------------------------------------------
// exact Gaussian-rational scalars

/// Exact complex rational `re + i im`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn zero() -> Self {
        Self {
            re: BigRational::zero(),
            im: BigRational::zero(),
        }
    }

    pub fn one() -> Self {
        Self {
            re: BigRational::one(),
            im: BigRational::zero(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self {
            re: BigRational::from_integer(BigInt::from(n)),
            im: BigRational::zero(),
        }
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self {
            re: BigRational::new(BigInt::from(num), BigInt::from(den)),
            im: BigRational::zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        Self {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    /// Multiply by `i`.
    pub fn times_i(&self) -> Self {
        Self {
            re: -self.im.clone(),
            im: self.re.clone(),
        }
    }

    /// Multiply by `(2i)^k`.
    pub fn times_2i_pow(&self, k: u32) -> Self {
        let mut out = self.clone();
        for _ in 0..k {
            out = out.times_i();
            out = Self {
                re: &out.re * BigInt::from(2),
                im: &out.im * BigInt::from(2),
            };
        }
        out
    }

    pub fn scale_int(&self, n: i64) -> Self {
        let f = BigRational::from_integer(BigInt::from(n));
        Self {
            re: &self.re * &f,
            im: &self.im * &f,
        }
    }

    pub fn div(&self, rhs: &Self) -> Result<Self> {
        let denom = &rhs.re * &rhs.re + &rhs.im * &rhs.im;
        if denom.is_zero() {
            return Err(Error::Internal("division by zero Gaussian rational".into()));
        }
        let num = self.mul(&rhs.conj());
        Ok(Self {
            re: num.re / &denom,
            im: num.im / denom,
        })
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

fn binom(n: u32, k: u32) -> i64 {
    let mut acc: i64 = 1;
    for i in 0..k.min(n - k) {
        acc = acc * (n - i) as i64 / (i + 1) as i64;
    }
    acc
}

fn factorial(n: u32) -> i64 {
    (2..=n as i64).product::<i64>().max(1)
}

// ---------------------------------------------------------------------------
// polyanalytic functions

/// Analytic part of a polyanalytic term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum AnalyticFactor {
    /// The constant function 1.
    One,
    /// `∂^order φ_index`.
    Basis { index: usize, order: u32 },
    /// `∂^order u` of an abstract analytic symbol, for symbolic checks.
    Formal { order: u32 },
}

impl AnalyticFactor {
    fn differentiated(&self, times: u32) -> Option<Self> {
        if times == 0 {
            return Some(*self);
        }
        match *self {
            AnalyticFactor::One => None,
            AnalyticFactor::Basis { index, order } => Some(AnalyticFactor::Basis {
                index,
                order: order + times,
            }),
            AnalyticFactor::Formal { order } => Some(AnalyticFactor::Formal {
                order: order + times,
            }),
        }
    }
}

/// One term `coeff * (z - z̄)^ypow * factor`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyTerm {
    pub coeff: Complex64,
    /// Power of `Y = z - z̄ = 2iy`.
    pub ypow: u32,
    pub factor: AnalyticFactor,
}

/// Finite sum of polyanalytic terms, closed under the creation operator.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PolyFunction {
    pub terms: Vec<PolyTerm>,
}

impl PolyFunction {
    pub fn basis(n: usize) -> Self {
        Self {
            terms: vec![PolyTerm {
                coeff: Complex64::new(1.0, 0.0),
                ypow: 0,
                factor: AnalyticFactor::Basis { index: n, order: 0 },
            }],
        }
    }

    pub fn formal() -> Self {
        Self {
            terms: vec![PolyTerm {
                coeff: Complex64::new(1.0, 0.0),
                ypow: 0,
                factor: AnalyticFactor::Formal { order: 0 },
            }],
        }
    }

    pub fn one() -> Self {
        Self {
            terms: vec![PolyTerm {
                coeff: Complex64::new(1.0, 0.0),
                ypow: 0,
                factor: AnalyticFactor::One,
            }],
        }
    }

    /// Combine like terms, drop negligible ones.
    pub fn normalized(&self) -> Self {
        let mut map: BTreeMap<(u32, AnalyticFactor), Complex64> = BTreeMap::new();
        for t in &self.terms {
            *map.entry((t.ypow, t.factor))
                .or_insert(Complex64::new(0.0, 0.0)) += t.coeff;
        }
        Self {
            terms: map
                .into_iter()
                .filter(|(_, c)| c.norm() > 1e-300)
                .map(|((ypow, factor), coeff)| PolyTerm {
                    coeff,
                    ypow,
                    factor,
                })
                .collect(),
        }
    }

    pub fn eval(&self, basis: &BasisFamily, z: Complex64) -> Result<Complex64> {
        let y2i = Complex64::new(0.0, 2.0 * z.im); // z - z̄
        let mut acc = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            let f = match t.factor {
                AnalyticFactor::One => Complex64::new(1.0, 0.0),
                AnalyticFactor::Basis { index, order } => basis.deriv(index, order, z)?,
                AnalyticFactor::Formal { .. } => {
                    return Err(Error::Domain(
                        "cannot evaluate a formal polyanalytic symbol".into(),
                    ))
                }
            };
            acc += t.coeff * y2i.powu(t.ypow) * f;
        }
        Ok(acc)
    }
}

/// `S^j u = ∂^j[(z-z̄)^j u]/j!`, Leibniz-expanded with exact coefficients:
/// on a term `Y^d F` the result is
/// `Σ_r C(j,r) (j+d)!/((d+r)! j!) Y^{d+r} ∂^r F`.
pub fn apply_creation(u: &PolyFunction, j: u32) -> PolyFunction {
    if j == 0 {
        return u.clone();
    }
    let mut terms = Vec::new();
    for t in &u.terms {
        for r in 0..=j {
            let Some(factor) = t.factor.differentiated(r) else {
                continue;
            };
            let num = binom(j, r) as f64 * falling_ratio(j + t.ypow, t.ypow + r);
            let coeff = t.coeff * num / factorial(j) as f64;
            terms.push(PolyTerm {
                coeff,
                ypow: t.ypow + r,
                factor,
            });
        }
    }
    PolyFunction { terms }.normalized()
}

/// `(j+d)!/(d+r)!` as f64 (a product of at most j integers).
fn falling_ratio(top: u32, bottom: u32) -> f64 {
    let mut acc = 1.0f64;
    for v in (bottom + 1)..=top {
        acc *= v as f64;
    }
    acc
}

/// Inner product of two basis-built polyanalytic functions over the
/// half-plane, through the exact weighted pairings of the basis family.
pub fn poly_inner(basis: &BasisFamily, u: &PolyFunction, v: &PolyFunction) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for tu in &u.terms {
        for tv in &v.terms {
            let (n1, o1) = match tu.factor {
                AnalyticFactor::Basis { index, order } => (index, order),
                _ => {
                    return Err(Error::Domain(
                        "inner products need basis-built terms".into(),
                    ))
                }
            };
            let (n2, o2) = match tv.factor {
                AnalyticFactor::Basis { index, order } => (index, order),
                _ => {
                    return Err(Error::Domain(
                        "inner products need basis-built terms".into(),
                    ))
                }
            };
            // Y^{d1} conj(Y^{d2}) = (2i)^{d1} (-2i)^{d2} y^{d1+d2}
            let twos =
                Complex64::new(0.0, 2.0).powu(tu.ypow) * Complex64::new(0.0, -2.0).powu(tv.ypow);
            let pair = basis.weighted_pair(tu.ypow + tv.ypow, o1, o2, n1, n2)?;
            acc += tu.coeff * tv.coeff.conj() * twos * pair;
        }
    }
    Ok(acc)
}

/// `| ‖S^j φ_n‖ - 1 |` through the exact pairing rule.
pub fn creation_isometry_residual(basis: &BasisFamily, n: usize, j: u32) -> Result<f64> {
    if j == 0 {
        // S^0 is the identity and the basis is normalized by construction
        return Ok(0.0);
    }
    let s = apply_creation(&PolyFunction::basis(n), j);
    let norm_sq = poly_inner(basis, &s, &s)?;
    Ok((norm_sq.re.max(0.0).sqrt() - 1.0)
        .abs()
        .max(norm_sq.im.abs()))
}

// ---------------------------------------------------------------------------
// the rewriting engine

/// Left normal form over `Y = z - z̄`: key `(ypow, p, q)` carries the term
/// `b Y^ypow ∂^p ∂̄^q a`.
type LeftFormY = BTreeMap<(u32, u32, u32), GaussianRational>;

/// A pairing term `c (Y^ypow ∂^p ∂̄^q a, ∂^lf f · ∂̄^mg ḡ)` awaiting rewriting.
#[derive(Debug, Clone)]
struct Pairing {
    c: GaussianRational,
    ypow: u32,
    p: u32,
    q: u32,
    lf: u32,
    mg: u32,
}

const REWRITE_BUDGET: usize = 200_000;

/// Expand `(a, S^j f conj(S^j g))` and rewrite until every derivative has
/// moved onto the symbol side. Returns the left normal form over `Y`.
fn derive_left_form_y(j: u32) -> Result<LeftFormY> {
    let mut work: Vec<Pairing> = Vec::new();
    for l in 0..=j {
        for m in 0..=j {
            // S^j f = Σ_l C(j,l)/l! Y^l ∂^l f ; conj flips Y sign on the g side
            let mut c = GaussianRational::from_ratio(
                binom(j, l) * binom(j, m),
                factorial(l) * factorial(m),
            );
            if m % 2 == 1 {
                c = c.neg();
            }
            work.push(Pairing {
                c,
                ypow: l + m,
                p: 0,
                q: 0,
                lf: l,
                mg: m,
            });
        }
    }

    let mut out: LeftFormY = BTreeMap::new();
    let mut processed = 0usize;
    while let Some(t) = work.pop() {
        processed += 1;
        if processed > REWRITE_BUDGET {
            return Err(Error::Internal("rewriting exceeded its term budget".into()));
        }
        if t.lf > 0 {
            // (h, ∂^lf f ∂̄^mg ḡ) = -(∂h, ∂^{lf-1} f ∂̄^mg ḡ); ∂Y = 1
            if t.ypow > 0 {
                work.push(Pairing {
                    c: t.c.scale_int(-(t.ypow as i64)),
                    ypow: t.ypow - 1,
                    p: t.p,
                    q: t.q,
                    lf: t.lf - 1,
                    mg: t.mg,
                });
            }
            work.push(Pairing {
                c: t.c.neg(),
                ypow: t.ypow,
                p: t.p + 1,
                q: t.q,
                lf: t.lf - 1,
                mg: t.mg,
            });
        } else if t.mg > 0 {
            // ∂̄ twin; ∂̄Y = -1 flips the sign of the power-rule branch
            if t.ypow > 0 {
                work.push(Pairing {
                    c: t.c.scale_int(t.ypow as i64),
                    ypow: t.ypow - 1,
                    p: t.p,
                    q: t.q,
                    lf: t.lf,
                    mg: t.mg - 1,
                });
            }
            work.push(Pairing {
                c: t.c.neg(),
                ypow: t.ypow,
                p: t.p,
                q: t.q + 1,
                lf: t.lf,
                mg: t.mg - 1,
            });
        } else {
            debug_assert_eq!(t.ypow, t.p + t.q, "weight-zero invariant");
            let e = out
                .entry((t.ypow, t.p, t.q))
                .or_insert_with(GaussianRational::zero);
            *e = e.add(&t.c);
        }
    }
    out.retain(|_, v| !v.is_zero());
    Ok(out)
}

/// Left normal form over `y` (coefficients absorb `(2i)^ypow`).
fn left_y_from_left_yy(form: &LeftFormY) -> BTreeMap<(u32, u32, u32), GaussianRational> {
    form.iter()
        .map(|(&(ypow, p, q), c)| ((ypow, p, q), c.times_2i_pow(ypow)))
        .collect()
}

/// Expansion of the regrouped generator `∂^P ∂̄^Q (y^{P+Q} ·)` into the left
/// normal form over `y`.
fn expand_right(p_ord: u32, q_ord: u32) -> BTreeMap<(u32, u32, u32), GaussianRational> {
    // ∂^r ∂̄^s y^M = M!/(M-r-s)! (-i/2)^r (i/2)^s y^{M-r-s}
    let m_tot = p_ord + q_ord;
    let mut out: BTreeMap<(u32, u32, u32), GaussianRational> = BTreeMap::new();
    for r in 0..=p_ord {
        for s in 0..=q_ord {
            if r + s > m_tot {
                continue;
            }
            let mut c = GaussianRational::from_int(
                binom(p_ord, r) * binom(q_ord, s) * (factorial(m_tot) / factorial(m_tot - r - s)),
            );
            for _ in 0..r {
                // times -i/2
                c = c.times_i().neg();
                c = GaussianRational {
                    re: c.re / BigInt::from(2),
                    im: c.im / BigInt::from(2),
                };
            }
            for _ in 0..s {
                // times +i/2
                c = c.times_i();
                c = GaussianRational {
                    re: c.re / BigInt::from(2),
                    im: c.im / BigInt::from(2),
                };
            }
            let key = (m_tot - r - s, p_ord - r, q_ord - s);
            let e = out.entry(key).or_insert_with(GaussianRational::zero);
            *e = e.add(&c);
        }
    }
    out
}

/// One regrouped term `b ∂^hol ∂̄^anti (y^{hol+anti} ·)`.
#[derive(Debug, Clone)]
pub struct DiffTerm {
    pub b: GaussianRational,
    /// y-power; equals `hol + anti` (weight zero).
    pub ypow: u32,
    pub hol: u32,
    pub anti: u32,
}

/// Left-form term `b y^ypow ∂^hol ∂̄^anti a`, the expanded reading.
#[derive(Debug, Clone)]
pub struct LeftTerm {
    pub b: GaussianRational,
    pub ypow: u32,
    pub hol: u32,
    pub anti: u32,
}

/// The derived-symbol differential operator `K_(j)` of order `2j`.
#[derive(Debug, Clone)]
pub struct DiffOperator {
    pub j: u32,
    terms: Vec<DiffTerm>,
    left: Vec<LeftTerm>,
}

/// Mechanized integration by parts: expand `(a, S^j f conj(S^j g))` with
/// both slots analytic and collect the operator acting on `a`, in regrouped
/// form. With this normalization `⟨a S^j f, S^j g⟩ = ⟨(K_(j) a) f, g⟩`
/// exactly, so the unitarity scalar comes out as 1.
pub fn derive_k(j: u32) -> Result<DiffOperator> {
    if j == 0 || j > 6 {
        return Err(Error::Domain(format!(
            "creation order j = {j} outside 1..=6"
        )));
    }
    let left_yy = derive_left_form_y(j)?;
    let left_y = left_y_from_left_yy(&left_yy);

    // triangular conversion into the regrouped basis, top degree first
    let mut residue = left_y.clone();
    let mut keys: Vec<(u32, u32, u32)> = residue.keys().copied().collect();
    keys.sort_by_key(|&(ypow, _, _)| std::cmp::Reverse(ypow));
    let mut terms: Vec<DiffTerm> = Vec::new();
    while let Some((&key, coeff)) = residue
        .iter()
        .filter(|(_, c)| !c.is_zero())
        .max_by_key(|(&(ypow, p, q), _)| (ypow, p, q))
    {
        let (ypow, p, q) = key;
        debug_assert_eq!(ypow, p + q);
        let b = coeff.clone();
        let expansion = expand_right(p, q);
        for (k2, c2) in expansion {
            let e = residue.entry(k2).or_insert_with(GaussianRational::zero);
            *e = e.add(&c2.mul(&b).neg());
        }
        residue.retain(|_, v| !v.is_zero());
        terms.push(DiffTerm {
            b,
            ypow,
            hol: p,
            anti: q,
        });
    }
    terms.sort_by_key(|t| (t.ypow, t.hol, t.anti));

    let left = left_y
        .into_iter()
        .map(|((ypow, p, q), b)| LeftTerm {
            b,
            ypow,
            hol: p,
            anti: q,
        })
        .collect();
    Ok(DiffOperator { j, terms, left })
}

impl DiffOperator {
    /// Regrouped terms `b ∂^hol ∂̄^anti (y^{hol+anti} ·)`.
    pub fn terms(&self) -> &[DiffTerm] {
        &self.terms
    }

    /// Expanded terms `b y^ypow ∂^hol ∂̄^anti a`.
    pub fn left_normal_form(&self) -> &[LeftTerm] {
        &self.left
    }

    /// Order of the differential operator (max total derivative count).
    pub fn order(&self) -> u32 {
        self.left.iter().map(|t| t.hol + t.anti).max().unwrap_or(0)
    }

    /// Every term has weight zero: y-power equals derivative count.
    pub fn weight_zero(&self) -> bool {
        self.terms.iter().all(|t| t.ypow == t.hol + t.anti)
            && self.left.iter().all(|t| t.ypow == t.hol + t.anti)
    }

    /// `K_(j)` applied to the constant symbol 1; a pure number because every
    /// regrouped term differentiates its y-power exactly to depletion.
    pub fn apply_to_one(&self) -> GaussianRational {
        self.left
            .iter()
            .filter(|t| t.hol == 0 && t.anti == 0 && t.ypow == 0)
            .fold(GaussianRational::zero(), |acc, t| acc.add(&t.b))
    }

    /// Pointwise `K_(j) a` through the smooth density's closed-form
    /// derivatives.
    pub fn apply(&self, a: &Density, z: Complex64) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for t in &self.left {
            let da = a.wirtinger(t.hol, t.anti, z)?;
            acc += t.b.to_complex() * z.im.powi(t.ypow as i32) * da;
        }
        Ok(acc)
    }

    /// Identity operator (for the `K = id` trivial cases).
    pub fn identity() -> Self {
        let one = DiffTerm {
            b: GaussianRational::one(),
            ypow: 0,
            hol: 0,
            anti: 0,
        };
        let left = LeftTerm {
            b: GaussianRational::one(),
            ypow: 0,
            hol: 0,
            anti: 0,
        };
        Self {
            j: 0,
            terms: vec![one],
            left: vec![left],
        }
    }

    /// JSON document: `{"j": j, "terms": [{"b": [re, im], "m": ypow,
    /// "p": hol, "pbar": anti}, ...]}` in the regrouped form.
    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|t| {
                let b = t.b.to_complex();
                serde_json::json!({
                    "b": [b.re, b.im],
                    "b_exact": [t.b.re.to_string(), t.b.im.to_string()],
                    "m": t.ypow,
                    "p": t.hol,
                    "pbar": t.anti,
                })
            })
            .collect();
        serde_json::json!({ "j": self.j, "order": self.order(), "terms": terms })
    }

    /// Human-readable regrouped form.
    pub fn pretty(&self) -> String {
        let mut parts = Vec::new();
        for t in &self.terms {
            let b = t.b.to_complex();
            let coeff = if b.im == 0.0 {
                format!("{}", b.re)
            } else if b.re == 0.0 {
                format!("{}i", b.im)
            } else {
                format!("({} + {}i)", b.re, b.im)
            };
            if t.hol == 0 && t.anti == 0 {
                parts.push(coeff);
            } else {
                let mut op = String::new();
                if t.hol > 0 {
                    op.push_str(&format!("d^{}", t.hol));
                }
                if t.anti > 0 {
                    op.push_str(&format!("db^{}", t.anti));
                }
                parts.push(format!("{coeff} {op}(y^{} .)", t.ypow));
            }
        }
        parts.join(" + ")
    }

    /// Smallest total degree `d` such that the operator is a polynomial of
    /// degree `d` in the generators `∂(y·)`, `∂̄(y·)`, `Δ(y²·)`, found by
    /// exact linear solves over the expanded normal form.
    pub fn generator_degree(&self) -> Result<u32> {
        let target: BTreeMap<(u32, u32, u32), GaussianRational> = self
            .left
            .iter()
            .map(|t| ((t.ypow, t.hol, t.anti), t.b.clone()))
            .collect();
        for degree in 0..=(2 * self.j) {
            if generator_representable(&target, degree)? {
                return Ok(degree);
            }
        }
        Err(Error::Internal(
            "operator not representable in the generator algebra".into(),
        ))
    }
}

type LeftMap = BTreeMap<(u32, u32, u32), GaussianRational>;

/// Apply a generator to a left form over `y` (exact arithmetic).
/// `which`: 0 = ∂(y·), 1 = ∂̄(y·), 2 = Δ(y²·) = 4 ∂∂̄(y²·).
fn apply_generator(form: &LeftMap, which: u8) -> LeftMap {
    // ∂(y^k X) = -(i/2) k y^{k-1} X + y^k ∂X     (∂y = -i/2)
    // ∂̄(y^k X) = +(i/2) k y^{k-1} X + y^k ∂̄X   (∂̄y = +i/2)
    fn d(form: &LeftMap, anti: bool) -> LeftMap {
        let mut out: LeftMap = BTreeMap::new();
        let mut add = |key: (u32, u32, u32), val: GaussianRational| {
            let e = out.entry(key).or_insert_with(GaussianRational::zero);
            *e = e.add(&val);
        };
        for (&(k, p, q), c) in form {
            if k > 0 {
                let mut half_i = c.times_i();
                half_i = GaussianRational {
                    re: half_i.re / BigInt::from(2),
                    im: half_i.im / BigInt::from(2),
                };
                let scaled = GaussianRational {
                    re: &half_i.re * BigInt::from(k as i64),
                    im: &half_i.im * BigInt::from(k as i64),
                };
                add((k - 1, p, q), if anti { scaled } else { scaled.neg() });
            }
            if anti {
                add((k, p, q + 1), c.clone());
            } else {
                add((k, p + 1, q), c.clone());
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }
    let mul_y = |form: &LeftMap, times: u32| -> LeftMap {
        form.iter()
            .map(|(&(k, p, q), c)| ((k + times, p, q), c.clone()))
            .collect()
    };
    match which {
        0 => d(&mul_y(form, 1), false),
        1 => d(&mul_y(form, 1), true),
        _ => {
            let inner = d(&d(&mul_y(form, 2), true), false);
            inner
                .into_iter()
                .map(|(k, c)| (k, c.scale_int(4)))
                .collect()
        }
    }
}

/// Does an exact combination of generator words of total degree <= `degree`
/// reproduce `target`?
#[allow(clippy::needless_range_loop)] // row elimination indexes the matrix
fn generator_representable(target: &LeftMap, degree: u32) -> Result<bool> {
    // canonical words G3^c3 ∘ G2^c2 ∘ G1^c1 (G1 applied first)
    let mut words: Vec<LeftMap> = Vec::new();
    for c1 in 0..=degree {
        for c2 in 0..=(degree - c1) {
            for c3 in 0..=(degree - c1 - c2) {
                let mut form: LeftMap = BTreeMap::new();
                form.insert((0, 0, 0), GaussianRational::one());
                for _ in 0..c1 {
                    form = apply_generator(&form, 0);
                }
                for _ in 0..c2 {
                    form = apply_generator(&form, 1);
                }
                for _ in 0..c3 {
                    form = apply_generator(&form, 2);
                }
                words.push(form);
            }
        }
    }
    // collect the monomial index set
    let mut keys: Vec<(u32, u32, u32)> = target.keys().copied().collect();
    for w in &words {
        keys.extend(w.keys().copied());
    }
    keys.sort_unstable();
    keys.dedup();

    // exact Gaussian elimination on the (keys x words) system
    let rows = keys.len();
    let cols = words.len();
    let mut a: Vec<Vec<GaussianRational>> = vec![vec![GaussianRational::zero(); cols + 1]; rows];
    for (ri, key) in keys.iter().enumerate() {
        for (ci, w) in words.iter().enumerate() {
            if let Some(c) = w.get(key) {
                a[ri][ci] = c.clone();
            }
        }
        if let Some(c) = target.get(key) {
            a[ri][cols] = c.clone();
        }
    }
    let mut pivot_row = 0usize;
    for col in 0..cols {
        let Some(sel) = (pivot_row..rows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(pivot_row, sel);
        let inv = GaussianRational::one().div(&a[pivot_row][col])?;
        for c in col..=cols {
            a[pivot_row][c] = a[pivot_row][c].mul(&inv);
        }
        for r in 0..rows {
            if r != pivot_row && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in col..=cols {
                    let delta = a[pivot_row][c].mul(&f).neg();
                    a[r][c] = a[r][c].add(&delta);
                }
            }
        }
        pivot_row += 1;
        if pivot_row == rows {
            break;
        }
    }
    // consistent iff no row reads [0 ... 0 | nonzero]
    for r in 0..rows {
        let all_zero = (0..cols).all(|c| a[r][c].is_zero());
        if all_zero && !a[r][cols].is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// numerical certification of the unitary equivalence

/// Result of the two-sided equivalence check.
#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    /// Relative residual `‖A - c B‖_F / ‖A‖_F`.
    pub residual: f64,
    /// Least-squares scalar aligning the two matrix forms.
    pub c_j: Complex64,
    pub a_norm: f64,
    pub b_norm: f64,
}

/// Build `A_{mn} = ⟨a S^j φ_n, S^j φ_m⟩` and `B_{mn} = ⟨(K_(j) a) φ_n, φ_m⟩`
/// and estimate the scalar `c_j` minimizing `‖A - c B‖_F`.
pub fn equivalence_residual(
    a: &Density,
    j: u32,
    n: usize,
    basis: &BasisFamily,
    spec: &QuadratureSpec,
) -> Result<EquivalenceReport> {
    let op = derive_k(j)?;
    let rule = DiskRule::new(spec)?;
    let nodes = &rule.nodes;

    let a_vals: Vec<Complex64> = nodes
        .iter()
        .map(|nd| Complex64::new(a.eval(nd.w), 0.0))
        .collect();
    let ka_vals: Vec<Complex64> = nodes
        .iter()
        .map(|nd| op.apply(a, nd.w))
        .collect::<Result<Vec<_>>>()?;

    let s_table: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|idx| {
            let s = apply_creation(&PolyFunction::basis(idx), j);
            nodes
                .iter()
                .map(|nd| s.eval(basis, nd.w))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let phi_table: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|idx| {
            nodes
                .iter()
                .map(|nd| Ok(basis.eval(idx, nd.w)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let build = |table: &Vec<Vec<Complex64>>, weight_vals: &Vec<Complex64>| -> CMatrix {
        let rows: Vec<Vec<Complex64>> = (0..n)
            .into_par_iter()
            .map(|m| {
                (0..n)
                    .map(|col| {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for (k, nd) in nodes.iter().enumerate() {
                            acc += weight_vals[k] * table[col][k] * table[m][k].conj() * nd.weight;
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        CMatrix::from_rows(rows)
    };
    let a_mat = build(&s_table, &a_vals);
    let b_mat = build(&phi_table, &ka_vals);

    let a_norm = a_mat.frobenius_norm();
    let b_norm = b_mat.frobenius_norm();
    if a_norm == 0.0 && b_norm == 0.0 {
        return Ok(EquivalenceReport {
            residual: 0.0,
            c_j: Complex64::new(0.0, 0.0),
            a_norm,
            b_norm,
        });
    }
    if b_norm <= 1e-14 * a_norm {
        return Err(Error::Inconsistency(format!(
            "derived-symbol matrix vanished (‖B‖ = {b_norm:.3e}) while ‖A‖ = {a_norm:.3e}"
        )));
    }
    let c_j = b_mat.frobenius_inner(&a_mat) / b_mat.frobenius_inner(&b_mat);
    let residual = a_mat.sub(&b_mat.scale(c_j)).frobenius_norm() / a_norm;
    Ok(EquivalenceReport {
        residual,
        c_j,
        a_norm,
        b_norm,
    })
}
