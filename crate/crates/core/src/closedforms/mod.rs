//! Closed-form coefficient vectors for every ensemble average and their
//! cross-identities.
//!
//! All families are computed in exact rational arithmetic for the requested
//! dimension and converted to `f64` at the boundary. Families whose general
//! formula carries `N_d = 1/(d²(d²−1)(d²−4)(d²−9))` are only reachable
//! through [`GeneralDim`] (`d ≥ 4`); dimensions two and three have their own
//! tabulated vectors behind [`LowDim`].

pub mod expansion;
pub mod published;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::exact::{frac, q, to_f64, MomentForm, MomentPoint, Q};
use crate::functionals::{Observable, OmegaVector};
use crate::twirl::{delta_forms, Spectrum, ROUTE_TOLERANCE};
use crate::{Error, Result};

/// A dimension `d ≥ 4`, where the general `N_d` formulas are regular.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GeneralDim(usize);

impl GeneralDim {
    pub fn new(d: usize) -> Result<Self> {
        if d >= 4 {
            Ok(GeneralDim(d))
        } else {
            Err(Error::Domain {
                d,
                what: "the general N_d formulas; use lowdim_coefficients for d = 2, 3".into(),
            })
        }
    }

    pub fn get(self) -> usize {
        self.0
    }
}

/// The two dimensions with separately tabulated Hilbert–Schmidt vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LowDim {
    Two,
    Three,
}

impl LowDim {
    pub fn new(d: usize) -> Result<Self> {
        match d {
            2 => Ok(LowDim::Two),
            3 => Ok(LowDim::Three),
            _ => Err(Error::Domain { d, what: "the low-dimensional tables; use omega_bar for d ≥ 4".into() }),
        }
    }

    pub fn get(self) -> usize {
        match self {
            LowDim::Two => 2,
            LowDim::Three => 3,
        }
    }
}

/// Which ensemble average a coefficient vector represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientFamily {
    /// Uncertainty product over an isospectral orbit.
    #[serde(rename = "omega")]
    Isospectral,
    /// Uncertainty product over pure states.
    #[serde(rename = "u")]
    PureProduct,
    /// Robertson–Schrödinger bound over pure states.
    #[serde(rename = "l")]
    PureBound,
    /// Uncertainty product over the Hilbert–Schmidt ensemble, `d ≥ 4`.
    OmegaBar,
    /// Squared covariance term of the bound over the Hilbert–Schmidt ensemble, `d ≥ 4`.
    Beta,
    /// Full bound over the Hilbert–Schmidt ensemble, `d ≥ 4`.
    BetaPrime,
    Dim2Product,
    Dim2Bound,
    Dim3Product,
    Dim3Bound,
}

impl CoefficientFamily {
    /// Whether the family averages the uncertainty product (as opposed to a bound).
    pub fn is_product(self) -> bool {
        matches!(
            self,
            CoefficientFamily::Isospectral
                | CoefficientFamily::PureProduct
                | CoefficientFamily::OmegaBar
                | CoefficientFamily::Dim2Product
                | CoefficientFamily::Dim3Product
        )
    }

    fn admits(self, d: usize) -> bool {
        match self {
            CoefficientFamily::OmegaBar | CoefficientFamily::Beta | CoefficientFamily::BetaPrime => d >= 4,
            CoefficientFamily::Dim2Product | CoefficientFamily::Dim2Bound => d == 2,
            CoefficientFamily::Dim3Product | CoefficientFamily::Dim3Bound => d == 3,
            _ => d >= 2,
        }
    }
}

impl fmt::Display for CoefficientFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        f.write_str(&s)
    }
}

/// Coefficients `c₁ … c₈` of an ensemble average `Σ_j c_j Ω_j(A,B)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientVector {
    pub family: CoefficientFamily,
    pub d: usize,
    pub values: [f64; 8],
    /// Exact values, when the vector does not depend on a float spectrum.
    #[serde(skip)]
    pub exact: Option<[Q; 8]>,
}

impl CoefficientVector {
    fn from_exact(family: CoefficientFamily, d: usize, exact: [Q; 8]) -> Self {
        CoefficientVector { family, d, values: std::array::from_fn(|j| to_f64(&exact[j])), exact: Some(exact) }
    }

    /// `c_j` with `j ∈ 1..=8`.
    pub fn get(&self, j: usize) -> f64 {
        self.values[j - 1]
    }

    /// Exact entries rendered as `p/q` strings, if available.
    pub fn exact_strings(&self) -> Option<Vec<String>> {
        self.exact.as_ref().map(|e| e.iter().map(ToString::to_string).collect())
    }
}

/// Hilbert–Schmidt averages of the spectral moments.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentTable {
    pub d: usize,
    pub t2: Q,
    pub t3: Q,
    pub t4: Q,
    pub t2_sq: Q,
}

impl MomentTable {
    pub fn point(&self) -> MomentPoint<Q> {
        MomentPoint { t2: self.t2.clone(), t2_sq: self.t2_sq.clone(), t3: self.t3.clone(), t4: self.t4.clone() }
    }

    /// `(⟨t₂⟩, ⟨t₃⟩, ⟨t₄⟩, ⟨t₂²⟩)` in floating point.
    pub fn to_f64(&self) -> [f64; 4] {
        [to_f64(&self.t2), to_f64(&self.t3), to_f64(&self.t4), to_f64(&self.t2_sq)]
    }
}

fn require_dim(d: usize) -> Result<i64> {
    if d < 2 {
        return Err(Error::Domain { d, what: "ensemble averages (d ≥ 2)".into() });
    }
    Ok(d as i64)
}

/// Moments of `t_k = Tr ρ^k` under the Hilbert–Schmidt measure.
pub fn hs_moments(d: usize) -> Result<MomentTable> {
    let dq = q(require_dim(d)?);
    let s = &dq * &dq;
    let p1 = &s + q(1);
    let p2 = &s + q(2);
    let p3 = &s + q(3);
    Ok(MomentTable {
        d,
        t2: q(2) * &dq / &p1,
        t3: (q(5) * &s + q(1)) / (&p1 * &p2),
        t4: (q(14) * &s * &dq + q(10) * &dq) / (&p1 * &p2 * &p3),
        t2_sq: (q(4) * &s * &s + q(18) * &s + q(2)) / (&p1 * &p2 * &p3),
    })
}

fn qpow(base: &Q, p: u32) -> Q {
    (0..p).fold(q(1), |acc, _| acc * base)
}

// Rows: (ω index, tensor order, partition label, coefficient numerator, denominator).
const DELTA_TABLE: &[(usize, usize, &str, i64, i64)] = &[
    (1, 4, "4", 1, 24),
    (1, 4, "31", 3, 8),
    (1, 4, "22", 1, 6),
    (1, 4, "211", 3, 8),
    (1, 4, "1111", 1, 24),
    (2, 4, "4", 1, 24),
    (2, 4, "31", 1, 8),
    (2, 4, "211", -1, 8),
    (2, 4, "1111", -1, 24),
    (2, 3, "3", -1, 6),
    (2, 3, "21", -2, 3),
    (2, 3, "111", -1, 6),
    (3, 4, "4", 1, 6),
    (3, 4, "31", 1, 2),
    (3, 4, "211", -1, 2),
    (3, 4, "1111", -1, 6),
    (4, 4, "4", 1, 24),
    (4, 4, "31", -1, 8),
    (4, 4, "22", 1, 6),
    (4, 4, "211", -1, 8),
    (4, 4, "1111", 1, 24),
    (4, 2, "2", 1, 2),
    (4, 2, "11", 1, 2),
    (4, 3, "3", -1, 3),
    (4, 3, "111", 1, 3),
    (5, 4, "4", 1, 12),
    (5, 4, "31", -1, 4),
    (5, 4, "22", 1, 3),
    (5, 4, "211", -1, 4),
    (5, 4, "1111", 1, 12),
    (6, 4, "4", 1, 6),
    (6, 4, "22", -1, 3),
    (6, 4, "1111", 1, 6),
    (6, 3, "3", -1, 3),
    (6, 3, "111", 1, 3),
    (7, 4, "4", 1, 6),
    (7, 4, "31", -1, 2),
    (7, 4, "211", 1, 2),
    (7, 4, "1111", -1, 6),
    (7, 2, "2", 1, 2),
    (7, 2, "11", -1, 2),
    (7, 3, "3", -2, 3),
    (7, 3, "21", 4, 3),
    (7, 3, "111", -2, 3),
    (8, 4, "4", 1, 12),
    (8, 4, "31", -1, 4),
    (8, 4, "211", 1, 4),
    (8, 4, "1111", -1, 12),
];

/// `ω_j(Λ)` as linear combinations of the `Δ_λ` forms.
pub fn omega_delta_forms(d: usize) -> Result<[MomentForm; 8]> {
    require_dim(d)?;
    let tables: Vec<Vec<(String, MomentForm)>> = (2..=4)
        .map(|k| Ok(delta_forms(k, d)?.into_iter().map(|(l, f)| (l.label(), f)).collect()))
        .collect::<Result<_>>()?;
    let mut out: [MomentForm; 8] = std::array::from_fn(|_| MomentForm::zero());
    for &(j, k, label, num, den) in DELTA_TABLE {
        let form = &tables[k - 2].iter().find(|(l, _)| l == label).expect("tabulated partition").1;
        out[j - 1] = &out[j - 1] + &form.scale(&frac(num, den));
    }
    Ok(out)
}

/// `N_d = 1/(d²(d²−1)(d²−4)(d²−9))`.
pub fn n_d(d: GeneralDim) -> Q {
    let dq = q(d.0 as i64);
    let s = &dq * &dq;
    q(1) / (&s * (&s - q(1)) * (&s - q(4)) * (&s - q(9)))
}

/// `K_d = 1/(d(d+1)(d+2)(d+3))`.
pub fn k_d(d: usize) -> Q {
    let dq = q(d as i64);
    q(1) / (&dq * (&dq + q(1)) * (&dq + q(2)) * (&dq + q(3)))
}

/// `Σ c·d^p` over `(c, p)`.
fn poly(d: i64, terms: &[(Q, u32)]) -> Q {
    terms.iter().map(|(c, p)| c * qpow(&q(d), *p)).sum()
}

/// `ω_j(Λ)` as explicit polynomials in the moments, scaled by `N_d`.
pub fn omega_polynomial_forms(dim: GeneralDim) -> [MomentForm; 8] {
    let d = dim.0 as i64;
    let p = |terms: &[(i64, u32)]| poly(d, &terms.iter().map(|&(c, e)| (q(c), e)).collect::<Vec<_>>());
    let form = |c: Q, t2: Q, t2_sq: Q, t3: Q, t4: Q| MomentForm::new(c, t2, t2_sq, t3, t4).scale(&n_d(dim));
    [
        form(
            p(&[(1, 4), (-8, 2), (6, 0)]),
            p(&[(-6, 3), (24, 1)]),
            p(&[(3, 2), (18, 0)]),
            p(&[(16, 2), (-24, 0)]),
            p(&[(-30, 1)]),
        ),
        form(
            p(&[(-1, 5), (10, 3), (-14, 1)]),
            p(&[(4, 4), (-26, 2)]),
            p(&[(-1, 3), (-6, 1)]),
            p(&[(-8, 3), (32, 1)]),
            p(&[(10, 2)]),
        ),
        form(
            p(&[(-4, 3), (16, 1)]),
            p(&[(4, 4), (4, 2)]),
            p(&[(-4, 3), (-24, 1)]),
            p(&[(-16, 3), (-16, 1)]),
            p(&[(40, 2)]),
        ),
        form(
            p(&[(1, 6), (-11, 4), (19, 2), (6, 0)]),
            p(&[(-3, 5), (25, 3), (-12, 1)]),
            p(&[(1, 4), (-6, 2), (18, 0)]),
            p(&[(4, 4), (-20, 2), (-24, 0)]),
            p(&[(-4, 3), (6, 1)]),
        ),
        form(
            p(&[(2, 2), (12, 0)]),
            p(&[(-4, 3), (-24, 1)]),
            p(&[(2, 4), (-12, 2), (36, 0)]),
            p(&[(32, 2), (-48, 0)]),
            p(&[(-8, 3), (12, 1)]),
        ),
        form(
            p(&[(2, 4), (-10, 2), (-12, 0)]),
            p(&[(-2, 5), (2, 3), (24, 1)]),
            p(&[(24, 2), (-36, 0)]),
            p(&[(8, 4), (-24, 2), (48, 0)]),
            p(&[(-12, 3), (-12, 1)]),
        ),
        form(
            p(&[(-1, 5), (5, 3), (16, 1)]),
            p(&[(1, 6), (-1, 4), (-32, 2)]),
            p(&[(-8, 3), (12, 1)]),
            p(&[(-4, 5), (20, 3), (-16, 1)]),
            p(&[(4, 4), (4, 2)]),
        ),
        form(
            p(&[(-10, 1)]),
            p(&[(20, 2)]),
            p(&[(-4, 3), (6, 1)]),
            p(&[(-8, 3), (-8, 1)]),
            p(&[(2, 4), (2, 2)]),
        ),
    ]
}

/// Coefficients of the isospectral average of the uncertainty product.
///
/// For `d ≥ 4` the `Δ`-form and the polynomial form are compared exactly and
/// at the given spectrum.
pub fn omega_iso(spectrum: &Spectrum) -> Result<CoefficientVector> {
    let d = spectrum.dimension();
    let delta = omega_delta_forms(d)?;
    let m = spectrum.moments();
    let values: [f64; 8] = std::array::from_fn(|j| delta[j].eval(&m));
    if let Ok(general) = GeneralDim::new(d) {
        let poly = omega_polynomial_forms(general);
        for j in 0..8 {
            let other = poly[j].eval(&m);
            if delta[j] != poly[j] || (values[j] - other).abs() > ROUTE_TOLERANCE {
                return Err(Error::Consistency(format!(
                    "ω_{} Δ-form {} disagrees with polynomial form {}",
                    j + 1,
                    values[j],
                    other
                )));
            }
        }
    }
    Ok(CoefficientVector { family: CoefficientFamily::Isospectral, d, values, exact: None })
}

/// Exact isospectral coefficients at exact moments (e.g. the pure spectrum).
pub fn omega_at(d: usize, point: &MomentPoint<Q>) -> Result<[Q; 8]> {
    let forms = omega_delta_forms(d)?;
    Ok(expansion::evaluate_all(&forms, point))
}

/// `(u, l)`: pure-state averages of the uncertainty product and of `L₀`.
pub fn pure_coefficients(d: usize) -> Result<(CoefficientVector, CoefficientVector)> {
    let di = require_dim(d)?;
    if di > 1 << 20 {
        return Err(Error::Domain { d, what: "pure-state coefficients (d ≤ 2^20)".into() });
    }
    let k = k_d(d);
    let scaled = |v: [i64; 8]| -> [Q; 8] { std::array::from_fn(|j| &k * q(v[j])) };
    let u = scaled([1, -(di + 2), 4, di * di + 3 * di + 1, 2, -2 * (di + 1), di * di + di - 2, 2]);
    let l = scaled([1, 1, -2 * (di + 1), 1, (di + 1) * (di + 2), -2 * (di + 1), di * di + 3 * di + 4, -2 * (di + 2)]);
    Ok((
        CoefficientVector::from_exact(CoefficientFamily::PureProduct, d, u),
        CoefficientVector::from_exact(CoefficientFamily::PureBound, d, l),
    ))
}

/// `Σ_j (u_j − l_j) Ω_j = (d+3)K_d(−Ω₂ + 2Ω₃ + dΩ₄ − dΩ₅ − 2Ω₇ + 2Ω₈)`.
pub fn pure_gap_combination(omega: &OmegaVector) -> f64 {
    let d = omega.d as f64;
    let scale = to_f64(&k_d(omega.d)) * (d + 3.0);
    let o = |j| omega.get(j);
    scale * (-o(2) + 2.0 * o(3) + d * o(4) - d * o(5) - 2.0 * o(7) + 2.0 * o(8))
}

/// Builds `N_d·(Σ c d^p + Σ c' d^{p'}/(d²+s))` from integer or half-integer data.
struct NdExpr<'a> {
    poly: &'a [(i64, i64, u32)],
    fracs: &'a [(i64, u32, i64)],
}

impl NdExpr<'_> {
    fn eval(&self, dim: GeneralDim) -> Q {
        let d = q(dim.0 as i64);
        let s = &d * &d;
        let mut total: Q = self.poly.iter().map(|&(n, den, p)| frac(n, den) * qpow(&d, p)).sum();
        for &(c, p, shift) in self.fracs {
            total += q(c) * qpow(&d, p) / (&s + q(shift));
        }
        total * n_d(dim)
    }
}

const OMEGA_BAR: [NdExpr<'static>; 8] = [
    NdExpr { poly: &[(1, 1, 4), (-20, 1, 2), (158, 1, 0)], fracs: &[(-50, 0, 1), (792, 0, 2), (-1512, 0, 3)] },
    NdExpr { poly: &[(-1, 1, 5), (18, 1, 3), (-118, 1, 1)], fracs: &[(-50, 1, 1), (504, 1, 3)] },
    NdExpr { poly: &[(4, 1, 3), (-80, 1, 1)], fracs: &[(200, 1, 1), (-1584, 1, 2), (2016, 1, 3)] },
    NdExpr {
        poly: &[(1, 1, 6), (-17, 1, 4), (99, 1, 2), (-316, 1, 0)],
        fracs: &[(-50, 0, 1), (396, 0, 2), (504, 0, 3)],
    },
    NdExpr { poly: &[(2, 1, 2), (-40, 1, 0)], fracs: &[(100, 0, 1), (-792, 0, 2), (1008, 0, 3)] },
    NdExpr { poly: &[(-2, 1, 4), (38, 1, 2), (-276, 1, 0)], fracs: &[(-792, 0, 2), (2016, 0, 3)] },
    NdExpr { poly: &[(1, 1, 5), (-19, 1, 3), (136, 1, 1)], fracs: &[(100, 1, 1), (-672, 1, 3)] },
    NdExpr { poly: &[(2, 1, 1)], fracs: &[(-100, 1, 1), (396, 1, 2), (-336, 1, 3)] },
];

const BETA: [NdExpr<'static>; 8] = [
    NdExpr { poly: &[(1, 1, 4), (-20, 1, 2), (158, 1, 0)], fracs: &[(-50, 0, 1), (792, 0, 2), (-1512, 0, 3)] },
    NdExpr { poly: &[(1, 1, 3), (-20, 1, 1)], fracs: &[(50, 1, 1), (-396, 1, 2), (504, 1, 3)] },
    NdExpr { poly: &[(-2, 1, 5), (38, 1, 3), (-276, 1, 1)], fracs: &[(-792, 1, 2), (2016, 1, 3)] },
    NdExpr { poly: &[(1, 1, 2), (-20, 1, 0)], fracs: &[(50, 0, 1), (-396, 0, 2), (504, 0, 3)] },
    NdExpr { poly: &[(1, 1, 6), (-17, 1, 4), (100, 1, 2), (-336, 1, 0)], fracs: &[(1008, 0, 3)] },
    NdExpr { poly: &[(-2, 1, 4), (38, 1, 2), (-276, 1, 0)], fracs: &[(-792, 0, 2), (2016, 0, 3)] },
    NdExpr { poly: &[(1, 2, 5), (-19, 2, 3), (70, 1, 1)], fracs: &[(-50, 1, 1), (396, 1, 2), (-672, 1, 3)] },
    NdExpr { poly: &[(1, 2, 5), (-19, 2, 3), (68, 1, 1)], fracs: &[(50, 1, 1), (-336, 1, 3)] },
];

const BETA_PRIME_7: NdExpr<'static> =
    NdExpr { poly: &[(1, 1, 5), (-17, 1, 3), (102, 1, 1)], fracs: &[(-100, 1, 1), (396, 1, 2), (-672, 1, 3)] };
const BETA_PRIME_8: NdExpr<'static> = NdExpr { poly: &[(-2, 1, 3), (36, 1, 1)], fracs: &[(100, 1, 1), (-336, 1, 3)] };

/// Hilbert–Schmidt average of the uncertainty product, `d ≥ 4`.
///
/// The listed formulas are checked against the isospectral polynomial form
/// with the Hilbert–Schmidt moments substituted.
pub fn omega_bar(dim: GeneralDim) -> Result<CoefficientVector> {
    let listed: [Q; 8] = std::array::from_fn(|j| OMEGA_BAR[j].eval(dim));
    let moments = hs_moments(dim.0)?.point();
    let substituted = expansion::evaluate_all(&omega_polynomial_forms(dim), &moments);
    if listed != substituted {
        return Err(Error::Consistency(format!("ω̄ listed formulas disagree with moment substitution at d = {}", dim.0)));
    }
    Ok(CoefficientVector::from_exact(CoefficientFamily::OmegaBar, dim.0, listed))
}

/// `ω̄` obtained by substituting Hilbert–Schmidt moments into the `Δ`-forms;
/// valid for every `d ≥ 2`.
pub fn omega_bar_by_moments(d: usize) -> Result<[Q; 8]> {
    omega_at(d, &hs_moments(d)?.point())
}

/// `(β, β′)`: Hilbert–Schmidt averages of the squared covariance term and of
/// the full bound `L₀`, `d ≥ 4`.
pub fn lower_bound_coefficients(dim: GeneralDim) -> Result<(CoefficientVector, CoefficientVector)> {
    let beta: [Q; 8] = std::array::from_fn(|j| BETA[j].eval(dim));
    let mut beta_prime = beta.clone();
    beta_prime[6] = BETA_PRIME_7.eval(dim);
    beta_prime[7] = BETA_PRIME_8.eval(dim);
    // The commutator term adds (Ω₇ − Ω₈)/(2d(d²+1)).
    let d = q(dim.0 as i64);
    let comm = q(1) / (q(2) * &d * (&d * &d + q(1)));
    if &beta_prime[6] - &beta[6] != comm || &beta[7] - &beta_prime[7] != comm {
        return Err(Error::Consistency(format!("β′ − β is not the commutator contribution at d = {}", dim.0)));
    }
    Ok((
        CoefficientVector::from_exact(CoefficientFamily::Beta, dim.0, beta),
        CoefficientVector::from_exact(CoefficientFamily::BetaPrime, dim.0, beta_prime),
    ))
}

/// `(product, bound)` Hilbert–Schmidt vectors for `d = 2, 3`.
pub fn lowdim_coefficients(d: LowDim) -> (CoefficientVector, CoefficientVector) {
    let v = |e: [(i64, i64); 8]| -> [Q; 8] { std::array::from_fn(|j| frac(e[j].0, e[j].1)) };
    match d {
        LowDim::Two => (
            CoefficientVector::from_exact(
                CoefficientFamily::Dim2Product,
                2,
                v([(2, 105), (-2, 35), (4, 105), (29, 210), (1, 105), (-1, 21), (3, 70), (1, 210)]),
            ),
            CoefficientVector::from_exact(
                CoefficientFamily::Dim2Bound,
                2,
                v([(2, 105), (1, 105), (-2, 21), (1, 210), (1, 7), (-1, 21), (8, 105), (-1, 35)]),
            ),
        ),
        LowDim::Three => (
            CoefficientVector::from_exact(
                CoefficientFamily::Dim3Product,
                3,
                v([(3, 440), (-1, 40), (1, 110), (109, 1320), (1, 660), (-1, 66), (1, 45), (1, 1980)]),
            ),
            CoefficientVector::from_exact(
                CoefficientFamily::Dim3Bound,
                3,
                v([(3, 440), (1, 440), (-1, 22), (1, 1320), (1, 12), (-1, 66), (14, 495), (-1, 180)]),
            ),
        ),
    }
}

/// Hilbert–Schmidt product vector for any `d ≥ 2`.
pub fn hs_product_coefficients(d: usize) -> Result<CoefficientVector> {
    match LowDim::new(d) {
        Ok(low) => Ok(lowdim_coefficients(low).0),
        Err(_) => omega_bar(GeneralDim::new(d)?),
    }
}

/// Hilbert–Schmidt bound (`L₀`) vector for any `d ≥ 2`.
pub fn hs_bound_coefficients(d: usize) -> Result<CoefficientVector> {
    match LowDim::new(d) {
        Ok(low) => Ok(lowdim_coefficients(low).1),
        Err(_) => Ok(lower_bound_coefficients(GeneralDim::new(d)?)?.1),
    }
}

/// `Tr A² − (Tr A)²/d`.
fn centered_square(a: &Observable) -> f64 {
    let d = a.dimension() as f64;
    let tr = a.trace();
    crate::functionals::trace_product(a.matrix(), a.matrix()).re - tr * tr / d
}

/// Isospectral average of `ΔA²`: `((d − t₂)/(d² − 1))(Tr A² − (Tr A)²/d)`.
pub fn average_iso_variance(spectrum: &Spectrum, a: &Observable) -> Result<f64> {
    let d = spectrum.dimension();
    require_dim(d)?;
    if a.dimension() != d {
        return Err(Error::DimensionMismatch { expected: d, got: a.dimension() });
    }
    let df = d as f64;
    Ok((df - spectrum.power_sum(2)) / (df * df - 1.0) * centered_square(a))
}

/// Hilbert–Schmidt average of `ΔA²`: `(d/(d²+1))(Tr A² − (Tr A)²/d)`.
pub fn average_hs_variance(a: &Observable) -> Result<f64> {
    let d = require_dim(a.dimension())? as f64;
    Ok(d / (d * d + 1.0) * centered_square(a))
}

/// `Σ_j c_j Ω_j`.
pub fn assemble_average(coeffs: &CoefficientVector, omega: &OmegaVector) -> Result<f64> {
    if coeffs.d != omega.d {
        return Err(Error::DimensionMismatch { expected: coeffs.d, got: omega.d });
    }
    if !coeffs.family.admits(coeffs.d) {
        return Err(Error::Domain { d: coeffs.d, what: format!("coefficient family {}", coeffs.family) });
    }
    Ok(omega.dot(&coeffs.values))
}

#[cfg(test)]
mod tests {
    use super::expansion::{covariance_squared, expand, evaluate_all, robertson_schrodinger_bound, uncertainty_product};
    use super::*;
    use crate::functionals::omega_vector;

    fn f64s(v: &[Q; 8]) -> [f64; 8] {
        std::array::from_fn(|j| to_f64(&v[j]))
    }

    #[test]
    fn hs_moment_tables() {
        let m = hs_moments(2).unwrap();
        assert_eq!((m.t2, m.t3, m.t4, m.t2_sq), (frac(4, 5), frac(7, 10), frac(22, 35), frac(23, 35)));
        let m = hs_moments(3).unwrap();
        assert_eq!((m.t2, m.t3, m.t4, m.t2_sq), (frac(3, 5), frac(23, 55), frac(17, 55), frac(61, 165)));
        let big = hs_moments(2000).unwrap().to_f64();
        assert!((big[0] * 2000.0 - 2.0).abs() < 1e-5);
        assert!(hs_moments(1).is_err());
    }

    #[test]
    fn delta_table_matches_expansion() {
        for d in 2..=7 {
            assert_eq!(omega_delta_forms(d).unwrap(), expand(&uncertainty_product(), d).unwrap(), "d = {d}");
        }
    }

    #[test]
    fn polynomial_forms_match_delta_forms() {
        for d in 4..=9 {
            let dim = GeneralDim::new(d).unwrap();
            assert_eq!(omega_polynomial_forms(dim), omega_delta_forms(d).unwrap(), "d = {d}");
        }
    }

    #[test]
    fn pure_spectrum_gives_u() {
        for d in 2..=8 {
            let (u, l) = pure_coefficients(d).unwrap();
            assert_eq!(omega_at(d, &MomentPoint::pure()).unwrap(), u.exact.clone().unwrap());
            let bound = evaluate_all(&expand(&robertson_schrodinger_bound(), d).unwrap(), &MomentPoint::pure());
            assert_eq!(bound, l.exact.unwrap());
        }
    }

    #[test]
    fn qubit_pure_vectors() {
        let (u, l) = pure_coefficients(2).unwrap();
        let u_expected = [frac(1, 120), frac(-1, 30), frac(1, 30), frac(11, 120), frac(1, 60), frac(-1, 20), frac(1, 30), frac(1, 60)];
        assert_eq!(u.exact.unwrap(), u_expected);
        // Differs from the often-quoted table only along Ω₇ + Ω₈.
        let l_expected = [frac(1, 120), frac(1, 120), frac(-1, 20), frac(1, 120), frac(1, 10), frac(-1, 20), frac(7, 60), frac(-1, 15)];
        assert_eq!(l.exact.unwrap(), l_expected);
    }

    #[test]
    fn pauli_pure_averages() {
        let o = omega_vector(&Observable::pauli_x(), &Observable::pauli_y()).unwrap();
        let (u, l) = pure_coefficients(2).unwrap();
        assert!((assemble_average(&u, &o).unwrap() - 0.4).abs() < 1e-15);
        assert!((assemble_average(&l, &o).unwrap() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn omega_bar_cross_checks() {
        for d in 4..=9 {
            let dim = GeneralDim::new(d).unwrap();
            let listed = omega_bar(dim).unwrap();
            assert_eq!(listed.exact.unwrap(), omega_bar_by_moments(d).unwrap());
        }
        assert!(matches!(GeneralDim::new(3), Err(Error::Domain { .. })));
    }

    #[test]
    fn beta_families_match_expansion() {
        for d in 4..=9 {
            let (beta, beta_prime) = lower_bound_coefficients(GeneralDim::new(d).unwrap()).unwrap();
            let hs = hs_moments(d).unwrap().point();
            let cov = evaluate_all(&expand(&covariance_squared(), d).unwrap(), &hs);
            let full = evaluate_all(&expand(&robertson_schrodinger_bound(), d).unwrap(), &hs);
            let (beta, beta_prime) = (beta.exact.unwrap(), beta_prime.exact.unwrap());
            assert_eq!(beta, cov, "d = {d}");
            assert_eq!(beta_prime, full, "d = {d}");
            assert_eq!(beta[..6], beta_prime[..6]);
        }
    }

    #[test]
    fn lowdim_vectors_reassemble() {
        for low in [LowDim::Two, LowDim::Three] {
            let d = low.get();
            let hs = hs_moments(d).unwrap().point();
            let (product, bound) = lowdim_coefficients(low);
            assert_eq!(product.exact.unwrap(), omega_bar_by_moments(d).unwrap());
            let full = evaluate_all(&expand(&robertson_schrodinger_bound(), d).unwrap(), &hs);
            assert_eq!(bound.exact.unwrap(), full);
        }
    }

    #[test]
    fn qubit_hs_delta_averages() {
        let hs = hs_moments(2).unwrap().point();
        let avg = |k: usize| -> Vec<Q> {
            delta_forms(k, 2).unwrap().iter().map(|(_, f)| f.eval_exact(&hs)).collect()
        };
        assert_eq!(avg(2), [frac(3, 10), frac(1, 10)]);
        assert_eq!(avg(3)[..2], [frac(1, 5), frac(1, 20)]);
        assert_eq!(avg(4)[..3], [frac(1, 7), frac(1, 35), frac(1, 70)]);
    }

    #[test]
    fn pure_gap_identity() {
        let a = Observable::gell_mann(1).unwrap();
        let b = &Observable::gell_mann(3).unwrap().matrix().clone() + Observable::gell_mann(4).unwrap().matrix();
        let b = Observable::new(b).unwrap();
        let o = omega_vector(&a, &b).unwrap();
        let (u, l) = pure_coefficients(3).unwrap();
        let direct = o.dot(&u.values) - o.dot(&l.values);
        assert!((direct - pure_gap_combination(&o)).abs() < 1e-14);
    }

    #[test]
    fn average_variance_examples() {
        let z = Observable::pauli_z();
        let pure = Spectrum::pure(2).unwrap();
        assert!((average_iso_variance(&pure, &z).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((average_hs_variance(&z).unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(average_iso_variance(&pure, &Observable::identity(2)).unwrap(), 0.0);
    }

    #[test]
    fn assemble_checks_dimension() {
        let o = omega_vector(&Observable::identity(3), &Observable::identity(3)).unwrap();
        let (u, _) = pure_coefficients(2).unwrap();
        assert!(matches!(assemble_average(&u, &o), Err(Error::DimensionMismatch { .. })));
        let (u, _) = pure_coefficients(3).unwrap();
        assert!(assemble_average(&u, &o).unwrap().abs() < 1e-14);
        let product = hs_product_coefficients(3).unwrap();
        assert!(assemble_average(&product, &o).unwrap().abs() < 1e-14);
    }

    #[test]
    fn maximally_mixed_orbit_is_a_point() {
        let a = Observable::gell_mann(2).unwrap();
        let b = Observable::new(Observable::gell_mann(8).unwrap().matrix() + Observable::gell_mann(1).unwrap().matrix()).unwrap();
        let spectrum = Spectrum::uniform(3).unwrap();
        let coeffs = omega_iso(&spectrum).unwrap();
        let o = omega_vector(&a, &b).unwrap();
        let rho = crate::functionals::DensityMatrix::maximally_mixed(3);
        let point = crate::functionals::product_functional(&a, &b, &rho).unwrap();
        assert!((assemble_average(&coeffs, &o).unwrap() - point).abs() < 1e-13);
    }

    #[test]
    fn family_tags_serialize() {
        assert_eq!(CoefficientFamily::Isospectral.to_string(), "omega");
        assert_eq!(CoefficientFamily::BetaPrime.to_string(), "beta_prime");
        assert_eq!(CoefficientFamily::Dim3Bound.to_string(), "dim3_bound");
    }

    #[test]
    fn float_values_are_converted() {
        let v = f64s(&lowdim_coefficients(LowDim::Two).0.exact.unwrap());
        assert!((v[0] - 2.0 / 105.0).abs() < 1e-17);
    }
}
