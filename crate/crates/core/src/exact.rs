//! Exact rational helpers and linear forms in the spectral moments.
//!
//! Every isospectral coefficient is an affine function of the five spectral
//! monomials `1, t₂, t₂², t₃, t₄` (with `t_k = Tr Λ^k`). [`MomentForm`] holds
//! the rational coefficients of such a function for one fixed dimension `d`,
//! so the same object can be evaluated at a float spectrum, at the pure
//! spectrum, or at exact Hilbert–Schmidt moments.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Exact rational scalar.
pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Values of the spectral monomials `(t₂, t₂², t₃, t₄)`.
///
/// `t2_sq` is kept separately from `t2` because ensemble averages need
/// `⟨t₂²⟩ ≠ ⟨t₂⟩²`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentPoint<T> {
    pub t2: T,
    pub t2_sq: T,
    pub t3: T,
    pub t4: T,
}

impl MomentPoint<f64> {
    pub fn from_power_sums(t2: f64, t3: f64, t4: f64) -> Self {
        MomentPoint { t2, t2_sq: t2 * t2, t3, t4 }
    }
}

impl MomentPoint<Q> {
    /// Rank-one spectrum: every `t_k = 1`.
    pub fn pure() -> Self {
        MomentPoint { t2: q(1), t2_sq: q(1), t3: q(1), t4: q(1) }
    }

    pub fn to_f64(&self) -> MomentPoint<f64> {
        MomentPoint {
            t2: to_f64(&self.t2),
            t2_sq: to_f64(&self.t2_sq),
            t3: to_f64(&self.t3),
            t4: to_f64(&self.t4),
        }
    }
}

/// `c₀ + c₁ t₂ + c₂ t₂² + c₃ t₃ + c₄ t₄` with exact rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentForm {
    coeffs: [Q; 5],
}

impl MomentForm {
    pub fn new(constant: Q, t2: Q, t2_sq: Q, t3: Q, t4: Q) -> Self {
        MomentForm { coeffs: [constant, t2, t2_sq, t3, t4] }
    }

    pub fn zero() -> Self {
        MomentForm { coeffs: std::array::from_fn(|_| Q::zero()) }
    }

    pub fn constant(c: Q) -> Self {
        let mut f = Self::zero();
        f.coeffs[0] = c;
        f
    }

    /// Monomial `t_{c₁} t_{c₂} …` for a cycle type; `t₁ = 1`.
    ///
    /// Only the cycle types of `S_k`, `k ≤ 4` are representable.
    pub fn cycle_monomial(cycle_lengths: &[usize]) -> Option<Self> {
        let mut lens: Vec<usize> = cycle_lengths.iter().copied().filter(|&l| l > 1).collect();
        lens.sort_unstable();
        let slot = match lens.as_slice() {
            [] => 0,
            [2] => 1,
            [2, 2] => 2,
            [3] => 3,
            [4] => 4,
            _ => return None,
        };
        let mut f = Self::zero();
        f.coeffs[slot] = Q::one();
        Some(f)
    }

    pub fn coeffs(&self) -> &[Q; 5] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn eval(&self, m: &MomentPoint<f64>) -> f64 {
        let c: Vec<f64> = self.coeffs.iter().map(to_f64).collect();
        c[0] + c[1] * m.t2 + c[2] * m.t2_sq + c[3] * m.t3 + c[4] * m.t4
    }

    pub fn eval_exact(&self, m: &MomentPoint<Q>) -> Q {
        let c = &self.coeffs;
        &c[0] + &c[1] * &m.t2 + &c[2] * &m.t2_sq + &c[3] * &m.t3 + &c[4] * &m.t4
    }

    pub fn scale(&self, s: &Q) -> Self {
        MomentForm { coeffs: std::array::from_fn(|i| &self.coeffs[i] * s) }
    }
}

impl Add for &MomentForm {
    type Output = MomentForm;
    fn add(self, rhs: &MomentForm) -> MomentForm {
        MomentForm { coeffs: std::array::from_fn(|i| &self.coeffs[i] + &rhs.coeffs[i]) }
    }
}

impl Sub for &MomentForm {
    type Output = MomentForm;
    fn sub(self, rhs: &MomentForm) -> MomentForm {
        MomentForm { coeffs: std::array::from_fn(|i| &self.coeffs[i] - &rhs.coeffs[i]) }
    }
}

impl Neg for &MomentForm {
    type Output = MomentForm;
    fn neg(self) -> MomentForm {
        MomentForm { coeffs: std::array::from_fn(|i| -&self.coeffs[i]) }
    }
}

impl Mul<&Q> for &MomentForm {
    type Output = MomentForm;
    fn mul(self, rhs: &Q) -> MomentForm {
        self.scale(rhs)
    }
}

impl fmt::Display for MomentForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const NAMES: [&str; 5] = ["", "·t2", "·t2²", "·t3", "·t4"];
        let mut first = true;
        for (c, name) in self.coeffs.iter().zip(NAMES) {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "({c}){name}")?;
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}
