//! Unitary twirls `E_k(Λ) = ∫ (UΛU†)^⊗k dU` and their decomposition
//! `E_k(Λ) = Σ_λ Δ_λ(Λ) C_λ` over central projectors.

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::exact::{q, MomentForm, MomentPoint, Q};
use crate::symgroup::{self, central_projectors, character, weingarten, Partition, Permutation, PermutationOperator};
use crate::{CMatrix, Error, Result};

/// Tolerance for the agreement of independent routes to the same `Δ_λ`.
pub const ROUTE_TOLERANCE: f64 = 1e-10;

/// Eigenvalues of a density matrix: nonnegative and summing to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSpectrum("empty spectrum".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < -1e-14) {
            return Err(Error::InvalidSpectrum(format!("entry {v} is negative or not finite")));
        }
        let total: f64 = values.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidSpectrum(format!("entries sum to {total}, not 1")));
        }
        for v in &mut values {
            *v = v.max(0.0);
        }
        Ok(Spectrum { values })
    }

    /// Maximally mixed spectrum `I/d`.
    pub fn uniform(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidSpectrum("dimension must be positive".into()));
        }
        Self::new(vec![1.0 / d as f64; d])
    }

    /// Rank-one spectrum `(1, 0, …, 0)`.
    pub fn pure(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidSpectrum("dimension must be positive".into()));
        }
        let mut v = vec![0.0; d];
        v[0] = 1.0;
        Self::new(v)
    }

    pub fn dimension(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `t_p = Σ λ_i^p`.
    pub fn power_sum(&self, p: u32) -> f64 {
        self.values.iter().map(|v| v.powi(p as i32)).sum()
    }

    pub fn moments(&self) -> MomentPoint<f64> {
        MomentPoint::from_power_sums(self.power_sum(2), self.power_sum(3), self.power_sum(4))
    }

    pub fn is_pure(&self) -> bool {
        (self.power_sum(2) - 1.0).abs() < 1e-12
    }

    pub fn to_matrix(&self) -> CMatrix {
        CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.dimension(),
            self.values.iter().map(|&v| Complex64::new(v, 0.0)),
        ))
    }
}

/// Closed-form `Δ_λ` as a form in the spectral moments, for every `λ ⊢ k`.
///
/// Partitions with more than `d` rows have `C_λ = 0`; their form is zero.
pub fn delta_forms(k: usize, d: usize) -> Result<Vec<(Partition, MomentForm)>> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let di = d as i64;
    let f = |c: i64, t2: i64, t2_sq: i64, t3: i64, t4: i64| MomentForm::new(q(c), q(t2), q(t2_sq), q(t3), q(t4));
    let table: Vec<(Vec<usize>, MomentForm, i64)> = match k {
        1 => vec![(vec![1], f(1, 0, 0, 0, 0), di)],
        2 => vec![(vec![2], f(1, 1, 0, 0, 0), di * (di + 1)), (vec![1, 1], f(1, -1, 0, 0, 0), (di - 1) * di)],
        3 => vec![
            (vec![3], f(1, 3, 0, 2, 0), di * (di + 1) * (di + 2)),
            (vec![2, 1], f(1, 0, 0, -1, 0), (di - 1) * di * (di + 1)),
            (vec![1, 1, 1], f(1, -3, 0, 2, 0), (di - 2) * (di - 1) * di),
        ],
        4 => vec![
            (vec![4], f(1, 6, 3, 8, 6), di * (di + 1) * (di + 2) * (di + 3)),
            (vec![3, 1], f(1, 2, -1, 0, -2), (di - 1) * di * (di + 1) * (di + 2)),
            (vec![2, 2], f(1, 0, 3, -4, 0), (di - 1) * di * di * (di + 1)),
            (vec![2, 1, 1], f(1, -2, -1, 0, 2), (di - 2) * (di - 1) * di * (di + 1)),
            (vec![1, 1, 1, 1], f(1, -6, 3, 8, -6), (di - 3) * (di - 2) * (di - 1) * di),
        ],
        _ => return Err(Error::UnsupportedOrder(k)),
    };
    table
        .into_iter()
        .map(|(parts, numerator, denominator)| {
            let lambda = Partition::new(parts)?;
            let form = if lambda.rows() > d { MomentForm::zero() } else { numerator.scale(&(q(1) / q(denominator))) };
            Ok((lambda, form))
        })
        .collect()
}

/// `Δ_λ = Tr[Λ^⊗k C_λ] / Tr C_λ` expanded through characters:
/// `Tr[Λ^⊗k P(π)]` is the product of `t_ℓ` over the cycle lengths `ℓ` of `π`.
pub fn delta_forms_from_characters(k: usize, d: usize) -> Result<Vec<(Partition, MomentForm)>> {
    if !(1..=symgroup::MAX_ORDER).contains(&k) {
        return Err(Error::UnsupportedOrder(k));
    }
    let perms = Permutation::all(k);
    Partition::of(k)
        .into_iter()
        .map(|lambda| {
            let dim_q = lambda.dim_unitary(d);
            if dim_q == 0 {
                return Ok((lambda, MomentForm::zero()));
            }
            let mut sum = MomentForm::zero();
            for p in &perms {
                let mono = MomentForm::cycle_monomial(p.cycle_type().parts()).expect("k ≤ 4");
                sum = &sum + &mono.scale(&q(character(&lambda, p)?));
            }
            let norm = q(perms.len() as i64 * dim_q as i64);
            Ok((lambda, sum.scale(&(q(1) / norm))))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaEntry {
    pub partition: Partition,
    pub value: f64,
    pub via_trace_ratio: f64,
}

/// `Δ_λ(Λ)` for every `λ ⊢ k`, computed by closed form and cross-checked
/// against the character trace ratio.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaCoefficients {
    pub k: usize,
    pub d: usize,
    pub entries: Vec<DeltaEntry>,
}

impl DeltaCoefficients {
    pub fn get(&self, lambda: &Partition) -> Option<f64> {
        self.entries.iter().find(|e| &e.partition == lambda).map(|e| e.value)
    }
}

pub fn delta_coefficients(spectrum: &Spectrum, k: usize) -> Result<DeltaCoefficients> {
    let d = spectrum.dimension();
    let m = spectrum.moments();
    let closed = delta_forms(k, d)?;
    let ratio = delta_forms_from_characters(k, d)?;
    let mut entries = Vec::with_capacity(closed.len());
    for ((lambda, a), (_, b)) in closed.into_iter().zip(ratio) {
        let value = a.eval(&m);
        let via_trace_ratio = b.eval(&m);
        if (value - via_trace_ratio).abs() > ROUTE_TOLERANCE {
            return Err(Error::Consistency(format!(
                "Δ{} closed form {value} disagrees with trace ratio {via_trace_ratio}",
                lambda.label()
            )));
        }
        entries.push(DeltaEntry { partition: lambda, value, via_trace_ratio });
    }
    Ok(DeltaCoefficients { k, d, entries })
}

/// `E_k(Λ) = Σ_λ Δ_λ C_λ` as a dense matrix.
pub fn twirl_projector(spectrum: &Spectrum, k: usize) -> Result<CMatrix> {
    let d = spectrum.dimension();
    let deltas = delta_coefficients(spectrum, k)?;
    let projectors = central_projectors(k, d)?;
    let side = projectors[0].matrix().nrows();
    let mut out = CMatrix::zeros(side, side);
    for (p, e) in projectors.iter().zip(&deltas.entries) {
        out += p.matrix() * Complex64::new(e.value, 0.0);
    }
    Ok(out)
}

/// `∫ U^⊗k M U†^⊗k dU` for an arbitrary operator `M` on `(ℂ^d)^⊗k`, through
/// the Weingarten expansion `Σ_{σ,τ} Wg(τσ⁻¹) Tr[M P(σ⁻¹)] P(τ)`.
pub fn twirl_weingarten(m: &CMatrix, k: usize, d: usize) -> Result<CMatrix> {
    let side = symgroup::tensor_side(d, k)?;
    if m.nrows() != side || m.ncols() != side {
        return Err(Error::DimensionMismatch { expected: side, got: m.nrows() });
    }
    let perms = Permutation::all(k);
    let ops = perms.iter().map(|p| PermutationOperator::new(p, d)).collect::<Result<Vec<_>>>()?;
    let index = |p: &Permutation| perms.iter().position(|r| r == p).expect("group closed");
    let traces: Vec<Complex64> = perms.iter().map(|s| ops[index(&s.inverse())].trace_against(m)).collect();
    let wg: Vec<f64> = perms.iter().map(|p| weingarten(p, d).map(|w| crate::exact::to_f64(&w))).collect::<Result<_>>()?;
    let mut out = CMatrix::zeros(side, side);
    for (t, tau) in perms.iter().enumerate() {
        let mut c = Complex64::zero();
        for (s, sigma) in perms.iter().enumerate() {
            c += traces[s] * wg[index(&tau.compose(&sigma.inverse())?)];
        }
        ops[t].add_scaled(c, &mut out);
    }
    Ok(out)
}

/// `∫ (|ψ⟩⟨ψ|)^⊗k dψ`, the normalized projector onto the symmetric subspace.
pub fn pure_moment(k: usize, d: usize) -> Result<CMatrix> {
    let sym = Partition::new(vec![k]).map_err(|_| Error::UnsupportedOrder(k))?;
    let proj = symgroup::CentralProjector::new(&sym, d)?;
    Ok(proj.matrix() / Complex64::new(proj.dim_unitary() as f64, 0.0))
}

/// Exact `Δ_λ` at the rank-one spectrum; equals `1/dim Q_(k)` for `λ = (k)` and zero otherwise.
pub fn pure_deltas(k: usize, d: usize) -> Result<Vec<(Partition, Q)>> {
    let pure = MomentPoint::pure();
    Ok(delta_forms(k, d)?.into_iter().map(|(l, f)| (l, f.eval_exact(&pure))).collect())
}
