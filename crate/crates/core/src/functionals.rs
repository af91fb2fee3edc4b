//! State- and observable-level functionals: variances, the uncertainty
//! product, the Robertson–Schrödinger bound `L₀`, the eight symmetric trace
//! functionals `Ω_j`, the derived trace inequalities and a freeness
//! diagnostic for large random pairs.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::closedforms;
use crate::{CMatrix, Error, Result};

/// Relative Hermiticity tolerance for constructed observables.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// Largest accepted imaginary residue of an expectation value.
pub const EXPECTATION_TOLERANCE: f64 = 1e-10;

/// Variances above `−VARIANCE_CLAMP` are clamped to zero.
pub const VARIANCE_CLAMP: f64 = 1e-10;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn hermitian_residual(m: &CMatrix) -> f64 {
    (m - m.adjoint()).norm()
}

/// `Tr(XY)` without forming the product.
pub(crate) fn trace_product(x: &CMatrix, y: &CMatrix) -> Complex64 {
    let n = x.nrows();
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            s += x[(i, j)] * y[(j, i)];
        }
    }
    s
}

/// Hermitian `d × d` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    matrix: CMatrix,
}

impl Observable {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, HERMITIAN_TOLERANCE)
    }

    /// Accepts `‖M − M†‖ ≤ tol·‖M‖` (Frobenius norms) and stores the Hermitian part.
    pub fn with_tolerance(matrix: CMatrix, tol: f64) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::InvalidArgument(format!(
                "observable must be a nonempty square matrix, got {}×{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("observable has non-finite entries".into()));
        }
        let residual = hermitian_residual(&matrix);
        if residual > tol * matrix.norm() {
            return Err(Error::NotHermitian { residual });
        }
        let matrix = (&matrix + matrix.adjoint()) * c(0.5, 0.0);
        Ok(Observable { matrix })
    }

    pub fn from_real_imag(d: usize, re: &[f64], im: &[f64], tol: f64) -> Result<Self> {
        if re.len() != d * d || im.len() != d * d {
            return Err(Error::DimensionMismatch { expected: d * d, got: re.len().max(im.len()) });
        }
        let m = CMatrix::from_fn(d, d, |i, j| c(re[i * d + j], im[i * d + j]));
        Self::with_tolerance(m, tol)
    }

    pub fn identity(d: usize) -> Self {
        Observable { matrix: CMatrix::identity(d, d) }
    }

    pub fn pauli_x() -> Self {
        Observable { matrix: CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]) }
    }

    pub fn pauli_y() -> Self {
        Observable { matrix: CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]) }
    }

    pub fn pauli_z() -> Self {
        Observable { matrix: CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]) }
    }

    /// Gell-Mann matrix `λ_j`, `j ∈ 1..=8`.
    pub fn gell_mann(j: usize) -> Result<Self> {
        let mut m = CMatrix::zeros(3, 3);
        let mut sym = |a: usize, b: usize| {
            m[(a, b)] = c(1., 0.);
            m[(b, a)] = c(1., 0.);
        };
        match j {
            1 => sym(0, 1),
            4 => sym(0, 2),
            6 => sym(1, 2),
            2 | 5 | 7 => {
                let (a, b) = match j {
                    2 => (0, 1),
                    5 => (0, 2),
                    _ => (1, 2),
                };
                m[(a, b)] = c(0., -1.);
                m[(b, a)] = c(0., 1.);
            }
            3 => {
                m[(0, 0)] = c(1., 0.);
                m[(1, 1)] = c(-1., 0.);
            }
            8 => {
                let s = 1.0 / 3f64.sqrt();
                m[(0, 0)] = c(s, 0.);
                m[(1, 1)] = c(s, 0.);
                m[(2, 2)] = c(-2. * s, 0.);
            }
            _ => return Err(Error::InvalidArgument(format!("Gell-Mann index {j} outside 1..=8"))),
        }
        Ok(Observable { matrix: m })
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.matrix.clone().symmetric_eigenvalues().iter().copied().collect()
    }

    /// Largest absolute eigenvalue.
    pub fn operator_norm(&self) -> f64 {
        self.eigenvalues().into_iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub(crate) fn from_hermitian_unchecked(matrix: CMatrix) -> Self {
        Observable { matrix }
    }
}

/// Positive semidefinite, unit-trace Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::InvalidDensity("not a nonempty square matrix".into()));
        }
        let residual = hermitian_residual(&matrix);
        if residual > HERMITIAN_TOLERANCE * matrix.norm().max(1.0) {
            return Err(Error::NotHermitian { residual });
        }
        let matrix = (&matrix + matrix.adjoint()) * c(0.5, 0.0);
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDensity(format!("trace {tr} is not 1")));
        }
        let min = matrix.clone().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        if min < -1e-10 {
            return Err(Error::InvalidDensity(format!("minimum eigenvalue {min} is negative")));
        }
        Ok(DensityMatrix { matrix })
    }

    pub fn maximally_mixed(d: usize) -> Self {
        DensityMatrix { matrix: CMatrix::identity(d, d) / c(d as f64, 0.0) }
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) nonzero vector.
    pub fn from_pure(psi: &DVector<Complex64>) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidDensity("state vector has zero or non-finite norm".into()));
        }
        let v = psi / c(norm, 0.0);
        Ok(DensityMatrix { matrix: &v * v.adjoint() })
    }

    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        DensityMatrix { matrix }
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

fn check_dims(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

fn real_part(z: Complex64, scale: f64) -> Result<f64> {
    if z.im.abs() > EXPECTATION_TOLERANCE * scale.max(1.0) {
        return Err(Error::NotHermitian { residual: z.im.abs() });
    }
    Ok(z.re)
}

/// `Tr(Oρ)`.
pub fn expectation(o: &Observable, rho: &DensityMatrix) -> Result<f64> {
    check_dims(o.dimension(), rho.dimension())?;
    real_part(trace_product(o.matrix(), rho.matrix()), o.matrix().norm())
}

/// `⟨O²⟩ − ⟨O⟩²`, set to zero when it is below rounding level relative to
/// `⟨O²⟩` or negative by less than [`VARIANCE_CLAMP`].
fn clamped_variance(second_moment: f64, mean: f64) -> f64 {
    let v = second_moment - mean * mean;
    if v.abs() <= 1e-12 * second_moment.abs() || (v < 0.0 && v > -VARIANCE_CLAMP) {
        0.0
    } else {
        v
    }
}

/// Squared uncertainty `⟨O²⟩ − ⟨O⟩²`.
pub fn variance(o: &Observable, rho: &DensityMatrix) -> Result<f64> {
    let mean = expectation(o, rho)?;
    let sq = Observable::from_hermitian_unchecked(o.matrix() * o.matrix());
    Ok(clamped_variance(expectation(&sq, rho)?, mean))
}

/// `{A,B} = (AB+BA)/2`.
pub fn anticommutator(a: &Observable, b: &Observable) -> Result<Observable> {
    check_dims(a.dimension(), b.dimension())?;
    let (x, y) = (a.matrix(), b.matrix());
    Ok(Observable::from_hermitian_unchecked((x * y + y * x) * c(0.5, 0.0)))
}

/// `[A,B] = (AB−BA)/(2i)`, Hermitian for Hermitian `A`, `B`.
pub fn commutator(a: &Observable, b: &Observable) -> Result<Observable> {
    check_dims(a.dimension(), b.dimension())?;
    let (x, y) = (a.matrix(), b.matrix());
    Ok(Observable::from_hermitian_unchecked((x * y - y * x) * c(0.0, -0.5)))
}

/// Precomputed products of an observable pair for repeated evaluation of
/// the uncertainty product and `L₀` on many states.
#[derive(Clone, Debug)]
pub struct ObservablePair {
    a: Observable,
    b: Observable,
    a_sq: CMatrix,
    b_sq: CMatrix,
    anti: CMatrix,
    comm: CMatrix,
}

/// Uncertainty product and Robertson–Schrödinger bound of one state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyValues {
    pub product: f64,
    pub lower_bound: f64,
}

impl ObservablePair {
    pub fn new(a: &Observable, b: &Observable) -> Result<Self> {
        check_dims(a.dimension(), b.dimension())?;
        Ok(ObservablePair {
            a_sq: a.matrix() * a.matrix(),
            b_sq: b.matrix() * b.matrix(),
            anti: anticommutator(a, b)?.matrix,
            comm: commutator(a, b)?.matrix,
            a: a.clone(),
            b: b.clone(),
        })
    }

    pub fn a(&self) -> &Observable {
        &self.a
    }

    pub fn b(&self) -> &Observable {
        &self.b
    }

    pub fn dimension(&self) -> usize {
        self.a.dimension()
    }

    fn combine(&self, ev: impl Fn(&CMatrix) -> f64) -> UncertaintyValues {
        let (ma, mb) = (ev(self.a.matrix()), ev(self.b.matrix()));
        let var_a = clamped_variance(ev(&self.a_sq), ma);
        let var_b = clamped_variance(ev(&self.b_sq), mb);
        // |cov|² ≤ ΔA²ΔB², so a vanishing variance forces a vanishing covariance.
        let cov = if var_a == 0.0 || var_b == 0.0 { 0.0 } else { ev(&self.anti) - ma * mb };
        let comm = ev(&self.comm);
        UncertaintyValues { product: var_a * var_b, lower_bound: cov * cov + comm * comm }
    }

    pub fn evaluate(&self, rho: &DensityMatrix) -> Result<UncertaintyValues> {
        check_dims(self.dimension(), rho.dimension())?;
        Ok(self.combine(|x| trace_product(x, rho.matrix()).re))
    }

    /// Evaluates on the normalized vector `ψ` without forming `|ψ⟩⟨ψ|`.
    pub fn evaluate_pure(&self, psi: &DVector<Complex64>) -> Result<UncertaintyValues> {
        check_dims(self.dimension(), psi.len())?;
        Ok(self.combine(|x| psi.dotc(&(x * psi)).re))
    }
}

/// `ΔA(ρ)²·ΔB(ρ)²`, cross-checked against its tensor-power expansion
/// `Tr[(A²⊗B²)ρ^⊗2] + Tr[(A⊗A⊗B⊗B)ρ^⊗4] − Tr[(A²⊗B⊗B)ρ^⊗3] − Tr[(B²⊗A⊗A)ρ^⊗3]`.
pub fn product_functional(a: &Observable, b: &Observable, rho: &DensityMatrix) -> Result<f64> {
    check_dims(a.dimension(), b.dimension())?;
    let direct = variance(a, rho)? * variance(b, rho)?;
    if rho.dimension() <= 6 {
        let tensor = product_functional_tensor(a, b, rho)?;
        if (direct - tensor).abs() > 1e-10 * direct.abs().max(1.0) {
            return Err(Error::Consistency(format!(
                "uncertainty product {direct} disagrees with tensor expansion {tensor}"
            )));
        }
    }
    Ok(direct)
}

/// The tensor-power expansion of the uncertainty product on its own.
pub fn product_functional_tensor(a: &Observable, b: &Observable, rho: &DensityMatrix) -> Result<f64> {
    check_dims(a.dimension(), rho.dimension())?;
    check_dims(b.dimension(), rho.dimension())?;
    crate::symgroup::tensor_side(rho.dimension(), 4)?;
    let (x, y, r) = (a.matrix(), b.matrix(), rho.matrix());
    let kron = |ms: &[&CMatrix]| ms[1..].iter().fold(ms[0].clone(), |acc, m| acc.kronecker(*m));
    let (x2, y2) = (x * x, y * y);
    let t2 = trace_product(&kron(&[&x2, &y2]), &kron(&[r, r]));
    let t4 = trace_product(&kron(&[x, x, y, y]), &kron(&[r, r, r, r]));
    let r3 = kron(&[r, r, r]);
    let ta = trace_product(&kron(&[&x2, y, y]), &r3);
    let tb = trace_product(&kron(&[&y2, x, x]), &r3);
    Ok((t2 + t4 - ta - tb).re)
}

/// Robertson–Schrödinger bound `(⟨{A,B}⟩ − ⟨A⟩⟨B⟩)² + ⟨[A,B]⟩²`.
pub fn lower_bound_l0(a: &Observable, b: &Observable, rho: &DensityMatrix) -> Result<f64> {
    let ma = expectation(a, rho)?;
    let mb = expectation(b, rho)?;
    let cov = if variance(a, rho)? == 0.0 || variance(b, rho)? == 0.0 {
        0.0
    } else {
        expectation(&anticommutator(a, b)?, rho)? - ma * mb
    };
    let comm = expectation(&commutator(a, b)?, rho)?;
    Ok(cov * cov + comm * comm)
}

/// Checks `ΔA²ΔB² ≥ L₀ − 1e−9`, failing with a consistency error otherwise.
pub fn check_robertson_schrodinger(a: &Observable, b: &Observable, rho: &DensityMatrix) -> Result<UncertaintyValues> {
    let values = ObservablePair::new(a, b)?.evaluate(rho)?;
    if values.product < values.lower_bound - 1e-9 {
        return Err(Error::Consistency(format!(
            "uncertainty product {} below lower bound {}",
            values.product, values.lower_bound
        )));
    }
    Ok(values)
}

/// The symmetric trace functionals
/// `Ω = ((TrA)²(TrB)², TrA²(TrB)² + (TrA)²TrB², TrAB·TrA·TrB, TrA²·TrB²,
/// (TrAB)², TrA²B·TrB + TrA·TrAB², TrA²B², TrABAB)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OmegaVector {
    pub d: usize,
    pub values: [f64; 8],
}

impl OmegaVector {
    /// `Ω_j` with `j ∈ 1..=8`.
    pub fn get(&self, j: usize) -> f64 {
        self.values[j - 1]
    }

    pub fn dot(&self, coeffs: &[f64; 8]) -> f64 {
        self.values.iter().zip(coeffs).map(|(o, c)| o * c).sum()
    }

    /// Sign facts that hold for every Hermitian pair.
    pub fn sign_report(&self) -> OmegaSignReport {
        let tol = 1e-10 * self.values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let o = |j: usize| self.get(j);
        OmegaSignReport {
            nonnegative: [1, 2, 4, 5, 7].iter().all(|&j| o(j) >= -tol),
            commutator_order: o(7) >= o(8) - tol,
            anticommutator_sum: o(7) + o(8) >= -tol,
            abab_nonnegative: o(8) >= -tol,
        }
    }
}

/// Which sign relations hold for an [`OmegaVector`].
///
/// The first three always hold (`Tr|[A,B]|² ≥ 0` gives `Ω₇ ≥ Ω₈`,
/// `Tr({A,B}²) ≥ 0` gives `Ω₇ + Ω₈ ≥ 0`); `Ω₈ ≥ 0` can fail, e.g. for two
/// Pauli matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OmegaSignReport {
    pub nonnegative: bool,
    pub commutator_order: bool,
    pub anticommutator_sum: bool,
    pub abab_nonnegative: bool,
}

pub fn omega_vector(a: &Observable, b: &Observable) -> Result<OmegaVector> {
    check_dims(a.dimension(), b.dimension())?;
    let (x, y) = (a.matrix(), b.matrix());
    let (x2, y2, xy) = (x * x, y * y, x * y);
    let ta = x.trace().re;
    let tb = y.trace().re;
    let ta2 = x2.trace().re;
    let tb2 = y2.trace().re;
    let tab = xy.trace().re;
    let ta2b = trace_product(&x2, y).re;
    let tab2 = trace_product(x, &y2).re;
    let ta2b2 = trace_product(&x2, &y2).re;
    let tabab = trace_product(&xy, &xy).re;
    Ok(OmegaVector {
        d: a.dimension(),
        values: [
        ta * ta * tb * tb,
        ta2 * tb * tb + ta * ta * tb2,
        tab * ta * tb,
        ta2 * tb2,
        tab * tab,
        ta2b * tb + ta * tab2,
        ta2b2,
        tabab,
        ],
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceInequality {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `2Ω₃ + dΩ₄ + 4Ω₈ ≥ Ω₂ + dΩ₅`, evaluated and reported without asserting it.
pub fn trace_inequality_pure(a: &Observable, b: &Observable) -> Result<TraceInequality> {
    let o = omega_vector(a, b)?;
    let d = a.dimension() as f64;
    let lhs = 2.0 * o.get(3) + d * o.get(4) + 4.0 * o.get(8);
    let rhs = o.get(2) + d * o.get(5);
    Ok(TraceInequality { lhs, rhs, holds: lhs >= rhs - 1e-9 })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignedValue {
    pub value: f64,
    pub nonnegative: bool,
}

/// Coefficient differences `u − l` (pure states) and product − bound
/// (Hilbert–Schmidt) for one dimension, built once and reused across pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct GapCoefficients {
    pub d: usize,
    pub pure: [f64; 8],
    pub mixed: [f64; 8],
}

impl GapCoefficients {
    pub fn new(d: usize) -> Result<Self> {
        let (u, l) = closedforms::pure_coefficients(d)?;
        let product = closedforms::hs_product_coefficients(d)?;
        let bound = closedforms::hs_bound_coefficients(d)?;
        Ok(GapCoefficients {
            d,
            pure: std::array::from_fn(|j| u.values[j] - l.values[j]),
            mixed: std::array::from_fn(|j| product.values[j] - bound.values[j]),
        })
    }

    fn check(&self, o: &OmegaVector) -> Result<()> {
        if o.d != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: o.d });
        }
        Ok(())
    }

    /// `Σ_j (u_j − l_j) Ω_j`.
    pub fn pure_difference(&self, o: &OmegaVector) -> Result<SignedValue> {
        self.check(o)?;
        Ok(SignedValue::new(o.dot(&self.pure)))
    }

    /// Hilbert–Schmidt average product minus average bound.
    pub fn mixed_difference(&self, o: &OmegaVector) -> Result<SignedValue> {
        self.check(o)?;
        Ok(SignedValue::new(o.dot(&self.mixed)))
    }
}

impl SignedValue {
    fn new(value: f64) -> Self {
        SignedValue { value, nonnegative: value >= -1e-9 }
    }
}

/// Hilbert–Schmidt average uncertainty product minus the average bound,
/// `Σ_j (ω̄_j − β′_j) Ω_j` (low-dimensional vectors for `d = 2, 3`).
pub fn mixed_difference(a: &Observable, b: &Observable) -> Result<SignedValue> {
    GapCoefficients::new(a.dimension())?.mixed_difference(&omega_vector(a, b)?)
}

/// `Σ_j (u_j − l_j) Ω_j`: the average uncertainty product minus the average
/// bound over pure states.
pub fn pure_difference(a: &Observable, b: &Observable) -> Result<SignedValue> {
    GapCoefficients::new(a.dimension())?.pure_difference(&omega_vector(a, b)?)
}

/// Relative deviations from the trace factorizations that hold for
/// asymptotically free pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreenessReport {
    pub d: usize,
    /// `(label, relative deviation)` in a fixed order.
    pub deviations: Vec<(String, f64)>,
}

impl FreenessReport {
    pub fn max(&self) -> f64 {
        self.deviations.iter().map(|(_, v)| *v).fold(0.0, f64::max)
    }
}

/// Compares `Ω₈ ↔ d⁻²Ω₂ − d⁻³Ω₁`, `Ω₃ ↔ d⁻¹Ω₁`, `Ω₅ ↔ d⁻²Ω₁`,
/// `Ω₆ ↔ d⁻¹Ω₂` and `Ω₇ ↔ d⁻¹Ω₄`.
///
/// Each absolute deviation is divided by `d^p·φ(A²)φ(B²)` with
/// `φ = Tr/d` and `p` the number of traces in the relation, so that every
/// entry is scale-free and of order `d⁻¹` for free pairs.
pub fn freeness_diagnostic(a: &Observable, b: &Observable) -> Result<FreenessReport> {
    let o = omega_vector(a, b)?;
    let d = a.dimension();
    let df = d as f64;
    let phi_a2 = (a.matrix() * a.matrix()).trace().re / df;
    let phi_b2 = (b.matrix() * b.matrix()).trace().re / df;
    let scale = (phi_a2 * phi_b2).max(f64::MIN_POSITIVE);
    let rel = |lhs: f64, rhs: f64, traces: i32| (lhs - rhs).abs() / (df.powi(traces) * scale);
    let deviations = vec![
        ("abab".to_string(), rel(o.get(8), o.get(2) / df.powi(2) - o.get(1) / df.powi(3), 1)),
        ("ab_a_b".to_string(), rel(o.get(3), o.get(1) / df, 3)),
        ("ab_ab".to_string(), rel(o.get(5), o.get(1) / df.powi(2), 2)),
        ("aab_b".to_string(), rel(o.get(6), o.get(2) / df, 2)),
        ("aabb".to_string(), rel(o.get(7), o.get(4) / df, 1)),
    ];
    Ok(FreenessReport { d, deviations })
}
