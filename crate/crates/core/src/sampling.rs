//! Seeded random-matrix generators: complex Ginibre matrices, Haar
//! unitaries and pure states, Hilbert–Schmidt and isospectral density
//! matrices, and GUE observables.
//!
//! Every generator draws from a [`SeededStream`], a ChaCha20 keystream keyed
//! by `seed` and positioned on stream `stream_id`. Distinct stream ids give
//! independent sequences, so parallel workers never share generator state.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::functionals::{DensityMatrix, Observable};
use crate::twirl::Spectrum;
use crate::CMatrix;

/// Deterministic random stream identified by `(seed, stream_id)`.
#[derive(Clone, Debug)]
pub struct SeededStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha20Rng,
}

impl SeededStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        SeededStream { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Fresh stream with the same seed and stream id `stream_id + offset`.
    pub fn derive(&self, offset: u64) -> SeededStream {
        SeededStream::new(self.seed, self.stream_id.wrapping_add(offset))
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Complex Gaussian with `E|z|² = 1`.
    pub fn complex_normal(&mut self) -> Complex64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let re = self.standard_normal();
        let im = self.standard_normal();
        Complex64::new(re * s, im * s)
    }

    pub fn exponential(&mut self) -> f64 {
        self.rng.sample(Exp1)
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random()
    }
}

/// `d × d` matrix of i.i.d. standard complex Gaussians.
pub fn ginibre(d: usize, s: &mut SeededStream) -> CMatrix {
    ginibre_rect(d, d, s)
}

fn ginibre_rect(rows: usize, cols: usize, s: &mut SeededStream) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = s.complex_normal();
        }
    }
    m
}

/// Haar unitary: `Q·diag(r_ii/|r_ii|)` from the QR factorization of a Ginibre matrix.
pub fn haar_unitary(d: usize, s: &mut SeededStream) -> CMatrix {
    let qr = ginibre(d, s).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let rjj = r[(j, j)];
        let norm = rjj.norm();
        let phase = if norm > 0.0 { rjj / norm } else { Complex64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Haar-random unit vector.
pub fn haar_pure_state(d: usize, s: &mut SeededStream) -> DVector<Complex64> {
    let v = DVector::from_iterator(d, (0..d).map(|_| s.complex_normal()));
    let n = v.norm();
    v / Complex64::new(n, 0.0)
}

/// Hilbert–Schmidt random density matrix `GG†/Tr(GG†)`.
pub fn hs_density(d: usize, s: &mut SeededStream) -> DensityMatrix {
    let g = ginibre(d, s);
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    DensityMatrix::from_matrix_unchecked(w / Complex64::new(tr, 0.0))
}

/// Hilbert–Schmidt density matrix as the reduced state of a Haar pure state on `ℂ^d ⊗ ℂ^d`.
pub fn hs_density_partial_trace(d: usize, s: &mut SeededStream) -> DensityMatrix {
    let psi = haar_pure_state(d * d, s);
    // Amplitudes ψ_{(i,j)} with i the kept factor form a d×d matrix M; ρ = MM†.
    let m = CMatrix::from_fn(d, d, |i, j| psi[i * d + j]);
    let rho = &m * m.adjoint();
    let rho = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    let tr = rho.trace().re;
    DensityMatrix::from_matrix_unchecked(rho / Complex64::new(tr, 0.0))
}

/// `UΛU†` with `U` Haar-distributed.
pub fn isospectral(spectrum: &Spectrum, s: &mut SeededStream) -> DensityMatrix {
    let d = spectrum.dimension();
    let u = haar_unitary(d, s);
    let mut scaled = u.clone();
    for (j, &v) in spectrum.values().iter().enumerate() {
        for i in 0..d {
            scaled[(i, j)] *= v;
        }
    }
    let rho = &scaled * u.adjoint();
    DensityMatrix::from_matrix_unchecked((&rho + rho.adjoint()) * Complex64::new(0.5, 0.0))
}

/// GUE observable `(G + G†)/√(2d)`: off-diagonal entries have `E|A_ij|² = 1/d`,
/// so `Tr(A²)/d → 1` as `d` grows.
pub fn gue(d: usize, s: &mut SeededStream) -> Observable {
    let g = ginibre(d, s);
    let scale = 1.0 / (2.0 * d as f64).sqrt();
    Observable::from_hermitian_unchecked((&g + g.adjoint()) * Complex64::new(scale, 0.0))
}

/// Uniformly random point of the probability simplex (flat Dirichlet).
pub fn random_spectrum(d: usize, s: &mut SeededStream) -> Spectrum {
    let raw: Vec<f64> = (0..d).map(|_| s.exponential()).collect();
    let total: f64 = raw.iter().sum();
    let mut values: Vec<f64> = raw.iter().map(|x| x / total).collect();
    // Absorb rounding so the entries sum to one within validation tolerance.
    let drift: f64 = 1.0 - values.iter().sum::<f64>();
    values[0] += drift;
    Spectrum::new(values).expect("normalized exponentials form a valid spectrum")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs(m: &CMatrix) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<f64> = { let mut s = SeededStream::new(7, 3); (0..8).map(|_| s.standard_normal()).collect() };
        let b: Vec<f64> = { let mut s = SeededStream::new(7, 3); (0..8).map(|_| s.standard_normal()).collect() };
        let c: Vec<f64> = { let mut s = SeededStream::new(7, 4); (0..8).map(|_| s.standard_normal()).collect() };
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(SeededStream::new(7, 3).derive(1).stream_id(), 4);
    }

    #[test]
    fn ginibre_entry_moments() {
        let mut s = SeededStream::new(1, 0);
        let n = 100_000;
        let (mut sum, mut sq) = (Complex64::new(0.0, 0.0), 0.0);
        for _ in 0..n {
            let z = ginibre(1, &mut s)[(0, 0)];
            sum += z;
            sq += z.norm_sqr();
        }
        let bound = 5.0 / (n as f64).sqrt();
        assert!((sum / n as f64).norm() < bound);
        assert!((sq / n as f64 - 1.0).abs() < bound);
    }

    #[test]
    fn haar_unitary_is_unitary_with_haar_marginals() {
        let mut s = SeededStream::new(2, 0);
        let d = 3;
        let n = 100_000;
        let (mut m1, mut m2, mut m2sq) = (Complex64::new(0.0, 0.0), 0.0, 0.0);
        for _ in 0..n {
            let u = haar_unitary(d, &mut s);
            assert!(max_abs(&(u.adjoint() * &u - CMatrix::identity(d, d))) < 1e-12);
            m1 += u[(0, 0)];
            let p = u[(0, 0)].norm_sqr();
            m2 += p;
            m2sq += p * p;
        }
        let nf = n as f64;
        let mean = m2 / nf;
        let se = ((m2sq / nf - mean * mean) / nf).sqrt();
        assert!((mean - 1.0 / d as f64).abs() < 5.0 * se);
        // |U₁₁| has variance 1/d; its mean is zero.
        assert!((m1 / nf).norm() < 5.0 / (d as f64 * nf).sqrt());
    }

    #[test]
    fn pure_states_are_normalized() {
        let mut s = SeededStream::new(3, 0);
        for _ in 0..100 {
            assert!((haar_pure_state(5, &mut s).norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn pure_state_second_moment_matches_symmetric_projector() {
        let d = 2;
        let n = 50_000;
        let mut s = SeededStream::new(4, 0);
        let side = d * d;
        let mut sum = CMatrix::zeros(side, side);
        let mut sum_sq = nalgebra::DMatrix::<f64>::zeros(side, side);
        for _ in 0..n {
            let psi = haar_pure_state(d, &mut s);
            let p = &psi * psi.adjoint();
            let t = p.kronecker(&p);
            sum_sq += t.map(|z| z.re * z.re);
            sum += t;
        }
        let exact = crate::twirl::pure_moment(2, d).unwrap();
        let nf = n as f64;
        for i in 0..side {
            for j in 0..side {
                let mean = sum[(i, j)].re / nf;
                let se = ((sum_sq[(i, j)] / nf - mean * mean) / nf).sqrt().max(1e-12);
                assert!((mean - exact[(i, j)].re).abs() <= 5.0 * se + 1e-12);
            }
        }
    }

    #[test]
    fn hs_density_is_a_state() {
        let mut s = SeededStream::new(5, 0);
        for _ in 0..50 {
            let rho = hs_density(4, &mut s);
            assert!(DensityMatrix::new(rho.matrix().clone()).is_ok());
            let rho = hs_density_partial_trace(3, &mut s);
            assert!(DensityMatrix::new(rho.matrix().clone()).is_ok());
        }
    }

    #[test]
    fn hs_routes_agree_in_purity_distribution() {
        let d = 3;
        let n = 40_000;
        let stats = |f: &dyn Fn(&mut SeededStream) -> DensityMatrix, seed| {
            let mut s = SeededStream::new(seed, 0);
            let xs: Vec<f64> = (0..n).map(|_| {
                let r = f(&mut s);
                crate::functionals::trace_product(r.matrix(), r.matrix()).re
            }).collect();
            let mean = xs.iter().sum::<f64>() / n as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
            (mean, var)
        };
        let (m1, v1) = stats(&|s| hs_density(d, s), 6);
        let (m2, v2) = stats(&|s| hs_density_partial_trace(d, s), 7);
        let se = ((v1 + v2) / n as f64).sqrt();
        assert!((m1 - m2).abs() < 5.0 * se);
        assert!((m1 - 0.6).abs() < 5.0 * (v1 / n as f64).sqrt());
    }

    #[test]
    fn isospectral_preserves_eigenvalues() {
        let mut s = SeededStream::new(8, 0);
        let spectrum = Spectrum::new(vec![0.5, 0.3, 0.15, 0.05]).unwrap();
        for _ in 0..50 {
            let rho = isospectral(&spectrum, &mut s);
            let mut ev: Vec<f64> = rho.matrix().clone().symmetric_eigenvalues().iter().copied().collect();
            ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
            for (a, b) in ev.iter().zip(spectrum.values()) {
                assert!((a - b).abs() < 1e-10);
            }
        }
        let mixed = isospectral(&Spectrum::uniform(3).unwrap(), &mut s);
        assert!(max_abs(&(mixed.matrix() - CMatrix::identity(3, 3) / Complex64::new(3.0, 0.0))) < 1e-14);
    }

    #[test]
    fn gue_normalization() {
        let mut s = SeededStream::new(9, 0);
        let mut ratios: Vec<f64> = (0..20)
            .map(|_| {
                let a = gue(64, &mut s);
                crate::functionals::trace_product(a.matrix(), a.matrix()).re / 64.0
            })
            .collect();
        ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ratios[10] - 1.0).abs() < 0.1);
        let a = gue(5, &mut s);
        assert_eq!(a.matrix(), &a.matrix().adjoint());
    }

    #[test]
    fn random_spectra_are_valid() {
        let mut s = SeededStream::new(10, 0);
        for d in 1..6 {
            assert_eq!(random_spectrum(d, &mut s).dimension(), d);
        }
    }
}
