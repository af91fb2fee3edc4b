//! Compact invariant suite behind `haarmoment selftest`.

use num_complex::Complex64;

use crate::cli::{seeded_pair, Check, Row};
use crate::closedforms::{self, GeneralDim};
use crate::exact::MomentPoint;
use crate::functionals::{self, omega_vector, Observable};
use crate::montecarlo;
use crate::sampling::{self, SeededStream};
use crate::symgroup::{self, central_projectors, Partition, Permutation};
use crate::twirl::{self, Spectrum};
use crate::Result;

pub struct Outcome {
    pub checks: Vec<Check>,
    pub rows: Vec<Row>,
}

fn check(checks: &mut Vec<Check>, name: &str, passed: bool, detail: impl Into<String>) {
    checks.push(Check { name: name.into(), passed, detail: detail.into() });
}

fn max_abs(m: &crate::CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z: &Complex64| acc.max(z.norm()))
}

/// Exact and structural checks, then Monte-Carlo rows at `n` samples each.
/// Every stream derives from `seed`, so results do not depend on `threads`.
pub fn run(seed: u64, n: u64, threads: usize) -> Result<Outcome> {
    let mut checks = Vec::new();

    // Projectors: idempotent, orthogonal, complete.
    for (k, d) in [(2, 2), (3, 2), (3, 3), (4, 2)] {
        let projectors = central_projectors(k, d)?;
        let side = d.pow(k as u32);
        let mut sum = crate::CMatrix::zeros(side, side);
        let mut worst = 0.0f64;
        for (i, p) in projectors.iter().enumerate() {
            worst = worst.max(max_abs(&(p.matrix() * p.matrix() - p.matrix())));
            for q in &projectors[i + 1..] {
                worst = worst.max(max_abs(&(p.matrix() * q.matrix())));
            }
            sum += p.matrix();
        }
        worst = worst.max(max_abs(&(sum - crate::CMatrix::identity(side, side))));
        check(&mut checks, &format!("projectors_k{k}_d{d}"), worst < 1e-12, format!("max residual {worst:.2e}"));
    }

    // Weingarten orthogonality: Σ_σ Wg(πσ⁻¹) d^{#cycles(σ)} = δ_{π,e}.
    for (k, d) in [(2, 2), (3, 3), (4, 4), (4, 5)] {
        let perms = Permutation::all(k);
        let mut ok = true;
        for pi in &perms {
            let mut total = crate::exact::q(0);
            for sigma in &perms {
                let w = symgroup::weingarten(&pi.compose(&sigma.inverse())?, d)?;
                total += w * crate::exact::q(d as i64).pow(sigma.cycle_count() as i32);
            }
            ok &= total == crate::exact::q(i64::from(pi.is_identity()));
        }
        check(&mut checks, &format!("weingarten_inverse_k{k}_d{d}"), ok, "exact rational identity");
    }

    // Twirl routes agree for a seeded spectrum.
    for (k, d) in [(2, 3), (3, 2), (4, 2)] {
        let mut s = SeededStream::new(seed, 7 << 40);
        let spectrum = sampling::random_spectrum(d, &mut s);
        let rho = spectrum.to_matrix();
        let mut m = rho.clone();
        for _ in 1..k {
            m = m.kronecker(&rho);
        }
        let a = twirl::twirl_projector(&spectrum, k)?;
        let b = twirl::twirl_weingarten(&m, k, d)?;
        let diff = max_abs(&(a - b));
        check(&mut checks, &format!("twirl_routes_k{k}_d{d}"), diff < twirl::ROUTE_TOLERANCE, format!("{diff:.2e}"));
    }

    // Closed-form families, exact arithmetic.
    for d in 4..=7 {
        let dim = GeneralDim::new(d)?;
        check(
            &mut checks,
            &format!("delta_vs_polynomial_d{d}"),
            closedforms::omega_polynomial_forms(dim) == closedforms::omega_delta_forms(d)?,
            "",
        );
        let bar = closedforms::omega_bar(dim)?;
        check(
            &mut checks,
            &format!("omega_bar_by_moments_d{d}"),
            Some(&closedforms::omega_bar_by_moments(d)?) == bar.exact.as_ref(),
            "",
        );
        let (beta, beta_prime) = closedforms::lower_bound_coefficients(dim)?;
        let same = beta.exact.as_ref().zip(beta_prime.exact.as_ref()).is_some_and(|(x, y)| x[..6] == y[..6]);
        check(&mut checks, &format!("beta_prime_head_d{d}"), same, "β′_j = β_j for j ≤ 6");
    }
    for d in 2..=7 {
        let (u, _) = closedforms::pure_coefficients(d)?;
        check(
            &mut checks,
            &format!("pure_limit_d{d}"),
            Some(&closedforms::omega_at(d, &MomentPoint::pure())?) == u.exact.as_ref(),
            "ω_j at t = 1 equals u_j",
        );
    }

    // Pauli reference values.
    let (x, y) = (Observable::pauli_x(), Observable::pauli_y());
    let omega = omega_vector(&x, &y)?;
    check(
        &mut checks,
        "pauli_omega",
        omega.values == [0.0, 0.0, 0.0, 4.0, 0.0, 0.0, 2.0, -2.0],
        format!("{:?}", omega.values),
    );
    let (u, _) = closedforms::pure_coefficients(2)?;
    let pauli_pure = closedforms::assemble_average(&u, &omega)?;
    check(&mut checks, "pauli_pure_average", (pauli_pure - 0.4).abs() < 1e-14, format!("{pauli_pure}"));

    // Random pairs: sign facts and the pure-gap identity.
    let mut s = SeededStream::new(seed, 8 << 40);
    let mut sign_ok = true;
    let mut gap_ok = true;
    for d in 2..=5 {
        for _ in 0..50 {
            let a = sampling::gue(d, &mut s);
            let b = sampling::gue(d, &mut s);
            let o = omega_vector(&a, &b)?;
            let signs = o.sign_report();
            sign_ok &= signs.nonnegative && signs.commutator_order && signs.anticommutator_sum;
            let gap = functionals::pure_difference(&a, &b)?.value;
            let closed = closedforms::pure_gap_combination(&o);
            gap_ok &= (gap - closed).abs() <= 1e-10 * (1.0 + closed.abs()) && gap >= -1e-10;
        }
    }
    check(&mut checks, "omega_sign_facts", sign_ok, "200 GUE pairs");
    check(&mut checks, "pure_gap_identity", gap_ok, "200 GUE pairs");

    // Dimension bounds on partitions.
    let low = Partition::new(vec![1, 1, 1])?;
    check(&mut checks, "unitary_dim_vanishes", low.dim_unitary(2) == 0, "λ = (1,1,1), d = 2");

    // Monte-Carlo rows.
    let mut rows = Vec::new();
    let cases: [(usize, (Observable, Observable)); 2] =
        [(2, (Observable::pauli_x(), Observable::pauli_y())), (4, seeded_pair(4, seed))];
    for (d, (a, b)) in cases {
        let mut spectrum_stream = SeededStream::new(seed, 1 << 48);
        let spectrum = if d == 2 { Spectrum::uniform(2)? } else { sampling::random_spectrum(d, &mut spectrum_stream) };
        let stream = SeededStream::new(seed, (d as u64) << 50);
        for r in montecarlo::compare_all(&a, &b, &spectrum, n, &stream, threads)? {
            rows.push(Row::estimate(format!("{}@d={d}", r.quantity), &r.estimate));
        }
    }
    Ok(Outcome { checks, rows })
}
