//! Acceptance run: one PASS/FAIL line per criterion.

use std::time::{Duration, Instant};

use haarmoment::cli::{self, seeded_pair, Command, RunArgs};
use haarmoment::closedforms::{self, expansion, GeneralDim};
use haarmoment::exact::{frac, to_f64, MomentPoint, Q};
use haarmoment::functionals::{freeness_diagnostic, GapCoefficients, omega_vector, DensityMatrix, Observable, ObservablePair};
use haarmoment::montecarlo::{self, Ensemble, Sample};
use haarmoment::sampling::{self, SeededStream};
use haarmoment::symgroup::central_projectors;
use haarmoment::twirl;
use haarmoment::{CMatrix, Result};

const SEED: u64 = 42;

fn threads() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { passed, detail: detail.into() })
}

fn pauli_exact() -> Result<Outcome> {
    let (x, y) = (Observable::pauli_x(), Observable::pauli_y());
    let omega = omega_vector(&x, &y)?;
    let (u, l) = closedforms::pure_coefficients(2)?;
    let product = closedforms::assemble_average(&u, &omega)?;
    let bound = closedforms::assemble_average(&l, &omega)?;
    let exact_ok = (product - 0.4).abs() <= 1e-14 && (bound - 0.4).abs() <= 1e-14;
    let pair = ObservablePair::new(&x, &y)?;
    let [p, b] = montecarlo::estimate_many(&Ensemble::Pure(2), 100_000, &SeededStream::new(SEED, 1), threads(), |s| {
        let v = s.uncertainty(&pair)?;
        Ok([v.product, v.lower_bound])
    })?;
    let (p, b) = (p.with_target(0.4), b.with_target(0.4));
    outcome(
        exact_ok && p.passes() && b.passes(),
        format!("product {product:.16}, L0 {bound:.16}; MC z = {:.2}, {:.2}", p.z.unwrap(), b.z.unwrap()),
    )
}

fn projector_algebra() -> Result<Outcome> {
    let mut worst = 0.0f64;
    for k in 1..=4 {
        for d in 2..=6 {
            let projectors = central_projectors(k, d)?;
            let side = d.pow(k as u32);
            let mut sum = CMatrix::zeros(side, side);
            for (i, p) in projectors.iter().enumerate() {
                worst = worst.max(max_abs(&(p.apply_left(p.matrix()) - p.matrix())));
                for (j, other) in projectors.iter().enumerate() {
                    if i != j {
                        worst = worst.max(max_abs(&p.apply_left(other.matrix())));
                    }
                }
                let trace = p.matrix().trace().re;
                worst = worst.max((trace - p.rank() as f64).abs());
                sum += p.matrix();
            }
            worst = worst.max(max_abs(&(sum - CMatrix::identity(side, side))));
        }
    }
    outcome(worst <= 1e-10, format!("max residual {worst:.2e}"))
}

fn twirl_routes() -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut s = SeededStream::new(SEED, 3);
    for d in 2..=5 {
        for _ in 0..20 {
            let spectrum = sampling::random_spectrum(d, &mut s);
            let rho = spectrum.to_matrix();
            let mut m = rho.clone();
            for k in 2..=4 {
                m = m.kronecker(&rho);
                let a = twirl::twirl_projector(&spectrum, k)?;
                let b = twirl::twirl_weingarten(&m, k, d)?;
                worst = worst.max(max_abs(&(a - b)));
            }
        }
    }
    outcome(worst <= 1e-10, format!("max route difference {worst:.2e}"))
}

fn power_sums(rho: &DensityMatrix) -> [f64; 4] {
    let m = rho.matrix();
    let m2 = m * m;
    let t2 = m2.trace().re;
    let t3 = (&m2 * m).trace().re;
    let t4 = (&m2 * &m2).trace().re;
    [t2, t3, t4, t2 * t2]
}

fn hs_moments() -> Result<Outcome> {
    let tables: [(usize, [Q; 4]); 2] = [
        (2, [frac(4, 5), frac(7, 10), frac(22, 35), frac(23, 35)]),
        (3, [frac(3, 5), frac(23, 55), frac(17, 55), frac(61, 165)]),
    ];
    let mut ok = true;
    for (d, table) in &tables {
        let m = closedforms::hs_moments(*d)?;
        let got = [m.t2, m.t3, m.t4, m.t2_sq];
        ok &= got == *table;
        ok &= got.iter().zip(table).all(|(g, t)| (to_f64(g) - to_f64(t)).abs() <= 1e-14);
    }
    let mut worst_z = 0.0f64;
    for d in 2..=4 {
        let targets = closedforms::hs_moments(d)?.to_f64();
        let est = montecarlo::estimate_many(&Ensemble::HilbertSchmidt(d), 100_000, &SeededStream::new(SEED, 4 + d as u64), threads(), |s: &Sample| {
            Ok(power_sums(&s.density()?))
        })?;
        for (e, t) in est.iter().zip(targets) {
            let e = e.with_target(t);
            ok &= e.passes();
            worst_z = worst_z.max(e.z.unwrap().abs());
        }
    }
    outcome(ok, format!("d=2,3 tables exact; max |z| {worst_z:.2}"))
}

fn cross_identities() -> Result<Outcome> {
    let mut ok = true;
    let mut notes = Vec::new();
    let product_forms_ok = |d: usize| -> Result<[Q; 8]> {
        Ok(expansion::evaluate_all(&expansion::expand(&expansion::uncertainty_product(), d)?, &closedforms::hs_moments(d)?.point()))
    };
    for d in 4..=6 {
        let dim = GeneralDim::new(d)?;
        let (u, _) = closedforms::pure_coefficients(d)?;
        let at_pure = closedforms::omega_at(d, &MomentPoint::pure())?;
        ok &= at_pure.iter().zip(&u.values).all(|(a, b)| (to_f64(a) - b).abs() <= 1e-12);
        let bar = closedforms::omega_bar(dim)?;
        let substituted = product_forms_ok(d)?;
        ok &= substituted.iter().zip(&bar.values).all(|(a, b)| (to_f64(a) - b).abs() <= 1e-12);
        let (beta, beta_prime) = closedforms::lower_bound_coefficients(dim)?;
        ok &= (0..6).all(|j| (beta.values[j] - beta_prime.values[j]).abs() <= 1e-12);
        let poly = closedforms::omega_polynomial_forms(dim);
        let delta = closedforms::omega_delta_forms(d)?;
        let mut s = SeededStream::new(SEED, 5 + d as u64);
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let point = sampling::random_spectrum(d, &mut s).moments();
            for (p, q) in poly.iter().zip(&delta) {
                worst = worst.max((p.eval(&point) - q.eval(&point)).abs());
            }
        }
        ok &= worst <= 1e-12;
        notes.push(format!("d={d} Δ-vs-poly {worst:.1e}"));
    }
    // d = 2, 3: product and bound vectors re-assembled from Δ averages at HS moments.
    for d in 2..=3 {
        let moments = closedforms::hs_moments(d)?.point();
        let product = expansion::evaluate_all(&expansion::expand(&expansion::uncertainty_product(), d)?, &moments);
        let bound = expansion::evaluate_all(&expansion::expand(&expansion::robertson_schrodinger_bound(), d)?, &moments);
        ok &= Some(&product) == closedforms::hs_product_coefficients(d)?.exact.as_ref();
        ok &= Some(&bound) == closedforms::hs_bound_coefficients(d)?.exact.as_ref();
    }
    outcome(ok, notes.join(", "))
}

fn ensemble_mc() -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    let mut count = 0;
    for d in 2..=5 {
        for pair_seed in 0..3u64 {
            let (a, b) = seeded_pair(d, 1000 * SEED + pair_seed);
            for spectrum_seed in 0..2u64 {
                let spectrum = sampling::random_spectrum(d, &mut SeededStream::new(SEED, 100 + spectrum_seed));
                let stream = SeededStream::new(SEED, (d as u64) << 50 | pair_seed << 44 | spectrum_seed << 42);
                for row in montecarlo::compare_all(&a, &b, &spectrum, 200_000, &stream, threads())? {
                    count += 1;
                    let z = row.estimate.z.unwrap().abs();
                    worst = worst.max(z);
                    if !row.passes() {
                        failures.push(format!("{}@d={d},pair={pair_seed},spec={spectrum_seed} z={z:.2}", row.quantity));
                    }
                }
            }
        }
    }
    outcome(failures.is_empty(), format!("{count} comparisons, max |z| {worst:.2}{}", failures.iter().map(|f| format!("; {f}")).collect::<String>()))
}

fn robertson_schrodinger() -> Result<Outcome> {
    let mut s = SeededStream::new(SEED, 6);
    let mut violations = 0;
    for i in 0..10_000 {
        let d = 2 + i % 5;
        let a = sampling::gue(d, &mut s);
        let b = sampling::gue(d, &mut s);
        let rho = sampling::hs_density(d, &mut s);
        let v = ObservablePair::new(&a, &b)?.evaluate(&rho)?;
        if v.product < v.lower_bound - 1e-9 {
            violations += 1;
        }
    }
    let pair = ObservablePair::new(&Observable::pauli_x(), &Observable::pauli_y())?;
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let psi = sampling::haar_pure_state(2, &mut s);
        let v = pair.evaluate_pure(&psi)?;
        worst = worst.max((v.product - v.lower_bound).abs());
    }
    outcome(violations == 0 && worst <= 1e-10, format!("{violations} violations; Pauli max residual {worst:.2e}"))
}

fn derived_inequalities() -> Result<Outcome> {
    let mut s = SeededStream::new(SEED, 7);
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for d in 2..=6 {
        let gaps = GapCoefficients::new(d)?;
        for _ in 0..10_000 {
            let a = sampling::gue(d, &mut s);
            let b = sampling::gue(d, &mut s);
            let omega = omega_vector(&a, &b)?;
            let pure = gaps.pure_difference(&omega)?.value;
            let mixed = gaps.mixed_difference(&omega)?.value;
            worst = worst.min(pure).min(mixed);
            violations += usize::from(pure < -1e-9) + usize::from(mixed < -1e-9);
        }
    }
    outcome(violations == 0, format!("{violations} violations; min margin {worst:.2e}"))
}

fn concentration() -> Result<Outcome> {
    let mut reports = Vec::new();
    for d in [2, 4, 6] {
        let (a, b) = seeded_pair(d, SEED);
        let spectrum = sampling::random_spectrum(d, &mut SeededStream::new(SEED, 200 + d as u64));
        let eps = montecarlo::default_epsilons(&a, &b);
        reports.push(montecarlo::concentration_iso(&spectrum, &a, &b, 20_000, &eps, &SeededStream::new(SEED, 300 + d as u64), threads())?);
    }
    for d in 2..=6 {
        let (a, b) = seeded_pair(d, SEED);
        let eps = montecarlo::default_epsilons(&a, &b);
        reports.push(montecarlo::concentration_pure(&a, &b, 20_000, &eps, &SeededStream::new(SEED, 400 + d as u64), threads())?);
    }
    let failing: Vec<String> = reports.iter().filter(|r| !r.holds()).map(|r| format!("{}@d={}", r.ensemble, r.d)).collect();
    outcome(failing.is_empty(), format!("{} tail curves; failing: {failing:?}", reports.len()))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn freeness_trend() -> Result<Outcome> {
    let medians = |d: usize| -> Result<Vec<(String, f64)>> {
        let mut s = SeededStream::new(SEED, 500 + d as u64);
        let reports: Vec<_> = (0..20)
            .map(|_| {
                let a = sampling::gue(d, &mut s);
                let b = sampling::gue(d, &mut s);
                freeness_diagnostic(&a, &b)
            })
            .collect::<Result<_>>()?;
        Ok((0..reports[0].deviations.len())
            .map(|i| (reports[0].deviations[i].0.clone(), median(reports.iter().map(|r| r.deviations[i].1).collect())))
            .collect())
    };
    let small = medians(16)?;
    let large = medians(64)?;
    let ok = small.iter().zip(&large).all(|(s, l)| l.1 < s.1);
    let detail: Vec<String> = small.iter().zip(&large).map(|(s, l)| format!("{} {:.1e}→{:.1e}", s.0, s.1, l.1)).collect();
    outcome(ok, detail.join(", "))
}

fn reproducibility() -> Result<Outcome> {
    let run = |threads: usize| -> Result<Vec<u64>> {
        let args = RunArgs {
            d: "2".parse().unwrap(),
            n: None,
            seed: Some(42),
            threads: Some(threads),
            pair: None,
            spectrum: "random-simplex".into(),
            ensemble: cli::EnsembleKind::Iso,
            format: cli::Format::Json,
            out: None,
            sweep: false,
        };
        let (report, _) = cli::execute(&Command::Selftest(args), None).map_err(|e| haarmoment::Error::Consistency(e.to_string()))?;
        Ok(report.rows.iter().filter_map(|r| r.mc_mean).map(f64::to_bits).collect())
    };
    let one = run(1)?;
    let eight = run(8)?;
    outcome(!one.is_empty() && one == eight, format!("{} estimate means compared", one.len()))
}

type Criterion = (&'static str, fn() -> Result<Outcome>, Option<Duration>);

fn main() {
    let criteria: [Criterion; 11] = [
        ("pauli exact value 2/5", pauli_exact, Some(Duration::from_secs(10))),
        ("projector algebra k≤4, d=2..6", projector_algebra, Some(Duration::from_secs(60))),
        ("twirl route agreement", twirl_routes, None),
        ("HS moment formulas", hs_moments, None),
        ("coefficient cross-identities", cross_identities, None),
        ("ensemble-average MC validation", ensemble_mc, Some(Duration::from_secs(600))),
        ("Robertson–Schrödinger inequality", robertson_schrodinger, None),
        ("derived trace inequalities", derived_inequalities, None),
        ("concentration validity", concentration, None),
        ("freeness trend d=16 → 64", freeness_trend, None),
        ("thread-count reproducibility", reproducibility, None),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let (passed, detail) = match result {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let in_time = limit.map_or(true, |l| elapsed <= l);
        let passed = passed && in_time;
        if !passed {
            failed += 1;
        }
        let limit_note = limit.map(|l| format!(" (limit {}s)", l.as_secs())).unwrap_or_default();
        println!(
            "criterion {:>2} {} {name}: {detail} [{:.2}s{limit_note}]",
            i + 1,
            if passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
