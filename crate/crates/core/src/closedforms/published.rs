//! Coefficient tables as they commonly appear in print, kept only to report
//! how they differ from the values derived by this crate. Nothing in the
//! library computes with them.

use serde::{Deserialize, Serialize};

use super::{
    k_d, lower_bound_coefficients, lowdim_coefficients, n_d, omega_bar, omega_polynomial_forms, pure_coefficients,
    GeneralDim, LowDim, NdExpr,
};
use crate::exact::{frac, q, to_f64, Q};
use crate::Result;

/// One entry whose printed value differs from the derived one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub quantity: String,
    pub printed: f64,
    pub derived: f64,
}

const BETA: [NdExpr<'static>; 8] = [
    NdExpr { poly: &[(1, 1, 4), (-18, 1, 2), (158, 1, 0)], fracs: &[(-50, 0, 1), (792, 0, 2), (-1512, 0, 3)] },
    NdExpr { poly: &[(1, 1, 3), (-20, 1, 1)], fracs: &[(50, 1, 1), (-396, 1, 2), (504, 1, 3)] },
    NdExpr { poly: &[(-2, 1, 5), (38, 1, 3), (-276, 1, 1)], fracs: &[(-792, 1, 2), (2016, 1, 3)] },
    NdExpr { poly: &[(-2, 1, 2), (-20, 1, 0)], fracs: &[(50, 0, 1), (-396, 0, 2), (504, 0, 3)] },
    NdExpr {
        poly: &[(1, 1, 6), (-15, 1, 4), (-2, 1, 3), (60, 1, 2), (34, 1, 1), (-140, 1, 0)],
        fracs: &[(200, 1, 1), (200, 0, 1), (-396, 1, 2), (-792, 0, 2), (1008, 0, 3)],
    },
    NdExpr {
        poly: &[(-2, 1, 3), (4, 1, 2), (34, 1, 1), (-380, 1, 0)],
        fracs: &[(200, 1, 1), (500, 0, 1), (-396, 1, 2), (-1584, 0, 2), (2016, 0, 3)],
    },
    NdExpr {
        poly: &[(-1, 1, 7), (27, 2, 5), (-91, 2, 3), (70, 1, 1)],
        fracs: &[(-50, 1, 1), (396, 1, 2), (-672, 1, 3)],
    },
    NdExpr { poly: &[(-1, 1, 7), (27, 2, 5), (-91, 2, 3), (68, 1, 1)], fracs: &[(50, 1, 1), (-336, 1, 3)] },
];

const BETA_PRIME_7: NdExpr<'static> = NdExpr {
    poly: &[(-1, 1, 7), (14, 1, 5), (-53, 1, 3), (102, 1, 1)],
    fracs: &[(-100, 1, 1), (396, 1, 2), (-672, 1, 3)],
};
const BETA_PRIME_8: NdExpr<'static> =
    NdExpr { poly: &[(-1, 1, 7), (13, 1, 5), (-38, 1, 3), (36, 1, 1)], fracs: &[(100, 1, 1), (-336, 1, 3)] };

const OMEGA_BAR_7: NdExpr<'static> = NdExpr {
    poly: &[(2, 1, 5), (-1, 1, 4), (-28, 1, 3), (9, 1, 2), (136, 1, 1)],
    fracs: &[(100, 1, 1), (-672, 1, 3)],
};

/// Printed constant term of the `ω₇` polynomial, `−N_d·d(d³+4d²−9d−16)`.
pub fn omega7_constant(dim: GeneralDim) -> Q {
    let d = q(dim.get() as i64);
    -(&d * (&d * &d * &d + q(4) * &d * &d - q(9) * &d - q(16))) * n_d(dim)
}

/// Printed `(l₇, l₈) = ((d²+d−2)K_d, −2(2d+5)K_d)`.
pub fn pure_bound_tail(d: usize) -> (Q, Q) {
    let di = d as i64;
    (q(di * di + di - 2) * k_d(d), q(-2 * (2 * di + 5)) * k_d(d))
}

pub fn beta(dim: GeneralDim) -> [Q; 8] {
    std::array::from_fn(|j| BETA[j].eval(dim))
}

pub fn beta_prime(dim: GeneralDim) -> [Q; 8] {
    let mut v = beta(dim);
    v[6] = BETA_PRIME_7.eval(dim);
    v[7] = BETA_PRIME_8.eval(dim);
    v
}

pub fn omega_bar_7(dim: GeneralDim) -> Q {
    OMEGA_BAR_7.eval(dim)
}

/// Printed `Ω₄` coefficient of the three-dimensional product vector.
pub fn dim3_product_omega4() -> Q {
    frac(109, 1032)
}

fn push(out: &mut Vec<Discrepancy>, quantity: String, printed: &Q, derived: &Q) {
    if printed != derived {
        out.push(Discrepancy { quantity, printed: to_f64(printed), derived: to_f64(derived) });
    }
}

/// Every printed entry for dimension `d` that differs from the derived value.
pub fn discrepancies(d: usize) -> Result<Vec<Discrepancy>> {
    let mut out = Vec::new();
    let (_, l) = pure_coefficients(d)?;
    let l = l.exact.expect("pure coefficients are exact");
    let (l7, l8) = pure_bound_tail(d);
    push(&mut out, "l_7".into(), &l7, &l[6]);
    push(&mut out, "l_8".into(), &l8, &l[7]);
    match GeneralDim::new(d) {
        Ok(dim) => {
            let derived = omega_polynomial_forms(dim)[6].coeffs()[0].clone();
            push(&mut out, "omega_7 constant term".into(), &omega7_constant(dim), &derived);
            let bar = omega_bar(dim)?.exact.expect("exact");
            push(&mut out, "omega_bar_7".into(), &omega_bar_7(dim), &bar[6]);
            let (b, bp) = lower_bound_coefficients(dim)?;
            let (b, bp) = (b.exact.expect("exact"), bp.exact.expect("exact"));
            for (j, (printed, derived)) in beta(dim).iter().zip(&b).enumerate() {
                push(&mut out, format!("beta_{}", j + 1), printed, derived);
            }
            let printed = beta_prime(dim);
            for j in 6..8 {
                push(&mut out, format!("beta_prime_{}", j + 1), &printed[j], &bp[j]);
            }
        }
        Err(_) => {
            if d == 3 {
                let product = lowdim_coefficients(LowDim::Three).0.exact.expect("exact");
                push(&mut out, "dim3_product_4".into(), &dim3_product_omega4(), &product[3]);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega7_constant_is_off_by_a_fixed_rational() {
        for d in 4..=9i64 {
            let dim = GeneralDim::new(d as usize).unwrap();
            let derived = omega_polynomial_forms(dim)[6].coeffs()[0].clone();
            assert_eq!(derived - omega7_constant(dim), frac(-1, (d - 2) * (d + 1) * (d + 2)));
        }
    }

    #[test]
    fn omega_bar_7_is_off_by_the_same_rational() {
        for d in 4..=9i64 {
            let dim = GeneralDim::new(d as usize).unwrap();
            let bar = omega_bar(dim).unwrap().exact.unwrap();
            assert_eq!(&bar[6] - omega_bar_7(dim), frac(-1, (d - 2) * (d + 1) * (d + 2)));
        }
    }

    #[test]
    fn printed_bound_tail_shifts_along_commutator_free_direction() {
        // The printed and derived l differ by a multiple of (1, 1) in (Ω₇, Ω₈),
        // which vanishes on any pair with Ω₇ + Ω₈ = 0 such as two Pauli matrices.
        for d in 2..=8 {
            let (_, l) = pure_coefficients(d).unwrap();
            let l = l.exact.unwrap();
            let (l7, l8) = pure_bound_tail(d);
            assert_eq!(&l[6] - l7, &l[7] - l8);
        }
    }

    #[test]
    fn discrepancy_lists() {
        let low: Vec<String> = discrepancies(3).unwrap().into_iter().map(|x| x.quantity).collect();
        assert_eq!(low, ["l_7", "l_8", "dim3_product_4"]);
        let high: Vec<String> = discrepancies(5).unwrap().into_iter().map(|x| x.quantity).collect();
        assert_eq!(
            high,
            ["l_7", "l_8", "omega_7 constant term", "omega_bar_7", "beta_1", "beta_4", "beta_5", "beta_6", "beta_7", "beta_8", "beta_prime_7", "beta_prime_8"]
        );
    }
}
