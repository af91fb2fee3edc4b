//! Mechanical expansion of degree-(2,2) state functionals into the `Ω_j`
//! basis.
//!
//! A functional such as `⟨A²⟩⟨B²⟩` is a sum of terms
//! `Tr[(X₁ ⊗ … ⊗ X_k) ρ^⊗k]` whose factors are words in `A` and `B`.
//! Averaging `ρ = UΛU†` replaces `ρ^⊗k` by `Σ_λ Δ_λ C_λ`, and
//! `Tr[(X₁⊗…⊗X_k) P(π)]` is a product of traces of the words obtained by
//! following the cycles of `π⁻¹`. Collecting trace monomials yields one
//! moment form per `Ω_j`.

use std::collections::BTreeMap;

use crate::exact::{frac, q, MomentForm, Q};
use crate::symgroup::{central_idempotent, Partition};
use crate::twirl::delta_forms;
use crate::{Error, Result};

/// Linear combination of words in the letters `A` and `B`.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorSum {
    terms: Vec<(String, Q)>,
}

impl OperatorSum {
    /// A single word such as `"AAB"`.
    pub fn word(w: &str) -> Self {
        OperatorSum { terms: vec![(w.to_string(), q(1))] }
    }

    pub fn combination(terms: &[(&str, Q)]) -> Self {
        OperatorSum { terms: terms.iter().map(|(w, c)| (w.to_string(), c.clone())).collect() }
    }
}

/// `coefficient · Tr[(X₁ ⊗ … ⊗ X_k) ρ^⊗k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorTerm {
    pub coefficient: Q,
    pub factors: Vec<OperatorSum>,
}

impl TensorTerm {
    pub fn words(coefficient: Q, words: &[&str]) -> Self {
        TensorTerm { coefficient, factors: words.iter().map(|w| OperatorSum::word(w)).collect() }
    }
}

/// `ΔA²·ΔB² = ⟨A²⟩⟨B²⟩ − ⟨A²⟩⟨B⟩² − ⟨A⟩²⟨B²⟩ + ⟨A⟩²⟨B⟩²`.
pub fn uncertainty_product() -> Vec<TensorTerm> {
    vec![
        TensorTerm::words(q(1), &["AA", "BB"]),
        TensorTerm::words(q(-1), &["AA", "B", "B"]),
        TensorTerm::words(q(-1), &["BB", "A", "A"]),
        TensorTerm::words(q(1), &["A", "A", "B", "B"]),
    ]
}

/// `(⟨{A,B}⟩ − ⟨A⟩⟨B⟩)²` with `{A,B} = (AB+BA)/2`.
pub fn covariance_squared() -> Vec<TensorTerm> {
    let anti = OperatorSum::combination(&[("AB", frac(1, 2)), ("BA", frac(1, 2))]);
    vec![
        TensorTerm { coefficient: q(1), factors: vec![anti.clone(), anti.clone()] },
        TensorTerm {
            coefficient: q(-2),
            factors: vec![anti, OperatorSum::word("A"), OperatorSum::word("B")],
        },
        TensorTerm::words(q(1), &["A", "A", "B", "B"]),
    ]
}

/// `⟨[A,B]⟩²` with `[A,B] = (AB−BA)/(2i)`, i.e. `−¼⟨AB−BA⟩²`.
pub fn commutator_squared() -> Vec<TensorTerm> {
    let comm = OperatorSum::combination(&[("AB", q(1)), ("BA", q(-1))]);
    vec![TensorTerm { coefficient: frac(-1, 4), factors: vec![comm.clone(), comm] }]
}

/// Robertson–Schrödinger bound `L₀ = cov² + comm²`.
pub fn robertson_schrodinger_bound() -> Vec<TensorTerm> {
    let mut terms = covariance_squared();
    terms.extend(commutator_squared());
    terms
}

/// Lexicographically smallest rotation of the word or of its reversal.
/// Traces of words in Hermitian letters are invariant under both up to
/// complex conjugation, and all traces met here are real.
fn canonical_cyclic(word: &str) -> String {
    let chars: Vec<char> = word.chars().collect();
    let n = chars.len();
    let mut best: Option<String> = None;
    for seq in [chars.clone(), chars.iter().rev().copied().collect()] {
        for r in 0..n {
            let s: String = seq[r..].iter().chain(&seq[..r]).collect();
            if best.as_ref().map_or(true, |b| s < *b) {
                best = Some(s);
            }
        }
    }
    best.unwrap_or_default()
}

// Trace monomials in {A,A,B,B}; paired entries are the two halves of Ω₂ and Ω₆.
const MONOMIALS: [(&[&str], usize); 10] = [
    (&["A", "A", "B", "B"], 1),
    (&["AA", "B", "B"], 2),
    (&["A", "A", "BB"], 2),
    (&["A", "AB", "B"], 3),
    (&["AA", "BB"], 4),
    (&["AB", "AB"], 5),
    (&["AAB", "B"], 6),
    (&["A", "ABB"], 6),
    (&["AABB"], 7),
    (&["ABAB"], 8),
];

fn monomial_slot(traces: &[String]) -> Option<usize> {
    MONOMIALS.iter().position(|(m, _)| m.len() == traces.len() && m.iter().zip(traces).all(|(a, b)| a == b))
}

/// Expands the isospectral average of a functional into eight moment forms,
/// the coefficients of `Ω₁ … Ω₈`, for dimension `d`.
pub fn expand(functional: &[TensorTerm], d: usize) -> Result<[MomentForm; 8]> {
    let mut slots: Vec<MomentForm> = vec![MomentForm::zero(); MONOMIALS.len()];
    for term in functional {
        let k = term.factors.len();
        let deltas = delta_forms(k, d)?;
        let idempotents: Vec<_> = Partition::of(k).iter().map(central_idempotent).collect::<Result<_>>()?;

        // Multilinear expansion of the factors.
        let mut products: Vec<(Vec<&str>, Q)> = vec![(Vec::new(), term.coefficient.clone())];
        for factor in &term.factors {
            products = products
                .into_iter()
                .flat_map(|(words, c)| {
                    factor.terms.iter().map(move |(w, fc)| {
                        let mut next = words.clone();
                        next.push(w.as_str());
                        (next, &c * fc)
                    })
                })
                .collect();
        }

        // Group the projector expansion by permutation: Σ_λ Δ_λ c_{λ,π}.
        let mut per_permutation = BTreeMap::new();
        for ((_, delta), element) in deltas.iter().zip(&idempotents) {
            if delta.is_zero() {
                continue;
            }
            for (pi, c) in element.terms() {
                let entry = per_permutation.entry(pi.clone()).or_insert_with(MomentForm::zero);
                *entry = &*entry + &delta.scale(c);
            }
        }

        for (words, c) in &products {
            for (pi, form) in &per_permutation {
                let inv = pi.inverse();
                let mut traces: Vec<String> = inv
                    .cycles()
                    .iter()
                    .map(|cycle| canonical_cyclic(&cycle.iter().map(|&m| words[m]).collect::<String>()))
                    .collect();
                traces.sort();
                let slot = monomial_slot(&traces).ok_or_else(|| {
                    Error::InvalidArgument(format!("trace monomial {traces:?} is outside the Ω basis"))
                })?;
                slots[slot] = &slots[slot] + &form.scale(c);
            }
        }
    }

    for (a, b) in [(1, 2), (6, 7)] {
        if slots[a] != slots[b] {
            return Err(Error::Consistency(format!(
                "functional is not symmetric under A ↔ B ({} vs {})",
                slots[a], slots[b]
            )));
        }
    }
    let mut out: [MomentForm; 8] = std::array::from_fn(|_| MomentForm::zero());
    for (slot, (_, omega)) in MONOMIALS.iter().enumerate() {
        if matches!(slot, 2 | 7) {
            continue;
        }
        out[omega - 1] = slots[slot].clone();
    }
    Ok(out)
}

/// Evaluates eight moment forms at exact moments.
pub fn evaluate_all(forms: &[MomentForm; 8], point: &crate::exact::MomentPoint<Q>) -> [Q; 8] {
    std::array::from_fn(|j| forms[j].eval_exact(point))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::MomentPoint;

    #[test]
    fn canonical_words() {
        assert_eq!(canonical_cyclic("BA"), "AB");
        assert_eq!(canonical_cyclic("BAA"), "AAB");
        assert_eq!(canonical_cyclic("ABBA"), "AABB");
        assert_eq!(canonical_cyclic("BABA"), "ABAB");
    }

    #[test]
    fn pure_state_product_and_bound_at_qubit() {
        let product = evaluate_all(&expand(&uncertainty_product(), 2).unwrap(), &MomentPoint::pure());
        let bound = evaluate_all(&expand(&robertson_schrodinger_bound(), 2).unwrap(), &MomentPoint::pure());
        let u = [frac(1, 120), frac(-1, 30), frac(1, 30), frac(11, 120), frac(1, 60), frac(-1, 20), frac(1, 30), frac(1, 60)];
        assert_eq!(product, u);
        let l = [frac(1, 120), frac(1, 120), frac(-1, 20), frac(1, 120), frac(1, 10), frac(-1, 20), frac(7, 60), frac(-1, 15)];
        assert_eq!(bound, l);
    }

    #[test]
    fn non_symmetric_functional_is_rejected() {
        let skewed = vec![TensorTerm::words(q(1), &["AA", "B", "B"])];
        assert!(matches!(expand(&skewed, 3), Err(Error::Consistency(_))));
        let wrong_degree = vec![TensorTerm::words(q(1), &["A", "B"])];
        assert!(matches!(expand(&wrong_degree, 3), Err(Error::InvalidArgument(_))));
    }
}
