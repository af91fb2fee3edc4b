//! The symmetric group `S_k` for `k ≤ 4` and its action on `(ℂ^d)^⊗k`.
//!
//! Tensor legs are numbered from 0 and leg 0 is the most significant digit
//! of a basis index. A permutation `π` acts by moving the content of leg `s`
//! to leg `π(s)`, i.e. `P(π)|i₀ … i_{k−1}⟩ = |i_{π⁻¹(0)} … i_{π⁻¹(k−1)}⟩`, so
//! that `P(π)P(σ) = P(π∘σ)`.

use std::fmt;

use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::exact::{q, Q};
use crate::{CMatrix, Error, Result};

/// Largest supported tensor order.
pub const MAX_ORDER: usize = 4;

/// Upper limit on the number of entries of any dense `d^k × d^k` operator.
pub const MAX_DENSE_ENTRIES: usize = 10_000_000;

fn check_order(k: usize) -> Result<()> {
    if (1..=MAX_ORDER).contains(&k) {
        Ok(())
    } else {
        Err(Error::UnsupportedOrder(k))
    }
}

fn factorial(k: usize) -> u64 {
    (1..=k as u64).product()
}

/// Side length `d^k` of the tensor-power space, refusing sizes whose dense
/// operators would not fit under [`MAX_DENSE_ENTRIES`].
pub fn tensor_side(d: usize, k: usize) -> Result<usize> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let side = d
        .checked_pow(k as u32)
        .ok_or(Error::Capacity { side: usize::MAX, limit: MAX_DENSE_ENTRIES })?;
    match side.checked_mul(side) {
        Some(entries) if entries <= MAX_DENSE_ENTRIES => Ok(side),
        _ => Err(Error::Capacity { side, limit: MAX_DENSE_ENTRIES }),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(k: usize) -> Self {
        Permutation { images: (0..k).collect() }
    }

    /// Builds `π` from its images `π(0), …, π(k−1)`.
    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let k = images.len();
        let mut seen = vec![false; k];
        for &i in &images {
            if i >= k || std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidPermutation(format!("{images:?} is not a bijection of 0..{k}")));
            }
        }
        Ok(Permutation { images })
    }

    /// Builds a permutation of `0..k` from disjoint cycles.
    pub fn from_cycles(k: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut images: Vec<usize> = (0..k).collect();
        let mut touched = vec![false; k];
        for cycle in cycles {
            for (pos, &from) in cycle.iter().enumerate() {
                if from >= k || std::mem::replace(&mut touched[from], true) {
                    return Err(Error::InvalidPermutation(format!("bad cycle list {cycles:?}")));
                }
                images[from] = cycle[(pos + 1) % cycle.len()];
            }
        }
        Self::from_images(images)
    }

    /// All permutations of `0..k` in lexicographic order of their images.
    pub fn all(k: usize) -> Vec<Permutation> {
        fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Permutation>) {
            if prefix.len() == used.len() {
                out.push(Permutation { images: prefix.clone() });
                return;
            }
            for i in 0..used.len() {
                if !used[i] {
                    used[i] = true;
                    prefix.push(i);
                    rec(prefix, used, out);
                    prefix.pop();
                    used[i] = false;
                }
            }
        }
        let mut out = Vec::with_capacity(factorial(k) as usize);
        rec(&mut Vec::with_capacity(k), &mut vec![false; k], &mut out);
        out
    }

    pub fn order(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.order() != other.order() {
            return Err(Error::InvalidPermutation(format!(
                "cannot compose permutations of {} and {} points",
                self.order(),
                other.order()
            )));
        }
        Ok(Permutation { images: other.images.iter().map(|&i| self.images[i]).collect() })
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.order()];
        for (i, &p) in self.images.iter().enumerate() {
            inv[p] = i;
        }
        Permutation { images: inv }
    }

    /// Disjoint cycles, each starting at its smallest element, fixed points included.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let k = self.order();
        let mut seen = vec![false; k];
        let mut out = Vec::new();
        for start in 0..k {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                cycle.push(i);
                i = self.images[i];
            }
            out.push(cycle);
        }
        out
    }

    pub fn cycle_type(&self) -> Partition {
        let mut parts: Vec<usize> = self.cycles().iter().map(Vec::len).collect();
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Partition { parts }
    }

    pub fn cycle_count(&self) -> usize {
        self.cycles().len()
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &p)| i == p)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nontrivial: Vec<_> = self.cycles().into_iter().filter(|c| c.len() > 1).collect();
        if nontrivial.is_empty() {
            return write!(f, "()");
        }
        for c in nontrivial {
            let body: Vec<String> = c.iter().map(ToString::to_string).collect();
            write!(f, "({})", body.join(" "))?;
        }
        Ok(())
    }
}

/// Integer partition with weakly decreasing positive parts; used both for
/// irreducible representations and for cycle types.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() || parts.contains(&0) || parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidPartition(format!("{parts:?}")));
        }
        Ok(Partition { parts })
    }

    /// Partitions of `k` in reverse lexicographic order, `(k)` first.
    pub fn of(k: usize) -> Vec<Partition> {
        fn rec(remaining: usize, max: usize, prefix: &mut Vec<usize>, out: &mut Vec<Partition>) {
            if remaining == 0 {
                out.push(Partition { parts: prefix.clone() });
                return;
            }
            for part in (1..=remaining.min(max)).rev() {
                prefix.push(part);
                rec(remaining - part, part, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if k > 0 {
            rec(k, k, &mut Vec::new(), &mut out);
        }
        out
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// The integer being partitioned.
    pub fn order(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn rows(&self) -> usize {
        self.parts.len()
    }

    fn hook_product(&self) -> u64 {
        let cols = self.parts[0];
        let conj: Vec<usize> = (0..cols).map(|j| self.parts.iter().filter(|&&p| p > j).count()).collect();
        let mut prod = 1u64;
        for (i, &row) in self.parts.iter().enumerate() {
            for (j, &col) in conj.iter().enumerate().take(row) {
                prod *= (row - j + col - i - 1) as u64;
            }
        }
        prod
    }

    /// Dimension of the irreducible `S_k` module (hook-length formula).
    pub fn dim_symmetric(&self) -> u64 {
        factorial(self.order()) / self.hook_product()
    }

    /// Dimension of the irreducible `U(d)` module; zero when `rows > d`.
    pub fn dim_unitary(&self, d: usize) -> u64 {
        if self.rows() > d {
            return 0;
        }
        let mut num = 1u64;
        for (i, &row) in self.parts.iter().enumerate() {
            for j in 0..row {
                num *= (d + j - i) as u64;
            }
        }
        num / self.hook_product()
    }

    /// Short label such as `"31"` or `"211"`.
    pub fn label(&self) -> String {
        self.parts.iter().map(ToString::to_string).collect()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self.parts.iter().map(ToString::to_string).collect();
        write!(f, "({})", body.join(","))
    }
}

/// `(dim Q_λ(d), dim P_λ)`.
pub fn dims(lambda: &Partition, d: usize) -> (u64, u64) {
    (lambda.dim_unitary(d), lambda.dim_symmetric())
}

// Rows: irreducible, then characters listed per cycle type of the column header.
type CharacterRow = (&'static [usize], &'static [i64]);

const CLASSES_1: &[&[usize]] = &[&[1]];
const TABLE_1: &[CharacterRow] = &[(&[1], &[1])];

const CLASSES_2: &[&[usize]] = &[&[1, 1], &[2]];
const TABLE_2: &[CharacterRow] = &[(&[2], &[1, 1]), (&[1, 1], &[1, -1])];

const CLASSES_3: &[&[usize]] = &[&[1, 1, 1], &[2, 1], &[3]];
const TABLE_3: &[CharacterRow] = &[(&[3], &[1, 1, 1]), (&[2, 1], &[2, 0, -1]), (&[1, 1, 1], &[1, -1, 1])];

const CLASSES_4: &[&[usize]] = &[&[1, 1, 1, 1], &[2, 1, 1], &[2, 2], &[3, 1], &[4]];
const TABLE_4: &[CharacterRow] = &[
    (&[4], &[1, 1, 1, 1, 1]),
    (&[3, 1], &[3, 1, -1, 0, -1]),
    (&[2, 2], &[2, 0, 2, -1, 0]),
    (&[2, 1, 1], &[3, -1, -1, 0, 1]),
    (&[1, 1, 1, 1], &[1, -1, 1, 1, -1]),
];

fn table(k: usize) -> Result<(&'static [&'static [usize]], &'static [CharacterRow])> {
    Ok(match k {
        1 => (CLASSES_1, TABLE_1),
        2 => (CLASSES_2, TABLE_2),
        3 => (CLASSES_3, TABLE_3),
        4 => (CLASSES_4, TABLE_4),
        _ => return Err(Error::UnsupportedOrder(k)),
    })
}

/// Irreducible character `χ_λ(π)`.
pub fn character(lambda: &Partition, pi: &Permutation) -> Result<i64> {
    let k = lambda.order();
    if pi.order() != k {
        return Err(Error::OrderMismatch { partition: k, permutation: pi.order() });
    }
    character_of_class(lambda, &pi.cycle_type())
}

/// Irreducible character on a conjugacy class given by its cycle type.
pub fn character_of_class(lambda: &Partition, cycle_type: &Partition) -> Result<i64> {
    let k = lambda.order();
    if cycle_type.order() != k {
        return Err(Error::OrderMismatch { partition: k, permutation: cycle_type.order() });
    }
    let (classes, rows) = table(k)?;
    let col = classes.iter().position(|c| *c == cycle_type.parts()).expect("every cycle type is tabulated");
    let row = rows.iter().find(|(l, _)| *l == lambda.parts()).expect("every partition is tabulated");
    Ok(row.1[col])
}

/// Exact unitary Weingarten function `Wg(π, d)`.
///
/// For `d < k` the sum runs only over partitions with at most `d` rows,
/// which gives the pseudo-inverse of the Gram matrix of permutation
/// operators; the result then reproduces the twirl on the span of those
/// operators but is not an inverse in the group algebra.
pub fn weingarten(pi: &Permutation, d: usize) -> Result<Q> {
    let k = pi.order();
    check_order(k)?;
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let kf = factorial(k) as i64;
    let mut sum = Q::zero();
    for lambda in Partition::of(k).into_iter().filter(|l| l.rows() <= d) {
        let (dq, dp) = dims(&lambda, d);
        let chi = character(&lambda, pi)?;
        sum += q((dp * dp) as i64 * chi) / q(dq as i64);
    }
    Ok(sum / q(kf * kf))
}

/// Whether [`weingarten`] used the restricted sum for this `(k, d)`.
pub fn weingarten_is_restricted(k: usize, d: usize) -> bool {
    d < k
}

/// `P(π)` on `(ℂ^d)^⊗k`, stored as the index map `column → row` of its single
/// nonzero entry per column.
#[derive(Clone, Debug)]
pub struct PermutationOperator {
    permutation: Permutation,
    d: usize,
    targets: Vec<usize>,
}

impl PermutationOperator {
    pub fn new(pi: &Permutation, d: usize) -> Result<Self> {
        let k = pi.order();
        check_order(k)?;
        let side = tensor_side(d, k)?;
        let mut targets = vec![0; side];
        let mut digits = vec![0; k];
        let mut moved = vec![0; k];
        for (col, target) in targets.iter_mut().enumerate() {
            let mut rest = col;
            for leg in (0..k).rev() {
                digits[leg] = rest % d;
                rest /= d;
            }
            for leg in 0..k {
                moved[pi.apply(leg)] = digits[leg];
            }
            *target = moved.iter().fold(0, |acc, &digit| acc * d + digit);
        }
        Ok(PermutationOperator { permutation: pi.clone(), d, targets })
    }

    pub fn permutation(&self) -> &Permutation {
        &self.permutation
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn side(&self) -> usize {
        self.targets.len()
    }

    /// Row index of the nonzero entry in column `col`.
    pub fn target(&self, col: usize) -> usize {
        self.targets[col]
    }

    pub fn to_matrix(&self) -> CMatrix {
        let n = self.side();
        let mut m = CMatrix::zeros(n, n);
        for (col, &row) in self.targets.iter().enumerate() {
            m[(row, col)] = Complex64::one();
        }
        m
    }

    /// `Tr P(π) = d^{#cycles}`.
    pub fn trace(&self) -> usize {
        self.targets.iter().enumerate().filter(|(c, &r)| *c == r).count()
    }

    /// `Tr[M P(π)]` without forming the product.
    pub fn trace_against(&self, m: &CMatrix) -> Complex64 {
        self.targets.iter().enumerate().map(|(col, &row)| m[(col, row)]).sum()
    }

    /// Accumulates `c · P(π) M` into `acc`.
    pub fn add_left_product(&self, c: Complex64, m: &CMatrix, acc: &mut CMatrix) {
        for (src, &dst) in self.targets.iter().enumerate() {
            for j in 0..m.ncols() {
                acc[(dst, j)] += c * m[(src, j)];
            }
        }
    }

    /// Accumulates `c · P(π)` into `acc`.
    pub fn add_scaled(&self, c: Complex64, acc: &mut CMatrix) {
        for (col, &row) in self.targets.iter().enumerate() {
            acc[(row, col)] += c;
        }
    }
}

/// Element `Σ_π c_π π` of the group algebra `ℚ[S_k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupAlgebraElement {
    k: usize,
    terms: Vec<(Permutation, Q)>,
}

impl GroupAlgebraElement {
    pub fn new(k: usize, mut terms: Vec<(Permutation, Q)>) -> Result<Self> {
        check_order(k)?;
        if let Some((p, _)) = terms.iter().find(|(p, _)| p.order() != k) {
            return Err(Error::InvalidPermutation(format!("{p} is not a permutation of {k} points")));
        }
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Permutation, Q)> = Vec::with_capacity(terms.len());
        for (p, c) in terms {
            match merged.last_mut() {
                Some((last, acc)) if *last == p => *acc += c,
                _ => merged.push((p, c)),
            }
        }
        merged.retain(|(_, c)| !c.is_zero());
        Ok(GroupAlgebraElement { k, terms: merged })
    }

    pub fn order(&self) -> usize {
        self.k
    }

    pub fn terms(&self) -> &[(Permutation, Q)] {
        &self.terms
    }

    pub fn coefficient(&self, p: &Permutation) -> Q {
        self.terms.iter().find(|(q, _)| q == p).map(|(_, c)| c.clone()).unwrap_or_else(Q::zero)
    }

    pub fn multiply(&self, other: &GroupAlgebraElement) -> Result<GroupAlgebraElement> {
        if self.k != other.k {
            return Err(Error::OrderMismatch { partition: self.k, permutation: other.k });
        }
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (p, a) in &self.terms {
            for (r, b) in &other.terms {
                terms.push((p.compose(r)?, a * b));
            }
        }
        GroupAlgebraElement::new(self.k, terms)
    }

    /// Image `Σ c_π P(π)` on `(ℂ^d)^⊗k`.
    pub fn to_matrix(&self, d: usize) -> Result<CMatrix> {
        let side = tensor_side(d, self.k)?;
        let mut m = CMatrix::zeros(side, side);
        for (p, c) in &self.terms {
            let op = PermutationOperator::new(p, d)?;
            op.add_scaled(Complex64::new(crate::exact::to_f64(c), 0.0), &mut m);
        }
        Ok(m)
    }
}

/// Central idempotent of `ℚ[S_k]` for `λ`: `(dim P_λ / k!) Σ_π χ_λ(π) π`.
pub fn central_idempotent(lambda: &Partition) -> Result<GroupAlgebraElement> {
    let k = lambda.order();
    check_order(k)?;
    let scale = q(lambda.dim_symmetric() as i64) / q(factorial(k) as i64);
    let terms = Permutation::all(k)
        .into_iter()
        .map(|p| {
            let chi = character(lambda, &p)?;
            Ok((p, &scale * q(chi)))
        })
        .collect::<Result<Vec<_>>>()?;
    GroupAlgebraElement::new(k, terms)
}

/// `C_λ` on `(ℂ^d)^⊗k`, kept both as a dense matrix and as its expansion
/// over permutation operators.
#[derive(Clone, Debug)]
pub struct CentralProjector {
    partition: Partition,
    d: usize,
    dim_unitary: u64,
    dim_symmetric: u64,
    expansion: Vec<(PermutationOperator, f64)>,
    matrix: CMatrix,
}

impl CentralProjector {
    pub fn new(lambda: &Partition, d: usize) -> Result<Self> {
        let k = lambda.order();
        check_order(k)?;
        let side = tensor_side(d, k)?;
        let element = central_idempotent(lambda)?;
        let mut matrix = CMatrix::zeros(side, side);
        let mut expansion = Vec::with_capacity(element.terms().len());
        for (p, c) in element.terms() {
            let op = PermutationOperator::new(p, d)?;
            let c = crate::exact::to_f64(c);
            op.add_scaled(Complex64::new(c, 0.0), &mut matrix);
            expansion.push((op, c));
        }
        let (dim_unitary, dim_symmetric) = dims(lambda, d);
        Ok(CentralProjector { partition: lambda.clone(), d, dim_unitary, dim_symmetric, expansion, matrix })
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim_unitary(&self) -> u64 {
        self.dim_unitary
    }

    pub fn dim_symmetric(&self) -> u64 {
        self.dim_symmetric
    }

    /// `Tr C_λ = dim Q_λ(d) · dim P_λ`.
    pub fn rank(&self) -> u64 {
        self.dim_unitary * self.dim_symmetric
    }

    /// `C_λ M`, computed through the permutation expansion in `O(k!·side²)`.
    pub fn apply_left(&self, m: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(m.nrows(), m.ncols());
        for (op, c) in &self.expansion {
            op.add_left_product(Complex64::new(*c, 0.0), m, &mut out);
        }
        out
    }
}

/// All central projectors of `S_k` on `(ℂ^d)^⊗k`, including the zero
/// projectors of partitions with more than `d` rows.
pub fn central_projectors(k: usize, d: usize) -> Result<Vec<CentralProjector>> {
    check_order(k)?;
    tensor_side(d, k)?;
    Partition::of(k).iter().map(|l| CentralProjector::new(l, d)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::frac;

    fn max_abs(m: &CMatrix) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn partition_counts_and_dimensions() {
        assert_eq!(Partition::of(4).len(), 5);
        let labels: Vec<String> = Partition::of(4).iter().map(Partition::label).collect();
        assert_eq!(labels, ["4", "31", "22", "211", "1111"]);
        let l = Partition::new(vec![3, 1]).unwrap();
        assert_eq!(dims(&l, 2), (3, 3));
        let l = Partition::new(vec![2, 2]).unwrap();
        assert_eq!(dims(&l, 3), (6, 2));
        assert_eq!(Partition::new(vec![1, 1, 1, 1]).unwrap().dim_unitary(3), 0);
        assert!(Partition::new(vec![1, 2]).is_err());
    }

    #[test]
    fn schur_weyl_dimension_count() {
        for k in 1..=4 {
            for d in 1..=6 {
                let total: u64 = Partition::of(k).iter().map(|l| l.dim_unitary(d) * l.dim_symmetric()).sum();
                assert_eq!(total, (d as u64).pow(k as u32));
            }
        }
    }

    #[test]
    fn character_orthogonality() {
        for k in 1..=4 {
            let perms = Permutation::all(k);
            let parts = Partition::of(k);
            for a in &parts {
                for b in &parts {
                    let s: i64 = perms.iter().map(|p| character(a, p).unwrap() * character(b, p).unwrap()).sum();
                    assert_eq!(s, if a == b { factorial(k) as i64 } else { 0 });
                }
                let id = Permutation::identity(k);
                assert_eq!(character(a, &id).unwrap() as u64, a.dim_symmetric());
            }
        }
    }

    #[test]
    fn character_order_mismatch() {
        let l = Partition::new(vec![2, 1]).unwrap();
        assert!(matches!(character(&l, &Permutation::identity(4)), Err(Error::OrderMismatch { .. })));
    }

    #[test]
    fn weingarten_small_cases() {
        let id = Permutation::identity(2);
        let swap = Permutation::from_images(vec![1, 0]).unwrap();
        assert_eq!(weingarten(&id, 3).unwrap(), frac(1, 8));
        assert_eq!(weingarten(&swap, 3).unwrap(), frac(-1, 24));
        assert_eq!(weingarten(&Permutation::identity(1), 5).unwrap(), frac(1, 5));
        assert!(weingarten(&Permutation::identity(5), 5).is_err());
    }

    #[test]
    fn weingarten_inverts_gram_matrix() {
        // Σ_σ Wg(πσ⁻¹) d^{#cycles(σ)} = δ_{π,e} whenever d ≥ k.
        for k in 1..=4 {
            let perms = Permutation::all(k);
            for d in k..=6 {
                for pi in &perms {
                    let mut s = Q::zero();
                    for sigma in &perms {
                        let w = weingarten(&pi.compose(&sigma.inverse()).unwrap(), d).unwrap();
                        s += w * q((d as i64).pow(sigma.cycle_count() as u32));
                    }
                    assert_eq!(s, if pi.is_identity() { q(1) } else { q(0) });
                }
            }
        }
    }

    #[test]
    fn permutation_operator_is_a_representation() {
        let perms = Permutation::all(3);
        for a in &perms {
            for b in &perms {
                let pa = PermutationOperator::new(a, 2).unwrap().to_matrix();
                let pb = PermutationOperator::new(b, 2).unwrap().to_matrix();
                let pab = PermutationOperator::new(&a.compose(b).unwrap(), 2).unwrap().to_matrix();
                assert!(max_abs(&(&pa * &pb - &pab)) == 0.0);
            }
        }
        let cyc = Permutation::from_cycles(3, &[&[0, 1, 2]]).unwrap();
        let op = PermutationOperator::new(&cyc, 3).unwrap();
        assert_eq!(op.trace(), 3);
    }

    #[test]
    fn transposition_moves_leading_leg() {
        // P(01)|0 1⟩ = |1 0⟩ on ℂ²⊗ℂ²: index 1 ↦ index 2.
        let swap = Permutation::from_images(vec![1, 0]).unwrap();
        let op = PermutationOperator::new(&swap, 2).unwrap();
        assert_eq!(op.target(1), 2);
        // P(π)|i₀ i₁ i₂⟩ puts i₀ on leg π(0).
        let cyc = Permutation::from_images(vec![1, 2, 0]).unwrap();
        let op = PermutationOperator::new(&cyc, 2).unwrap();
        assert_eq!(op.target(0b100), 0b010);
    }

    #[test]
    fn capacity_guard() {
        assert!(tensor_side(6, 4).is_ok());
        assert!(matches!(tensor_side(64, 4), Err(Error::Capacity { .. })));
        assert!(matches!(central_projectors(5, 2), Err(Error::UnsupportedOrder(5))));
    }

    #[test]
    fn projectors_are_orthogonal_idempotents() {
        for k in 1..=4 {
            let d = 3;
            let ps = central_projectors(k, d).unwrap();
            let side = tensor_side(d, k).unwrap();
            let mut sum = CMatrix::zeros(side, side);
            for a in &ps {
                sum += a.matrix();
                assert!((a.matrix().trace().re - a.rank() as f64).abs() < 1e-10);
                for b in &ps {
                    let prod = a.apply_left(b.matrix());
                    let expect = if a.partition() == b.partition() { a.matrix().clone() } else { CMatrix::zeros(side, side) };
                    assert!(max_abs(&(prod - expect)) < 1e-10);
                }
            }
            assert!(max_abs(&(sum - CMatrix::identity(side, side))) < 1e-10);
        }
    }

    #[test]
    fn central_idempotents_in_group_algebra() {
        for k in 1..=4 {
            for l in Partition::of(k) {
                let e = central_idempotent(&l).unwrap();
                assert_eq!(e.multiply(&e).unwrap(), e);
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn perm(k: usize) -> impl Strategy<Value = Permutation> {
            Just((0..k).collect::<Vec<_>>()).prop_shuffle().prop_map(|v| Permutation::from_images(v).unwrap())
        }

        proptest! {
            #[test]
            fn class_function(a in perm(4), g in perm(4)) {
                let conj = g.compose(&a).unwrap().compose(&g.inverse()).unwrap();
                for l in Partition::of(4) {
                    prop_assert_eq!(character(&l, &a).unwrap(), character(&l, &conj).unwrap());
                }
                prop_assert_eq!(weingarten(&a, 4).unwrap(), weingarten(&conj, 4).unwrap());
            }

            #[test]
            fn inverse_composes_to_identity(a in perm(4)) {
                prop_assert!(a.compose(&a.inverse()).unwrap().is_identity());
                prop_assert_eq!(a.cycle_type(), a.inverse().cycle_type());
            }
        }
    }
}
