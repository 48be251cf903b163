//! Finitely supported complex sequences and the operator algebra acting on them.
//!
//! Vectors are sparse maps from index to value. Shift operators only move
//! indices around, so applying `B` or `S` never touches a stored value and
//! `B S v` is bit-identical to `v`. Arithmetic results with modulus below
//! [`PRUNE_THRESHOLD`] are dropped to keep the representation canonical.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub type ComplexScalar = Complex64;

/// Entries whose modulus falls below this are not stored.
pub const PRUNE_THRESHOLD: f64 = 1e-300;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[inline]
fn is_finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

#[inline]
fn keep(z: Complex64) -> bool {
    z.norm() >= PRUNE_THRESHOLD
}

/// Finitely supported vector in ℓ², stored sparsely in index order.
///
/// Serialized as a list of `[index, [re, im]]` pairs.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<(usize, Complex64)>", into = "Vec<(usize, Complex64)>")]
pub struct SeqVec {
    entries: BTreeMap<usize, Complex64>,
}

impl TryFrom<Vec<(usize, Complex64)>> for SeqVec {
    type Error = Error;

    fn try_from(pairs: Vec<(usize, Complex64)>) -> Result<Self> {
        SeqVec::try_from_entries(pairs)
    }
}

impl From<SeqVec> for Vec<(usize, Complex64)> {
    fn from(v: SeqVec) -> Self {
        v.entries.into_iter().collect()
    }
}

impl SeqVec {
    pub fn zero() -> Self {
        SeqVec::default()
    }

    /// The standard basis vector `e_i`.
    pub fn basis(i: usize) -> Self {
        let mut entries = BTreeMap::new();
        entries.insert(i, ONE);
        SeqVec { entries }
    }

    /// Builds a vector from `(index, value)` pairs, summing repeated indices.
    ///
    /// Panics on non-finite values; use [`SeqVec::try_from_entries`] for
    /// untrusted input.
    pub fn from_entries<I: IntoIterator<Item = (usize, Complex64)>>(pairs: I) -> Self {
        SeqVec::try_from_entries(pairs).expect("non-finite entry in SeqVec")
    }

    pub fn try_from_entries<I: IntoIterator<Item = (usize, Complex64)>>(pairs: I) -> Result<Self> {
        let mut acc: BTreeMap<usize, Complex64> = BTreeMap::new();
        for (i, z) in pairs {
            if !is_finite(z) {
                return Err(Error::NonFinite);
            }
            *acc.entry(i).or_insert(ZERO) += z;
        }
        acc.retain(|_, z| keep(*z));
        Ok(SeqVec { entries: acc })
    }

    /// Dense coordinates `0..values.len()`.
    pub fn from_dense(values: &[Complex64]) -> Self {
        SeqVec::from_entries(values.iter().copied().enumerate())
    }

    pub fn from_real(values: &[f64]) -> Self {
        SeqVec::from_entries(
            values
                .iter()
                .enumerate()
                .map(|(i, &x)| (i, Complex64::new(x, 0.0))),
        )
    }

    pub fn get(&self, i: usize) -> Complex64 {
        self.entries.get(&i).copied().unwrap_or(ZERO)
    }

    /// Stored (nonzero) entries in increasing index order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        self.entries.iter().map(|(&i, &z)| (i, z))
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.keys().next_back().copied()
    }

    pub fn min_index(&self) -> Option<usize> {
        self.entries.keys().next().copied()
    }

    pub fn is_finite(&self) -> bool {
        self.entries.values().all(|&z| is_finite(z))
    }

    pub fn to_dense(&self, dim: usize) -> Vec<Complex64> {
        let mut out = vec![ZERO; dim];
        for (i, z) in self.iter().take_while(|&(i, _)| i < dim) {
            out[i] = z;
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> SeqVec {
        SeqVec {
            entries: self
                .entries
                .iter()
                .map(|(&i, &z)| (i, z * c))
                .filter(|&(_, z)| keep(z))
                .collect(),
        }
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: Complex64, other: &SeqVec) -> SeqVec {
        let mut entries = self.entries.clone();
        for (&i, &z) in &other.entries {
            *entries.entry(i).or_insert(ZERO) += c * z;
        }
        entries.retain(|_, z| keep(*z));
        SeqVec { entries }
    }

    pub fn add(&self, other: &SeqVec) -> SeqVec {
        self.add_scaled(ONE, other)
    }

    pub fn sub(&self, other: &SeqVec) -> SeqVec {
        self.add_scaled(-ONE, other)
    }

    /// Moves every entry from index `i` to `i + offset`, dropping those that
    /// would land below zero. No value arithmetic is performed.
    pub fn shifted(&self, offset: isize) -> SeqVec {
        SeqVec {
            entries: self
                .entries
                .iter()
                .filter_map(|(&i, &z)| {
                    let j = i as isize + offset;
                    (j >= 0).then_some((j as usize, z))
                })
                .collect(),
        }
    }

    /// Keeps only the entries whose index satisfies `pred`.
    pub fn restrict<F: Fn(usize) -> bool>(&self, pred: F) -> SeqVec {
        SeqVec {
            entries: self
                .entries
                .iter()
                .filter(|(&i, _)| pred(i))
                .map(|(&i, &z)| (i, z))
                .collect(),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries
            .values()
            .map(|z| z.norm_sqr())
            .fold(0.0, |acc, x| acc + x)
    }

    pub fn norm(&self) -> f64 {
        norm(self)
    }

    pub fn distance(&self, other: &SeqVec) -> f64 {
        let mut acc = 0.0;
        let (mut a, mut b) = (
            self.entries.iter().peekable(),
            other.entries.iter().peekable(),
        );
        loop {
            match (a.peek(), b.peek()) {
                (Some((&i, &x)), Some((&j, &y))) => {
                    if i == j {
                        acc += (x - y).norm_sqr();
                        a.next();
                        b.next();
                    } else if i < j {
                        acc += x.norm_sqr();
                        a.next();
                    } else {
                        acc += y.norm_sqr();
                        b.next();
                    }
                }
                (Some((_, &x)), None) => {
                    acc += x.norm_sqr();
                    a.next();
                }
                (None, Some((_, &y))) => {
                    acc += y.norm_sqr();
                    b.next();
                }
                (None, None) => break,
            }
        }
        acc.sqrt()
    }
}

/// `Σ u_i · conj(v_i)`: linear in the first slot, conjugate-linear in the second.
pub fn inner(u: &SeqVec, v: &SeqVec) -> Complex64 {
    if u.nnz() <= v.nnz() {
        u.iter().map(|(i, z)| z * v.get(i).conj()).sum()
    } else {
        v.iter().map(|(i, w)| u.get(i) * w.conj()).sum()
    }
}

pub fn norm(v: &SeqVec) -> f64 {
    v.norm_sqr().sqrt()
}

/// Symbolic bounded operator on ℓ².
///
/// `DirectSum` uses a block layout: indices below `split` belong to the left
/// summand (truncated to that block), indices from `split` on are handed to the
/// right summand re-based at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum OperatorSpec {
    BackwardShift {
        power: usize,
    },
    ForwardShift {
        power: usize,
    },
    Identity,
    Scalar {
        lambda: Complex64,
        inner: Box<OperatorSpec>,
    },
    Diagonal {
        weights: Vec<Complex64>,
    },
    DirectSum {
        left: Box<OperatorSpec>,
        right: Box<OperatorSpec>,
        split: usize,
    },
    FiniteMatrix(Matrix),
}

impl OperatorSpec {
    pub fn backward_shift(power: usize) -> Self {
        OperatorSpec::BackwardShift { power }
    }

    pub fn forward_shift(power: usize) -> Self {
        OperatorSpec::ForwardShift { power }
    }

    pub fn scalar(lambda: Complex64, inner: OperatorSpec) -> Self {
        OperatorSpec::Scalar {
            lambda,
            inner: Box::new(inner),
        }
    }

    /// `λ B^b`, the weighted backward shift used throughout the constructions.
    pub fn scaled_backward_shift(lambda: Complex64, power: usize) -> Self {
        OperatorSpec::scalar(lambda, OperatorSpec::backward_shift(power))
    }

    pub fn direct_sum(left: OperatorSpec, right: OperatorSpec, split: usize) -> Self {
        OperatorSpec::DirectSum {
            left: Box::new(left),
            right: Box::new(right),
            split,
        }
    }

    pub fn matrix(m: Matrix) -> Self {
        OperatorSpec::FiniteMatrix(m)
    }

    pub fn as_matrix(&self) -> Option<&Matrix> {
        match self {
            OperatorSpec::FiniteMatrix(m) => Some(m),
            _ => None,
        }
    }

    /// Checks the structural invariants (finite scalars and weights, nonzero shift powers).
    pub fn validate(&self) -> Result<()> {
        match self {
            OperatorSpec::BackwardShift { power } | OperatorSpec::ForwardShift { power } => {
                if *power == 0 {
                    return Err(Error::InvalidArgument("shift power must be >= 1".into()));
                }
                Ok(())
            }
            OperatorSpec::Identity | OperatorSpec::FiniteMatrix(_) => Ok(()),
            OperatorSpec::Scalar { lambda, inner } => {
                if !is_finite(*lambda) {
                    return Err(Error::NonFinite);
                }
                inner.validate()
            }
            OperatorSpec::Diagonal { weights } => {
                if weights.iter().all(|&w| is_finite(w)) {
                    Ok(())
                } else {
                    Err(Error::NonFinite)
                }
            }
            OperatorSpec::DirectSum { left, right, .. } => {
                left.validate()?;
                right.validate()
            }
        }
    }

    /// The Hilbert-space adjoint as another symbolic operator.
    pub fn adjoint(&self) -> OperatorSpec {
        match self {
            OperatorSpec::BackwardShift { power } => OperatorSpec::ForwardShift { power: *power },
            OperatorSpec::ForwardShift { power } => OperatorSpec::BackwardShift { power: *power },
            OperatorSpec::Identity => OperatorSpec::Identity,
            OperatorSpec::Scalar { lambda, inner } => {
                OperatorSpec::scalar(lambda.conj(), inner.adjoint())
            }
            OperatorSpec::Diagonal { weights } => OperatorSpec::Diagonal {
                weights: weights.iter().map(|w| w.conj()).collect(),
            },
            OperatorSpec::DirectSum { left, right, split } => {
                OperatorSpec::direct_sum(left.adjoint(), right.adjoint(), *split)
            }
            OperatorSpec::FiniteMatrix(m) => OperatorSpec::FiniteMatrix(m.adjoint()),
        }
    }

    /// If the operator is `c · (shift by offset)`, returns `(c, offset)`.
    fn monomial(&self) -> Option<(Complex64, isize)> {
        match self {
            OperatorSpec::BackwardShift { power } => Some((ONE, -(*power as isize))),
            OperatorSpec::ForwardShift { power } => Some((ONE, *power as isize)),
            OperatorSpec::Identity => Some((ONE, 0)),
            OperatorSpec::Scalar { lambda, inner } => {
                inner.monomial().map(|(c, off)| (c * lambda, off))
            }
            _ => None,
        }
    }
}

/// Applies `op` to `v`.
pub fn apply(op: &OperatorSpec, v: &SeqVec) -> Result<SeqVec> {
    match op {
        OperatorSpec::BackwardShift { power } => Ok(v.shifted(-(*power as isize))),
        OperatorSpec::ForwardShift { power } => Ok(v.shifted(*power as isize)),
        OperatorSpec::Identity => Ok(v.clone()),
        OperatorSpec::Scalar { lambda, inner } => Ok(apply(inner, v)?.scale(*lambda)),
        OperatorSpec::Diagonal { weights } => Ok(SeqVec {
            entries: v
                .iter()
                .filter(|&(i, _)| i < weights.len())
                .map(|(i, z)| (i, z * weights[i]))
                .filter(|&(_, z)| keep(z))
                .collect(),
        }),
        OperatorSpec::DirectSum { left, right, split } => {
            let split = *split;
            let l = apply(left, &v.restrict(|i| i < split))?.restrict(|i| i < split);
            let r = apply(
                right,
                &v.restrict(|i| i >= split).shifted(-(split as isize)),
            )?
            .shifted(split as isize);
            let mut entries = l.entries;
            entries.extend(r.entries);
            Ok(SeqVec { entries })
        }
        OperatorSpec::FiniteMatrix(m) => {
            let dense = dense_in(m.dim(), v)?;
            Ok(SeqVec::from_dense(&m.mul_vec(&dense)))
        }
    }
}

fn dense_in(dim: usize, v: &SeqVec) -> Result<Vec<Complex64>> {
    match v.max_index() {
        Some(index) if index >= dim => Err(Error::DimensionMismatch { dim, index }),
        _ => Ok(v.to_dense(dim)),
    }
}

/// `op^n v`. Shift monomials `c · B^p` / `c · S^p` are evaluated in one step
/// (index offset `n·p`, factor `c^n`); everything else by repeated application.
pub fn apply_power(op: &OperatorSpec, n: usize, v: &SeqVec) -> Result<SeqVec> {
    if n == 0 {
        return Ok(v.clone());
    }
    if let Some((c, offset)) = op.monomial() {
        let moved = v.shifted(offset * n as isize);
        return Ok(if c == ONE {
            moved
        } else {
            moved.scale(powu(c, n))
        });
    }
    if let OperatorSpec::FiniteMatrix(m) = op {
        let mut dense = dense_in(m.dim(), v)?;
        for _ in 0..n {
            dense = m.mul_vec(&dense);
        }
        return Ok(SeqVec::from_dense(&dense));
    }
    let mut out = v.clone();
    for _ in 0..n {
        out = apply(op, &out)?;
    }
    Ok(out)
}

/// `op* v`.
pub fn adjoint_apply(op: &OperatorSpec, v: &SeqVec) -> Result<SeqVec> {
    apply(&op.adjoint(), v)
}

/// `c^n` by binary exponentiation.
pub fn powu(c: Complex64, n: usize) -> Complex64 {
    let mut base = c;
    let mut acc = ONE;
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base *= base;
        e >>= 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn arb_vec() -> impl Strategy<Value = SeqVec> {
        prop::collection::vec((0usize..40, -1.0f64..1.0, -1.0f64..1.0), 0..12)
            .prop_map(|es| SeqVec::from_entries(es.into_iter().map(|(i, a, b)| (i, c(a, b)))))
    }

    fn arb_matrix(dim: usize) -> impl Strategy<Value = Matrix> {
        prop::collection::vec((0.0f64..1.0, 0.0f64..std::f64::consts::TAU), dim * dim).prop_map(
            move |es| {
                Matrix::new(
                    dim,
                    es.into_iter()
                        .map(|(r, t)| Complex64::from_polar(r, t))
                        .collect(),
                )
                .unwrap()
            },
        )
    }

    fn arb_dense(dim: usize) -> impl Strategy<Value = SeqVec> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim).prop_map(|es| {
            SeqVec::from_dense(&es.into_iter().map(|(a, b)| c(a, b)).collect::<Vec<_>>())
        })
    }

    #[test]
    fn backward_shift_kills_e0() {
        assert!(apply(&OperatorSpec::backward_shift(1), &SeqVec::basis(0))
            .unwrap()
            .is_zero());
    }

    #[test]
    fn scaled_shift_moves_and_scales() {
        let op = OperatorSpec::scaled_backward_shift(c(2.0, 0.0), 1);
        assert_eq!(
            apply(&op, &SeqVec::basis(1)).unwrap(),
            SeqVec::basis(0).scale(c(2.0, 0.0))
        );
        assert_eq!(
            apply_power(&op, 2, &SeqVec::basis(3)).unwrap(),
            SeqVec::basis(1).scale(c(4.0, 0.0))
        );
    }

    #[test]
    fn matrix_power_two_by_two() {
        let op = OperatorSpec::matrix(Matrix::from_real_rows(&[&[2.0, 1.0], &[0.0, 2.0]]).unwrap());
        let out = apply_power(&op, 3, &SeqVec::from_real(&[0.0, 1.0])).unwrap();
        // [[2,1],[0,2]]^3 = [[8,12],[0,8]]
        assert_eq!(out, SeqVec::from_real(&[12.0, 8.0]));
    }

    #[test]
    fn matrix_rejects_out_of_range_support() {
        let op = OperatorSpec::matrix(Matrix::identity(2));
        assert_eq!(
            apply(&op, &SeqVec::basis(2)),
            Err(Error::DimensionMismatch { dim: 2, index: 2 })
        );
    }

    #[test]
    fn adjoint_of_shift_and_scalar() {
        assert_eq!(
            adjoint_apply(&OperatorSpec::backward_shift(1), &SeqVec::basis(0)).unwrap(),
            SeqVec::basis(1)
        );
        let v = SeqVec::from_entries([(0, c(1.0, 2.0)), (4, c(-3.0, 0.5))]);
        let op = OperatorSpec::scalar(c(0.0, 2.0), OperatorSpec::Identity);
        assert_eq!(adjoint_apply(&op, &v).unwrap(), v.scale(c(0.0, -2.0)));
    }

    #[test]
    fn diagonal_drops_beyond_weights() {
        let op = OperatorSpec::Diagonal {
            weights: vec![c(2.0, 0.0), c(3.0, 0.0)],
        };
        let v = SeqVec::from_real(&[1.0, 1.0, 1.0]);
        assert_eq!(apply(&op, &v).unwrap(), SeqVec::from_real(&[2.0, 3.0]));
    }

    #[test]
    fn direct_sum_block_layout() {
        let op = OperatorSpec::direct_sum(
            OperatorSpec::scaled_backward_shift(c(2.0, 0.0), 1),
            OperatorSpec::Identity,
            4,
        );
        let v = SeqVec::from_real(&[0.0, 1.0, 0.0, 0.0, 5.0]);
        // left block: 2B e1 = 2e0 ; right block (index 4 -> local 0): identity
        assert_eq!(
            apply(&op, &v).unwrap(),
            SeqVec::from_real(&[2.0, 0.0, 0.0, 0.0, 5.0])
        );
        // forward shift on the left block is truncated at the split
        let s = OperatorSpec::direct_sum(OperatorSpec::forward_shift(1), OperatorSpec::Identity, 2);
        assert_eq!(apply(&s, &SeqVec::basis(1)).unwrap(), SeqVec::zero());
    }

    #[test]
    fn inner_and_norm_basics() {
        assert_eq!(inner(&SeqVec::basis(2), &SeqVec::basis(2)), c(1.0, 0.0));
        assert_eq!(inner(&SeqVec::basis(1), &SeqVec::basis(2)), c(0.0, 0.0));
        let v = SeqVec::from_entries([(0, c(3.0, 0.0)), (7, c(4.0, 0.0))]);
        assert_eq!(norm(&v), 5.0);
    }

    #[test]
    fn canonical_form_prunes_zeros() {
        let v = SeqVec::from_entries([(3, c(1.0, 0.0)), (3, c(-1.0, 0.0)), (5, c(1e-320, 0.0))]);
        assert!(v.is_zero());
        assert!(SeqVec::try_from_entries([(0, c(f64::INFINITY, 0.0))]).is_err());
    }

    #[test]
    fn serde_shape() {
        let v = SeqVec::from_entries([(3, c(0.5, -1.0))]);
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, "[[3,[0.5,-1.0]]]");
        assert_eq!(serde_json::from_str::<SeqVec>(&s).unwrap(), v);
        let op: OperatorSpec = serde_json::from_str(
            r#"{"kind":"scalar","lambda":[2,0],"inner":{"kind":"backwardShift","power":1}}"#,
        )
        .unwrap();
        assert_eq!(op, OperatorSpec::scaled_backward_shift(c(2.0, 0.0), 1));
    }

    proptest! {
        #[test]
        fn forward_shift_is_isometry(v in arb_vec()) {
            let sv = apply(&OperatorSpec::forward_shift(1), &v).unwrap();
            prop_assert_eq!(sv.norm(), v.norm());
        }

        #[test]
        fn backward_after_forward_is_identity_bitwise(v in arb_vec()) {
            let sv = apply(&OperatorSpec::forward_shift(1), &v).unwrap();
            let bsv = apply(&OperatorSpec::backward_shift(1), &sv).unwrap();
            prop_assert_eq!(bsv, v);
        }

        #[test]
        fn backward_shift_is_contraction(v in arb_vec()) {
            prop_assert!(apply(&OperatorSpec::backward_shift(1), &v).unwrap().norm() <= v.norm());
        }

        #[test]
        fn power_composes_for_matrices(m in arb_matrix(4), v in arb_dense(4), a in 0usize..6, b in 0usize..6) {
            let op = OperatorSpec::matrix(m);
            let lhs = apply_power(&op, a + b, &v).unwrap();
            let rhs = apply_power(&op, a, &apply_power(&op, b, &v).unwrap()).unwrap();
            let scale = lhs.norm().max(1e-300);
            prop_assert!(lhs.distance(&rhs) <= 1e-10 * scale.max(1.0));
        }

        #[test]
        fn power_composes_exactly_for_shifts(v in arb_vec(), a in 0usize..8, b in 0usize..8) {
            let op = OperatorSpec::backward_shift(2);
            let lhs = apply_power(&op, a + b, &v).unwrap();
            let rhs = apply_power(&op, a, &apply_power(&op, b, &v).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn adjoint_pairing(dim in 1usize..=8, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let m = crate::sampling::unit_disk_matrix(&mut rng, dim);
            let u = SeqVec::from_dense(&crate::sampling::unit_disk_vector(&mut rng, dim));
            let v = SeqVec::from_dense(&crate::sampling::unit_disk_vector(&mut rng, dim));
            let op = OperatorSpec::matrix(m);
            let lhs = inner(&apply(&op, &u).unwrap(), &v);
            let rhs = inner(&u, &adjoint_apply(&op, &v).unwrap());
            prop_assert!((lhs - rhs).norm() <= 1e-12, "{} vs {}", lhs, rhs);
            let _ = rng.gen::<u8>();
        }
    }
}
