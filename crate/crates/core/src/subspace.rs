//! Coordinate zero-pattern subspaces, their projections, and a deterministic
//! dense enumeration of finitely supported dyadic vectors inside them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seqspace::{apply_power, OperatorSpec, SeqVec};

/// A closed subspace of ℓ² given by the coordinates forced to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum ZeroPattern {
    /// Indices `< m` are zero.
    Prefix { m: usize },
    /// Indices in `{a + k b : k >= 0}` are zero.
    Residue { a: usize, b: usize },
    /// Only multiples of `b` may be nonzero.
    SupportIn { b: usize },
    /// Indices `>= split` are zero.
    RightBlock { split: usize },
}

impl ZeroPattern {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ZeroPattern::Prefix { .. } => Ok(()),
            ZeroPattern::Residue { a, b } if a < b => Ok(()),
            ZeroPattern::Residue { a, b } => Err(Error::InvalidPattern(format!(
                "residue pattern needs a < b, got a={a}, b={b}"
            ))),
            ZeroPattern::SupportIn { b } if b >= 1 => Ok(()),
            ZeroPattern::SupportIn { .. } => {
                Err(Error::InvalidPattern("supportIn needs b >= 1".into()))
            }
            ZeroPattern::RightBlock { split } if split >= 1 => Ok(()),
            ZeroPattern::RightBlock { .. } => Err(Error::InvalidPattern(
                "rightBlock with split 0 is the zero subspace".into(),
            )),
        }
    }

    #[inline]
    pub fn is_forbidden(&self, i: usize) -> bool {
        match *self {
            ZeroPattern::Prefix { m } => i < m,
            ZeroPattern::Residue { a, b } => i >= a && (i - a) % b == 0,
            ZeroPattern::SupportIn { b } => i % b != 0,
            ZeroPattern::RightBlock { split } => i >= split,
        }
    }

    #[inline]
    pub fn is_allowed(&self, i: usize) -> bool {
        !self.is_forbidden(i)
    }

    /// Allowed indices in `0..bound`, increasing.
    pub fn allowed_below(&self, bound: usize) -> Vec<usize> {
        (0..bound).filter(|&i| self.is_allowed(i)).collect()
    }
}

/// `sqrt(Σ_{i forbidden} |v_i|²)`; zero exactly when `v` lies in the subspace.
pub fn membership_defect(v: &SeqVec, p: &ZeroPattern) -> f64 {
    v.iter()
        .filter(|&(i, _)| p.is_forbidden(i))
        .map(|(_, z)| z.norm_sqr())
        .fold(0.0, |acc, x| acc + x)
        .sqrt()
}

/// Defect with respect to the intersection of several patterns.
pub fn membership_defect_all(v: &SeqVec, patterns: &[ZeroPattern]) -> f64 {
    v.iter()
        .filter(|&(i, _)| patterns.iter().any(|p| p.is_forbidden(i)))
        .map(|(_, z)| z.norm_sqr())
        .fold(0.0, |acc, x| acc + x)
        .sqrt()
}

/// Orthogonal projection onto the subspace: zeroes every forbidden index.
pub fn project(v: &SeqVec, p: &ZeroPattern) -> SeqVec {
    v.restrict(|i| p.is_allowed(i))
}

/// Parameters of the dyadic dense family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DenseFamilySpec {
    pub pattern: ZeroPattern,
    pub support_bound: usize,
    pub resolution_level: u32,
}

/// Levels beyond this would overflow the grid arithmetic.
const MAX_LEVEL: u32 = 40;

impl DenseFamilySpec {
    pub fn new(pattern: ZeroPattern, support_bound: usize, resolution_level: u32) -> Result<Self> {
        pattern.validate()?;
        if pattern.allowed_below(support_bound).is_empty() {
            return Err(Error::InvalidPattern(format!(
                "no allowed index below support bound {support_bound}"
            )));
        }
        if resolution_level > MAX_LEVEL {
            return Err(Error::InvalidArgument(format!(
                "resolution level capped at {MAX_LEVEL}"
            )));
        }
        Ok(DenseFamilySpec {
            pattern,
            support_bound,
            resolution_level,
        })
    }

    fn allowed(&self) -> Vec<usize> {
        self.pattern.allowed_below(self.support_bound)
    }

    /// Number of family members enumerated at `level` (excluding the leading zero vector).
    pub fn level_size(&self, level: u32) -> u128 {
        let g = grid_size(level);
        (1..=self.allowed().len()).fold(0u128, |acc, s| acc.saturating_add(block_size(g, s)))
    }

    /// Half-open index range `[start, end)` of the members at `level`.
    pub fn level_range(&self, level: u32) -> (u128, u128) {
        let start = 1 + (0..level).fold(0u128, |acc, l| acc.saturating_add(self.level_size(l)));
        (start, start.saturating_add(self.level_size(level)))
    }

    /// All members at `level` with norm at most 1, plus the zero vector.
    ///
    /// This is the dyadic net of the unit ball of the subspace used by the
    /// density certificate.
    pub fn unit_ball_net(&self, level: u32) -> Vec<SeqVec> {
        let allowed = self.allowed();
        let g = grid_size(level);
        let mut out = vec![SeqVec::zero()];
        for s in 1..=allowed.len() {
            let count = block_size(g, s);
            let mut idx = 0u128;
            while idx < count {
                let v = unrank(level, &allowed[..s], idx);
                if v.norm_sqr() <= 1.0 {
                    out.push(v);
                }
                idx += 1;
            }
        }
        out
    }
}

/// Side length of the per-component grid `{-2^l, ..., 2^l}`.
fn grid_width(level: u32) -> u128 {
    (1u128 << (level + 1)) + 1
}

/// Number of complex grid values at `level`.
fn grid_size(level: u32) -> u128 {
    let w = grid_width(level);
    w * w
}

/// Vectors supported on the first `s` allowed indices whose last coordinate is nonzero.
fn block_size(g: u128, s: usize) -> u128 {
    (1..s).fold(g - 1, |acc, _| acc.saturating_mul(g))
}

fn digit_value(level: u32, digit: u128) -> Complex64 {
    let w = grid_width(level);
    let half = 1i128 << level;
    let a = (digit / w) as i128 - half;
    let b = (digit % w) as i128 - half;
    let scale = (-(level as i32) as f64).exp2();
    Complex64::new(a as f64 * scale, b as f64 * scale)
}

/// Lexicographic unranking of a grid point over `indices`, first index most
/// significant, last coordinate drawn from the nonzero grid values.
fn unrank(level: u32, indices: &[usize], idx: u128) -> SeqVec {
    let g = grid_size(level);
    let w = grid_width(level);
    let zero_digit = (1u128 << level) * w + (1u128 << level);
    let s = indices.len();
    let mut coords = vec![0u128; s];
    let last = idx % (g - 1);
    coords[s - 1] = if last < zero_digit { last } else { last + 1 };
    let mut rest = idx / (g - 1);
    for pos in (0..s - 1).rev() {
        coords[pos] = rest % g;
        rest /= g;
    }
    SeqVec::from_entries(
        indices
            .iter()
            .zip(coords)
            .map(|(&i, d)| (i, digit_value(level, d))),
    )
}

/// The `j`-th member of the dense family of the subspace.
///
/// `j = 0` is the zero vector. After it come the members at level 0, then
/// level 1, and so on without bound; within a level, blocks of growing support
/// (the first `s` allowed indices below the support bound, last one nonzero),
/// each enumerated lexicographically over the grid `(a + b i) 2^-level`,
/// `|a|, |b| <= 2^level`. Every member lies in the subspace exactly.
pub fn dense_family(spec: &DenseFamilySpec, j: u64) -> SeqVec {
    if j == 0 {
        return SeqVec::zero();
    }
    let allowed = spec.allowed();
    let mut r = (j - 1) as u128;
    for level in 0..=MAX_LEVEL {
        let g = grid_size(level);
        for s in 1..=allowed.len() {
            let count = block_size(g, s);
            if r < count {
                return unrank(level, &allowed[..s], r);
            }
            r -= count;
        }
    }
    unreachable!("u64 index exhausted the enumeration")
}

/// Truncation-scale invariance of the subspace under `op^n`: every allowed
/// basis vector below `dim` must be mapped exactly into the subspace.
///
/// Basis vectors outside the domain of a finite matrix are skipped.
pub fn invariance_check(op: &OperatorSpec, p: &ZeroPattern, n: usize, dim: usize) -> bool {
    invariance_check_all(op, std::slice::from_ref(p), n, dim)
}

/// [`invariance_check`] for the intersection of several patterns.
pub fn invariance_check_all(
    op: &OperatorSpec,
    patterns: &[ZeroPattern],
    n: usize,
    dim: usize,
) -> bool {
    let limit = op.as_matrix().map_or(dim, |m| m.dim().min(dim));
    (0..limit)
        .filter(|&i| patterns.iter().all(|p| p.is_allowed(i)))
        .all(|i| {
            apply_power(op, n, &SeqVec::basis(i))
                .map(|w| membership_defect_all(&w, patterns) == 0.0)
                .unwrap_or(false)
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn defect_examples() {
        let prefix = ZeroPattern::Prefix { m: 3 };
        assert_eq!(membership_defect(&SeqVec::basis(0), &prefix), 1.0);
        assert_eq!(membership_defect(&SeqVec::basis(5), &prefix), 0.0);
        let even = ZeroPattern::Residue { a: 0, b: 2 };
        let v = SeqVec::basis(0).add(&SeqVec::basis(2));
        assert_eq!(membership_defect(&v, &even), 2f64.sqrt());
    }

    #[test]
    fn pattern_predicates() {
        let r = ZeroPattern::Residue { a: 1, b: 3 };
        let forbidden: Vec<usize> = (0..10).filter(|&i| r.is_forbidden(i)).collect();
        assert_eq!(forbidden, vec![1, 4, 7]);
        let s = ZeroPattern::SupportIn { b: 3 };
        assert_eq!(s.allowed_below(10), vec![0, 3, 6, 9]);
        let rb = ZeroPattern::RightBlock { split: 4 };
        assert_eq!(rb.allowed_below(10), vec![0, 1, 2, 3]);
        assert!(ZeroPattern::Residue { a: 2, b: 2 }.validate().is_err());
        assert!(ZeroPattern::SupportIn { b: 0 }.validate().is_err());
        assert!(ZeroPattern::RightBlock { split: 0 }.validate().is_err());
    }

    #[test]
    fn pattern_json_shape() {
        let cases = [
            (r#"{"kind":"prefix","m":3}"#, ZeroPattern::Prefix { m: 3 }),
            (
                r#"{"kind":"residue","a":0,"b":2}"#,
                ZeroPattern::Residue { a: 0, b: 2 },
            ),
            (
                r#"{"kind":"supportIn","b":2}"#,
                ZeroPattern::SupportIn { b: 2 },
            ),
            (
                r#"{"kind":"rightBlock","split":64}"#,
                ZeroPattern::RightBlock { split: 64 },
            ),
        ];
        for (json, want) in cases {
            assert_eq!(serde_json::from_str::<ZeroPattern>(json).unwrap(), want);
            assert_eq!(serde_json::to_string(&want).unwrap(), json);
        }
    }

    #[test]
    fn project_examples() {
        let prefix = ZeroPattern::Prefix { m: 3 };
        let v = SeqVec::basis(0).add(&SeqVec::basis(5));
        assert_eq!(project(&v, &prefix), SeqVec::basis(5));
    }

    #[test]
    fn family_starts_with_zero_and_stays_in_subspace() {
        let spec = DenseFamilySpec::new(ZeroPattern::Residue { a: 0, b: 2 }, 8, 1).unwrap();
        assert!(dense_family(&spec, 0).is_zero());
        for j in 0..=10_000 {
            assert_eq!(
                membership_defect(&dense_family(&spec, j), &spec.pattern),
                0.0,
                "j={j}"
            );
        }
    }

    #[test]
    fn level_one_contains_half_e3() {
        // Exhaustive scan of the level-1 block against a hand-built target.
        let spec = DenseFamilySpec::new(ZeroPattern::Prefix { m: 3 }, 6, 1).unwrap();
        let (start, end) = spec.level_range(1);
        assert_eq!(spec.level_size(0), 8 + 8 * 9 + 8 * 81);
        assert_eq!(end - start, 24 + 24 * 25 + 24 * 625);
        let target = SeqVec::basis(3).scale(c(0.5));
        let hit = (start..end).find(|&j| dense_family(&spec, j as u64) == target);
        assert!(hit.is_some());
    }

    #[test]
    fn family_is_injective_within_a_level() {
        let spec = DenseFamilySpec::new(ZeroPattern::Prefix { m: 3 }, 6, 0).unwrap();
        let (start, end) = spec.level_range(0);
        let mut seen = HashSet::new();
        for j in start..end {
            let v = dense_family(&spec, j as u64);
            assert!(!v.is_zero());
            assert!(seen.insert(format!("{:?}", v)), "duplicate at j={j}");
        }
    }

    #[test]
    fn unit_ball_net_level_zero() {
        let spec = DenseFamilySpec::new(ZeroPattern::Prefix { m: 1 }, 4, 0).unwrap();
        // zero plus ±1, ±i on each of the 3 allowed coordinates
        let net = spec.unit_ball_net(0);
        assert_eq!(net.len(), 1 + 4 * 3);
        assert!(net.iter().all(|v| v.norm() <= 1.0));
    }

    #[test]
    fn family_approximates_unit_ball_vectors() {
        // Rounding a vector to the level-l grid gives a member within
        // sqrt(2m) * 2^-(l+1); check that the enumeration reaches it.
        let spec = DenseFamilySpec::new(ZeroPattern::Prefix { m: 2 }, 4, 0).unwrap();
        let target = SeqVec::from_entries([(2, Complex64::new(0.3, -0.2)), (3, c(0.55))]);
        let (start, end) = spec.level_range(3);
        let best = (start..end)
            .map(|j| dense_family(&spec, j as u64).distance(&target))
            .fold(f64::INFINITY, f64::min);
        assert!(
            best <= (4f64).sqrt() * 0.5f64.powi(4) + 1e-15,
            "best={best}"
        );
    }

    #[test]
    fn invariance_examples() {
        let b = OperatorSpec::backward_shift(1);
        let even = ZeroPattern::Residue { a: 0, b: 2 };
        assert!(invariance_check(&b, &even, 2, 64));
        assert!(!invariance_check(&b, &even, 1, 64));
        let prefix = ZeroPattern::Prefix { m: 3 };
        for n in 1..=32 {
            assert!(!invariance_check(&b, &prefix, n, 64), "n={n}");
        }
        assert!(invariance_check(&b, &prefix, 0, 64));
    }

    proptest! {
        #[test]
        fn projection_pythagoras(es in prop::collection::vec((0usize..30, -1.0f64..1.0, -1.0f64..1.0), 0..10),
                                 m in 0usize..10, b in 2usize..5) {
            let v = SeqVec::from_entries(es.into_iter().map(|(i, x, y)| (i, Complex64::new(x, y))));
            for p in [ZeroPattern::Prefix { m }, ZeroPattern::Residue { a: 1, b }, ZeroPattern::SupportIn { b }] {
                let pv = project(&v, &p);
                let d = membership_defect(&v, &p);
                prop_assert!((v.norm_sqr() - (pv.norm_sqr() + d * d)).abs() <= 1e-12);
                prop_assert_eq!(project(&pv, &p), pv.clone());
                prop_assert_eq!(membership_defect(&pv, &p), 0.0);
                prop_assert!(pv.norm() <= v.norm());
            }
        }

        #[test]
        fn forward_shift_preserves_support_in(b in 1usize..6, es in prop::collection::vec((0usize..20, -1.0f64..1.0), 0..8)) {
            let p = ZeroPattern::SupportIn { b };
            let v = SeqVec::from_entries(es.into_iter().map(|(k, x)| (k * b, Complex64::new(x, 0.0))));
            prop_assert_eq!(membership_defect(&v, &p), 0.0);
            let sv = crate::seqspace::apply(&OperatorSpec::forward_shift(b), &v).unwrap();
            prop_assert_eq!(membership_defect(&sv, &p), 0.0);
        }
    }
}
