//! Curve families F1, F2 and polynomial families F4.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::arith::integer_root;
use super::{conductor, is_semistable, root_number, Curve};
use crate::error::{invalid, Result};

fn box_bounds(x: f64) -> (i64, i64) {
    (integer_root(x, 3), integer_root(x, 2))
}

/// `E_{a,b}` with `|a| ≤ X^{1/3}`, `|b| ≤ X^{1/2}`, singular pairs skipped.
pub fn family_f1(x: f64) -> impl Iterator<Item = Curve> {
    let (amax, bmax) = box_bounds(x);
    (-amax..=amax).flat_map(move |a| (-bmax..=bmax).filter_map(move |b| Curve::new(a, b).ok()))
}

/// `E_{a,b²}` with `|a| ≤ X^{1/3}`, `1 ≤ b`, `b² ≤ X^{1/2}`; each has the point `(0, b)`.
pub fn family_f2(x: f64) -> impl Iterator<Item = Curve> {
    let amax = integer_root(x, 3);
    let bmax = integer_root(x, 4);
    (-amax..=amax).flat_map(move |a| (1..=bmax).filter_map(move |b| Curve::new(a, b * b).ok()))
}

fn poly_eval(c: &[i64], t: i128) -> i128 {
    c.iter().rev().fold(0i128, |acc, &k| acc.saturating_mul(t).saturating_add(k as i128))
}

fn poly_mul(x: &[i128], y: &[i128]) -> Vec<i128> {
    let mut out = vec![0i128; (x.len() + y.len()).saturating_sub(1)];
    for (i, &u) in x.iter().enumerate() {
        for (j, &v) in y.iter().enumerate() {
            out[i + j] += u * v;
        }
    }
    out
}

fn degree(c: &[i64]) -> Option<usize> {
    c.iter().rposition(|&k| k != 0)
}

/// First `t` beyond which `|c(t)| > bound` for every larger `t`, if `c` is nonconstant.
fn escape_point(c: &[i64], bound: i64) -> Option<i128> {
    let d = degree(c)?;
    if d == 0 {
        return None;
    }
    let lead = c[d].unsigned_abs() as i128;
    let rest: i128 = c[..d].iter().map(|k| k.unsigned_abs() as i128).sum();
    Some((rest + bound as i128) / lead + 2)
}

/// `E_{a(t), b(t)}` for `t ≥ 1` with `|a(t)| ≤ X^{1/3}`, `|b(t)| ≤ X^{1/2}`.
/// Coefficients are listed from the constant term up.
pub fn family_f4(a_poly: &[i64], b_poly: &[i64], x: f64) -> Result<impl Iterator<Item = Curve>> {
    let wide = |c: &[i64]| c.iter().map(|&k| k as i128).collect::<Vec<_>>();
    let (a, b) = (wide(a_poly), wide(b_poly));
    let a3 = poly_mul(&poly_mul(&a, &a), &a);
    let b2 = poly_mul(&b, &b);
    let n = a3.len().max(b2.len());
    let generic_disc_zero =
        (0..n).all(|i| 4 * a3.get(i).copied().unwrap_or(0) + 27 * b2.get(i).copied().unwrap_or(0) == 0);
    if generic_disc_zero {
        return invalid("degenerate parametrization: discriminant vanishes identically");
    }
    let (amax, bmax) = box_bounds(x);
    let stop = match (escape_point(a_poly, amax), escape_point(b_poly, bmax)) {
        (Some(s), Some(u)) => s.min(u),
        (Some(s), None) | (None, Some(s)) => s,
        (None, None) => return invalid("constant parametrization is not a family"),
    };
    let (ap, bp) = (a_poly.to_vec(), b_poly.to_vec());
    Ok((1..=stop).filter_map(move |t| {
        let (av, bv) = (poly_eval(&ap, t), poly_eval(&bp, t));
        if av.abs() > amax as i128 || bv.abs() > bmax as i128 {
            return None;
        }
        Curve::new(av as i64, bv as i64).ok()
    }))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    F1,
    F2,
    F4 { a_poly: Vec<i64>, b_poly: Vec<i64> },
}

/// How the size parameter `X` bounds the family.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyOrdering {
    /// Coefficient box of discriminant scale `X`.
    #[default]
    Discriminant,
    /// Same box, additionally keeping only conductors `N ≤ X`.
    Conductor,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    pub x: f64,
    #[serde(default)]
    pub semistable_only: bool,
    #[serde(default)]
    pub ordering: FamilyOrdering,
}

impl FamilySpec {
    pub fn new(kind: FamilyKind, x: f64) -> Result<Self> {
        if !(x >= 1.0) || !x.is_finite() {
            return invalid(format!("family size X must be >= 1, got {x}"));
        }
        Ok(Self { kind, x, semistable_only: false, ordering: FamilyOrdering::Discriminant })
    }

    pub fn semistable(mut self) -> Self {
        self.semistable_only = true;
        self
    }

    /// Number of coefficient pairs in the box, before any filter.
    pub fn box_size(&self) -> u128 {
        let amax = integer_root(self.x, 3) as u128;
        match &self.kind {
            FamilyKind::F1 => (2 * amax + 1) * (2 * integer_root(self.x, 2) as u128 + 1),
            FamilyKind::F2 => (2 * amax + 1) * integer_root(self.x, 4) as u128,
            FamilyKind::F4 { .. } => self.raw().map_or(0, |v| v.len() as u128),
        }
    }

    fn raw(&self) -> Result<Vec<Curve>> {
        Ok(match &self.kind {
            FamilyKind::F1 => family_f1(self.x).collect(),
            FamilyKind::F2 => family_f2(self.x).collect(),
            FamilyKind::F4 { a_poly, b_poly } => family_f4(a_poly, b_poly, self.x)?.collect(),
        })
    }

    fn keep(&self, c: &Curve) -> bool {
        (!self.semistable_only || is_semistable(c))
            && (self.ordering == FamilyOrdering::Discriminant || conductor(c) as f64 <= self.x)
    }

    fn filter(&self, curves: Vec<Curve>) -> Vec<Curve> {
        curves.into_par_iter().filter(|c| self.keep(c)).collect()
    }

    /// Every member, in enumeration order, after filters.
    pub fn enumerate(&self) -> Result<Vec<Curve>> {
        Ok(self.filter(self.raw()?))
    }

    /// Up to `count` distinct members chosen with `seed`. Small boxes are enumerated and
    /// subsampled in enumeration order; large ones are drawn uniformly by rejection.
    pub fn sample(&self, count: usize, seed: u64) -> Result<Vec<Curve>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let small = matches!(self.kind, FamilyKind::F4 { .. }) || self.box_size() <= 2_000_000;
        if small {
            let all = self.enumerate()?;
            if all.len() <= count {
                return Ok(all);
            }
            let mut idx = rand::seq::index::sample(&mut rng, all.len(), count).into_vec();
            idx.sort_unstable();
            return Ok(idx.into_iter().map(|i| all[i]).collect());
        }
        let amax = integer_root(self.x, 3);
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(count);
        let batch = 4096;
        let max_draws = 2000 * count.max(1) as u64;
        let mut draws = 0u64;
        while out.len() < count && draws < max_draws {
            let proposals: Vec<Curve> = (0..batch)
                .filter_map(|_| {
                    let a = rng.random_range(-amax..=amax);
                    let b = match self.kind {
                        FamilyKind::F2 => rng.random_range(1..=integer_root(self.x, 4)).pow(2),
                        _ => {
                            let bmax = integer_root(self.x, 2);
                            rng.random_range(-bmax..=bmax)
                        }
                    };
                    Curve::new(a, b).ok()
                })
                .filter(|c| seen.insert(*c))
                .collect();
            draws += batch;
            for c in self.filter(proposals) {
                if out.len() < count {
                    out.push(c);
                }
            }
        }
        Ok(out)
    }
}

/// `F = F⁺ ∪ F⁻`, plus curves whose sign could not be determined.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SignPartition {
    pub plus: Vec<Curve>,
    pub minus: Vec<Curve>,
    pub undetermined: Vec<Curve>,
}

/// Routes curves by root number; `fallback` is tried when the closed form is unsupported.
pub fn partition_by_sign(
    curves: &[Curve],
    fallback: Option<&(dyn Fn(&Curve) -> Option<i8> + Sync)>,
) -> SignPartition {
    let signs: Vec<Option<i8>> = curves
        .par_iter()
        .map(|c| root_number(c).ok().or_else(|| fallback.and_then(|f| f(c))))
        .collect();
    let mut out = SignPartition::default();
    for (c, s) in curves.iter().zip(signs) {
        match s {
            Some(1) => out.plus.push(*c),
            Some(-1) => out.minus.push(*c),
            _ => out.undetermined.push(*c),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f1_box_at_64() {
        let v: Vec<_> = family_f1(64.0).collect();
        assert!(v.iter().all(|c| c.a.abs() <= 4 && c.b.abs() <= 8));
        let singular = (-4i64..=4)
            .flat_map(|a| (-8i64..=8).map(move |b| (a, b)))
            .filter(|&(a, b)| 4 * a.pow(3) + 27 * b * b == 0)
            .count();
        assert_eq!(v.len(), 9 * 17 - singular);
    }

    #[test]
    fn f2_marked_point_and_containment() {
        let f2: Vec<_> = family_f2(1e4).collect();
        let f1: HashSet<_> = family_f1(1e4).collect();
        for c in &f2 {
            let b = (c.b as f64).sqrt() as i64;
            assert_eq!(b * b, c.b);
            assert!(f1.contains(c));
        }
        // (-12, 16) is the only singular pair in the box.
        assert_eq!(f2.len(), 43 * 10 - 1);
    }

    #[test]
    fn f4_enumeration() {
        let v: Vec<_> = family_f4(&[0, 1], &[1], 1000.0).unwrap().collect();
        assert_eq!(v.iter().map(|c| c.a).collect::<Vec<_>>(), (1..=10).collect::<Vec<_>>());
        // a(T) = -3T², b(T) = 2T³ is singular for every t.
        assert!(family_f4(&[0, 0, -3], &[0, 0, 0, 2], 1e6).is_err());
        assert!(family_f4(&[1], &[2], 1e6).is_err());
    }

    #[test]
    fn sampling_is_seeded() {
        let spec = FamilySpec::new(FamilyKind::F1, 1e12).unwrap();
        let a = spec.sample(50, 7).unwrap();
        assert_eq!(a, spec.sample(50, 7).unwrap());
        assert_ne!(a, spec.sample(50, 8).unwrap());
        assert_eq!(a.len(), 50);
    }

    #[test]
    fn partition_is_exhaustive() {
        let curves: Vec<_> = family_f1(1e3).collect();
        let p = partition_by_sign(&curves, None);
        assert_eq!(p.plus.len() + p.minus.len() + p.undetermined.len(), curves.len());
        let semistable = FamilySpec::new(FamilyKind::F1, 1e5).unwrap().semistable().enumerate().unwrap();
        let p = partition_by_sign(&semistable, None);
        assert!(p.undetermined.is_empty());
        assert!(!p.plus.is_empty() && !p.minus.is_empty());
        let always_plus = |_: &Curve| Some(1i8);
        let p = partition_by_sign(&curves, Some(&always_plus));
        assert!(p.undetermined.is_empty());
    }
}
