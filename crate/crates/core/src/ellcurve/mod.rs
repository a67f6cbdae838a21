//! Elliptic curves `y² = x³ + ax + b`: reduction data, conductors, root
//! numbers, Dirichlet coefficients and the families F1, F2, F4.

pub mod arith;
mod family;
mod tate;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::special::ln_gamma_real;
use arith::{factor, modp, smallest_factor_sieve, valuation, SquareTable};

pub use family::{
    family_f1, family_f2, family_f4, partition_by_sign, FamilyKind, FamilyOrdering, FamilySpec,
    SignPartition,
};
pub use tate::{tate, Kodaira, LocalReduction, ReductionType, Weierstrass};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Curve {
    pub a: i64,
    pub b: i64,
}

impl fmt::Display for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.a, self.b)
    }
}

/// `-16(4a³ + 27b²)`, rejecting singular curves.
pub fn discriminant(a: i64, b: i64) -> Result<i128> {
    let (a, b) = (a as i128, b as i128);
    let d = -16 * (4 * a * a * a + 27 * b * b);
    if d == 0 {
        return Err(Error::SingularCurve { a: a as i64, b: b as i64 });
    }
    Ok(d)
}

impl Curve {
    pub fn new(a: i64, b: i64) -> Result<Self> {
        discriminant(a, b)?;
        Ok(Self { a, b })
    }

    pub fn discriminant(&self) -> i128 {
        -16 * (4 * (self.a as i128).pow(3) + 27 * (self.b as i128).pow(2))
    }

    pub fn model(&self) -> Weierstrass {
        Weierstrass::short(self.a, self.b)
    }
}

/// Short model with every removable power of `p ≥ 5` divided out.
fn p_minimal(curve: &Curve, p: u64) -> (i128, i128) {
    let p = p as i128;
    let (mut a, mut b) = (curve.a as i128, curve.b as i128);
    while a % p.pow(4) == 0 && b % p.pow(6) == 0 {
        a /= p.pow(4);
        b /= p.pow(6);
    }
    (a, b)
}

/// Reduction data at one prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalData {
    pub p: u64,
    pub reduction: ReductionType,
    pub conductor_exponent: u32,
    /// Local Euler factor coefficient `a_p`.
    pub ap: i64,
}

fn ap_short_sum(a: i128, b: i128, table: &SquareTable) -> i64 {
    let p = table.prime();
    let (a, b) = (modp(a, p as i128) as u64, modp(b, p as i128) as u64);
    // f(x) = x³ + ax + b with forward differences.
    let mut f = b;
    let mut d1 = (1 + a) % p;
    let mut d2 = 6 % p;
    let six = 6 % p;
    let mut s = 0i64;
    for _ in 0..p {
        s += table.get(f) as i64;
        f += d1;
        if f >= p {
            f -= p;
        }
        d1 += d2;
        if d1 >= p {
            d1 -= p;
        }
        d2 += six;
        if d2 >= p {
            d2 -= p;
        }
    }
    -s
}

/// Local data at `p`: Tate's algorithm for `p ∈ {2, 3}`, the valuation shortcut otherwise.
pub fn local_data(curve: &Curve, p: u64) -> LocalData {
    if p <= 3 {
        let t = tate(curve.model(), p);
        let ap = match t.reduction {
            ReductionType::Good => p as i64 - t.minimal.affine_points(p) as i64,
            ReductionType::MultSplit => 1,
            ReductionType::MultNonsplit => -1,
            ReductionType::Additive => 0,
        };
        return LocalData { p, reduction: t.reduction, conductor_exponent: t.conductor_exponent, ap };
    }
    let (a, b) = p_minimal(curve, p);
    let pi = p as i128;
    let disc = -16 * (4 * a * a * a + 27 * b * b);
    if disc % pi != 0 {
        let ap = ap_short_sum(a, b, &SquareTable::new(p));
        return LocalData { p, reduction: ReductionType::Good, conductor_exponent: 0, ap };
    }
    if a % pi == 0 {
        return LocalData { p, reduction: ReductionType::Additive, conductor_exponent: 2, ap: 0 };
    }
    // Node at x0 with a = -3x0², b = 2x0³; tangent slopes² = 3x0, and 6b = 3x0·(2x0)².
    let split = arith::legendre(6 * b, p) == 1;
    let (reduction, ap) = if split {
        (ReductionType::MultSplit, 1)
    } else {
        (ReductionType::MultNonsplit, -1)
    };
    LocalData { p, reduction, conductor_exponent: 1, ap }
}

pub fn reduction_type(curve: &Curve, p: u64) -> ReductionType {
    local_data(curve, p).reduction
}

/// `a_p` at a prime of good reduction.
pub fn ap_good(curve: &Curve, p: u64) -> Result<i64> {
    if !arith::is_prime(p) {
        return invalid(format!("{p} is not prime"));
    }
    let d = local_data(curve, p);
    if d.reduction != ReductionType::Good {
        return Err(Error::BadPrime { p });
    }
    Ok(d.ap)
}

/// `a_p` at a good prime by enumerating affine points of a `p`-minimal model.
pub fn ap_naive(curve: &Curve, p: u64) -> Result<i64> {
    let model = if p <= 3 {
        let t = tate(curve.model(), p);
        if t.reduction != ReductionType::Good {
            return Err(Error::BadPrime { p });
        }
        t.minimal
    } else {
        let (a, b) = p_minimal(curve, p);
        let m = Weierstrass { a1: 0, a2: 0, a3: 0, a4: a, a6: b };
        if m.discriminant() % p as i128 == 0 {
            return Err(Error::BadPrime { p });
        }
        m
    };
    Ok(p as i64 - model.affine_points(p) as i64)
}

/// Local data at every prime dividing the discriminant where reduction is bad.
pub fn bad_primes(curve: &Curve) -> Vec<LocalData> {
    factor(curve.discriminant().unsigned_abs())
        .into_iter()
        .map(|(p, _)| local_data(curve, p as u64))
        .filter(|d| d.reduction != ReductionType::Good)
        .collect()
}

pub fn conductor(curve: &Curve) -> u64 {
    bad_primes(curve)
        .iter()
        .map(|d| d.p.pow(d.conductor_exponent))
        .product()
}

/// All bad reduction multiplicative. Cheaper than a full factorization.
pub fn is_semistable(curve: &Curve) -> bool {
    if [2, 3].iter().any(|&p| local_data(curve, p).reduction == ReductionType::Additive) {
        return false;
    }
    let g = arith::gcd(curve.a as i128, curve.b as i128);
    if g == 0 {
        return false;
    }
    factor(g.unsigned_abs()).into_iter().all(|(p, _)| {
        if p <= 3 {
            return true;
        }
        let (a, b) = p_minimal(curve, p as u64);
        let p = p as i128;
        !(a % p == 0 && b % p == 0)
    })
}

fn sign_from_local(local: &[LocalData]) -> Result<i8> {
    let mut w = -1i8;
    for d in local {
        if d.reduction == ReductionType::Additive {
            return Err(Error::UnsupportedRootNumber { p: d.p });
        }
        w *= -(d.ap as i8);
    }
    Ok(w)
}

/// Global root number of a semistable curve, `-∏(-a_p)`.
pub fn root_number(curve: &Curve) -> Result<i8> {
    sign_from_local(&bad_primes(curve))
}

fn coefficient_table(curve: &Curve, local: &[LocalData], cutoff: usize) -> Vec<i64> {
    let mut a = vec![0i64; cutoff + 1];
    if cutoff == 0 {
        return a;
    }
    a[1] = 1;
    let spf = smallest_factor_sieve(cutoff);
    let bad = |p: u64| local.iter().find(|d| d.p == p);
    for n in 2..=cutoff {
        let p = spf[n] as usize;
        if p == n {
            a[p] = match bad(p as u64) {
                Some(d) => d.ap,
                None if p <= 3 => local_data(curve, p as u64).ap,
                None => ap_short_sum(curve.a as i128, curve.b as i128, &SquareTable::new(p as u64)),
            };
            continue;
        }
        let mut m = n;
        let mut pk = 1;
        while m % p == 0 {
            m /= p;
            pk *= p;
        }
        if m > 1 {
            a[n] = a[pk] * a[m];
        } else {
            let prev = n / p;
            a[n] = if bad(p as u64).is_some() {
                a[p] * a[prev]
            } else {
                a[p] * a[prev] - p as i64 * a[prev / p]
            };
        }
    }
    a
}

/// `a_0..=a_cutoff` with `a_0 = 0`, `a_1 = 1`.
pub fn dirichlet_coefficients(curve: &Curve, cutoff: usize) -> Vec<i64> {
    coefficient_table(curve, &bad_primes(curve), cutoff)
}

/// Gamma data `γ(s) = Q^s ∏ Γ(s/2 + μ_j)`; constant factors are dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaFactor {
    pub q: f64,
    pub mu: Vec<num_complex::Complex64>,
    pub degree: usize,
}

impl GammaFactor {
    /// Degree-2 data for conductor `n`: `Γ(s + ½)` split by duplication.
    pub fn for_conductor(n: u64) -> Self {
        use num_complex::Complex64;
        Self {
            q: (n as f64).sqrt() / std::f64::consts::PI,
            mu: vec![Complex64::from(0.25), Complex64::from(0.75)],
            degree: 2,
        }
    }

    /// `log γ(s)` for real `s`.
    pub fn ln_gamma_factor(&self, s: f64) -> f64 {
        s * self.q.ln() + self.mu.iter().map(|m| ln_gamma_real(s / 2.0 + m.re)).sum::<f64>()
    }

    /// `|X'(½)|` with `X(s) = γ(1-s)/γ(s)`, by Richardson-extrapolated central differences.
    pub fn refined_conductor(&self) -> f64 {
        let x = |s: f64| (self.ln_gamma_factor(1.0 - s) - self.ln_gamma_factor(s)).exp();
        let d = |h: f64| (x(0.5 + h) - x(0.5 - h)) / (2.0 * h);
        let mut h = 1e-2;
        let mut prev = f64::NAN;
        for _ in 0..6 {
            let r = (4.0 * d(h / 2.0) - d(h)) / 3.0;
            if (r - prev).abs() <= 1e-11 * r.abs() {
                return r.abs();
            }
            prev = r;
            h /= 2.0;
        }
        prev.abs()
    }
}

/// Arithmetic data of `L(s, E)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LData {
    pub curve: Curve,
    pub conductor: u64,
    /// `None` when the closed form does not apply and no numeric sign was set.
    pub root_number: Option<i8>,
    pub coefficients: Vec<i64>,
    pub gamma: GammaFactor,
    pub refined_conductor: f64,
    pub local: Vec<LocalData>,
}

impl LData {
    pub fn new(curve: Curve, cutoff: usize) -> Self {
        let local = bad_primes(&curve);
        let conductor = local.iter().map(|d| d.p.pow(d.conductor_exponent)).product();
        let gamma = GammaFactor::for_conductor(conductor);
        Self {
            curve,
            conductor,
            root_number: sign_from_local(&local).ok(),
            coefficients: coefficient_table(&curve, &local, cutoff),
            refined_conductor: gamma.refined_conductor(),
            gamma,
            local,
        }
    }

    pub fn with_root_number(mut self, sign: i8) -> Self {
        self.root_number = Some(sign);
        self
    }

    pub fn sign(&self) -> Result<i8> {
        self.root_number.ok_or_else(|| {
            let p = self
                .local
                .iter()
                .find(|d| d.reduction == ReductionType::Additive)
                .map_or(0, |d| d.p);
            Error::UnsupportedRootNumber { p }
        })
    }

    pub fn cutoff(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    /// Grows the coefficient table to at least `cutoff`.
    pub fn ensure_coefficients(&mut self, cutoff: usize) {
        if cutoff > self.cutoff() {
            self.coefficients = coefficient_table(&self.curve, &self.local, cutoff);
        }
    }

    /// `Q = √N / 2π` of the analytic normalization `Λ(s) = Q^s Γ(s+½) L(s)`.
    pub fn analytic_q(&self) -> f64 {
        (self.conductor as f64).sqrt() / (2.0 * std::f64::consts::PI)
    }

    pub fn summary(&self) -> CurveSummary {
        CurveSummary {
            a: self.curve.a,
            b: self.curve.b,
            delta: self.curve.discriminant().to_string(),
            conductor: self.conductor,
            root_number: self.root_number,
            c_l: self.refined_conductor,
        }
    }
}

/// One row of a curve table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSummary {
    pub a: i64,
    pub b: i64,
    pub delta: String,
    pub conductor: u64,
    pub root_number: Option<i8>,
    pub c_l: f64,
}

pub fn summaries_to_csv(rows: &[CurveSummary]) -> String {
    let mut out = String::from("a,b,delta,conductor,root_number,c_L\n");
    for r in rows {
        let w = r.root_number.map_or(String::from("NA"), |w| w.to_string());
        out.push_str(&format!("{},{},{},{},{},{:.12}\n", r.a, r.b, r.delta, r.conductor, w, r.c_l));
    }
    out
}

/// `ord_p(N)` of a computed conductor, for sanity checks.
pub fn conductor_valuation(n: u64, p: u64) -> u32 {
    valuation(n as i128, p as i128)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(a: i64, b: i64) -> Curve {
        Curve::new(a, b).unwrap()
    }

    #[test]
    fn discriminants() {
        assert_eq!(discriminant(1, 1).unwrap(), -496);
        assert_eq!(discriminant(-1, 0).unwrap(), 64);
        assert!(matches!(discriminant(0, 0), Err(Error::SingularCurve { .. })));
        assert!(Curve::new(-3, 2).is_err());
    }

    #[test]
    fn small_point_counts() {
        assert_eq!(ap_good(&c(1, 1), 5).unwrap(), -3);
        assert_eq!(ap_naive(&c(1, 1), 5).unwrap(), -3);
        assert_eq!(ap_good(&c(-1, 0), 5).unwrap(), ap_naive(&c(-1, 0), 5).unwrap());
        assert!(matches!(ap_good(&c(1, 1), 31), Err(Error::BadPrime { p: 31 })));
    }

    #[test]
    fn reduction_examples() {
        assert_eq!(reduction_type(&c(-1, 0), 2), ReductionType::Additive);
        assert!(reduction_type(&c(1, 1), 31).is_multiplicative());
        assert_eq!(reduction_type(&c(1, 1), 5), ReductionType::Good);
    }

    #[test]
    fn conductors() {
        assert_eq!(conductor(&c(-1, 0)), 32);
        assert_eq!(conductor(&c(0, 1)), 36);
        assert_eq!(conductor(&c(1, 0)), 64);
        assert_eq!(conductor(&c(-16, 16)), 37);
        // y² = x³ + x + 1: conductor 496 = 2⁴·31.
        assert_eq!(conductor(&c(1, 1)), 496);
    }

    #[test]
    fn curve_37a_data() {
        let e = c(-16, 16);
        assert!(is_semistable(&e));
        // Rank one: root number -1. Known a_p of 37a: a_2=-2, a_3=-3, a_5=-2, a_7=-1.
        assert_eq!(root_number(&e).unwrap(), -1);
        let a = dirichlet_coefficients(&e, 12);
        assert_eq!(&a[1..=7], &[1, -2, -3, 2, -2, 6, -1]);
        assert_eq!(a[4], a[2] * a[2] - 2);
    }

    #[test]
    fn additive_root_number_is_unsupported() {
        assert!(matches!(root_number(&c(-1, 0)), Err(Error::UnsupportedRootNumber { p: 2 })));
        assert!(!is_semistable(&c(-1, 0)));
        let l = LData::new(c(-1, 0), 10);
        assert!(l.sign().is_err());
    }

    #[test]
    fn shortcut_agrees_with_tate_at_large_primes() {
        for &(a, b) in &[(1, 1), (-16, 16), (5 * 7, 5 * 3), (25, 125), (-147, 693), (625, 15625 * 2)] {
            let e = c(a, b);
            for (p, _) in factor(e.discriminant().unsigned_abs()) {
                if p < 5 {
                    continue;
                }
                let t = tate(e.model(), p as u64);
                let d = local_data(&e, p as u64);
                assert_eq!(t.reduction, d.reduction, "{e} p={p}");
                assert_eq!(t.conductor_exponent, d.conductor_exponent, "{e} p={p}");
            }
        }
    }

    #[test]
    fn refined_conductor_closed_form() {
        use std::f64::consts::{LN_2, PI};
        const EULER: f64 = 0.577_215_664_901_532_9;
        for &n in &[11u64, 37, 5077, 1_000_003] {
            let g = GammaFactor::for_conductor(n);
            let want = ((n as f64).ln() - 2.0 * PI.ln() - 2.0 * EULER - 2.0 * LN_2).abs();
            let got = g.refined_conductor();
            assert!((got / want - 1.0).abs() < 1e-8, "N={n}: {got} vs {want}");
        }
    }

    #[test]
    fn summary_csv() {
        let l = LData::new(c(-16, 16), 5);
        let csv = summaries_to_csv(&[l.summary()]);
        assert!(csv.starts_with("a,b,delta,conductor,root_number,c_L\n-16,16,"));
        assert!(csv.contains(",37,-1,"));
    }
}
