//! Characteristic polynomials `Λ(z) = det(I - A* z)` kept in factored form.

use num_complex::Complex;

use crate::ensembles::EigenangleSample;
use crate::error::{invalid, Result};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct CharPoly<T> {
    sample: EigenangleSample<T>,
    total_degree: usize,
}

impl<T: Real> CharPoly<T> {
    pub fn new(sample: EigenangleSample<T>) -> Self {
        let total_degree = sample.spec.total_degree();
        Self {
            sample,
            total_degree,
        }
    }

    pub fn sample(&self) -> &EigenangleSample<T> {
        &self.sample
    }

    pub fn total_degree(&self) -> usize {
        self.total_degree
    }

    fn is_unitary(&self) -> bool {
        self.sample.spec.kind.is_unitary()
    }

    fn minus_one_count(&self) -> i32 {
        i32::from(self.sample.spec.has_implicit_minus_one())
    }

    /// `∏ (1 - z e^{-iθ})` over every eigenvalue.
    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        let one = Complex::new(T::one(), T::zero());
        if self.is_unitary() {
            return self
                .sample
                .angles
                .iter()
                .fold(one, |acc, &a| acc * (one - z * Complex::from_polar(T::one(), -a)));
        }
        let two = T::of(2.0);
        let mut v = (one - z).powi(self.sample.forced_zero_multiplicity as i32)
            * (one + z).powi(self.minus_one_count());
        for &a in &self.sample.angles {
            v *= one - z * two * a.cos() + z * z;
        }
        v
    }

    /// Product of the eigenvalues.
    pub fn determinant(&self) -> Complex<T> {
        if self.is_unitary() {
            let phase = self.sample.angles.iter().fold(T::zero(), |s, &a| s + a);
            Complex::from_polar(T::one(), phase)
        } else if self.minus_one_count() == 1 {
            Complex::new(-T::one(), T::zero())
        } else {
            Complex::new(T::one(), T::zero())
        }
    }

    /// Root number `(-1)^N det(A)`.
    pub fn epsilon(&self) -> Complex<T> {
        let sign = if self.total_degree % 2 == 0 { T::one() } else { -T::one() };
        self.determinant() * sign
    }

    /// `|Λ(z) - ε z^N conj(Λ(1/conj(z)))|`.
    pub fn functional_equation_residual(&self, z: Complex<T>) -> Result<T> {
        if z.norm() == T::zero() {
            return invalid("functional equation residual needs z != 0");
        }
        let reflected = self.eval(z.conj().inv()).conj();
        let rhs = self.epsilon() * z.powi(self.total_degree as i32) * reflected;
        Ok((self.eval(z) - rhs).norm())
    }

    /// `d/dz z^N` at the critical point, i.e. `N`.
    pub fn conductor(&self) -> usize {
        self.total_degree
    }

    /// `Λ^{(k)}(1)` as a complex number, by exact product-rule expansion.
    pub fn critical_derivative_complex(&self, k: usize) -> Complex<T> {
        let zero = Complex::new(T::zero(), T::zero());
        let one = Complex::new(T::one(), T::zero());
        let two = T::of(2.0);
        // Taylor coefficients in h = z - 1, truncated at degree k.
        let mut series = vec![zero; k + 1];
        series[0] = one;
        let mut mul = |factor: &[Complex<T>]| {
            let mut out = vec![zero; k + 1];
            for (i, &s) in series.iter().enumerate() {
                if s == zero {
                    continue;
                }
                for (j, &f) in factor.iter().enumerate() {
                    if i + j <= k {
                        out[i + j] += s * f;
                    }
                }
            }
            series = out;
        };
        if self.is_unitary() {
            for &a in &self.sample.angles {
                let e = Complex::from_polar(T::one(), -a);
                mul(&[one - e, -e]);
            }
        } else {
            for _ in 0..self.sample.forced_zero_multiplicity {
                mul(&[zero, -one]);
            }
            for _ in 0..self.minus_one_count() {
                mul(&[one * two, one]);
            }
            for &a in &self.sample.angles {
                let c = two - two * a.cos();
                mul(&[one * c, one * c, one]);
            }
        }
        let factorial = (1..=k).fold(T::one(), |f, i| f * T::of_usize(i));
        series[k] * factorial
    }

    /// `Λ^{(k)}(1)`: the signed real value for real ensembles, the modulus for
    /// the unitary ensemble.
    pub fn critical_derivative(&self, k: usize) -> T {
        let v = self.critical_derivative_complex(k);
        if self.is_unitary() {
            v.norm()
        } else {
            v.re
        }
    }

    /// Winding number of `Λ` around the circle `|z| = radius`, sampled at
    /// `points` equally spaced points.
    pub fn zeros_in_disc(&self, radius: T, points: usize) -> i64 {
        let two_pi = T::PI() * T::of(2.0);
        let mut total = T::zero();
        let mut prev = self.eval(Complex::new(radius, T::zero())).arg();
        for i in 1..=points {
            let phi = two_pi * T::of_usize(i) / T::of_usize(points);
            let cur = self.eval(Complex::from_polar(radius, phi)).arg();
            let mut d = cur - prev;
            while d > T::PI() {
                d -= two_pi;
            }
            while d < -T::PI() {
                d += two_pi;
            }
            total += d;
            prev = cur;
        }
        (total / two_pi).round().to_i64().unwrap_or(i64::MIN)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::EnsembleSpec;

    fn poly(spec: EnsembleSpec, angles: Vec<f64>) -> CharPoly<f64> {
        CharPoly::new(EigenangleSample::from_angles(spec, angles).unwrap())
    }

    #[test]
    fn value_at_origin_is_one() {
        let p = poly(EnsembleSpec::so_odd(5).unwrap(), vec![0.4, 2.0]);
        let v = p.eval(Complex::new(0.0, 0.0));
        assert!((v - Complex::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn forced_zero_vanishes_at_one() {
        let p = poly(EnsembleSpec::interaction(7, 3).unwrap(), vec![0.4, 2.0]);
        assert_eq!(p.eval(Complex::new(1.0, 0.0)).norm(), 0.0);
    }

    #[test]
    fn so2_value_at_one() {
        let t = 1.234;
        let p = poly(EnsembleSpec::so_even(2).unwrap(), vec![t]);
        let v = p.eval(Complex::new(1.0, 0.0));
        assert!((v.re - (2.0 - 2.0 * t.cos())).abs() < 1e-14);
        assert_eq!(p.critical_derivative(0), v.re);
    }

    #[test]
    fn so3_first_derivative() {
        let t = 0.77;
        let p = poly(EnsembleSpec::so_odd(3).unwrap(), vec![t]);
        let d = p.critical_derivative(1);
        assert!((d.abs() - (2.0 - 2.0 * t.cos())).abs() < 1e-14);
        assert!(d < 0.0);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let p = poly(EnsembleSpec::interaction(9, 1).unwrap(), vec![0.3, 1.3, 2.9, 2.2]);
        let h = 1e-4;
        let f = |x: f64| p.eval(Complex::new(x, 0.0)).re;
        let fd2 = (f(1.0 + h) - 2.0 * f(1.0) + f(1.0 - h)) / (h * h);
        assert!((p.critical_derivative(2) - fd2).abs() < 1e-5 * fd2.abs().max(1.0));
    }

    #[test]
    fn epsilon_signs() {
        let even = poly(EnsembleSpec::so_even(4).unwrap(), vec![0.3, 1.0]);
        assert!((even.epsilon() - Complex::new(1.0, 0.0)).norm() < 1e-15);
        let odd = poly(EnsembleSpec::so_odd(5).unwrap(), vec![0.3, 1.0]);
        assert!((odd.epsilon() - Complex::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn conductor_counts() {
        let u = poly(EnsembleSpec::unitary(5).unwrap(), vec![0.1, 1.0, 2.0, 3.0, 4.0]);
        assert_eq!(u.conductor(), 5);
        let i = poly(EnsembleSpec::independent(6, 2, 1).unwrap(), vec![0.5, 1.5]);
        assert_eq!(i.conductor(), 6);
    }

    #[test]
    fn residual_rejects_origin() {
        let p = poly(EnsembleSpec::so_even(2).unwrap(), vec![1.0]);
        assert!(p.functional_equation_residual(Complex::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn zero_count_on_circle() {
        let p = poly(EnsembleSpec::interaction(8, 2).unwrap(), vec![0.5, 1.7, 2.6]);
        let inner = p.zeros_in_disc(0.98, 4000);
        let outer = p.zeros_in_disc(1.02, 4000);
        assert_eq!(inner, 0);
        assert_eq!(outer - inner, 8);
    }

    #[test]
    fn single_precision_polynomial() {
        let s = EigenangleSample::from_angles(EnsembleSpec::so_odd(3).unwrap(), vec![0.77f32]).unwrap();
        let p = CharPoly::new(s);
        assert!((p.critical_derivative(1).abs() - (2.0 - 2.0 * 0.77f32.cos())).abs() < 1e-5);
    }
}
