//! Gamma-function kernels shared by the curve and L-function code.

use num_complex::Complex64;
use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `log Γ(z)` (any branch; intended for exponentiation and differences).
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // Reflection.
        let s = (z * PI).sin();
        return Complex64::from(PI.ln()) - s.ln() - ln_gamma(1.0 - z);
    }
    let z = z - 1.0;
    let mut x = Complex64::from(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

pub fn gamma(z: Complex64) -> Complex64 {
    ln_gamma(z).exp()
}

/// Real `log Γ(x)` for `x > 0`.
pub fn ln_gamma_real(x: f64) -> f64 {
    ln_gamma(Complex64::from(x)).re
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorials() {
        for n in 1..15u32 {
            let f: f64 = (1..n).map(f64::from).product();
            let g = gamma(Complex64::from(n as f64));
            assert!((g.re / f - 1.0).abs() < 1e-13, "n={n}");
            assert!(g.im.abs() < 1e-10 * f);
        }
    }

    #[test]
    fn half_integer_and_reflection() {
        let g = gamma(Complex64::from(0.5));
        assert!((g.re - PI.sqrt()).abs() < 1e-14);
        let g = gamma(Complex64::from(-0.5));
        assert!((g.re + 2.0 * PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn modulus_on_vertical_line() {
        // |Γ(1 + it)|² = πt / sinh(πt).
        for &t in &[0.5, 3.0, 10.0, 30.0] {
            let g = gamma(Complex64::new(1.0, t));
            let want = PI * t / (PI * t).sinh();
            assert!((g.norm_sqr() / want - 1.0).abs() < 1e-12, "t={t}");
        }
    }
}
