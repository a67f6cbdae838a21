//! Tate's algorithm on general Weierstrass models.

use super::arith::{inv_mod, modp, valuation};
use serde::{Deserialize, Serialize};

/// `y² + a1 xy + a3 y = x³ + a2 x² + a4 x + a6`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Weierstrass {
    pub a1: i128,
    pub a2: i128,
    pub a3: i128,
    pub a4: i128,
    pub a6: i128,
}

impl Weierstrass {
    pub fn short(a: i64, b: i64) -> Self {
        Self { a1: 0, a2: 0, a3: 0, a4: a as i128, a6: b as i128 }
    }

    pub fn b2(&self) -> i128 {
        self.a1 * self.a1 + 4 * self.a2
    }
    pub fn b4(&self) -> i128 {
        2 * self.a4 + self.a1 * self.a3
    }
    pub fn b6(&self) -> i128 {
        self.a3 * self.a3 + 4 * self.a6
    }
    pub fn b8(&self) -> i128 {
        let Self { a1, a2, a3, a4, a6 } = *self;
        a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    }
    pub fn c4(&self) -> i128 {
        let b2 = self.b2();
        b2 * b2 - 24 * self.b4()
    }
    pub fn c6(&self) -> i128 {
        let (b2, b4, b6) = (self.b2(), self.b4(), self.b6());
        -b2 * b2 * b2 + 36 * b2 * b4 - 216 * b6
    }
    pub fn discriminant(&self) -> i128 {
        let (b2, b4, b6, b8) = (self.b2(), self.b4(), self.b6(), self.b8());
        -b2 * b2 * b8 - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6
    }

    /// Substitution `x = x' + r`, `y = y' + s x' + t`.
    pub fn rst(&self, r: i128, s: i128, t: i128) -> Self {
        let Self { a1, a2, a3, a4, a6 } = *self;
        Self {
            a1: a1 + 2 * s,
            a2: a2 - s * a1 + 3 * r - s * s,
            a3: a3 + r * a1 + 2 * t,
            a4: a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t,
            a6: a6 + r * a4 + r * r * a2 + r * r * r - t * a3 - t * t - r * t * a1,
        }
    }

    /// Scaling by `u = p`; every `a_i` must be divisible by `p^i`.
    fn scale_down(&self, p: i128) -> Self {
        Self {
            a1: self.a1 / p,
            a2: self.a2 / (p * p),
            a3: self.a3 / p.pow(3),
            a4: self.a4 / p.pow(4),
            a6: self.a6 / p.pow(6),
        }
    }

    /// Affine value of the defining polynomial and its partials mod `p`.
    fn singular_mod(&self, x: i128, y: i128, p: i128) -> bool {
        let Self { a1, a2, a3, a4, a6 } = *self;
        let f = y * y + a1 * x * y + a3 * y - x * x * x - a2 * x * x - a4 * x - a6;
        let fx = a1 * y - 3 * x * x - 2 * a2 * x - a4;
        let fy = 2 * y + a1 * x + a3;
        modp(f, p) == 0 && modp(fx, p) == 0 && modp(fy, p) == 0
    }

    /// Number of affine points over `F_p` by direct enumeration.
    pub fn affine_points(&self, p: u64) -> u64 {
        let pi = p as i128;
        let Self { a1, a2, a3, a4, a6 } = *self;
        let mut count = 0;
        for x in 0..pi {
            let rhs = modp(x * x * x + a2 * x * x + a4 * x + a6, pi);
            for y in 0..pi {
                if modp(y * y + a1 * x * y + a3 * y - rhs, pi) == 0 {
                    count += 1;
                }
            }
        }
        count
    }
}

/// Local reduction classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReductionType {
    Good,
    MultSplit,
    MultNonsplit,
    Additive,
}

impl ReductionType {
    pub fn is_multiplicative(self) -> bool {
        matches!(self, Self::MultSplit | Self::MultNonsplit)
    }
}

/// Kodaira symbol of the special fibre.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kodaira {
    I(u32),
    II,
    III,
    IV,
    IStar(u32),
    IVStar,
    IIIStar,
    IIStar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LocalReduction {
    pub p: u64,
    pub reduction: ReductionType,
    pub conductor_exponent: u32,
    pub kodaira: Kodaira,
    /// A model minimal at `p`, integral everywhere.
    pub minimal: Weierstrass,
    pub disc_valuation: u32,
}

fn singular_point(e: &Weierstrass, p: i128) -> (i128, i128) {
    if p <= 3 {
        for x in 0..p {
            for y in 0..p {
                if e.singular_mod(x, y, p) {
                    return (x, y);
                }
            }
        }
        unreachable!("reduction mod {p} is singular but no singular point found");
    }
    let (b2, c4, c6) = (e.b2(), e.c4(), e.c6());
    let x = if modp(c4, p) == 0 {
        modp(-b2 * inv_mod(12, p), p)
    } else {
        modp(-(c6 + b2 * c4) * inv_mod(12 * c4, p), p)
    };
    let y = modp(-(e.a1 * x + e.a3) * inv_mod(2, p), p);
    (x, y)
}

/// Square root in `F_2`.
fn sqrt2(a: i128) -> i128 {
    modp(a, 2)
}

/// Runs Tate's algorithm at the prime `p`.
pub fn tate(model: Weierstrass, p: u64) -> LocalReduction {
    let pi = p as i128;
    let half = (pi + 1) / 2;
    let ord = |x: i128| valuation(x, pi);
    let mut e = model;
    loop {
        let n = ord(e.discriminant());
        let done = |reduction, f: u32, kodaira, e: Weierstrass| LocalReduction {
            p,
            reduction,
            conductor_exponent: f,
            kodaira,
            minimal: e,
            disc_valuation: n,
        };
        if n == 0 {
            return done(ReductionType::Good, 0, Kodaira::I(0), e);
        }
        let (r, t) = singular_point(&e, pi);
        e = e.rst(r, 0, t);
        if modp(e.b2(), pi) != 0 {
            // T² + a1 T - a2 splits over F_p?
            let split = if p == 2 {
                modp(e.a2, 2) == 0
            } else {
                super::arith::legendre(e.b2(), p) == 1
            };
            let red = if split { ReductionType::MultSplit } else { ReductionType::MultNonsplit };
            return done(red, 1, Kodaira::I(n), e);
        }
        if ord(e.a6) < 2 {
            return done(ReductionType::Additive, n, Kodaira::II, e);
        }
        if ord(e.b8()) < 3 {
            return done(ReductionType::Additive, n - 1, Kodaira::III, e);
        }
        if ord(e.b6()) < 3 {
            return done(ReductionType::Additive, n - 2, Kodaira::IV, e);
        }
        let (s, t) = if p == 2 {
            (sqrt2(e.a2), 2 * sqrt2(e.a6 / 4))
        } else {
            (modp(-e.a1 * half, pi), modp(-e.a3 * half, pi * pi))
        };
        e = e.rst(0, s, t);
        let b = e.a2 / pi;
        let c = e.a4 / (pi * pi);
        let d = e.a6 / pi.pow(3);
        let w = 27 * d * d - b * b * c * c + 4 * b * b * b * d - 18 * b * c * d + 4 * c * c * c;
        let x = 3 * c - b * b;
        if modp(w, pi) != 0 {
            return done(ReductionType::Additive, n - 4, Kodaira::IStar(0), e);
        }
        if modp(x, pi) != 0 {
            // Double root: the I_m* subprocedure.
            let r = match p {
                2 => c,
                3 => b * c,
                _ => (b * c - 9 * d) * inv_mod(2 * x, pi),
            };
            e = e.rst(pi * modp(r, pi), 0, 0);
            let (mut ix, mut iy) = (3u32, 3u32);
            let (mut mx, mut my) = (pi * pi, pi * pi);
            loop {
                let a2t = e.a2 / pi;
                let a3t = e.a3 / my;
                let a6t = e.a6 / (mx * my);
                if modp(a3t * a3t + 4 * a6t, pi) != 0 {
                    break;
                }
                let t = if p == 2 { sqrt2(a6t) } else { modp(-a3t * half, pi) };
                e = e.rst(0, 0, my * t);
                my *= pi;
                iy += 1;
                let a4t = e.a4 / (pi * mx);
                let a6t = e.a6 / (mx * my);
                if modp(a4t * a4t - 4 * a6t * a2t, pi) != 0 {
                    break;
                }
                let r = if p == 2 {
                    sqrt2(a6t * a2t)
                } else {
                    modp(-a4t * inv_mod(2 * a2t, pi), pi)
                };
                e = e.rst(mx * r, 0, 0);
                mx *= pi;
                ix += 1;
            }
            let m = ix + iy - 5;
            return done(ReductionType::Additive, n - m - 4, Kodaira::IStar(m), e);
        }
        // Triple root.
        let rho = match p {
            2 => modp(b, 2),
            3 => modp(-d, 3),
            _ => modp(-b * inv_mod(3, pi), pi),
        };
        e = e.rst(pi * rho, 0, 0);
        let x3 = e.a3 / (pi * pi);
        let x6 = e.a6 / pi.pow(4);
        if modp(x3 * x3 + 4 * x6, pi) != 0 {
            return done(ReductionType::Additive, n - 6, Kodaira::IVStar, e);
        }
        let t = if p == 2 { sqrt2(x6) } else { modp(-x3 * half, pi) };
        e = e.rst(0, 0, pi * pi * t);
        if ord(e.a4) < 4 {
            return done(ReductionType::Additive, n - 7, Kodaira::IIIStar, e);
        }
        if ord(e.a6) < 6 {
            return done(ReductionType::Additive, n - 8, Kodaira::IIStar, e);
        }
        e = e.scale_down(pi);
    }
}
