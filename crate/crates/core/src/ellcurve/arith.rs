//! Small integer number theory: valuations, factoring, quadratic characters.

/// `p`-adic valuation; `u32::MAX` for zero.
pub fn valuation(mut n: i128, p: i128) -> u32 {
    if n == 0 {
        return u32::MAX;
    }
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// Reduction into `[0, p)`.
pub fn modp(n: i128, p: i128) -> i128 {
    n.rem_euclid(p)
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = (acc as u128 * base as u128 % m as u128) as u64;
        }
        base = (base as u128 * base as u128 % m as u128) as u64;
        exp >>= 1;
    }
    acc
}

/// Modular inverse of `a` modulo prime `p`.
pub fn inv_mod(a: i128, p: i128) -> i128 {
    let a = modp(a, p) as u64;
    debug_assert!(a != 0, "no inverse of 0");
    pow_mod(a, (p - 2) as u64, p as u64) as i128
}

/// Legendre symbol `(a / p)` for an odd prime `p`, by Euler's criterion.
pub fn legendre(a: i128, p: u64) -> i8 {
    let r = modp(a, p as i128) as u64;
    if r == 0 {
        return 0;
    }
    if p == 2 {
        return 1;
    }
    if pow_mod(r, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

/// Quadratic character table `χ(x) = (x / p)` for all residues.
pub struct SquareTable {
    p: u64,
    chi: Vec<i8>,
}

impl SquareTable {
    pub fn new(p: u64) -> Self {
        let mut chi = vec![-1i8; p as usize];
        chi[0] = 0;
        if p == 2 {
            chi[1] = 1;
        }
        for x in 1..=(p / 2) {
            chi[(x * x % p) as usize] = 1;
        }
        Self { p, chi }
    }

    #[inline]
    pub fn get(&self, residue: u64) -> i8 {
        self.chi[residue as usize]
    }

    pub fn prime(&self) -> u64 {
        self.p
    }
}

/// Primes up to and including `limit`.
pub fn primes_up_to(limit: usize) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Smallest-prime-factor sieve on `0..=limit`.
pub fn smallest_factor_sieve(limit: usize) -> Vec<u32> {
    let mut spf = vec![0u32; limit + 1];
    for i in 2..=limit {
        if spf[i] == 0 {
            let mut j = i;
            while j <= limit {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    spf
}

/// Prime factorization by trial division.
pub fn factor(mut n: u128) -> Vec<(u128, u32)> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    for p in [2u128, 3] {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    }
    let mut d = 5u128;
    let mut step = 2u128;
    while d * d <= n {
        let mut e = 0;
        while n % d == 0 {
            n /= d;
            e += 1;
        }
        if e > 0 {
            out.push((d, e));
        }
        d += step;
        step = 6 - step;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factor(n as u128).first() == Some(&(n as u128, 1))
}

pub fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Largest `r` with `r^k <= n`.
pub fn integer_root(n: f64, k: u32) -> i64 {
    if n < 1.0 {
        return 0;
    }
    let mut r = n.powf(1.0 / k as f64).round() as i64;
    while r > 0 && (r as f64).powi(k as i32) > n {
        r -= 1;
    }
    while ((r + 1) as f64).powi(k as i32) <= n {
        r += 1;
    }
    r
}
