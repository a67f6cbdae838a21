//! Closed-form one-level densities and the sine-kernel pair correlation.
//!
//! Everything here is written against [`Real`] so the same formulas run in
//! single and double precision.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::quadrature::gauss_legendre;
use crate::scalar::Real;

/// `J_{n + 1/2}(x)` for integer `n` and `x > 0`.
///
/// Built from the spherical Bessel functions: upward recurrence where it is
/// stable (`n <= x`), Miller's backward recurrence normalized by
/// `Σ (2k+1) j_k² = 1` otherwise, and the spherical `y_m` for negative orders.
pub fn bessel_half<T: Real>(n: i32, x: T) -> Result<T> {
    if !(x > T::zero()) || !x.is_finite() {
        return invalid(format!("Bessel argument must be positive and finite, got {x}"));
    }
    let prefactor = (T::of(2.0) * x / T::PI()).sqrt();
    let value = if n >= 0 {
        spherical_j(n as usize, x)
    } else {
        let m = (-n - 1) as usize;
        let y = spherical_y(m, x);
        if m % 2 == 0 {
            -y
        } else {
            y
        }
    };
    Ok(prefactor * value)
}

fn spherical_j<T: Real>(n: usize, x: T) -> T {
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    if n == 0 {
        return j0;
    }
    let j1 = s / (x * x) - c / x;
    if T::of_usize(n) <= x {
        let (mut prev, mut cur) = (j0, j1);
        for k in 1..n {
            let next = T::of_usize(2 * k + 1) / x * cur - prev;
            prev = cur;
            cur = next;
        }
        return cur;
    }
    // Miller's algorithm.
    let top = (n as f64).max(x.to_f64_lossy());
    let start = (top + 30.0 + (40.0 * top).sqrt()).ceil() as usize;
    let limit = T::max_value().sqrt().sqrt();
    let mut values = vec![T::zero(); start + 2];
    values[start] = T::min_positive_value().sqrt().sqrt();
    for k in (1..=start).rev() {
        let next = T::of_usize(2 * k + 1) / x * values[k] - values[k + 1];
        values[k - 1] = next;
        if next.abs() > limit {
            for v in values.iter_mut() {
                *v /= limit;
            }
        }
    }
    let norm = values
        .iter()
        .enumerate()
        .fold(T::zero(), |acc, (k, &v)| acc + T::of_usize(2 * k + 1) * v * v)
        .sqrt();
    // Sign is fixed by whichever of j_0, j_1 is larger in magnitude.
    let (reference, computed) = if j0.abs() >= j1.abs() {
        (j0, values[0])
    } else {
        (j1, values[1])
    };
    let sign = if (computed >= T::zero()) == (reference >= T::zero()) {
        T::one()
    } else {
        -T::one()
    };
    sign * values[n] / norm
}

fn spherical_y<T: Real>(m: usize, x: T) -> T {
    let (s, c) = x.sin_cos();
    let y0 = -c / x;
    if m == 0 {
        return y0;
    }
    let (mut prev, mut cur) = (y0, -c / (x * x) - s / x);
    for k in 1..m {
        let next = T::of_usize(2 * k + 1) / x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// One-level density of `SO(M)` conditioned on `r` eigenvalues at 1, in the
/// large-`M` limit and in units of mean spacing.
pub fn interaction_density<T: Real>(r: usize, theta: T) -> Result<T> {
    if r < 1 {
        return invalid("interaction_density needs r >= 1; use so_even_density for r = 0");
    }
    bessel_one_level(r, theta)
}

/// The Bessel one-level density formula, also admitting `r = 0`.
pub(crate) fn bessel_one_level<T: Real>(r: usize, theta: T) -> Result<T> {
    if theta < T::zero() || !theta.is_finite() {
        return invalid(format!("theta must be nonnegative, got {theta}"));
    }
    if theta == T::zero() {
        return Ok(if r == 0 { T::of(2.0) } else { T::zero() });
    }
    let x = theta * T::PI();
    let lower = bessel_half(r as i32 - 2, x)?; // J_{r-3/2}
    let upper = bessel_half(r as i32 - 1, x)?; // J_{r-1/2}
    let cross = T::of_usize(2 * r) - T::one();
    let bracket = lower * lower + upper * upper - cross / x * upper * lower;
    Ok(T::PI() * T::PI() / T::of(2.0) * theta * bracket)
}

fn sinc_two_pi<T: Real>(theta: T) -> T {
    let x = T::of(2.0) * T::PI() * theta;
    if x.abs() < T::of(1e-4) {
        T::one() - x * x / T::of(6.0)
    } else {
        x.sin() / x
    }
}

/// `1 + sin(2πθ)/(2πθ)`: the `SO(2N)` one-level density.
pub fn so_even_density<T: Real>(theta: T) -> T {
    T::one() + sinc_two_pi(theta)
}

/// `1 - sin(2πθ)/(2πθ)`: the `SO(2N+1)` one-level density.
pub fn so_odd_density<T: Real>(theta: T) -> T {
    T::one() - sinc_two_pi(theta)
}

/// `1 - (sin πx / πx)²`.
pub fn sine_kernel_pc<T: Real>(x: T) -> T {
    let y = T::PI() * x;
    let s = if y.abs() < T::of(1e-4) {
        T::one() - y * y / T::of(6.0)
    } else {
        y.sin() / y
    };
    T::one() - s * s
}

/// Which analytic density a curve represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityModel {
    /// Flat density of the unitary group.
    Unitary,
    SoEven,
    SoOdd,
    Symplectic,
    Interaction(usize),
    SineKernel,
}

impl DensityModel {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            DensityModel::Unitary => 1.0,
            DensityModel::SoEven => so_even_density(x),
            DensityModel::SoOdd | DensityModel::Symplectic => so_odd_density(x),
            DensityModel::Interaction(r) => {
                bessel_one_level(r, x).expect("grid values are nonnegative")
            }
            DensityModel::SineKernel => sine_kernel_pc(x),
        }
    }

    pub fn label(self) -> String {
        match self {
            DensityModel::Unitary => "unitary".into(),
            DensityModel::SoEven => "so_even".into(),
            DensityModel::SoOdd => "so_odd".into(),
            DensityModel::Symplectic => "symplectic".into(),
            DensityModel::Interaction(r) => format!("interaction_r{r}"),
            DensityModel::SineKernel => "sine_kernel".into(),
        }
    }

    /// Mean of the density over each bin `[edges[i], edges[i+1]]`.
    pub fn bin_averages(self, edges: &[f64]) -> Vec<f64> {
        let unit = gauss_legendre(12, 0.0, 1.0);
        edges
            .windows(2)
            .map(|w| {
                let width = w[1] - w[0];
                unit.iter()
                    .map(|&(u, wt)| wt * self.eval(w[0] + u * width))
                    .sum()
            })
            .collect()
    }
}

impl std::str::FromStr for DensityModel {
    type Err = crate::Error;

    /// Accepts the labels produced by [`DensityModel::label`].
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase().replace('-', "_");
        Ok(match s.as_str() {
            "unitary" => DensityModel::Unitary,
            "so_even" => DensityModel::SoEven,
            "so_odd" => DensityModel::SoOdd,
            "symplectic" => DensityModel::Symplectic,
            "sine_kernel" => DensityModel::SineKernel,
            _ => match s.strip_prefix("interaction_r").map(str::parse) {
                Some(Ok(r)) => DensityModel::Interaction(r),
                _ => return invalid(format!("unknown density model `{s}`")),
            },
        })
    }
}

/// A prediction tabulated on an increasing grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionCurve<T> {
    pub grid: Vec<T>,
    pub values: Vec<T>,
    pub label: String,
}

impl PredictionCurve<f64> {
    pub fn tabulate(model: DensityModel, grid: Vec<f64>) -> Result<Self> {
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("prediction grid must be strictly increasing");
        }
        if grid.iter().any(|&x| x < 0.0) {
            return invalid("prediction grid must be nonnegative");
        }
        let values = grid.iter().map(|&x| model.eval(x)).collect();
        Ok(Self {
            grid,
            values,
            label: model.label(),
        })
    }

    /// Same columns as a density table; point curves use `bin_left == bin_right`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_left,bin_right,height,stderr\n");
        for (x, v) in self.grid.iter().zip(&self.values) {
            out.push_str(&format!("{x},{x},{v},0\n"));
        }
        out
    }

    /// Two whitespace-separated columns for gnuplot.
    pub fn to_gnuplot(&self) -> String {
        let mut out = format!("# {}\n", self.label);
        for (x, v) in self.grid.iter().zip(&self.values) {
            out.push_str(&format!("{x} {v}\n"));
        }
        out
    }
}

/// `n + 1` evenly spaced points on `[0, max]`.
pub fn uniform_grid(max: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| max * i as f64 / n as f64).collect()
}
