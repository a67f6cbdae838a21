//! Eigenangle ensembles: the classical compact groups and the two models
//! for families with forced central zeros.
//!
//! Angles of real ensembles live in `[0, π]` and stand for conjugate pairs
//! `e^{±iθ}`; unitary angles live in `[0, 2π)`. Forced eigenvalues at `1`
//! (angle 0) are never stored in the angle list, only counted.
//!
//! Sampling is a component-wise random-walk Metropolis chain on the Weyl
//! density; only density ratios are used, so normalization constants never
//! appear.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::gauss_legendre;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    Unitary,
    SoEven,
    SoOdd,
    Symplectic,
    /// Haar measure on `SO(M)` conditioned to have `r` eigenvalues at 1.
    Interaction,
    /// `I_r ⊕ SO(M - r)`: `r` inserted eigenvalues the rest of the spectrum ignores.
    Independent,
}

impl EnsembleKind {
    pub fn is_unitary(self) -> bool {
        matches!(self, EnsembleKind::Unitary)
    }
}

impl std::str::FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "unitary" | "u" => EnsembleKind::Unitary,
            "so_even" => EnsembleKind::SoEven,
            "so_odd" => EnsembleKind::SoOdd,
            "symplectic" | "usp" | "sp" => EnsembleKind::Symplectic,
            "interaction" => EnsembleKind::Interaction,
            "independent" => EnsembleKind::Independent,
            other => return invalid(format!("unknown ensemble kind `{other}`")),
        })
    }
}

/// Single-angle factor of the Weyl density.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Weight {
    /// `(1 - cos θ)^r`
    OneMinusCos(usize),
    /// `1 - cos² θ`
    SinSquared,
    /// Circular ensemble; no single-angle factor.
    Circle,
}

/// Which ensemble, how large, and how many eigenvalues are forced to 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    /// Matrix dimension `M`; always equals the characteristic-polynomial degree.
    pub matrix_dimension: usize,
    /// The model parameter `r` (0 for the classical groups).
    pub forced_multiplicity: usize,
    pub free_angle_count: usize,
    /// Declared sign of the functional equation; meaningful for `Independent`,
    /// derived for the other real kinds.
    pub declared_sign: i8,
}

impl EnsembleSpec {
    pub fn unitary(m: usize) -> Result<Self> {
        Self::new(EnsembleKind::Unitary, m, 0, None)
    }

    pub fn so_even(m: usize) -> Result<Self> {
        Self::new(EnsembleKind::SoEven, m, 0, None)
    }

    pub fn so_odd(m: usize) -> Result<Self> {
        Self::new(EnsembleKind::SoOdd, m, 0, None)
    }

    pub fn symplectic(m: usize) -> Result<Self> {
        Self::new(EnsembleKind::Symplectic, m, 0, None)
    }

    pub fn interaction(m: usize, r: usize) -> Result<Self> {
        Self::new(EnsembleKind::Interaction, m, r, None)
    }

    /// Independent Model `I_r ⊕ SO(m - r)` with a declared functional-equation
    /// sign, which must equal `(-1)^m`.
    pub fn independent(m: usize, r: usize, sign: i8) -> Result<Self> {
        Self::new(EnsembleKind::Independent, m, r, Some(sign))
    }

    /// Independent Model with `n_free` free angles whose base group is chosen
    /// from the parity of `r` and the sign, as in the block-matrix model.
    pub fn independent_for_sign(n_free: usize, r: usize, sign: i8) -> Result<Self> {
        // Total degree parity must match the sign: even for +1, odd for -1.
        let want_odd_total = sign < 0;
        let base_odd = (r % 2 == 1) != want_odd_total;
        let base = 2 * n_free + usize::from(base_odd);
        Self::independent(base + r, r, sign)
    }

    /// The matrix-size rule for a family of discriminant scale `x`: `round(log x)`.
    pub fn matrix_size_for_scale(x: f64) -> usize {
        (x.ln().round().max(1.0)) as usize
    }

    pub fn new(kind: EnsembleKind, m: usize, r: usize, sign: Option<i8>) -> Result<Self> {
        use EnsembleKind::*;
        if m == 0 {
            return invalid("matrix dimension must be positive");
        }
        if r > 0 && !matches!(kind, Interaction | Independent) {
            return invalid(format!("{kind:?} carries no forced eigenvalues"));
        }
        let k = match kind {
            Unitary => m,
            SoEven | Symplectic => {
                if m % 2 != 0 {
                    return invalid(format!("{kind:?} needs an even dimension, got {m}"));
                }
                m / 2
            }
            SoOdd => {
                if m % 2 != 1 {
                    return invalid(format!("SoOdd needs an odd dimension, got {m}"));
                }
                m / 2
            }
            Interaction | Independent => {
                if r > m {
                    return invalid(format!("forced multiplicity {r} exceeds dimension {m}"));
                }
                (m - r) / 2
            }
        };
        if k == 0 {
            return invalid(format!("{kind:?} with M={m}, r={r} has no free angles"));
        }
        let parity_sign: i8 = if m % 2 == 0 { 1 } else { -1 };
        let declared_sign = match (kind, sign) {
            (Independent, Some(s)) => {
                if s != 1 && s != -1 {
                    return invalid(format!("sign must be ±1, got {s}"));
                }
                if s != parity_sign {
                    return invalid(format!(
                        "sign {s} inconsistent with r={r}, M-r={}: total degree {m} forces {parity_sign}",
                        m - r
                    ));
                }
                s
            }
            (Independent, None) => parity_sign,
            (Unitary, _) => 0,
            (Interaction, _) if (m - r) % 2 == 1 => {
                // leftover eigenvalue sits at -1, so det = -1
                -parity_sign
            }
            _ => parity_sign,
        };
        Ok(Self {
            kind,
            matrix_dimension: m,
            forced_multiplicity: r,
            free_angle_count: k,
            declared_sign,
        })
    }

    /// Number of eigenvalues at exactly 1 (angle 0).
    pub fn zeros_at_one(&self) -> usize {
        match self.kind {
            EnsembleKind::SoOdd => 1,
            EnsembleKind::Interaction => self.forced_multiplicity,
            EnsembleKind::Independent => {
                self.forced_multiplicity + (self.matrix_dimension - self.forced_multiplicity) % 2
            }
            _ => 0,
        }
    }

    /// Whether an eigenvalue at -1 is implied (Interaction with `M - r` odd).
    pub fn has_implicit_minus_one(&self) -> bool {
        self.kind == EnsembleKind::Interaction
            && (self.matrix_dimension - self.forced_multiplicity) % 2 == 1
    }

    /// Total eigenvalue count on the full circle, conjugate pairs counted twice.
    pub fn total_degree(&self) -> usize {
        if self.kind.is_unitary() {
            self.free_angle_count
        } else {
            self.zeros_at_one() + 2 * self.free_angle_count + usize::from(self.has_implicit_minus_one())
        }
    }

    /// Upper end of the angle domain.
    pub fn angle_upper(&self) -> f64 {
        if self.kind.is_unitary() {
            2.0 * PI
        } else {
            PI
        }
    }

    /// Base classical group of an Independent spec.
    pub fn independent_base(&self) -> Result<Self> {
        if self.kind != EnsembleKind::Independent {
            return invalid("not an Independent Model spec");
        }
        let base = self.matrix_dimension - self.forced_multiplicity;
        if base % 2 == 0 {
            Self::so_even(base)
        } else {
            Self::so_odd(base)
        }
    }

    fn weight(&self) -> Weight {
        match self.kind {
            EnsembleKind::Unitary => Weight::Circle,
            EnsembleKind::SoEven => Weight::OneMinusCos(0),
            EnsembleKind::SoOdd => Weight::OneMinusCos(1),
            EnsembleKind::Symplectic => Weight::SinSquared,
            EnsembleKind::Interaction => Weight::OneMinusCos(self.forced_multiplicity),
            EnsembleKind::Independent => {
                let base = self.matrix_dimension - self.forced_multiplicity;
                Weight::OneMinusCos(base % 2)
            }
        }
    }

    fn check_angles<T: Real>(&self, angles: &[T]) -> Result<()> {
        if angles.len() != self.free_angle_count {
            return invalid(format!(
                "expected {} angles, got {}",
                self.free_angle_count,
                angles.len()
            ));
        }
        let upper = T::of(self.angle_upper());
        for &a in angles {
            let ok = if self.kind.is_unitary() {
                a >= T::zero() && a < upper
            } else {
                a >= T::zero() && a <= upper
            };
            if !ok {
                return invalid(format!("angle {a} outside the domain of {:?}", self.kind));
            }
        }
        Ok(())
    }
}

/// One draw: sorted free eigenangles plus the count of forced zeros at angle 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenangleSample<T = f64> {
    pub angles: Vec<T>,
    pub forced_zero_multiplicity: usize,
    pub spec: EnsembleSpec,
}

impl EigenangleSample<f64> {
    pub fn cast<U: Real>(&self) -> EigenangleSample<U> {
        EigenangleSample {
            angles: self.angles.iter().map(|&a| U::of(a)).collect(),
            forced_zero_multiplicity: self.forced_zero_multiplicity,
            spec: self.spec,
        }
    }
}

impl<T: Real> EigenangleSample<T> {
    /// Builds a sample from explicit angles (sorted on the way in).
    pub fn from_angles(spec: EnsembleSpec, mut angles: Vec<T>) -> Result<Self> {
        spec.check_angles(&angles)?;
        angles.sort_by(|a, b| a.partial_cmp(b).expect("finite angles"));
        Ok(Self {
            angles,
            forced_zero_multiplicity: spec.zeros_at_one(),
            spec,
        })
    }
}

/// Unnormalized log of the joint density of the free angles.
///
/// Coincident angles give `-inf`, which is a valid density value.
pub fn weyl_log_density<T: Real>(spec: &EnsembleSpec, angles: &[T]) -> Result<T> {
    spec.check_angles(angles)?;
    let two = T::of(2.0);
    let mut total = T::zero();
    match spec.weight() {
        Weight::Circle => {
            for (j, &a) in angles.iter().enumerate() {
                for &b in &angles[j + 1..] {
                    // |e^{ia} - e^{ib}| = 2|sin((a - b)/2)|
                    total += two * (two * ((a - b) / two).sin().abs()).ln();
                }
            }
        }
        w => {
            let cosines: Vec<T> = angles.iter().map(|a| a.cos()).collect();
            for (j, &cj) in cosines.iter().enumerate() {
                for &ck in &cosines[j + 1..] {
                    total += two * (cj - ck).abs().ln();
                }
            }
            for &a in angles {
                total += single_log_weight(w, a);
            }
        }
    }
    Ok(total)
}

fn single_log_weight<T: Real>(w: Weight, theta: T) -> T {
    let two = T::of(2.0);
    match w {
        Weight::Circle | Weight::OneMinusCos(0) => T::zero(),
        // 1 - cos θ = 2 sin²(θ/2), accurate near θ = 0
        Weight::OneMinusCos(r) => {
            let s = (theta / two).sin();
            T::of_usize(r) * (two * s * s).ln()
        }
        Weight::SinSquared => {
            let s = theta.sin();
            (s * s).ln()
        }
    }
}

/// Metropolis chain parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McmcParams {
    /// Single-site updates discarded before the first sample.
    pub burn_in: usize,
    /// Single-site updates between retained samples.
    pub thinning: usize,
    /// Initial random-walk half-width in radians; retuned during burn-in.
    pub proposal_width: f64,
    pub seed: u64,
}

impl McmcParams {
    /// Burn-in `1000 K`, thinning `10 K` single-site updates.
    pub fn for_spec(spec: &EnsembleSpec, seed: u64) -> Self {
        let k = spec.free_angle_count;
        Self {
            burn_in: 1000 * k,
            thinning: 10 * k,
            proposal_width: 0.5,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.thinning < 1 {
            return invalid("thinning must be at least 1");
        }
        if !(self.proposal_width > 0.0 && self.proposal_width < PI) {
            return invalid(format!(
                "proposal width {} outside (0, π)",
                self.proposal_width
            ));
        }
        Ok(())
    }
}

const ACCEPT_LOW: f64 = 0.2;
const ACCEPT_HIGH: f64 = 0.5;
const TUNE_WINDOW: usize = 64;
const MAX_WIDTH: f64 = 3.0;

/// Component-wise random-walk Metropolis chain on the Weyl density.
#[derive(Clone, Debug)]
pub struct WeylChain {
    spec: EnsembleSpec,
    weight: Weight,
    angles: Vec<f64>,
    cosines: Vec<f64>,
    width: f64,
    thinning: usize,
    site: usize,
    rng: ChaCha8Rng,
    proposed: u64,
    accepted: u64,
}

impl WeylChain {
    /// Builds and burns in a chain on random substream `stream` of `params.seed`.
    pub fn new(spec: &EnsembleSpec, params: &McmcParams, stream: u64) -> Result<Self> {
        params.validate()?;
        let target = if spec.kind == EnsembleKind::Independent {
            spec.independent_base()?
        } else {
            *spec
        };
        let k = target.free_angle_count;
        let upper = target.angle_upper();
        let angles: Vec<f64> = (0..k).map(|j| (j as f64 + 0.5) * upper / k as f64).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        rng.set_stream(stream);
        let mut chain = Self {
            spec: *spec,
            weight: target.weight(),
            cosines: angles.iter().map(|a| a.cos()).collect(),
            angles,
            width: params.proposal_width,
            thinning: params.thinning,
            site: 0,
            rng,
            proposed: 0,
            accepted: 0,
        };
        chain.burn_in(params.burn_in);
        Ok(chain)
    }

    fn burn_in(&mut self, steps: usize) {
        let mut done = 0;
        while done < steps {
            let window = TUNE_WINDOW.min(steps - done);
            let before = self.accepted;
            for _ in 0..window {
                self.step();
            }
            done += window;
            let rate = (self.accepted - before) as f64 / window as f64;
            if rate > ACCEPT_HIGH {
                self.width = (self.width * 1.25).min(MAX_WIDTH);
            } else if rate < ACCEPT_LOW {
                self.width *= 0.8;
            }
        }
        self.proposed = 0;
        self.accepted = 0;
    }

    /// One single-site Metropolis update (systematic scan).
    pub fn step(&mut self) {
        let k = self.angles.len();
        let j = self.site;
        self.site = (self.site + 1) % k;
        let old = self.angles[j];
        let u: f64 = self.rng.random();
        let proposal = self.fold(old + self.width * (2.0 * u - 1.0));
        let log_ratio = self.log_ratio(j, old, proposal);
        self.proposed += 1;
        let accept = log_ratio >= 0.0 || self.rng.random::<f64>().ln() < log_ratio;
        if accept {
            self.angles[j] = proposal;
            self.cosines[j] = proposal.cos();
            self.accepted += 1;
        }
    }

    fn fold(&self, x: f64) -> f64 {
        if self.spec.kind.is_unitary() {
            let y = x.rem_euclid(2.0 * PI);
            if y >= 2.0 * PI {
                0.0
            } else {
                y
            }
        } else if x < 0.0 {
            -x
        } else if x > PI {
            2.0 * PI - x
        } else {
            x
        }
    }

    fn log_ratio(&self, j: usize, old: f64, new: f64) -> f64 {
        let mut log_sum = 0.0;
        let mut prod = 1.0f64;
        if self.weight == Weight::Circle {
            for (k, &other) in self.angles.iter().enumerate() {
                if k != j {
                    prod *= ((new - other) * 0.5).sin().abs() / ((old - other) * 0.5).sin().abs();
                    if !(1e-100..=1e100).contains(&prod) {
                        log_sum += prod.ln();
                        prod = 1.0;
                    }
                }
            }
        } else {
            let (c_old, c_new) = (self.cosines[j], new.cos());
            for (k, &other) in self.cosines.iter().enumerate() {
                if k != j {
                    prod *= (c_new - other).abs() / (c_old - other).abs();
                    if !(1e-100..=1e100).contains(&prod) {
                        log_sum += prod.ln();
                        prod = 1.0;
                    }
                }
            }
        }
        let pair = 2.0 * (log_sum + prod.ln());
        pair + single_log_weight(self.weight, new) - single_log_weight(self.weight, old)
    }

    /// Advances by the thinning stride and returns the current configuration.
    pub fn next_sample(&mut self) -> EigenangleSample {
        for _ in 0..self.thinning {
            self.step();
        }
        let mut angles = self.angles.clone();
        angles.sort_by(f64::total_cmp);
        EigenangleSample {
            angles,
            forced_zero_multiplicity: self.spec.zeros_at_one(),
            spec: self.spec,
        }
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    pub fn proposal_width(&self) -> f64 {
        self.width
    }
}

/// One sample from a fresh chain seeded from `rng`.
///
/// Each call pays the full burn-in; use [`sample_ensemble`] for many draws.
pub fn sample_angles<R: Rng + ?Sized>(
    spec: &EnsembleSpec,
    rng: &mut R,
    mcmc: &McmcParams,
) -> Result<EigenangleSample> {
    if spec.kind == EnsembleKind::Independent {
        return sample_independent(spec, rng, mcmc);
    }
    let params = McmcParams {
        seed: rng.random(),
        ..*mcmc
    };
    Ok(WeylChain::new(spec, &params, 0)?.next_sample())
}

/// Draws the `SO(M - r)` block and attaches the `r` inserted zeros.
pub fn sample_independent<R: Rng + ?Sized>(
    spec: &EnsembleSpec,
    rng: &mut R,
    mcmc: &McmcParams,
) -> Result<EigenangleSample> {
    let base = spec.independent_base()?;
    let base_sample = sample_angles(&base, rng, mcmc)?;
    Ok(EigenangleSample {
        angles: base_sample.angles,
        forced_zero_multiplicity: spec.zeros_at_one(),
        spec: *spec,
    })
}

/// `n` thinned samples from `chains` independent chains, in parallel.
///
/// Chain `c` uses substream `c` of `mcmc.seed`; the output is ordered by chain
/// so the result does not depend on the thread count.
pub fn sample_ensemble(
    spec: &EnsembleSpec,
    mcmc: &McmcParams,
    n: usize,
    chains: usize,
) -> Result<Vec<EigenangleSample>> {
    let chains = chains.clamp(1, n.max(1));
    let per_chain: Vec<usize> = (0..chains)
        .map(|c| n / chains + usize::from(c < n % chains))
        .collect();
    let parts: Result<Vec<Vec<EigenangleSample>>> = per_chain
        .par_iter()
        .enumerate()
        .map(|(c, &count)| {
            let mut chain = WeylChain::new(spec, mcmc, c as u64)?;
            Ok((0..count).map(|_| chain.next_sample()).collect())
        })
        .collect();
    Ok(parts?.into_iter().flatten().collect())
}

const ORACLE_NODES: usize = 64;

/// `E[observable]` under the normalized Weyl density by tensor Gauss–Legendre
/// quadrature. Only `K <= 2` is supported.
pub fn oracle_expectation<F>(spec: &EnsembleSpec, observable: F) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let target = if spec.kind == EnsembleKind::Independent {
        spec.independent_base()?
    } else {
        *spec
    };
    let k = target.free_angle_count;
    if k > 2 {
        return Err(Error::UnsupportedSize(format!(
            "quadrature oracle supports K <= 2, got K = {k}"
        )));
    }
    let upper = target.angle_upper();
    // The endpoint 2π is excluded from the unitary domain; Gauss nodes are interior.
    let rule = gauss_legendre(ORACLE_NODES, 0.0, upper);
    let mut num = 0.0;
    let mut den = 0.0;
    let mut point = vec![0.0; k];
    let mut visit = |pt: &[f64], w: f64| -> Result<()> {
        let rho = weyl_log_density(&target, pt)?.exp() * w;
        num += rho * observable(pt);
        den += rho;
        Ok(())
    };
    if k == 1 {
        for &(x, w) in &rule {
            point[0] = x;
            visit(&point, w)?;
        }
    } else {
        for &(x, wx) in &rule {
            for &(y, wy) in &rule {
                point[0] = x;
                point[1] = y;
                visit(&point, wx * wy)?;
            }
        }
    }
    Ok(num / den)
}
