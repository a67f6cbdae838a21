//! Unfolding and binned statistics of zeros and eigenangles.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::ensembles::EigenangleSample;
use crate::error::{invalid, Result};

/// Zero positions rescaled to unit mean spacing, critical zeros removed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnfoldedZeros {
    pub values: Vec<f64>,
    pub source: String,
    pub excluded_critical: usize,
    /// Circumference for circular (unitary) spectra.
    pub period: Option<f64>,
}

/// `θ ↦ θ M / 2π`; forced zeros at angle 0 are dropped and counted.
///
/// `M` is the total degree, except for the Independent Model, whose free
/// angles live in the `SO(M - r)` block and are scaled by that block's degree.
pub fn unfold(sample: &EigenangleSample) -> UnfoldedZeros {
    let total = match sample.spec.independent_base() {
        Ok(base) => base.total_degree(),
        Err(_) => sample.spec.total_degree(),
    } as f64;
    let scale = total / (2.0 * PI);
    let mut values: Vec<f64> = sample.angles.iter().map(|&a| a * scale).collect();
    values.sort_by(f64::total_cmp);
    UnfoldedZeros {
        values,
        source: format!("{:?}", sample.spec.kind),
        excluded_critical: sample.forced_zero_multiplicity,
        period: sample.spec.kind.is_unitary().then_some(total),
    }
}

/// `γ ↦ γ c(L) / 2π`; zeros at `γ = 0` are critical and excluded.
pub fn unfold_lzeros(gammas: &[f64], refined_conductor: f64, source: &str) -> Result<UnfoldedZeros> {
    if !(refined_conductor > 0.0) {
        return invalid(format!("refined conductor must be positive, got {refined_conductor}"));
    }
    let scale = refined_conductor / (2.0 * PI);
    let mut excluded = 0;
    let mut values = Vec::with_capacity(gammas.len());
    for &g in gammas {
        if g == 0.0 {
            excluded += 1;
        } else {
            values.push(g.abs() * scale);
        }
    }
    values.sort_by(f64::total_cmp);
    Ok(UnfoldedZeros {
        values,
        source: source.to_string(),
        excluded_critical: excluded,
        period: None,
    })
}

/// Uniform bins on `[0, max)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BinSpec {
    pub max: f64,
    pub bins: usize,
}

impl Default for BinSpec {
    fn default() -> Self {
        Self { max: 5.0, bins: 50 }
    }
}

impl BinSpec {
    pub fn new(max: f64, bins: usize) -> Result<Self> {
        if !(max > 0.0) || bins == 0 {
            return invalid(format!("bad grid: max {max}, bins {bins}"));
        }
        Ok(Self { max, bins })
    }

    pub fn width(&self) -> f64 {
        self.max / self.bins as f64
    }

    pub fn edges(&self) -> Vec<f64> {
        (0..=self.bins).map(|i| self.max * i as f64 / self.bins as f64).collect()
    }

    fn index(&self, x: f64) -> Option<usize> {
        if x < 0.0 || x >= self.max {
            return None;
        }
        Some(((x / self.width()) as usize).min(self.bins - 1))
    }
}

/// Histogram density estimate with per-bin standard errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityTable {
    pub edges: Vec<f64>,
    pub heights: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Number of zero sets pooled.
    pub sample_count: usize,
    /// Items that landed inside the grid.
    pub counted: usize,
    /// Heights are `count / (normalizer · width)`.
    pub normalizer: f64,
}

impl DensityTable {
    fn from_counts(grid: &BinSpec, counts: &[usize], total: usize, normalizer: f64, sets: usize) -> Self {
        let w = grid.width();
        let denom = normalizer * w;
        let n = total.max(1) as f64;
        let heights = counts.iter().map(|&c| c as f64 / denom).collect();
        let stderr = counts
            .iter()
            .map(|&c| {
                let p = c as f64 / n;
                (n * p * (1.0 - p)).max(0.0).sqrt() / denom
            })
            .collect();
        Self {
            edges: grid.edges(),
            heights,
            stderr,
            sample_count: sets,
            counted: counts.iter().sum(),
            normalizer,
        }
    }

    pub fn bins(&self) -> usize {
        self.heights.len()
    }

    /// `Σ height · width`.
    pub fn integral(&self) -> f64 {
        self.heights
            .iter()
            .zip(self.edges.windows(2))
            .map(|(h, e)| h * (e[1] - e[0]))
            .sum()
    }

    /// Standard error of a single count in a bin, used as a floor.
    pub fn unit_error(&self) -> f64 {
        let w = self.edges[1] - self.edges[0];
        1.0 / (self.normalizer * w)
    }

    /// `|height - prediction| / stderr` per bin, with stderr floored at one count.
    pub fn discrepancies(&self, prediction: &[f64]) -> Result<Vec<f64>> {
        if prediction.len() != self.bins() {
            return invalid(format!(
                "prediction has {} bins, table has {}",
                prediction.len(),
                self.bins()
            ));
        }
        let floor = self.unit_error();
        Ok(self
            .heights
            .iter()
            .zip(&self.stderr)
            .zip(prediction)
            .map(|((h, s), p)| (h - p).abs() / s.max(floor))
            .collect())
    }

    /// Summed mass of the first `n` bins, with its standard error.
    pub fn leading_mass(&self, n: usize) -> (f64, f64) {
        let n = n.min(self.bins());
        let w = self.edges[1] - self.edges[0];
        let mass = self.heights[..n].iter().sum::<f64>() * w;
        let var: f64 = self.stderr[..n].iter().map(|s| (s * w).powi(2)).sum();
        (mass, var.sqrt())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_left,bin_right,height,stderr\n");
        for (i, (h, s)) in self.heights.iter().zip(&self.stderr).enumerate() {
            out.push_str(&format!("{},{},{},{}\n", self.edges[i], self.edges[i + 1], h, s));
        }
        out
    }

    pub fn to_gnuplot(&self) -> String {
        let mut out = String::from("# bin_center height stderr\n");
        for (i, (h, s)) in self.heights.iter().zip(&self.stderr).enumerate() {
            let c = 0.5 * (self.edges[i] + self.edges[i + 1]);
            out.push_str(&format!("{c} {h} {s}\n"));
        }
        out
    }
}

fn require_sets(sets: &[UnfoldedZeros]) -> Result<()> {
    if sets.is_empty() {
        return invalid("need at least one zero set");
    }
    Ok(())
}

/// Pooled one-level density: count per bin over `(number of sets × width)`.
pub fn one_level_density(sets: &[UnfoldedZeros], grid: &BinSpec) -> Result<DensityTable> {
    require_sets(sets)?;
    let mut counts = vec![0usize; grid.bins];
    let mut total = 0;
    for set in sets {
        total += set.values.len();
        for &x in &set.values {
            if let Some(i) = grid.index(x) {
                counts[i] += 1;
            }
        }
    }
    Ok(DensityTable::from_counts(grid, &counts, total, sets.len() as f64, sets.len()))
}

/// Pair correlation per point: unordered pairs by `|x_i - x_j|`, or forward
/// circular distances for periodic sets, over `(number of points × width)`.
pub fn pair_correlation(sets: &[UnfoldedZeros], grid: &BinSpec) -> Result<DensityTable> {
    require_sets(sets)?;
    let mut counts = vec![0usize; grid.bins];
    let mut points = 0usize;
    for set in sets {
        let v = &set.values;
        points += v.len();
        match set.period {
            Some(period) => {
                for (i, &a) in v.iter().enumerate() {
                    for (j, &b) in v.iter().enumerate() {
                        if i != j {
                            if let Some(k) = grid.index((b - a).rem_euclid(period)) {
                                counts[k] += 1;
                            }
                        }
                    }
                }
            }
            None => {
                for (i, &a) in v.iter().enumerate() {
                    for &b in &v[i + 1..] {
                        if let Some(k) = grid.index((b - a).abs()) {
                            counts[k] += 1;
                        }
                    }
                }
            }
        }
    }
    let pairs: usize = counts.iter().sum();
    let mut table = DensityTable::from_counts(grid, &counts, pairs, points.max(1) as f64, sets.len());
    // Poisson errors: the number of candidate pairs is not a fixed trial count.
    let denom = table.normalizer * grid.width();
    table.stderr = counts.iter().map(|&c| (c as f64).sqrt() / denom).collect();
    Ok(table)
}

/// Distribution of consecutive spacings; sets with fewer than two values are skipped.
pub fn nn_spacing(sets: &[UnfoldedZeros], grid: &BinSpec) -> Result<DensityTable> {
    require_sets(sets)?;
    let spacings = spacings(sets);
    let mut counts = vec![0usize; grid.bins];
    for &d in &spacings {
        if let Some(i) = grid.index(d) {
            counts[i] += 1;
        }
    }
    Ok(DensityTable::from_counts(
        grid,
        &counts,
        spacings.len(),
        spacings.len().max(1) as f64,
        sets.len(),
    ))
}

/// All consecutive spacings, including the wrap-around gap for periodic sets.
pub fn spacings(sets: &[UnfoldedZeros]) -> Vec<f64> {
    let mut out = Vec::new();
    for set in sets {
        let v = &set.values;
        if v.len() < 2 {
            continue;
        }
        out.extend(v.windows(2).map(|w| w[1] - w[0]));
        if let Some(p) = set.period {
            out.push(p - v[v.len() - 1] + v[0]);
        }
    }
    out
}

/// `(mean of v^k, block-jackknife standard error)`.
///
/// Values are split into at most 100 contiguous blocks, so serial
/// correlation shorter than a block is accounted for.
pub fn moment_estimator(values: &[f64], k: u32) -> Result<(f64, f64)> {
    if values.is_empty() {
        return invalid("moment of an empty sequence");
    }
    if k == 0 {
        return invalid("moment order must be positive");
    }
    let powered: Vec<f64> = values.iter().map(|v| v.powi(k as i32)).collect();
    let n = powered.len();
    let total: f64 = powered.iter().sum();
    let mean = total / n as f64;
    let blocks = n.min(100);
    if blocks < 2 {
        return Ok((mean, 0.0));
    }
    let mut leave_out = Vec::with_capacity(blocks);
    for b in 0..blocks {
        let lo = b * n / blocks;
        let hi = (b + 1) * n / blocks;
        let s: f64 = powered[lo..hi].iter().sum();
        leave_out.push((total - s) / (n - (hi - lo)) as f64);
    }
    let g = blocks as f64;
    let jmean = leave_out.iter().sum::<f64>() / g;
    let var = (g - 1.0) / g * leave_out.iter().map(|x| (x - jmean).powi(2)).sum::<f64>();
    Ok((mean, var.sqrt()))
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return if a.len() == b.len() { 0.0 } else { 1.0 };
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// One-sample KS statistic against a continuous CDF.
pub fn ks_against_cdf<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Mean spacing of the pooled sets.
pub fn mean_spacing(sets: &[UnfoldedZeros]) -> f64 {
    let s = spacings(sets);
    s.iter().sum::<f64>() / s.len().max(1) as f64
}
