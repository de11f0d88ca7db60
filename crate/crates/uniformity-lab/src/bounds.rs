//! Densities, samplers, and Monte Carlo verification of the h_min bounds.
//!
//! For N points drawn i.i.d. from a bounded density π on a box Ω, the
//! minimum pairwise distance h_min obeys two-sided probabilistic bounds:
//! with probability at least 1 − 2δ,
//!
//! ```text
//! (2δ / (π_max N(N−1) V_d))^{1/d}  ≤  h_min  ≤  C (−log δ / (π̄_max (N−1) V_d))^{1/d}
//! ```
//!
//! where V_d is the unit-ball volume and π_max, π̄_max are density
//! functionals (sup, and the level whose superlevel set still contains a
//! suitable ball). This module evaluates those closed forms
//! ([`hmin_theoretical_bounds`]), draws datasets from uniform-box and
//! truncated-Gaussian-mixture densities ([`DensitySpec::sample`]), and
//! measures empirical coverage over many trials ([`monte_carlo_hmin`]).
//!
//! The constant C is not pinned by the theory; [`calibrate_constant`] fixes
//! it once per dimension from a pilot uniform-box grid (the frozen results
//! are [`CALIBRATED_C_D1`] and [`CALIBRATED_C_D2`]).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::geometry::distance_report;
use crate::ingest::{DataPoint, EmbeddedDataset, Metric};

/// Quadrature resolution per axis for density functionals and integration
/// validation (mixtures, d ≤ 2).
const GRID_PER_AXIS: usize = 256;
/// Per-point attempt cap for mixture rejection sampling.
const REJECTION_CAP: usize = 1_000_000;

/// Axis-aligned box domain Ω.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Domain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::DensitySpec(format!(
                "domain needs matching nonempty bounds, got {} lows and {} highs",
                lo.len(),
                hi.len()
            )));
        }
        for (c, (&a, &b)) in lo.iter().zip(&hi).enumerate() {
            if !a.is_finite() || !b.is_finite() || b <= a {
                return Err(Error::DensitySpec(format!(
                    "domain axis {c} must satisfy lo < hi with finite bounds, got [{a}, {b}]"
                )));
            }
        }
        Ok(Self { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(&v, (&a, &b))| (a..=b).contains(&v))
    }
}

/// Density family over a box domain.
#[derive(Debug, Clone, PartialEq)]
enum Kind {
    UniformBox,
    /// Diagonal-covariance Gaussian mixture restricted to the domain and
    /// renormalized. `norm` is the truncated total mass Σ_c w_c ∫_Ω N_c,
    /// precomputed so `density` integrates to one.
    TruncatedGaussianMixture {
        weights: Vec<f64>,
        means: Vec<Vec<f64>>,
        stds: Vec<Vec<f64>>,
        norm: f64,
    },
}

/// A validated density: the sampling domain plus the analytic functionals
/// the h_min bounds consume. Built via [`DensitySpec::uniform_box`],
/// [`DensitySpec::gaussian_mixture`], or a parsed [`DensityConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensitySpec {
    kind: Kind,
    domain: Domain,
    /// Sup of the density: analytic for uniform, grid max for mixtures.
    pub pi_max: f64,
    /// Level whose superlevel set Ω_max backs the upper bound; equals
    /// `pi_max` for uniform boxes and half the grid max for mixtures.
    pub pi_bar_max: f64,
    /// Inf of the density over the domain grid (0 when it underflows).
    pub pi_min: f64,
}

/// Serializable density description (the `--spec` TOML for the CLI).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensityConfig {
    UniformBox {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    TruncatedGaussianMixture {
        lo: Vec<f64>,
        hi: Vec<f64>,
        weights: Vec<f64>,
        means: Vec<Vec<f64>>,
        stds: Vec<Vec<f64>>,
    },
}

impl DensityConfig {
    pub fn build(&self) -> Result<DensitySpec> {
        match self {
            DensityConfig::UniformBox { lo, hi } => {
                DensitySpec::uniform_box(Domain::new(lo.clone(), hi.clone())?)
            }
            DensityConfig::TruncatedGaussianMixture { lo, hi, weights, means, stds } => {
                DensitySpec::gaussian_mixture(
                    Domain::new(lo.clone(), hi.clone())?,
                    weights.clone(),
                    means.clone(),
                    stds.clone(),
                )
            }
        }
    }
}

/// Standard normal density.
fn phi(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// ∫_a^b N(x; μ, σ²) dx via the error function.
fn gaussian_mass(a: f64, b: f64, mu: f64, sigma: f64) -> f64 {
    let s = sigma * 2.0f64.sqrt();
    0.5 * (erf((b - mu) / s) - erf((a - mu) / s))
}

impl DensitySpec {
    /// The uniform density 1/|Ω| on a box; all three functionals coincide.
    pub fn uniform_box(domain: Domain) -> Result<Self> {
        let level = 1.0 / domain.volume();
        Ok(Self { kind: Kind::UniformBox, domain, pi_max: level, pi_bar_max: level, pi_min: level })
    }

    /// Truncated Gaussian mixture on a box, d ≤ 2. Weights must be positive
    /// (they are renormalized together with the truncation), and the
    /// resulting density must integrate to 1 within 1e-3 on the quadrature
    /// grid — densities too spiky for the grid to certify are rejected.
    pub fn gaussian_mixture(
        domain: Domain,
        weights: Vec<f64>,
        means: Vec<Vec<f64>>,
        stds: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let d = domain.dim();
        if d > 2 {
            return Err(Error::UnsupportedDim { d });
        }
        if weights.is_empty() || weights.len() != means.len() || weights.len() != stds.len() {
            return Err(Error::DensitySpec(format!(
                "mixture needs matching component lists, got {} weights, {} means, {} stds",
                weights.len(),
                means.len(),
                stds.len()
            )));
        }
        for (c, w) in weights.iter().enumerate() {
            if !w.is_finite() || *w <= 0.0 {
                return Err(Error::DensitySpec(format!("weight {c} must be positive, got {w}")));
            }
        }
        for (c, (m, s)) in means.iter().zip(&stds).enumerate() {
            if m.len() != d || s.len() != d {
                return Err(Error::DensitySpec(format!(
                    "component {c} must have {d}-dimensional mean and std"
                )));
            }
            if m.iter().any(|v| !v.is_finite()) || s.iter().any(|v| !v.is_finite() || *v <= 0.0) {
                return Err(Error::DensitySpec(format!(
                    "component {c} needs finite means and positive stds"
                )));
            }
        }
        // Truncated mass: Σ_c w_c Π_axis ∫_[lo,hi] N(·; μ, σ²).
        let mut norm = 0.0;
        for ((w, m), s) in weights.iter().zip(&means).zip(&stds) {
            let mut mass = *w;
            for axis in 0..d {
                mass *= gaussian_mass(domain.lo[axis], domain.hi[axis], m[axis], s[axis]);
            }
            norm += mass;
        }
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::DensitySpec(
                "mixture carries no mass inside the domain".into(),
            ));
        }
        let mut spec = Self {
            kind: Kind::TruncatedGaussianMixture { weights, means, stds, norm },
            domain,
            pi_max: 0.0,
            pi_bar_max: 0.0,
            pi_min: 0.0,
        };
        let (integral, max, min) = spec.grid_scan();
        if (integral - 1.0).abs() > 1e-3 {
            return Err(Error::DensitySpec(format!(
                "density integrates to {integral:.6} on the quadrature grid, not 1 ± 1e-3 \
                 (stds too small for the grid?)"
            )));
        }
        spec.pi_max = max;
        spec.pi_bar_max = max / 2.0;
        spec.pi_min = min;
        Ok(spec)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    /// Density value at `x` (0 outside the domain).
    pub fn density(&self, x: &[f64]) -> f64 {
        if !self.domain.contains(x) {
            return 0.0;
        }
        match &self.kind {
            Kind::UniformBox => 1.0 / self.domain.volume(),
            Kind::TruncatedGaussianMixture { weights, means, stds, norm } => {
                let mut g = 0.0;
                for ((w, m), s) in weights.iter().zip(means).zip(stds) {
                    let mut term = *w;
                    for axis in 0..x.len() {
                        term *= phi((x[axis] - m[axis]) / s[axis]) / s[axis];
                    }
                    g += term;
                }
                g / norm
            }
        }
    }

    /// Cell centers of the per-axis quadrature grid.
    fn grid_centers(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        let axis_centers: Vec<Vec<f64>> = (0..d)
            .map(|c| {
                (0..GRID_PER_AXIS)
                    .map(|i| {
                        self.domain.lo[c]
                            + (self.domain.hi[c] - self.domain.lo[c]) * (i as f64 + 0.5)
                                / GRID_PER_AXIS as f64
                    })
                    .collect()
            })
            .collect();
        match d {
            1 => axis_centers[0].iter().map(|&x| vec![x]).collect(),
            2 => {
                let mut pts = Vec::with_capacity(GRID_PER_AXIS * GRID_PER_AXIS);
                for &y in &axis_centers[1] {
                    for &x in &axis_centers[0] {
                        pts.push(vec![x, y]);
                    }
                }
                pts
            }
            _ => unreachable!("grid functionals are restricted to d ≤ 2"),
        }
    }

    /// Midpoint-rule integral plus grid max/min of the density.
    fn grid_scan(&self) -> (f64, f64, f64) {
        let cell = self.domain.volume() / (GRID_PER_AXIS as f64).powi(self.dim() as i32);
        let mut integral = 0.0;
        let mut max = f64::NEG_INFINITY;
        let mut min = f64::INFINITY;
        for p in self.grid_centers() {
            let v = self.density(&p);
            integral += v * cell;
            max = max.max(v);
            min = min.min(v);
        }
        (integral, max, min)
    }

    /// Numerically checks the upper bound's geometric side condition: does a
    /// ball of `radius` fit inside Ω_max = {x | π(x) ≥ π̄_max} (and inside
    /// the domain)? Uniform boxes reduce to the box admitting the ball;
    /// mixtures are checked on the quadrature grid.
    pub fn ball_condition_holds(&self, radius: f64) -> bool {
        let d = self.dim();
        let fits_box = |center: &[f64]| {
            center
                .iter()
                .zip(self.domain.lo.iter().zip(&self.domain.hi))
                .all(|(&c, (&a, &b))| c - a >= radius && b - c >= radius)
        };
        match &self.kind {
            Kind::UniformBox => self
                .domain
                .lo
                .iter()
                .zip(&self.domain.hi)
                .all(|(&a, &b)| b - a >= 2.0 * radius),
            Kind::TruncatedGaussianMixture { .. } => {
                let centers = self.grid_centers();
                let level: Vec<bool> =
                    centers.iter().map(|p| self.density(p) >= self.pi_bar_max).collect();
                let step: Vec<f64> = (0..d)
                    .map(|c| (self.domain.hi[c] - self.domain.lo[c]) / GRID_PER_AXIS as f64)
                    .collect();
                let reach: Vec<isize> =
                    step.iter().map(|s| (radius / s).ceil() as isize).collect();
                'centers: for (ci, center) in centers.iter().enumerate() {
                    if !level[ci] || !fits_box(center) {
                        continue;
                    }
                    match d {
                        1 => {
                            let i = ci as isize;
                            for off in -reach[0]..=reach[0] {
                                let j = i + off;
                                if (off as f64 * step[0]).abs() > radius {
                                    continue;
                                }
                                if j < 0 || j >= GRID_PER_AXIS as isize {
                                    continue 'centers;
                                }
                                if !level[j as usize] {
                                    continue 'centers;
                                }
                            }
                            return true;
                        }
                        2 => {
                            let (row, col) =
                                (ci as isize / GRID_PER_AXIS as isize, ci as isize % GRID_PER_AXIS as isize);
                            for dr in -reach[1]..=reach[1] {
                                for dc in -reach[0]..=reach[0] {
                                    let dist2 = (dr as f64 * step[1]).powi(2)
                                        + (dc as f64 * step[0]).powi(2);
                                    if dist2 > radius * radius {
                                        continue;
                                    }
                                    let (r, c) = (row + dr, col + dc);
                                    if r < 0
                                        || r >= GRID_PER_AXIS as isize
                                        || c < 0
                                        || c >= GRID_PER_AXIS as isize
                                        || !level[(r * GRID_PER_AXIS as isize + c) as usize]
                                    {
                                        continue 'centers;
                                    }
                                }
                            }
                            return true;
                        }
                        _ => unreachable!(),
                    }
                }
                false
            }
        }
    }

    /// Draws `n` i.i.d. points. Uniform boxes use per-coordinate uniforms;
    /// mixtures pick a component by weight, draw the Gaussian, and reject
    /// points outside the domain (capped at 10⁶ attempts per point).
    pub fn sample(&self, n: usize, seed: u64) -> Result<EmbeddedDataset> {
        let d = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut points = Vec::with_capacity(n);
        for i in 0..n {
            let vector = match &self.kind {
                Kind::UniformBox => (0..d)
                    .map(|c| rng.random_range(self.domain.lo[c]..self.domain.hi[c]))
                    .collect::<Vec<f64>>(),
                Kind::TruncatedGaussianMixture { weights, means, stds, .. } => {
                    let total: f64 = weights.iter().sum();
                    let mut accepted = None;
                    for _ in 0..REJECTION_CAP {
                        let mut pick = rng.random_range(0.0..total);
                        let mut comp = 0;
                        for (c, w) in weights.iter().enumerate() {
                            if pick < *w || c == weights.len() - 1 {
                                comp = c;
                                break;
                            }
                            pick -= w;
                        }
                        let cand: Vec<f64> = (0..d)
                            .map(|axis| {
                                let z: f64 = rand_distr::StandardNormal.sample(&mut rng);
                                means[comp][axis] + stds[comp][axis] * z
                            })
                            .collect();
                        if self.domain.contains(&cand) {
                            accepted = Some(cand);
                            break;
                        }
                    }
                    accepted.ok_or(Error::RejectionCap(REJECTION_CAP))?
                }
            };
            points.push(DataPoint { id: format!("x{i}"), vector });
        }
        EmbeddedDataset::new(d, points, Metric::Euclidean)
    }
}

/// Volume of the d-dimensional unit ball, V_d = π^{d/2} / Γ(d/2 + 1).
pub fn unit_ball_volume(d: usize) -> f64 {
    assert!(d >= 1, "dimension must be positive");
    let half = d as f64 / 2.0;
    (half * std::f64::consts::PI.ln() - ln_gamma(half + 1.0)).exp()
}

/// The three closed-form h_min bounds for N i.i.d. draws from `spec`:
/// `(lower, upper, upper_general)` with
/// lower = (2δ/(π_max N(N−1) V_d))^{1/d},
/// upper = C(−log δ/(π̄_max (N−1) V_d))^{1/d}, and
/// upper_general the same with π_min in place of C and π̄_max (+∞ when
/// π_min = 0).
pub fn hmin_theoretical_bounds(
    spec: &DensitySpec,
    n: usize,
    delta: f64,
    c: f64,
) -> Result<(f64, f64, f64)> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidDelta(delta));
    }
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidInput(format!("constant C must be positive, got {c}")));
    }
    let d = spec.dim();
    let vd = unit_ball_volume(d);
    let nf = n as f64;
    let inv_d = 1.0 / d as f64;
    let lower = (2.0 * delta / (spec.pi_max * nf * (nf - 1.0) * vd)).powf(inv_d);
    let upper = c * (-delta.ln() / (spec.pi_bar_max * (nf - 1.0) * vd)).powf(inv_d);
    let upper_general = if spec.pi_min == 0.0 {
        f64::INFINITY
    } else {
        (-delta.ln() / (spec.pi_min * (nf - 1.0) * vd)).powf(inv_d)
    };
    Ok((lower, upper, upper_general))
}

/// Summary statistics of the per-trial h_min values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HminSummary {
    pub mean: f64,
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

/// Outcome of a Monte Carlo h_min experiment; reporting only, no assertions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub n: usize,
    pub d: usize,
    pub delta: f64,
    pub lower: f64,
    pub upper: f64,
    pub constant_c: f64,
    pub trials: usize,
    pub empirical_hmin: HminSummary,
    /// Fraction of trials with h_min ≥ lower.
    pub coverage_lower: f64,
    /// Fraction of trials with h_min ≤ upper.
    pub coverage_upper: f64,
}

/// Smallest sample value whose empirical CDF reaches `q` (nearest-rank).
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let k = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[k - 1]
}

/// Runs `trials` independent draws of N points, computes h_min for each
/// (exact pairwise scan), and reports coverage of the theoretical bounds.
/// Trial t uses seed `seed + t`, so the result is schedule-independent.
pub fn monte_carlo_hmin(
    spec: &DensitySpec,
    n: usize,
    trials: usize,
    delta: f64,
    c: f64,
    seed: u64,
) -> Result<BoundReport> {
    if trials < 30 {
        return Err(Error::InvalidInput(format!(
            "at least 30 trials are needed for coverage estimates, got {trials}"
        )));
    }
    let (lower, upper, _) = hmin_theoretical_bounds(spec, n, delta, c)?;
    let hmins: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let ds = spec.sample(n, seed.wrapping_add(t as u64))?;
            Ok(distance_report(&ds, Metric::Euclidean)?.h_min)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut sorted = hmins.clone();
    sorted.sort_by(f64::total_cmp);
    let summary = HminSummary {
        mean: hmins.iter().sum::<f64>() / trials as f64,
        min: sorted[0],
        q25: quantile(&sorted, 0.25),
        median: quantile(&sorted, 0.5),
        q75: quantile(&sorted, 0.75),
        max: sorted[trials - 1],
    };
    let coverage_lower =
        hmins.iter().filter(|&&h| h >= lower).count() as f64 / trials as f64;
    let coverage_upper =
        hmins.iter().filter(|&&h| h <= upper).count() as f64 / trials as f64;
    Ok(BoundReport {
        n,
        d: spec.dim(),
        delta,
        lower,
        upper,
        constant_c: c,
        trials,
        empirical_hmin: summary,
        coverage_lower,
        coverage_upper,
    })
}

/// Calibrated constant for d = 1, frozen from [`calibrate_constant`].
pub const CALIBRATED_C_D1: f64 = 0.09652035380916513;
/// Calibrated constant for d = 2, frozen from [`calibrate_constant`].
pub const CALIBRATED_C_D2: f64 = 0.3091128396395627;

/// Pilot calibration of the universal constant C for dimension `d`: over a
/// fixed grid of uniform-box experiments (N ∈ {25, 50, 100, 200},
/// δ ∈ {0.5, 0.1, 0.02}, 300 trials each), the smallest C making the upper
/// bound hold in at least a 1−δ fraction of trials is the empirical
/// (1−δ)-quantile of h_min divided by the bound's base value; the result is
/// the maximum over the grid with a 5% safety factor. Deterministic.
pub fn calibrate_constant(d: usize) -> Result<f64> {
    let domain = Domain::new(vec![0.0; d], vec![1.0; d])?;
    let spec = DensitySpec::uniform_box(domain)?;
    let vd = unit_ball_volume(d);
    let mut c_needed = 0.0f64;
    for n in [25usize, 50, 100, 200] {
        for delta in [0.5f64, 0.1, 0.02] {
            let trials = 300;
            let seed = 0xCA11_B8A7 ^ ((n as u64) << 8) ^ (delta.to_bits() >> 40);
            let mut hmins: Vec<f64> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let ds = spec.sample(n, seed.wrapping_add(t as u64))?;
                    Ok(distance_report(&ds, Metric::Euclidean)?.h_min)
                })
                .collect::<Result<Vec<f64>>>()?;
            hmins.sort_by(f64::total_cmp);
            let q = quantile(&hmins, 1.0 - delta);
            let base =
                (-delta.ln() / (spec.pi_bar_max * (n as f64 - 1.0) * vd)).powf(1.0 / d as f64);
            c_needed = c_needed.max(q / base);
        }
    }
    Ok(c_needed * 1.05)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit_square() -> DensitySpec {
        DensitySpec::uniform_box(Domain::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap()).unwrap()
    }

    #[test]
    fn unit_ball_volume_closed_forms() {
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-12);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-12 * PI);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-12 * (4.0 * PI / 3.0));
    }

    #[test]
    fn unit_ball_volume_recursion() {
        // V_d = V_{d−2} · 2π/d.
        for d in 3..=10 {
            let want = unit_ball_volume(d - 2) * 2.0 * PI / d as f64;
            let got = unit_ball_volume(d);
            assert!((got - want).abs() <= 1e-10 * want, "d={d}: {got} vs {want}");
        }
    }

    #[test]
    fn bounds_formula_hand_case() {
        // δ=0.1, N=100, uniform on the unit square (π_max = 1, V_2 = π):
        // lower = (0.2 / (100·99·π))^{1/2} ≈ 0.002535.
        let (lower, upper, upper_general) =
            hmin_theoretical_bounds(&unit_square(), 100, 0.1, 1.0).unwrap();
        let oracle = (0.2 / (100.0 * 99.0 * PI)).sqrt();
        assert!((lower - oracle).abs() < 1e-15);
        assert!((lower - 0.002535).abs() < 2e-6);
        // Uniform box: π̄_max = π_min = π_max, so with C = 1 the two upper
        // branches coincide and sit above lower by the N/2δ vs −log δ gap.
        assert!((upper - upper_general).abs() < 1e-15);
        assert!(lower < upper);
    }

    #[test]
    fn bounds_scaling_and_edge_cases() {
        // Doubling π_max (halving the box) shrinks lower by 2^{−1/d}.
        let half =
            DensitySpec::uniform_box(Domain::new(vec![0.0, 0.0], vec![0.5, 1.0]).unwrap()).unwrap();
        assert!((half.pi_max - 2.0).abs() < 1e-12);
        let (l_full, ..) = hmin_theoretical_bounds(&unit_square(), 100, 0.1, 1.0).unwrap();
        let (l_half, ..) = hmin_theoretical_bounds(&half, 100, 0.1, 1.0).unwrap();
        assert!((l_half / l_full - 2.0f64.powf(-0.5)).abs() < 1e-12);

        // Monotonicity: larger N never raises the lower bound.
        let mut prev = f64::INFINITY;
        for n in [2, 5, 10, 100, 1000, 10_000] {
            let (l, ..) = hmin_theoretical_bounds(&unit_square(), n, 0.1, 1.0).unwrap();
            assert!(l <= prev, "lower bound rose from {prev} to {l} at N={n}");
            prev = l;
        }

        assert!(matches!(
            hmin_theoretical_bounds(&unit_square(), 100, 0.0, 1.0),
            Err(Error::InvalidDelta(_))
        ));
        assert!(matches!(
            hmin_theoretical_bounds(&unit_square(), 100, 1.5, 1.0),
            Err(Error::InvalidDelta(_))
        ));
        assert!(hmin_theoretical_bounds(&unit_square(), 1, 0.1, 1.0).is_err());
        assert!(hmin_theoretical_bounds(&unit_square(), 100, 0.1, 0.0).is_err());
    }

    #[test]
    fn tight_mixture_underflows_to_pi_min_zero() {
        // σ = 0.01 at the center: the density at the corner cells underflows
        // to exactly 0 (exponent ≈ −1240), so the general upper branch
        // degenerates to +∞. The grid still resolves the bump (2.5 cells per
        // σ), so the integration check passes.
        let spec = DensitySpec::gaussian_mixture(
            Domain::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap(),
            vec![1.0],
            vec![vec![0.5, 0.5]],
            vec![vec![0.01, 0.01]],
        )
        .unwrap();
        assert_eq!(spec.pi_min, 0.0);
        let (_, _, upper_general) = hmin_theoretical_bounds(&spec, 100, 0.1, 1.0).unwrap();
        assert!(upper_general.is_infinite());
    }

    #[test]
    fn mixture_functionals_match_analytic_peak() {
        // Single isotropic Gaussian, σ = 0.125, centered in the unit square:
        // peak density = (φ(0)/σ/mass)² per axis ≈ 10.2 — the "10× uniform"
        // biased density used in the mean-comparison experiments.
        let spec = DensitySpec::gaussian_mixture(
            Domain::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap(),
            vec![1.0],
            vec![vec![0.5, 0.5]],
            vec![vec![0.125, 0.125]],
        )
        .unwrap();
        let axis_mass = gaussian_mass(0.0, 1.0, 0.5, 0.125);
        let analytic_peak = (phi(0.0) / 0.125 / axis_mass).powi(2);
        // The 256-per-axis grid does not sample the exact mode; allow 1%.
        assert!(
            (spec.pi_max - analytic_peak).abs() < 0.01 * analytic_peak,
            "grid peak {} vs analytic {}",
            spec.pi_max,
            analytic_peak
        );
        assert!(spec.pi_max > 10.0 && spec.pi_max < 10.4);
        assert_eq!(spec.pi_bar_max, spec.pi_max / 2.0);
    }

    #[test]
    fn spiky_mixture_fails_integration_check() {
        // σ far below the grid cell size: quadrature cannot certify the
        // normalization, so construction is refused.
        let err = DensitySpec::gaussian_mixture(
            Domain::new(vec![0.0], vec![1.0]).unwrap(),
            vec![1.0],
            vec![vec![0.5]],
            vec![vec![1e-4]],
        )
        .unwrap_err();
        assert!(matches!(err, Error::DensitySpec(_)));
    }

    #[test]
    fn uniform_sampler_statistics_and_determinism() {
        let spec = unit_square();
        let ds = spec.sample(10_000, 42).unwrap();
        for c in 0..2 {
            let mean: f64 =
                ds.points().iter().map(|p| p.vector[c]).sum::<f64>() / ds.len() as f64;
            assert!(
                (mean - 0.5).abs() < 0.01,
                "coordinate {c} sample mean {mean} strays from 0.5"
            );
        }
        assert!(ds.points().iter().all(|p| spec.domain().contains(&p.vector)));
        assert_eq!(spec.sample(100, 7).unwrap(), spec.sample(100, 7).unwrap());
        assert_ne!(spec.sample(100, 7).unwrap(), spec.sample(100, 8).unwrap());
        assert!(spec.sample(0, 1).unwrap().is_empty());
    }

    #[test]
    fn mixture_sampler_respects_domain() {
        let spec = DensitySpec::gaussian_mixture(
            Domain::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap(),
            vec![0.7, 0.3],
            vec![vec![0.2, 0.2], vec![0.8, 0.8]],
            vec![vec![0.1, 0.1], vec![0.05, 0.05]],
        )
        .unwrap();
        let ds = spec.sample(500, 9).unwrap();
        assert_eq!(ds.len(), 500);
        assert!(ds.points().iter().all(|p| spec.domain().contains(&p.vector)));
        assert_eq!(ds, spec.sample(500, 9).unwrap());
    }

    #[test]
    fn mixture_with_negligible_interior_mass_hits_rejection_cap() {
        // Component centered 8σ outside the box: acceptance probability
        // ≈ Φ(−7) ≈ 1.3e-12, far beyond the 10⁶-attempt budget.
        let spec = DensitySpec::gaussian_mixture(
            Domain::new(vec![0.0], vec![1.0]).unwrap(),
            vec![1.0],
            vec![vec![8.0]],
            vec![vec![1.0]],
        )
        .unwrap();
        assert!(matches!(spec.sample(1, 0), Err(Error::RejectionCap(_))));
    }

    #[test]
    fn monte_carlo_two_point_trials() {
        let spec = unit_square();
        let report = monte_carlo_hmin(&spec, 2, 50, 0.1, 1.0, 5).unwrap();
        assert_eq!(report.trials, 50);
        assert!(report.empirical_hmin.min <= report.empirical_hmin.median);
        assert!(report.empirical_hmin.median <= report.empirical_hmin.max);
        // With N=2, h_min is the one pairwise distance; cross-check one trial.
        let ds = spec.sample(2, 5).unwrap();
        let d01 = Metric::Euclidean.distance(ds.vector(0), ds.vector(1));
        assert_eq!(report.empirical_hmin.min.min(d01), report.empirical_hmin.min);
        assert!(monte_carlo_hmin(&spec, 2, 10, 0.1, 1.0, 5).is_err(), "trials < 30 rejected");
    }

    #[test]
    fn ball_condition_uniform_and_mixture() {
        let spec = unit_square();
        assert!(spec.ball_condition_holds(0.4));
        assert!(!spec.ball_condition_holds(0.6));
        let peaked = DensitySpec::gaussian_mixture(
            Domain::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap(),
            vec![1.0],
            vec![vec![0.5, 0.5]],
            vec![vec![0.125, 0.125]],
        )
        .unwrap();
        // Ω_max is the central bump above half the peak; a small ball fits,
        // a half-domain ball cannot.
        assert!(peaked.ball_condition_holds(0.05));
        assert!(!peaked.ball_condition_holds(0.45));
    }

    #[test]
    fn biased_density_lowers_mean_hmin() {
        // π_max ≈ 10× uniform concentrates points and shrinks h_min on
        // average; direction verified by running both configurations.
        let uniform = unit_square();
        let biased = DensitySpec::gaussian_mixture(
            Domain::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap(),
            vec![1.0],
            vec![vec![0.5, 0.5]],
            vec![vec![0.125, 0.125]],
        )
        .unwrap();
        let ru = monte_carlo_hmin(&uniform, 100, 100, 0.1, 1.0, 21).unwrap();
        let rb = monte_carlo_hmin(&biased, 100, 100, 0.1, 1.0, 21).unwrap();
        assert!(
            rb.empirical_hmin.mean < ru.empirical_hmin.mean,
            "biased mean {} should undercut uniform mean {}",
            rb.empirical_hmin.mean,
            ru.empirical_hmin.mean
        );
    }

    #[test]
    fn joint_coverage_meets_theory_with_calibrated_constant() {
        // Two-sided guarantee: P(lower ≤ h_min ≤ upper) ≥ 1 − 2δ. Allow three
        // binomial standard errors of Monte Carlo noise, and bound the joint
        // coverage from below by coverage_lower + coverage_upper − 1.
        let spec = unit_square();
        let delta = 0.1;
        let trials = 200;
        let report =
            monte_carlo_hmin(&spec, 50, trials, delta, CALIBRATED_C_D2, 1234).unwrap();
        let target = 1.0 - 2.0 * delta;
        let se = (target * (1.0 - target) / trials as f64).sqrt();
        let joint_lower_bound = report.coverage_lower + report.coverage_upper - 1.0;
        assert!(
            joint_lower_bound >= target - 3.0 * se,
            "joint coverage ≥ {joint_lower_bound:.3} misses {target} − 3·{se:.3}"
        );
    }

    #[test]
    fn calibrated_constants_reproduce() {
        // The calibration pilot is deterministic; the frozen constants must
        // match a recomputation exactly.
        assert_eq!(calibrate_constant(1).unwrap(), CALIBRATED_C_D1);
        assert_eq!(calibrate_constant(2).unwrap(), CALIBRATED_C_D2);
    }
}
