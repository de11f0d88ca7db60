//! The ε-normalized residual network and its exact derivatives.
//!
//! The architecture is the analytic family the convergence theory is proven
//! for: a residual stream of width d through L two-layer GELU blocks,
//!
//! ```text
//! u_0 = x,   u_{ℓ+1} = u_ℓ + block_scale · W2_ℓ · GELU(W1_ℓ · τ_ε(u_ℓ)),
//! f(θ; x) = W_out · τ_ε(u_L),
//! ```
//!
//! where τ_ε(u) = u/√(‖u‖² + ε²) is the smooth normalization that keeps
//! every activation bounded (and its Jacobian bounded by 1/ε). GELU uses the
//! exact error-function form — the analyticity arguments behind the theory
//! need the exact function, not the tanh approximation.
//!
//! [`grad_loss`] and [`jacobian_stack`] are hand-written reverse mode over
//! this fixed architecture; they are validated against central finite
//! differences in the tests, and their determinism (fixed accumulation
//! order) makes training runs bitwise reproducible.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::error::{Error, Result};
use crate::linalg::{dot, Mat};

fn default_block_scale() -> f64 {
    1.0
}

/// Architecture description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetConfig {
    /// Width of the residual stream (input dimension).
    pub d: usize,
    /// Number of residual blocks.
    pub l: usize,
    /// Hidden width m_ℓ of each block; length `l`.
    pub hidden: Vec<usize>,
    /// τ_ε parameter; must be positive.
    pub eps: f64,
    /// Output dimension of the linear readout.
    pub out_dim: usize,
    /// Scale on every block's contribution (the theory's "arbitrarily small
    /// adjustment on the scale"); default 1.
    #[serde(default = "default_block_scale")]
    pub block_scale: f64,
}

impl NetConfig {
    pub fn new(d: usize, l: usize, hidden: Vec<usize>, eps: f64, out_dim: usize) -> Result<Self> {
        let cfg = Self { d, l, hidden, eps, out_dim, block_scale: 1.0 };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Uniform-width convenience constructor.
    pub fn uniform(d: usize, l: usize, hidden: usize, eps: f64, out_dim: usize) -> Result<Self> {
        Self::new(d, l, vec![hidden; l], eps, out_dim)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.out_dim == 0 {
            return Err(Error::InvalidInput("network widths must be at least 1".into()));
        }
        if self.hidden.len() != self.l {
            return Err(Error::ShapeMismatch(format!(
                "{} hidden widths for {} blocks",
                self.hidden.len(),
                self.l
            )));
        }
        if self.hidden.iter().any(|&m| m == 0) {
            return Err(Error::InvalidInput("hidden widths must be at least 1".into()));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidInput(format!("eps must be positive, got {}", self.eps)));
        }
        if !(self.block_scale > 0.0 && self.block_scale.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "block_scale must be positive, got {}",
                self.block_scale
            )));
        }
        Ok(())
    }

    /// Total parameter count dim θ = Σ_ℓ 2·m_ℓ·d + out_dim·d.
    pub fn dim_theta(&self) -> usize {
        self.hidden.iter().map(|m| 2 * m * self.d).sum::<usize>() + self.out_dim * self.d
    }
}

/// θ: per-block weight pairs plus the linear readout.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualNetParams {
    /// W1_ℓ: m_ℓ × d.
    pub w1: Vec<Mat>,
    /// W2_ℓ: d × m_ℓ.
    pub w2: Vec<Mat>,
    /// W_out: out_dim × d.
    pub w_out: Mat,
}

impl ResidualNetParams {
    pub fn zeros(cfg: &NetConfig) -> Self {
        Self {
            w1: cfg.hidden.iter().map(|&m| Mat::zeros(m, cfg.d)).collect(),
            w2: cfg.hidden.iter().map(|&m| Mat::zeros(cfg.d, m)).collect(),
            w_out: Mat::zeros(cfg.out_dim, cfg.d),
        }
    }

    pub fn matches(&self, cfg: &NetConfig) -> bool {
        self.w1.len() == cfg.l
            && self.w2.len() == cfg.l
            && self
                .w1
                .iter()
                .zip(&cfg.hidden)
                .all(|(w, &m)| w.rows() == m && w.cols() == cfg.d)
            && self
                .w2
                .iter()
                .zip(&cfg.hidden)
                .all(|(w, &m)| w.rows() == cfg.d && w.cols() == m)
            && self.w_out.rows() == cfg.out_dim
            && self.w_out.cols() == cfg.d
    }

    /// Matrices in block order (W1_0, W2_0, W1_1, …, W_out), each row-major —
    /// the flat coordinate system used by finite differences and GD updates.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut flat = Vec::new();
        for (a, b) in self.w1.iter().zip(&self.w2) {
            flat.extend_from_slice(a.as_slice());
            flat.extend_from_slice(b.as_slice());
        }
        flat.extend_from_slice(self.w_out.as_slice());
        flat
    }

    /// Inverse of [`to_flat`].
    pub fn from_flat(cfg: &NetConfig, flat: &[f64]) -> Result<Self> {
        if flat.len() != cfg.dim_theta() {
            return Err(Error::ShapeMismatch(format!(
                "flat vector has {} entries, dim θ is {}",
                flat.len(),
                cfg.dim_theta()
            )));
        }
        let mut params = Self::zeros(cfg);
        let mut at = 0;
        {
            let mut take = |mat: &mut Mat| {
                let len = mat.rows() * mat.cols();
                mat.as_mut_slice().copy_from_slice(&flat[at..at + len]);
                at += len;
            };
            for l in 0..cfg.l {
                take(&mut params.w1[l]);
                take(&mut params.w2[l]);
            }
            take(&mut params.w_out);
        }
        Ok(params)
    }

    /// θ ← θ + α·other (same shapes assumed).
    pub fn axpy(&mut self, alpha: f64, other: &Self) {
        let pairs = self
            .w1
            .iter_mut()
            .chain(self.w2.iter_mut())
            .chain(std::iter::once(&mut self.w_out))
            .zip(
                other
                    .w1
                    .iter()
                    .chain(other.w2.iter())
                    .chain(std::iter::once(&other.w_out)),
            );
        for (a, b) in pairs {
            for (x, y) in a.as_mut_slice().iter_mut().zip(b.as_slice()) {
                *x += alpha * y;
            }
        }
    }

    /// Euclidean norm over all entries.
    pub fn flat_norm(&self) -> f64 {
        let sum: f64 = self
            .w1
            .iter()
            .chain(self.w2.iter())
            .chain(std::iter::once(&self.w_out))
            .map(|m| m.as_slice().iter().map(|v| v * v).sum::<f64>())
            .sum();
        sum.sqrt()
    }
}

/// Seeded Gaussian initialization, entry std = 1/√fan_in per matrix
/// (fan_in = d for W1 and W_out, m_ℓ for W2). Any absolutely continuous
/// initialization works for the theory; this one is the usual variance-
/// preserving choice.
pub fn init_params(cfg: &NetConfig, seed: u64) -> ResidualNetParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fill = |mat: &mut Mat, fan_in: usize| {
        let std = 1.0 / (fan_in as f64).sqrt();
        for v in mat.as_mut_slice() {
            let z: f64 = rand_distr::StandardNormal.sample(&mut rng);
            *v = std * z;
        }
    };
    let mut params = ResidualNetParams::zeros(cfg);
    for l in 0..cfg.l {
        fill(&mut params.w1[l], cfg.d);
        fill(&mut params.w2[l], cfg.hidden[l]);
    }
    fill(&mut params.w_out, cfg.d);
    params
}

/// τ_ε(u) = u / √(‖u‖² + ε²): smooth normalization with ‖τ_ε(u)‖ < 1.
pub fn tau_eps(u: &[f64], eps: f64) -> Vec<f64> {
    let s = (dot(u, u) + eps * eps).sqrt();
    u.iter().map(|&v| v / s).collect()
}

/// ∇τ_ε(u)·v = v/s − u (uᵀv)/s³ with s = √(‖u‖² + ε²). The Jacobian is
/// symmetric, so this serves as both JVP and VJP.
fn tau_eps_jvp(u: &[f64], v: &[f64], eps: f64) -> Vec<f64> {
    let s2 = dot(u, u) + eps * eps;
    let s = s2.sqrt();
    let coeff = dot(u, v) / (s2 * s);
    u.iter().zip(v).map(|(&ui, &vi)| vi / s - ui * coeff).collect()
}

/// Standard normal CDF via erf.
fn std_normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
}

/// Standard normal density.
fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Exact GELU: x·Φ(x).
pub fn gelu(x: f64) -> f64 {
    x * std_normal_cdf(x)
}

/// GELU derivative Φ(x) + x·φ(x).
pub fn gelu_prime(x: f64) -> f64 {
    std_normal_cdf(x) + x * std_normal_pdf(x)
}

/// Per-layer intermediates of one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Residual stream u_0 … u_L.
    pub u: Vec<Vec<f64>>,
    /// τ_ε(u_0) … τ_ε(u_L).
    pub tau: Vec<Vec<f64>>,
    /// Pre-activations z_ℓ = W1_ℓ τ_ε(u_ℓ).
    pub pre: Vec<Vec<f64>>,
    /// Activations GELU(z_ℓ).
    pub act: Vec<Vec<f64>>,
    /// Network output f(θ; x).
    pub output: Vec<f64>,
}

/// Evaluates f(θ; x), returning the output and the cache needed for reverse
/// mode. Errors on a non-finite intermediate (unreachable for finite params
/// thanks to τ_ε, but checked as a diagnostic).
pub fn forward(params: &ResidualNetParams, cfg: &NetConfig, x: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
    if x.len() != cfg.d {
        return Err(Error::DimensionMismatch { expected: cfg.d, got: x.len() });
    }
    let mut cache = ForwardCache {
        u: Vec::with_capacity(cfg.l + 1),
        tau: Vec::with_capacity(cfg.l + 1),
        pre: Vec::with_capacity(cfg.l),
        act: Vec::with_capacity(cfg.l),
        output: Vec::new(),
    };
    let mut u = x.to_vec();
    for l in 0..cfg.l {
        let t = tau_eps(&u, cfg.eps);
        let z = params.w1[l].matvec(&t);
        let a: Vec<f64> = z.iter().map(|&v| gelu(v)).collect();
        let delta = params.w2[l].matvec(&a);
        let next: Vec<f64> = u
            .iter()
            .zip(&delta)
            .map(|(&ui, &di)| ui + cfg.block_scale * di)
            .collect();
        cache.u.push(u);
        cache.tau.push(t);
        cache.pre.push(z);
        cache.act.push(a);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteForward);
        }
        u = next;
    }
    let t = tau_eps(&u, cfg.eps);
    let f = params.w_out.matvec(&t);
    if f.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteForward);
    }
    cache.u.push(u);
    cache.tau.push(t);
    cache.output = f.clone();
    Ok((f, cache))
}

/// Accumulates ∇_θ (wᵀ f(θ; x)) into `grad`, given the forward cache.
fn backward_into(
    params: &ResidualNetParams,
    cfg: &NetConfig,
    cache: &ForwardCache,
    w: &[f64],
    grad: &mut ResidualNetParams,
) {
    // Readout: f = W_out τ(u_L).
    let t_last = &cache.tau[cfg.l];
    for r in 0..cfg.out_dim {
        for c in 0..cfg.d {
            grad.w_out[(r, c)] += w[r] * t_last[c];
        }
    }
    // Cotangent on u_L through the final normalization.
    let v_t = params.w_out.t_matvec(w);
    let mut v = tau_eps_jvp(&cache.u[cfg.l], &v_t, cfg.eps);
    // Blocks in reverse: u_{ℓ+1} = u_ℓ + s·W2 GELU(W1 τ(u_ℓ)).
    for l in (0..cfg.l).rev() {
        let a = &cache.act[l];
        let m = cfg.hidden[l];
        for r in 0..cfg.d {
            for c in 0..m {
                grad.w2[l][(r, c)] += cfg.block_scale * v[r] * a[c];
            }
        }
        let mut c_act = params.w2[l].t_matvec(&v);
        for (ci, &zi) in c_act.iter_mut().zip(&cache.pre[l]) {
            *ci *= cfg.block_scale * gelu_prime(zi);
        }
        let t = &cache.tau[l];
        for r in 0..m {
            for c in 0..cfg.d {
                grad.w1[l][(r, c)] += c_act[r] * t[c];
            }
        }
        let v_tau = params.w1[l].t_matvec(&c_act);
        let through = tau_eps_jvp(&cache.u[l], &v_tau, cfg.eps);
        for (vi, ti) in v.iter_mut().zip(&through) {
            *vi += ti;
        }
    }
}

/// Full-batch ℓ² loss ℒ(θ) = (1/N) Σ_i ½‖y_i − f(θ; x_i)‖² and its exact
/// gradient. Points are processed and accumulated in index order, so the
/// result is bitwise deterministic.
pub fn grad_loss(
    params: &ResidualNetParams,
    cfg: &NetConfig,
    xs: &[Vec<f64>],
    ys: &[Vec<f64>],
) -> Result<(f64, ResidualNetParams)> {
    if xs.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if xs.len() != ys.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} inputs vs {} targets",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len() as f64;
    let mut loss = 0.0;
    let mut grad = ResidualNetParams::zeros(cfg);
    for (x, y) in xs.iter().zip(ys) {
        if y.len() != cfg.out_dim {
            return Err(Error::DimensionMismatch { expected: cfg.out_dim, got: y.len() });
        }
        let (f, cache) = forward(params, cfg, x)?;
        let residual: Vec<f64> = f.iter().zip(y).map(|(&fi, &yi)| fi - yi).collect();
        loss += 0.5 * dot(&residual, &residual) / n;
        let w: Vec<f64> = residual.iter().map(|r| r / n).collect();
        backward_into(params, cfg, &cache, &w, &mut grad);
    }
    Ok((loss, grad))
}

/// Stacked Jacobian J of shape (N·out_dim) × dim θ: row i·out_dim + r is
/// ∇_θ f_r(θ; x_i) in the [`ResidualNetParams::to_flat`] coordinate order
/// (point-major, output-coordinate-minor).
pub fn jacobian_stack(params: &ResidualNetParams, cfg: &NetConfig, xs: &[Vec<f64>]) -> Result<Mat> {
    use rayon::prelude::*;
    if xs.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let rows: Vec<Vec<f64>> = xs
        .par_iter()
        .map(|x| -> Result<Vec<Vec<f64>>> {
            let (_, cache) = forward(params, cfg, x)?;
            let mut point_rows = Vec::with_capacity(cfg.out_dim);
            for r in 0..cfg.out_dim {
                let mut w = vec![0.0; cfg.out_dim];
                w[r] = 1.0;
                let mut grad = ResidualNetParams::zeros(cfg);
                backward_into(params, cfg, &cache, &w, &mut grad);
                point_rows.push(grad.to_flat());
            }
            Ok(point_rows)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(Mat::from_rows(&rows))
}

/// Writes params as a bundle: `config.json` plus one hex-float CSV per
/// matrix (`block<ℓ>_w1.csv`, `block<ℓ>_w2.csv`, `w_out.csv`). The round
/// trip through [`load_params`] is bit-exact.
pub fn save_params(dir: impl AsRef<Path>, cfg: &NetConfig, params: &ResidualNetParams) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let file = std::fs::File::create(dir.join("config.json"))?;
    serde_json::to_writer_pretty(file, cfg)?;
    let write_mat = |name: String, mat: &Mat| -> Result<()> {
        let mut w = csv::Writer::from_path(dir.join(name))?;
        for r in 0..mat.rows() {
            let rec: Vec<String> =
                mat.row(r).iter().map(|&v| crate::ingest::f64_to_hex(v)).collect();
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    };
    for l in 0..cfg.l {
        write_mat(format!("block{l}_w1.csv"), &params.w1[l])?;
        write_mat(format!("block{l}_w2.csv"), &params.w2[l])?;
    }
    write_mat("w_out.csv".into(), &params.w_out)?;
    Ok(())
}

/// Reads a bundle written by [`save_params`], validating shapes against the
/// stored config.
pub fn load_params(dir: impl AsRef<Path>) -> Result<(NetConfig, ResidualNetParams)> {
    let dir = dir.as_ref();
    let cfg: NetConfig = serde_json::from_reader(std::fs::File::open(dir.join("config.json"))?)?;
    cfg.validate()?;
    let read_mat = |name: String, rows: usize, cols: usize| -> Result<Mat> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .from_path(dir.join(&name))?;
        let mut data = Vec::with_capacity(rows);
        for rec in rdr.records() {
            let rec = rec?;
            let row: Vec<f64> = rec
                .iter()
                .map(crate::ingest::hex_to_f64)
                .collect::<Result<Vec<f64>>>()?;
            data.push(row);
        }
        if data.len() != rows || data.iter().any(|r| r.len() != cols) {
            return Err(Error::ShapeMismatch(format!(
                "{name} does not hold a {rows}×{cols} matrix"
            )));
        }
        Ok(Mat::from_rows(&data))
    };
    let mut params = ResidualNetParams::zeros(&cfg);
    for l in 0..cfg.l {
        params.w1[l] = read_mat(format!("block{l}_w1.csv"), cfg.hidden[l], cfg.d)?;
        params.w2[l] = read_mat(format!("block{l}_w2.csv"), cfg.d, cfg.hidden[l])?;
    }
    params.w_out = read_mat("w_out.csv".into(), cfg.out_dim, cfg.d)?;
    Ok((cfg, params))
}
