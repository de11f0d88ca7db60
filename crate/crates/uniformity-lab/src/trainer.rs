//! Full-batch gradient descent with per-step theory probes.
//!
//! [`gd_run`] performs the exact update θ^{k+1} = θ^k − η∇ℒ(θ^k) and records
//! a [`TrainTrace`] carrying, per step, the quantities the convergence theory
//! talks about: the frame lower bound μ_low = λ_min(JJᵀ), the residual of the
//! gradient lower bound ‖∇ℒ‖² ≥ (μ_low/N)ℒ, an empirical local smoothness
//! estimate L̂ obtained by inverting the descent inequality, and the per-step
//! convergence-factor residual ℒ(θ^{k+1}) − (1 − η(1 − ηL̂/2)μ_low/N)·ℒ(θ^k).
//!
//! The dissipativity probe ([`dissipativity_rho`]) and the steps-to-threshold
//! measurement ([`steps_to_threshold`]) support the slowdown experiments that
//! tie the selection geometry (h_min) to optimization speed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, jacobi_eigen, norm};
use crate::network::{grad_loss, jacobian_stack, NetConfig, ResidualNetParams};

/// Gradient norms at or below this are treated as numerically stationary by
/// the smoothness probe (the descent-identity inversion divides by ‖∇ℒ‖²).
pub const GRAD_FLOOR: f64 = 1e-14;

/// Default gradient-norm tolerance ε_ℒ: stationarity target for θ* searches
/// and the exclusion threshold of the dissipativity probe.
pub const EPS_GRAD: f64 = 1e-8;

/// μ_low values within this relative band of 0 are reported as exactly 0
/// (JJᵀ is positive semidefinite; anything this small is eigen-solver noise,
/// and degenerate configurations must report a clean zero).
pub const MU_LOW_CLAMP: f64 = 1e-12;

fn default_mu_low_every() -> usize {
    1
}

/// Gradient-descent driver configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GdConfig {
    /// Step size η ≥ 0. The convergence theory needs η ∈ (0, 2/L); η = 0 is
    /// accepted and simply freezes θ (useful as a probe baseline).
    pub eta: f64,
    /// Number of GD updates; the trace then holds `max_steps + 1` states.
    pub max_steps: usize,
    /// Early stop once ℒ(θ^k) ≤ stop_loss.
    #[serde(default)]
    pub stop_loss: Option<f64>,
    /// Cadence (in steps) of the μ_low eigen-solve; the solve is
    /// O((N·out_dim)³), so sparse sampling keeps long runs cheap.
    #[serde(default = "default_mu_low_every")]
    pub mu_low_every: usize,
    /// Seed echoed into the trace (the GD loop itself is deterministic; the
    /// seed names the run for downstream tooling).
    #[serde(default)]
    pub seed: u64,
}

impl GdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidInput(format!("eta must be finite and ≥ 0, got {}", self.eta)));
        }
        if self.mu_low_every == 0 {
            return Err(Error::InvalidInput("mu_low_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// One recorded optimizer state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceStep {
    /// Step index (θ^k before the k-th update).
    pub k: usize,
    /// ℒ(θ^k); finite at every recorded step.
    pub loss: f64,
    /// ‖∇ℒ(θ^k)‖.
    pub grad_norm: f64,
    /// λ_min(JJᵀ) at θ^k, when the cadence sampled this step.
    pub mu_low: Option<f64>,
    /// ℒ(θ^{k+1}) − (1 − η(1 − ηL̂_k/2)·μ_low/N)·ℒ(θ^k) with L̂_k the running
    /// smoothness max up to step k; at most ~0 when the per-step convergence
    /// factor holds. Present when μ_low and a smoothness estimate exist.
    pub conv_factor_residual: Option<f64>,
    /// L̂_k from inverting the descent inequality over (θ^k, θ^{k+1});
    /// absent at the final state and at numerically stationary steps.
    pub descent_s_estimate: Option<f64>,
}

/// Complete record of one GD run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainTrace {
    /// Per-step records; `k` strictly increasing from 0.
    pub steps: Vec<TraceStep>,
    /// Echo of the driving configuration.
    pub config: GdConfig,
    /// Batch size N (the divisor in ℒ and in μ_low/N).
    pub n_points: usize,
    /// True when the run stopped because the loss left the finite range; the
    /// trace then holds the steps up to the failure.
    pub aborted_nonfinite: bool,
}

impl TrainTrace {
    /// Final recorded loss (the trace is never empty after a successful run).
    #[must_use]
    pub fn final_loss(&self) -> f64 {
        self.steps.last().map_or(f64::NAN, |s| s.loss)
    }

    /// Writes the per-step records as CSV (one row per step, empty cells for
    /// absent probes).
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record([
            "k",
            "loss",
            "grad_norm",
            "mu_low",
            "conv_factor_residual",
            "descent_s_estimate",
        ])?;
        let cell = |v: Option<f64>| v.map_or_else(String::new, |x| format!("{x:.17e}"));
        for s in &self.steps {
            wtr.write_record([
                s.k.to_string(),
                format!("{:.17e}", s.loss),
                format!("{:.17e}", s.grad_norm),
                cell(s.mu_low),
                cell(s.conv_factor_residual),
                cell(s.descent_s_estimate),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Frame lower bound μ_low = λ_min(JJᵀ) ≥ 0 at θ, where J is the stacked
/// Jacobian over `xs`.
///
/// The Gram matrix is (N·out_dim) × (N·out_dim) and positive semidefinite;
/// eigenvalues within [`MU_LOW_CLAMP`] (relative to the Gram's Frobenius
/// norm) of zero are reported as exactly 0, so forced degeneracies — a
/// duplicated data point, or dim θ < N·out_dim, where μ_low vanishes
/// identically — come back as a clean zero rather than solver noise.
pub fn mu_low(params: &ResidualNetParams, cfg: &NetConfig, xs: &[Vec<f64>]) -> Result<f64> {
    let jac = jacobian_stack(params, cfg, xs)?;
    let gram = jac.gram();
    let (vals, _) = jacobi_eigen(&gram)?;
    let lam = *vals.last().expect("nonempty spectrum");
    let scale = gram.frob_norm().max(1.0);
    debug_assert!(lam >= -1e-9 * scale, "JJᵀ eigenvalue far below zero: {lam}");
    if lam.abs() <= MU_LOW_CLAMP * scale {
        Ok(0.0)
    } else {
        Ok(lam.max(0.0))
    }
}

/// True when μ_low can possibly be positive: the frame JJᵀ has full rank
/// only if dim θ ≥ N·out_dim. Callers should warn on a false return.
#[must_use]
pub fn mu_low_can_be_positive(cfg: &NetConfig, n_points: usize) -> bool {
    cfg.dim_theta() >= n_points * cfg.out_dim
}

/// Detects a degenerate Jacobian at θ (μ_low below [`MU_LOW_CLAMP`]) and
/// retries with `block_scale · (1 + 1e-3)`, up to `max_retries` bumps.
///
/// The degenerate parameter set has measure zero, so a scale nudge almost
/// surely escapes it — unless the degeneracy is structural (duplicated
/// points, dim θ < N·out_dim, or a scale-independent Jacobian as with L = 0),
/// in which case the final μ_low is still ~0 and is returned as such.
pub fn ensure_positive_mu_low(
    cfg: &NetConfig,
    params: &ResidualNetParams,
    xs: &[Vec<f64>],
    max_retries: usize,
) -> Result<(NetConfig, f64)> {
    let mut cfg = cfg.clone();
    let mut mu = mu_low(params, &cfg, xs)?;
    for _ in 0..max_retries {
        if mu >= MU_LOW_CLAMP {
            break;
        }
        cfg.block_scale *= 1.0 + 1e-3;
        mu = mu_low(params, &cfg, xs)?;
    }
    Ok((cfg, mu))
}

/// L̂ from inverting the descent inequality
/// ℒ(θ^{k+1}) ≤ ℒ(θ^k) − η‖∇ℒ‖² + (η²L/2)‖∇ℒ‖², floored at 0.
fn smoothness_from(loss_k: f64, loss_next: f64, grad_norm: f64, eta: f64) -> f64 {
    let g2 = grad_norm * grad_norm;
    (2.0 * (loss_next - loss_k + eta * g2) / (eta * eta * g2)).max(0.0)
}

/// Runs exact full-batch GD from `params0` and records every step.
///
/// Stops after `max_steps` updates or as soon as ℒ ≤ `stop_loss`; μ_low is
/// computed at steps k ≡ 0 (mod `mu_low_every`). A non-finite loss aborts
/// the run, returning the last finite θ and the trace up to the failure with
/// `aborted_nonfinite` set.
pub fn gd_run(
    params0: &ResidualNetParams,
    cfg: &NetConfig,
    gd: &GdConfig,
    xs: &[Vec<f64>],
    ys: &[Vec<f64>],
) -> Result<(ResidualNetParams, TrainTrace)> {
    gd.validate()?;
    let mut trace = TrainTrace {
        steps: Vec::with_capacity(gd.max_steps + 1),
        config: gd.clone(),
        n_points: xs.len(),
        aborted_nonfinite: false,
    };
    let n = xs.len() as f64;
    let mut theta = params0.clone();
    let mut prev_theta = params0.clone();
    let mut running_lhat: Option<f64> = None;
    for k in 0..=gd.max_steps {
        let (loss, grad) = match grad_loss(&theta, cfg, xs, ys) {
            Ok(pair) => pair,
            Err(Error::NonFiniteForward) => {
                trace.aborted_nonfinite = true;
                return Ok((prev_theta, trace));
            }
            Err(e) => return Err(e),
        };
        if !loss.is_finite() {
            trace.aborted_nonfinite = true;
            return Ok((prev_theta, trace));
        }
        let grad_norm = grad.flat_norm();
        let mu = if k % gd.mu_low_every == 0 {
            Some(mu_low(&theta, cfg, xs)?)
        } else {
            None
        };
        // ℒ(θ^k) is the "next" loss of step k−1: back-fill its probes.
        if let Some(prev) = trace.steps.last_mut() {
            if prev.grad_norm > GRAD_FLOOR && gd.eta > 0.0 {
                let lhat = smoothness_from(prev.loss, loss, prev.grad_norm, gd.eta);
                prev.descent_s_estimate = Some(lhat);
                running_lhat = Some(running_lhat.map_or(lhat, |m| m.max(lhat)));
            }
            if let (Some(mu_prev), Some(lhat)) = (prev.mu_low, running_lhat) {
                let factor = 1.0 - gd.eta * (1.0 - gd.eta * lhat / 2.0) * mu_prev / n;
                prev.conv_factor_residual = Some(loss - factor * prev.loss);
            }
        }
        trace.steps.push(TraceStep {
            k,
            loss,
            grad_norm,
            mu_low: mu,
            conv_factor_residual: None,
            descent_s_estimate: None,
        });
        if gd.stop_loss.is_some_and(|stop| loss <= stop) || k == gd.max_steps {
            break;
        }
        prev_theta.clone_from(&theta);
        theta.axpy(-gd.eta, &grad);
    }
    Ok((theta, trace))
}

/// Residual of the gradient lower bound ‖∇ℒ‖² ≥ (μ_low/N)·ℒ at one θ.
///
/// The bound is identity-level — ‖(1/N)Jᵀr‖² ≥ (λ_min(JJᵀ)/N²)‖r‖² =
/// (μ_low/N)·2ℒ ≥ (μ_low/N)·ℒ — so the residual satisfies
/// `residual ≥ −1e-9·max(1, ‖∇ℒ‖²)` with rounding as the only obstruction.
#[must_use]
pub fn check_grad_lower_bound(grad_norm: f64, mu_low: f64, loss: f64, n: usize) -> f64 {
    grad_norm * grad_norm - mu_low / n as f64 * loss
}

/// Stepwise convergence-factor check against a supplied smoothness bound:
/// ℒ(θ^{k+1}) ≤ (1 − η(1 − ηL̂/2)·μ_low,k/N)·ℒ(θ^k), with 1e-9 relative
/// slack. `None` where μ_low was not sampled or there is no next step.
#[must_use]
pub fn convergence_factor_check(trace: &TrainTrace, eta: f64, l_hat: f64) -> Vec<Option<bool>> {
    let n = trace.n_points as f64;
    (0..trace.steps.len())
        .map(|i| {
            let step = &trace.steps[i];
            let next = trace.steps.get(i + 1)?;
            let mu = step.mu_low?;
            let factor = 1.0 - eta * (1.0 - eta * l_hat / 2.0) * mu / n;
            Some(next.loss <= factor * step.loss + 1e-9 * step.loss)
        })
        .collect()
}

/// Per-step empirical smoothness L̂_k (None at the last step and wherever
/// ‖∇ℒ‖ ≤ [`GRAD_FLOOR`] or η = 0), plus the running max over the run.
#[must_use]
pub fn descent_smoothness_estimate(trace: &TrainTrace) -> (Vec<Option<f64>>, Option<f64>) {
    let eta = trace.config.eta;
    let mut per_step = vec![None; trace.steps.len()];
    let mut max = None;
    if eta <= 0.0 {
        return (per_step, max);
    }
    for i in 0..trace.steps.len().saturating_sub(1) {
        let (step, next) = (&trace.steps[i], &trace.steps[i + 1]);
        if step.grad_norm > GRAD_FLOOR {
            let lhat = smoothness_from(step.loss, next.loss, step.grad_norm, eta);
            per_step[i] = Some(lhat);
            max = Some(max.map_or(lhat, |m: f64| m.max(lhat)));
        }
    }
    (per_step, max)
}

/// Core of the dissipativity probe over an arbitrary gradient field:
/// ρ̂ = max over sampled y ∈ B_{θ*}(radius) of −∇f(y)ᵀ(y − θ*)/‖∇f(y)‖²,
/// with y drawn as (uniform direction) × (uniform radius) and samples with
/// ‖∇f(y)‖ ≤ `eps_grad` excluded.
pub fn dissipativity_rho_fn<F>(
    mut grad: F,
    theta_star: &[f64],
    radius: f64,
    samples: usize,
    seed: u64,
    eps_grad: f64,
) -> Result<f64>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    if samples == 0 {
        return Err(Error::InvalidInput("dissipativity probe needs at least 1 sample".into()));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidInput(format!("radius must be positive, got {radius}")));
    }
    let dim = theta_star.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rho: Option<f64> = None;
    for _ in 0..samples {
        let dir: Vec<f64> = (0..dim)
            .map(|_| rand_distr::StandardNormal.sample(&mut rng))
            .collect();
        let dn = norm(&dir);
        if dn == 0.0 {
            continue;
        }
        let r = rng.random_range(0.0..radius);
        let offset: Vec<f64> = dir.iter().map(|&u| r * u / dn).collect();
        let y: Vec<f64> = theta_star.iter().zip(&offset).map(|(&t, &o)| t + o).collect();
        let g = grad(&y)?;
        let gn = norm(&g);
        if gn <= eps_grad {
            continue;
        }
        let ratio = -dot(&g, &offset) / (gn * gn);
        rho = Some(rho.map_or(ratio, |m: f64| m.max(ratio)));
    }
    rho.ok_or(Error::GradientVanishes)
}

/// Dissipativity estimate of the network loss landscape around θ*.
///
/// The caller is responsible for θ* being numerically stationary (e.g. via
/// [`find_stationary`]); ρ̂ ≤ 0 indicates the sampled ball behaves like a
/// locally convex basin, ρ̂ > 0 quantifies how non-monotone the gradient flow
/// toward θ* can be.
#[allow(clippy::too_many_arguments)]
pub fn dissipativity_rho(
    theta_star: &ResidualNetParams,
    cfg: &NetConfig,
    xs: &[Vec<f64>],
    ys: &[Vec<f64>],
    radius: f64,
    samples: usize,
    seed: u64,
    eps_grad: f64,
) -> Result<f64> {
    let center = theta_star.to_flat();
    dissipativity_rho_fn(
        |y| {
            let p = ResidualNetParams::from_flat(cfg, y)?;
            Ok(grad_loss(&p, cfg, xs, ys)?.1.to_flat())
        },
        &center,
        radius,
        samples,
        seed,
        eps_grad,
    )
}

/// Plain GD until ‖∇ℒ‖ ≤ `grad_tol` (or `max_steps`), without tracing.
/// Returns the final θ and its gradient norm; callers check the norm to
/// decide whether the point qualifies as stationary.
pub fn find_stationary(
    params0: &ResidualNetParams,
    cfg: &NetConfig,
    xs: &[Vec<f64>],
    ys: &[Vec<f64>],
    eta: f64,
    max_steps: usize,
    grad_tol: f64,
) -> Result<(ResidualNetParams, f64)> {
    let mut theta = params0.clone();
    let mut gn = f64::INFINITY;
    for _ in 0..max_steps {
        let (_, grad) = grad_loss(&theta, cfg, xs, ys)?;
        gn = grad.flat_norm();
        if gn <= grad_tol {
            break;
        }
        theta.axpy(-eta, &grad);
    }
    Ok((theta, gn))
}

/// First step index whose trailing moving average of the loss (window
/// `smooth_window`, full windows only) is ≤ τ; `None` if never reached.
#[must_use]
pub fn steps_to_threshold(trace: &TrainTrace, tau: f64, smooth_window: usize) -> Option<usize> {
    assert!(smooth_window >= 1, "smoothing window must be at least 1");
    let losses: Vec<f64> = trace.steps.iter().map(|s| s.loss).collect();
    (smooth_window - 1..losses.len()).find(|&k| {
        let window = &losses[k + 1 - smooth_window..=k];
        window.iter().sum::<f64>() / smooth_window as f64 <= tau
    })
}
