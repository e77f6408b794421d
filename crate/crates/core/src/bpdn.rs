//! Basis pursuit denoising: `min ‖z‖₁` subject to `‖Φz − y‖₂ ≤ ε`.
//!
//! Solved with a primal-dual splitting (Chambolle–Pock) on
//! `‖z‖₁ + ι_B(Φz)` where `B` is the ℓ₂ ball of radius `ε` around `y`.
//! The primal step is a soft threshold, the dual step uses the Moreau
//! identity with the projection onto `B`. A final minimum-norm correction
//! moves the residual back onto the ball, and the dual iterate yields a
//! lower bound on the optimal objective.

use crate::linalg::{least_squares, norm2, spectral_norm};
use crate::{DenseMatrix, Error, Result, SignalVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpdnConfig {
    pub epsilon: f64,
    pub max_iters: usize,
    /// Relative iterate change threshold.
    pub primal_tol: f64,
    /// Constraint violation threshold, relative to `‖y‖₂`.
    pub dual_tol: f64,
}

impl BpdnConfig {
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            max_iters: 50_000,
            primal_tol: 1e-9,
            dual_tol: 1e-9,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "constraint radius {} must be finite and nonnegative",
                self.epsilon
            )));
        }
        if !(self.primal_tol > 0.0 && self.dual_tol > 0.0) || self.max_iters == 0 {
            return Err(Error::InvalidParameter(
                "BPDN tolerances must be positive and max_iters >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BpdnResult {
    pub solution: SignalVector,
    /// `‖z⋆‖₁`.
    pub objective: f64,
    /// `ε − ‖Φz⋆ − y‖₂`.
    pub constraint_slack: f64,
    /// Dual objective of the final dual iterate; never exceeds the optimum.
    pub dual_bound: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl BpdnResult {
    /// Certified gap between the returned objective and the optimum
    /// (meaningful for feasible solutions).
    pub fn duality_gap(&self) -> f64 {
        (self.objective - self.dual_bound).max(0.0)
    }
}

/// Step ratio: the primal step is `STEP_RATIO · ‖y‖₂ / ‖Φ‖₂`.
const STEP_RATIO: f64 = 0.1;
/// Iterations between objective-gap checks.
const CHECK_EVERY: usize = 25;

pub fn bpdn_solve(phi: &DenseMatrix, y: &SignalVector, cfg: &BpdnConfig) -> Result<BpdnResult> {
    cfg.validate()?;
    let (m, d) = phi.shape();
    if y.len() != m {
        return Err(Error::Dimension(format!(
            "decoder has {m} rows but measurements have length {}",
            y.len()
        )));
    }
    let eps = cfg.epsilon;
    let y = y.as_slice();
    let y_norm = norm2(y);
    if y_norm <= eps {
        return Ok(BpdnResult {
            solution: SignalVector::zeros(d),
            objective: 0.0,
            constraint_slack: eps - y_norm,
            dual_bound: 0.0,
            iterations: 0,
            converged: true,
        });
    }
    let op_norm = spectral_norm(phi);
    if op_norm == 0.0 {
        return Ok(BpdnResult {
            solution: SignalVector::zeros(d),
            objective: 0.0,
            constraint_slack: eps - y_norm,
            dual_bound: f64::NEG_INFINITY,
            iterations: 0,
            converged: false,
        });
    }

    // τσ‖Φ‖² = 0.99 < 1. Both steps are invariant under (Φ, y, ε) → c(Φ, y, ε)
    // up to the matching rescaling of the dual variable.
    let tau = STEP_RATIO * y_norm / op_norm;
    let sigma = 0.99 / (tau * op_norm * op_norm);

    let mut z = vec![0.0; d];
    let mut z_new = vec![0.0; d];
    let mut phi_z = vec![0.0; m];
    let mut phi_z_new = vec![0.0; m];
    // Φ applied to the extrapolated iterate 2z_k − z_{k−1}.
    let mut phi_bar = vec![0.0; m];
    let mut w = vec![0.0; m];
    let mut grad = vec![0.0; d];
    let mut converged = false;
    let mut iterations = cfg.max_iters;

    for it in 1..=cfg.max_iters {
        for (wi, bi) in w.iter_mut().zip(&phi_bar) {
            *wi += sigma * bi;
        }
        dual_prox(&mut w, y, eps, sigma);

        phi.apply_t_into(&w, &mut grad);
        for j in 0..d {
            z_new[j] = soft_threshold(z[j] - tau * grad[j], tau);
        }
        phi.apply_into(&z_new, &mut phi_z_new);

        let (mut change, mut size, mut res2) = (0.0, 0.0, 0.0);
        for j in 0..d {
            let dz = z_new[j] - z[j];
            change += dz * dz;
            size += z_new[j] * z_new[j];
        }
        for i in 0..m {
            let r = phi_z_new[i] - y[i];
            res2 += r * r;
            phi_bar[i] = 2.0 * phi_z_new[i] - phi_z[i];
        }
        let violation = (res2.sqrt() - eps).max(0.0) / y_norm;
        std::mem::swap(&mut z, &mut z_new);
        std::mem::swap(&mut phi_z, &mut phi_z_new);

        if violation < cfg.dual_tol {
            let small_step = change.sqrt() <= cfg.primal_tol * size.sqrt();
            let small_gap = it % CHECK_EVERY == 0 && {
                let obj = norm1(&z);
                obj - dual_objective(phi, &w, y, eps) <= cfg.primal_tol * obj
            };
            if small_step || small_gap {
                converged = true;
                iterations = it;
                break;
            }
        }
    }

    polish_feasibility(phi, y, eps, &mut z)?;
    let residual: Vec<f64> = phi.apply(&z).iter().zip(y).map(|(a, b)| a - b).collect();
    let objective = norm1(&z);
    Ok(BpdnResult {
        solution: SignalVector::new(z)?,
        objective,
        constraint_slack: eps - norm2(&residual),
        dual_bound: dual_objective(phi, &w, y, eps),
        iterations,
        converged,
    })
}

fn norm1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

fn soft_threshold(t: f64, lambda: f64) -> f64 {
    if t > lambda {
        t - lambda
    } else if t < -lambda {
        t + lambda
    } else {
        0.0
    }
}

/// In place: `v ← v − σ P_B(v/σ)` with `B` the ball of radius `ε` at `y`.
fn dual_prox(v: &mut [f64], y: &[f64], eps: f64, sigma: f64) {
    let mut dist2 = 0.0;
    for (vi, yi) in v.iter().zip(y) {
        let d = vi / sigma - yi;
        dist2 += d * d;
    }
    let dist = dist2.sqrt();
    let shrink = if dist > eps { eps / dist } else { 1.0 };
    for (vi, yi) in v.iter_mut().zip(y) {
        let u = *vi / sigma;
        let proj = yi + (u - yi) * shrink;
        *vi -= sigma * proj;
    }
}

/// `−⟨y, w⟩ − ε‖w‖₂` after scaling `w` into `‖Φᵀw‖_∞ ≤ 1`.
fn dual_objective(phi: &DenseMatrix, w: &[f64], y: &[f64], eps: f64) -> f64 {
    let g = phi.apply_t(w).iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let scale = if g > 1.0 { 1.0 / g } else { 1.0 };
    let yw: f64 = y.iter().zip(w).map(|(a, b)| a * b).sum();
    scale * (-yw - eps * norm2(w))
}

/// Moves the residual onto the constraint ball with the minimum-norm
/// correction when the iterate is slightly infeasible.
fn polish_feasibility(phi: &DenseMatrix, y: &[f64], eps: f64, z: &mut [f64]) -> Result<()> {
    let r: Vec<f64> = phi.apply(z).iter().zip(y).map(|(a, b)| a - b).collect();
    let rn = norm2(&r);
    if rn <= eps {
        return Ok(());
    }
    // Target residual r·ε/‖r‖, pulled slightly inside the ball.
    let shrink = eps / rn * (1.0 - 1e-12);
    let delta: Vec<f64> = r.iter().map(|v| v * shrink - v).collect();
    let step = least_squares(phi, &SignalVector::new(delta)?)?;
    let candidate: Vec<f64> = z.iter().zip(step.as_slice()).map(|(a, b)| a + b).collect();
    let rc: Vec<f64> = phi
        .apply(&candidate)
        .iter()
        .zip(y)
        .map(|(a, b)| a - b)
        .collect();
    if norm2(&rc) < rn {
        z.copy_from_slice(&candidate);
    }
    Ok(())
}
