//! Sufficient conditions and error-bound terms for recovery under a
//! perturbed decoder.
//!
//! Conventions:
//! - margins are `lhs − rhs` of each inequality, so a condition of the
//!   form `lhs < rhs` (basis pursuit, strict) holds iff its margin is
//!   negative and one of the form `lhs ≤ rhs` (CoSaMP) iff it is
//!   nonpositive;
//! - the CoSaMP bracket uses absolute perturbation norms `‖A − Φ‖₂` and
//!   `‖A − Φ‖^(s)`; [`cosamp_bracket_relative`] gives the variant with the
//!   relative constants for side-by-side reporting.

use std::f64::consts::SQRT_2;

use crate::metrics::{best_s_term, tail_metrics, PerturbationConstants, RicEstimate, TailMetrics};
use crate::{Error, Result, SignalVector};

/// Numerator of the basis pursuit RIC condition `δ_2s < √2/(1+ε)² − 1`.
pub const BP_RIC_NUMERATOR: f64 = SQRT_2;
/// Numerator of the CoSaMP RIC condition `δ_4s ≤ 1.1/(1+ε)² − 1`.
pub const COSAMP_RIC_NUMERATOR: f64 = 1.1;

/// Right-hand side of the basis pursuit RIC condition.
pub fn bp_ric_limit(eps_sub_2s: f64) -> f64 {
    BP_RIC_NUMERATOR / ((1.0 + eps_sub_2s) * (1.0 + eps_sub_2s)) - 1.0
}

/// Right-hand side of the CoSaMP RIC condition.
pub fn cosamp_ric_limit(eps_sub_4s: f64) -> f64 {
    COSAMP_RIC_NUMERATOR / ((1.0 + eps_sub_4s) * (1.0 + eps_sub_4s)) - 1.0
}

/// Largest relative perturbation `ε^(2s)` for which the basis pursuit RIC
/// condition can hold given `δ_2s` (supremum; the inequality is strict).
pub fn bp_dissimilarity_limit(delta_2s: f64) -> f64 {
    (BP_RIC_NUMERATOR / (1.0 + delta_2s)).sqrt() - 1.0
}

/// Largest relative perturbation `ε^(4s)` admitted by the CoSaMP RIC
/// condition given `δ_4s`.
pub fn cosamp_dissimilarity_limit(delta_4s: f64) -> f64 {
    (COSAMP_RIC_NUMERATOR / (1.0 + delta_4s)).sqrt() - 1.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Condition {
    pub ok: bool,
    pub margin: f64,
}

impl Condition {
    fn strict(lhs: f64, rhs: f64) -> Self {
        let margin = lhs - rhs;
        Self {
            ok: margin < 0.0,
            margin,
        }
    }

    fn non_strict(lhs: f64, rhs: f64) -> Self {
        let margin = lhs - rhs;
        Self {
            ok: margin <= 0.0,
            margin,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpConditions {
    /// `δ_2s < √2/(1+ε^(2s))² − 1`.
    pub ric: Condition,
    /// `α_s + β_s < 1/κ^(s)`.
    pub tail: Condition,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosampConditions {
    /// `δ_4s ≤ 1.1/(1+ε^(4s))² − 1`.
    pub ric: Condition,
    /// `α_s + β_s ≤ 1/(2κ^(s))`.
    pub tail: Condition,
}

/// Both families of conditions for one `(A, Φ, x)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConditionReport {
    pub bp: Option<BpConditions>,
    pub cosamp: Option<CosampConditions>,
}

impl ConditionReport {
    pub fn bp_ric_ok(&self) -> bool {
        self.bp.is_some_and(|c| c.ric.ok)
    }
    pub fn bp_tail_ok(&self) -> bool {
        self.bp.is_some_and(|c| c.tail.ok)
    }
    pub fn cosamp_ric_ok(&self) -> bool {
        self.cosamp.is_some_and(|c| c.ric.ok)
    }
    pub fn cosamp_tail_ok(&self) -> bool {
        self.cosamp.is_some_and(|c| c.tail.ok)
    }
}

fn check_orders(expected: usize, got: usize, what: &str) -> Result<()> {
    if expected != got {
        return Err(Error::InvalidParameter(format!(
            "{what} has order {got}, expected {expected}"
        )));
    }
    Ok(())
}

pub fn check_bp_conditions(
    delta_2s: &RicEstimate,
    eps_sub_2s: f64,
    pc_s: &PerturbationConstants,
    tm: &TailMetrics,
) -> Result<BpConditions> {
    check_orders(2 * pc_s.s, delta_2s.order, "delta_2s")?;
    check_orders(pc_s.s, tm.s, "tail metrics")?;
    Ok(BpConditions {
        ric: Condition::strict(delta_2s.delta, bp_ric_limit(eps_sub_2s)),
        tail: Condition::strict(tm.alpha + tm.beta, 1.0 / pc_s.kappa),
    })
}

pub fn check_cosamp_conditions(
    delta_4s: &RicEstimate,
    eps_sub_4s: f64,
    pc_s: &PerturbationConstants,
    tm: &TailMetrics,
) -> Result<CosampConditions> {
    check_orders(4 * pc_s.s, delta_4s.order, "delta_4s")?;
    check_orders(pc_s.s, tm.s, "tail metrics")?;
    Ok(CosampConditions {
        ric: Condition::non_strict(delta_4s.delta, cosamp_ric_limit(eps_sub_4s)),
        tail: Condition::non_strict(tm.alpha + tm.beta, 1.0 / (2.0 * pc_s.kappa)),
    })
}

/// Total noise radius `ε_{A,s,b}` for basis pursuit:
/// `[(ε^(s) κ^(s) + ε_A γ α_s) / (1 − κ^(s)(α_s + β_s)) + ε_b] · ‖b‖₂`
/// with `ε_b = ‖e‖₂ / ‖b‖₂`.
pub fn total_noise_param(
    pc: &PerturbationConstants,
    tm: &TailMetrics,
    b_norm: f64,
    e_norm: f64,
) -> Result<f64> {
    check_orders(pc.s, tm.s, "tail metrics")?;
    if !(b_norm > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "measurement norm {b_norm} must be positive"
        )));
    }
    let denom = 1.0 - pc.kappa * (tm.alpha + tm.beta);
    if !(denom > 0.0) {
        return Err(Error::ConditionViolation(format!(
            "kappa*(alpha+beta) = {} >= 1: the signal-tail condition alpha_s + beta_s < 1/kappa fails",
            pc.kappa * (tm.alpha + tm.beta)
        )));
    }
    let eps_b = e_norm / b_norm;
    let multiplicative = (pc.eps_sub * pc.kappa + pc.eps_full * pc.gamma * tm.alpha) / denom;
    Ok((multiplicative + eps_b) * b_norm)
}

/// Restricted isometry constant bound for the decoder:
/// `(1 + δ_s)(1 + ε^(s))² − 1`.
pub fn decoder_ric_bound(delta_s: &RicEstimate, eps_sub: f64) -> Result<f64> {
    if !(eps_sub >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "relative perturbation {eps_sub} must be nonnegative"
        )));
    }
    Ok((1.0 + delta_s.delta) * (1.0 + eps_sub) * (1.0 + eps_sub) - 1.0)
}

/// The four terms of the CoSaMP error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosampBracket {
    /// `‖x − x_s‖₂`.
    pub tail_l2: f64,
    /// `‖x − x_s‖₁ / √s`.
    pub tail_l1: f64,
    /// `(ε α_s + ε^(s)) ‖b‖₂`.
    pub perturbation: f64,
    /// `‖e‖₂`.
    pub noise: f64,
}

impl CosampBracket {
    pub fn total(&self) -> f64 {
        self.tail_l2 + self.tail_l1 + self.perturbation + self.noise
    }
}

/// The two terms of the basis pursuit error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpBracket {
    /// `‖x − x_s‖₁ / √s`.
    pub tail: f64,
    /// `ε_{A,s,b}`.
    pub noise: f64,
}

fn tail_norms(x: &SignalVector, s: usize) -> Result<(TailMetrics, f64, f64)> {
    let tm = tail_metrics(x, s)?;
    let (head, _) = best_s_term(x, s);
    let tail = x.sub(&head)?;
    Ok((tm, tail.norm2(), tail.norm1() / (s as f64).sqrt()))
}

/// Bracket with `ε = ‖A − Φ‖₂` and `ε^(s) = ‖A − Φ‖^(s)`.
pub fn cosamp_bracket(
    x: &SignalVector,
    s: usize,
    pc: &PerturbationConstants,
    b_norm: f64,
    e_norm: f64,
) -> Result<CosampBracket> {
    cosamp_bracket_from_norms(x, s, pc.abs_full, pc.abs_sub, b_norm, e_norm)
}

/// Same bracket with the relative constants `ε_A` and `ε^(s)_A`.
pub fn cosamp_bracket_relative(
    x: &SignalVector,
    s: usize,
    pc: &PerturbationConstants,
    b_norm: f64,
    e_norm: f64,
) -> Result<CosampBracket> {
    cosamp_bracket_from_norms(x, s, pc.eps_full, pc.eps_sub, b_norm, e_norm)
}

/// Bracket from explicit full and `s`-submatrix perturbation sizes.
pub fn cosamp_bracket_from_norms(
    x: &SignalVector,
    s: usize,
    full: f64,
    sub: f64,
    b_norm: f64,
    e_norm: f64,
) -> Result<CosampBracket> {
    let (tm, l2, l1) = tail_norms(x, s)?;
    Ok(CosampBracket {
        tail_l2: l2,
        tail_l1: l1,
        perturbation: (full * tm.alpha + sub) * b_norm,
        noise: e_norm,
    })
}

pub fn bp_bracket(x: &SignalVector, s: usize, eps_total: f64) -> Result<BpBracket> {
    let (_, _, l1) = tail_norms(x, s)?;
    Ok(BpBracket {
        tail: l1,
        noise: eps_total,
    })
}

/// `(lower, upper)` bounds on `‖Ax‖₂` implied by the RIP of order `s`:
///
/// - upper `√(1+δ) (‖x‖₂ + ‖x‖₁/√s)`,
/// - lower `√(1−δ) ‖x_s‖₂ − √(1+δ) (‖x−x_s‖₂ + ‖x−x_s‖₁/√s)`.
///
/// For `δ ≥ 1` the `√(1−δ)` factor is taken as zero, which keeps the
/// lower bound valid.
pub fn rip_norm_bounds(x: &SignalVector, s: usize, delta_s: &RicEstimate) -> Result<(f64, f64)> {
    if s == 0 || s > x.len() {
        return Err(Error::InvalidParameter(format!(
            "order s = {s} must satisfy 1 <= s <= {}",
            x.len()
        )));
    }
    let rs = (s as f64).sqrt();
    let up = (1.0 + delta_s.delta).sqrt();
    let down = (1.0 - delta_s.delta).max(0.0).sqrt();
    let (head, _) = best_s_term(x, s);
    let tail = x.sub(&head)?;
    let upper = up * (x.norm2() + x.norm1() / rs);
    let lower = down * head.norm2() - up * (tail.norm2() + tail.norm1() / rs);
    Ok((lower, upper))
}
