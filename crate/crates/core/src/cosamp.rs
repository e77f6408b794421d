//! CoSaMP with a decode matrix that may differ from the encoder.
//!
//! Each iteration forms the proxy `u = Φᵀv`, merges the support of its
//! `2s` largest entries with the current support, solves least squares on
//! the merged columns, prunes to the `s` largest coefficients and updates
//! the residual.

use crate::linalg::least_squares;
use crate::metrics::largest_magnitudes;
use crate::{DenseMatrix, Error, IndexSet, Result, SignalVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosampConfig {
    pub s: usize,
    pub max_iters: usize,
    /// Stop once `‖v‖₂ ≤ residual_tol · ‖y‖₂`.
    pub residual_tol: f64,
    /// Stop once the residual changes by less than this fraction.
    pub stagnation_tol: f64,
}

impl CosampConfig {
    pub fn new(s: usize) -> Self {
        Self {
            s,
            max_iters: 100,
            residual_tol: 1e-10,
            stagnation_tol: 1e-7,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.s == 0 || self.max_iters == 0 {
            return Err(Error::InvalidParameter(
                "CoSaMP needs s >= 1 and max_iters >= 1".into(),
            ));
        }
        if !(self.residual_tol > 0.0 && self.stagnation_tol > 0.0) {
            return Err(Error::InvalidParameter(
                "CoSaMP tolerances must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Residual,
    Stagnation,
    MaxIters,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Residual => "residual",
            StopReason::Stagnation => "stagnation",
            StopReason::MaxIters => "max_iters",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub estimate: SignalVector,
    pub iterations: usize,
    /// `‖y‖₂` followed by the residual norm after each iteration.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub stop_reason: StopReason,
}

pub fn cosamp_recover(
    phi: &DenseMatrix,
    y: &SignalVector,
    cfg: &CosampConfig,
) -> Result<RecoveryResult> {
    cfg.validate()?;
    let (m, d) = phi.shape();
    if y.len() != m {
        return Err(Error::Dimension(format!(
            "decoder has {m} rows but measurements have length {}",
            y.len()
        )));
    }
    let s = cfg.s;
    if 3 * s > d {
        return Err(Error::Dimension(format!(
            "merged support can reach 3s = {} columns but the decoder has {d}",
            3 * s
        )));
    }

    let y_norm = y.norm2();
    let mut history = vec![y_norm];
    let mut estimate = SignalVector::zeros(d);
    if y_norm == 0.0 {
        return Ok(RecoveryResult {
            estimate,
            iterations: 0,
            residual_history: history,
            converged: true,
            stop_reason: StopReason::Residual,
        });
    }

    let mut support = IndexSet::default();
    let mut residual = y.clone();
    let mut prev = y_norm;
    for iter in 1..=cfg.max_iters {
        let proxy = phi.matvec_t(&residual)?;
        let omega = proxy_support(proxy.as_slice(), 2 * s);
        let merged = omega.union(&support);

        let coeffs = if merged.is_empty() {
            Vec::new()
        } else {
            let sub = phi.submatrix(&merged)?;
            least_squares(&sub, y)
                .map_err(|e| Error::Numerical {
                    iteration: iter,
                    source: Box::new(e),
                })?
                .into_vec()
        };

        let keep_local = largest_magnitudes(&coeffs, s);
        let kept: Vec<usize> = keep_local
            .as_slice()
            .iter()
            .filter(|&&k| coeffs[k] != 0.0)
            .copied()
            .collect();
        support = IndexSet::from_unsorted(kept.iter().map(|&k| merged.as_slice()[k]).collect());
        let values: Vec<f64> = kept.iter().map(|&k| coeffs[k]).collect();
        estimate = SignalVector::scatter(d, &support, &values);

        residual = y.sub(&phi.matvec(&estimate)?)?;
        let r = residual.norm2();
        history.push(r);

        if r <= cfg.residual_tol * y_norm {
            return Ok(done(estimate, iter, history, StopReason::Residual));
        }
        if (prev - r).abs() < cfg.stagnation_tol * prev {
            return Ok(done(estimate, iter, history, StopReason::Stagnation));
        }
        prev = r;
    }
    Ok(RecoveryResult {
        estimate,
        iterations: cfg.max_iters,
        residual_history: history,
        converged: false,
        stop_reason: StopReason::MaxIters,
    })
}

fn done(
    estimate: SignalVector,
    iterations: usize,
    history: Vec<f64>,
    reason: StopReason,
) -> RecoveryResult {
    RecoveryResult {
        estimate,
        iterations,
        residual_history: history,
        converged: true,
        stop_reason: reason,
    }
}

/// Up to `k` largest-magnitude nonzero proxy entries.
fn proxy_support(u: &[f64], k: usize) -> IndexSet {
    let top = largest_magnitudes(u, k);
    IndexSet::from_unsorted(
        top.as_slice()
            .iter()
            .copied()
            .filter(|&i| u[i] != 0.0)
            .collect(),
    )
}
