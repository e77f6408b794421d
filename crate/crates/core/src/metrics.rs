//! Restricted isometry constants, submatrix spectral norms, perturbation
//! constants and tail metrics.
//!
//! Every `s`-column quantity is computed from eigenvalues of the `s × s`
//! Gram blocks `A_Sᵀ A_S`, cut out of the full Gram matrix. Exact values
//! enumerate all `C(d, s)` subsets in colexicographic order; the
//! Monte-Carlo variants evaluate the same maximand on uniformly random
//! subsets and are therefore lower bounds.

use rand::seq::SliceRandom;

use crate::linalg::{spectral_norm, symmetric_extreme_eigenvalues};
use crate::par::{map_indexed, Execution};
use crate::rng::rng_for_stream;
use crate::{DenseMatrix, Error, IndexSet, Result, SignalVector};

/// Default cap on the number of subsets an exact computation may visit.
pub const DEFAULT_BUDGET: u64 = 200_000;

/// Subsets per parallel work item.
const CHUNK: u64 = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RicMethod {
    Exact,
    MonteCarloLowerBound,
}

impl RicMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            RicMethod::Exact => "exact",
            RicMethod::MonteCarloLowerBound => "monte_carlo_lower_bound",
        }
    }
}

impl std::fmt::Display for RicMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RicEstimate {
    pub order: usize,
    pub delta: f64,
    pub method: RicMethod,
    pub subsets_examined: u64,
}

impl RicEstimate {
    /// An estimate with a known value, e.g. from a closed form.
    pub fn exact(order: usize, delta: f64) -> Self {
        Self {
            order,
            delta,
            method: RicMethod::Exact,
            subsets_examined: 0,
        }
    }
}

/// Extreme Gram eigenvalues over a family of `order`-column subsets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsetSpectrum {
    pub order: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub method: RicMethod,
    pub subsets_examined: u64,
}

impl SubsetSpectrum {
    /// `max(λ_max − 1, 1 − λ_min)`, clamped at zero.
    pub fn delta(&self) -> f64 {
        (self.lambda_max - 1.0).max(1.0 - self.lambda_min).max(0.0)
    }

    /// Largest spectral norm over the visited subsets.
    pub fn norm_max(&self) -> f64 {
        self.lambda_max.max(0.0).sqrt()
    }

    pub fn ric(&self) -> RicEstimate {
        RicEstimate {
            order: self.order,
            delta: self.delta(),
            method: self.method,
            subsets_examined: self.subsets_examined,
        }
    }
}

/// `C(n, k)` without overflow.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

fn check_order(a: &DenseMatrix, s: usize) -> Result<()> {
    if s == 0 || s > a.cols() {
        return Err(Error::InvalidParameter(format!(
            "order s = {s} must satisfy 1 <= s <= {}",
            a.cols()
        )));
    }
    Ok(())
}

/// Subset with colex rank `rank` among `k`-subsets.
fn colex_unrank(mut rank: u128, k: usize, out: &mut [usize]) {
    for i in (1..=k).rev() {
        // Largest c with C(c, i) <= rank.
        let mut c = i - 1;
        while binomial(c + 1, i) <= rank {
            c += 1;
        }
        out[i - 1] = c;
        rank -= binomial(c, i);
    }
}

/// Advances to the colex successor; false after the last subset.
fn colex_next(sub: &mut [usize], n: usize) -> bool {
    let k = sub.len();
    for j in 0..k {
        let limit = if j + 1 < k { sub[j + 1] } else { n };
        if sub[j] + 1 < limit {
            sub[j] += 1;
            for (i, v) in sub.iter_mut().enumerate().take(j) {
                *v = i;
            }
            return true;
        }
    }
    false
}

struct GramEvaluator<'a> {
    gram: &'a [f64],
    n: usize,
    buf: Vec<f64>,
}

impl<'a> GramEvaluator<'a> {
    fn new(gram: &'a DenseMatrix, k: usize) -> Self {
        Self {
            gram: gram.as_slice(),
            n: gram.cols(),
            buf: vec![0.0; k * k],
        }
    }

    fn extremes(&mut self, sub: &[usize]) -> (f64, f64) {
        let k = sub.len();
        for (r, &i) in sub.iter().enumerate() {
            for (c, &j) in sub.iter().enumerate() {
                self.buf[r * k + c] = self.gram[i * self.n + j];
            }
        }
        symmetric_extreme_eigenvalues(&mut self.buf, k)
    }
}

fn merge(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0.min(b.0), a.1.max(b.1))
}

const EMPTY: (f64, f64) = (f64::INFINITY, f64::NEG_INFINITY);

/// Exact extreme Gram eigenvalues over all `s`-column submatrices.
pub fn subset_spectrum_exact(a: &DenseMatrix, s: usize, budget: u64) -> Result<SubsetSpectrum> {
    subset_spectrum_exact_with(a, s, budget, Execution::default())
}

pub fn subset_spectrum_exact_with(
    a: &DenseMatrix,
    s: usize,
    budget: u64,
    exec: Execution,
) -> Result<SubsetSpectrum> {
    check_order(a, s)?;
    let d = a.cols();
    let total = binomial(d, s);
    if total > budget as u128 {
        return Err(Error::Budget {
            d,
            s,
            subsets: total,
            budget,
        });
    }
    let total = total as u64;
    let gram = a.gram();
    let chunks = total.div_ceil(CHUNK) as usize;
    let parts = map_indexed(exec, chunks, |c| {
        let start = c as u64 * CHUNK;
        let end = (start + CHUNK).min(total);
        let mut sub = vec![0; s];
        colex_unrank(start as u128, s, &mut sub);
        let mut eval = GramEvaluator::new(&gram, s);
        let mut acc = EMPTY;
        for r in start..end {
            acc = merge(acc, eval.extremes(&sub));
            if r + 1 < end {
                colex_next(&mut sub, d);
            }
        }
        acc
    });
    let (lambda_min, lambda_max) = parts.into_iter().fold(EMPTY, merge);
    Ok(SubsetSpectrum {
        order: s,
        lambda_min,
        lambda_max,
        method: RicMethod::Exact,
        subsets_examined: total,
    })
}

/// Extreme Gram eigenvalues over `samples` uniformly random `s`-subsets.
pub fn subset_spectrum_monte_carlo(
    a: &DenseMatrix,
    s: usize,
    samples: u64,
    seed: u64,
) -> Result<SubsetSpectrum> {
    subset_spectrum_monte_carlo_with(a, s, samples, seed, Execution::default())
}

pub fn subset_spectrum_monte_carlo_with(
    a: &DenseMatrix,
    s: usize,
    samples: u64,
    seed: u64,
    exec: Execution,
) -> Result<SubsetSpectrum> {
    check_order(a, s)?;
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be >= 1".into()));
    }
    let d = a.cols();
    let gram = a.gram();
    let chunks = samples.div_ceil(CHUNK) as usize;
    let parts = map_indexed(exec, chunks, |c| {
        let start = c as u64 * CHUNK;
        let end = (start + CHUNK).min(samples);
        let mut rng = rng_for_stream(seed, c as u64);
        let mut eval = GramEvaluator::new(&gram, s);
        let mut acc = EMPTY;
        // A partial shuffle of any arrangement yields a uniform subset.
        let mut pool: Vec<usize> = (0..d).collect();
        let mut sub = vec![0; s];
        for _ in start..end {
            let (picked, _) = pool.partial_shuffle(&mut rng, s);
            sub.copy_from_slice(picked);
            sub.sort_unstable();
            acc = merge(acc, eval.extremes(&sub));
        }
        acc
    });
    let (lambda_min, lambda_max) = parts.into_iter().fold(EMPTY, merge);
    Ok(SubsetSpectrum {
        order: s,
        lambda_min,
        lambda_max,
        method: RicMethod::MonteCarloLowerBound,
        subsets_examined: samples,
    })
}

/// Exact spectrum if `C(d, s)` fits the budget, otherwise Monte-Carlo.
pub fn subset_spectrum_auto(
    a: &DenseMatrix,
    s: usize,
    budget: u64,
    samples: u64,
    seed: u64,
) -> Result<SubsetSpectrum> {
    check_order(a, s)?;
    if binomial(a.cols(), s) <= budget as u128 {
        subset_spectrum_exact(a, s, budget)
    } else {
        subset_spectrum_monte_carlo(a, s, samples, seed)
    }
}

/// δ_s by exhaustive enumeration.
pub fn ric_exact(a: &DenseMatrix, s: usize, budget: u64) -> Result<RicEstimate> {
    Ok(subset_spectrum_exact(a, s, budget)?.ric())
}

/// Lower bound on δ_s from random subsets.
pub fn ric_monte_carlo(a: &DenseMatrix, s: usize, samples: u64, seed: u64) -> Result<RicEstimate> {
    Ok(subset_spectrum_monte_carlo(a, s, samples, seed)?.ric())
}

/// `‖A‖^(s)`: the largest spectral norm over all `s`-column submatrices.
pub fn submatrix_norm_max(a: &DenseMatrix, s: usize, budget: u64) -> Result<f64> {
    Ok(subset_spectrum_exact(a, s, budget)?.norm_max())
}

/// Best `s`-term approximation and its support. Equal magnitudes prefer
/// the lower index.
pub fn best_s_term(x: &SignalVector, s: usize) -> (SignalVector, IndexSet) {
    let support = largest_magnitudes(x.as_slice(), s);
    let values = x.restrict(&support);
    (SignalVector::scatter(x.len(), &support, &values), support)
}

/// Indices of the `k` largest `|v_i|`, ties toward the lower index, sorted.
pub(crate) fn largest_magnitudes(v: &[f64], k: usize) -> IndexSet {
    let mut order: Vec<usize> = (0..v.len()).collect();
    let k = k.min(v.len());
    if k < v.len() {
        order.select_nth_unstable_by(k, |&i, &j| {
            v[j].abs().total_cmp(&v[i].abs()).then(i.cmp(&j))
        });
    }
    order.truncate(k);
    IndexSet::from_unsorted(order)
}

/// `α_s = ‖x − x_s‖₂ / ‖x_s‖₂` and `β_s = ‖x − x_s‖₁ / (√s ‖x_s‖₂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailMetrics {
    pub alpha: f64,
    pub beta: f64,
    pub s: usize,
}

pub fn tail_metrics(x: &SignalVector, s: usize) -> Result<TailMetrics> {
    if s == 0 || s > x.len() {
        return Err(Error::InvalidParameter(format!(
            "order s = {s} must satisfy 1 <= s <= {}",
            x.len()
        )));
    }
    let (head, support) = best_s_term(x, s);
    let head_norm = head.norm2();
    if head_norm == 0.0 {
        return Err(Error::DegenerateSignal);
    }
    let tail: Vec<f64> = x
        .as_slice()
        .iter()
        .enumerate()
        .filter(|(i, _)| !support.contains(*i))
        .map(|(_, &v)| v)
        .collect();
    let tail = SignalVector::raw(tail);
    Ok(TailMetrics {
        alpha: tail.norm2() / head_norm,
        beta: tail.norm1() / ((s as f64).sqrt() * head_norm),
        s,
    })
}

/// Perturbation constants of a decoder `Φ` relative to the encoder `A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationConstants {
    pub s: usize,
    /// `‖A − Φ‖₂ / ‖A‖₂`.
    pub eps_full: f64,
    /// `‖A − Φ‖^(s) / ‖A‖^(s)`.
    pub eps_sub: f64,
    /// `‖A − Φ‖₂`.
    pub abs_full: f64,
    /// `‖A − Φ‖^(s)`.
    pub abs_sub: f64,
    /// `√(1 + δ_s) / √(1 − δ_s)`.
    pub kappa: f64,
    /// `‖A‖₂ / √(1 − δ_s)`.
    pub gamma: f64,
    pub norm_full: f64,
    pub norm_sub: f64,
    pub delta_s: f64,
}

impl PerturbationConstants {
    /// Assembles the constants from precomputed norms of `A` and `A − Φ`.
    pub fn from_norms(
        s: usize,
        norm_full: f64,
        norm_sub: f64,
        abs_full: f64,
        abs_sub: f64,
        delta_s: f64,
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&delta_s) {
            return Err(Error::IllConditioned { delta: delta_s });
        }
        if norm_full <= 0.0 || norm_sub <= 0.0 {
            return Err(Error::InvalidParameter("encoder has zero norm".into()));
        }
        Ok(Self {
            s,
            eps_full: abs_full / norm_full,
            eps_sub: abs_sub / norm_sub,
            abs_full,
            abs_sub,
            kappa: ((1.0 + delta_s) / (1.0 - delta_s)).sqrt(),
            gamma: norm_full / (1.0 - delta_s).sqrt(),
            norm_full,
            norm_sub,
            delta_s,
        })
    }
}

pub fn perturbation_constants(
    a: &DenseMatrix,
    phi: &DenseMatrix,
    s: usize,
    delta_s: &RicEstimate,
    budget: u64,
) -> Result<PerturbationConstants> {
    if delta_s.order != s {
        return Err(Error::InvalidParameter(format!(
            "RIC of order {} supplied for order {s}",
            delta_s.order
        )));
    }
    if delta_s.delta >= 1.0 {
        return Err(Error::IllConditioned {
            delta: delta_s.delta,
        });
    }
    let diff = a.sub(phi)?;
    let norm_sub = submatrix_norm_max(a, s, budget)?;
    let abs_sub = submatrix_norm_max(&diff, s, budget)?;
    PerturbationConstants::from_norms(
        s,
        spectral_norm(a),
        norm_sub,
        spectral_norm(&diff),
        abs_sub,
        delta_s.delta,
    )
}
