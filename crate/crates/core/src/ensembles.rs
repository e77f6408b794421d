//! Seeded generators for encoders, test signals, additive noise and
//! perturbed decoders. Each generator is a pure function of its spec.

use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::metrics::{subset_spectrum_exact, DEFAULT_BUDGET};
use crate::rng::{rng_from_seed, Rng};
use crate::{DenseMatrix, Error, IndexSet, Result, SignalVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnsembleKind {
    /// i.i.d. `N(0, 1/m)`.
    Gaussian,
    /// i.i.d. `±1/√m`.
    Bernoulli,
}

impl EnsembleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EnsembleKind::Gaussian => "gaussian",
            EnsembleKind::Bernoulli => "bernoulli",
        }
    }
}

impl FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" => Ok(EnsembleKind::Gaussian),
            "bernoulli" => Ok(EnsembleKind::Bernoulli),
            other => Err(Error::InvalidParameter(format!(
                "unknown ensemble `{other}` (expected gaussian or bernoulli)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub m: usize,
    pub d: usize,
    pub seed: u64,
}

pub fn gen_matrix(spec: &EnsembleSpec) -> Result<DenseMatrix> {
    if spec.m == 0 || spec.d == 0 {
        return Err(Error::InvalidParameter(format!(
            "ensemble dimensions must be positive, got {}x{}",
            spec.m, spec.d
        )));
    }
    let mut rng = rng_from_seed(spec.seed);
    let scale = 1.0 / (spec.m as f64).sqrt();
    match spec.kind {
        EnsembleKind::Gaussian => DenseMatrix::from_fn(spec.m, spec.d, |_, _| {
            scale * rng.sample::<f64, _>(StandardNormal)
        }),
        EnsembleKind::Bernoulli => DenseMatrix::from_fn(spec.m, spec.d, |_, _| {
            if rng.random::<bool>() {
                scale
            } else {
                -scale
            }
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalSpec {
    pub d: usize,
    pub s: usize,
    pub tail_alpha: f64,
    pub tail_beta: f64,
    pub seed: u64,
}

/// Range of `β` compatible with a given `α`: the tail's ℓ₁ norm lies
/// between its ℓ₂ norm and `√(d − s)` times it.
pub fn beta_range(d: usize, s: usize, alpha: f64) -> (f64, f64) {
    let rs = (s as f64).sqrt();
    let n = (d - s) as f64;
    (alpha / rs, alpha * n.sqrt() / rs)
}

const HEAD_REDRAWS: usize = 1000;

/// Test signal with a unit-norm `s`-sparse head on a random support and a
/// tail on the complement tuned so that `α_s` and `β_s` hit their targets.
///
/// The tail has one uniform-magnitude component over the whole complement
/// plus a spike on one random entry; the two magnitudes follow in closed
/// form from the targets.
pub fn gen_signal(spec: &SignalSpec) -> Result<SignalVector> {
    let SignalSpec {
        d,
        s,
        tail_alpha: alpha,
        tail_beta: beta,
        seed,
    } = *spec;
    if s == 0 || s > d {
        return Err(Error::InvalidParameter(format!(
            "sparsity s = {s} must satisfy 1 <= s <= d = {d}"
        )));
    }
    if !(alpha >= 0.0 && beta >= 0.0 && alpha.is_finite() && beta.is_finite()) {
        return Err(Error::InvalidParameter(
            "tail targets must be finite and nonnegative".into(),
        ));
    }
    let sparse = alpha == 0.0 && beta == 0.0;
    let tail = if sparse {
        None
    } else {
        Some(tail_magnitudes(d, s, alpha, beta)?)
    };

    let mut rng = rng_from_seed(seed);
    let mut support = sample(&mut rng, d, s).into_vec();
    support.sort_unstable();
    let support = IndexSet::from_unsorted(support);

    let floor = tail.map_or(0.0, |(u, p)| u + p);
    let mut head = Vec::new();
    for _ in 0..HEAD_REDRAWS {
        head = draw_unit_head(&mut rng, s);
        if head.iter().all(|v| v.abs() >= floor) {
            break;
        }
        head.clear();
    }
    if head.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "tail spike {floor} too large to stay below the head entries"
        )));
    }

    let mut x = vec![0.0; d];
    for (&i, &v) in support.as_slice().iter().zip(&head) {
        x[i] = v;
    }
    if let Some((u, p)) = tail {
        let complement: Vec<usize> = (0..d).filter(|i| !support.contains(*i)).collect();
        let spike = complement[rng.random_range(0..complement.len())];
        for &i in &complement {
            let mag = if i == spike { u + p } else { u };
            x[i] = if rng.random::<bool>() { mag } else { -mag };
        }
    }
    SignalVector::new(x)
}

fn draw_unit_head(rng: &mut Rng, s: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..s).map(|_| rng.sample(StandardNormal)).collect();
        let norm = crate::linalg::norm2(&v);
        if norm > 0.0 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// `(u, p)`: uniform magnitude on all `n = d − s` tail entries and extra
/// spike magnitude on one of them, solving
/// `(n−1)u² + (u+p)² = α²`, `n·u + p = β√s`.
fn tail_magnitudes(d: usize, s: usize, alpha: f64, beta: f64) -> Result<(f64, f64)> {
    let (lower, upper) = beta_range(d, s, alpha);
    let infeasible = || Error::InfeasibleTail {
        alpha,
        beta,
        lower,
        upper,
    };
    let n = d - s;
    if n == 0 || alpha == 0.0 {
        return Err(infeasible());
    }
    // Relative slack for boundary cases computed in floating point.
    let slack = 1e-12;
    if beta < lower * (1.0 - slack) || beta > upper * (1.0 + slack) {
        return Err(infeasible());
    }
    let l1 = beta * (s as f64).sqrt();
    if n == 1 {
        return Ok((alpha, 0.0));
    }
    let (nf, k) = (n as f64, (n - 1) as f64);
    let disc = (k * (nf * alpha * alpha - l1 * l1)).max(0.0);
    let u = ((k * l1 - disc.sqrt()) / (nf * k)).max(0.0);
    let p = (l1 - nf * u).max(0.0);
    Ok((u, p))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationSpec {
    /// Desired `‖A − Φ‖^(s) / ‖A‖^(s)`.
    pub target: f64,
    pub s: usize,
    pub seed: u64,
}

/// Unscaled perturbation direction: i.i.d. standard normal entries.
pub fn perturbation_direction(m: usize, d: usize, seed: u64) -> Result<DenseMatrix> {
    let mut rng = rng_from_seed(seed);
    DenseMatrix::from_fn(m, d, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// `Φ = A − c·E` with `c` chosen so that `‖A − Φ‖^(s) = target · ‖A‖^(s)`,
/// given `‖A‖^(s)` and `‖E‖^(s)`.
pub fn decoder_from_direction(
    a: &DenseMatrix,
    direction: &DenseMatrix,
    norm_a_sub: f64,
    norm_dir_sub: f64,
    target: f64,
) -> Result<DenseMatrix> {
    if target == 0.0 {
        return Ok(a.clone());
    }
    if norm_dir_sub <= 0.0 {
        return Err(Error::InvalidParameter(
            "zero perturbation direction".into(),
        ));
    }
    a.sub(&direction.scaled(target * norm_a_sub / norm_dir_sub))
}

pub fn gen_perturbed_decoder(a: &DenseMatrix, spec: &PerturbationSpec) -> Result<DenseMatrix> {
    gen_perturbed_decoder_with_budget(a, spec, DEFAULT_BUDGET)
}

pub fn gen_perturbed_decoder_with_budget(
    a: &DenseMatrix,
    spec: &PerturbationSpec,
    budget: u64,
) -> Result<DenseMatrix> {
    if !(0.0..1.0).contains(&spec.target) {
        return Err(Error::InvalidParameter(format!(
            "perturbation target {} must lie in [0, 1)",
            spec.target
        )));
    }
    if spec.s == 0 || spec.s > a.cols() {
        return Err(Error::InvalidParameter(format!(
            "perturbation order s = {} must satisfy 1 <= s <= {}",
            spec.s,
            a.cols()
        )));
    }
    if spec.target == 0.0 {
        return Ok(a.clone());
    }
    let dir = perturbation_direction(a.rows(), a.cols(), spec.seed)?;
    let norm_a = subset_spectrum_exact(a, spec.s, budget)?.norm_max();
    let norm_e = subset_spectrum_exact(&dir, spec.s, budget)?.norm_max();
    decoder_from_direction(a, &dir, norm_a, norm_e, spec.target)
}

/// Gaussian direction rescaled to `‖e‖₂ = level`.
pub fn gen_noise(m: usize, level: f64, seed: u64) -> Result<SignalVector> {
    if !(level >= 0.0 && level.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise level {level} must be finite and nonnegative"
        )));
    }
    if level == 0.0 {
        return Ok(SignalVector::zeros(m));
    }
    let mut rng = rng_from_seed(seed);
    let dir = SignalVector::new((0..m).map(|_| rng.sample(StandardNormal)).collect())?;
    Ok(dir.scaled(level / dir.norm2()))
}
