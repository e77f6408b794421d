//! Seeded sweeps over perturbation size and noise level.
//!
//! Each trial draws its own encoder `A`, signal `x`, unit noise direction
//! and perturbation direction `E` from `derive_seed(master_seed, trial_id)`.
//! The decoder is `Φ = A − cE` with `c` set so that `‖A − Φ‖^(s)` hits the
//! cell's relative target; its constants at orders `2s` and `4s` follow
//! from those of `E` by homogeneity (`‖cE‖^(k) = c‖E‖^(k)`).
//!
//! Trial ids run cell-major: `trial_id = cell · trials_per_cell + k` with
//! cells ordered by `(eps_target, noise_level)` in grid order. Trials with
//! even `k` form the training split of the fit, odd `k` the held-out split.

mod config;
mod csv;
mod fit;

pub use config::{Algorithms, ExperimentConfig};
pub use csv::{format_csv, CSV_COLUMNS};
pub use fit::{
    fit_report, format_summary, CellMedian, ExactRecovery, FitReport, MaxRatioFit, TwoConstantFit,
};

use crate::bpdn::{bpdn_solve, BpdnConfig};
use crate::cosamp::{cosamp_recover, CosampConfig};
use crate::ensembles::{
    decoder_from_direction, gen_matrix, gen_noise, gen_signal, perturbation_direction,
    EnsembleSpec, SignalSpec,
};
use crate::linalg::spectral_norm;
use crate::metrics::{
    subset_spectrum_auto, tail_metrics, PerturbationConstants, RicEstimate, SubsetSpectrum,
    TailMetrics,
};
use crate::par::{map_indexed, with_workers, Execution};
use crate::rng::derive_seed;
use crate::theory::{
    bp_bracket, check_bp_conditions, check_cosamp_conditions, cosamp_bracket_from_norms,
    total_noise_param, BpConditions, CosampConditions,
};
use crate::{DenseMatrix, Error, Result, SignalVector};

/// One algorithm run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub error: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial_id: u64,
    /// `derive_seed(master_seed, trial_id)`; every random draw of the trial
    /// derives from it.
    pub seed: u64,
    /// `trial_id mod trials_per_cell`.
    pub index_in_cell: usize,
    pub eps_target: f64,
    pub noise_level: f64,
    pub eps_sub_rel: f64,
    pub eps_full_rel: f64,
    pub abs_sub: f64,
    pub abs_full: f64,
    pub delta_s: RicEstimate,
    pub delta_2s: RicEstimate,
    pub delta_4s: RicEstimate,
    pub alpha_s: f64,
    pub beta_s: f64,
    /// `None` when `δ_s ≥ 1` leaves `κ` undefined.
    pub bp: Option<BpConditions>,
    pub cosamp_conditions: Option<CosampConditions>,
    pub cosamp: Option<Outcome>,
    pub bpdn: Option<Outcome>,
    /// CoSaMP bracket with absolute perturbation norms.
    pub bracket_cosamp: f64,
    /// Same bracket with relative perturbation constants.
    pub bracket_cosamp_rel: f64,
    /// `‖x − x_s‖₁ / √s`.
    pub bp_tail: f64,
    pub eps_total_bp: Option<f64>,
}

impl TrialRecord {
    pub fn is_train(&self) -> bool {
        self.index_in_cell.is_multiple_of(2)
    }

    /// Tail condition of the CoSaMP error bound.
    pub fn cosamp_tail_ok(&self) -> bool {
        self.cosamp_conditions.is_some_and(|c| c.tail.ok)
    }

    pub fn cosamp_strict_ok(&self) -> bool {
        self.cosamp_conditions
            .is_some_and(|c| c.tail.ok && c.ric.ok)
    }

    /// Tail condition of the basis pursuit error bound, with a defined radius.
    pub fn bp_tail_ok(&self) -> bool {
        self.bp.is_some_and(|c| c.tail.ok) && self.eps_total_bp.is_some()
    }

    pub fn bp_strict_ok(&self) -> bool {
        self.bp.is_some_and(|c| c.tail.ok && c.ric.ok) && self.eps_total_bp.is_some()
    }

    /// `s/2s/4s` method tags.
    pub fn ric_method(&self) -> String {
        format!(
            "{}/{}/{}",
            self.delta_s.method, self.delta_2s.method, self.delta_4s.method
        )
    }
}

/// One random instance: encoder, signal, noise direction and perturbation
/// direction, with the spectra the trial needs.
struct Instance {
    seed: u64,
    a: DenseMatrix,
    direction: DenseMatrix,
    x: SignalVector,
    b: SignalVector,
    noise_dir: SignalVector,
    tm: TailMetrics,
    norm_a: f64,
    norm_dir: f64,
    a_spec: [SubsetSpectrum; 3],
    /// Order `s` always; orders `2s` and `4s` only for a nonzero target.
    dir_spec: Vec<SubsetSpectrum>,
}

fn build_instance(cfg: &ExperimentConfig, trial_id: u64, eps_target: f64) -> Result<Instance> {
    let seed = derive_seed(cfg.master_seed, trial_id);
    let a = gen_matrix(&EnsembleSpec {
        kind: cfg.kind,
        m: cfg.m,
        d: cfg.d,
        seed: derive_seed(seed, 0),
    })?;
    let x = gen_signal(&SignalSpec {
        d: cfg.d,
        s: cfg.s,
        tail_alpha: cfg.tail_alpha,
        tail_beta: cfg.tail_beta,
        seed: derive_seed(seed, 1),
    })?;
    let noise_dir = gen_noise(cfg.m, 1.0, derive_seed(seed, 2))?;
    let direction = perturbation_direction(cfg.m, cfg.d, derive_seed(seed, 3))?;
    let mc = derive_seed(seed, 4);
    let spectrum = |mat: &DenseMatrix, stream: u64, order: usize| {
        subset_spectrum_auto(
            mat,
            order,
            cfg.budget,
            cfg.mc_samples,
            derive_seed(mc, stream),
        )
    };
    let s = cfg.s;
    let a_spec = [
        spectrum(&a, 0, s)?,
        spectrum(&a, 1, 2 * s)?,
        spectrum(&a, 2, 4 * s)?,
    ];
    let mut dir_spec = vec![spectrum(&direction, 3, s)?];
    if eps_target != 0.0 {
        dir_spec.push(spectrum(&direction, 4, 2 * s)?);
        dir_spec.push(spectrum(&direction, 5, 4 * s)?);
    }
    let tm = tail_metrics(&x, s)?;
    Ok(Instance {
        seed,
        b: a.matvec(&x)?,
        norm_a: spectral_norm(&a),
        norm_dir: spectral_norm(&direction),
        a,
        direction,
        x,
        noise_dir,
        tm,
        a_spec,
        dir_spec,
    })
}

fn run_trial(
    cfg: &ExperimentConfig,
    trial_id: u64,
    eps_target: f64,
    noise_level: f64,
) -> Result<TrialRecord> {
    let s = cfg.s;
    let inst = build_instance(cfg, trial_id, eps_target)?;
    let norm_a_sub = inst.a_spec[0].norm_max();
    let norm_dir_sub = inst.dir_spec[0].norm_max();
    let phi = decoder_from_direction(
        &inst.a,
        &inst.direction,
        norm_a_sub,
        norm_dir_sub,
        eps_target,
    )?;
    // Φ = A − cE.
    let c = if eps_target == 0.0 {
        0.0
    } else {
        eps_target * norm_a_sub / norm_dir_sub
    };
    let abs_full = c * inst.norm_dir;
    let abs_sub = c * norm_dir_sub;
    let eps_at = |i: usize| {
        inst.dir_spec
            .get(i)
            .map_or(0.0, |sp| c * sp.norm_max() / inst.a_spec[i].norm_max())
    };

    let e = inst.noise_dir.scaled(noise_level);
    let y = inst.b.add(&e)?;
    let b_norm = inst.b.norm2();
    let [delta_s, delta_2s, delta_4s] = inst.a_spec.map(|sp| sp.ric());

    let pc = PerturbationConstants::from_norms(
        s,
        inst.norm_a,
        norm_a_sub,
        abs_full,
        abs_sub,
        delta_s.delta,
    )
    .ok();
    let (bp, cosamp_conditions, eps_total_bp) = match &pc {
        Some(pc) => (
            Some(check_bp_conditions(&delta_2s, eps_at(1), pc, &inst.tm)?),
            Some(check_cosamp_conditions(&delta_4s, eps_at(2), pc, &inst.tm)?),
            total_noise_param(pc, &inst.tm, b_norm, noise_level).ok(),
        ),
        None => (None, None, None),
    };

    let bracket = cosamp_bracket_from_norms(&inst.x, s, abs_full, abs_sub, b_norm, noise_level)?;
    let bracket_rel = cosamp_bracket_from_norms(
        &inst.x,
        s,
        abs_full / inst.norm_a,
        abs_sub / norm_a_sub,
        b_norm,
        noise_level,
    )?;
    let bp_tail = bp_bracket(&inst.x, s, 0.0)?.tail;

    let cosamp = if cfg.algorithms.cosamp {
        let ccfg = CosampConfig {
            s,
            max_iters: cfg.cosamp_max_iters,
            residual_tol: cfg.cosamp_residual_tol,
            stagnation_tol: cfg.cosamp_stagnation_tol,
        };
        let res = cosamp_recover(&phi, &y, &ccfg)?;
        Some(Outcome {
            error: res.estimate.sub(&inst.x)?.norm2(),
            iterations: res.iterations,
            converged: res.converged,
        })
    } else {
        None
    };
    let bpdn = match (cfg.algorithms.bpdn, eps_total_bp) {
        (true, Some(radius)) => {
            let bcfg = BpdnConfig {
                epsilon: radius,
                max_iters: cfg.bpdn_max_iters,
                primal_tol: cfg.bpdn_primal_tol,
                dual_tol: cfg.bpdn_dual_tol,
            };
            let res = bpdn_solve(&phi, &y, &bcfg)?;
            Some(Outcome {
                error: res.solution.sub(&inst.x)?.norm2(),
                iterations: res.iterations,
                converged: res.converged,
            })
        }
        _ => None,
    };

    Ok(TrialRecord {
        trial_id,
        seed: inst.seed,
        index_in_cell: (trial_id % cfg.trials_per_cell as u64) as usize,
        eps_target,
        noise_level,
        eps_sub_rel: abs_sub / norm_a_sub,
        eps_full_rel: abs_full / inst.norm_a,
        abs_sub,
        abs_full,
        delta_s,
        delta_2s,
        delta_4s,
        alpha_s: inst.tm.alpha,
        beta_s: inst.tm.beta,
        bp,
        cosamp_conditions,
        cosamp,
        bpdn,
        bracket_cosamp: bracket.total(),
        bracket_cosamp_rel: bracket_rel.total(),
        bp_tail,
        eps_total_bp,
    })
}

/// Runs the sweep on `workers` threads (`0` for the global pool). The
/// records and the report do not depend on `workers`.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    workers: usize,
) -> Result<(Vec<TrialRecord>, FitReport)> {
    cfg.validate()?;
    let records = with_workers(workers, || run_records(cfg))?;
    let report = fit_report(&records);
    Ok((records, report))
}

fn run_records(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    let trials = cfg.trials_per_cell;
    let n_noise = cfg.noise_grid.len();
    let total = cfg.eps_grid.len() * n_noise * trials;
    map_indexed(Execution::Parallel, total, |t| {
        let cell = t / trials;
        let eps = cfg.eps_grid[cell / n_noise];
        let noise = cfg.noise_grid[cell % n_noise];
        run_trial(cfg, t as u64, eps, noise).map_err(|e| Error::Trial {
            trial_id: t as u64,
            eps_target: eps,
            noise_level: noise,
            source: Box::new(e),
        })
    })
    .into_iter()
    .collect()
}
