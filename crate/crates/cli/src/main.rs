//! `mixcs`: restricted isometry constants, recovery runs and seeded sweeps
//! for encoders and decoders that differ.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use mixcs::bpdn::{bpdn_solve, BpdnConfig};
use mixcs::cosamp::{cosamp_recover, CosampConfig};
use mixcs::ensembles::{
    gen_matrix, gen_noise, gen_perturbed_decoder_with_budget, gen_signal, EnsembleKind,
    EnsembleSpec, PerturbationSpec, SignalSpec,
};
use mixcs::harness::{format_csv, format_summary, run_experiment, ExperimentConfig};
use mixcs::io::{read_matrix, read_vector};
use mixcs::linalg::spectral_norm;
use mixcs::metrics::{
    binomial, perturbation_constants, subset_spectrum_auto, tail_metrics, RicMethod, DEFAULT_BUDGET,
};
use mixcs::theory::{
    bp_dissimilarity_limit, bp_ric_limit, check_bp_conditions, check_cosamp_conditions,
    cosamp_bracket, cosamp_bracket_relative, cosamp_dissimilarity_limit, cosamp_ric_limit,
    total_noise_param, Condition,
};
use mixcs::{DenseMatrix, SignalVector};

/// `println!` that ignores a closed stdout (e.g. piped into `head`).
macro_rules! say {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

#[derive(Parser)]
#[command(
    name = "mixcs",
    version,
    about = "Sparse recovery with mismatched encode/decode operators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Restricted isometry constant, s-submatrix norm and perturbation constants.
    Ric(RicArgs),
    /// Recover one signal with CoSaMP or basis pursuit denoising.
    Recover(RecoverArgs),
    /// Run a seeded sweep from a config file and write CSV plus a fit summary.
    Sweep(SweepArgs),
    /// Evaluate the recovery conditions and error-bound terms for one instance.
    Check(CheckArgs),
    /// Print the admissible decoder dissimilarity at zero RIC.
    Thresholds,
}

/// Encoder from a fixture file or from an ensemble spec.
#[derive(Args)]
struct EncoderArgs {
    /// Encoder matrix fixture (`rows cols` header, row-major values).
    #[arg(long, conflicts_with_all = ["kind", "m", "d", "seed"])]
    encoder: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Kind::Gaussian)]
    kind: Kind,
    #[arg(long, default_value_t = 25)]
    m: usize,
    #[arg(long, default_value_t = 50)]
    d: usize,
    /// Ensemble seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Gaussian,
    Bernoulli,
}

impl From<Kind> for EnsembleKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Gaussian => EnsembleKind::Gaussian,
            Kind::Bernoulli => EnsembleKind::Bernoulli,
        }
    }
}

impl EncoderArgs {
    fn load(&self) -> Result<DenseMatrix> {
        match &self.encoder {
            Some(path) => read_matrix(path).with_context(|| format!("reading {}", path.display())),
            None => Ok(gen_matrix(&EnsembleSpec {
                kind: self.kind.into(),
                m: self.m,
                d: self.d,
                seed: self.seed,
            })?),
        }
    }
}

/// Decoder from a fixture file or as a seeded perturbation of the encoder.
#[derive(Args)]
struct DecoderArgs {
    /// Decoder matrix fixture; defaults to the encoder itself.
    #[arg(long, conflicts_with = "eps_target")]
    decoder: Option<PathBuf>,
    /// Relative s-submatrix perturbation of a generated decoder.
    #[arg(long)]
    eps_target: Option<f64>,
    #[arg(long, default_value_t = 1)]
    perturb_seed: u64,
}

impl DecoderArgs {
    fn load(&self, a: &DenseMatrix, s: usize, budget: u64) -> Result<DenseMatrix> {
        if let Some(path) = &self.decoder {
            return read_matrix(path).with_context(|| format!("reading {}", path.display()));
        }
        match self.eps_target {
            Some(target) => Ok(gen_perturbed_decoder_with_budget(
                a,
                &PerturbationSpec {
                    target,
                    s,
                    seed: self.perturb_seed,
                },
                budget,
            )?),
            None => Ok(a.clone()),
        }
    }
}

/// Signal from a fixture file or from tail targets.
#[derive(Args)]
struct SignalArgs {
    /// Signal fixture (`len 1` header, one value per line).
    #[arg(long, conflicts_with_all = ["tail_alpha", "tail_beta"])]
    signal: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    tail_alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    tail_beta: f64,
    #[arg(long, default_value_t = 2)]
    signal_seed: u64,
}

impl SignalArgs {
    fn load(&self, d: usize, s: usize) -> Result<SignalVector> {
        match &self.signal {
            Some(path) => read_vector(path).with_context(|| format!("reading {}", path.display())),
            None => Ok(gen_signal(&SignalSpec {
                d,
                s,
                tail_alpha: self.tail_alpha,
                tail_beta: self.tail_beta,
                seed: self.signal_seed,
            })?),
        }
    }
}

#[derive(Args)]
struct NoiseArgs {
    /// ‖e‖₂ of a Gaussian noise vector.
    #[arg(long, default_value_t = 0.0)]
    noise_level: f64,
    #[arg(long, default_value_t = 3)]
    noise_seed: u64,
}

#[derive(Args)]
struct SpectrumArgs {
    /// Sparsity level.
    #[arg(long, short)]
    s: usize,
    /// Largest number of subsets enumerated exactly.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Random subsets drawn when the budget is exceeded.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    samples: u64,
    #[arg(long, default_value_t = 4)]
    mc_seed: u64,
}

#[derive(Args)]
struct RicArgs {
    #[command(flatten)]
    encoder: EncoderArgs,
    #[command(flatten)]
    decoder: DecoderArgs,
    #[command(flatten)]
    spectrum: SpectrumArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algorithm {
    Cosamp,
    Bpdn,
}

#[derive(Args)]
struct RecoverArgs {
    #[command(flatten)]
    encoder: EncoderArgs,
    #[command(flatten)]
    decoder: DecoderArgs,
    #[command(flatten)]
    signal: SignalArgs,
    #[command(flatten)]
    noise: NoiseArgs,
    #[arg(long, short)]
    s: usize,
    #[arg(long, value_enum, default_value_t = Algorithm::Cosamp)]
    algorithm: Algorithm,
    /// Constraint radius for basis pursuit; defaults to the noise level.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(Args)]
struct SweepArgs {
    /// Experiment config (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// CSV output path.
    #[arg(long)]
    out: PathBuf,
    /// Fit summary path; printed to stdout when omitted.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    encoder: EncoderArgs,
    #[command(flatten)]
    decoder: DecoderArgs,
    #[command(flatten)]
    signal: SignalArgs,
    #[command(flatten)]
    noise: NoiseArgs,
    #[command(flatten)]
    spectrum: SpectrumArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ric(args) => ric(&args),
        Command::Recover(args) => recover(&args),
        Command::Sweep(args) => sweep(&args),
        Command::Check(args) => check(&args),
        Command::Thresholds => {
            thresholds();
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn ric(args: &RicArgs) -> Result<()> {
    let sp = &args.spectrum;
    let a = args.encoder.load()?;
    let phi = args.decoder.load(&a, sp.s, sp.budget)?;
    if phi.shape() != a.shape() {
        bail!(
            "decoder is {:?} but encoder is {:?}",
            phi.shape(),
            a.shape()
        );
    }
    let spec = subset_spectrum_auto(&a, sp.s, sp.budget, sp.samples, sp.mc_seed)?;
    let ric = spec.ric();
    say!("shape = {}x{}", a.rows(), a.cols());
    say!("s = {}", sp.s);
    say!(
        "subsets = {} of {}",
        ric.subsets_examined,
        binomial(a.cols(), sp.s)
    );
    say!("method = {}", ric.method);
    say!("delta_s = {:.12}", ric.delta);
    say!("lambda_min = {:.12}", spec.lambda_min);
    say!("lambda_max = {:.12}", spec.lambda_max);
    say!("norm_s = {:.12}", spec.norm_max());
    say!("norm = {:.12}", spectral_norm(&a));
    if ric.delta >= 1.0 {
        say!("perturbation constants undefined: delta_s >= 1");
        return Ok(());
    }
    if ric.method != RicMethod::Exact {
        say!("perturbation constants skipped: C(d, s) exceeds the budget");
        return Ok(());
    }
    let pc = perturbation_constants(&a, &phi, sp.s, &ric, sp.budget)?;
    say!("eps_full = {:.12}", pc.eps_full);
    say!("eps_sub = {:.12}", pc.eps_sub);
    say!("abs_full = {:.12}", pc.abs_full);
    say!("abs_sub = {:.12}", pc.abs_sub);
    say!("kappa = {:.12}", pc.kappa);
    say!("gamma = {:.12}", pc.gamma);
    Ok(())
}

fn recover(args: &RecoverArgs) -> Result<()> {
    let a = args.encoder.load()?;
    let phi = args.decoder.load(&a, args.s, args.budget)?;
    let x = args.signal.load(a.cols(), args.s)?;
    let e = gen_noise(a.rows(), args.noise.noise_level, args.noise.noise_seed)?;
    let y = a.matvec(&x)?.add(&e)?;
    let x_norm = x.norm2();
    match args.algorithm {
        Algorithm::Cosamp => {
            let res = cosamp_recover(&phi, &y, &CosampConfig::new(args.s))?;
            let err = res.estimate.sub(&x)?.norm2();
            say!("algorithm = cosamp");
            say!("error = {err:.6e}");
            say!(
                "relative_error = {:.6e}",
                err / x_norm.max(f64::MIN_POSITIVE)
            );
            say!("iterations = {}", res.iterations);
            say!("converged = {}", res.converged);
            say!("stop = {}", res.stop_reason.as_str());
            say!(
                "final_residual = {:.6e}",
                res.residual_history.last().copied().unwrap_or(0.0)
            );
        }
        Algorithm::Bpdn => {
            let eps = args.epsilon.unwrap_or(args.noise.noise_level);
            let res = bpdn_solve(&phi, &y, &BpdnConfig::new(eps))?;
            let err = res.solution.sub(&x)?.norm2();
            say!("algorithm = bpdn");
            say!("epsilon = {eps:.6e}");
            say!("error = {err:.6e}");
            say!(
                "relative_error = {:.6e}",
                err / x_norm.max(f64::MIN_POSITIVE)
            );
            say!("objective = {:.12}", res.objective);
            say!("duality_gap = {:.6e}", res.duality_gap());
            say!("constraint_slack = {:.6e}", res.constraint_slack);
            say!("iterations = {}", res.iterations);
            say!("converged = {}", res.converged);
        }
    }
    Ok(())
}

fn sweep(args: &SweepArgs) -> Result<()> {
    let text = fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let cfg = ExperimentConfig::parse(&text)
        .with_context(|| format!("parsing {}", args.config.display()))?;
    let (records, report) = run_experiment(&cfg, args.workers)?;
    fs::write(&args.out, format_csv(&records))
        .with_context(|| format!("writing {}", args.out.display()))?;
    let summary = format_summary(&report);
    match &args.summary {
        Some(path) => {
            fs::write(path, summary).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{summary}"),
    }
    Ok(())
}

fn show(name: &str, c: &Condition) {
    say!("{name} = {} (margin {:+.6e})", c.ok, c.margin);
}

fn check(args: &CheckArgs) -> Result<()> {
    let sp = &args.spectrum;
    let s = sp.s;
    let a = args.encoder.load()?;
    let phi = args.decoder.load(&a, s, sp.budget)?;
    let x = args.signal.load(a.cols(), s)?;
    if 4 * s > a.cols() {
        bail!(
            "need 4s <= d for the order-4s constants (s = {s}, d = {})",
            a.cols()
        );
    }
    let e_norm = args.noise.noise_level;
    let b_norm = a.matvec(&x)?.norm2();
    let tm = tail_metrics(&x, s)?;
    let diff = a.sub(&phi)?;
    let spec = |m: &DenseMatrix, order: usize, salt: u64| {
        subset_spectrum_auto(
            m,
            order,
            sp.budget,
            sp.samples,
            sp.mc_seed.wrapping_add(salt),
        )
    };
    let (a2, a4) = (spec(&a, 2 * s, 0)?, spec(&a, 4 * s, 1)?);
    let eps_2s = spec(&diff, 2 * s, 2)?.norm_max() / a2.norm_max();
    let eps_4s = spec(&diff, 4 * s, 3)?.norm_max() / a4.norm_max();
    let delta_s = spec(&a, s, 4)?.ric();
    say!("alpha_s = {:.6e}", tm.alpha);
    say!("beta_s = {:.6e}", tm.beta);
    say!("delta_s = {:.6} ({})", delta_s.delta, delta_s.method);
    say!("delta_2s = {:.6} ({})", a2.delta(), a2.method);
    say!("delta_4s = {:.6} ({})", a4.delta(), a4.method);
    say!("eps_sub_2s = {eps_2s:.6e}");
    say!("eps_sub_4s = {eps_4s:.6e}");
    if delta_s.delta >= 1.0 {
        say!("kappa undefined: delta_s >= 1; tail conditions and brackets skipped");
        return Ok(());
    }
    let pc = perturbation_constants(&a, &phi, s, &delta_s, sp.budget)?;
    let bp = check_bp_conditions(&a2.ric(), eps_2s, &pc, &tm)?;
    let cs = check_cosamp_conditions(&a4.ric(), eps_4s, &pc, &tm)?;
    say!("bp_ric_limit = {:.6}", bp_ric_limit(eps_2s));
    say!("cosamp_ric_limit = {:.6}", cosamp_ric_limit(eps_4s));
    show("bp_ric_ok", &bp.ric);
    show("bp_tail_ok", &bp.tail);
    show("cosamp_ric_ok", &cs.ric);
    show("cosamp_tail_ok", &cs.tail);
    match total_noise_param(&pc, &tm, b_norm, e_norm) {
        Ok(v) => say!("eps_total_bp = {v:.6e}"),
        Err(err) => say!("eps_total_bp undefined: {err}"),
    }
    let br = cosamp_bracket(&x, s, &pc, b_norm, e_norm)?;
    let rel = cosamp_bracket_relative(&x, s, &pc, b_norm, e_norm)?;
    say!(
        "bracket_cosamp = {:.6e} (tail_l2 {:.3e}, tail_l1 {:.3e}, perturbation {:.3e}, noise {:.3e})",
        br.total(),
        br.tail_l2,
        br.tail_l1,
        br.perturbation,
        br.noise
    );
    say!("bracket_cosamp_relative = {:.6e}", rel.total());
    Ok(())
}

fn thresholds() {
    let bp = bp_dissimilarity_limit(0.0);
    let cs = cosamp_dissimilarity_limit(0.0);
    say!("basis pursuit: delta_2s < sqrt(2)/(1+eps)^2 - 1");
    say!(
        "  at delta_2s = 0: eps < 2^(1/4) - 1 = {bp:.15} (about {:.0}%)",
        100.0 * bp
    );
    say!("CoSaMP: delta_4s <= 1.1/(1+eps)^2 - 1");
    say!(
        "  at delta_4s = 0: eps <= sqrt(1.1) - 1 = {cs:.15} (about {:.0}%)",
        100.0 * cs
    );
}
