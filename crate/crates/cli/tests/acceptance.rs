//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each
//! and exits nonzero if any failed.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use mixcs::bpdn::{bpdn_solve, BpdnConfig};
use mixcs::cosamp::{cosamp_recover, CosampConfig};
use mixcs::ensembles::{
    beta_range, gen_matrix, gen_perturbed_decoder, gen_signal, EnsembleKind, EnsembleSpec,
    PerturbationSpec, SignalSpec,
};
use mixcs::harness::{format_csv, run_experiment, ExperimentConfig};
use mixcs::metrics::{ric_exact, DEFAULT_BUDGET};
use mixcs::rng::derive_seed;
use mixcs::theory::{
    bp_dissimilarity_limit, cosamp_dissimilarity_limit, decoder_ric_bound, rip_norm_bounds,
};
use mixcs::DenseMatrix;

const RIC_TOL: f64 = 1e-12;
const RIC_BUDGET: Duration = Duration::from_secs(5);
const RIC_BOUND_SLACK: f64 = 1e-10;
const RIC_BOUND_EQ_TOL: f64 = 1e-12;
const SANDWICH_SLACK: f64 = 1e-10;
const COSAMP_REL_TOL: f64 = 1e-6;
const COSAMP_MIN_PASS: usize = 95;
const COSAMP_TRIAL_LIMIT: Duration = Duration::from_millis(50);
const BP_OBJ_TOL: f64 = 1e-5;
const BP_SLACK_TOL: f64 = -1e-9;
const THRESHOLD_TOL: f64 = 1e-15;
const MIN_COVERAGE: f64 = 0.95;
const SWEEP_LIMIT: Duration = Duration::from_secs(120);

type Verdict = (bool, String);

fn rows(a: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..a.rows()).map(|i| a.row(i).to_vec()).collect()
}

fn gaussian(m: usize, d: usize, seed: u64) -> DenseMatrix {
    gen_matrix(&EnsembleSpec {
        kind: EnsembleKind::Gaussian,
        m,
        d,
        seed,
    })
    .unwrap()
}

fn repo_file(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .join(rel)
}

fn default_config() -> ExperimentConfig {
    let text = std::fs::read_to_string(repo_file("configs/default.conf")).unwrap();
    ExperimentConfig::parse(&text).unwrap()
}

fn ric_oracle() -> Verdict {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for k in 0..20 {
        let a = gaussian(8, 16, derive_seed(1001, k));
        let got = ric_exact(&a, 2, DEFAULT_BUDGET).unwrap().delta;
        worst = worst.max((got - testkit::ric_brute(&rows(&a), 2)).abs());
    }
    let t = start.elapsed();
    (
        worst <= RIC_TOL && t < RIC_BUDGET,
        format!(
            "max |diff| = {worst:.2e} over 20 matrices, {:.2} s",
            t.as_secs_f64()
        ),
    )
}

fn decoder_ric() -> Verdict {
    let (mut held, mut eq_ok, mut eq_cases) = (0, true, 0);
    let mut worst_margin = f64::NEG_INFINITY;
    for k in 0..50u64 {
        let seed = derive_seed(1002, k);
        let (m, d, s) =
            [(8, 16, 2), (6, 12, 1), (10, 16, 2), (7, 14, 2), (5, 10, 1)][(k % 5) as usize];
        let target = if k % 10 == 0 {
            0.0
        } else {
            0.02 * (k % 10) as f64
        };
        let a = gaussian(m, d, derive_seed(seed, 0));
        let phi = gen_perturbed_decoder(
            &a,
            &PerturbationSpec {
                target,
                s,
                seed: derive_seed(seed, 1),
            },
        )
        .unwrap();
        let da = ric_exact(&a, s, DEFAULT_BUDGET).unwrap();
        let dphi = ric_exact(&phi, s, DEFAULT_BUDGET).unwrap().delta;
        let eps = testkit::submatrix_norm_brute(&rows(&a.sub(&phi).unwrap()), s)
            / testkit::submatrix_norm_brute(&rows(&a), s);
        let bound = decoder_ric_bound(&da, eps).unwrap();
        worst_margin = worst_margin.max(dphi - bound);
        if dphi <= bound + RIC_BOUND_SLACK {
            held += 1;
        }
        if target == 0.0 {
            eq_cases += 1;
            eq_ok &= (bound - dphi).abs() <= RIC_BOUND_EQ_TOL;
        }
    }
    (
        held == 50 && eq_ok,
        format!("{held}/50 bounded (max lhs - rhs = {worst_margin:.3e}), equality in {eq_cases} unperturbed pairs: {eq_ok}"),
    )
}

fn sandwich() -> Verdict {
    let mut held = 0;
    for k in 0..100u64 {
        let seed = derive_seed(1003, k);
        let (d, s) = (16, 2);
        let a = gaussian(8, d, derive_seed(seed, 0));
        let alpha = 0.05 * (k % 8) as f64;
        let (lo, hi) = beta_range(d, s, alpha);
        let beta = lo + (hi - lo) * ((k % 5) as f64 / 4.0);
        let x = gen_signal(&SignalSpec {
            d,
            s,
            tail_alpha: alpha,
            tail_beta: beta,
            seed: derive_seed(seed, 1),
        })
        .unwrap();
        let delta = ric_exact(&a, s, DEFAULT_BUDGET).unwrap();
        let (lower, upper) = rip_norm_bounds(&x, s, &delta).unwrap();
        let ax = testkit::norm2(&testkit::matvec(&rows(&a), x.as_slice()));
        if lower <= ax + SANDWICH_SLACK && ax <= upper + SANDWICH_SLACK {
            held += 1;
        }
    }
    (held == 100, format!("{held}/100 sandwiched"))
}

fn cosamp_exact() -> Verdict {
    let (mut good, mut slowest) = (0, Duration::ZERO);
    for k in 0..100u64 {
        let seed = derive_seed(1004, k);
        let a = gaussian(25, 50, derive_seed(seed, 0));
        let x = gen_signal(&SignalSpec {
            d: 50,
            s: 3,
            tail_alpha: 0.0,
            tail_beta: 0.0,
            seed: derive_seed(seed, 1),
        })
        .unwrap();
        let y = a.matvec(&x).unwrap();
        let start = Instant::now();
        let r = cosamp_recover(&a, &y, &CosampConfig::new(3)).unwrap();
        slowest = slowest.max(start.elapsed());
        if r.estimate.sub(&x).unwrap().norm2() <= COSAMP_REL_TOL * x.norm2() {
            good += 1;
        }
    }
    (
        good >= COSAMP_MIN_PASS && slowest < COSAMP_TRIAL_LIMIT,
        format!(
            "{good}/100 recovered, slowest trial {:.2} ms",
            slowest.as_secs_f64() * 1e3
        ),
    )
}

fn bpdn_oracle() -> Verdict {
    let (mut worst_gap, mut worst_slack) = (0.0f64, f64::INFINITY);
    for k in 0..20u64 {
        let seed = derive_seed(1005, k);
        let (m, d, s) = [(8, 16, 1), (10, 20, 2), (12, 24, 3), (12, 20, 2)][(k % 4) as usize];
        let a = gaussian(m, d, derive_seed(seed, 0));
        let (alpha, beta) = if k % 2 == 0 {
            (0.0, 0.0)
        } else {
            (0.1, beta_range(d, s, 0.1).0 * 1.5)
        };
        let x = gen_signal(&SignalSpec {
            d,
            s,
            tail_alpha: alpha,
            tail_beta: beta,
            seed: derive_seed(seed, 1),
        })
        .unwrap();
        let y = a.matvec(&x).unwrap();
        let r = bpdn_solve(&a, &y, &BpdnConfig::new(0.0)).unwrap();
        let (opt, _) = testkit::basis_pursuit_lp(&rows(&a), y.as_slice()).unwrap();
        worst_gap = worst_gap.max((r.objective - opt).abs());
        worst_slack = worst_slack.min(r.constraint_slack);
    }
    (
        worst_gap <= BP_OBJ_TOL && worst_slack >= BP_SLACK_TOL,
        format!("max objective gap {worst_gap:.2e}, min slack {worst_slack:.2e} over 20 instances"),
    )
}

fn thresholds() -> Verdict {
    let bp = bp_dissimilarity_limit(0.0);
    let cs = cosamp_dissimilarity_limit(0.0);
    let closed = (bp - (2f64.powf(0.25) - 1.0)).abs() <= THRESHOLD_TOL
        && (cs - (1.1f64.sqrt() - 1.0)).abs() <= THRESHOLD_TOL;
    let out = Command::new(env!("CARGO_BIN_EXE_mixcs"))
        .arg("thresholds")
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    let percent = |key: &str| -> Option<f64> {
        let line = text.lines().find(|l| l.contains(key))?;
        let v: f64 = line
            .rsplit('=')
            .next()?
            .split_whitespace()
            .next()?
            .parse()
            .ok()?;
        Some((v * 100.0).round())
    };
    let (p_bp, p_cs) = (percent("2^(1/4) - 1"), percent("sqrt(1.1) - 1"));
    (
        closed && out.status.success() && p_bp == Some(19.0) && p_cs == Some(5.0),
        format!("limits {bp:.15} and {cs:.15}; printed rounds to {p_bp:?}% and {p_cs:?}%"),
    )
}

struct Sweep {
    report: mixcs::harness::FitReport,
    elapsed: Duration,
    eps_grid: Vec<f64>,
}

fn cosamp_sweep(sw: &Sweep) -> Verdict {
    let Some(fit) = sw.report.cosamp else {
        return (false, "no tail-gated CoSaMP trials".into());
    };
    let zero: Vec<f64> = sw
        .eps_grid
        .iter()
        .map(|&e| {
            sw.report
                .medians
                .iter()
                .find(|c| c.eps_target == e && c.noise_level == 0.0)
                .and_then(|c| c.cosamp)
                .unwrap_or(f64::NAN)
        })
        .collect();
    let increasing = zero.windows(2).all(|w| w[1] > w[0]);
    (
        fit.coverage() >= MIN_COVERAGE && increasing && sw.elapsed < SWEEP_LIMIT,
        format!(
            "C = {:.4}, held-out coverage {}/{} = {:.4}, zero-noise medians {:?}, {:.1} s on 1 worker",
            fit.constant,
            fit.test_covered,
            fit.test_used,
            fit.coverage(),
            zero.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>(),
            sw.elapsed.as_secs_f64()
        ),
    )
}

fn bp_sweep(sw: &Sweep) -> Verdict {
    let Some(fit) = sw.report.bp else {
        return (false, "no tail-gated BP trials".into());
    };
    (
        fit.coverage() >= MIN_COVERAGE,
        format!(
            "C0 = {:.4}, C1 = {:.4}, held-out coverage {}/{} = {:.4}",
            fit.c0,
            fit.c1,
            fit.test_covered,
            fit.test_used,
            fit.coverage()
        ),
    )
}

fn determinism() -> Verdict {
    let cfg = ExperimentConfig {
        trials_per_cell: 4,
        ..default_config()
    };
    let csvs: Vec<String> = [1, 2, 4]
        .iter()
        .map(|&w| format_csv(&run_experiment(&cfg, w).unwrap().0))
        .collect();
    let same = csvs.windows(2).all(|w| w[0] == w[1]);
    (
        same,
        format!(
            "{} rows, workers 1/2/4 byte-identical: {same}",
            csvs[0].lines().count() - 1
        ),
    )
}

fn guarded<T>(f: impl FnOnce() -> T) -> Result<T, String> {
    catch_unwind(AssertUnwindSafe(f)).map_err(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        format!("panicked: {msg}")
    })
}

fn run(f: fn() -> Verdict) -> Verdict {
    guarded(f).unwrap_or_else(|msg| (false, msg))
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Verdict)> = vec![
        ("1 RIC oracle equivalence", run(ric_oracle)),
        ("2 decoder RIC bound", run(decoder_ric)),
        ("3 RIP norm sandwich", run(sandwich)),
        ("4 CoSaMP exact recovery", run(cosamp_exact)),
        ("5 BPDN oracle equivalence", run(bpdn_oracle)),
        ("6 threshold constants", run(thresholds)),
    ];
    let sweep = guarded(|| {
        let cfg = default_config();
        let start = Instant::now();
        let (_, report) = run_experiment(&cfg, 1).unwrap();
        Sweep {
            report,
            elapsed: start.elapsed(),
            eps_grid: cfg.eps_grid,
        }
    });
    match sweep {
        Ok(sw) => {
            results.push(("7 CoSaMP mixed-operator bound", cosamp_sweep(&sw)));
            results.push(("8 BP total-noise bound", bp_sweep(&sw)));
        }
        Err(msg) => {
            results.push(("7 CoSaMP mixed-operator bound", (false, msg.clone())));
            results.push(("8 BP total-noise bound", (false, msg)));
        }
    }
    results.push(("9 determinism across workers", run(determinism)));

    let mut failed = 0;
    for (name, (ok, detail)) in &results {
        println!("[{}] {name}: {detail}", if *ok { "PASS" } else { "FAIL" });
        failed += usize::from(!ok);
    }
    println!(
        "acceptance: {}/{} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
