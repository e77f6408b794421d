//! Empirical constants for the error bounds.
//!
//! Trials enter a fit when the tail condition of the respective bound
//! holds and the bracket exceeds [`MIN_BRACKET`]. Constants come from the
//! training split only; coverage is measured on the held-out split.

use std::fmt::Write as _;

use super::TrialRecord;

/// Brackets at or below this are exact-recovery checks, not fit data.
pub const MIN_BRACKET: f64 = 1e-12;
/// Error accepted as exact recovery of a zero-bracket trial.
pub const EXACT_TOL: f64 = 1e-6;

/// `C = max(error / bracket)` over training trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxRatioFit {
    pub constant: f64,
    pub train_used: usize,
    pub test_used: usize,
    pub test_covered: usize,
    /// Median of `error / (C · bracket)` on the test split.
    pub median_test_ratio: f64,
}

impl MaxRatioFit {
    /// Fraction of held-out trials with `error ≤ C · bracket`.
    pub fn coverage(&self) -> f64 {
        if self.test_used == 0 {
            1.0
        } else {
            self.test_covered as f64 / self.test_used as f64
        }
    }
}

/// `error ≤ C₀·tail + C₁·radius` with the smallest total bound over the
/// training split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoConstantFit {
    pub c0: f64,
    pub c1: f64,
    pub train_used: usize,
    pub test_used: usize,
    pub test_covered: usize,
}

impl TwoConstantFit {
    pub fn coverage(&self) -> f64 {
        if self.test_used == 0 {
            1.0
        } else {
            self.test_covered as f64 / self.test_used as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExactRecovery {
    pub checked: usize,
    pub passed: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellMedian {
    pub eps_target: f64,
    pub noise_level: f64,
    pub cosamp: Option<f64>,
    pub bpdn: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FitReport {
    pub trials: usize,
    pub cosamp_gated: usize,
    pub cosamp_strict_gated: usize,
    pub bp_gated: usize,
    pub bp_strict_gated: usize,
    /// Absolute-norm bracket, tail-gated.
    pub cosamp: Option<MaxRatioFit>,
    /// Relative-constant bracket, tail-gated.
    pub cosamp_relative: Option<MaxRatioFit>,
    /// Absolute-norm bracket, gated on both conditions.
    pub cosamp_strict: Option<MaxRatioFit>,
    pub bp: Option<TwoConstantFit>,
    pub bp_strict: Option<TwoConstantFit>,
    pub exact_recovery: ExactRecovery,
    /// Per-cell medians over all trials, in grid order.
    pub medians: Vec<CellMedian>,
}

fn fit_max_ratio(
    records: &[TrialRecord],
    sample: impl Fn(&TrialRecord) -> Option<(f64, f64)>,
) -> Option<MaxRatioFit> {
    let usable = |r: &TrialRecord| sample(r).filter(|&(_, br)| br > MIN_BRACKET);
    let train: Vec<f64> = records
        .iter()
        .filter(|r| r.is_train())
        .filter_map(usable)
        .map(|(e, b)| e / b)
        .collect();
    if train.is_empty() {
        return None;
    }
    let constant = train.iter().fold(0.0f64, |a, &v| a.max(v));
    let test: Vec<f64> = records
        .iter()
        .filter(|r| !r.is_train())
        .filter_map(usable)
        .map(|(e, b)| {
            if constant > 0.0 {
                e / (constant * b)
            } else if e > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .collect();
    Some(MaxRatioFit {
        constant,
        train_used: train.len(),
        test_used: test.len(),
        test_covered: test.iter().filter(|&&v| v <= 1.0).count(),
        median_test_ratio: median(test).unwrap_or(0.0),
    })
}

/// Solves `min Σ(C₀aᵢ + C₁bᵢ)` s.t. `C₀aᵢ + C₁bᵢ ≥ eᵢ`, `C ≥ 0` by
/// enumerating the vertices of the feasible polygon.
pub(crate) fn fit_two_constant(points: &[(f64, f64, f64)]) -> Option<(f64, f64)> {
    if points.is_empty() {
        return None;
    }
    let feasible = |c0: f64, c1: f64| {
        c0 >= 0.0
            && c1 >= 0.0
            && c0.is_finite()
            && c1.is_finite()
            && points
                .iter()
                .all(|&(a, b, e)| c0 * a + c1 * b >= e * (1.0 - 1e-12))
    };
    let (sa, sb) = points
        .iter()
        .fold((0.0, 0.0), |(x, y), &(a, b, _)| (x + a, y + b));
    let mut cands = vec![(0.0, 0.0)];
    for (i, &(a, b, e)) in points.iter().enumerate() {
        if a > 0.0 {
            cands.push((e / a, 0.0));
        }
        if b > 0.0 {
            cands.push((0.0, e / b));
        }
        for &(a2, b2, e2) in &points[i + 1..] {
            let det = a * b2 - a2 * b;
            if det.abs() > 1e-300 {
                cands.push(((e * b2 - e2 * b) / det, (a * e2 - a2 * e) / det));
            }
        }
    }
    cands
        .into_iter()
        .filter(|&(c0, c1)| feasible(c0, c1))
        .min_by(|p, q| (p.0 * sa + p.1 * sb).total_cmp(&(q.0 * sa + q.1 * sb)))
}

fn fit_bp(records: &[TrialRecord], gate: impl Fn(&TrialRecord) -> bool) -> Option<TwoConstantFit> {
    let sample = |r: &TrialRecord| -> Option<(f64, f64, f64)> {
        let out = r.bpdn?;
        let radius = r.eps_total_bp?;
        (gate(r) && r.bp_tail + radius > MIN_BRACKET).then_some((r.bp_tail, radius, out.error))
    };
    let train: Vec<_> = records
        .iter()
        .filter(|r| r.is_train())
        .filter_map(sample)
        .collect();
    let (c0, c1) = fit_two_constant(&train)?;
    let test: Vec<_> = records
        .iter()
        .filter(|r| !r.is_train())
        .filter_map(sample)
        .collect();
    Some(TwoConstantFit {
        c0,
        c1,
        train_used: train.len(),
        test_used: test.len(),
        test_covered: test
            .iter()
            .filter(|&&(a, b, e)| e <= c0 * a + c1 * b)
            .count(),
    })
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

fn cell_medians(records: &[TrialRecord]) -> Vec<CellMedian> {
    let mut cells: Vec<(f64, f64)> = Vec::new();
    for r in records {
        if !cells.contains(&(r.eps_target, r.noise_level)) {
            cells.push((r.eps_target, r.noise_level));
        }
    }
    cells
        .into_iter()
        .map(|(eps, noise)| {
            let of = |pick: fn(&TrialRecord) -> Option<f64>| {
                median(
                    records
                        .iter()
                        .filter(|r| r.eps_target == eps && r.noise_level == noise)
                        .filter_map(pick)
                        .collect(),
                )
            };
            CellMedian {
                eps_target: eps,
                noise_level: noise,
                cosamp: of(|r| r.cosamp.map(|o| o.error)),
                bpdn: of(|r| r.bpdn.map(|o| o.error)),
            }
        })
        .collect()
}

pub fn fit_report(records: &[TrialRecord]) -> FitReport {
    let mut exact = ExactRecovery::default();
    for r in records {
        if let Some(o) = r.cosamp {
            if r.bracket_cosamp <= MIN_BRACKET {
                exact.checked += 1;
                exact.passed += usize::from(o.error <= EXACT_TOL);
            }
        }
    }
    let count = |f: fn(&TrialRecord) -> bool| records.iter().filter(|r| f(r)).count();
    FitReport {
        trials: records.len(),
        cosamp_gated: count(|r| r.cosamp.is_some() && r.cosamp_tail_ok()),
        cosamp_strict_gated: count(|r| r.cosamp.is_some() && r.cosamp_strict_ok()),
        bp_gated: count(|r| r.bpdn.is_some() && r.bp_tail_ok()),
        bp_strict_gated: count(|r| r.bpdn.is_some() && r.bp_strict_ok()),
        cosamp: fit_max_ratio(records, |r| {
            r.cosamp_tail_ok()
                .then_some((r.cosamp?.error, r.bracket_cosamp))
        }),
        cosamp_relative: fit_max_ratio(records, |r| {
            r.cosamp_tail_ok()
                .then_some((r.cosamp?.error, r.bracket_cosamp_rel))
        }),
        cosamp_strict: fit_max_ratio(records, |r| {
            r.cosamp_strict_ok()
                .then_some((r.cosamp?.error, r.bracket_cosamp))
        }),
        bp: fit_bp(records, TrialRecord::bp_tail_ok),
        bp_strict: fit_bp(records, TrialRecord::bp_strict_ok),
        exact_recovery: exact,
        medians: cell_medians(records),
    }
}

fn write_ratio(out: &mut String, name: &str, fit: &Option<MaxRatioFit>) {
    match fit {
        Some(f) => {
            let _ = writeln!(out, "{name}.C = {:.6e}", f.constant);
            let _ = writeln!(out, "{name}.train_trials = {}", f.train_used);
            let _ = writeln!(out, "{name}.test_trials = {}", f.test_used);
            let _ = writeln!(out, "{name}.test_coverage = {:.4}", f.coverage());
            let _ = writeln!(out, "{name}.median_test_ratio = {:.4}", f.median_test_ratio);
        }
        None => {
            let _ = writeln!(out, "{name} = no eligible training trials");
        }
    }
}

fn write_two(out: &mut String, name: &str, fit: &Option<TwoConstantFit>) {
    match fit {
        Some(f) => {
            let _ = writeln!(out, "{name}.C0 = {:.6e}", f.c0);
            let _ = writeln!(out, "{name}.C1 = {:.6e}", f.c1);
            let _ = writeln!(out, "{name}.train_trials = {}", f.train_used);
            let _ = writeln!(out, "{name}.test_trials = {}", f.test_used);
            let _ = writeln!(out, "{name}.test_coverage = {:.4}", f.coverage());
        }
        None => {
            let _ = writeln!(out, "{name} = no eligible training trials");
        }
    }
}

/// Plain-text `key = value` summary of a report.
pub fn format_summary(report: &FitReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "trials = {}", report.trials);
    let _ = writeln!(out, "cosamp.tail_gated_trials = {}", report.cosamp_gated);
    let _ = writeln!(
        out,
        "cosamp.fully_gated_trials = {}",
        report.cosamp_strict_gated
    );
    let _ = writeln!(out, "bpdn.tail_gated_trials = {}", report.bp_gated);
    let _ = writeln!(out, "bpdn.fully_gated_trials = {}", report.bp_strict_gated);
    write_ratio(&mut out, "cosamp.fit", &report.cosamp);
    write_ratio(&mut out, "cosamp.fit_relative", &report.cosamp_relative);
    write_ratio(&mut out, "cosamp.fit_fully_gated", &report.cosamp_strict);
    write_two(&mut out, "bpdn.fit", &report.bp);
    write_two(&mut out, "bpdn.fit_fully_gated", &report.bp_strict);
    let ex = report.exact_recovery;
    let _ = writeln!(out, "cosamp.exact_recovery = {}/{}", ex.passed, ex.checked);
    for c in &report.medians {
        let show = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.6e}"));
        let _ = writeln!(
            out,
            "median_error[eps={}, noise={}] = cosamp {} bpdn {}",
            c.eps_target,
            c.noise_level,
            show(c.cosamp),
            show(c.bpdn)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_constant_fit_on_a_known_polygon() {
        // e = a + 2b exactly: the bound C = (1, 2) is tight everywhere.
        let pts = [(1.0, 0.0, 1.0), (0.0, 1.0, 2.0), (1.0, 1.0, 3.0)];
        let (c0, c1) = fit_two_constant(&pts).unwrap();
        assert!((c0 - 1.0).abs() < 1e-12 && (c1 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn two_constant_fit_prefers_cheaper_axis() {
        // One constraint: C₀ + C₁ ≥ 1; objective favours the smaller column sum.
        let pts = [(1.0, 1.0, 1.0), (0.1, 3.0, 0.0)];
        let (c0, c1) = fit_two_constant(&pts).unwrap();
        assert_eq!((c0, c1), (1.0, 0.0));
        for &(a, b, e) in &pts {
            assert!(c0 * a + c1 * b >= e);
        }
    }

    #[test]
    fn infeasible_fit_returns_none() {
        assert_eq!(fit_two_constant(&[(0.0, 0.0, 1.0)]), None);
        assert_eq!(fit_two_constant(&[]), None);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(vec![]), None);
    }
}
