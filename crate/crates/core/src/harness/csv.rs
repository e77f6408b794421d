use std::fmt::Write as _;

use super::TrialRecord;
use crate::io::fmt_f64;

pub const CSV_COLUMNS: [&str; 26] = [
    "trial_id",
    "seed",
    "eps_target",
    "noise_level",
    "eps_sub_rel",
    "eps_full_rel",
    "abs_sub",
    "abs_full",
    "delta_s",
    "delta_2s",
    "delta_4s",
    "ric_method",
    "alpha_s",
    "beta_s",
    "cond_bp_ric",
    "cond_bp_tail",
    "cond_cs_ric",
    "cond_cs_tail",
    "err_cosamp",
    "err_bpdn",
    "bracket_cosamp",
    "eps_total_bp",
    "iters_cosamp",
    "iters_bpdn",
    "conv_cosamp",
    "conv_bpdn",
];

fn opt<T>(v: Option<T>, f: impl Fn(T) -> String) -> String {
    v.map(f).unwrap_or_default()
}

/// Header plus one line per record, in the given order. Floats carry 17
/// significant digits; absent values are empty fields.
pub fn format_csv(records: &[TrialRecord]) -> String {
    let mut out = CSV_COLUMNS.join(",");
    out.push('\n');
    for r in records {
        let fields = [
            r.trial_id.to_string(),
            r.seed.to_string(),
            fmt_f64(r.eps_target),
            fmt_f64(r.noise_level),
            fmt_f64(r.eps_sub_rel),
            fmt_f64(r.eps_full_rel),
            fmt_f64(r.abs_sub),
            fmt_f64(r.abs_full),
            fmt_f64(r.delta_s.delta),
            fmt_f64(r.delta_2s.delta),
            fmt_f64(r.delta_4s.delta),
            r.ric_method(),
            fmt_f64(r.alpha_s),
            fmt_f64(r.beta_s),
            opt(r.bp, |c| c.ric.ok.to_string()),
            opt(r.bp, |c| c.tail.ok.to_string()),
            opt(r.cosamp_conditions, |c| c.ric.ok.to_string()),
            opt(r.cosamp_conditions, |c| c.tail.ok.to_string()),
            opt(r.cosamp, |o| fmt_f64(o.error)),
            opt(r.bpdn, |o| fmt_f64(o.error)),
            fmt_f64(r.bracket_cosamp),
            opt(r.eps_total_bp, fmt_f64),
            opt(r.cosamp, |o| o.iterations.to_string()),
            opt(r.bpdn, |o| o.iterations.to_string()),
            opt(r.cosamp, |o| o.converged.to_string()),
            opt(r.bpdn, |o| o.converged.to_string()),
        ];
        let _ = writeln!(out, "{}", fields.join(","));
    }
    out
}
