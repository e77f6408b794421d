//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # comments start with '#'
//! kind = bernoulli          # gaussian | bernoulli
//! m = 25
//! d = 50
//! s = 2
//! tail_alpha = 0.01
//! tail_beta = 0.01
//! eps_grid = 0, 0.005, 0.01, 0.02
//! noise_grid = 0, 0.05, 0.1
//! trials_per_cell = 50
//! algorithms = cosamp, bpdn
//! master_seed = 20100301
//! budget = 200000
//! mc_samples = 200000
//! ```
//!
//! Optional solver keys: `cosamp_max_iters`, `cosamp_residual_tol`,
//! `cosamp_stagnation_tol`, `bpdn_max_iters`, `bpdn_primal_tol`,
//! `bpdn_dual_tol`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::ensembles::EnsembleKind;
use crate::metrics::DEFAULT_BUDGET;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Algorithms {
    pub cosamp: bool,
    pub bpdn: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: EnsembleKind,
    pub m: usize,
    pub d: usize,
    pub s: usize,
    pub tail_alpha: f64,
    pub tail_beta: f64,
    pub eps_grid: Vec<f64>,
    pub noise_grid: Vec<f64>,
    pub trials_per_cell: usize,
    pub algorithms: Algorithms,
    pub master_seed: u64,
    pub budget: u64,
    pub mc_samples: u64,
    pub cosamp_max_iters: usize,
    pub cosamp_residual_tol: f64,
    pub cosamp_stagnation_tol: f64,
    pub bpdn_max_iters: usize,
    pub bpdn_primal_tol: f64,
    pub bpdn_dual_tol: f64,
}

impl Default for ExperimentConfig {
    /// The shipped desk-scale sweep.
    fn default() -> Self {
        Self {
            kind: EnsembleKind::Bernoulli,
            m: 25,
            d: 50,
            s: 2,
            tail_alpha: 0.01,
            tail_beta: 0.01,
            eps_grid: vec![0.0, 0.005, 0.01, 0.02],
            noise_grid: vec![0.0, 0.05, 0.1],
            trials_per_cell: 50,
            algorithms: Algorithms {
                cosamp: true,
                bpdn: true,
            },
            master_seed: 20_100_301,
            budget: DEFAULT_BUDGET,
            mc_samples: 200_000,
            cosamp_max_iters: 100,
            cosamp_residual_tol: 1e-10,
            cosamp_stagnation_tol: 1e-7,
            bpdn_max_iters: 50_000,
            bpdn_primal_tol: 1e-9,
            bpdn_dual_tol: 1e-9,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| Error::Parse {
        line,
        message: format!("`{key}`: {e}"),
    })
}

fn parse_list(key: &str, value: &str, line: usize) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|t| parse_num::<f64>(key, t.trim(), line))
        .collect()
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or(Error::Parse {
                line,
                message: format!("expected `key = value`, got `{content}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if seen.insert(key.to_string(), line).is_some() {
                return Err(Error::Parse {
                    line,
                    message: format!("duplicate key `{key}`"),
                });
            }
            match key {
                "kind" => {
                    cfg.kind = value.parse().map_err(|e: Error| Error::Parse {
                        line,
                        message: e.to_string(),
                    })?
                }
                "m" => cfg.m = parse_num(key, value, line)?,
                "d" => cfg.d = parse_num(key, value, line)?,
                "s" => cfg.s = parse_num(key, value, line)?,
                "tail_alpha" => cfg.tail_alpha = parse_num(key, value, line)?,
                "tail_beta" => cfg.tail_beta = parse_num(key, value, line)?,
                "eps_grid" => cfg.eps_grid = parse_list(key, value, line)?,
                "noise_grid" => cfg.noise_grid = parse_list(key, value, line)?,
                "trials_per_cell" => cfg.trials_per_cell = parse_num(key, value, line)?,
                "algorithms" => {
                    let mut algs = Algorithms {
                        cosamp: false,
                        bpdn: false,
                    };
                    for name in value.split(',').map(str::trim) {
                        match name {
                            "cosamp" => algs.cosamp = true,
                            "bpdn" => algs.bpdn = true,
                            other => {
                                return Err(Error::Parse {
                                    line,
                                    message: format!("unknown algorithm `{other}`"),
                                })
                            }
                        }
                    }
                    cfg.algorithms = algs;
                }
                "master_seed" => cfg.master_seed = parse_num(key, value, line)?,
                "budget" => cfg.budget = parse_num(key, value, line)?,
                "mc_samples" => cfg.mc_samples = parse_num(key, value, line)?,
                "cosamp_max_iters" => cfg.cosamp_max_iters = parse_num(key, value, line)?,
                "cosamp_residual_tol" => cfg.cosamp_residual_tol = parse_num(key, value, line)?,
                "cosamp_stagnation_tol" => cfg.cosamp_stagnation_tol = parse_num(key, value, line)?,
                "bpdn_max_iters" => cfg.bpdn_max_iters = parse_num(key, value, line)?,
                "bpdn_primal_tol" => cfg.bpdn_primal_tol = parse_num(key, value, line)?,
                "bpdn_dual_tol" => cfg.bpdn_dual_tol = parse_num(key, value, line)?,
                other => {
                    return Err(Error::Parse {
                        line,
                        message: format!("unknown key `{other}`"),
                    })
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.m == 0 || self.d == 0 {
            return bad(format!(
                "dimensions must be positive, got {}x{}",
                self.m, self.d
            ));
        }
        if self.s == 0 || 4 * self.s > self.d {
            return bad(format!(
                "need 1 <= s and 4s <= d for the order-4s constants (s = {}, d = {})",
                self.s, self.d
            ));
        }
        if self.eps_grid.is_empty() || self.noise_grid.is_empty() {
            return bad("grids must be nonempty".into());
        }
        if self.eps_grid.iter().any(|&e| !(0.0..1.0).contains(&e)) {
            return bad("eps_grid values must lie in [0, 1)".into());
        }
        if self
            .noise_grid
            .iter()
            .any(|&e| !(e >= 0.0 && e.is_finite()))
        {
            return bad("noise_grid values must be finite and nonnegative".into());
        }
        if self.trials_per_cell == 0 {
            return bad("trials_per_cell must be >= 1".into());
        }
        if !self.algorithms.cosamp && !self.algorithms.bpdn {
            return bad("at least one algorithm must be enabled".into());
        }
        if self.mc_samples == 0 {
            return bad("mc_samples must be >= 1".into());
        }
        Ok(())
    }

    /// Serializes back into the config format.
    pub fn to_text(&self) -> String {
        let list = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(", ");
        let mut algs = Vec::new();
        if self.algorithms.cosamp {
            algs.push("cosamp");
        }
        if self.algorithms.bpdn {
            algs.push("bpdn");
        }
        let mut out = String::new();
        let _ = writeln!(out, "kind = {}", self.kind.as_str());
        let _ = writeln!(out, "m = {}", self.m);
        let _ = writeln!(out, "d = {}", self.d);
        let _ = writeln!(out, "s = {}", self.s);
        let _ = writeln!(out, "tail_alpha = {}", self.tail_alpha);
        let _ = writeln!(out, "tail_beta = {}", self.tail_beta);
        let _ = writeln!(out, "eps_grid = {}", list(&self.eps_grid));
        let _ = writeln!(out, "noise_grid = {}", list(&self.noise_grid));
        let _ = writeln!(out, "trials_per_cell = {}", self.trials_per_cell);
        let _ = writeln!(out, "algorithms = {}", algs.join(", "));
        let _ = writeln!(out, "master_seed = {}", self.master_seed);
        let _ = writeln!(out, "budget = {}", self.budget);
        let _ = writeln!(out, "mc_samples = {}", self.mc_samples);
        let _ = writeln!(out, "cosamp_max_iters = {}", self.cosamp_max_iters);
        let _ = writeln!(out, "cosamp_residual_tol = {}", self.cosamp_residual_tol);
        let _ = writeln!(
            out,
            "cosamp_stagnation_tol = {}",
            self.cosamp_stagnation_tol
        );
        let _ = writeln!(out, "bpdn_max_iters = {}", self.bpdn_max_iters);
        let _ = writeln!(out, "bpdn_primal_tol = {}", self.bpdn_primal_tol);
        let _ = writeln!(out, "bpdn_dual_tol = {}", self.bpdn_dual_tol);
        out
    }
}
