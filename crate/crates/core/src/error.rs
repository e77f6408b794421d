use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value at position {0}")]
    NonFinite(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "combinatorial budget exceeded: C({d}, {s}) = {subsets} subsets > budget {budget}; \
         use the Monte-Carlo estimate or lower d or s"
    )]
    Budget {
        d: usize,
        s: usize,
        subsets: u128,
        budget: u64,
    },

    #[error(
        "infeasible tail targets alpha = {alpha}, beta = {beta}: need alpha/sqrt(s) = {lower} <= beta <= {upper} = \
         alpha*sqrt(d-s)/sqrt(s) (l1 >= l2 on the tail, and the Cauchy-Schwarz bound)"
    )]
    InfeasibleTail {
        alpha: f64,
        beta: f64,
        lower: f64,
        upper: f64,
    },

    #[error("degenerate signal: the best s-term approximation is zero")]
    DegenerateSignal,

    #[error("restricted isometry constant {delta} >= 1: kappa and gamma are undefined")]
    IllConditioned { delta: f64 },

    #[error("condition violated: {0}")]
    ConditionViolation(String),

    #[error("numerical failure at iteration {iteration}: {source}")]
    Numerical {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("trial {trial_id} (eps_target = {eps_target}, noise_level = {noise_level}): {source}")]
    Trial {
        trial_id: u64,
        eps_target: f64,
        noise_level: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
