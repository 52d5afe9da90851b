use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("{name} = {value} is outside {allowed}")]
    Domain {
        name: &'static str,
        value: f64,
        allowed: &'static str,
    },

    /// Exhaustive enumeration was requested above the configured cap.
    #[error("{what}: n = {n} exceeds the enumeration cap {max}")]
    TooLarge {
        what: &'static str,
        n: usize,
        max: usize,
    },

    #[error("no sign change on [{lo}, {hi}] (f(lo) = {f_lo}, f(hi) = {f_hi})")]
    NoSignChange {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("no bracketing interval found while searching [{lo}, {hi}]")]
    BracketNotFound { lo: f64, hi: f64 },

    #[error("solver did not converge after {iterations} iterations (last x = {last_x})")]
    MaxIterations { iterations: usize, last_x: f64 },

    /// The optimal feedback law diverges (equal priors at t = 0).
    #[error("feedback amplitude is singular at t = {t}; configure a cap or a time floor")]
    Singular { t: f64 },

    #[error("ODE step size underflow at t = {t} (h = {h})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("thinning majorant {rate} at t = {t} exceeds the rate cap {cap}")]
    MajorantOverflow { t: f64, rate: f64, cap: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, allowed: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            allowed,
        }
    }
}
