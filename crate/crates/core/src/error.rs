use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to parse scenario: {0}")]
    Parse(String),

    #[error("invalid scenario: `{field}` {bound}")]
    Invariant { field: &'static str, bound: String },

    #[error("relaxation did not converge after {steps} steps (residual {residual:.3e}, dE/dt {energy_rate:.3e} nK/s)")]
    NoConvergence {
        steps: usize,
        residual: f64,
        energy_rate: f64,
    },

    #[error("relaxation left the requested sector: {0}")]
    SectorEscape(String),

    #[error("real-time propagation unstable: {0}")]
    Unstable(String),

    #[error("localized modes are not orthonormal: {0}")]
    ModesNotOrthonormal(String),

    #[error("projection undefined: overlap {0:.3e} below threshold")]
    ProjectionUndefined(f64),

    #[error("stationary states overlap too much ({0:.3e}); localized modes ill-defined")]
    StatesOverlap(f64),

    #[error("parameter integral has imaginary residue {imag:.3e} (magnitude {re:.3e}) for {name}")]
    ImaginaryResidue { name: &'static str, re: f64, imag: f64 },

    #[error("root bracket does not straddle zero: f({a}) = {fa:.4e}, f({b}) = {fb:.4e}")]
    Bracket { a: f64, b: f64, fa: f64, fb: f64 },

    #[error("series crosses its mean only {0} times; at least 3 needed")]
    TooFewCrossings(usize),

    #[error("{0}")]
    Domain(String),

    #[error("mode is not an energy minimum: {0}")]
    NotAMinimum(String),

    #[error("eigensolver did not converge: residual {0:.3e}")]
    Eigen(f64),

    #[error("level tracking ambiguous at f/f0 = {f:.6}: overlaps {a:.6} and {b:.6}")]
    AmbiguousTracking { f: f64, a: f64, b: f64 },

    #[error("at f/f0 = {f_over_f0:.5}: {source}")]
    AtFrequency {
        f_over_f0: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn at_frequency(self, f_over_f0: f64) -> Self {
        Error::AtFrequency {
            f_over_f0,
            source: Box::new(self),
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
