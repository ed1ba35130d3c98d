use core::fmt;

/// Which excluded set a quantity ran into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularSet {
    /// `x y (x^2 - y^2) = 0`
    S1,
    /// `(x^2 + y^2) X0'(x) = (2 X0(x) + sqrt 5) x`
    S2,
}

impl fmt::Display for SingularSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SingularSet::S1 => f.write_str("S1"),
            SingularSet::S2 => f.write_str("S2"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{what} = {value} is outside the admissible domain")]
    Domain { what: &'static str, value: f64 },
    #[error("no convergence: {0}")]
    NonConvergence(&'static str),
    #[error("{quantity} is undefined on the excluded set {set}")]
    SingularInput {
        quantity: &'static str,
        set: SingularSet,
    },
    #[error("lattice path leaves the grid")]
    PathOutOfGrid,
    #[error("adaptive integration could not reach tolerance {tol:e}")]
    ToleranceNotMet { tol: f64 },
    #[error("step base lies on the degenerate set and the step points away from it")]
    DegenerateStep,
    #[error("insufficient resolution: {0}")]
    InsufficientResolution(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn domain(what: &'static str, value: f64) -> Error {
    Error::Domain { what, value }
}
