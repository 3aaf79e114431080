use crate::geometry::Vec2;

/// Errors raised by the toolkit. Each variant has a stable machine code used in CLI error JSON.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("piece set failed canonicalization at cell of piece {piece} (witness {witness:?}): {reason}")]
    Canonicalization { piece: usize, witness: Vec2, reason: String },

    #[error("point {x:?} lies outside the domain; subdifferential is empty")]
    OutsideDomain { x: Vec2 },

    #[error("unbounded subdifferential at {p:?}: function is not the conjugate of a compact-domain body")]
    UnboundedSubdifferential { p: Vec2 },

    #[error("negative mass {mass} at {p:?}")]
    NegativeMass { p: Vec2, mass: f64 },

    #[error("asymmetric Hessian at {p:?}: |h12 - h21| = {gap}")]
    AsymmetricHessian { p: Vec2, gap: f64 },

    #[error("merge curve orientation check failed at parameter {t}: reverse the curve")]
    Orientation { t: f64 },

    #[error("inflated atoms overlap at {p:?} and {q:?}: shrink epsilon")]
    Overlap { p: Vec2, q: Vec2 },

    #[error("bisection does not bracket target {target}: g({lo}) = {g_lo}, g({hi}) = {g_hi}")]
    Bracket { lo: f64, hi: f64, g_lo: f64, g_hi: f64, target: f64 },

    #[error("singularity: curve touches the light cone at p1 = {p1} (v = {v})")]
    Singularity { p1: f64, v: f64 },

    #[error("slope bound exceeded at p1 = {p1}: |v'| = {slope}")]
    SlopeBound { p1: f64, slope: f64 },

    #[error("ill-posed problem: {0}")]
    IllPosed(String),

    #[error("domain mismatch in sequence member {index}")]
    DomainMismatch { index: usize },

    #[error("function is not in the required class: {0}")]
    NotInClass(String),

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::Invalid(_) => "invalid_input",
            Error::Canonicalization { .. } => "canonicalization_failure",
            Error::OutsideDomain { .. } => "outside_domain",
            Error::UnboundedSubdifferential { .. } => "unbounded_subdifferential",
            Error::NegativeMass { .. } => "negative_mass",
            Error::AsymmetricHessian { .. } => "asymmetric_hessian",
            Error::Orientation { .. } => "orientation",
            Error::Overlap { .. } => "overlap",
            Error::Bracket { .. } => "bracket",
            Error::Singularity { .. } => "singularity",
            Error::SlopeBound { .. } => "slope_bound",
            Error::IllPosed(_) => "ill_posed",
            Error::DomainMismatch { .. } => "domain_mismatch",
            Error::NotInClass(_) => "not_in_class",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
