use thiserror::Error;

use crate::expr::ExprError;
use crate::geometry::Vec2;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),

    #[error("scenario error: {0}")]
    Scenario(String),

    #[error("point ({}, {}) lies on switching surface {surface}", .point.x, .point.y)]
    OnSurface { surface: usize, point: Vec2 },

    #[error("point ({}, {}) is not on the surface (|h| = {residual:e})", .point.x, .point.y)]
    OffSurface { point: Vec2, residual: f64 },

    #[error("no piece covers the sign signature `{0}`")]
    NoActivePiece(String),

    #[error("all Lie derivatives up to order {max_order} vanish at ({}, {})", .point.x, .point.y)]
    OrderOverflow { point: Vec2, max_order: usize },

    #[error("sliding field denominator |F-h - F+h| = {0:e} is degenerate")]
    DegenerateSliding(f64),

    #[error("sliding field requested outside the sliding/escaping region ({0})")]
    WrongRegion(&'static str),

    #[error("step size underflow at t = {t} near ({}, {})", .point.x, .point.y)]
    StepUnderflow { t: f64, point: Vec2 },

    #[error("deterministic policy reached a branch point at t = {t}, ({}, {})", .point.x, .point.y)]
    DeterministicBranch { t: f64, point: Vec2 },

    #[error("event limit exceeded ({0} events) - possible Zeno behaviour")]
    EventLimit(usize),

    #[error("unknown stepper `{0}`")]
    UnknownStepper(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("infeasible density: {0}")]
    Infeasible(String),

    #[error("orbit is not closed: return distance {0:e}")]
    NotClosed(f64),

    #[error("orbit meets the non-uniqueness set at t = {t}")]
    OrbitMeetsNonUniqueness { t: f64 },

    #[error("orbit escapes: {0}")]
    OrbitEscapes(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Expr(_) => "expr",
            Error::Scenario(_) => "scenario",
            Error::OnSurface { .. } => "on_surface",
            Error::OffSurface { .. } => "off_surface",
            Error::NoActivePiece(_) => "no_active_piece",
            Error::OrderOverflow { .. } => "order_overflow",
            Error::DegenerateSliding(_) => "degenerate_sliding",
            Error::WrongRegion(_) => "wrong_region",
            Error::StepUnderflow { .. } => "step_underflow",
            Error::DeterministicBranch { .. } => "deterministic_branch",
            Error::EventLimit(_) => "event_limit",
            Error::UnknownStepper(_) => "unknown_stepper",
            Error::UnknownScenario(_) => "unknown_scenario",
            Error::Infeasible(_) => "infeasible",
            Error::NotClosed(_) => "not_closed",
            Error::OrbitMeetsNonUniqueness { .. } => "orbit_meets_nonuniqueness",
            Error::OrbitEscapes(_) => "orbit_escapes",
            Error::InvalidArgument(_) => "invalid_argument",
        }
    }
}
