//! Invariant-measure checks: normal-flux matching on switching surfaces,
//! divergence of the weighted pieces, striped densities, push-forward
//! quadrature, measures on limit cycles and the fold-fold return map.

mod cycle;
mod flux;
mod pushforward;
mod striped;

use serde::Serialize;

use crate::error::Result;
use crate::expr::Expr;
use crate::flow::{FlowOptions, Rect};
use crate::geometry::Vec2;
use crate::system::{PiecewiseSystem, SurfaceId};

pub use cycle::{cycle_measure, return_map, CycleMeasure, ReturnMap};
pub use flux::{check_divergence, check_flux, divergence_at, DivergenceReport, FluxReport, SurfaceFlux};
pub use pushforward::{pushforward_test, PushforwardError};
pub use striped::{solve_striped_density, StripedSolution, StripedVerdict};

/// Flux and divergence residuals (relative to the largest density) above this are violations.
pub const ANALYTIC_THRESHOLD: f64 = 1e-9;
/// Relative push-forward errors above this are violations.
pub const PUSHFORWARD_THRESHOLD: f64 = 0.02;

/// Which density to attach to each piece.
#[derive(Debug, Clone, Default)]
pub enum Densities {
    /// The `density` given in the scenario, 1 where absent.
    #[default]
    Scenario,
    /// Lebesgue measure on every piece.
    Unit,
    PerPiece(Vec<Expr>),
}

impl Densities {
    pub fn expr(&self, sys: &PiecewiseSystem, piece: usize) -> Expr {
        match self {
            Densities::Scenario => sys.pieces[piece].density.clone().unwrap_or(Expr::num(1.0)),
            Densities::Unit => Expr::num(1.0),
            Densities::PerPiece(v) => v[piece].clone(),
        }
    }

    pub fn at(&self, sys: &PiecewiseSystem, piece: usize, p: Vec2) -> Result<f64> {
        Ok(match self {
            Densities::Scenario => sys.pieces[piece].density_at(p)?,
            Densities::Unit => 1.0,
            Densities::PerPiece(v) => v[piece].eval_at(p)?,
        })
    }

    /// Density at a point of the domain, using the piece on the side of the sign of each `h`.
    pub fn value(&self, sys: &PiecewiseSystem, p: Vec2) -> Result<f64> {
        self.at(sys, sys.piece_near(p)?, p)
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Flux { surface: SurfaceId, point: Vec2, residual: f64 },
    Divergence { piece: usize, point: Vec2, value: f64 },
    Pushforward { set: usize, time: f64, error: f64 },
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    ConsistentWithInvariance,
    ViolationDetected { witness: Witness },
}

#[derive(Debug, Clone, Serialize)]
pub struct MeasureReport {
    pub flux: FluxReport,
    pub divergence: Vec<DivergenceReport>,
    pub pushforward: Vec<PushforwardError>,
    pub verdict: Verdict,
}

impl MeasureReport {
    pub fn flux_residual(&self) -> f64 {
        self.flux.max_residual
    }
}

/// Run every check and combine the verdicts; the first violation found is the witness.
pub fn measure_report(
    sys: &PiecewiseSystem,
    densities: &Densities,
    samples: usize,
    sets: &[Rect],
    times: &[f64],
    res: usize,
    opts: &FlowOptions,
) -> Result<MeasureReport> {
    let flux = check_flux(sys, densities, samples)?;
    let divergence = (0..sys.pieces.len())
        .map(|k| check_divergence(sys, k, densities, samples))
        .collect::<Result<Vec<_>>>()?;
    let pushforward = if sets.is_empty() { Vec::new() } else { pushforward_test(sys, densities, sets, times, res, opts)? };
    let mut witness = flux.violation();
    if witness.is_none() {
        witness = divergence.iter().find_map(DivergenceReport::violation);
    }
    if witness.is_none() {
        witness = pushforward.iter().find_map(PushforwardError::violation);
    }
    let verdict = match witness {
        Some(witness) => Verdict::ViolationDetected { witness },
        None => Verdict::ConsistentWithInvariance,
    };
    Ok(MeasureReport { flux, divergence, pushforward, verdict })
}
