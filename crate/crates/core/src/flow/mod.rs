//! Event-driven Filippov solutions: free flight, crossing, sliding and
//! branching, plus box covers of the set-valued flow.
//!
//! Time direction is handled by flowing the directed system `s * Z` for
//! `s = +1` or `-1`; Lie derivatives of the directed fields pick up `s^k`.

mod cover;
mod transition;
mod tree;
mod walk;

use serde::Serialize;

use crate::error::Result;
use crate::geometry::Vec2;
use crate::stepper::{self, Stepper};
use crate::system::{PiecewiseSystem, SurfaceId};

pub use cover::{flow_set, BoxCover, Rect};
pub use transition::{is_seed, transition, BranchOption, Decision, Side, Transition};
pub use tree::{flow_point, BranchNode, BranchTree, NodeEnd, Policy};
pub use walk::{integrate_free, walk_until, Contact, WalkEnd, WalkReport};

/// Offset applied along the normal when leaving a surface.
pub const DEPARTURE_NUDGE: f64 = 1e-9;
/// Event brackets are refined until shorter than this (in time).
pub const EVENT_TIME_TOL: f64 = 1e-12;
/// Surface hits are projected until `|h|` is at most this.
pub const EVENT_H_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }

    pub fn of(t: f64) -> Self {
        if t < 0.0 {
            Direction::Backward
        } else {
            Direction::Forward
        }
    }
}

#[derive(Clone, Copy)]
pub struct FlowOptions {
    /// Local error tolerance per step.
    pub tol: f64,
    pub h_max: f64,
    pub h_min: f64,
    pub stepper: &'static dyn Stepper,
    /// Keep every accepted step in the arcs (otherwise only arc endpoints).
    pub record: bool,
    /// Surface events allowed along one path before giving up.
    pub max_events: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            h_max: 0.05,
            h_min: 1e-14,
            stepper: stepper::by_name(stepper::DEFAULT_STEPPER).expect("default stepper"),
            record: true,
            max_events: 20_000,
        }
    }
}

impl std::fmt::Debug for FlowOptions {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FlowOptions")
            .field("tol", &self.tol)
            .field("h_max", &self.h_max)
            .field("h_min", &self.h_min)
            .field("stepper", &self.stepper.name())
            .field("record", &self.record)
            .field("max_events", &self.max_events)
            .finish()
    }
}

impl FlowOptions {
    pub fn with_stepper(mut self, name: &str) -> Result<Self> {
        self.stepper = stepper::by_name(name)?;
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ArcMode {
    Free { piece: usize },
    Sliding { surface: SurfaceId },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EndEvent {
    SurfaceHit { surface: SurfaceId },
    SlidingExit { point: Vec2 },
    BranchPoint,
    TimeLimit,
    DomainExit,
    Stopped,
}

/// A time-ordered piece of a solution in one mode.
#[derive(Debug, Clone, Serialize)]
pub struct Arc {
    pub mode: ArcMode,
    /// `(t, point)` with `t` the actual (signed) time.
    pub samples: Vec<(f64, Vec2)>,
    pub end: EndEvent,
}

impl Arc {
    pub fn last(&self) -> Option<(f64, Vec2)> {
        self.samples.last().copied()
    }
}

/// Where a path currently is and how it moves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    Free { piece: usize },
    Sliding { surface: SurfaceId },
    /// On a surface, waiting for a transition decision.
    OnSurface { surface: SurfaceId },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub p: Vec2,
    /// Elapsed time, always nonnegative.
    pub tau: f64,
    pub mode: Mode,
}

/// Starting state for a point: free in its piece, or on the surface it lies on.
pub fn initial_state(sys: &PiecewiseSystem, p0: Vec2) -> Result<State> {
    let d = sys.domain;
    let p = d.canonicalize(p0);
    for (j, s) in sys.surfaces.iter().enumerate() {
        if s.value(p)?.abs() <= EVENT_H_TOL {
            return Ok(State { p, tau: 0.0, mode: Mode::OnSurface { surface: SurfaceId::Level(j) } });
        }
    }
    if d.is_periodic() {
        use crate::geometry::Seam;
        let on = |q: Vec2, seam: Seam| State { p: d.canonicalize(q), tau: 0.0, mode: Mode::OnSurface { surface: SurfaceId::Seam(seam) } };
        if (p.y - d.y0).abs() <= EVENT_H_TOL || (d.y1() - p.y).abs() <= EVENT_H_TOL {
            return Ok(on(Vec2::new(p.x, d.y0), Seam::Horizontal));
        }
        if (p.x - d.x0).abs() <= EVENT_H_TOL {
            return Ok(on(Vec2::new(d.x0, p.y), Seam::Vertical));
        }
        if (d.x1() - p.x).abs() <= EVENT_H_TOL {
            return Ok(on(Vec2::new(d.x1(), p.y), Seam::Vertical));
        }
    }
    Ok(State { p, tau: 0.0, mode: Mode::Free { piece: sys.active_piece(p)? } })
}
