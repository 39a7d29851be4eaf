//! The non-uniqueness seed set (sliding and escaping arcs plus branching
//! tangencies) and a grid estimate of its saturation.

use rayon::prelude::*;
use serde::Serialize;

use crate::classify::{scan_surface, Label};
use crate::error::{Error, Result};
use crate::flow::{initial_state, is_seed, walk_until, Direction, FlowOptions, WalkEnd};
use crate::geometry::Vec2;
use crate::system::{PiecewiseSystem, SurfaceId};

/// Replayed witnesses must hit the seed set within this distance of the stored point.
pub const WITNESS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct SeedInterval {
    pub surface: SurfaceId,
    pub start: f64,
    pub end: f64,
    pub label: Label,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeedPoint {
    pub surface: SurfaceId,
    pub param: f64,
    pub point: Vec2,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SeedSet {
    pub intervals: Vec<SeedInterval>,
    pub points: Vec<SeedPoint>,
}

impl SeedSet {
    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty() && self.points.is_empty()
    }

    /// Total parameter length of the seed intervals.
    pub fn length(&self) -> f64 {
        self.intervals.iter().map(|i| i.end - i.start).sum()
    }
}

/// Seed set on every discontinuity surface, from scans with `samples` points.
pub fn seed_set(sys: &PiecewiseSystem, samples: usize) -> Result<SeedSet> {
    let mut out = SeedSet::default();
    for id in sys.all_discontinuities()? {
        let scan = scan_surface(sys, id, samples)?;
        for iv in &scan.intervals {
            if matches!(iv.label, Label::Sliding | Label::Escaping) {
                out.intervals.push(SeedInterval { surface: id, start: iv.start, end: iv.end, label: iv.label });
            }
        }
        for tp in &scan.tangencies {
            if is_seed(&tp.class) {
                out.points.push(SeedPoint { surface: id, param: tp.param, point: tp.point });
            }
        }
    }
    Ok(out)
}

/// Path from a cell centre to the seed set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub direction: Direction,
    /// Signed time of the contact.
    pub t: f64,
    pub surface: SurfaceId,
    pub point: Vec2,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "flag", rename_all = "snake_case")]
pub enum CellFlag {
    InSat { witness: Witness },
    /// No contact within the horizon, in either direction.
    NotInSat { horizon: f64 },
    Undecided { reason: String },
}

#[derive(Debug, Clone, Serialize)]
pub struct SaturationGrid {
    pub nx: usize,
    pub ny: usize,
    pub horizon: f64,
    pub cap: usize,
    /// Row-major from the bottom-left cell.
    pub cells: Vec<CellFlag>,
    pub fraction: f64,
    pub note: String,
}

impl SaturationGrid {
    pub fn center(&self, sys: &PiecewiseSystem, i: usize, j: usize) -> Vec2 {
        cell_center(sys, self.nx, self.ny, i, j)
    }

    pub fn flag(&self, i: usize, j: usize) -> &CellFlag {
        &self.cells[j * self.nx + i]
    }

    pub fn in_sat(&self, i: usize, j: usize) -> bool {
        matches!(self.flag(i, j), CellFlag::InSat { .. })
    }

    pub fn count_in_sat(&self) -> usize {
        self.cells.iter().filter(|c| matches!(c, CellFlag::InSat { .. })).count()
    }
}

fn cell_center(sys: &PiecewiseSystem, nx: usize, ny: usize, i: usize, j: usize) -> Vec2 {
    let d = sys.domain;
    Vec2::new(d.x0 + (i as f64 + 0.5) * d.p / nx as f64, d.y0 + (j as f64 + 0.5) * d.q / ny as f64)
}

/// First contact with the seed set along the single solution from `p` in
/// direction `dir`, up to elapsed time `horizon`.
pub fn first_seed_contact(
    sys: &PiecewiseSystem,
    p: Vec2,
    dir: Direction,
    horizon: f64,
    opts: &FlowOptions,
) -> Result<Option<Witness>> {
    let st = initial_state(sys, p)?;
    let report = walk_until(sys, st, 0.0, dir, horizon, opts, &mut |c| is_seed(&c.class))?;
    Ok(match report.end {
        WalkEnd::Stopped(c) => Some(Witness { direction: dir, t: c.t, surface: c.surface, point: c.point, label: c.class.label }),
        // Branch points are seeds, so the observer fires first; kept for completeness.
        WalkEnd::Branch { transition, .. } => Some(Witness {
            direction: dir,
            t: dir.sign() * report.state.tau,
            surface: transition.sides.surface,
            point: transition.sides.point,
            label: transition.class.label,
        }),
        WalkEnd::TimeLimit | WalkEnd::DomainExit => None,
    })
}

fn run_cell(sys: &PiecewiseSystem, p: Vec2, horizon: f64, opts: &FlowOptions) -> CellFlag {
    let mut exited = false;
    for dir in [Direction::Forward, Direction::Backward] {
        match first_seed_contact(sys, p, dir, horizon, opts) {
            Ok(Some(witness)) => return CellFlag::InSat { witness },
            Ok(None) => {}
            Err(e) => return CellFlag::Undecided { reason: e.to_string() },
        }
        if !sys.domain.is_periodic() {
            // A plane orbit that left the box says nothing about the rest of its life.
            let st = initial_state(sys, p);
            if let Ok(st) = st {
                if let Ok(r) = walk_until(sys, st, 0.0, dir, horizon, opts, &mut |_| false) {
                    exited |= matches!(r.end, WalkEnd::DomainExit);
                }
            }
        }
    }
    if exited {
        CellFlag::Undecided { reason: "orbit left the domain before the horizon".into() }
    } else {
        CellFlag::NotInSat { horizon }
    }
}

/// Grid estimate of the saturation of the seed set at horizon `horizon`.
pub fn estimate_saturation(
    sys: &PiecewiseSystem,
    nx: usize,
    ny: usize,
    horizon: f64,
    cap: usize,
    opts: &FlowOptions,
) -> Result<SaturationGrid> {
    if !(horizon > 0.0) {
        return Err(Error::InvalidArgument("horizon must be positive".into()));
    }
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidArgument("grid must have at least one cell".into()));
    }
    let mut opts = *opts;
    opts.record = false;
    let cells: Vec<CellFlag> = (0..nx * ny)
        .into_par_iter()
        .map(|k| run_cell(sys, cell_center(sys, nx, ny, k % nx, k / nx), horizon, &opts))
        .collect();
    let hits = cells.iter().filter(|c| matches!(c, CellFlag::InSat { .. })).count();
    Ok(SaturationGrid {
        nx,
        ny,
        horizon,
        cap,
        cells,
        fraction: hits as f64 / (nx * ny) as f64,
        note: format!("grid estimate at horizon T = {horizon}"),
    })
}

/// Re-run a stored witness path and check that it reaches the same seed point.
pub fn replay_witness(sys: &PiecewiseSystem, p: Vec2, w: &Witness, opts: &FlowOptions) -> Result<bool> {
    let horizon = w.t.abs() * (1.0 + 1e-9) + 1e-9;
    Ok(match first_seed_contact(sys, p, w.direction, horizon, opts)? {
        Some(again) => sys.domain.distance(again.point, w.point) <= WITNESS_TOL && (again.t - w.t).abs() <= WITNESS_TOL,
        None => false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::get;

    #[test]
    fn z1_seed_is_the_whole_line() {
        let z1 = get("z1").unwrap();
        let s = seed_set(&z1, 64).unwrap();
        assert_eq!(s.intervals.len(), 1);
        assert!((s.length() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn ex43_seed_set() {
        let s = get("ex43").unwrap();
        let seeds = seed_set(&s, 256).unwrap();
        let on_first: Vec<_> = seeds.intervals.iter().filter(|i| i.surface == SurfaceId::Level(0)).collect();
        assert!((on_first.iter().map(|i| i.end - i.start).sum::<f64>() - std::f64::consts::PI).abs() < 1e-9);
        assert!(on_first.iter().any(|i| i.label == Label::Sliding));
        assert!(on_first.iter().any(|i| i.label == Label::Escaping));
        assert!(seeds.intervals.iter().all(|i| i.surface == SurfaceId::Level(0)));
        let xs = (0.6f64).sqrt().asin();
        assert_eq!(seeds.points.len(), 1);
        assert!((seeds.points[0].point.x - xs).abs() < 1e-9);
    }

    #[test]
    fn fold_fold_has_no_seed() {
        let s = get("foldfold_center").unwrap();
        assert!(seed_set(&s, 64).unwrap().is_empty());
    }

    #[test]
    fn ex42_saturates_everything() {
        let s = get("ex42").unwrap();
        let g = estimate_saturation(&s, 16, 16, 2.0, 64, &FlowOptions::default()).unwrap();
        assert_eq!(g.fraction, 1.0);
        let opts = FlowOptions::default();
        for (k, c) in g.cells.iter().enumerate().step_by(7) {
            if let CellFlag::InSat { witness } = c {
                assert!(replay_witness(&s, g.center(&s, k % 16, k / 16), witness, &opts).unwrap());
            }
        }
    }
}
