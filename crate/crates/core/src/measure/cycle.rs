use serde::Serialize;

use crate::classify::{classify_point, Label, TangentSide, Visibility};
use crate::error::{Error, Result};
use crate::flow::{initial_state, is_seed, transition, walk_until, Decision, Direction, FlowOptions, Rect, Side, WalkEnd};
use crate::geometry::Vec2;
use crate::system::{PiecewiseSystem, SurfaceId};

/// A closed orbit must return to its witness within this distance.
pub const CLOSURE_TOL: f64 = 1e-6;
/// Fold-fold return maps within this of the identity count as a centre.
pub const CENTER_TOL: f64 = 1e-6;

/// Uniform-in-time probability measure on a closed orbit.
#[derive(Debug, Clone, Serialize)]
pub struct CycleMeasure {
    pub witness: Vec2,
    pub period: f64,
    pub closure_error: f64,
    /// Orbit samples `(t, point)` over one period.
    pub samples: Vec<(f64, Vec2)>,
    #[serde(skip)]
    opts: FlowOptions,
}

/// State reached from `p` after time `t` along the unique solution.
fn advance(sys: &PiecewiseSystem, p: Vec2, t: f64, opts: &FlowOptions) -> Result<Vec2> {
    let st = initial_state(sys, p)?;
    let r = walk_until(sys, st, 0.0, Direction::of(t), t.abs(), opts, &mut |_| false)?;
    match r.end {
        WalkEnd::TimeLimit => Ok(r.state.p),
        WalkEnd::DomainExit => Err(Error::OrbitEscapes("orbit left the domain".into())),
        WalkEnd::Branch { .. } | WalkEnd::Stopped(_) => Err(Error::DeterministicBranch { t: r.state.tau, point: r.state.p }),
    }
}

/// Dense samples of the orbit from `p` over `[0, t]`, failing at any seed contact.
fn orbit(sys: &PiecewiseSystem, p: Vec2, t: f64, opts: &FlowOptions) -> Result<(Vec<(f64, Vec2)>, Vec2)> {
    let st = initial_state(sys, p)?;
    let r = walk_until(sys, st, 0.0, Direction::Forward, t, opts, &mut |c| is_seed(&c.class))?;
    match r.end {
        WalkEnd::TimeLimit => {}
        WalkEnd::Stopped(c) => return Err(Error::OrbitMeetsNonUniqueness { t: c.t }),
        WalkEnd::Branch { .. } => return Err(Error::OrbitMeetsNonUniqueness { t: r.state.tau }),
        WalkEnd::DomainExit => return Err(Error::OrbitEscapes("orbit left the domain".into())),
    }
    let samples = r.arcs.iter().flat_map(|a| a.samples.iter().copied()).collect();
    Ok((samples, r.state.p))
}

/// Time spent in `b` by the orbit from `p` over `[0, t]`, with box crossings located by bisection.
fn time_in_box(sys: &PiecewiseSystem, p: Vec2, t: f64, b: &Rect, opts: &FlowOptions) -> Result<f64> {
    let d = sys.domain;
    let inside = |q: Vec2| b.contains(d.canonicalize(q));
    let (samples, _) = orbit(sys, p, t, opts)?;
    let mut total = 0.0;
    for w in samples.windows(2) {
        let ((t0, p0), (t1, p1)) = (w[0], w[1]);
        let dt = t1 - t0;
        if dt <= 0.0 {
            continue;
        }
        let (m0, m1) = (inside(p0), inside(p1));
        if m0 == m1 {
            if m0 {
                total += dt;
            }
            continue;
        }
        let (mut lo, mut hi) = (0.0, dt);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if inside(advance(sys, p0, mid, opts)?) == m0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let cross = 0.5 * (lo + hi);
        total += if m0 { cross } else { dt - cross };
    }
    Ok(total)
}

impl CycleMeasure {
    /// `nu(B)`: fraction of the period the orbit spends in `b`.
    pub fn measure_of(&self, sys: &PiecewiseSystem, b: &Rect) -> Result<f64> {
        Ok(time_in_box(sys, self.witness, self.period, b, &self.opts)? / self.period)
    }

    /// `nu(Z_{-t}(B))`: the same fraction along the orbit started from the image of the witness at time `t`.
    pub fn pushforward_of(&self, sys: &PiecewiseSystem, b: &Rect, t: f64) -> Result<f64> {
        let start = advance(sys, self.witness, t, &self.opts)?;
        Ok(time_in_box(sys, start, self.period, b, &self.opts)? / self.period)
    }
}

/// Invariant probability measure on the closed orbit through `witness` with period `period`.
pub fn cycle_measure(sys: &PiecewiseSystem, witness: Vec2, period: f64, opts: &FlowOptions) -> Result<CycleMeasure> {
    if !(period > 0.0) {
        return Err(Error::InvalidArgument("period must be positive".into()));
    }
    let mut opts = *opts;
    opts.record = true;
    let witness = sys.domain.canonicalize(witness);
    let (samples, end) = orbit(sys, witness, period, &opts)?;
    let closure_error = sys.domain.distance(end, witness);
    if closure_error > CLOSURE_TOL {
        return Err(Error::NotClosed(closure_error));
    }
    Ok(CycleMeasure { witness, period, closure_error, samples, opts })
}

#[derive(Debug, Clone, Serialize)]
pub struct ReturnMap {
    pub tangency: Vec2,
    pub surface: SurfaceId,
    pub offsets: Vec<f64>,
    pub returns: Vec<f64>,
    /// Time for each offset to come back.
    pub times: Vec<f64>,
    pub max_deviation: f64,
    pub center: bool,
}

/// First-return map around an invisible fold-fold point of level surface `j`.
pub fn return_map(sys: &PiecewiseSystem, j: usize, pt: Vec2, offsets: &[f64], opts: &FlowOptions) -> Result<ReturnMap> {
    let id = SurfaceId::Level(j);
    let class = classify_point(sys, id, pt)?;
    let fold = class.label == Label::Tangency
        && class.tangency.is_some_and(|t| t.side == TangentSide::Both && t.visibility == Visibility::Invisible);
    if !fold {
        return Err(Error::InvalidArgument("point is not an invisible two-fold".into()));
    }
    let sides = sys.sides(id, pt)?;
    if sys.side_field(&sides.plus)?.dot(sys.side_field(&sides.minus)?) >= 0.0 {
        return Err(Error::InvalidArgument("the two folds do not turn in opposite directions".into()));
    }
    if offsets.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::InvalidArgument("offsets must be positive".into()));
    }
    let s0 = sys.surface_param(id, pt);
    let start = |sigma: f64, s: f64| -> Result<Vec2> {
        sys.surface_point(id, s0 + sigma * s, Some(pt.x.max(pt.y)))?
            .ok_or_else(|| Error::OrbitEscapes(format!("no surface point at offset {s}")))
    };
    // Start on the side where the forward solution leaves into the plus region.
    let probe = offsets.iter().copied().fold(f64::INFINITY, f64::min);
    let sigma = if transition(sys, id, start(-1.0, probe)?, Direction::Forward)?.decision == Decision::Cross(Side::Plus) {
        -1.0
    } else {
        1.0
    };
    let mut opts = *opts;
    opts.record = false;
    let mut returns = Vec::new();
    let mut times = Vec::new();
    for &s in offsets {
        let p = start(sigma, s)?;
        let st = initial_state(sys, p)?;
        let mut seen = 0;
        let r = walk_until(sys, st, 0.0, Direction::Forward, 1e3, &opts, &mut |c| {
            seen += 1;
            seen == 3 && c.surface == id
        })?;
        let WalkEnd::Stopped(c) = r.end else {
            return Err(Error::OrbitEscapes(format!("orbit from offset {s} did not return to the surface")));
        };
        let back = sigma * (sys.surface_param(id, c.point) - s0);
        if !(back > 0.0) {
            return Err(Error::OrbitEscapes(format!("orbit from offset {s} returned on the other side")));
        }
        returns.push(back);
        times.push(c.t);
    }
    let max_deviation = offsets.iter().zip(&returns).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(ReturnMap {
        tangency: pt,
        surface: id,
        offsets: offsets.to_vec(),
        returns,
        times,
        max_deviation,
        center: max_deviation <= CENTER_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::get;
    use std::f64::consts::PI;

    #[test]
    fn fold_fold_center() {
        let ff = get("foldfold_center").unwrap();
        let m = return_map(&ff, 0, Vec2::ZERO, &[0.1, 0.2, 0.4], &FlowOptions::default()).unwrap();
        assert!(m.center, "{m:?}");
        assert!((m.times[2] - 1.6).abs() < 1e-6);
        let pert = get("foldfold_perturbed").unwrap();
        let m = return_map(&pert, 0, Vec2::ZERO, &[0.1, 0.2, 0.4], &FlowOptions::default()).unwrap();
        assert!(!m.center);
        assert!(m.max_deviation > 1e-3);
        assert!(return_map(&ff, 0, Vec2::ZERO, &[0.0], &FlowOptions::default()).is_err());
        assert!(return_map(&ff, 0, Vec2::new(0.5, 0.0), &[0.1], &FlowOptions::default()).is_err());
    }

    #[test]
    fn ex43_cycle_measure() {
        let s = get("ex43").unwrap();
        let opts = FlowOptions::default();
        let m = cycle_measure(&s, Vec2::new(0.0, 1.0), PI, &opts).unwrap();
        let whole = Rect::new(0.0, 0.5, PI, 1.5).unwrap();
        assert!((m.measure_of(&s, &whole).unwrap() - 1.0).abs() < 1e-9);
        let part = Rect::new(0.5, 0.9, 1.5, 1.1).unwrap();
        let nu = m.measure_of(&s, &part).unwrap();
        assert!((nu - 1.0 / PI).abs() < 1e-6, "{nu}");
        for t in [1.0, PI] {
            assert!((m.pushforward_of(&s, &part, t).unwrap() - nu).abs() < 1e-6);
        }
        assert!(matches!(cycle_measure(&s, Vec2::new(0.0, 1.0), 2.0, &opts), Err(Error::NotClosed(_))));
        assert!(matches!(
            cycle_measure(&s, Vec2::new(0.3, 0.5), PI, &opts),
            Err(Error::OrbitMeetsNonUniqueness { .. }) | Err(Error::NotClosed(_))
        ));
    }
}
