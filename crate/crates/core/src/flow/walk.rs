//! Single-path integration: free flight with event location, sliding arcs,
//! and the loop that strings them together until a branch point.

use serde::Serialize;

use super::transition::{transition, BranchOption, Decision, Side, Transition};
use super::{Arc, ArcMode, Direction, EndEvent, FlowOptions, Mode, State, DEPARTURE_NUDGE, EVENT_H_TOL, EVENT_TIME_TOL};
use crate::classify::{label_of, sliding_vector, Label, SigmaClass};
use crate::error::{Error, Result};
use crate::geometry::{DomainMode, Seam, Vec2};
use crate::stepper::next_step;
use crate::system::{PiecewiseSystem, Sides, SurfaceId};

/// A visit to a switching surface.
#[derive(Debug, Clone, Serialize)]
pub struct Contact {
    pub tau: f64,
    pub t: f64,
    pub surface: SurfaceId,
    pub point: Vec2,
    pub class: SigmaClass,
}

#[derive(Debug, Clone)]
pub enum WalkEnd {
    TimeLimit,
    DomainExit,
    Branch { options: Vec<BranchOption>, transition: Transition },
    Stopped(Contact),
}

#[derive(Debug, Clone)]
pub struct WalkReport {
    pub arcs: Vec<Arc>,
    pub end: WalkEnd,
    /// State at the end (for branches: on the surface at the branch point).
    pub state: State,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Edge {
    Left,
    Right,
    Bottom,
    Top,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Ev {
    Level(usize),
    Edge(Edge),
}

enum Outcome {
    TimeLimit,
    DomainExit,
    Hit(SurfaceId, Vec2),
}

struct Ctx<'a> {
    sys: &'a PiecewiseSystem,
    opts: &'a FlowOptions,
    s: f64,
    t0: f64,
}

impl Ctx<'_> {
    fn time(&self, tau: f64) -> f64 {
        self.t0 + self.s * tau
    }

    fn edge_event(&self, q: Vec2) -> Option<Edge> {
        let d = self.sys.domain;
        let periodic = d.is_periodic();
        if q.x < d.x0 {
            Some(Edge::Left)
        } else if q.x > d.x1() || (periodic && q.x >= d.x1()) {
            Some(Edge::Right)
        } else if q.y < d.y0 {
            Some(Edge::Bottom)
        } else if q.y > d.y1() || (periodic && q.y >= d.y1()) {
            Some(Edge::Top)
        } else {
            None
        }
    }

    fn project_level(&self, j: usize, mut q: Vec2, iters: usize) -> Result<Vec2> {
        let surf = &self.sys.surfaces[j];
        for _ in 0..iters {
            let v = surf.value(q)?;
            if v.abs() <= EVENT_H_TOL * 1e-2 {
                break;
            }
            let g = surf.gradient(q)?;
            let g2 = g.dot(g);
            if g2 == 0.0 {
                break;
            }
            q = q - (v / g2) * g;
        }
        Ok(q)
    }

    /// Point on the seam where a path leaves through `edge`, in canonical coordinates.
    fn seam_point(&self, edge: Edge, q: Vec2) -> (SurfaceId, Vec2) {
        let d = self.sys.domain;
        let (seam, raw) = match edge {
            Edge::Left => (Seam::Vertical, Vec2::new(d.x0, q.y)),
            Edge::Right => (Seam::Vertical, Vec2::new(d.x1(), q.y)),
            Edge::Bottom => (Seam::Horizontal, Vec2::new(q.x, d.y0)),
            Edge::Top => (Seam::Horizontal, Vec2::new(q.x, d.y1())),
        };
        let c = d.canonicalize(raw);
        let c = match seam {
            Seam::Vertical => Vec2::new(d.x0, c.y),
            Seam::Horizontal => Vec2::new(c.x, d.y0),
        };
        (SurfaceId::Seam(seam), c)
    }

    fn push(&self, arc: &mut Vec<(f64, Vec2)>, tau: f64, p: Vec2, last: bool) {
        if self.opts.record || last || arc.is_empty() {
            arc.push((self.time(tau), p));
        } else if arc.len() >= 2 {
            *arc.last_mut().unwrap() = (self.time(tau), p);
        } else {
            arc.push((self.time(tau), p));
        }
    }
}

fn free_flight(ctx: &Ctx, piece: usize, p0: Vec2, tau0: f64, tau_end: f64) -> Result<(Arc, Outcome, f64)> {
    let sys = ctx.sys;
    let opts = ctx.opts;
    let s = ctx.s;
    let signs: Vec<f64> = sys
        .surfaces
        .iter()
        .map(|h| Ok(if h.value(p0)? >= 0.0 { 1.0 } else { -1.0 }))
        .collect::<Result<_>>()?;
    let field = |q: Vec2| -> Result<Vec2> { Ok(s * sys.pieces[piece].field(q)?) };
    let check = |q: Vec2| -> Result<Option<Ev>> {
        for (j, surf) in sys.surfaces.iter().enumerate() {
            if surf.value(q)? * signs[j] <= 0.0 {
                return Ok(Some(Ev::Level(j)));
            }
        }
        Ok(ctx.edge_event(q).map(Ev::Edge))
    };
    let mut samples = Vec::new();
    let mut p = p0;
    let mut tau = tau0;
    ctx.push(&mut samples, tau, p, false);
    let mut h = opts.h_max.min(1e-3);
    let order = opts.stepper.order();
    let arc = |samples: Vec<(f64, Vec2)>, end: EndEvent| Arc { mode: ArcMode::Free { piece }, samples, end };
    loop {
        let remaining = tau_end - tau;
        if remaining <= 0.0 {
            return Ok((arc(samples, EndEvent::TimeLimit), Outcome::TimeLimit, tau));
        }
        let v = field(p)?;
        if v.norm() == 0.0 {
            ctx.push(&mut samples, tau_end, p, true);
            return Ok((arc(samples, EndEvent::TimeLimit), Outcome::TimeLimit, tau_end));
        }
        let last = h >= remaining;
        let step = if last { remaining } else { h };
        let (q, err) = opts.stepper.step(&field, p, step)?;
        if !(err <= opts.tol) {
            h = next_step(step, if err.is_finite() { err } else { f64::MAX }, opts.tol, order);
            if h < opts.h_min {
                return Err(Error::StepUnderflow { t: ctx.time(tau), point: p });
            }
            continue;
        }
        if check(q)?.is_some() {
            let (mut lo, mut hi) = (0.0, step);
            let mut q_lo = p;
            let mut q_hi = q;
            while hi - lo > EVENT_TIME_TOL {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let qm = opts.stepper.step(&field, p, mid)?.0;
                if check(qm)?.is_some() {
                    hi = mid;
                    q_hi = qm;
                } else {
                    lo = mid;
                    q_lo = qm;
                }
            }
            let ev = check(q_hi)?.expect("bracketed event");
            let tau_ev = tau + hi;
            return match ev {
                Ev::Level(j) => {
                    let pt = ctx.project_level(j, q_lo, 8)?;
                    ctx.push(&mut samples, tau_ev, pt, true);
                    let id = SurfaceId::Level(j);
                    Ok((arc(samples, EndEvent::SurfaceHit { surface: id }), Outcome::Hit(id, pt), tau_ev))
                }
                Ev::Edge(edge) => {
                    if sys.domain.mode == DomainMode::Plane {
                        let d = sys.domain;
                        let pt = Vec2::new(q_lo.x.clamp(d.x0, d.x1()), q_lo.y.clamp(d.y0, d.y1()));
                        ctx.push(&mut samples, tau_ev, pt, true);
                        Ok((arc(samples, EndEvent::DomainExit), Outcome::DomainExit, tau_ev))
                    } else {
                        let d = sys.domain;
                        let edge_pt = match edge {
                            Edge::Left => Vec2::new(d.x0, q_lo.y),
                            Edge::Right => Vec2::new(d.x1(), q_lo.y),
                            Edge::Bottom => Vec2::new(q_lo.x, d.y0),
                            Edge::Top => Vec2::new(q_lo.x, d.y1()),
                        };
                        ctx.push(&mut samples, tau_ev, edge_pt, true);
                        let (id, pt) = ctx.seam_point(edge, q_lo);
                        Ok((arc(samples, EndEvent::SurfaceHit { surface: id }), Outcome::Hit(id, pt), tau_ev))
                    }
                }
            };
        }
        p = q;
        tau = if last { tau_end } else { tau + step };
        ctx.push(&mut samples, tau, p, last);
        h = next_step(step, err, opts.tol, order).min(opts.h_max);
    }
}

/// Directed normal components and the sliding velocity at `q`.
fn sliding_state(ctx: &Ctx, id: SurfaceId, q: Vec2) -> Result<(Label, Vec2)> {
    let sides = ctx.sys.sides(id, q)?;
    let (a, b, fp, fm) = normals(ctx.sys, &sides)?;
    let label = label_of(ctx.s * a, ctx.s * b);
    let v = match sliding_vector(fp, fm, a, b) {
        Some(v) => v,
        None => {
            let mid = 0.5 * (fp + fm);
            let n = sides.normal;
            if mid.dot(n).abs() <= EVENT_H_TOL * (1.0 + mid.norm()) * n.norm().max(1.0) {
                mid
            } else {
                Vec2::ZERO
            }
        }
    };
    Ok((label, ctx.s * v))
}

fn normals(sys: &PiecewiseSystem, sides: &Sides) -> Result<(f64, f64, Vec2, Vec2)> {
    let fp = sys.side_field(&sides.plus)?;
    let fm = sys.side_field(&sides.minus)?;
    Ok((sides.normal.dot(fp), sides.normal.dot(fm), fp, fm))
}

/// Put a sliding point back on its surface and into the fundamental domain.
/// Returns `None` when the point has left the plane rectangle.
fn settle(ctx: &Ctx, id: SurfaceId, q: Vec2) -> Result<Option<(SurfaceId, Vec2)>> {
    let d = ctx.sys.domain;
    match id {
        SurfaceId::Level(j) => {
            let q = ctx.project_level(j, q, 2)?;
            if d.mode == DomainMode::Plane {
                return Ok(if ctx.edge_event(q).is_some() { None } else { Some((id, q)) });
            }
            let (c, flip) = d.canonicalize_with_flip(q);
            if !flip {
                return Ok(Some((id, c)));
            }
            let mut best = None;
            for (k, surf) in ctx.sys.surfaces.iter().enumerate() {
                let v = surf.value(c)?.abs();
                if v <= 1e-8 && best.map_or(true, |(_, b)| v < b) {
                    best = Some((k, v));
                }
            }
            match best {
                Some((k, _)) => Ok(Some((SurfaceId::Level(k), ctx.project_level(k, c, 2)?))),
                None => Err(Error::OrbitEscapes("sliding arc left its surface across the Klein seam".into())),
            }
        }
        SurfaceId::Seam(Seam::Horizontal) => {
            let c = d.canonicalize(Vec2::new(q.x, d.y0));
            Ok(Some((id, Vec2::new(c.x, d.y0))))
        }
        SurfaceId::Seam(Seam::Vertical) => {
            let y = (q.y - d.y0).rem_euclid(d.q) + d.y0;
            let y = if y >= d.y1() { d.y0 } else { y };
            Ok(Some((id, Vec2::new(d.x0, y))))
        }
    }
}

fn slide(ctx: &Ctx, id0: SurfaceId, p0: Vec2, tau0: f64, tau_end: f64) -> Result<(Arc, Outcome, f64)> {
    let opts = ctx.opts;
    let mut id = id0;
    let mut p = p0;
    let mut tau = tau0;
    let mut samples = Vec::new();
    ctx.push(&mut samples, tau, p, false);
    let (start_label, _) = sliding_state(ctx, id, p)?;
    let mut current = matches!(start_label, Label::Sliding | Label::Escaping).then_some(start_label);
    let mut h: f64 = if current.is_some() { opts.h_max.min(1e-3) } else { 1e-6 };
    let order = opts.stepper.order();
    let mk = |samples: Vec<(f64, Vec2)>, end: EndEvent, surface: SurfaceId| Arc {
        mode: ArcMode::Sliding { surface },
        samples,
        end,
    };
    loop {
        let remaining = tau_end - tau;
        if remaining <= 0.0 {
            return Ok((mk(samples, EndEvent::TimeLimit, id), Outcome::TimeLimit, tau));
        }
        let (_, v) = sliding_state(ctx, id, p)?;
        if v.norm() == 0.0 {
            ctx.push(&mut samples, tau_end, p, true);
            return Ok((mk(samples, EndEvent::TimeLimit, id), Outcome::TimeLimit, tau_end));
        }
        let cur_id = id;
        let vel = |q: Vec2| -> Result<Vec2> { Ok(sliding_state(ctx, cur_id, q)?.1) };
        let last = h >= remaining;
        let step = if last { remaining } else { h };
        let (q, err) = opts.stepper.step(&vel, p, step)?;
        if !(err <= opts.tol) {
            h = next_step(step, if err.is_finite() { err } else { f64::MAX }, opts.tol, order);
            if h < opts.h_min {
                return Err(Error::StepUnderflow { t: ctx.time(tau), point: p });
            }
            continue;
        }
        let advance = |theta: f64| -> Result<Option<(SurfaceId, Vec2, Label)>> {
            let q = if theta == step { q } else { opts.stepper.step(&vel, p, theta)?.0 };
            match settle(ctx, cur_id, q)? {
                None => Ok(None),
                Some((nid, nq)) => {
                    let (label, _) = sliding_state(ctx, nid, nq)?;
                    Ok(Some((nid, nq, label)))
                }
            }
        };
        let ok = |r: &Option<(SurfaceId, Vec2, Label)>| match (r, current) {
            (Some((_, _, l)), Some(c)) => *l == c,
            _ => false,
        };
        let next = advance(step)?;
        if current.is_none() {
            // Leaving a tangency: adopt the label reached, or hand back to the transition logic.
            match next {
                Some((nid, nq, l)) if matches!(l, Label::Sliding | Label::Escaping) => {
                    current = Some(l);
                    id = nid;
                    p = nq;
                    tau += step;
                    ctx.push(&mut samples, tau, p, false);
                    h = opts.h_max.min(1e-3);
                    continue;
                }
                Some((nid, nq, _)) => {
                    let tau_ev = tau + step;
                    ctx.push(&mut samples, tau_ev, nq, true);
                    return Ok((mk(samples, EndEvent::SlidingExit { point: nq }, nid), Outcome::Hit(nid, nq), tau_ev));
                }
                None => {
                    ctx.push(&mut samples, tau + step, p, true);
                    return Ok((mk(samples, EndEvent::DomainExit, id), Outcome::DomainExit, tau + step));
                }
            }
        }
        if ok(&next) {
            let (nid, nq, _) = next.unwrap();
            id = nid;
            p = nq;
            tau = if last { tau_end } else { tau + step };
            ctx.push(&mut samples, tau, p, last);
            h = next_step(step, err, opts.tol, order).min(opts.h_max);
            continue;
        }
        // Label changed or the arc left the domain inside this step: bracket it.
        let (mut lo, mut hi) = (0.0, step);
        let mut best_hi = next;
        let mut best_lo: Option<(SurfaceId, Vec2, Label)> = None;
        while hi - lo > EVENT_TIME_TOL {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let r = advance(mid)?;
            if ok(&r) {
                lo = mid;
                best_lo = r;
            } else {
                hi = mid;
                best_hi = r;
            }
        }
        let tau_ev = tau + hi;
        return match best_hi {
            Some((nid, nq, _)) => {
                ctx.push(&mut samples, tau_ev, nq, true);
                Ok((mk(samples, EndEvent::SlidingExit { point: nq }, nid), Outcome::Hit(nid, nq), tau_ev))
            }
            None => {
                let pt = best_lo.map_or(p, |r| r.1);
                ctx.push(&mut samples, tau_ev, pt, true);
                Ok((mk(samples, EndEvent::DomainExit, id), Outcome::DomainExit, tau_ev))
            }
        };
    }
}

/// State just off the surface on the chosen side.
pub(crate) fn depart(sys: &PiecewiseSystem, sides: &Sides, side: Side, tau: f64) -> State {
    let n = sides.normal;
    let unit = (1.0 / n.norm()) * n;
    let (one, sign) = match side {
        Side::Plus => (sides.plus, 1.0),
        Side::Minus => (sides.minus, -1.0),
    };
    let p = sys.domain.canonicalize(one.at + (sign * DEPARTURE_NUDGE) * unit);
    State { p, tau, mode: Mode::Free { piece: one.piece } }
}

/// State after taking one branch option at a branch point.
pub(crate) fn apply_option(sys: &PiecewiseSystem, tr: &Transition, opt: BranchOption, tau: f64) -> State {
    match opt {
        BranchOption::Slide => State { p: tr.sides.point, tau, mode: Mode::Sliding { surface: tr.sides.surface } },
        BranchOption::Depart(side) => depart(sys, &tr.sides, side, tau),
    }
}

/// Follow one solution from `state` until `tau_end`, a branch point, the
/// domain boundary, or until `stop` accepts a surface contact.
pub fn walk_until(
    sys: &PiecewiseSystem,
    mut state: State,
    t0: f64,
    dir: Direction,
    tau_end: f64,
    opts: &FlowOptions,
    stop: &mut dyn FnMut(&Contact) -> bool,
) -> Result<WalkReport> {
    let ctx = Ctx { sys, opts, s: dir.sign(), t0 };
    let mut arcs = Vec::new();
    let mut events = 0usize;
    loop {
        match state.mode {
            Mode::OnSurface { surface } => {
                events += 1;
                if events > opts.max_events {
                    return Err(Error::EventLimit(opts.max_events));
                }
                let tr = transition(sys, surface, state.p, dir)?;
                let contact = Contact {
                    tau: state.tau,
                    t: ctx.time(state.tau),
                    surface,
                    point: state.p,
                    class: tr.class,
                };
                if stop(&contact) {
                    return Ok(WalkReport { arcs, end: WalkEnd::Stopped(contact), state });
                }
                match tr.decision.clone() {
                    Decision::Cross(side) => state = depart(sys, &tr.sides, side, state.tau),
                    Decision::Slide => {
                        state = State { p: tr.sides.point, tau: state.tau, mode: Mode::Sliding { surface } };
                    }
                    Decision::Branch(options) => {
                        return Ok(WalkReport { arcs, end: WalkEnd::Branch { options, transition: tr }, state });
                    }
                }
            }
            Mode::Free { piece } => {
                let (arc, out, tau) = free_flight(&ctx, piece, state.p, state.tau, tau_end)?;
                let end_p = arc.last().map_or(state.p, |s| s.1);
                arcs.push(arc);
                match out {
                    Outcome::TimeLimit => {
                        state = State { p: end_p, tau, mode: state.mode };
                        return Ok(WalkReport { arcs, end: WalkEnd::TimeLimit, state });
                    }
                    Outcome::DomainExit => {
                        state = State { p: end_p, tau, mode: state.mode };
                        return Ok(WalkReport { arcs, end: WalkEnd::DomainExit, state });
                    }
                    Outcome::Hit(id, pt) => state = State { p: pt, tau, mode: Mode::OnSurface { surface: id } },
                }
            }
            Mode::Sliding { surface } => {
                let (arc, out, tau) = slide(&ctx, surface, state.p, state.tau, tau_end)?;
                let end_p = arc.last().map_or(state.p, |s| s.1);
                let end_surface = match arc.mode {
                    ArcMode::Sliding { surface } => surface,
                    ArcMode::Free { .. } => surface,
                };
                arcs.push(arc);
                match out {
                    Outcome::TimeLimit => {
                        state = State { p: end_p, tau, mode: Mode::Sliding { surface: end_surface } };
                        return Ok(WalkReport { arcs, end: WalkEnd::TimeLimit, state });
                    }
                    Outcome::DomainExit => {
                        state = State { p: end_p, tau, mode: Mode::Sliding { surface: end_surface } };
                        return Ok(WalkReport { arcs, end: WalkEnd::DomainExit, state });
                    }
                    Outcome::Hit(id, pt) => state = State { p: pt, tau, mode: Mode::OnSurface { surface: id } },
                }
            }
        }
    }
}

/// Integrate one smooth piece from a point strictly inside its region.
pub fn integrate_free(sys: &PiecewiseSystem, piece: usize, p0: Vec2, tmax: f64, opts: &FlowOptions) -> Result<Arc> {
    if sys.active_piece(p0)? != piece {
        return Err(Error::InvalidArgument(format!("start point is not in the region of piece {piece}")));
    }
    let ctx = Ctx { sys, opts, s: if tmax < 0.0 { -1.0 } else { 1.0 }, t0: 0.0 };
    let (arc, _, _) = free_flight(&ctx, piece, sys.domain.canonicalize(p0), 0.0, tmax.abs())?;
    Ok(arc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::initial_state;
    use crate::scenarios::get;

    fn never(_: &Contact) -> bool {
        false
    }

    #[test]
    fn z1_free_fall_hits_surface() {
        let z1 = get("z1").unwrap();
        let up = z1.active_piece(Vec2::new(0.0, 0.5)).unwrap();
        let arc = integrate_free(&z1, up, Vec2::new(0.0, 0.5), 2.0, &FlowOptions::default()).unwrap();
        let (t, p) = arc.last().unwrap();
        assert_eq!(arc.end, EndEvent::SurfaceHit { surface: SurfaceId::Level(0) });
        assert!((t - 0.5).abs() < 1e-9);
        assert!((p - Vec2::new(0.5, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn fold_fold_parabola() {
        let ff = get("foldfold_center").unwrap();
        let a = 0.4;
        let start = Vec2::new(-a, 1e-9);
        let up = ff.active_piece(start).unwrap();
        let arc = integrate_free(&ff, up, start, 5.0, &FlowOptions::default()).unwrap();
        let (t, p) = arc.last().unwrap();
        assert!((t - 2.0 * a).abs() < 1e-8, "t = {t}");
        assert!((p - Vec2::new(a, 0.0)).norm() < 1e-8);
        for &(_, q) in &arc.samples {
            assert!((q.y - (a * a - q.x * q.x) / 2.0).abs() < 1e-8);
        }
    }

    #[test]
    fn constant_field_time_limit() {
        let sys = PiecewiseSystem::load_scenario(
            r#"
            domain { mode = plane, x0 = -1, y0 = -1, p = 2, q = 2 }
            surface { h = "y - 0.5" }
            piece { signature = "-", fx = "0", fy = "1" }
            piece { signature = "+", fx = "0", fy = "1" }
        "#,
        )
        .unwrap();
        let arc = integrate_free(&sys, 0, Vec2::new(0.0, 0.1), 0.2, &FlowOptions::default()).unwrap();
        assert_eq!(arc.end, EndEvent::TimeLimit);
        let (t, p) = arc.last().unwrap();
        assert_eq!(t, 0.2);
        assert!((p - Vec2::new(0.0, 0.3)).norm() < 1e-14);
    }

    #[test]
    fn z1_walk_slides_to_the_end() {
        let z1 = get("z1").unwrap();
        let st = initial_state(&z1, Vec2::new(0.0, 0.5)).unwrap();
        let r = walk_until(&z1, st, 0.0, Direction::Forward, 2.0, &FlowOptions::default(), &mut never).unwrap();
        assert!(matches!(r.end, WalkEnd::TimeLimit));
        assert!((r.state.p - Vec2::new(2.0, 0.0)).norm() < 1e-9, "{:?}", r.state.p);
        assert_eq!(r.arcs.len(), 2);
        for &(_, q) in &r.arcs[1].samples {
            assert!(q.y.abs() <= 1e-8);
        }
    }

    #[test]
    fn ex42_settles_on_the_sliding_line() {
        let s = get("ex42").unwrap();
        let st = initial_state(&s, Vec2::new(0.5, 0.25)).unwrap();
        let r = walk_until(&s, st, 0.0, Direction::Forward, 1.0, &FlowOptions::default(), &mut never).unwrap();
        assert!((r.state.p - Vec2::new(0.5, 0.0)).norm() < 1e-9);
        let hit = r.arcs[0].last().unwrap();
        assert!((hit.0 - 0.25).abs() < 1e-9);
    }

    #[test]
    fn torus_wraps_through_the_seam() {
        let s = get("ex43").unwrap();
        // On the cycle y = 1 the motion is x' = 1, y' = 0.
        let st = initial_state(&s, Vec2::new(3.0, 1.0)).unwrap();
        let r = walk_until(&s, st, 0.0, Direction::Forward, 1.0, &FlowOptions::default(), &mut never).unwrap();
        let expect = 4.0 - std::f64::consts::PI;
        assert!((r.state.p - Vec2::new(expect, 1.0)).norm() < 1e-7, "{:?}", r.state.p);
    }
}
