//! Crossing / sliding / escaping / tangency labels on switching surfaces, the
//! sliding vector field and the Filippov convex segment.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::system::{OneSide, PiecewiseSystem, Sides, SurfaceId, MAX_LIE_ORDER};

/// Width of the tangency band on `|F±h|`.
pub const TOL_TANGENCY: f64 = 1e-10;
/// A point counts as lying on a surface when `|h| <= TOL_ON_SURFACE`.
pub const TOL_ON_SURFACE: f64 = 1e-10;
/// Smallest admissible `|F-h - F+h|` for the sliding field.
pub const TOL_DENOMINATOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Label {
    Crossing,
    Sliding,
    Escaping,
    Tangency,
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Label::Crossing => "Crossing",
            Label::Sliding => "Sliding",
            Label::Escaping => "Escaping",
            Label::Tangency => "Tangency",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TangentSide {
    Plus,
    Minus,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Visibility {
    Visible,
    Invisible,
    /// Only for two-sided tangencies whose sides disagree.
    Mixed,
}

/// Order and visibility of one side's contact with the surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Contact {
    pub order: usize,
    /// First nonvanishing Lie derivative `F^k h`.
    pub leading: f64,
    pub visible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TangencyDetail {
    pub side: TangentSide,
    pub order: usize,
    pub visibility: Visibility,
    pub plus: Option<Contact>,
    pub minus: Option<Contact>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigmaClass {
    pub label: Label,
    pub f_plus_h: f64,
    pub f_minus_h: f64,
    pub tangency: Option<TangencyDetail>,
}

/// Label from the two normal components alone (no order test).
pub fn label_of(a: f64, b: f64) -> Label {
    if a.abs() <= TOL_TANGENCY || b.abs() <= TOL_TANGENCY {
        Label::Tangency
    } else if a * b > 0.0 {
        Label::Crossing
    } else if a < 0.0 {
        Label::Sliding
    } else {
        Label::Escaping
    }
}

fn contact(sys: &PiecewiseSystem, id: SurfaceId, side: &OneSide, plus: bool, point: Vec2) -> Result<Contact> {
    for k in 2..=MAX_LIE_ORDER {
        let v = sys.side_lie(id, side, k)?;
        if v.abs() > TOL_TANGENCY {
            return Ok(Contact { order: k, leading: v, visible: if plus { v > 0.0 } else { v < 0.0 } });
        }
    }
    Err(Error::OrderOverflow { point, max_order: MAX_LIE_ORDER })
}

/// Classify from precomputed sides.
pub fn classify_sides(sys: &PiecewiseSystem, sides: &Sides) -> Result<SigmaClass> {
    let id = sides.surface;
    let a = sys.side_lie(id, &sides.plus, 1)?;
    let b = sys.side_lie(id, &sides.minus, 1)?;
    let label = label_of(a, b);
    let tangency = if label == Label::Tangency {
        let plus = if a.abs() <= TOL_TANGENCY {
            Some(contact(sys, id, &sides.plus, true, sides.point)?)
        } else {
            None
        };
        let minus = if b.abs() <= TOL_TANGENCY {
            Some(contact(sys, id, &sides.minus, false, sides.point)?)
        } else {
            None
        };
        let side = match (plus.is_some(), minus.is_some()) {
            (true, true) => TangentSide::Both,
            (true, false) => TangentSide::Plus,
            _ => TangentSide::Minus,
        };
        let contacts: Vec<Contact> = plus.into_iter().chain(minus).collect();
        let order = contacts.iter().map(|c| c.order).max().unwrap_or(0);
        let visibility = if contacts.iter().all(|c| c.visible) {
            Visibility::Visible
        } else if contacts.iter().all(|c| !c.visible) {
            Visibility::Invisible
        } else {
            Visibility::Mixed
        };
        Some(TangencyDetail { side, order, visibility, plus, minus })
    } else {
        None
    };
    Ok(SigmaClass { label, f_plus_h: a, f_minus_h: b, tangency })
}

fn check_on_surface(sys: &PiecewiseSystem, id: SurfaceId, p: Vec2) -> Result<()> {
    let r = sys.surface_value(id, p)?;
    if r.abs() > TOL_ON_SURFACE {
        return Err(Error::OffSurface { point: p, residual: r.abs() });
    }
    Ok(())
}

pub fn classify_point(sys: &PiecewiseSystem, id: SurfaceId, p: Vec2) -> Result<SigmaClass> {
    check_on_surface(sys, id, p)?;
    classify_sides(sys, &sys.sides(id, p)?)
}

/// `(F-h F+ - F+h F-) / (F-h - F+h)`; `None` when the denominator is degenerate.
pub fn sliding_vector(fp: Vec2, fm: Vec2, a: f64, b: f64) -> Option<Vec2> {
    let den = b - a;
    if den.abs() < TOL_DENOMINATOR {
        return None;
    }
    Some((1.0 / den) * (b * fp - a * fm))
}

/// Weight `lambda` with `Z^s = lambda F+ + (1 - lambda) F-`.
pub fn sliding_weight(a: f64, b: f64) -> f64 {
    b / (b - a)
}

pub fn sliding_field(sys: &PiecewiseSystem, id: SurfaceId, p: Vec2) -> Result<Vec2> {
    check_on_surface(sys, id, p)?;
    let sides = sys.sides(id, p)?;
    let c = classify_sides(sys, &sides)?;
    if !matches!(c.label, Label::Sliding | Label::Escaping) {
        return Err(Error::WrongRegion(match c.label {
            Label::Crossing => "crossing",
            _ => "tangency",
        }));
    }
    let fp = sys.side_field(&sides.plus)?;
    let fm = sys.side_field(&sides.minus)?;
    sliding_vector(fp, fm, c.f_plus_h, c.f_minus_h).ok_or(Error::DegenerateSliding((c.f_minus_h - c.f_plus_h).abs()))
}

/// Endpoints `(F+, F-)` of the segment `F_Z(p)`.
pub fn filippov_segment(sys: &PiecewiseSystem, id: SurfaceId, p: Vec2) -> Result<(Vec2, Vec2)> {
    check_on_surface(sys, id, p)?;
    let sides = sys.sides(id, p)?;
    Ok((sys.side_field(&sides.plus)?, sys.side_field(&sides.minus)?))
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanSample {
    pub param: f64,
    pub point: Vec2,
    pub f_plus_h: f64,
    pub f_minus_h: f64,
    pub label: Label,
}

#[derive(Debug, Clone, Serialize)]
pub struct LabeledInterval {
    pub start: f64,
    pub end: f64,
    pub label: Label,
}

#[derive(Debug, Clone, Serialize)]
pub struct TangencyPoint {
    pub param: f64,
    pub point: Vec2,
    pub class: SigmaClass,
}

#[derive(Debug, Clone, Serialize)]
pub struct SurfaceScan {
    pub surface: SurfaceId,
    pub range: (f64, f64),
    pub periodic: bool,
    pub samples: Vec<ScanSample>,
    pub intervals: Vec<LabeledInterval>,
    pub tangencies: Vec<TangencyPoint>,
}

impl SurfaceScan {
    /// Label at a parameter value (tangency points take precedence).
    pub fn label_at(&self, s: f64) -> Option<Label> {
        self.intervals
            .iter()
            .filter(|iv| iv.start <= s && s <= iv.end)
            .map(|iv| iv.label)
            .max_by_key(|l| (*l == Label::Tangency) as u8)
    }
}

fn normal_components(sys: &PiecewiseSystem, id: SurfaceId, s: f64, hint: Option<f64>) -> Result<Option<(Vec2, f64, f64)>> {
    let Some(p) = sys.surface_point(id, s, hint)? else {
        return Ok(None);
    };
    let sides = sys.sides(id, p)?;
    Ok(Some((p, sys.side_lie(id, &sides.plus, 1)?, sys.side_lie(id, &sides.minus, 1)?)))
}

/// Refine a sign change of `F+h` (`which = 0`) or `F-h` (`which = 1`) on `[lo, hi]`.
fn refine(sys: &PiecewiseSystem, id: SurfaceId, mut lo: f64, mut hi: f64, which: usize, hint: Option<f64>) -> Result<f64> {
    let val = |s: f64| -> Result<f64> {
        Ok(match normal_components(sys, id, s, hint)? {
            Some((_, a, b)) => if which == 0 { a } else { b },
            None => f64::NAN,
        })
    };
    let mut flo = val(lo)?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = val(mid)?;
        if fm.abs() <= TOL_TANGENCY * 1e-3 || fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    let (a, b) = (val(lo)?.abs(), val(hi)?.abs());
    Ok(if a <= b { lo } else { hi })
}

pub fn scan_surface(sys: &PiecewiseSystem, id: SurfaceId, n: usize) -> Result<SurfaceScan> {
    scan_surface_range(sys, id, n, None)
}

/// Partition a surface's parameter interval into labeled pieces and locate tangencies.
pub fn scan_surface_range(
    sys: &PiecewiseSystem,
    id: SurfaceId,
    n: usize,
    range: Option<(f64, f64)>,
) -> Result<SurfaceScan> {
    if n < 16 {
        return Err(Error::InvalidArgument(format!("scan needs at least 16 samples, got {n}")));
    }
    let full = sys.param_range(id);
    let periodic = range.is_none() && sys.domain.is_periodic();
    let (lo, hi) = range.unwrap_or(full);
    if !(hi > lo) {
        return Err(Error::InvalidArgument("empty scan range".into()));
    }
    let step = if periodic { (hi - lo) / n as f64 } else { (hi - lo) / (n - 1) as f64 };
    let params: Vec<f64> = (0..n).map(|i| lo + i as f64 * step).collect();
    let hint = match id {
        SurfaceId::Level(j) => sys.locate(j, lo + 0.5 * step, None)?.map(|p| match sys.surfaces[j].param_axis {
            crate::system::Axis::X => p.y,
            crate::system::Axis::Y => p.x,
        }),
        SurfaceId::Seam(_) => None,
    };
    let raw: Vec<Option<(Vec2, f64, f64)>> = params
        .par_iter()
        .map(|&s| normal_components(sys, id, s, hint))
        .collect::<Result<_>>()?;
    let mut samples = Vec::with_capacity(n);
    for (&s, r) in params.iter().zip(&raw) {
        if let Some((p, a, b)) = *r {
            samples.push(ScanSample { param: s, point: p, f_plus_h: a, f_minus_h: b, label: label_of(a, b) });
        }
    }

    // Tangency candidates: sign changes of either normal component, plus samples in the band.
    let mut cands: Vec<f64> = Vec::new();
    let m = samples.len();
    let pairs = if periodic { m } else { m.saturating_sub(1) };
    for i in 0..pairs {
        let u = &samples[i];
        let v = &samples[(i + 1) % m];
        let (s0, s1) = if i + 1 == m { (u.param, v.param + (hi - lo)) } else { (u.param, v.param) };
        for which in 0..2 {
            let (f0, f1) = if which == 0 { (u.f_plus_h, v.f_plus_h) } else { (u.f_minus_h, v.f_minus_h) };
            if f0.abs() > TOL_TANGENCY && f1.abs() > TOL_TANGENCY && (f0 < 0.0) != (f1 < 0.0) {
                let mut r = refine(sys, id, s0, s1, which, hint)?;
                if r >= hi && periodic {
                    r -= hi - lo;
                }
                cands.push(r);
            }
        }
    }
    for smp in &samples {
        if smp.label == Label::Tangency {
            cands.push(smp.param);
        }
    }
    cands.sort_by(f64::total_cmp);
    let mut merged: Vec<f64> = Vec::new();
    for c in cands {
        if merged.last().map_or(true, |l| (c - l).abs() > 1e-8) {
            merged.push(c);
        }
    }
    let mut tangencies = Vec::new();
    for s in merged {
        if let Some(p) = sys.surface_point(id, s, hint)? {
            let class = classify_sides(sys, &sys.sides(id, p)?)?;
            tangencies.push(TangencyPoint { param: s, point: p, class });
        }
    }

    // Maximal runs of equal labels, split at tangency points.
    let mut items: Vec<(f64, Option<Label>)> = tangencies.iter().map(|t| (t.param, None)).collect();
    items.extend(samples.iter().filter(|s| s.label != Label::Tangency).map(|s| (s.param, Some(s.label))));
    items.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut intervals: Vec<LabeledInterval> = Vec::new();
    let mut cur: Option<LabeledInterval> = None;
    let mut start = lo;
    for (s, label) in items {
        match label {
            None => {
                if let Some(mut c) = cur.take() {
                    c.end = s;
                    intervals.push(c);
                }
                intervals.push(LabeledInterval { start: s, end: s, label: Label::Tangency });
                start = s;
            }
            Some(l) => match cur.as_mut() {
                Some(c) if c.label == l => c.end = s,
                Some(c) => {
                    let mid = 0.5 * (c.end + s);
                    c.end = mid;
                    intervals.push(cur.take().unwrap());
                    cur = Some(LabeledInterval { start: mid, end: s, label: l });
                }
                None => cur = Some(LabeledInterval { start, end: s, label: l }),
            },
        }
    }
    if let Some(mut c) = cur {
        c.end = hi;
        intervals.push(c);
    }
    Ok(SurfaceScan { surface: id, range: (lo, hi), periodic, samples, intervals, tangencies })
}
