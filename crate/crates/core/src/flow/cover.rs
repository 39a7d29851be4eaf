//! Pixel covers of the image of a set under the set-valued flow.
//!
//! Each input box is cut into `res x res` cells. Cell corners are flowed with
//! every branch. When all four corners of a cell have a single image the cell
//! image is taken to be the quadrilateral through those images and is
//! rasterized; otherwise every endpoint gets a box of one cell pitch.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{flow_point, NodeEnd, Policy};
use super::FlowOptions;
use crate::error::{Error, Result};
use crate::geometry::{DomainMode, Vec2};
use crate::system::PiecewiseSystem;

/// Pixels per cell pitch.
const SUBDIV: f64 = 8.0;
/// Leaf cap used for corner flows.
const CORNER_CAP: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        if !(x0 < x1 && y0 < y1) || ![x0, y0, x1, y1].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument(format!("empty or invalid box [{x0},{x1}]x[{y0},{y1}]")));
        }
        Ok(Self { x0, y0, x1, y1 })
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoxCover {
    pub time: f64,
    /// Sample cells per box edge.
    pub resolution: usize,
    pub origin: Vec2,
    pub pixel_w: f64,
    pub pixel_h: f64,
    #[serde(skip)]
    pub pixels: BTreeSet<(i64, i64)>,
    /// Corner flows whose branch tree hit the leaf cap.
    pub truncated: usize,
    /// Cells covered by endpoint boxes instead of a rasterized image.
    pub fallback_cells: usize,
}

impl BoxCover {
    fn new(sys: &PiecewiseSystem, pitch: f64, time: f64, resolution: usize) -> Self {
        let d = sys.domain;
        let target = pitch / SUBDIV;
        let (pixel_w, pixel_h) = if d.is_periodic() {
            (d.p / (d.p / target).ceil(), d.q / (d.q / target).ceil())
        } else {
            (target, target)
        };
        Self {
            time,
            resolution,
            origin: Vec2::new(d.x0, d.y0),
            pixel_w,
            pixel_h,
            pixels: BTreeSet::new(),
            truncated: 0,
            fallback_cells: 0,
        }
    }

    pub fn pixel_area(&self) -> f64 {
        self.pixel_w * self.pixel_h
    }

    pub fn area(&self) -> f64 {
        self.pixels.len() as f64 * self.pixel_area()
    }

    pub fn pixel_center(&self, (i, j): (i64, i64)) -> Vec2 {
        Vec2::new(
            self.origin.x + (i as f64 + 0.5) * self.pixel_w,
            self.origin.y + (j as f64 + 0.5) * self.pixel_h,
        )
    }

    /// Midpoint quadrature of `f` over the cover.
    pub fn integral(&self, f: &(dyn Fn(Vec2) -> Result<f64> + Sync)) -> Result<f64> {
        let vals: Vec<f64> = self
            .pixels
            .par_iter()
            .map(|&ij| f(self.pixel_center(ij)))
            .collect::<Result<_>>()?;
        Ok(vals.iter().sum::<f64>() * self.pixel_area())
    }

    pub fn contains(&self, sys: &PiecewiseSystem, p: Vec2) -> bool {
        self.pixels.contains(&self.index(sys, p))
    }

    /// Pixels merged into horizontal runs.
    pub fn rects(&self) -> Vec<Rect> {
        let mut out = Vec::new();
        let mut run: Option<(i64, i64, i64)> = None;
        let flush = |r: (i64, i64, i64), out: &mut Vec<Rect>| {
            let (j, i0, i1) = r;
            let a = self.pixel_center((i0, j));
            let b = self.pixel_center((i1, j));
            out.push(Rect {
                x0: a.x - 0.5 * self.pixel_w,
                y0: a.y - 0.5 * self.pixel_h,
                x1: b.x + 0.5 * self.pixel_w,
                y1: b.y + 0.5 * self.pixel_h,
            });
        };
        // BTreeSet orders by (i, j); runs are along i for fixed j.
        let mut by_row: Vec<(i64, i64)> = self.pixels.iter().map(|&(i, j)| (j, i)).collect();
        by_row.sort_unstable();
        for (j, i) in by_row {
            run = match run {
                Some((rj, i0, i1)) if rj == j && i1 + 1 == i => Some((rj, i0, i)),
                Some(r) => {
                    flush(r, &mut out);
                    Some((j, i, i))
                }
                None => Some((j, i, i)),
            };
        }
        if let Some(r) = run {
            flush(r, &mut out);
        }
        out
    }

    fn index(&self, sys: &PiecewiseSystem, p: Vec2) -> (i64, i64) {
        let d = sys.domain;
        let c = if d.is_periodic() { d.canonicalize(p) } else { p };
        let mut i = ((c.x - self.origin.x) / self.pixel_w).floor() as i64;
        let mut j = ((c.y - self.origin.y) / self.pixel_h).floor() as i64;
        if d.is_periodic() {
            let nx = (d.p / self.pixel_w).round() as i64;
            let ny = (d.q / self.pixel_h).round() as i64;
            i = i.clamp(0, nx - 1);
            j = j.clamp(0, ny - 1);
        }
        (i, j)
    }

    fn mark(&mut self, sys: &PiecewiseSystem, p: Vec2) {
        let ij = self.index(sys, p);
        self.pixels.insert(ij);
    }

    /// Mark pixels whose centres lie in the polygon (given in one local chart).
    fn fill_polygon(&mut self, sys: &PiecewiseSystem, poly: &[Vec2]) -> usize {
        let (mut lo, mut hi) = (poly[0], poly[0]);
        for q in poly {
            lo = Vec2::new(lo.x.min(q.x), lo.y.min(q.y));
            hi = Vec2::new(hi.x.max(q.x), hi.y.max(q.y));
        }
        let i0 = ((lo.x - self.origin.x) / self.pixel_w - 0.5).ceil() as i64;
        let i1 = ((hi.x - self.origin.x) / self.pixel_w - 0.5).floor() as i64;
        let j0 = ((lo.y - self.origin.y) / self.pixel_h - 0.5).ceil() as i64;
        let j1 = ((hi.y - self.origin.y) / self.pixel_h - 0.5).floor() as i64;
        let mut n = 0;
        for j in j0..=j1 {
            for i in i0..=i1 {
                let c = self.pixel_center((i, j));
                if inside(poly, c) {
                    self.mark(sys, c);
                    n += 1;
                }
            }
        }
        n
    }
}

fn inside(poly: &[Vec2], c: Vec2) -> bool {
    let mut odd = false;
    let n = poly.len();
    for k in 0..n {
        let a = poly[k];
        let b = poly[(k + 1) % n];
        if (a.y > c.y) != (b.y > c.y) {
            let x = a.x + (c.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if c.x < x {
                odd = !odd;
            }
        }
    }
    odd
}

/// Images of one sample point.
struct CornerImage {
    ends: Vec<Vec2>,
    single: bool,
    truncated: bool,
}

/// Cover of the image of the union of `boxes` after time `t`.
pub fn flow_set(sys: &PiecewiseSystem, boxes: &[Rect], t: f64, res: usize, opts: &FlowOptions) -> Result<BoxCover> {
    if res == 0 {
        return Err(Error::InvalidArgument("resolution must be positive".into()));
    }
    if boxes.is_empty() {
        return Err(Error::InvalidArgument("no boxes given".into()));
    }
    let d = sys.domain;
    for b in boxes {
        let inside = b.x0 >= d.x0 - 1e-12 && b.x1 <= d.x1() + 1e-12 && b.y0 >= d.y0 - 1e-12 && b.y1 <= d.y1() + 1e-12;
        if !inside {
            return Err(Error::InvalidArgument(format!("box {b:?} is not inside the domain")));
        }
    }
    let pitch = boxes
        .iter()
        .map(|b| ((b.x1 - b.x0) / res as f64).min((b.y1 - b.y0) / res as f64))
        .fold(f64::INFINITY, f64::min);
    let mut opts = *opts;
    opts.record = false;
    let n1 = res + 1;
    let corners: Vec<Vec2> = boxes
        .iter()
        .flat_map(|b| {
            (0..n1 * n1).map(move |k| {
                let (i, j) = (k % n1, k / n1);
                Vec2::new(
                    b.x0 + (b.x1 - b.x0) * i as f64 / res as f64,
                    b.y0 + (b.y1 - b.y0) * j as f64 / res as f64,
                )
            })
        })
        .collect();
    let images: Vec<CornerImage> = corners
        .par_iter()
        .map(|&p| {
            let tree = flow_point(sys, p, t, Policy::AllBranches { cap: CORNER_CAP }, &opts)?;
            let leaves: Vec<_> = tree.leaves().collect();
            let ends: Vec<Vec2> = leaves.iter().filter(|l| l.end == NodeEnd::TimeLimit).map(|l| l.end_point).collect();
            Ok(CornerImage { single: leaves.len() == 1 && ends.len() == 1, ends, truncated: tree.truncated })
        })
        .collect::<Result<_>>()?;

    let mut cover = BoxCover::new(sys, pitch, t, res);
    cover.truncated = images.iter().filter(|c| c.truncated).count();
    let span = if d.is_periodic() { d.p.min(d.q) } else { f64::INFINITY };
    for (bi, _) in boxes.iter().enumerate() {
        let base = bi * n1 * n1;
        for j in 0..res {
            for i in 0..res {
                let ids = [base + j * n1 + i, base + j * n1 + i + 1, base + (j + 1) * n1 + i + 1, base + (j + 1) * n1 + i];
                let cell: Vec<&CornerImage> = ids.iter().map(|&k| &images[k]).collect();
                let mut quad = None;
                if cell.iter().all(|c| c.single) {
                    let o = cell[0].ends[0];
                    let pts: Vec<Vec2> = cell.iter().map(|c| o + d.displacement(o, c.ends[0])).collect();
                    let diam = pts.iter().flat_map(|a| pts.iter().map(move |b| (*a - *b).norm())).fold(0.0, f64::max);
                    if diam < 0.25 * span {
                        quad = Some(pts);
                    }
                }
                match quad {
                    Some(pts) => {
                        if cover.fill_polygon(sys, &pts) == 0 {
                            for q in pts {
                                cover.mark(sys, q);
                            }
                        }
                    }
                    None => {
                        cover.fallback_cells += 1;
                        for c in &cell {
                            for &e in &c.ends {
                                let h = 0.5 * pitch;
                                let sq = [
                                    e + Vec2::new(-h, -h),
                                    e + Vec2::new(h, -h),
                                    e + Vec2::new(h, h),
                                    e + Vec2::new(-h, h),
                                ];
                                cover.fill_polygon(sys, &sq);
                                cover.mark(sys, e);
                            }
                        }
                    }
                }
            }
        }
    }
    if d.mode == DomainMode::Plane {
        let (nx0, ny0) = (d.x0, d.y0);
        let (w, h) = (cover.pixel_w, cover.pixel_h);
        let (x1, y1) = (d.x1(), d.y1());
        cover.pixels.retain(|&(i, j)| {
            let cx = nx0 + (i as f64 + 0.5) * w;
            let cy = ny0 + (j as f64 + 0.5) * h;
            cx >= nx0 && cx <= x1 && cy >= ny0 && cy <= y1
        });
    }
    Ok(cover)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::get;

    #[test]
    fn identity_cover_matches_box() {
        let z1 = get("z1").unwrap();
        let a = Rect::new(0.0, 0.3, 0.2, 0.5).unwrap();
        let c = flow_set(&z1, &[a], 0.0, 8, &FlowOptions::default()).unwrap();
        assert!((c.area() - a.area()).abs() / a.area() < 0.02, "{}", c.area());
    }

    #[test]
    fn z1_collapses_on_the_sliding_line() {
        let z1 = get("z1").unwrap();
        let a = Rect::new(0.0, 0.3, 0.2, 0.5).unwrap();
        let coarse = flow_set(&z1, &[a], 1.0, 4, &FlowOptions::default()).unwrap();
        let fine = flow_set(&z1, &[a], 1.0, 16, &FlowOptions::default()).unwrap();
        assert!(coarse.area() < 0.2 * a.area());
        assert!(fine.area() < coarse.area());
        for r in fine.rects() {
            assert!(r.y0.abs() < 0.05 && r.y1.abs() < 0.05, "{r:?}");
        }
    }

    #[test]
    fn rects_tile_the_pixels() {
        let z1 = get("z1").unwrap();
        let a = Rect::new(-1.0, -1.0, -0.5, -0.7).unwrap();
        let c = flow_set(&z1, &[a], 0.0, 4, &FlowOptions::default()).unwrap();
        let total: f64 = c.rects().iter().map(Rect::area).sum();
        assert!((total - c.area()).abs() < 1e-9);
    }
}
