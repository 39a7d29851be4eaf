//! Piecewise-smooth vector fields on a [`QuotientDomain`].

use std::fmt;
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{diff_helpers, Expr, ExprError, Var};
use crate::geometry::{DomainMode, QuotientDomain, Seam, Vec2};
use crate::scenario_file;

/// Algebraic "on the surface" tolerance.
pub const TOL_SURFACE: f64 = 1e-12;
/// Highest Lie derivative order evaluated.
pub const MAX_LIE_ORDER: usize = 4;

/// Offset used to pick the piece on one side of a seam.
const SEAM_PROBE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SignReq {
    Plus,
    Minus,
    Any,
}

impl SignReq {
    fn matches(self, s: i8) -> bool {
        match self {
            SignReq::Plus => s > 0,
            SignReq::Minus => s < 0,
            SignReq::Any => true,
        }
    }

    fn compatible(self, other: SignReq) -> bool {
        !matches!((self, other), (SignReq::Plus, SignReq::Minus) | (SignReq::Minus, SignReq::Plus))
    }
}

pub fn parse_signature(s: &str) -> Result<Vec<SignReq>> {
    s.chars()
        .map(|c| match c {
            '+' => Ok(SignReq::Plus),
            '-' => Ok(SignReq::Minus),
            '*' | '0' => Ok(SignReq::Any),
            other => Err(Error::Scenario(format!("bad signature character `{other}`"))),
        })
        .collect()
}

fn signature_string(sig: &[SignReq]) -> String {
    sig.iter()
        .map(|s| match s {
            SignReq::Plus => '+',
            SignReq::Minus => '-',
            SignReq::Any => '*',
        })
        .collect()
}

/// Which coordinate parameterizes a level surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

#[derive(Debug, Clone)]
pub struct SwitchingSurface {
    pub h: Expr,
    pub grad: (Expr, Expr),
    pub param_axis: Axis,
}

impl SwitchingSurface {
    pub fn new(h: Expr) -> Result<Self> {
        if h.contains_abs() {
            return Err(Error::Scenario("switching function must be differentiable (no abs)".into()));
        }
        let grad = (h.differentiate(Var::X)?, h.differentiate(Var::Y)?);
        Ok(Self { h, grad, param_axis: Axis::X })
    }

    pub fn value(&self, p: Vec2) -> Result<f64> {
        Ok(self.h.eval_at(p)?)
    }

    pub fn gradient(&self, p: Vec2) -> Result<Vec2> {
        Ok(Vec2::new(self.grad.0.eval_at(p)?, self.grad.1.eval_at(p)?))
    }
}

#[derive(Debug)]
pub struct SmoothPiece {
    pub name: String,
    pub signature: Vec<SignReq>,
    pub fx: Expr,
    pub fy: Expr,
    pub density: Option<Expr>,
    /// Lie-derivative expressions per surface slot (level surfaces first,
    /// then the coordinate functions `y` and `x` used by the seams).
    lie_cache: Vec<OnceLock<std::result::Result<Vec<Expr>, ExprError>>>,
}

impl Clone for SmoothPiece {
    fn clone(&self) -> Self {
        Self::new(
            self.name.clone(),
            self.signature.clone(),
            self.fx.clone(),
            self.fy.clone(),
            self.density.clone(),
            self.lie_cache.len() - 2,
        )
    }
}

impl SmoothPiece {
    pub fn new(
        name: String,
        signature: Vec<SignReq>,
        fx: Expr,
        fy: Expr,
        density: Option<Expr>,
        n_surfaces: usize,
    ) -> Self {
        let lie_cache = (0..n_surfaces + 2).map(|_| OnceLock::new()).collect();
        Self { name, signature, fx, fy, density, lie_cache }
    }

    pub fn field(&self, p: Vec2) -> Result<Vec2> {
        Ok(Vec2::new(self.fx.eval_at(p)?, self.fy.eval_at(p)?))
    }

    pub fn density_at(&self, p: Vec2) -> Result<f64> {
        match &self.density {
            Some(d) => Ok(d.eval_at(p)?),
            None => Ok(1.0),
        }
    }

    fn lie_exprs(&self, slot: usize, grad: &(Expr, Expr)) -> Result<&[Expr]> {
        let cached = self.lie_cache[slot].get_or_init(|| {
            let mut out = Vec::with_capacity(MAX_LIE_ORDER);
            let mut cur = diff_helpers::add(
                diff_helpers::mul(grad.0.clone(), self.fx.clone()),
                diff_helpers::mul(grad.1.clone(), self.fy.clone()),
            );
            out.push(cur.clone());
            for _ in 1..MAX_LIE_ORDER {
                cur = diff_helpers::add(
                    diff_helpers::mul(cur.differentiate(Var::X)?, self.fx.clone()),
                    diff_helpers::mul(cur.differentiate(Var::Y)?, self.fy.clone()),
                );
                out.push(cur.clone());
            }
            Ok(out)
        });
        cached.as_deref().map_err(|e| Error::Expr(e.clone()))
    }
}

/// A switching surface: one of the scenario's level sets or a domain seam.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceId {
    Level(usize),
    Seam(Seam),
}

impl fmt::Display for SurfaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurfaceId::Level(j) => write!(f, "{j}"),
            SurfaceId::Seam(Seam::Horizontal) => f.write_str("seam-h"),
            SurfaceId::Seam(Seam::Vertical) => f.write_str("seam-v"),
        }
    }
}

impl std::str::FromStr for SurfaceId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "seam-h" => Ok(SurfaceId::Seam(Seam::Horizontal)),
            "seam-v" => Ok(SurfaceId::Seam(Seam::Vertical)),
            other => other
                .parse::<usize>()
                .map(SurfaceId::Level)
                .map_err(|_| Error::InvalidArgument(format!("bad surface id `{other}`"))),
        }
    }
}

/// One side of a switching surface at a point.
#[derive(Debug, Clone, Copy)]
pub struct OneSide {
    pub piece: usize,
    /// Where the piece's formulas are evaluated (the identified point for seams).
    pub at: Vec2,
    /// Negate the y component when transporting back across a Klein seam.
    pub flip: bool,
}

/// Both one-sided fields at a surface point plus the normal `grad h`.
#[derive(Debug, Clone, Copy)]
pub struct Sides {
    pub surface: SurfaceId,
    pub point: Vec2,
    pub normal: Vec2,
    pub plus: OneSide,
    pub minus: OneSide,
}

#[derive(Debug, Clone)]
pub struct PiecewiseSystem {
    pub name: String,
    pub domain: QuotientDomain,
    pub surfaces: Vec<SwitchingSurface>,
    pub pieces: Vec<SmoothPiece>,
}

impl PiecewiseSystem {
    /// Assemble and validate a system.
    pub fn new(
        name: impl Into<String>,
        domain: QuotientDomain,
        surfaces: Vec<SwitchingSurface>,
        pieces: Vec<SmoothPiece>,
    ) -> Result<Self> {
        let mut sys = Self { name: name.into(), domain, surfaces, pieces };
        sys.validate()?;
        Ok(sys)
    }

    pub fn load_scenario(text: &str) -> Result<Self> {
        scenario_file::parse_scenario(text)
    }

    fn validate(&mut self) -> Result<()> {
        if self.pieces.is_empty() {
            return Err(Error::Scenario("scenario has no pieces".into()));
        }
        let n = self.surfaces.len();
        for piece in &self.pieces {
            if piece.signature.len() != n {
                return Err(Error::Scenario(format!(
                    "piece `{}` has signature of length {} but there are {n} surfaces",
                    piece.name,
                    piece.signature.len()
                )));
            }
        }
        for (i, a) in self.pieces.iter().enumerate() {
            for b in &self.pieces[i + 1..] {
                if a.signature.iter().zip(&b.signature).all(|(x, y)| x.compatible(*y)) {
                    return Err(Error::Scenario(format!(
                        "signature overlap between pieces `{}` ({}) and `{}` ({})",
                        a.name,
                        signature_string(&a.signature),
                        b.name,
                        signature_string(&b.signature)
                    )));
                }
            }
        }
        for j in 0..n {
            self.surfaces[j].param_axis = self.detect_axis(j)?;
        }
        // Coverage over a sample grid of points off all surfaces.
        let d = self.domain;
        let m = 64;
        for i in 0..m {
            for k in 0..m {
                let p = Vec2::new(
                    d.x0 + (i as f64 + 0.37) * d.p / m as f64,
                    d.y0 + (k as f64 + 0.61) * d.q / m as f64,
                );
                let signs = self.signs_at(p)?;
                if signs.contains(&0) {
                    continue;
                }
                self.piece_for_signs(&signs)?;
            }
        }
        // 0 must be a regular value on sampled zeros.
        for j in 0..n {
            let (lo, hi) = self.param_range(SurfaceId::Level(j));
            for i in 0..64 {
                let s = lo + (i as f64 + 0.5) * (hi - lo) / 64.0;
                if let Some(pt) = self.locate(j, s, None)? {
                    let g = self.surfaces[j].gradient(pt)?;
                    if g.norm() <= 1e-9 {
                        return Err(Error::Scenario(format!(
                            "0 is not a regular value of surface {j}: |grad h| = {:e} at ({}, {})",
                            g.norm(),
                            pt.x,
                            pt.y
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn detect_axis(&self, j: usize) -> Result<Axis> {
        let d = self.domain;
        let mut by_x = 0;
        let mut by_y = 0;
        for i in 0..9 {
            let t = (i as f64 + 0.5) / 9.0;
            if self.root_on_line(j, Axis::X, d.x0 + t * d.p, None)?.is_some() {
                by_x += 1;
            }
            if self.root_on_line(j, Axis::Y, d.y0 + t * d.q, None)?.is_some() {
                by_y += 1;
            }
        }
        if by_x == 0 && by_y == 0 {
            return Err(Error::Scenario(format!("surface {j} does not meet the domain")));
        }
        Ok(if by_x >= by_y { Axis::X } else { Axis::Y })
    }

    /// Root of `h_j` on the line where the `axis` coordinate equals `s`.
    fn root_on_line(&self, j: usize, axis: Axis, s: f64, hint: Option<f64>) -> Result<Option<Vec2>> {
        let d = self.domain;
        let (lo, hi) = match axis {
            Axis::X => (d.y0, d.y1()),
            Axis::Y => (d.x0, d.x1()),
        };
        let pt = |u: f64| match axis {
            Axis::X => Vec2::new(s, u),
            Axis::Y => Vec2::new(u, s),
        };
        let h = &self.surfaces[j];
        let n = 400;
        let mut best: Option<f64> = None;
        let mut prev_u = lo;
        let mut prev = h.value(pt(lo))?;
        if prev == 0.0 {
            best = Some(lo);
        }
        for i in 1..=n {
            let u = lo + (hi - lo) * i as f64 / n as f64;
            let v = h.value(pt(u))?;
            let root = if v == 0.0 {
                Some(u)
            } else if prev != 0.0 && (prev < 0.0) != (v < 0.0) {
                let (mut a, mut b, mut fa) = (prev_u, u, prev);
                for _ in 0..200 {
                    let mid = 0.5 * (a + b);
                    if mid <= a || mid >= b {
                        break;
                    }
                    let fm = h.value(pt(mid))?;
                    if fm == 0.0 {
                        a = mid;
                        b = mid;
                        break;
                    }
                    if (fm < 0.0) == (fa < 0.0) {
                        a = mid;
                        fa = fm;
                    } else {
                        b = mid;
                    }
                }
                let fa_abs = h.value(pt(a))?.abs();
                let fb_abs = h.value(pt(b))?.abs();
                Some(if fa_abs <= fb_abs { a } else { b })
            } else {
                None
            };
            if let Some(r) = root {
                let target = hint.unwrap_or(lo);
                if best.map_or(true, |b| (r - target).abs() < (b - target).abs()) {
                    best = Some(r);
                }
                if hint.is_none() {
                    break;
                }
            }
            prev = v;
            prev_u = u;
        }
        Ok(best.map(pt))
    }

    /// Point of level surface `j` at parameter `s` (closest to `hint` when several).
    pub fn locate(&self, j: usize, s: f64, hint: Option<f64>) -> Result<Option<Vec2>> {
        self.root_on_line(j, self.surfaces[j].param_axis, s, hint)
    }

    /// Parameter interval of a surface: the extent along its parameter axis.
    pub fn param_range(&self, id: SurfaceId) -> (f64, f64) {
        let d = self.domain;
        let axis = match id {
            SurfaceId::Level(j) => self.surfaces[j].param_axis,
            SurfaceId::Seam(Seam::Horizontal) => Axis::X,
            SurfaceId::Seam(Seam::Vertical) => Axis::Y,
        };
        match axis {
            Axis::X => (d.x0, d.x1()),
            Axis::Y => (d.y0, d.y1()),
        }
    }

    /// Point on a surface at parameter `s`.
    pub fn surface_point(&self, id: SurfaceId, s: f64, hint: Option<f64>) -> Result<Option<Vec2>> {
        let d = self.domain;
        match id {
            SurfaceId::Level(j) => self.locate(j, s, hint),
            SurfaceId::Seam(Seam::Horizontal) => Ok(Some(Vec2::new(s, d.y0))),
            SurfaceId::Seam(Seam::Vertical) => Ok(Some(Vec2::new(d.x0, s))),
        }
    }

    pub fn surface_param(&self, id: SurfaceId, p: Vec2) -> f64 {
        let axis = match id {
            SurfaceId::Level(j) => self.surfaces[j].param_axis,
            SurfaceId::Seam(Seam::Horizontal) => Axis::X,
            SurfaceId::Seam(Seam::Vertical) => Axis::Y,
        };
        match axis {
            Axis::X => p.x,
            Axis::Y => p.y,
        }
    }

    /// Sign of each level function, 0 within [`TOL_SURFACE`].
    pub fn signs_at(&self, p: Vec2) -> Result<Vec<i8>> {
        self.surfaces
            .iter()
            .map(|s| {
                let v = s.value(p)?;
                Ok(if v.abs() <= TOL_SURFACE {
                    0
                } else if v > 0.0 {
                    1
                } else {
                    -1
                })
            })
            .collect()
    }

    pub fn piece_for_signs(&self, signs: &[i8]) -> Result<usize> {
        let mut found = None;
        for (i, piece) in self.pieces.iter().enumerate() {
            if piece.signature.iter().zip(signs).all(|(r, s)| r.matches(*s)) {
                if found.is_some() {
                    return Err(Error::Scenario(format!("several pieces match signature {signs:?}")));
                }
                found = Some(i);
            }
        }
        found.ok_or_else(|| {
            Error::NoActivePiece(
                signs.iter().map(|s| if *s > 0 { '+' } else if *s < 0 { '-' } else { '0' }).collect(),
            )
        })
    }

    /// The unique piece active at a point off every surface.
    pub fn active_piece(&self, p: Vec2) -> Result<usize> {
        let signs = self.signs_at(p)?;
        if let Some(j) = signs.iter().position(|s| *s == 0) {
            return Err(Error::OnSurface { surface: j, point: p });
        }
        self.piece_for_signs(&signs)
    }

    /// Piece active at `p` treating surfaces with |h| tiny by the sign of their value.
    pub fn piece_near(&self, p: Vec2) -> Result<usize> {
        let signs: Vec<i8> = self
            .surfaces
            .iter()
            .map(|s| Ok(if s.value(p)? >= 0.0 { 1 } else { -1 }))
            .collect::<Result<_>>()?;
        self.piece_for_signs(&signs)
    }

    pub fn field(&self, piece: usize, p: Vec2) -> Result<Vec2> {
        self.pieces[piece].field(p)
    }

    pub fn side_field(&self, side: &OneSide) -> Result<Vec2> {
        let f = self.pieces[side.piece].field(side.at)?;
        Ok(if side.flip { Vec2::new(f.x, -f.y) } else { f })
    }

    /// Density of the piece active at `p` (pieces without density count as 1).
    pub fn density_at(&self, p: Vec2) -> Result<f64> {
        let piece = self.piece_near(p)?;
        self.pieces[piece].density_at(p)
    }

    /// `F^k h` of `piece` along level surface `surface` at `p`.
    pub fn lie_derivative(&self, piece: usize, surface: usize, p: Vec2, k: usize) -> Result<f64> {
        self.lie_in_slot(piece, surface, p, k)
    }

    fn lie_in_slot(&self, piece: usize, slot: usize, p: Vec2, k: usize) -> Result<f64> {
        if k == 0 || k > MAX_LIE_ORDER {
            return Err(Error::InvalidArgument(format!("Lie derivative order {k} outside 1..={MAX_LIE_ORDER}")));
        }
        let n = self.surfaces.len();
        let grad = if slot < n {
            self.surfaces[slot].grad.clone()
        } else if slot == n {
            (Expr::num(0.0), Expr::num(1.0))
        } else {
            (Expr::num(1.0), Expr::num(0.0))
        };
        let exprs = self.pieces[piece].lie_exprs(slot, &grad)?;
        Ok(exprs[k - 1].eval_at(p)?)
    }

    /// `F^k h` for one side of any surface (seams use the coordinate function).
    pub fn side_lie(&self, surface: SurfaceId, side: &OneSide, k: usize) -> Result<f64> {
        let n = self.surfaces.len();
        let slot = match surface {
            SurfaceId::Level(j) => j,
            SurfaceId::Seam(Seam::Horizontal) => n,
            SurfaceId::Seam(Seam::Vertical) => n + 1,
        };
        self.lie_in_slot(side.piece, slot, side.at, k)
    }

    /// Value of the local switching function (0 on the surface).
    pub fn surface_value(&self, id: SurfaceId, p: Vec2) -> Result<f64> {
        let d = self.domain;
        match id {
            SurfaceId::Level(j) => self.surfaces[j].value(p),
            SurfaceId::Seam(Seam::Horizontal) => {
                let c = d.canonicalize(p);
                Ok((c.y - d.y0).min(d.y1() - c.y))
            }
            SurfaceId::Seam(Seam::Vertical) => {
                let c = d.canonicalize(p);
                Ok((c.x - d.x0).min(d.x1() - c.x))
            }
        }
    }

    pub fn surface_gradient(&self, id: SurfaceId, p: Vec2) -> Result<Vec2> {
        match id {
            SurfaceId::Level(j) => self.surfaces[j].gradient(p),
            SurfaceId::Seam(Seam::Horizontal) => Ok(Vec2::new(0.0, 1.0)),
            SurfaceId::Seam(Seam::Vertical) => Ok(Vec2::new(1.0, 0.0)),
        }
    }

    /// Whether the field jumps across a seam anywhere (sampled).
    pub fn seam_is_discontinuous(&self, seam: Seam) -> Result<bool> {
        if !self.domain.seams().contains(&seam) {
            return Ok(false);
        }
        let (lo, hi) = self.param_range(SurfaceId::Seam(seam));
        for i in 0..64 {
            let s = lo + (i as f64 + 0.5) * (hi - lo) / 64.0;
            let p = self.surface_point(SurfaceId::Seam(seam), s, None)?.unwrap_or_default();
            let sides = self.sides(SurfaceId::Seam(seam), p)?;
            let a = self.side_field(&sides.plus)?;
            let b = self.side_field(&sides.minus)?;
            if (a - b).norm() > 1e-12 {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Level surfaces plus the seams across which the field is discontinuous.
    pub fn all_discontinuities(&self) -> Result<Vec<SurfaceId>> {
        let mut out: Vec<SurfaceId> = (0..self.surfaces.len()).map(SurfaceId::Level).collect();
        for &seam in self.domain.seams() {
            if self.seam_is_discontinuous(seam)? {
                out.push(SurfaceId::Seam(seam));
            }
        }
        Ok(out)
    }

    /// One-sided pieces at a surface point.
    pub fn sides(&self, id: SurfaceId, p: Vec2) -> Result<Sides> {
        let d = self.domain;
        match id {
            SurfaceId::Level(j) => {
                let mut signs = self.signs_at(p)?;
                // Other surfaces through the same point: probe along the normal.
                let g = self.surfaces[j].gradient(p)?;
                for (k, s) in signs.iter_mut().enumerate() {
                    if k != j && *s == 0 {
                        let v = self.surfaces[k].value(p + (1e-7 / g.norm().max(1e-300)) * g)?;
                        *s = if v >= 0.0 { 1 } else { -1 };
                    }
                }
                signs[j] = 1;
                let plus = self.piece_for_signs(&signs)?;
                signs[j] = -1;
                let minus = self.piece_for_signs(&signs)?;
                Ok(Sides {
                    surface: id,
                    point: p,
                    normal: g,
                    plus: OneSide { piece: plus, at: p, flip: false },
                    minus: OneSide { piece: minus, at: p, flip: false },
                })
            }
            SurfaceId::Seam(Seam::Horizontal) => {
                let at_plus = Vec2::new(p.x, d.y0);
                let at_minus = Vec2::new(p.x, d.y1());
                let plus = self.piece_near(Vec2::new(p.x, d.y0 + SEAM_PROBE * d.q))?;
                let minus = self.piece_near(Vec2::new(p.x, d.y1() - SEAM_PROBE * d.q))?;
                Ok(Sides {
                    surface: id,
                    point: at_plus,
                    normal: Vec2::new(0.0, 1.0),
                    plus: OneSide { piece: plus, at: at_plus, flip: false },
                    minus: OneSide { piece: minus, at: at_minus, flip: false },
                })
            }
            SurfaceId::Seam(Seam::Vertical) => {
                let klein = d.mode == DomainMode::KleinBottle;
                let y_other = if klein { d.reflect_y(p.y) } else { p.y };
                let y_other = if y_other >= d.y1() { y_other - d.q } else { y_other };
                let at_plus = Vec2::new(d.x0, p.y);
                let at_minus = Vec2::new(d.x1(), y_other);
                let plus = self.piece_near(Vec2::new(d.x0 + SEAM_PROBE * d.p, p.y))?;
                let minus = self.piece_near(Vec2::new(d.x1() - SEAM_PROBE * d.p, y_other))?;
                Ok(Sides {
                    surface: id,
                    point: at_plus,
                    normal: Vec2::new(1.0, 0.0),
                    plus: OneSide { piece: plus, at: at_plus, flip: false },
                    minus: OneSide { piece: minus, at: at_minus, flip: klein },
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios;

    #[test]
    fn z1_pieces() {
        let z1 = scenarios::get("z1").unwrap();
        assert_eq!(z1.surfaces.len(), 1);
        assert_eq!(z1.pieces.len(), 2);
        let up = z1.active_piece(Vec2::new(0.0, 0.5)).unwrap();
        assert_eq!(z1.field(up, Vec2::new(0.0, 0.5)).unwrap(), Vec2::new(1.0, -1.0));
        let down = z1.active_piece(Vec2::new(0.0, -0.5)).unwrap();
        assert_eq!(z1.field(down, Vec2::new(0.0, -0.5)).unwrap(), Vec2::new(1.0, 1.0));
        assert!(matches!(z1.active_piece(Vec2::ZERO), Err(Error::OnSurface { surface: 0, .. })));
    }

    #[test]
    fn overlap_rejected() {
        let text = r#"
            domain { mode = plane, x0 = -1, y0 = -1, p = 2, q = 2 }
            surface { h = "y" }
            piece { signature = "+", fx = "1", fy = "0" }
            piece { signature = "+", fx = "0", fy = "1" }
        "#;
        let err = PiecewiseSystem::load_scenario(text).unwrap_err();
        assert!(err.to_string().contains("overlap"), "{err}");
    }

    #[test]
    fn coverage_gap_rejected() {
        let text = r#"
            domain { mode = plane, x0 = -1, y0 = -1, p = 2, q = 2 }
            surface { h = "y" }
            piece { signature = "+", fx = "1", fy = "0" }
        "#;
        assert!(matches!(PiecewiseSystem::load_scenario(text), Err(Error::NoActivePiece(_))));
    }

    #[test]
    fn singular_switching_function_rejected() {
        let text = r#"
            domain { mode = plane, x0 = -1, y0 = -1, p = 2, q = 2 }
            surface { h = "y^3" }
            piece { signature = "+", fx = "1", fy = "0" }
            piece { signature = "-", fx = "1", fy = "0" }
        "#;
        let err = PiecewiseSystem::load_scenario(text).unwrap_err();
        assert!(err.to_string().contains("regular value"), "{err}");
    }

    #[test]
    fn ex43_layout() {
        let s = scenarios::get("ex43").unwrap();
        assert_eq!(s.surfaces.len(), 2);
        assert_eq!(s.pieces.len(), 3);
        assert_eq!(s.domain.mode, DomainMode::Torus);
    }

    #[test]
    fn lie_derivative_examples() {
        let z1 = scenarios::get("z1").unwrap();
        let up = z1.active_piece(Vec2::new(0.0, 0.5)).unwrap();
        assert_eq!(z1.lie_derivative(up, 0, Vec2::new(0.7, 0.0), 1).unwrap(), -1.0);
        let ff = scenarios::get("foldfold_center").unwrap();
        let up = ff.active_piece(Vec2::new(0.0, 0.5)).unwrap();
        assert_eq!(ff.lie_derivative(up, 0, Vec2::ZERO, 1).unwrap(), 0.0);
        assert_eq!(ff.lie_derivative(up, 0, Vec2::ZERO, 2).unwrap(), -1.0);
        let flat = PiecewiseSystem::load_scenario(
            r#"
            domain { mode = plane, x0 = -1, y0 = -1, p = 2, q = 2 }
            surface { h = "y" }
            piece { signature = "+", fx = "1+x^2", fy = "0" }
            piece { signature = "-", fx = "sin(y)", fy = "0" }
        "#,
        )
        .unwrap();
        for piece in 0..2 {
            for &x in &[-0.7, 0.0, 0.4] {
                assert_eq!(flat.lie_derivative(piece, 0, Vec2::new(x, 0.0), 1).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn lie_order_is_capped() {
        let z1 = scenarios::get("z1").unwrap();
        assert!(z1.lie_derivative(0, 0, Vec2::ZERO, 5).is_err());
        assert!(z1.lie_derivative(0, 0, Vec2::ZERO, 0).is_err());
    }
}
