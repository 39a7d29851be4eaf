use rayon::prelude::*;
use serde::Serialize;

use super::{Densities, Witness, ANALYTIC_THRESHOLD};
use crate::error::{Error, Result};
use crate::expr::{diff_helpers, Var};
use crate::geometry::Vec2;
use crate::system::{PiecewiseSystem, SurfaceId};

#[derive(Debug, Clone, Serialize)]
pub struct SurfaceFlux {
    pub surface: SurfaceId,
    /// `(parameter, alpha+ F+h - alpha- F-h)` along the surface.
    pub profile: Vec<(f64, f64)>,
    pub max_abs: f64,
    pub witness: Option<Vec2>,
    /// Largest density seen on either side.
    pub scale: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FluxReport {
    pub surfaces: Vec<SurfaceFlux>,
    pub max_residual: f64,
    /// `max_residual` divided by the largest density, the quantity compared to the threshold.
    pub relative: f64,
}

impl FluxReport {
    pub fn violation(&self) -> Option<Witness> {
        let worst = self
            .surfaces
            .iter()
            .filter(|s| s.witness.is_some())
            .max_by(|a, b| (a.max_abs / a.scale).total_cmp(&(b.max_abs / b.scale)))?;
        (worst.max_abs / worst.scale > ANALYTIC_THRESHOLD).then(|| Witness::Flux {
            surface: worst.surface,
            point: worst.witness.unwrap(),
            residual: worst.max_abs,
        })
    }

    pub fn surface(&self, id: SurfaceId) -> Option<&SurfaceFlux> {
        self.surfaces.iter().find(|s| s.surface == id)
    }
}

fn surface_flux(sys: &PiecewiseSystem, dens: &Densities, id: SurfaceId, n: usize) -> Result<SurfaceFlux> {
    let (lo, hi) = sys.param_range(id);
    let periodic = sys.domain.is_periodic();
    let step = if periodic { (hi - lo) / n as f64 } else { (hi - lo) / (n - 1) as f64 };
    let rows: Vec<Option<(f64, f64, f64, Vec2)>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let s = lo + k as f64 * step;
            let Some(p) = sys.surface_point(id, s, None)? else { return Ok(None) };
            let sides = sys.sides(id, p)?;
            let fp = sys.side_field(&sides.plus)?;
            let fm = sys.side_field(&sides.minus)?;
            let ap = dens.at(sys, sides.plus.piece, sides.plus.at)?;
            let am = dens.at(sys, sides.minus.piece, sides.minus.at)?;
            let r = ap * sides.normal.dot(fp) - am * sides.normal.dot(fm);
            Ok(Some((s, r, ap.abs().max(am.abs()), p)))
        })
        .collect::<Result<_>>()?;
    let mut out = SurfaceFlux { surface: id, profile: Vec::new(), max_abs: 0.0, witness: None, scale: 0.0 };
    for (s, r, a, p) in rows.into_iter().flatten() {
        out.profile.push((s, r));
        out.scale = out.scale.max(a);
        if out.witness.is_none() || r.abs() > out.max_abs {
            out.max_abs = r.abs();
            out.witness = Some(p);
        }
    }
    if out.scale == 0.0 {
        out.scale = 1.0;
    }
    Ok(out)
}

/// Sample `alpha+ F+h - alpha- F-h` along every level surface and every seam.
pub fn check_flux(sys: &PiecewiseSystem, dens: &Densities, samples: usize) -> Result<FluxReport> {
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least 2 samples per surface".into()));
    }
    let mut ids: Vec<SurfaceId> = (0..sys.surfaces.len()).map(SurfaceId::Level).collect();
    ids.extend(sys.domain.seams().iter().map(|&s| SurfaceId::Seam(s)));
    let surfaces = ids.into_iter().map(|id| surface_flux(sys, dens, id, samples)).collect::<Result<Vec<_>>>()?;
    let max_residual = surfaces.iter().map(|s| s.max_abs).fold(0.0, f64::max);
    let relative = surfaces.iter().map(|s| s.max_abs / s.scale).fold(0.0, f64::max);
    Ok(FluxReport { surfaces, max_residual, relative })
}

#[derive(Debug, Clone, Serialize)]
pub struct DivergenceReport {
    pub piece: usize,
    pub max_abs: f64,
    pub witness: Option<Vec2>,
    pub scale: f64,
    pub samples_used: usize,
}

impl DivergenceReport {
    pub fn violation(&self) -> Option<Witness> {
        let p = self.witness?;
        (self.max_abs / self.scale > ANALYTIC_THRESHOLD).then_some(Witness::Divergence {
            piece: self.piece,
            point: p,
            value: self.max_abs,
        })
    }
}

fn divergence_expr(sys: &PiecewiseSystem, piece: usize, dens: &Densities) -> Result<crate::expr::Expr> {
    let a = dens.expr(sys, piece);
    let pc = &sys.pieces[piece];
    let ax = diff_helpers::mul(a.clone(), pc.fx.clone()).differentiate(Var::X)?;
    let ay = diff_helpers::mul(a, pc.fy.clone()).differentiate(Var::Y)?;
    Ok(diff_helpers::add(ax, ay))
}

/// `div(alpha F)` of one piece at a point, by structural differentiation.
pub fn divergence_at(sys: &PiecewiseSystem, piece: usize, dens: &Densities, p: Vec2) -> Result<f64> {
    Ok(divergence_expr(sys, piece, dens)?.eval_at(p)?)
}

/// Largest `|div(alpha F)|` over a `samples x samples` grid restricted to the piece's region.
pub fn check_divergence(sys: &PiecewiseSystem, piece: usize, dens: &Densities, samples: usize) -> Result<DivergenceReport> {
    if piece >= sys.pieces.len() {
        return Err(Error::InvalidArgument(format!("no piece {piece}")));
    }
    let div = divergence_expr(sys, piece, dens)?;
    let d = sys.domain;
    let n = samples.max(2);
    let rows: Vec<Option<(f64, f64, Vec2)>> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let p = Vec2::new(
                d.x0 + (k % n) as f64 / (n - 1) as f64 * d.p,
                d.y0 + (k / n) as f64 / (n - 1) as f64 * d.q,
            );
            match sys.active_piece(p) {
                Ok(j) if j == piece => Ok(Some((div.eval_at(p)?, dens.at(sys, piece, p)?, p))),
                Ok(_) | Err(Error::OnSurface { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let mut out = DivergenceReport { piece, max_abs: 0.0, witness: None, scale: 0.0, samples_used: 0 };
    for (v, a, p) in rows.into_iter().flatten() {
        out.samples_used += 1;
        out.scale = out.scale.max(a.abs());
        if out.witness.is_none() || v.abs() > out.max_abs {
            out.max_abs = v.abs();
            out.witness = Some(p);
        }
    }
    if out.scale == 0.0 {
        out.scale = 1.0;
    }
    Ok(out)
}
