//! Base rectangle with optional quotient identifications (torus, Klein bottle).
//!
//! The fundamental domain is the half-open rectangle `[x0, x0+p) x [y0, y0+q)`.
//! The Klein bottle reverses orientation on the seam crossed when `x` moves by
//! `p`: `(x + p, y) ~ (x, 2*y0 + q - y)`. The other seam is a plain period.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        Vec2::new(self * v.x, self * v.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainMode {
    Plane,
    Torus,
    #[serde(rename = "klein")]
    KleinBottle,
}

impl std::str::FromStr for DomainMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "plane" => Ok(DomainMode::Plane),
            "torus" => Ok(DomainMode::Torus),
            "klein" | "kleinbottle" | "klein_bottle" => Ok(DomainMode::KleinBottle),
            other => Err(Error::Scenario(format!("unknown domain mode `{other}`"))),
        }
    }
}

/// The two seams of the fundamental rectangle.
///
/// `Horizontal` is the edge pair `y = y0 ~ y = y0 + q`; `Vertical` is
/// `x = x0 ~ x = x0 + p` (orientation reversing on the Klein bottle).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Seam {
    Horizontal,
    Vertical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuotientDomain {
    pub mode: DomainMode,
    pub x0: f64,
    pub y0: f64,
    pub p: f64,
    pub q: f64,
}

impl QuotientDomain {
    pub fn new(mode: DomainMode, x0: f64, y0: f64, p: f64, q: f64) -> Result<Self> {
        if !(p > 0.0 && q > 0.0 && p.is_finite() && q.is_finite()) {
            return Err(Error::Scenario(format!("domain periods must be positive, got p={p}, q={q}")));
        }
        if !(x0.is_finite() && y0.is_finite()) {
            return Err(Error::Scenario("domain corner must be finite".into()));
        }
        Ok(Self { mode, x0, y0, p, q })
    }

    pub fn torus(x0: f64, y0: f64, p: f64, q: f64) -> Result<Self> {
        Self::new(DomainMode::Torus, x0, y0, p, q)
    }

    pub fn area(&self) -> f64 {
        self.p * self.q
    }

    pub fn x1(&self) -> f64 {
        self.x0 + self.p
    }

    pub fn y1(&self) -> f64 {
        self.y0 + self.q
    }

    pub fn is_periodic(&self) -> bool {
        self.mode != DomainMode::Plane
    }

    /// Seams that exist for this mode.
    pub fn seams(&self) -> &'static [Seam] {
        match self.mode {
            DomainMode::Plane => &[],
            _ => &[Seam::Horizontal, Seam::Vertical],
        }
    }

    /// Reflection used by the Klein seam.
    pub fn reflect_y(&self, y: f64) -> f64 {
        2.0 * self.y0 + self.q - y
    }

    /// Whether `pt` lies in the closed rectangle (Plane) or is finite (quotients).
    pub fn contains(&self, pt: Vec2) -> bool {
        match self.mode {
            DomainMode::Plane => {
                pt.x >= self.x0 && pt.x <= self.x1() && pt.y >= self.y0 && pt.y <= self.y1()
            }
            _ => pt.is_finite(),
        }
    }

    /// Whether `pt` is inside the half-open fundamental rectangle.
    pub fn in_fundamental(&self, pt: Vec2) -> bool {
        pt.x >= self.x0 && pt.x < self.x1() && pt.y >= self.y0 && pt.y < self.y1()
    }

    /// Unique representative in `[x0, x0+p) x [y0, y0+q)`; identity on the plane.
    pub fn canonicalize(&self, pt: Vec2) -> Vec2 {
        match self.mode {
            DomainMode::Plane => pt,
            DomainMode::Torus => Vec2::new(
                wrap(pt.x, self.x0, self.p),
                wrap(pt.y, self.y0, self.q),
            ),
            DomainMode::KleinBottle => {
                let k = ((pt.x - self.x0) / self.p).floor();
                let mut y = pt.y;
                if (k as i64).rem_euclid(2) == 1 {
                    y = self.reflect_y(y);
                }
                Vec2::new(wrap(pt.x, self.x0, self.p), wrap(y, self.y0, self.q))
            }
        }
    }

    /// Canonical point plus the differential of the identification applied to
    /// tangent vectors (a y-sign flip after an odd number of Klein seams).
    pub fn canonicalize_with_flip(&self, pt: Vec2) -> (Vec2, bool) {
        let flip = self.mode == DomainMode::KleinBottle
            && (((pt.x - self.x0) / self.p).floor() as i64).rem_euclid(2) == 1;
        (self.canonicalize(pt), flip)
    }

    /// The seam map crossing the vertical seam once: `(x, y) -> (x + p, reflect(y))`
    /// for Klein, `(x + p, y)` for the torus.
    pub fn seam_map(&self, pt: Vec2) -> Vec2 {
        match self.mode {
            DomainMode::KleinBottle => Vec2::new(pt.x + self.p, self.reflect_y(pt.y)),
            _ => Vec2::new(pt.x + self.p, pt.y),
        }
    }

    /// Minimal-norm representative of `b - a` over all identifications.
    pub fn displacement(&self, a: Vec2, b: Vec2) -> Vec2 {
        match self.mode {
            DomainMode::Plane => b - a,
            DomainMode::Torus => Vec2::new(
                min_image(b.x - a.x, self.p),
                min_image(b.y - a.y, self.q),
            ),
            DomainMode::KleinBottle => {
                let mut best = b - a;
                for kx in -1i32..=1 {
                    let by = if kx.rem_euclid(2) == 1 { self.reflect_y(b.y) } else { b.y };
                    let dx = b.x + kx as f64 * self.p - a.x;
                    for ky in -1i32..=1 {
                        let d = Vec2::new(dx, by + ky as f64 * self.q - a.y);
                        if d.norm() < best.norm() {
                            best = d;
                        }
                    }
                }
                best
            }
        }
    }

    pub fn distance(&self, a: Vec2, b: Vec2) -> f64 {
        self.displacement(self.canonicalize(a), self.canonicalize(b)).norm()
    }
}

fn wrap(v: f64, lo: f64, period: f64) -> f64 {
    let mut r = (v - lo).rem_euclid(period) + lo;
    // rem_euclid can round up to exactly `period` for tiny negative inputs.
    if r >= lo + period {
        r = lo;
    }
    r
}

fn min_image(d: f64, period: f64) -> f64 {
    d - period * (d / period).round()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit(mode: DomainMode) -> QuotientDomain {
        QuotientDomain::new(mode, 0.0, 0.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn canonicalize_examples() {
        let t = unit(DomainMode::Torus).canonicalize(Vec2::new(1.25, -0.5));
        assert!((t.x - 0.25).abs() < 1e-15 && (t.y - 0.5).abs() < 1e-15);
        let p = unit(DomainMode::Plane).canonicalize(Vec2::new(3.7, -2.1));
        assert_eq!(p, Vec2::new(3.7, -2.1));
        let k = unit(DomainMode::KleinBottle).canonicalize(Vec2::new(1.25, 0.3));
        assert!((k.x - 0.25).abs() < 1e-15 && (k.y - 0.7).abs() < 1e-15);
    }

    #[test]
    fn far_edges_wrap() {
        let d = unit(DomainMode::Torus);
        assert_eq!(d.canonicalize(Vec2::new(1.0, 1.0)), Vec2::new(0.0, 0.0));
        let c = d.canonicalize(Vec2::new(-1e-18, 0.5));
        assert!(d.in_fundamental(c));
    }

    #[test]
    fn displacement_examples() {
        let t = unit(DomainMode::Torus);
        let d = t.displacement(Vec2::new(0.95, 0.5), Vec2::new(0.05, 0.5));
        assert!((d.x - 0.1).abs() < 1e-12 && d.y.abs() < 1e-15);
        assert_eq!(t.displacement(Vec2::new(0.3, 0.3), Vec2::new(0.3, 0.3)), Vec2::ZERO);
        let p = unit(DomainMode::Plane);
        assert_eq!(p.displacement(Vec2::ZERO, Vec2::new(1.0, 1.0)), Vec2::new(1.0, 1.0));
    }

    #[test]
    fn klein_seam_twice_is_identity() {
        let k = QuotientDomain::new(DomainMode::KleinBottle, -0.5, 0.25, 2.0, 3.0).unwrap();
        // Dyadic coordinates: the reflection is exact.
        for &(x, y) in &[(0.125, 0.375), (1.0, 2.875), (-0.5, 0.25)] {
            let once = k.seam_map(Vec2::new(x, y));
            let twice = k.seam_map(once);
            assert_eq!(twice.y, y);
            assert_eq!(twice.x, x + 2.0 * k.p);
        }
        // General coordinates: within one rounding of the reflection constant.
        for &(x, y) in &[(0.1, 0.3), (1.0, 2.9)] {
            let twice = k.seam_map(k.seam_map(Vec2::new(x, y)));
            assert!((twice.y - y).abs() <= 4.0 * f64::EPSILON);
        }
    }

    #[test]
    fn bad_periods_rejected() {
        assert!(QuotientDomain::new(DomainMode::Torus, 0.0, 0.0, 0.0, 1.0).is_err());
        assert!(QuotientDomain::new(DomainMode::Torus, 0.0, 0.0, 1.0, -1.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn canonicalize_idempotent(x in -50.0f64..50.0, y in -50.0f64..50.0, m in 0usize..3) {
            let mode = [DomainMode::Plane, DomainMode::Torus, DomainMode::KleinBottle][m];
            let d = QuotientDomain::new(mode, -0.3, 0.7, 1.7, 2.3).unwrap();
            let c = d.canonicalize(Vec2::new(x, y));
            prop_assert_eq!(d.canonicalize(c), c);
            if mode != DomainMode::Plane {
                prop_assert!(d.in_fundamental(c));
            }
        }

        #[test]
        fn torus_displacement_antisymmetric(ax in 0.0f64..1.0, ay in 0.0f64..1.0, bx in 0.0f64..1.0, by in 0.0f64..1.0) {
            let d = unit(DomainMode::Torus);
            let a = Vec2::new(ax, ay);
            let b = Vec2::new(bx, by);
            let f = d.displacement(a, b);
            let r = d.displacement(b, a);
            prop_assert!((f.norm() - r.norm()).abs() < 1e-12);
            prop_assert!(f.x.abs() <= 0.5 + 1e-12 && f.y.abs() <= 0.5 + 1e-12);
        }

        #[test]
        fn equivalent_points_share_representative(x in 0.0f64..1.0, y in 0.0f64..1.0, k in -3i32..3, j in -3i32..3) {
            let d = unit(DomainMode::KleinBottle);
            let base = Vec2::new(x, y);
            let mut moved = base;
            for _ in 0..k.unsigned_abs() {
                moved = if k > 0 { d.seam_map(moved) } else {
                    Vec2::new(moved.x - 1.0, d.reflect_y(moved.y))
                };
            }
            moved.y += j as f64;
            prop_assert!(d.distance(base, moved) < 1e-9);
        }
    }
}
