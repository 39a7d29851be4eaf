//! Built-in scenario catalog.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{DomainMode, Vec2};
use crate::scenario_file::parse_scenario;
use crate::system::PiecewiseSystem;

const CATALOG: &[(&str, &str)] = &[
    ("z1", include_str!("../scenarios/z1.scn")),
    ("z2_as_printed", include_str!("../scenarios/z2_as_printed.scn")),
    ("z2_refractive", include_str!("../scenarios/z2_refractive.scn")),
    ("striped_torus", include_str!("../scenarios/striped_torus.scn")),
    ("striped_klein", include_str!("../scenarios/striped_klein.scn")),
    ("ex42", include_str!("../scenarios/ex42.scn")),
    ("ex43", include_str!("../scenarios/ex43.scn")),
    ("ex44", include_str!("../scenarios/ex44.scn")),
    ("foldfold_center", include_str!("../scenarios/foldfold_center.scn")),
    ("foldfold_perturbed", include_str!("../scenarios/foldfold_perturbed.scn")),
    ("ex43_perturbed", include_str!("../scenarios/ex43_perturbed.scn")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    CATALOG.iter().map(|(n, _)| *n)
}

pub fn source(name: &str) -> Result<&'static str> {
    CATALOG
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| *s)
        .ok_or_else(|| Error::UnknownScenario(name.to_string()))
}

pub fn get(name: &str) -> Result<PiecewiseSystem> {
    parse_scenario(source(name)?)
}

/// A catalog name, or otherwise a path to a scenario file.
pub fn load(name_or_path: &str) -> Result<PiecewiseSystem> {
    if let Ok(src) = source(name_or_path) {
        return parse_scenario(src);
    }
    match std::fs::read_to_string(name_or_path) {
        Ok(text) => parse_scenario(&text),
        Err(_) => Err(Error::UnknownScenario(name_or_path.to_string())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StripeMode {
    Torus,
    Klein,
}

/// Constant fields `(a_i, b_i)` on horizontal stripes of `[0,width] x [0,h_n]`.
///
/// Stripe `i` (1-based) lies between `h_{i-1}` and `h_i` with `h_0 = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripedSpec {
    pub mode: StripeMode,
    #[serde(default)]
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// Upper stripe boundaries; defaults to equal stripes of total height 1.
    #[serde(default)]
    pub heights: Vec<f64>,
    #[serde(default = "one")]
    pub width: f64,
}

fn one() -> f64 {
    1.0
}

impl StripedSpec {
    pub fn n(&self) -> usize {
        self.b.len()
    }

    pub fn a_values(&self) -> Vec<f64> {
        if self.a.is_empty() {
            vec![0.0; self.n()]
        } else {
            self.a.clone()
        }
    }

    pub fn boundaries(&self) -> Vec<f64> {
        if self.heights.is_empty() {
            let n = self.n();
            (1..=n).map(|i| i as f64 / n as f64).collect()
        } else {
            self.heights.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if n == 0 {
            return Err(Error::InvalidArgument("stripe spec needs at least one stripe".into()));
        }
        if !self.a.is_empty() && self.a.len() != n {
            return Err(Error::InvalidArgument(format!("expected {n} values of a, got {}", self.a.len())));
        }
        if let Some(bad) = self.b.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
            return Err(Error::InvalidArgument(format!("b must be positive, got {bad}")));
        }
        if self.a.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidArgument("a must be finite".into()));
        }
        let h = self.boundaries();
        if h.len() != n {
            return Err(Error::InvalidArgument(format!("expected {n} heights, got {}", h.len())));
        }
        let mut prev = 0.0;
        for &v in &h {
            if !(v > prev && v.is_finite()) {
                return Err(Error::InvalidArgument("heights must satisfy 0 < h_1 < ... < h_n".into()));
            }
            prev = v;
        }
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(Error::InvalidArgument("width must be positive".into()));
        }
        Ok(())
    }

    /// Scenario text for these stripes, optionally with per-stripe densities.
    pub fn scenario_text(&self, densities: Option<&[f64]>) -> Result<String> {
        use std::fmt::Write;
        self.validate()?;
        let n = self.n();
        let h = self.boundaries();
        let a = self.a_values();
        let mode = match self.mode {
            StripeMode::Torus => "torus",
            StripeMode::Klein => "klein",
        };
        let mut s = String::new();
        let _ = writeln!(s, "name = \"striped_{mode}_{n}\"");
        let _ = writeln!(
            s,
            "domain {{ mode = {mode}, x0 = 0, y0 = 0, p = {:?}, q = {:?} }}",
            self.width,
            h[n - 1]
        );
        for hi in &h[..n - 1] {
            let _ = writeln!(s, "surface {{ h = \"y - {hi:?}\" }}");
        }
        for k in 1..=n {
            let sig: String = (1..n).map(|j| if j < k { '+' } else { '-' }).collect();
            let _ = write!(
                s,
                "piece {{ name = \"stripe{k}\", signature = \"{sig}\", fx = \"{:?}\", fy = \"{:?}\"",
                a[k - 1],
                self.b[k - 1]
            );
            if let Some(d) = densities {
                let _ = write!(s, ", density = \"{:?}\"", d[k - 1]);
            }
            s.push_str(" }\n");
        }
        Ok(s)
    }

    pub fn build(&self, densities: Option<&[f64]>) -> Result<PiecewiseSystem> {
        parse_scenario(&self.scenario_text(densities)?)
    }

    /// Recover the stripe description of a system made of constant fields on
    /// horizontal bands, with the piece index of each stripe.
    pub fn from_system(sys: &PiecewiseSystem) -> Result<(Self, Vec<usize>)> {
        let d = sys.domain;
        let mode = match d.mode {
            DomainMode::Torus => StripeMode::Torus,
            DomainMode::KleinBottle => StripeMode::Klein,
            DomainMode::Plane => return Err(Error::InvalidArgument("striped systems live on the torus or the Klein bottle".into())),
        };
        let probes = [Vec2::new(d.x0, d.y0), Vec2::new(d.x0 + 0.37 * d.p, d.y0 + 0.61 * d.q)];
        let mut cuts = Vec::new();
        for s in &sys.surfaces {
            for &q in &probes {
                let g = s.gradient(q)?;
                if g.x != 0.0 || (g.y - 1.0).abs() > 1e-14 {
                    return Err(Error::InvalidArgument("switching surfaces must be horizontal lines y = c".into()));
                }
            }
            let c = probes[0].y - s.value(probes[0])? - d.y0;
            if !(c > 0.0 && c < d.q) {
                return Err(Error::InvalidArgument("stripe boundary outside the domain".into()));
            }
            cuts.push(c);
        }
        cuts.sort_by(f64::total_cmp);
        cuts.push(d.q);
        let (mut a, mut b, mut pieces) = (Vec::new(), Vec::new(), Vec::new());
        let mut lo = 0.0;
        for &hi in &cuts {
            let mid = Vec2::new(d.x0 + 0.5 * d.p, d.y0 + 0.5 * (lo + hi));
            let k = sys.piece_near(mid)?;
            let pc = &sys.pieces[k];
            if !(pc.fx.is_constant() && pc.fy.is_constant()) {
                return Err(Error::InvalidArgument(format!("piece `{}` is not a constant field", pc.name)));
            }
            let f = pc.field(mid)?;
            a.push(f.x);
            b.push(f.y);
            pieces.push(k);
            lo = hi;
        }
        let spec = StripedSpec { mode, a, b, heights: cuts, width: d.p };
        spec.validate()?;
        Ok((spec, pieces))
    }

    pub fn domain_mode(&self) -> DomainMode {
        match self.mode {
            StripeMode::Torus => DomainMode::Torus,
            StripeMode::Klein => DomainMode::KleinBottle,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec2;

    #[test]
    fn every_entry_loads() {
        for name in names() {
            let sys = get(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(sys.name, name);
        }
        assert_eq!(names().count(), 11);
    }

    #[test]
    fn catalog_examples() {
        let z1 = get("z1").unwrap();
        assert_eq!((z1.pieces.len(), z1.surfaces.len(), z1.domain.mode), (2, 1, DomainMode::Plane));
        let ex43 = get("ex43").unwrap();
        assert_eq!((ex43.pieces.len(), ex43.surfaces.len()), (3, 2));
        assert_eq!(ex43.domain.mode, DomainMode::Torus);
        assert!((ex43.domain.p - std::f64::consts::PI).abs() < 1e-15);
        assert_eq!((ex43.domain.y0, ex43.domain.y1()), (-1.5, 3.0));
        assert!(matches!(get("nope"), Err(Error::UnknownScenario(_))));
    }

    #[test]
    fn load_by_path() {
        let dir = std::env::temp_dir().join(format!("filippov-scn-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("z1.scn");
        std::fs::write(&path, source("z1").unwrap()).unwrap();
        let sys = load(path.to_str().unwrap()).unwrap();
        assert_eq!(sys.pieces.len(), 2);
        let _ = std::fs::remove_dir_all(dir);
    }

    #[test]
    fn builder_matches_catalog_file() {
        let spec = StripedSpec {
            mode: StripeMode::Torus,
            a: vec![0.5, -0.25, 1.0],
            b: vec![1.0, 2.0, 4.0],
            heights: vec![],
            width: 1.0,
        };
        let built = spec.build(None).unwrap();
        let file = get("striped_torus").unwrap();
        for &(x, y) in &[(0.1, 0.1), (0.7, 0.5), (0.3, 0.9)] {
            let p = Vec2::new(x, y);
            let a = built.field(built.active_piece(p).unwrap(), p).unwrap();
            let b = file.field(file.active_piece(p).unwrap(), p).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn ex43_perturbed_keeps_its_cycles_invariant() {
        let sys = get("ex43_perturbed").unwrap();
        for i in 1..40 {
            let x = i as f64 * std::f64::consts::PI / 40.0;
            let g = (2.0 * x).sin().powi(2);
            let dg = 2.0 * (4.0 * x).sin();
            for (y, slope) in [(g, dg), (-g, -dg)] {
                if y.abs() < 1e-9 {
                    continue;
                }
                let p = Vec2::new(x, y);
                let f = sys.field(sys.active_piece(p).unwrap(), p).unwrap();
                assert!((f.y - slope * f.x).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn stripes_recovered_from_system() {
        let (spec, pieces) = StripedSpec::from_system(&get("striped_torus").unwrap()).unwrap();
        assert_eq!(spec.b, vec![1.0, 2.0, 4.0]);
        assert_eq!(spec.a, vec![0.5, -0.25, 1.0]);
        assert_eq!(pieces, vec![0, 1, 2]);
        assert!((spec.heights[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!(StripedSpec::from_system(&get("ex43").unwrap()).is_err());
    }

    #[test]
    fn stripe_spec_validation() {
        let bad = StripedSpec { mode: StripeMode::Torus, a: vec![], b: vec![1.0, -1.0], heights: vec![], width: 1.0 };
        assert!(bad.validate().is_err());
        let bad = StripedSpec { mode: StripeMode::Torus, a: vec![], b: vec![1.0, 1.0], heights: vec![0.5, 0.4], width: 1.0 };
        assert!(bad.validate().is_err());
        let single = StripedSpec { mode: StripeMode::Torus, a: vec![], b: vec![3.0], heights: vec![], width: 1.0 };
        assert_eq!(single.build(None).unwrap().surfaces.len(), 0);
    }
}
