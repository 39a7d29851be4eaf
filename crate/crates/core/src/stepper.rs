//! Embedded Runge–Kutta 4(5) steppers, selectable by name.

use crate::error::{Error, Result};
use crate::geometry::Vec2;

/// One embedded step: the propagated (order 5) state and an error estimate.
pub trait Stepper: Send + Sync {
    fn name(&self) -> &'static str;

    fn step(&self, f: &dyn Fn(Vec2) -> Result<Vec2>, y: Vec2, h: f64) -> Result<(Vec2, f64)>;

    /// Order used for step-size control (the lower of the embedded pair plus one).
    fn order(&self) -> u32 {
        5
    }
}

struct Tableau {
    name: &'static str,
    a: &'static [&'static [f64]],
    high: &'static [f64],
    low: &'static [f64],
}

impl Stepper for Tableau {
    fn name(&self) -> &'static str {
        self.name
    }

    fn step(&self, f: &dyn Fn(Vec2) -> Result<Vec2>, y: Vec2, h: f64) -> Result<(Vec2, f64)> {
        let s = self.high.len();
        let mut k = [Vec2::ZERO; 7];
        k[0] = f(y)?;
        for i in 1..s {
            let mut yi = y;
            for (j, aij) in self.a[i - 1].iter().enumerate() {
                if *aij != 0.0 {
                    yi = yi + (h * aij) * k[j];
                }
            }
            k[i] = f(yi)?;
        }
        let mut hi = y;
        let mut diff = Vec2::ZERO;
        for i in 0..s {
            hi = hi + (h * self.high[i]) * k[i];
            diff = diff + (h * (self.high[i] - self.low[i])) * k[i];
        }
        Ok((hi, diff.norm()))
    }
}

static DOPRI5: Tableau = Tableau {
    name: "dopri5",
    a: &[
        &[1.0 / 5.0],
        &[3.0 / 40.0, 9.0 / 40.0],
        &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
        &[19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
        &[9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0],
        &[35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ],
    high: &[35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0],
    low: &[
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ],
};

static RKF45: Tableau = Tableau {
    name: "rkf45",
    a: &[
        &[1.0 / 4.0],
        &[3.0 / 32.0, 9.0 / 32.0],
        &[1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0],
        &[439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0],
        &[-8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0, -11.0 / 40.0],
    ],
    high: &[16.0 / 135.0, 0.0, 6656.0 / 12825.0, 28561.0 / 56430.0, -9.0 / 50.0, 2.0 / 55.0],
    low: &[25.0 / 216.0, 0.0, 1408.0 / 2565.0, 2197.0 / 4104.0, -1.0 / 5.0, 0.0],
};

static CASH_KARP: Tableau = Tableau {
    name: "cash-karp",
    a: &[
        &[1.0 / 5.0],
        &[3.0 / 40.0, 9.0 / 40.0],
        &[3.0 / 10.0, -9.0 / 10.0, 6.0 / 5.0],
        &[-11.0 / 54.0, 5.0 / 2.0, -70.0 / 27.0, 35.0 / 27.0],
        &[1631.0 / 55296.0, 175.0 / 512.0, 575.0 / 13824.0, 44275.0 / 110592.0, 253.0 / 4096.0],
    ],
    high: &[37.0 / 378.0, 0.0, 250.0 / 621.0, 125.0 / 594.0, 0.0, 512.0 / 1771.0],
    low: &[2825.0 / 27648.0, 0.0, 18575.0 / 48384.0, 13525.0 / 55296.0, 277.0 / 14336.0, 1.0 / 4.0],
};

static REGISTRY: &[&'static dyn Stepper] = &[&DOPRI5, &RKF45, &CASH_KARP];

pub const DEFAULT_STEPPER: &str = "dopri5";

pub fn names() -> impl Iterator<Item = &'static str> {
    REGISTRY.iter().map(|s| s.name())
}

pub fn by_name(name: &str) -> Result<&'static dyn Stepper> {
    REGISTRY
        .iter()
        .copied()
        .find(|s| s.name() == name)
        .ok_or_else(|| Error::UnknownStepper(name.to_string()))
}

/// Step-size update for an error estimate `err` against `tol`.
pub fn next_step(h: f64, err: f64, tol: f64, order: u32) -> f64 {
    let factor = if err == 0.0 {
        5.0
    } else {
        (0.9 * (tol / err).powf(1.0 / order as f64)).clamp(0.2, 5.0)
    };
    h * factor
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix2;

    fn linear(y: Vec2) -> Result<Vec2> {
        Ok(Vec2::new(-0.3 * y.x + y.y, -y.x - 0.3 * y.y))
    }

    fn exact(t: f64, y0: Vec2) -> Vec2 {
        let m = Matrix2::new(-0.3, 1.0, -1.0, -0.3) * t;
        let v = m.exp() * nalgebra::Vector2::new(y0.x, y0.y);
        Vec2::new(v.x, v.y)
    }

    fn fixed(s: &dyn Stepper, n: usize) -> Vec2 {
        let h = 1.0 / n as f64;
        let mut y = Vec2::new(1.0, 0.5);
        for _ in 0..n {
            y = s.step(&linear, y, h).unwrap().0;
        }
        y
    }

    #[test]
    fn each_tableau_is_consistent() {
        for t in [&DOPRI5, &RKF45, &CASH_KARP] {
            assert!((t.high.iter().sum::<f64>() - 1.0).abs() < 1e-15, "{}", t.name);
            assert!((t.low.iter().sum::<f64>() - 1.0).abs() < 1e-15, "{}", t.name);
        }
    }

    #[test]
    fn fifth_order_convergence_against_matrix_exponential() {
        let target = exact(1.0, Vec2::new(1.0, 0.5));
        for s in REGISTRY {
            let e1 = (fixed(*s, 8) - target).norm();
            let e2 = (fixed(*s, 16) - target).norm();
            let rate = (e1 / e2).log2();
            assert!(rate > 4.5, "{} observed order {rate}", s.name());
            assert!(e2 < 1e-8, "{} error {e2}", s.name());
        }
    }

    #[test]
    fn error_estimate_tracks_step_size() {
        for s in REGISTRY {
            let (_, e_big) = s.step(&linear, Vec2::new(1.0, 0.0), 0.2).unwrap();
            let (_, e_small) = s.step(&linear, Vec2::new(1.0, 0.0), 0.1).unwrap();
            assert!(e_small < e_big / 16.0, "{}", s.name());
        }
    }

    #[test]
    fn registry_lookup() {
        assert_eq!(names().collect::<Vec<_>>(), ["dopri5", "rkf45", "cash-karp"]);
        assert!(by_name("euler").is_err());
        assert_eq!(by_name(DEFAULT_STEPPER).unwrap().name(), "dopri5");
    }
}
