use serde::Serialize;

use crate::error::Result;
use crate::scenarios::{StripeMode, StripedSpec};

/// Tolerance for the Klein matching condition `a_i/b_i = a_{n-i+1}/b_{n-i+1}`.
const KLEIN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum StripedVerdict {
    Feasible,
    Infeasible { reason: String },
}

#[derive(Debug, Clone, Serialize)]
pub struct StripedSolution {
    /// Probability-normalized densities, one per stripe.
    pub alpha: Vec<f64>,
    /// The same densities scaled so that `alpha_1 = 1`.
    pub ratios: Vec<f64>,
    /// Largest `|b_i alpha_i - b_{i+1} alpha_{i+1}|` over the cyclic system, last equation included.
    pub residual: f64,
    /// Largest `|a_i/b_i - a_{n-i+1}/b_{n-i+1}|` (Klein only).
    pub klein_residual: Option<f64>,
    pub verdict: StripedVerdict,
}

impl StripedSolution {
    pub fn feasible(&self) -> bool {
        self.verdict == StripedVerdict::Feasible
    }
}

/// Solve the cyclic flux system `b_i alpha_i = b_{i+1} alpha_{i+1}` for constant stripe densities.
pub fn solve_striped_density(spec: &StripedSpec) -> Result<StripedSolution> {
    spec.validate()?;
    let n = spec.n();
    let b = &spec.b;
    let a = spec.a_values();
    let h = spec.boundaries();
    // Every equation says b_i alpha_i is one common constant c, so alpha_i = c / b_i.
    let mass: f64 = (0..n).map(|i| (h[i] - if i == 0 { 0.0 } else { h[i - 1] }) / b[i]).sum::<f64>() * spec.width;
    let c = 1.0 / mass;
    let alpha: Vec<f64> = b.iter().map(|bi| c / bi).collect();
    let ratios: Vec<f64> = b.iter().map(|bi| b[0] / bi).collect();
    let residual = (0..n).map(|i| (b[i] * alpha[i] - b[(i + 1) % n] * alpha[(i + 1) % n]).abs()).fold(0.0, f64::max);
    let mut verdict = StripedVerdict::Feasible;
    if alpha.iter().any(|v| !(*v > 0.0)) {
        verdict = StripedVerdict::Infeasible { reason: "densities of adjacent stripes must have the same sign".into() };
    }
    let mut klein_residual = None;
    if spec.mode == StripeMode::Klein {
        let kr = (0..n).map(|i| (a[i] / b[i] - a[n - 1 - i] / b[n - 1 - i]).abs()).fold(0.0, f64::max);
        klein_residual = Some(kr);
        let thick = |i: usize| h[i] - if i == 0 { 0.0 } else { h[i - 1] };
        let asym = (0..n).map(|i| (thick(i) - thick(n - 1 - i)).abs()).fold(0.0, f64::max);
        if kr > KLEIN_TOL {
            let i = (0..n).find(|&i| (a[i] / b[i] - a[n - 1 - i] / b[n - 1 - i]).abs() > KLEIN_TOL).unwrap();
            verdict = StripedVerdict::Infeasible {
                reason: format!(
                    "a_{}/b_{} = {} differs from a_{}/b_{} = {}",
                    i + 1,
                    i + 1,
                    a[i] / b[i],
                    n - i,
                    n - i,
                    a[n - 1 - i] / b[n - 1 - i]
                ),
            };
        } else if asym > KLEIN_TOL * h[n - 1] {
            verdict = StripedVerdict::Infeasible {
                reason: "stripe heights are not symmetric under the Klein reflection".into(),
            };
        }
    }
    Ok(StripedSolution { alpha, ratios, residual, klein_residual, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(mode: StripeMode, a: Vec<f64>, b: Vec<f64>) -> StripedSpec {
        StripedSpec { mode, a, b, heights: vec![], width: 1.0 }
    }

    #[test]
    fn torus_three_stripes() {
        let s = solve_striped_density(&spec(StripeMode::Torus, vec![], vec![1.0, 2.0, 4.0])).unwrap();
        assert!(s.feasible());
        for (got, want) in s.alpha.iter().zip([12.0 / 7.0, 6.0 / 7.0, 3.0 / 7.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        assert_eq!(s.ratios, vec![1.0, 0.5, 0.25]);
        assert!(s.residual <= 1e-14);
    }

    #[test]
    fn single_stripe_is_lebesgue() {
        let s = solve_striped_density(&spec(StripeMode::Torus, vec![0.3], vec![2.5])).unwrap();
        assert_eq!(s.alpha, vec![1.0]);
    }

    #[test]
    fn klein_condition() {
        let bad = solve_striped_density(&spec(StripeMode::Klein, vec![1.0, 2.0], vec![1.0, 1.0])).unwrap();
        assert!(!bad.feasible());
        assert_eq!(bad.klein_residual, Some(1.0));
        let good = solve_striped_density(&spec(StripeMode::Klein, vec![1.0, 0.5, 4.0], vec![1.0, 2.0, 4.0])).unwrap();
        assert!(good.feasible());
    }

    #[test]
    fn klein_needs_symmetric_heights() {
        let mut s = spec(StripeMode::Klein, vec![1.0, 1.0], vec![1.0, 1.0]);
        s.heights = vec![0.3, 1.0];
        assert!(!solve_striped_density(&s).unwrap().feasible());
    }
}
