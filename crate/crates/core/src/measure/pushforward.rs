use serde::Serialize;

use super::{Densities, Witness, PUSHFORWARD_THRESHOLD};
use crate::error::{Error, Result};
use crate::flow::{flow_set, FlowOptions, Rect};
use crate::system::PiecewiseSystem;

#[derive(Debug, Clone, Serialize)]
pub struct PushforwardError {
    pub set: usize,
    pub time: f64,
    pub resolution: usize,
    /// `nu(A)` on the time-zero cover.
    pub nu_set: f64,
    /// `nu(Z_t(A))` on the time-`t` cover.
    pub nu_image: f64,
    pub relative_error: f64,
    pub truncated: usize,
}

impl PushforwardError {
    pub fn violation(&self) -> Option<Witness> {
        (self.relative_error > PUSHFORWARD_THRESHOLD).then_some(Witness::Pushforward {
            set: self.set,
            time: self.time,
            error: self.relative_error,
        })
    }
}

/// Compare `nu(A)` with `nu(Z_t(A))` for each set and time, both by midpoint
/// quadrature on the pixels of a flow cover at the same resolution.
pub fn pushforward_test(
    sys: &PiecewiseSystem,
    dens: &Densities,
    sets: &[Rect],
    times: &[f64],
    res: usize,
    opts: &FlowOptions,
) -> Result<Vec<PushforwardError>> {
    let f = |p| dens.value(sys, p);
    let mut out = Vec::new();
    for (k, set) in sets.iter().enumerate() {
        let nu_set = flow_set(sys, std::slice::from_ref(set), 0.0, res, opts)?.integral(&f)?;
        if !(nu_set.abs() > 0.0) {
            return Err(Error::InvalidArgument(format!("set {k} has zero measure")));
        }
        for &t in times {
            let cover = flow_set(sys, std::slice::from_ref(set), t, res, opts)?;
            let nu_image = cover.integral(&f)?;
            out.push(PushforwardError {
                set: k,
                time: t,
                resolution: res,
                nu_set,
                nu_image,
                relative_error: (nu_image - nu_set).abs() / nu_set.abs(),
                truncated: cover.truncated,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::solve_striped_density;
    use crate::scenarios::{get, StripeMode, StripedSpec};

    fn sets() -> Vec<Rect> {
        vec![
            Rect::new(0.1, 0.05, 0.35, 0.3).unwrap(),
            Rect::new(0.4, 0.25, 0.7, 0.5).unwrap(),
            Rect::new(0.2, 0.6, 0.9, 0.95).unwrap(),
        ]
    }

    #[test]
    fn striped_torus_with_solved_density() {
        let spec = StripedSpec { mode: StripeMode::Torus, a: vec![0.5, -0.25, 1.0], b: vec![1.0, 2.0, 4.0], heights: vec![], width: 1.0 };
        let alpha = solve_striped_density(&spec).unwrap().alpha;
        let sys = spec.build(Some(&alpha)).unwrap();
        let errs = pushforward_test(&sys, &Densities::Scenario, &sets(), &[0.5, 1.0, 2.0], 8, &FlowOptions::default()).unwrap();
        for e in &errs {
            assert!(e.relative_error <= 0.02, "{e:?}");
        }
        let unit = pushforward_test(&sys, &Densities::Unit, &sets(), &[0.5, 1.0, 2.0], 8, &FlowOptions::default()).unwrap();
        assert!(unit.iter().any(|e| e.relative_error >= 0.05));
    }

    #[test]
    fn identity_error_shrinks() {
        let sys = get("ex43").unwrap();
        let a = [Rect::new(0.5, 0.2, 1.0, 0.9).unwrap()];
        let e = pushforward_test(&sys, &Densities::Unit, &a, &[0.0], 4, &FlowOptions::default()).unwrap();
        assert!(e[0].relative_error < 1e-12);
    }
}
