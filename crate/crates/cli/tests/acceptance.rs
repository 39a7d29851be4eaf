//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines are always printed.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use filippov_core::classify::{scan_surface, sliding_field, Label};
use filippov_core::expr::{parse, Expr, Var};
use filippov_core::flow::{flow_set, FlowOptions, Rect};
use filippov_core::measure::{check_flux, cycle_measure, pushforward_test, return_map, solve_striped_density, Densities, StripedVerdict};
use filippov_core::nonuniqueness::{estimate_saturation, replay_witness, CellFlag, SaturationGrid};
use filippov_core::scenarios::{get, StripeMode, StripedSpec};
use filippov_core::{SurfaceId, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn sliding_formula() -> Check {
    for (name, want) in [("z1", Vec2::new(1.0, 0.0)), ("z2_as_printed", Vec2::ZERO)] {
        let sys = get(name).map_err(e)?;
        for k in 0..32 {
            let x = -4.0 + 8.0 * (k as f64 + 0.5) / 32.0;
            let v = sliding_field(&sys, SurfaceId::Level(0), Vec2::new(x, 0.0)).map_err(e)?;
            ensure((v.x - want.x).abs() <= 1e-12 && (v.y - want.y).abs() <= 1e-12, format!("{name}: Z^s({x}) = {v:?}"))?;
        }
    }
    Ok("Z1 -> (1,0), Z2 as printed -> (0,0) at 32 samples each".into())
}

fn region_classification() -> Check {
    let sys = get("ex43").map_err(e)?;
    let xs = (0.6f64).sqrt().asin();
    let want = [xs, PI - xs];
    for (j, off_label) in [(0usize, None), (1usize, Some(Label::Crossing))] {
        let scan = scan_surface(&sys, SurfaceId::Level(j), 512).map_err(e)?;
        ensure(scan.tangencies.len() == 2, format!("surface {j}: {} tangencies", scan.tangencies.len()))?;
        for (t, w) in scan.tangencies.iter().zip(want) {
            ensure((t.param - w).abs() <= 1e-6, format!("surface {j}: tangency at {} vs {w}", t.param))?;
        }
        for s in &scan.samples {
            if want.iter().any(|w| (s.param - w).abs() < 1e-6) {
                continue;
            }
            match off_label {
                None => ensure(matches!(s.label, Label::Sliding | Label::Escaping), format!("surface 0 at {}: {}", s.param, s.label))?,
                Some(l) => ensure(s.label == l, format!("surface 1 at {}: {}", s.param, s.label))?,
            }
        }
    }
    Ok(format!("tangencies at {:.6} and {:.6} on both surfaces", want[0], want[1]))
}

fn striped_solver() -> Check {
    let t = StripedSpec { mode: StripeMode::Torus, a: vec![], b: vec![1.0, 2.0, 4.0], heights: vec![], width: 1.0 };
    let s = solve_striped_density(&t).map_err(e)?;
    ensure(s.ratios == vec![1.0, 0.5, 0.25], format!("ratios {:?}", s.ratios))?;
    ensure(s.residual <= 1e-14, format!("residual {}", s.residual))?;
    let k = StripedSpec { mode: StripeMode::Klein, a: vec![1.0, 2.0], b: vec![1.0, 1.0], heights: vec![], width: 1.0 };
    let bad = solve_striped_density(&k).map_err(e)?;
    ensure(matches!(bad.verdict, StripedVerdict::Infeasible { .. }), "Klein (1,1),(2,1) not flagged")?;
    let good = StripedSpec { mode: StripeMode::Klein, a: vec![1.0, 0.5, 4.0], b: vec![1.0, 2.0, 4.0], heights: vec![], width: 1.0 };
    ensure(solve_striped_density(&good).map_err(e)?.feasible(), "symmetric Klein stripes flagged")?;
    Ok(format!("alpha = {:?}, residual {:e}; Klein violation flagged", s.alpha, s.residual))
}

fn flux_checker() -> Check {
    let ff = check_flux(&get("foldfold_center").map_err(e)?, &Densities::Scenario, 128).map_err(e)?;
    ensure(ff.max_residual <= 1e-12, format!("fold-fold residual {}", ff.max_residual))?;
    let z1 = check_flux(&get("z1").map_err(e)?, &Densities::Scenario, 128).map_err(e)?;
    ensure(z1.max_residual == 2.0 && z1.violation().is_some(), format!("Z1 residual {}", z1.max_residual))?;
    let e44 = check_flux(&get("ex44").map_err(e)?, &Densities::Scenario, 129).map_err(e)?;
    let sigma = e44.surface(SurfaceId::Level(0)).ok_or("no surface 0")?;
    ensure((sigma.max_abs - 2.0).abs() <= 1e-12, format!("ex44 residual {}", sigma.max_abs))?;
    ensure(sigma.witness.is_some() && e44.violation().is_some(), "ex44 without witness")?;
    Ok(format!(
        "fold-fold {:e}, Z1 {} at {:?}, ex44 {} at {:?}",
        ff.max_residual,
        z1.max_residual,
        z1.surfaces[0].witness.unwrap(),
        sigma.max_abs,
        sigma.witness.unwrap()
    ))
}

fn striped_sets() -> Vec<Rect> {
    vec![
        Rect::new(0.1, 0.05, 0.35, 0.3).unwrap(),
        Rect::new(0.4, 0.25, 0.7, 0.5).unwrap(),
        Rect::new(0.2, 0.6, 0.9, 0.95).unwrap(),
    ]
}

fn pushforward_invariance() -> Check {
    let spec = StripedSpec { mode: StripeMode::Torus, a: vec![0.5, -0.25, 1.0], b: vec![1.0, 2.0, 4.0], heights: vec![], width: 1.0 };
    let alpha = solve_striped_density(&spec).map_err(e)?.alpha;
    let sys = spec.build(Some(&alpha)).map_err(e)?;
    let opts = FlowOptions::default();
    let times = [0.5, 1.0, 2.0];
    let solved = pushforward_test(&sys, &Densities::Scenario, &striped_sets(), &times, 8, &opts).map_err(e)?;
    let worst = solved.iter().map(|p| p.relative_error).fold(0.0, f64::max);
    ensure(worst <= 0.02, format!("solved density error {worst}"))?;
    let unit = pushforward_test(&sys, &Densities::Unit, &striped_sets(), &times, 8, &opts).map_err(e)?;
    let best_unit = unit.iter().map(|p| p.relative_error).fold(0.0, f64::max);
    ensure(best_unit >= 0.05, format!("unit density error only {best_unit}"))?;
    Ok(format!("max error {worst:.4} with solved density, {best_unit:.3} with f = 1"))
}

fn collapse_witness() -> Check {
    let z1 = get("z1").map_err(e)?;
    let a = Rect::new(0.0, 0.3, 0.2, 0.5).unwrap();
    let opts = FlowOptions::default();
    let mut ratios = Vec::new();
    for res in [4, 8, 16] {
        let nu_a = flow_set(&z1, &[a], 0.0, res, &opts).map_err(e)?.area();
        let nu_img = flow_set(&z1, &[a], 1.0, res, &opts).map_err(e)?.area();
        ratios.push(nu_img / nu_a);
    }
    ensure(ratios[2] <= 0.1, format!("ratio {} at resolution 16", ratios[2]))?;
    ensure(ratios[0] > ratios[1] && ratios[1] > ratios[2], format!("not decreasing: {ratios:?}"))?;
    Ok(format!("nu(Z_1(A))/nu(A) = {:.2e}, {:.2e}, {:.2e} at resolution 4, 8, 16", ratios[0], ratios[1], ratios[2]))
}

fn saturation(ex43: &SaturationGrid) -> Check {
    let opts = FlowOptions::default();
    let s42 = get("ex42").map_err(e)?;
    let g42 = estimate_saturation(&s42, 64, 64, 2.0, 64, &opts).map_err(e)?;
    ensure(g42.fraction == 1.0, format!("ex42 fraction {}", g42.fraction))?;
    let s43 = get("ex43").map_err(e)?;
    ensure((ex43.fraction - 0.444).abs() <= 0.03, format!("ex43 fraction {}", ex43.fraction))?;
    let pitch = s43.domain.q / ex43.ny as f64;
    let mut outside = 0;
    for j in 0..ex43.ny {
        for i in 0..ex43.nx {
            if ex43.in_sat(i, j) && ex43.center(&s43, i, j).y.abs() >= 1.0 + 2.0 * pitch {
                outside += 1;
            }
        }
    }
    ensure(outside == 0, format!("{outside} InSat cells outside the band"))?;
    let mut replayed = 0;
    for j in (0..ex43.ny).step_by(7) {
        for i in (0..ex43.nx).step_by(13) {
            if let CellFlag::InSat { witness } = ex43.flag(i, j) {
                ensure(replay_witness(&s43, ex43.center(&s43, i, j), witness, &opts).map_err(e)?, format!("witness of cell ({i},{j}) did not replay"))?;
                replayed += 1;
            }
        }
    }
    Ok(format!("ex42 {}, ex43 {:.4} with no cells outside |y| < 1 + 2 pitch, {replayed} witnesses replayed", g42.fraction, ex43.fraction))
}

fn cycle_direction(ex43: &SaturationGrid) -> Check {
    let sys = get("ex43").map_err(e)?;
    let opts = FlowOptions::default();
    let m = cycle_measure(&sys, Vec2::new(0.0, 1.0), PI, &opts).map_err(e)?;
    ensure(m.closure_error <= 1e-6, format!("closure {}", m.closure_error))?;
    let whole = Rect::new(0.0, 0.5, PI, 1.5).unwrap();
    ensure((m.measure_of(&sys, &whole).map_err(e)? - 1.0).abs() <= 1e-9, "whole-cycle box does not have measure 1")?;
    let mut worst: f64 = 0.0;
    for b in [Rect::new(0.5, 0.9, 1.5, 1.1).unwrap(), Rect::new(2.0, 0.0, 3.0, 2.0).unwrap()] {
        let nu = m.measure_of(&sys, &b).map_err(e)?;
        for t in [1.0, PI] {
            worst = worst.max((m.pushforward_of(&sys, &b, t).map_err(e)? - nu).abs());
        }
    }
    ensure(worst <= 1e-6, format!("push-forward error {worst}"))?;
    let d = sys.domain;
    for &(_, p) in &m.samples {
        let c = d.canonicalize(p);
        let i = (((c.x - d.x0) / d.p * ex43.nx as f64) as usize).min(ex43.nx - 1);
        let j = (((c.y - d.y0) / d.q * ex43.ny as f64) as usize).min(ex43.ny - 1);
        ensure(!ex43.in_sat(i, j), format!("cycle point {c:?} lies in an InSat cell"))?;
    }
    Ok(format!("closure {:.1e}, push-forward error {worst:.1e}, cycle avoids the saturation estimate", m.closure_error))
}

fn center_test() -> Check {
    let opts = FlowOptions::default();
    let offs = [0.1, 0.2, 0.4];
    let c = return_map(&get("foldfold_center").map_err(e)?, 0, Vec2::ZERO, &offs, &opts).map_err(e)?;
    ensure(c.center && c.max_deviation <= 1e-6, format!("centre deviation {}", c.max_deviation))?;
    let p = return_map(&get("foldfold_perturbed").map_err(e)?, 0, Vec2::ZERO, &offs, &opts).map_err(e)?;
    ensure(!p.center && p.max_deviation > 1e-3, format!("perturbed deviation {}", p.max_deviation))?;
    Ok(format!("identity within {:.1e}; perturbed returns {:?}", c.max_deviation, p.returns))
}

fn random_expr(rng: &mut ChaCha8Rng, depth: usize) -> String {
    if depth == 0 || rng.gen_bool(0.2) {
        return match rng.gen_range(0..3) {
            0 => "x".into(),
            1 => "y".into(),
            _ => format!("{:.3}", rng.gen_range(-2.0..2.0)),
        };
    }
    let a = random_expr(rng, depth - 1);
    match rng.gen_range(0..9) {
        0 => format!("({a} + {})", random_expr(rng, depth - 1)),
        1 => format!("({a} - {})", random_expr(rng, depth - 1)),
        2 => format!("({a} * {})", random_expr(rng, depth - 1)),
        3 => format!("({a} / (2 + sin({})))", random_expr(rng, depth - 1)),
        4 => format!("sin({a})"),
        5 => format!("cos({a})"),
        6 => format!("sqrt(1 + ({a})^2)"),
        7 => format!("({a})^{}", rng.gen_range(2..4)),
        _ => format!("-{a}"),
    }
}

fn derivative_fuzz() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let src = random_expr(&mut rng, 5);
        let ex = parse(&src).map_err(|err| format!("`{src}`: {err}"))?;
        for var in [Var::X, Var::Y] {
            let d = ex.differentiate(var).map_err(e)?;
            for _ in 0..4 {
                let (x, y) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let (dx, dy) = if var == Var::X { (h, 0.0) } else { (0.0, h) };
                let fd = (ex.eval(x + dx, y + dy).map_err(e)? - ex.eval(x - dx, y - dy).map_err(e)?) / (2.0 * h);
                let sym = d.eval(x, y).map_err(e)?;
                let rel = (sym - fd).abs() / sym.abs().max(1.0);
                worst = worst.max(rel);
                ensure(rel <= 1e-6, format!("`{src}` d/{var:?} at ({x},{y}): {sym} vs {fd}"))?;
            }
        }
    }
    let tokens = ["x", "y", "1", "2.5", "pi", "sqrt3", "sin", "cos", "sqrt", "abs", "(", ")", "+", "-", "*", "/", "^", ",", ".", "e", "1e", "$", " "];
    let mut parsed = 0;
    for _ in 0..5000 {
        let n = rng.gen_range(0..12);
        let s: String = (0..n).map(|_| tokens[rng.gen_range(0..tokens.len())]).collect();
        let r = std::panic::catch_unwind(|| parse(&s).map(|ex: Expr| ex.eval(0.3, -0.7)));
        ensure(r.is_ok(), format!("parser panicked on `{s}`"))?;
        if matches!(r, Ok(Ok(_))) {
            parsed += 1;
        }
    }
    Ok(format!("100 expressions, worst relative derivative error {worst:.1e}; 5000 token streams without a crash ({parsed} parsed)"))
}

fn strip_timestamp(s: &str) -> String {
    s.lines().filter(|l| !l.trim_start().starts_with("\"timestamp\"")).collect::<Vec<_>>().join("\n")
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_filippov")).args(args).output().map_err(e)?;
    ensure(out.status.success(), format!("`{}` failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr)))
}

fn determinism(dir: &Path) -> Check {
    let runs: Vec<(&str, Vec<&str>)> = vec![
        ("classify", vec!["classify", "--scenario", "ex43", "--surface", "0", "--samples", "64"]),
        ("integrate", vec!["integrate", "--scenario", "z1", "--start", "0,0", "--time", "-1"]),
        ("flowset", vec!["flowset", "--scenario", "striped_torus", "--box", "0.1,0.1,0.4,0.3", "--time", "1", "--res", "6"]),
        ("satnz", vec!["satnz", "--scenario", "ex43", "--grid", "16x16", "--horizon", "4"]),
        ("check-measure", vec!["check-measure", "--scenario", "striped_torus", "--solved-density", "--set", "0.1,0.1,0.4,0.3", "--times", "0.5,1", "--res", "6"]),
        ("density-solve", vec!["density-solve", "--stripes", r#"{"mode":"torus","b":[1,2,4]}"#]),
        ("return-map", vec!["return-map", "--scenario", "foldfold_center"]),
        ("catalog", vec!["catalog"]),
    ];
    for (name, args) in &runs {
        let first = dir.join(format!("{name}.json"));
        let second = dir.join(format!("{name}.again.json"));
        let mut a = args.clone();
        let fp = first.to_string_lossy().to_string();
        a.extend(["--out", fp.as_str()]);
        run_cli(&a)?;
        let sp = second.to_string_lossy().to_string();
        run_cli(&["rerun", fp.as_str(), "--out", sp.as_str()])?;
        let x = std::fs::read_to_string(&first).map_err(e)?;
        let y = std::fs::read_to_string(&second).map_err(e)?;
        ensure(x.contains("\"schema_version\": 1"), format!("{name}: no schema version"))?;
        ensure(strip_timestamp(&x) == strip_timestamp(&y), format!("{name}: rerun output differs"))?;
    }
    Ok(format!("{} subcommands reproduce byte-identical JSON", runs.len()))
}

fn main() {
    let start = Instant::now();
    let tmp = tempfile::tempdir().expect("temporary directory");
    let ex43 = get("ex43").and_then(|s| estimate_saturation(&s, 96, 96, 20.0, 64, &FlowOptions::default()));
    let grid_check = |f: fn(&SaturationGrid) -> Check| -> Check {
        match &ex43 {
            Ok(g) => f(g),
            Err(err) => Err(err.to_string()),
        }
    };
    let results: Vec<(&str, Check)> = vec![
        ("sliding formula", sliding_formula()),
        ("region classification", region_classification()),
        ("striped density solver", striped_solver()),
        ("flux checker", flux_checker()),
        ("push-forward invariance", pushforward_invariance()),
        ("collapse witness", collapse_witness()),
        ("saturation estimates", grid_check(saturation)),
        ("invariant measure on a limit cycle", grid_check(cycle_direction)),
        ("fold-fold centre test", center_test()),
        ("parser and differentiation fuzz", derivative_fuzz()),
        ("CLI determinism", determinism(tmp.path())),
    ];
    let mut failed = 0;
    for (k, (name, r)) in results.iter().enumerate() {
        match r {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed in {:.1} s", results.len() - failed, results.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
