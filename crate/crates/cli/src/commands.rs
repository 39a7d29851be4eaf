use std::fmt::Write as _;
use std::path::PathBuf;

use filippov_core::classify::scan_surface;
use filippov_core::expr::Expr;
use filippov_core::flow::{flow_point, flow_set, ArcMode, BranchTree, FlowOptions, Policy, Rect};
use filippov_core::measure::{measure_report, return_map, solve_striped_density, Densities};
use filippov_core::nonuniqueness::{estimate_saturation, seed_set, CellFlag};
use filippov_core::scenarios::{self, StripedSpec};
use filippov_core::{PiecewiseSystem, SurfaceId, Vec2};
use serde::Serialize;
use serde_json::Value;

use crate::args::*;
use crate::output::{envelope, Emission};
use crate::svg::{label_colour, Plot};

pub enum Failure {
    /// Bad flag value found after parsing; exit code 2.
    Usage { flag: &'static str, message: String },
    Compute { error: filippov_core::Error, detail: Option<Value> },
    Io(String),
}

impl From<filippov_core::Error> for Failure {
    fn from(error: filippov_core::Error) -> Self {
        Failure::Compute { error, detail: None }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Out = Result<Emission, Failure>;

fn usage(flag: &'static str, message: impl Into<String>) -> Failure {
    Failure::Usage { flag, message: message.into() }
}

fn load(name: &str) -> Result<PiecewiseSystem, Failure> {
    scenarios::load(name).map_err(|e| match e {
        filippov_core::Error::UnknownScenario(_) => usage("--scenario", e.to_string()),
        other => other.into(),
    })
}

fn flow_options(i: &Integration) -> Result<FlowOptions, Failure> {
    let mut o = FlowOptions::default().with_stepper(&i.stepper).map_err(|e| usage("--stepper", e.to_string()))?;
    o.tol = i.tol;
    o.h_max = i.h_max;
    Ok(o)
}

fn domain_rect(sys: &PiecewiseSystem) -> Rect {
    let d = sys.domain;
    Rect { x0: d.x0, y0: d.y0, x1: d.x1(), y1: d.y1() }
}

fn json_only<T: Serialize>(cfg: &Command, result: &T) -> Out {
    Ok(Emission { json: envelope(cfg, result)?, csv: None, svg: None })
}

/// Split a polyline where it jumps across a seam.
fn pieces_of(sys: &PiecewiseSystem, pts: &[Vec2]) -> Vec<Vec<Vec2>> {
    let d = sys.domain;
    let jump = 0.5 * d.p.min(d.q);
    let mut out: Vec<Vec<Vec2>> = vec![Vec::new()];
    for &q in pts {
        let cur = out.last_mut().unwrap();
        if let Some(&last) = cur.last() {
            if (q - last).norm() > jump {
                out.push(Vec::new());
            }
        }
        out.last_mut().unwrap().push(q);
    }
    out
}

fn surface_id(sys: &PiecewiseSystem, s: &str) -> Result<SurfaceId, Failure> {
    let id: SurfaceId = s.parse().map_err(|e: filippov_core::Error| usage("--surface", e.to_string()))?;
    let ok = match id {
        SurfaceId::Level(j) => j < sys.surfaces.len(),
        SurfaceId::Seam(seam) => sys.domain.seams().contains(&seam),
    };
    if !ok {
        return Err(usage("--surface", format!("scenario has no surface `{s}`")));
    }
    Ok(id)
}

pub fn classify(a: &ClassifyArgs, cfg: &Command) -> Out {
    let sys = load(&a.scenario)?;
    let id = surface_id(&sys, &a.surface)?;
    let scan = scan_surface(&sys, id, a.samples as usize)?;
    let mut csv = String::from("param,x,y,f_plus_h,f_minus_h,label\n");
    for s in &scan.samples {
        let _ = writeln!(csv, "{},{},{},{},{},{}", s.param, s.point.x, s.point.y, s.f_plus_h, s.f_minus_h, s.label);
    }
    #[derive(Serialize)]
    struct R<'a> {
        scenario: &'a str,
        scan: &'a filippov_core::classify::SurfaceScan,
    }
    let (lo, hi) = scan.range;
    let mut plot = Plot::new(Rect { x0: lo, y0: 0.0, x1: hi, y1: 0.15 * (hi - lo) }, 640.0);
    for iv in &scan.intervals {
        let r = Rect { x0: iv.start, y0: 0.0, x1: iv.end, y1: 0.1 * (hi - lo) };
        plot.rect(&r, label_colour(&iv.label.to_string()), 0.8);
    }
    for t in &scan.tangencies {
        plot.marker(Vec2::new(t.param, 0.05 * (hi - lo)), "black");
    }
    plot.label(Vec2::new(lo, 0.13 * (hi - lo)), "crossing blue, sliding red, escaping orange, tangencies black");
    let svg = plot.finish(&format!("{} surface {}", sys.name, id));
    Ok(Emission { json: envelope(cfg, &R { scenario: &sys.name, scan: &scan })?, csv: Some(csv), svg: Some(svg) })
}

fn mode_name(sys: &PiecewiseSystem, m: &ArcMode) -> String {
    match m {
        ArcMode::Free { piece } => format!("free:{}", sys.pieces[*piece].name),
        ArcMode::Sliding { surface } => format!("sliding:{surface}"),
    }
}

fn trajectory_svg(sys: &PiecewiseSystem, tree: &BranchTree, title: &str) -> String {
    let mut plot = Plot::new(domain_rect(sys), 560.0);
    for node in &tree.nodes {
        for arc in &node.arcs {
            let pts: Vec<Vec2> = arc.samples.iter().map(|s| s.1).collect();
            let colour = match arc.mode {
                ArcMode::Free { .. } => "#4c78a8",
                ArcMode::Sliding { .. } => "#e45756",
            };
            for part in pieces_of(sys, &pts) {
                plot.polyline(&part, colour);
            }
        }
    }
    for e in tree.endpoints() {
        plot.marker(e, "black");
    }
    plot.finish(title)
}

pub fn integrate(a: &IntegrateArgs, cfg: &Command) -> Out {
    let sys = load(&a.scenario)?;
    let opts = flow_options(&a.integration)?;
    let policy = match a.policy {
        PolicyArg::Det => Policy::Deterministic,
        PolicyArg::All => Policy::AllBranches { cap: a.cap },
    };
    let tree = flow_point(&sys, a.start, a.time, policy, &opts)?;
    let mut csv = String::from("t,x,y,mode,branch-id\n");
    for (k, node) in tree.nodes.iter().enumerate() {
        for arc in &node.arcs {
            let m = mode_name(&sys, &arc.mode);
            for (t, p) in &arc.samples {
                let _ = writeln!(csv, "{t},{},{},{m},{k}", p.x, p.y);
            }
        }
    }
    #[derive(Serialize)]
    struct R<'a> {
        scenario: &'a str,
        endpoints: Vec<Vec2>,
        truncated: bool,
        tree: &'a BranchTree,
    }
    let svg = trajectory_svg(&sys, &tree, &format!("{} from ({}, {})", sys.name, a.start.x, a.start.y));
    let r = R { scenario: &sys.name, endpoints: tree.endpoints(), truncated: tree.truncated, tree: &tree };
    Ok(Emission { json: envelope(cfg, &r)?, csv: Some(csv), svg: Some(svg) })
}

pub fn flowset(a: &FlowsetArgs, cfg: &Command) -> Out {
    let sys = load(&a.scenario)?;
    let opts = flow_options(&a.integration)?;
    if a.res == 0 {
        return Err(usage("--res", "must be positive"));
    }
    let cover = flow_set(&sys, &a.boxes, a.time, a.res, &opts).map_err(|e| match e {
        filippov_core::Error::InvalidArgument(m) => usage("--box", m),
        other => other.into(),
    })?;
    let rects = cover.rects();
    #[derive(Serialize)]
    struct R<'a> {
        scenario: &'a str,
        input_area: f64,
        area: f64,
        cover: &'a filippov_core::flow::BoxCover,
        rects: &'a [Rect],
    }
    let mut plot = Plot::new(domain_rect(&sys), 560.0);
    for b in &a.boxes {
        plot.rect(b, "#999999", 0.3);
    }
    for r in &rects {
        plot.rect(r, "#e45756", 0.8);
    }
    let svg = plot.finish(&format!("{}: image of {} box(es) at t = {}", sys.name, a.boxes.len(), a.time));
    let r = R {
        scenario: &sys.name,
        input_area: a.boxes.iter().map(Rect::area).sum(),
        area: cover.area(),
        cover: &cover,
        rects: &rects,
    };
    Ok(Emission { json: envelope(cfg, &r)?, csv: None, svg: Some(svg) })
}

pub fn satnz(a: &SatnzArgs, cfg: &Command) -> Out {
    let sys = load(&a.scenario)?;
    let opts = flow_options(&a.integration)?;
    if !(a.horizon > 0.0) {
        return Err(usage("--horizon", "must be positive"));
    }
    if a.seed_samples < 16 {
        return Err(usage("--seed-samples", "need at least 16"));
    }
    let seeds = seed_set(&sys, a.seed_samples)?;
    let (nx, ny) = a.grid;
    let grid = estimate_saturation(&sys, nx, ny, a.horizon, a.cap, &opts)?;
    let undecided = grid.cells.iter().filter(|c| matches!(c, CellFlag::Undecided { .. })).count();
    let in_sat = grid.count_in_sat();
    #[derive(Serialize)]
    struct R<'a> {
        scenario: &'a str,
        fraction: f64,
        in_sat: usize,
        not_in_sat: usize,
        undecided: usize,
        seed_set: &'a filippov_core::nonuniqueness::SeedSet,
        grid: &'a filippov_core::nonuniqueness::SaturationGrid,
    }
    let d = sys.domain;
    let mut plot = Plot::new(domain_rect(&sys), 560.0);
    let (cw, ch) = (d.p / nx as f64, d.q / ny as f64);
    for j in 0..ny {
        for i in 0..nx {
            let colour = match grid.flag(i, j) {
                CellFlag::InSat { .. } => "#e45756",
                CellFlag::NotInSat { .. } => "#dde6f0",
                CellFlag::Undecided { .. } => "#999999",
            };
            let r = Rect { x0: d.x0 + i as f64 * cw, y0: d.y0 + j as f64 * ch, x1: d.x0 + (i + 1) as f64 * cw, y1: d.y0 + (j + 1) as f64 * ch };
            plot.rect(&r, colour, 1.0);
        }
    }
    for iv in &seeds.intervals {
        let n = 64;
        let mut pts = Vec::new();
        for k in 0..=n {
            let s = iv.start + (iv.end - iv.start) * k as f64 / n as f64;
            if let Ok(Some(p)) = sys.surface_point(iv.surface, s, None) {
                pts.push(p);
            }
        }
        plot.polyline(&pts, "black");
    }
    for p in &seeds.points {
        plot.marker(p.point, "black");
    }
    let svg = plot.finish(&format!("{}: {} (fraction {:.4})", sys.name, grid.note, grid.fraction));
    let r = R {
        scenario: &sys.name,
        fraction: grid.fraction,
        in_sat,
        not_in_sat: nx * ny - in_sat - undecided,
        undecided,
        seed_set: &seeds,
        grid: &grid,
    };
    Ok(Emission { json: envelope(cfg, &r)?, csv: None, svg: Some(svg) })
}

fn read_arg(flag: &'static str, s: &str) -> Result<String, Failure> {
    match s.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|e| usage(flag, format!("{path}: {e}"))),
        None => Ok(s.to_string()),
    }
}

fn stripes(flag: &'static str, s: &str) -> Result<StripedSpec, Failure> {
    let text = read_arg(flag, s)?;
    let spec: StripedSpec = serde_json::from_str(&text).map_err(|e| usage(flag, e.to_string()))?;
    spec.validate().map_err(|e| usage(flag, e.to_string()))?;
    Ok(spec)
}

pub fn check_measure(a: &CheckMeasureArgs, cfg: &Command) -> Out {
    let sys = match (&a.scenario, &a.stripes) {
        (Some(name), _) => load(name)?,
        (None, Some(s)) => stripes("--stripes", s)?.build(None)?,
        (None, None) => return Err(usage("--scenario", "give --scenario or --stripes")),
    };
    let opts = flow_options(&a.integration)?;
    let mut solved = None;
    let densities = if a.unit_density {
        Densities::Unit
    } else if a.solved_density {
        let (spec, pieces) = StripedSpec::from_system(&sys).map_err(|e| usage("--solved-density", e.to_string()))?;
        let sol = solve_striped_density(&spec)?;
        let mut per = vec![Expr::num(1.0); sys.pieces.len()];
        for (k, &piece) in pieces.iter().enumerate() {
            per[piece] = Expr::num(sol.alpha[k]);
        }
        solved = Some(sol);
        Densities::PerPiece(per)
    } else {
        Densities::Scenario
    };
    let mut sets = a.set.clone();
    if let Some(path) = &a.sets {
        let text = std::fs::read_to_string(path).map_err(|e| usage("--sets", format!("{}: {e}", path.display())))?;
        let more: Vec<Rect> = serde_json::from_str(&text).map_err(|e| usage("--sets", e.to_string()))?;
        for r in &more {
            Rect::new(r.x0, r.y0, r.x1, r.y1).map_err(|e| usage("--sets", e.to_string()))?;
        }
        sets.extend(more);
    }
    if a.samples < 2 {
        return Err(usage("--samples", "need at least 2"));
    }
    let report = measure_report(&sys, &densities, a.samples, &sets, &a.times, a.res.max(1), &opts).map_err(|e| match e {
        filippov_core::Error::InvalidArgument(m) => usage("--set", m),
        other => other.into(),
    })?;
    #[derive(Serialize)]
    struct R<'a> {
        scenario: &'a str,
        density: &'static str,
        solved: Option<filippov_core::measure::StripedSolution>,
        flux_residual: f64,
        report: filippov_core::measure::MeasureReport,
    }
    let density = if a.unit_density {
        "unit"
    } else if a.solved_density {
        "solved"
    } else {
        "scenario"
    };
    json_only(cfg, &R { scenario: &sys.name, density, solved, flux_residual: report.flux_residual(), report })
}

pub fn density_solve(a: &DensitySolveArgs, cfg: &Command) -> Out {
    let spec = stripes("--stripes", &a.stripes)?;
    let sol = solve_striped_density(&spec)?;
    if let filippov_core::measure::StripedVerdict::Infeasible { reason } = &sol.verdict {
        return Err(Failure::Compute {
            error: filippov_core::Error::Infeasible(reason.clone()),
            detail: Some(serde_json::to_value(&sol)?),
        });
    }
    json_only(cfg, &sol)
}

pub fn return_map_cmd(a: &ReturnMapArgs, cfg: &Command) -> Out {
    let sys = load(&a.scenario)?;
    if a.surface >= sys.surfaces.len() {
        return Err(usage("--surface", format!("scenario has no surface {}", a.surface)));
    }
    let opts = flow_options(&a.integration)?;
    let m = return_map(&sys, a.surface, a.point, &a.offsets, &opts).map_err(|e| match e {
        filippov_core::Error::InvalidArgument(m) => usage("--offsets", m),
        other => other.into(),
    })?;
    json_only(cfg, &m)
}

pub fn catalog(a: &CatalogArgs, cfg: &Command) -> Out {
    if let Some(name) = &a.show {
        let src = scenarios::source(name).map_err(|e| usage("--show", e.to_string()))?;
        #[derive(Serialize)]
        struct R<'a> {
            name: &'a str,
            source: &'a str,
        }
        return json_only(cfg, &R { name, source: src });
    }
    #[derive(Serialize)]
    struct Entry {
        name: &'static str,
        description: String,
        domain: filippov_core::QuotientDomain,
        surfaces: usize,
        pieces: usize,
    }
    let mut out = Vec::new();
    for name in scenarios::names() {
        let sys = scenarios::get(name)?;
        let description = scenarios::source(name)?
            .lines()
            .find_map(|l| l.strip_prefix('#'))
            .map(|l| l.trim().to_string())
            .unwrap_or_default();
        out.push(Entry { name, description, domain: sys.domain, surfaces: sys.surfaces.len(), pieces: sys.pieces.len() });
    }
    json_only(cfg, &out)
}

/// Run one subcommand, embedding `cfg` as the resolved configuration.
pub fn execute(cmd: &Command) -> Out {
    match cmd {
        Command::Classify(a) => classify(a, cmd),
        Command::Integrate(a) => integrate(a, cmd),
        Command::Flowset(a) => flowset(a, cmd),
        Command::Satnz(a) => satnz(a, cmd),
        Command::CheckMeasure(a) => check_measure(a, cmd),
        Command::DensitySolve(a) => density_solve(a, cmd),
        Command::ReturnMap(a) => return_map_cmd(a, cmd),
        Command::Catalog(a) => catalog(a, cmd),
        Command::Rerun(_) => Err(usage("rerun", "a recorded configuration cannot itself be a rerun")),
    }
}

pub fn outputs(cmd: &Command) -> Option<&Outputs> {
    Some(match cmd {
        Command::Classify(a) => &a.output,
        Command::Integrate(a) => &a.output,
        Command::Flowset(a) => &a.output,
        Command::Satnz(a) => &a.output,
        Command::CheckMeasure(a) => &a.output,
        Command::DensitySolve(a) => &a.output,
        Command::ReturnMap(a) => &a.output,
        Command::Catalog(a) => &a.output,
        Command::Rerun(_) => return None,
    })
}

/// Recorded configuration from an earlier JSON output.
pub fn recorded(path: &PathBuf) -> Result<Command, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| usage("FROM", format!("{}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| usage("FROM", e.to_string()))?;
    let cfg = v.get("config").cloned().ok_or_else(|| usage("FROM", "no `config` field"))?;
    serde_json::from_value(cfg).map_err(|e| usage("FROM", e.to_string()))
}
