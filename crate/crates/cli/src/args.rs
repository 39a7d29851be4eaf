use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use filippov_core::flow::Rect;
use filippov_core::Vec2;
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "filippov", version, about = "Filippov systems: classification, flows, non-uniqueness and invariant measures")]
#[command(subcommand_required = true, arg_required_else_help = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Everything needed to reproduce a run. Embedded in every JSON output.
#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Label the points of one switching surface.
    Classify(ClassifyArgs),
    /// Follow the solutions from one point.
    Integrate(IntegrateArgs),
    /// Cover the image of a set of boxes under the flow.
    Flowset(FlowsetArgs),
    /// Grid estimate of the saturation of the non-uniqueness set.
    Satnz(SatnzArgs),
    /// Flux, divergence and push-forward checks for a density.
    CheckMeasure(CheckMeasureArgs),
    /// Densities of a striped system on the torus or the Klein bottle.
    DensitySolve(DensitySolveArgs),
    /// First-return map around a fold-fold point.
    ReturnMap(ReturnMapArgs),
    /// List the built-in scenarios.
    Catalog(CatalogArgs),
    /// Run again from the configuration embedded in an earlier JSON output.
    #[serde(skip)]
    Rerun(RerunArgs),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct Integration {
    /// Embedded Runge-Kutta pair: dopri5, rkf45 or cash-karp.
    #[arg(long, default_value = "dopri5")]
    pub stepper: String,
    /// Local error tolerance per step.
    #[arg(long, default_value_t = 1e-10, value_parser = tolerance)]
    pub tol: f64,
    /// Largest step.
    #[arg(long, default_value_t = 0.05, value_parser = tolerance)]
    pub h_max: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct Outputs {
    /// Output file; `.csv` where supported, JSON otherwise. JSON goes to stdout when absent or CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write an SVG plot.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ClassifyArgs {
    /// Built-in scenario name or path to a .scn file.
    #[arg(long)]
    pub scenario: String,
    /// Level surface index, or seam-h / seam-v.
    #[arg(long, default_value = "0")]
    pub surface: String,
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u32).range(16..))]
    pub samples: u32,
    #[command(flatten)]
    pub output: Outputs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyArg {
    Det,
    All,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct IntegrateArgs {
    #[arg(long)]
    pub scenario: String,
    /// Start point `x,y`.
    #[arg(long, value_parser = point, allow_hyphen_values = true)]
    pub start: Vec2,
    /// Time horizon; negative for backward time.
    #[arg(long, allow_hyphen_values = true)]
    pub time: f64,
    #[arg(long, value_enum, default_value_t = PolicyArg::All)]
    pub policy: PolicyArg,
    /// Leaf cap for the all-branches policy.
    #[arg(long, default_value_t = 64)]
    pub cap: usize,
    #[command(flatten)]
    pub integration: Integration,
    #[command(flatten)]
    pub output: Outputs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct FlowsetArgs {
    #[arg(long)]
    pub scenario: String,
    /// Box `x0,y0,x1,y1`; repeat for several.
    #[arg(long = "box", value_parser = rect, required = true, allow_hyphen_values = true)]
    pub boxes: Vec<Rect>,
    #[arg(long, allow_hyphen_values = true)]
    pub time: f64,
    /// Sample cells per box edge.
    #[arg(long, default_value_t = 8)]
    pub res: usize,
    #[command(flatten)]
    pub integration: Integration,
    #[command(flatten)]
    pub output: Outputs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SatnzArgs {
    #[arg(long)]
    pub scenario: String,
    /// Grid size `NXxNY`.
    #[arg(long, default_value = "64x64", value_parser = grid)]
    pub grid: (usize, usize),
    #[arg(long, default_value_t = 2.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 64)]
    pub cap: usize,
    /// Scan samples per surface for the seed set.
    #[arg(long, default_value_t = 256)]
    pub seed_samples: usize,
    #[command(flatten)]
    pub integration: Integration,
    #[command(flatten)]
    pub output: Outputs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CheckMeasureArgs {
    /// Scenario; omit when `--stripes` is given.
    #[arg(long, required_unless_present = "stripes")]
    pub scenario: Option<String>,
    /// Striped system as JSON (or `@file`) instead of a scenario.
    #[arg(long, conflicts_with = "scenario")]
    pub stripes: Option<String>,
    /// Use the solved stripe densities instead of the scenario's.
    #[arg(long, conflicts_with = "unit_density")]
    pub solved_density: bool,
    /// Use density 1 on every piece.
    #[arg(long)]
    pub unit_density: bool,
    /// JSON file with a list of boxes `{"x0":..,"y0":..,"x1":..,"y1":..}`.
    #[arg(long)]
    pub sets: Option<PathBuf>,
    /// Box `x0,y0,x1,y1`; repeat for several.
    #[arg(long = "set", value_parser = rect, allow_hyphen_values = true)]
    pub set: Vec<Rect>,
    /// Comma-separated push-forward times.
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2", allow_hyphen_values = true)]
    pub times: Vec<f64>,
    #[arg(long, default_value_t = 8)]
    pub res: usize,
    /// Samples per surface for the flux check and per axis for the divergence check.
    #[arg(long, default_value_t = 64)]
    pub samples: usize,
    #[command(flatten)]
    pub integration: Integration,
    #[command(flatten)]
    pub output: Outputs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DensitySolveArgs {
    /// Stripe description as JSON (or `@file`), e.g. `{"mode":"torus","b":[1,2,4]}`.
    #[arg(long)]
    pub stripes: String,
    #[command(flatten)]
    pub output: Outputs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReturnMapArgs {
    #[arg(long)]
    pub scenario: String,
    /// Level surface index.
    #[arg(long, default_value_t = 0)]
    pub surface: usize,
    /// The fold-fold point `x,y`.
    #[arg(long, value_parser = point, default_value = "0,0", allow_hyphen_values = true)]
    pub point: Vec2,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.4")]
    pub offsets: Vec<f64>,
    #[command(flatten)]
    pub integration: Integration,
    #[command(flatten)]
    pub output: Outputs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CatalogArgs {
    /// Print the source of one scenario instead of the list.
    #[arg(long)]
    pub show: Option<String>,
    #[command(flatten)]
    pub output: Outputs,
}

#[derive(Debug, Clone, Args)]
pub struct RerunArgs {
    /// JSON output of an earlier run.
    pub from: PathBuf,
    /// Write here instead of the recorded output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn numbers(s: &str, n: usize) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<Result<_, _>>()?;
    if v.len() != n {
        return Err(format!("expected {n} comma-separated numbers, got {}", v.len()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err("values must be finite".into());
    }
    Ok(v)
}

pub fn point(s: &str) -> Result<Vec2, String> {
    let v = numbers(s, 2)?;
    Ok(Vec2::new(v[0], v[1]))
}

pub fn rect(s: &str) -> Result<Rect, String> {
    let v = numbers(s, 4)?;
    Rect::new(v[0], v[1], v[2], v[3]).map_err(|e| e.to_string())
}

pub fn grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(['x', 'X']).ok_or("expected NXxNY, e.g. 96x96")?;
    let nx: usize = a.trim().parse().map_err(|e| format!("`{a}`: {e}"))?;
    let ny: usize = b.trim().parse().map_err(|e| format!("`{b}`: {e}"))?;
    if nx == 0 || ny == 0 {
        return Err("grid dimensions must be positive".into());
    }
    Ok((nx, ny))
}

/// Positive and not below 1e-14.
pub fn tolerance(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("`{s}`: {e}"))?;
    if !(v >= 1e-14 && v.is_finite()) {
        return Err(format!("must be finite and at least 1e-14, got {v}"));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_parsers() {
        assert_eq!(point("-1.5, 2").unwrap(), Vec2::new(-1.5, 2.0));
        assert!(point("1").is_err());
        assert!(rect("0,0,1,1").is_ok());
        assert!(rect("1,0,0,1").is_err());
        assert_eq!(grid("96x48").unwrap(), (96, 48));
        assert!(grid("0x3").is_err());
        assert!(tolerance("1e-15").is_err());
        assert!(tolerance("1e-14").is_ok());
    }
}
