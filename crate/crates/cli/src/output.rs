use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use crate::args::{Command, Outputs};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    tool: &'static str,
    version: &'static str,
    timestamp: u64,
    config: &'a Command,
    result: &'a T,
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

pub fn envelope<T: Serialize>(config: &Command, result: &T) -> serde_json::Result<String> {
    let env = Envelope {
        schema_version: SCHEMA_VERSION,
        tool: "filippov",
        version: env!("CARGO_PKG_VERSION"),
        timestamp: now(),
        config,
        result,
    };
    let mut s = serde_json::to_string_pretty(&env)?;
    s.push('\n');
    Ok(s)
}

pub fn error_json(config: Option<&Command>, kind: &str, message: &str, detail: Option<Value>) -> String {
    let mut v = serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "tool": "filippov",
        "error": { "kind": kind, "message": message },
    });
    if let Some(c) = config {
        v["config"] = serde_json::to_value(c).unwrap_or(Value::Null);
    }
    if let Some(d) = detail {
        v["error"]["detail"] = d;
    }
    let mut s = serde_json::to_string_pretty(&v).unwrap_or_default();
    s.push('\n');
    s
}

/// Write through a temporary file so readers never see a partial output.
pub fn write_file(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

/// Finished artifacts of one command.
pub struct Emission {
    pub json: String,
    pub csv: Option<String>,
    pub svg: Option<String>,
}

pub fn is_csv(p: &Path) -> bool {
    p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Send the artifacts where the output flags say.
pub fn emit(out: &Outputs, e: &Emission) -> std::io::Result<()> {
    match &out.out {
        Some(p) if is_csv(p) && e.csv.is_some() => {
            write_file(p, e.csv.as_ref().unwrap())?;
            std::io::stdout().write_all(e.json.as_bytes())?;
        }
        Some(p) => write_file(p, &e.json)?,
        None => std::io::stdout().write_all(e.json.as_bytes())?,
    }
    if let (Some(p), Some(svg)) = (&out.svg, &e.svg) {
        write_file(p, svg)?;
    }
    Ok(())
}
