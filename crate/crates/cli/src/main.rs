mod args;
mod commands;
mod output;
mod svg;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, Outputs};
use commands::Failure;

fn threads() {
    if let Some(n) = std::env::var("FILIPPOV_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn report(cfg: Option<&Command>, f: Failure) -> ExitCode {
    match f {
        Failure::Usage { flag, message } => {
            eprintln!("error: invalid value for {flag}: {message}");
            eprintln!("run `filippov --help` for usage");
            print!("{}", output::error_json(cfg, "usage", &format!("{flag}: {message}"), None));
            ExitCode::from(2)
        }
        Failure::Compute { error, detail } => {
            eprintln!("error: {error}");
            print!("{}", output::error_json(cfg, error.kind(), &error.to_string(), detail));
            ExitCode::from(1)
        }
        Failure::Io(message) => {
            eprintln!("error: {message}");
            print!("{}", output::error_json(cfg, "io", &message, None));
            ExitCode::from(1)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(2),
            };
        }
    };
    threads();
    let (cmd, out): (Command, Outputs) = match cli.command {
        Command::Rerun(r) => {
            let cmd = match commands::recorded(&r.from) {
                Ok(c) => c,
                Err(f) => return report(None, f),
            };
            let mut out = commands::outputs(&cmd).cloned().unwrap_or(Outputs { out: None, svg: None });
            if r.out.is_some() {
                out = Outputs { out: r.out, svg: None };
            }
            (cmd, out)
        }
        other => {
            let out = commands::outputs(&other).cloned().unwrap_or(Outputs { out: None, svg: None });
            (other, out)
        }
    };
    match commands::execute(&cmd) {
        Ok(e) => match output::emit(&out, &e) {
            Ok(()) => ExitCode::SUCCESS,
            Err(err) => report(Some(&cmd), Failure::Io(err.to_string())),
        },
        Err(f) => report(Some(&cmd), f),
    }
}
