use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use lcval::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match cli.run() {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let text = report.render(cli.format);
    let written = match cli.destination() {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                let _ = std::fs::create_dir_all(dir);
            }
            std::fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()))
        }
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    if report.pass {
        ExitCode::SUCCESS
    } else {
        eprintln!("{}: at least one check failed", report.command);
        ExitCode::from(1)
    }
}
