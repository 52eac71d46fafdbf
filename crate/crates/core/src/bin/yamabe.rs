use clap::Parser;
use std::process::ExitCode;
use yamabe_core::cli_io::{execute, Cli, RunConfig};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = RunConfig::from_cli(&cli).and_then(|cfg| execute(&cfg));
    match outcome {
        Ok(out) => {
            if out.written.is_empty() {
                match serde_json::to_string_pretty(&out.report) {
                    Ok(s) => println!("{s}"),
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(2);
                    }
                }
            } else {
                for p in &out.written {
                    eprintln!("wrote {}", p.display());
                }
            }
            eprintln!("{}", if out.report.pass { "PASS" } else { "FAIL" });
            if out.report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
