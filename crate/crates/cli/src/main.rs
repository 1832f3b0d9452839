use std::process::ExitCode;

use bdg_cli::{run_scenario, Args};
use clap::Parser;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    match args.resolve().and_then(|s| run_scenario(&s)) {
        Ok(report) => {
            for r in &report.results {
                println!(
                    "{}: converged={} iterations={} Delta(0)/E_F={:.6} max f={} fflo={}",
                    r.spec.label(),
                    r.converged,
                    r.iterations,
                    r.delta_at_origin_scaled(),
                    r.max_relative.map_or("n/a".into(), |f| format!("{f:.4}")),
                    r.fflo.class
                );
            }
            println!("summary: {}", report.summary.display());
            if report.all_converged() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {:#}", anyhow::Error::from(e));
            ExitCode::from(1)
        }
    }
}
