use clap::Parser;
use dsgrav_cli::args::Cli;
use std::process::ExitCode;
use std::time::Instant;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let outcome = (|| -> anyhow::Result<bool> {
        let report = dsgrav_cli::run_scenario(&cli)?;
        let dir = dsgrav_cli::output_dir(&cli)?;
        let stem = dsgrav_cli::output_stem(&cli, &report)?;
        let paths = report.emit(&dir, &stem)?;
        print!("{}", report.summary());
        for p in paths {
            println!("wrote {}", p.display());
        }
        Ok(report.all_passed())
    })();
    eprintln!("wall time: {:.3} s", start.elapsed().as_secs_f64());
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
