//! Scenario runner behind the `dsgrav` binary.

pub mod args;
pub mod config;
pub mod report;
pub mod scenarios;

use anyhow::{bail, Result};
use args::{Cli, Command};
use config::{merge, ScenarioConfig};
use report::RunReport;
use std::path::PathBuf;

pub const OUT_DIR_ENV: &str = "DSGRAV_OUT_DIR";

/// Scenario name used in config files for a subcommand.
pub fn scenario_name(cmd: &Command) -> Option<&'static str> {
    Some(match cmd {
        Command::Algebra(_) => "algebra",
        Command::Lattice(_) => "lattice",
        Command::Field(_) => "field",
        Command::Orbit(_) => "orbit",
        Command::ClassicTests(_) => "classic",
        Command::Pn(_) => "pn",
        Command::Pulsar(_) => "pulsar",
        Command::Cosmo(_) => "cosmo",
        Command::Run => return None,
    })
}

fn default_command(name: &str) -> Result<Command> {
    Ok(match name {
        "algebra" => Command::Algebra(Default::default()),
        "lattice" => Command::Lattice(Default::default()),
        "field" => Command::Field(Default::default()),
        "orbit" => Command::Orbit(Default::default()),
        "classic" => Command::ClassicTests(Default::default()),
        "pn" => Command::Pn(Default::default()),
        "pulsar" => Command::Pulsar(Default::default()),
        "cosmo" => Command::Cosmo(Default::default()),
        other => bail!("scenario: unknown scenario '{other}'"),
    })
}

/// Resolve config and flags, then run the scenario. Nothing is written here.
pub fn run_scenario(cli: &Cli) -> Result<RunReport> {
    let cfg = cli.config.as_deref().map(ScenarioConfig::load).transpose()?;
    let command = match (&cli.command, &cfg) {
        (Command::Run, Some(c)) => default_command(&c.scenario)?,
        (Command::Run, None) => bail!("run needs --config <file>"),
        (cmd, Some(c)) if scenario_name(cmd) != Some(c.scenario.as_str()) => {
            bail!(
                "config names scenario '{}' but the command is '{}'",
                c.scenario,
                scenario_name(cmd).unwrap_or("run")
            )
        }
        (cmd, _) => clone_command(cmd),
    };
    let params = cfg.as_ref().map(|c| &c.parameters);
    let seed = cli.seed.or(cfg.as_ref().and_then(|c| c.seed));
    match &command {
        Command::Algebra(a) => scenarios::algebra(&merge(a, params)?, seed),
        Command::Lattice(a) => scenarios::lattice(&merge(a, params)?, seed),
        Command::Field(a) => scenarios::field(&merge(a, params)?, seed),
        Command::Orbit(a) => scenarios::orbit(&merge(a, params)?, seed),
        Command::ClassicTests(a) => scenarios::classic(&merge(a, params)?, seed),
        Command::Pn(a) => scenarios::pn(&merge(a, params)?, seed),
        Command::Pulsar(a) => scenarios::pulsar(&merge(a, params)?, seed),
        Command::Cosmo(a) => scenarios::cosmology(&merge(a, params)?, seed),
        Command::Run => unreachable!(),
    }
}

fn clone_command(cmd: &Command) -> Command {
    match cmd {
        Command::Algebra(a) => Command::Algebra(a.clone()),
        Command::Lattice(a) => Command::Lattice(a.clone()),
        Command::Field(a) => Command::Field(a.clone()),
        Command::Orbit(a) => Command::Orbit(a.clone()),
        Command::ClassicTests(a) => Command::ClassicTests(a.clone()),
        Command::Pn(a) => Command::Pn(a.clone()),
        Command::Pulsar(a) => Command::Pulsar(a.clone()),
        Command::Cosmo(a) => Command::Cosmo(a.clone()),
        Command::Run => Command::Run,
    }
}

/// Output directory: flag, then environment, then config, then `dsgrav-out`.
pub fn output_dir(cli: &Cli) -> Result<PathBuf> {
    if let Some(d) = &cli.out_dir {
        return Ok(d.clone());
    }
    if let Some(d) = std::env::var_os(OUT_DIR_ENV).filter(|d| !d.is_empty()) {
        return Ok(PathBuf::from(d));
    }
    if let Some(path) = &cli.config {
        if let Some(d) = ScenarioConfig::load(path)?.output.dir {
            return Ok(d);
        }
    }
    Ok(PathBuf::from("dsgrav-out"))
}

pub fn output_stem(cli: &Cli, report: &RunReport) -> Result<String> {
    if let Some(s) = &cli.stem {
        return Ok(s.clone());
    }
    if let Some(path) = &cli.config {
        if let Some(s) = ScenarioConfig::load(path)?.output.stem {
            return Ok(s);
        }
    }
    Ok(report.scenario.clone())
}
